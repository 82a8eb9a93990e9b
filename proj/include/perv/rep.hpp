#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "perv/carrier.hpp"

namespace perv {

// A word in marked generators: signed 1-based indices, negative for the
// inverse.  For a free profinite group with the product relation the index
// m+1 names the derived generator g_inf = (g_1 ... g_m)^{-1}.
using Word = std::vector<int>;

std::string word_to_string(const Word& w);

class GroupPresentation;
using GroupPtr = std::shared_ptr<const GroupPresentation>;

class GroupPresentation {
public:
    enum class Kind { FreeProfinite, ZhatFrobenius, FiniteExplicit, LocalTame, Trivial };

    static GroupPtr free_profinite(int m, bool with_product_relation,
                                   std::vector<std::string> names = {});
    static GroupPtr zhat(std::string name = "F");
    static GroupPtr trivial();
    // Permutation generators on {0, ..., n-1}.
    static GroupPtr finite_explicit(std::vector<std::vector<int>> perms,
                                    std::vector<std::string> names = {});
    static GroupPtr local_tame(const mpz_class& q);

    Kind kind;
    std::vector<std::string> generator_names;
    bool product_relation = false;  // FreeProfinite only
    mpz_class q;                    // LocalTame only
    std::vector<std::vector<int>> perms;  // FiniteExplicit only

    int num_generators() const { return int(generator_names.size()); }
    // Highest index usable in words (includes the derived generator).
    int num_word_generators() const {
        return num_generators() + (product_relation ? 1 : 0);
    }

    // FiniteExplicit closure, cached eagerly: each element as a permutation
    // together with one word in the generators.
    struct Element {
        std::vector<int> perm;
        Word word;
    };
    const std::vector<Element>& elements() const { return elements_; }
    long order() const { return long(elements_.size()); }

    bool same_presentation(const GroupPresentation& o) const;
    std::string describe() const;

private:
    std::vector<Element> elements_;
    void close();
    friend GroupPtr make_group(GroupPresentation g);
};

// Finitely generated representation over the active mode.  The carrier is a
// module in invariant-factor form; one invertible action matrix per marked
// generator.  Defining relations of the group are checked at construction.
class Representation {
public:
    Representation() = default;
    Representation(GroupPtr group, Carrier carrier, std::vector<Mat> actions, CoeffMode mode,
                   std::optional<mpz_class> frobenius_weight_base = std::nullopt);

    static Representation trivial_rep(GroupPtr group, int rank, const CoeffMode& mode);

    const GroupPtr& group() const { return group_; }
    const Carrier& carrier() const { return carrier_; }
    const CoeffMode& mode() const { return mode_; }
    int rank() const { return carrier_.rank; }
    const std::vector<Mat>& actions() const { return actions_; }
    const Mat& action(int i) const { return actions_[size_t(i)]; }
    const std::optional<mpz_class>& frobenius_weight_base() const { return weight_base_; }
    void set_frobenius_weight_base(const mpz_class& q) { weight_base_ = q; }

    // Evaluate a word (indices may be negative; m+1 = derived generator).
    Mat eval(const Word& w) const;
    Mat eval_generator(int signed_index) const;

    Representation direct_sum(const Representation& o) const;
    // Conjugate by an invertible carrier automorphism: actions g -> p g p^{-1}.
    Representation conjugate(const Mat& p) const;

    bool is_zero() const { return carrier_.rank == 0; }

private:
    GroupPtr group_;
    Carrier carrier_;
    std::vector<Mat> actions_;
    CoeffMode mode_ = CoeffMode::rationals();
    std::optional<mpz_class> weight_base_;
    void validate() const;
};

struct RepMorphism {
    // target-rank x source-rank matrix intertwining the two actions
    Mat matrix;
};

// Group homomorphism descriptor: the source group and, for each of its
// marked generators, a word in the target group's generators.
struct HomDescriptor {
    GroupPtr source;
    std::vector<Word> images;
};

// Pullback of r along the descriptor (the forgetful functor on actions).
Representation restrict_rep(const Representation& r, const HomDescriptor& along);

struct InductionDescriptor {
    enum class Kind { ZhatIndex, FiniteCosets };
    Kind kind = Kind::ZhatIndex;
    // ZhatIndex: n -> d*n on the procyclic group
    int index = 1;
    // FiniteCosets: finite target group, embedding of the source generators,
    // and explicit coset representatives (words in the target group)
    GroupPtr target;
    std::vector<Word> embedded_generators;
    std::vector<Word> coset_representatives;
};

Representation induce(const Representation& r, const InductionDescriptor& along);

// Module of intertwiners, with an explicit basis.
struct HomSpace {
    CanonicalModule module;
    std::vector<RepMorphism> basis;
    Subquotient coords;  // over the vectorized unknown space
    Carrier src, dst;
    CoeffMode mode;
    // Coordinates of an intertwiner's class in the basis.
    Mat express(const Mat& intertwiner) const;
};

HomSpace hom_space(const Representation& a, const Representation& b);

// Field modes only (Q, or Z/l with N = 1).
bool irreducibility_test(const Representation& r);
std::vector<Representation> composition_series(const Representation& r);
// Invariant carrier submodule witnessing reducibility, if the test found one.
std::optional<Mat> invariant_submodule(const Representation& r);

struct FiniteImageResult {
    bool finite = false;
    long order = 0;  // valid when finite
};
FiniteImageResult finite_image_test(const Representation& r, long order_bound);

enum class ArtinVerdict { ArtinCertified, NotArtin, Undetermined };
std::string to_string(ArtinVerdict v);

// Deterministic pseudo-random streams for spinning and seeded tests.
class Rng {
public:
    explicit Rng(unsigned long seed) : state_(seed * 6364136223846793005ull + 1442695040888963407ull) {}
    unsigned long next();
    long uniform(long lo, long hi);  // inclusive
private:
    unsigned long state_;
};

// Factorization of a monic integer polynomial into certified-irreducible
// factors of degree <= 3 plus cyclotomic factors; anything else stays in
// the remainder.
struct PolyFactorization {
    std::vector<std::pair<ZPoly, int>> factors;  // (monic irreducible, multiplicity)
    ZPoly remainder;                             // monic, possibly reducible; 1 when complete
    bool complete = false;
};
PolyFactorization factor_monic_bounded(const ZPoly& p);

}  // namespace perv
