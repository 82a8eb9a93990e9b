#pragma once

#include "perv/rep.hpp"

namespace perv {

// Local tame profile at a boundary point: the inertia generator t and, when
// the residue field is finite with q elements, a Frobenius F subject to
// F t F^{-1} = t^q.
struct LocalProfile {
    enum class Kind { TameGeometric, TameFrobenius };
    Kind kind = Kind::TameGeometric;
    CoeffMode mode = CoeffMode::rationals();
    Carrier carrier;
    Mat t;
    std::optional<Mat> frobenius;
    mpz_class q;  // TameFrobenius only

    static LocalProfile geometric(const Mat& t, const Carrier& carrier, const CoeffMode& mode);
    static LocalProfile with_frobenius(const Mat& t, const Mat& f, const mpz_class& q,
                                       const Carrier& carrier, const CoeffMode& mode);
};

struct ProfileReport {
    bool valid = true;
    std::vector<std::string> failures;
    void add(const std::string& s) {
        valid = false;
        failures.push_back(s);
    }
};

ProfileReport validate_profile(const LocalProfile& p);

// Cochain complex in degrees [0, 1] of modules with an action of the
// residual group (trivial, or procyclic generated by Frobenius).  Weight
// tags record the declared weight of each level.
struct TwoTermComplex {
    CoeffMode mode = CoeffMode::rationals();
    GroupPtr residual;  // Trivial or ZhatFrobenius
    Carrier c0, c1;
    Mat d;  // c0 -> c1
    std::vector<Mat> act0, act1;  // one per residual generator
    int weight_tag0 = 0;
    int weight_tag1 = 0;
    std::optional<mpz_class> weight_base;  // q of the residual Frobenius
    // Boundary targets store the norm-scaled Frobenius on level 1 (the strict
    // chain-map normalization); the untwist factor recovers the plain matrix:
    // untwisted = act1 * act1_untwist.  Absent means identity.
    std::optional<Mat> act1_untwist;

    static TwoTermComplex zero(GroupPtr residual, const CoeffMode& mode);
    void validate() const;
    bool is_acyclic() const;
    TwoTermComplex direct_sum(const TwoTermComplex& o) const;
    Representation level_rep(int level) const;  // level 0 or 1 as a residual representation
    // Level-1 action with the norm twist removed (weight-faithful matrix).
    Mat untwisted_act1(int generator) const;
};

// Derived inertia invariants of the local representation as the two-term
// complex [M --(t-1)--> M].  For a finite residue field, level 0 carries F
// and level 1 carries F * N^{-1} with N = 1 + u + ... + u^{q-1},
// u = F^{-1} t F; this is the unique scaling that makes the residual action
// a strict chain map.  Reporting functions untwist by N (which acts as
// multiplication by q on the cokernel), so H^1 carries the plain Frobenius
// matrix together with the +2 weight tag.
TwoTermComplex boundary(const LocalProfile& p, const Representation& m);

struct TaggedRep {
    Representation rep;
    int weight_tag = 0;
};

TaggedRep h0(const TwoTermComplex& c);
TaggedRep h1(const TwoTermComplex& c);

// Geometric series 1 + u + ... + u^{e-1}.
Mat matrix_geometric_sum(const Mat& u, const mpz_class& e, const CoeffMode& mode);

}  // namespace perv
