#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "perv/error.hpp"

namespace perv {

// Coefficient modes: exact rationals (model of Q_l) or the chain ring
// Z/l^N (model of Z_l at precision N).
class CoeffMode {
public:
    enum class Kind { Rationals, Chain };

    static CoeffMode rationals();
    static CoeffMode chain(const mpz_class& ell, unsigned precision);

    Kind kind = Kind::Rationals;
    mpz_class ell;
    unsigned precision = 0;
    mpz_class modulus;  // ell^precision, chain mode only

    bool is_chain() const { return kind == Kind::Chain; }
    bool is_rational() const { return kind == Kind::Rationals; }
    bool operator==(const CoeffMode& o) const;
    bool operator!=(const CoeffMode& o) const { return !(*this == o); }

    // Canonical representative: reduced fraction over Q, value in [0, l^N)
    // over the chain ring. Proper fractions are rejected in chain mode.
    mpq_class reduce(const mpq_class& v) const;
    mpq_class add(const mpq_class& a, const mpq_class& b) const;
    mpq_class sub(const mpq_class& a, const mpq_class& b) const;
    mpq_class mul(const mpq_class& a, const mpq_class& b) const;
    std::optional<mpq_class> inverse(const mpq_class& a) const;
    bool is_unit(const mpq_class& a) const;
    // l-adic valuation of a canonical chain element, in [0, N]; N for zero.
    unsigned val(const mpq_class& a) const;

    std::string to_string() const;
};

bool is_prime(const mpz_class& p);

// Dense matrix, row-major, entries canonical for the ambient mode.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), e_(size_t(rows) * size_t(cols)) {}

    static Mat identity(int n);
    static Mat zero(int rows, int cols) { return Mat(rows, cols); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty_shape() const { return rows_ == 0 || cols_ == 0; }

    mpq_class& at(int i, int j) { return e_[size_t(i) * cols_ + j]; }
    const mpq_class& at(int i, int j) const { return e_[size_t(i) * cols_ + j]; }

    bool is_zero() const;
    bool is_identity() const;
    bool operator==(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && e_ == o.e_; }
    bool operator!=(const Mat& o) const { return !(*this == o); }

    Mat transpose() const;
    Mat col(int j) const;
    Mat cols_slice(int j0, int n) const;
    Mat rows_slice(int i0, int n) const;

    std::string to_string() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<mpq_class> e_;
};

Mat reduce(const Mat& m, const CoeffMode& mode);
Mat add(const Mat& a, const Mat& b, const CoeffMode& mode);
Mat sub(const Mat& a, const Mat& b, const CoeffMode& mode);
Mat neg(const Mat& a, const CoeffMode& mode);
Mat mul(const Mat& a, const Mat& b, const CoeffMode& mode);
Mat scalar_mul(const mpq_class& c, const Mat& a, const CoeffMode& mode);
Mat hstack(const Mat& a, const Mat& b);
Mat vstack(const Mat& a, const Mat& b);
// Block diagonal sum.
Mat dsum(const Mat& a, const Mat& b);
Mat pow(const Mat& a, const mpz_class& k, const CoeffMode& mode);  // k >= 0

// Finitely generated module in invariant-factor form.  Over Q only the
// free rank is populated; over Z/l^N a factor of full order l^N counts as
// free and torsion exponents lie in [1, N).
struct CanonicalModule {
    int free_rank = 0;
    std::vector<unsigned> torsion_exponents;  // sorted non-increasing
    std::optional<Mat> embedding_basis;       // columns generate inside an ambient space
    bool precision_saturated = false;

    int generator_count() const { return free_rank + int(torsion_exponents.size()); }
    bool is_trivial() const { return generator_count() == 0; }
    bool same_structure(const CanonicalModule& o) const {
        return free_rank == o.free_rank && torsion_exponents == o.torsion_exponents;
    }
    // Total size as log_l; only meaningful in chain mode.
    unsigned log_size(const CoeffMode& mode) const;
    std::string structure_string(const CoeffMode& mode) const;
};

CanonicalModule make_module(int free_rank, std::vector<unsigned> torsion, const CoeffMode& mode);

// Canonical echelon data: H = U * pad(m) with U invertible.  Over Q this is
// the reduced row echelon form (same row count as the input, zero rows at
// the bottom); over Z/l^N it is the Howell normal form, where pad(m) appends
// zero rows when the Howell form needs more rows than the input had.
struct EchelonForm {
    Mat H;
    Mat U;
    std::vector<int> pivot_col;        // per pivot row
    std::vector<unsigned> pivot_val;   // l-valuation of each pivot (chain mode)
    int rank() const { return int(pivot_col.size()); }
};

EchelonForm canonical_form(const Mat& m, const CoeffMode& mode);

// Kernel of m as a submodule of the column space (Z/l^N)^cols or Q^cols,
// with a canonical embedding basis.
CanonicalModule kernel(const Mat& m, const CoeffMode& mode);
// Invariant-factor presentation of coker(m) = target / column span.
CanonicalModule cokernel_presentation(const Mat& m, const CoeffMode& mode);
// One solution x of m*x = rhs (all columns simultaneously), canonicalized by
// reducing against the kernel; absent when no solution exists.
std::optional<Mat> solve(const Mat& m, const Mat& rhs, const CoeffMode& mode);
std::optional<Mat> try_inverse(const Mat& m, const CoeffMode& mode);

// Canonical basis (as columns) of the column span.
Mat colspan_basis(const Mat& m, const CoeffMode& mode);
bool span_contains(const Mat& basis, const Mat& v, const CoeffMode& mode);
// Equality of column spans.
bool same_span(const Mat& a, const Mat& b, const CoeffMode& mode);

// Smith invariant factors d_1 | d_2 | ... of an integer matrix,
// min(rows, cols) of them, non-negative.
std::vector<mpz_class> smith_form_integers(const Mat& m);

// Subquotient span(G)/span(R) of the ambient module, with canonical
// invariant-factor structure, lifted generators and coordinate maps.
// Relation columns must lie in span(G).
class Subquotient {
public:
    CanonicalModule structure;  // embedding data absent; generators are lifted below
    Mat gen_lifts;              // ambient x k, lifts of the canonical generators

    // Coordinates of ambient columns (members of span(G)) in the canonical
    // generators, reduced modulo the relations.
    Mat express(const Mat& v) const;
    bool is_trivial() const { return structure.is_trivial(); }

    // implementation data
    CoeffMode mode;
    int ambient = 0;
    // chain mode: basis of the generator lattice and smith transform
    Mat bg;      // ambient x ambient integer basis (column HNF), chain mode
    Mat usmith;  // smith row transform, chain mode
    std::vector<mpz_class> ann;  // annihilator of each kept generator (chain)
    std::vector<int> keep;       // kept smith coordinates (chain) / kept basis coords (Q)
    // rational mode: basis of span(G) and RREF of the relation coordinates
    Mat qbasis;   // ambient x g
    Mat qrelref;  // RREF rows spanning the relation subspace in qbasis coords
    std::vector<int> qrel_pivots;
};

Subquotient subquotient(int ambient, const Mat& gens, const Mat& rels, const CoeffMode& mode);

// Integer-polynomial utilities (coefficients low-to-high degree).
using ZPoly = std::vector<mpz_class>;

ZPoly poly_trim(ZPoly p);
ZPoly poly_mul(const ZPoly& a, const ZPoly& b);
// Exact division; nullopt when the division has a remainder.
std::optional<ZPoly> poly_div_exact(const ZPoly& num, const ZPoly& den);
std::string poly_to_string(const ZPoly& p);
int poly_degree(const ZPoly& p);  // -1 for the zero polynomial

// k-th cyclotomic polynomial.
ZPoly cyclotomic(unsigned k);
unsigned euler_phi(unsigned k);

// True iff the monic integer polynomial is a product of cyclotomic
// polynomials (trial division by Phi_k for all phi(k) <= deg).
bool cyclotomic_product_test(const ZPoly& p);

// Characteristic polynomial, monic, exact (Faddeev-LeVerrier over Q).
ZPoly charpoly(const Mat& m);

std::string scalar_to_string(const mpq_class& v);
mpq_class scalar_from_string(const std::string& s);  // throws E_NUMBER / E_FRACTION

}  // namespace perv
