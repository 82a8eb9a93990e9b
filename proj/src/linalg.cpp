#include "perv/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <map>
#include <sstream>

namespace perv {

// ---------------------------------------------------------------------------
// CoeffMode

CoeffMode CoeffMode::rationals() {
    CoeffMode m;
    m.kind = Kind::Rationals;
    return m;
}

CoeffMode CoeffMode::chain(const mpz_class& ell, unsigned precision) {
    if (!is_prime(ell)) fail("InvalidCoefficient", "chain-ring modulus base must be prime, got " + ell.get_str());
    if (precision < 1) fail("InvalidCoefficient", "chain-ring precision must be >= 1");
    CoeffMode m;
    m.kind = Kind::Chain;
    m.ell = ell;
    m.precision = precision;
    mpz_pow_ui(m.modulus.get_mpz_t(), ell.get_mpz_t(), precision);
    return m;
}

bool CoeffMode::operator==(const CoeffMode& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Rationals) return true;
    return ell == o.ell && precision == o.precision;
}

mpq_class CoeffMode::reduce(const mpq_class& v) const {
    if (is_rational()) {
        mpq_class r = v;
        r.canonicalize();
        return r;
    }
    if (v.get_den() != 1)
        fail("InvalidCoefficient", "chain-ring entry has a denominator: " + v.get_str());
    mpz_class r;
    mpz_mod(r.get_mpz_t(), v.get_num().get_mpz_t(), modulus.get_mpz_t());
    return mpq_class(r);
}

mpq_class CoeffMode::add(const mpq_class& a, const mpq_class& b) const { return reduce(mpq_class(a + b)); }
mpq_class CoeffMode::sub(const mpq_class& a, const mpq_class& b) const { return reduce(mpq_class(a - b)); }
mpq_class CoeffMode::mul(const mpq_class& a, const mpq_class& b) const { return reduce(mpq_class(a * b)); }

std::optional<mpq_class> CoeffMode::inverse(const mpq_class& a) const {
    if (is_rational()) {
        if (a == 0) return std::nullopt;
        return mpq_class(1) / a;
    }
    mpq_class c = reduce(a);
    mpz_class inv;
    if (mpz_invert(inv.get_mpz_t(), c.get_num().get_mpz_t(), modulus.get_mpz_t()) == 0) return std::nullopt;
    return mpq_class(inv);
}

bool CoeffMode::is_unit(const mpq_class& a) const { return inverse(a).has_value(); }

unsigned CoeffMode::val(const mpq_class& a) const {
    assert(is_chain());
    mpq_class c = reduce(a);
    if (c == 0) return precision;
    mpz_class n = c.get_num();
    unsigned v = 0;
    while (mpz_divisible_p(n.get_mpz_t(), ell.get_mpz_t())) {
        n /= ell;
        ++v;
    }
    return v;
}

std::string CoeffMode::to_string() const {
    if (is_rational()) return "rational";
    return "chain " + ell.get_str() + " " + std::to_string(precision);
}

bool is_prime(const mpz_class& p) {
    if (p < 2) return false;
    if (p < 4) return true;
    if (p % 2 == 0) return false;
    // Deterministic trial division; moduli in scope are small.
    mpz_class d = 3;
    while (d * d <= p) {
        if (p % d == 0) return false;
        d += 2;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Mat basics

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

bool Mat::is_zero() const {
    for (const auto& x : e_)
        if (x != 0) return false;
    return true;
}

bool Mat::is_identity() const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            if (at(i, j) != (i == j ? 1 : 0)) return false;
    return true;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
}

Mat Mat::col(int j) const { return cols_slice(j, 1); }

Mat Mat::cols_slice(int j0, int n) const {
    Mat s(rows_, n);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < n; ++j) s.at(i, j) = at(i, j0 + j);
    return s;
}

Mat Mat::rows_slice(int i0, int n) const {
    Mat s(n, cols_);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < cols_; ++j) s.at(i, j) = at(i0 + i, j);
    return s;
}

std::string Mat::to_string() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < rows_; ++i) {
        if (i) os << "; ";
        for (int j = 0; j < cols_; ++j) {
            if (j) os << " ";
            os << at(i, j).get_str();
        }
    }
    os << "]";
    return os.str();
}

Mat reduce(const Mat& m, const CoeffMode& mode) {
    Mat r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r.at(i, j) = mode.reduce(m.at(i, j));
    return r;
}

Mat add(const Mat& a, const Mat& b, const CoeffMode& mode) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) fail("ShapeError", "matrix addition shape mismatch");
    Mat r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = mode.add(a.at(i, j), b.at(i, j));
    return r;
}

Mat sub(const Mat& a, const Mat& b, const CoeffMode& mode) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) fail("ShapeError", "matrix subtraction shape mismatch");
    Mat r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = mode.sub(a.at(i, j), b.at(i, j));
    return r;
}

Mat neg(const Mat& a, const CoeffMode& mode) {
    Mat r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = mode.reduce(mpq_class(-a.at(i, j)));
    return r;
}

Mat mul(const Mat& a, const Mat& b, const CoeffMode& mode) {
    if (a.cols() != b.rows()) fail("ShapeError", "matrix product shape mismatch");
    Mat r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const mpq_class& aik = a.at(i, k);
            if (aik == 0) continue;
            for (int j = 0; j < b.cols(); ++j) {
                if (b.at(k, j) == 0) continue;
                r.at(i, j) += aik * b.at(k, j);
            }
        }
    return reduce(r, mode);
}

Mat scalar_mul(const mpq_class& c, const Mat& a, const CoeffMode& mode) {
    Mat r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = mode.mul(c, a.at(i, j));
    return r;
}

Mat hstack(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows()) fail("ShapeError", "hstack row mismatch");
    Mat r(a.rows(), a.cols() + b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j);
        for (int j = 0; j < b.cols(); ++j) r.at(i, a.cols() + j) = b.at(i, j);
    }
    return r;
}

Mat vstack(const Mat& a, const Mat& b) {
    if (a.cols() != b.cols()) fail("ShapeError", "vstack column mismatch");
    Mat r(a.rows() + b.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j);
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(a.rows() + i, j) = b.at(i, j);
    return r;
}

Mat dsum(const Mat& a, const Mat& b) {
    Mat r(a.rows() + b.rows(), a.cols() + b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j);
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) r.at(a.rows() + i, a.cols() + j) = b.at(i, j);
    return r;
}

Mat pow(const Mat& a, const mpz_class& k, const CoeffMode& mode) {
    if (a.rows() != a.cols()) fail("ShapeError", "matrix power needs a square matrix");
    assert(k >= 0);
    Mat acc = Mat::identity(a.rows());
    Mat base = reduce(a, mode);
    mpz_class e = k;
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) acc = mul(acc, base, mode);
        e >>= 1;
        if (e > 0) base = mul(base, base, mode);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// CanonicalModule

unsigned CanonicalModule::log_size(const CoeffMode& mode) const {
    assert(mode.is_chain());
    unsigned s = unsigned(free_rank) * mode.precision;
    for (unsigned e : torsion_exponents) s += e;
    return s;
}

std::string CanonicalModule::structure_string(const CoeffMode& mode) const {
    std::ostringstream os;
    if (mode.is_rational()) {
        os << "Q^" << free_rank;
        return os.str();
    }
    if (is_trivial()) return "0";
    bool first = true;
    if (free_rank > 0) {
        os << "R^" << free_rank;
        first = false;
    }
    for (unsigned e : torsion_exponents) {
        if (!first) os << " + ";
        os << "R/" << mode.ell.get_str() << "^" << e;
        first = false;
    }
    return os.str();
}

CanonicalModule make_module(int free_rank, std::vector<unsigned> torsion, const CoeffMode& mode) {
    CanonicalModule m;
    m.free_rank = free_rank;
    std::sort(torsion.begin(), torsion.end(), std::greater<unsigned>());
    m.torsion_exponents = std::move(torsion);
    if (mode.is_rational() && !m.torsion_exponents.empty())
        fail("InvalidCoefficient", "torsion factors are meaningless over the rationals");
    m.precision_saturated = mode.is_chain() && free_rank > 0;
    return m;
}

// ---------------------------------------------------------------------------
// Integer matrix layer (mpz), used by all chain-ring computations.

namespace {

struct ZMat {
    int rows = 0, cols = 0;
    std::vector<mpz_class> e;
    ZMat() = default;
    ZMat(int r, int c) : rows(r), cols(c), e(size_t(r) * size_t(c)) {}
    mpz_class& at(int i, int j) { return e[size_t(i) * cols + j]; }
    const mpz_class& at(int i, int j) const { return e[size_t(i) * cols + j]; }
    static ZMat identity(int n) {
        ZMat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }
};

ZMat zmat_from(const Mat& m) {
    ZMat z(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            if (m.at(i, j).get_den() != 1) fail("InvalidCoefficient", "integer matrix expected");
            z.at(i, j) = m.at(i, j).get_num();
        }
    return z;
}

Mat mat_from(const ZMat& z) {
    Mat m(z.rows, z.cols);
    for (int i = 0; i < z.rows; ++i)
        for (int j = 0; j < z.cols; ++j) m.at(i, j) = mpq_class(z.at(i, j));
    return m;
}

ZMat zmul(const ZMat& a, const ZMat& b) {
    assert(a.cols == b.rows);
    ZMat r(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            if (a.at(i, k) == 0) continue;
            for (int j = 0; j < b.cols; ++j) {
                if (b.at(k, j) == 0) continue;
                r.at(i, j) += a.at(i, k) * b.at(k, j);
            }
        }
    return r;
}

ZMat ztranspose(const ZMat& a) {
    ZMat t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

// Row Hermite normal form H = W * A with W unimodular.  Pivots positive,
// entries above each pivot reduced into [0, pivot).
void row_hnf(ZMat a, ZMat& h, ZMat& w) {
    int n = a.rows, m = a.cols;
    w = ZMat::identity(n);
    int r = 0;
    for (int c = 0; c < m && r < n; ++c) {
        // Euclid all entries of column c below/at row r into one.
        while (true) {
            int piv = -1;
            for (int i = r; i < n; ++i)
                if (a.at(i, c) != 0 && (piv < 0 || mpz_cmpabs(a.at(i, c).get_mpz_t(), a.at(piv, c).get_mpz_t()) < 0)) piv = i;
            if (piv < 0) break;
            if (piv != r) {
                for (int j = 0; j < m; ++j) std::swap(a.at(r, j), a.at(piv, j));
                for (int j = 0; j < n; ++j) std::swap(w.at(r, j), w.at(piv, j));
            }
            bool cleared = true;
            for (int i = r + 1; i < n; ++i) {
                if (a.at(i, c) == 0) continue;
                mpz_class q;
                mpz_fdiv_q(q.get_mpz_t(), a.at(i, c).get_mpz_t(), a.at(r, c).get_mpz_t());
                if (q != 0) {
                    for (int j = 0; j < m; ++j) a.at(i, j) -= q * a.at(r, j);
                    for (int j = 0; j < n; ++j) w.at(i, j) -= q * w.at(r, j);
                }
                if (a.at(i, c) != 0) cleared = false;
            }
            if (cleared) break;
        }
        if (a.at(r, c) == 0) continue;
        if (a.at(r, c) < 0) {
            for (int j = 0; j < m; ++j) a.at(r, j) = -a.at(r, j);
            for (int j = 0; j < n; ++j) w.at(r, j) = -w.at(r, j);
        }
        // reduce entries above the pivot
        for (int i = 0; i < r; ++i) {
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), a.at(i, c).get_mpz_t(), a.at(r, c).get_mpz_t());
            if (q != 0) {
                for (int j = 0; j < m; ++j) a.at(i, j) -= q * a.at(r, j);
                for (int j = 0; j < n; ++j) w.at(i, j) -= q * w.at(r, j);
            }
        }
        ++r;
    }
    h = std::move(a);
}

// Basis of the integer column lattice of A (columns), as a column-HNF
// matrix with zero columns dropped.
ZMat column_lattice_basis(const ZMat& a) {
    ZMat h, w;
    row_hnf(ztranspose(a), h, w);
    int nz = 0;
    for (int i = 0; i < h.rows; ++i) {
        bool z = true;
        for (int j = 0; j < h.cols; ++j)
            if (h.at(i, j) != 0) { z = false; break; }
        if (!z) nz = i + 1;
    }
    ZMat b(h.cols, nz);
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < h.cols; ++j) b.at(j, i) = h.at(i, j);
    return b;
}

// Integer basis (as columns) of { x : A x = 0 }.
ZMat integer_kernel(const ZMat& a) {
    ZMat h, w;
    row_hnf(ztranspose(a), h, w);
    std::vector<int> zrows;
    for (int i = 0; i < h.rows; ++i) {
        bool z = true;
        for (int j = 0; j < h.cols; ++j)
            if (h.at(i, j) != 0) { z = false; break; }
        if (z) zrows.push_back(i);
    }
    ZMat k(a.cols, int(zrows.size()));
    for (size_t t = 0; t < zrows.size(); ++t)
        for (int j = 0; j < a.cols; ++j) k.at(j, int(t)) = w.at(zrows[t], j);
    return k;
}

// One integer solution of A x = b (all columns of b), or nullopt.
std::optional<ZMat> integer_solve(const ZMat& a, const ZMat& b) {
    assert(a.rows == b.rows);
    ZMat h, w;
    row_hnf(ztranspose(a), h, w);  // h = w * a^T, rows of h = basis of row lattice of a^T = col lattice of a
    // Solve x^T A^T = b_col^T for each column: express b in the row basis of h.
    std::vector<int> pivots;  // pivot column of each nonzero row of h
    for (int i = 0; i < h.rows; ++i) {
        int p = -1;
        for (int j = 0; j < h.cols; ++j)
            if (h.at(i, j) != 0) { p = j; break; }
        if (p >= 0) pivots.push_back(p); else break;
    }
    ZMat x(a.cols, b.cols);
    for (int bc = 0; bc < b.cols; ++bc) {
        std::vector<mpz_class> rhs(a.rows);
        for (int i = 0; i < a.rows; ++i) rhs[i] = b.at(i, bc);
        std::vector<mpz_class> coef(h.rows, mpz_class(0));
        for (size_t i = 0; i < pivots.size(); ++i) {
            int p = pivots[i];
            mpz_class q, r;
            mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), rhs[p].get_mpz_t(), h.at(int(i), p).get_mpz_t());
            if (r != 0) return std::nullopt;
            coef[i] = q;
            if (q != 0)
                for (int j = 0; j < h.cols; ++j) rhs[j] -= q * h.at(int(i), j);
        }
        for (int j = 0; j < a.rows; ++j)
            if (rhs[j] != 0) return std::nullopt;
        // x^T = coef * w  =>  x = w^T coef^T
        for (int j = 0; j < a.cols; ++j) {
            mpz_class s = 0;
            for (int i = 0; i < h.rows; ++i)
                if (coef[i] != 0) s += coef[i] * w.at(i, j);
            x.at(j, bc) = s;
        }
    }
    return x;
}

// Smith normal form D = U A V, invariant factors non-negative with d_i | d_{i+1}.
void smith(ZMat a, ZMat& d, ZMat& u, ZMat& v) {
    int n = a.rows, m = a.cols;
    u = ZMat::identity(n);
    v = ZMat::identity(m);
    int t = 0;
    int lim = std::min(n, m);
    while (t < lim) {
        // find a nonzero entry of minimal absolute value in the remaining block
        int pi = -1, pj = -1;
        for (int i = t; i < n; ++i)
            for (int j = t; j < m; ++j)
                if (a.at(i, j) != 0 && (pi < 0 || mpz_cmpabs(a.at(i, j).get_mpz_t(), a.at(pi, pj).get_mpz_t()) < 0)) { pi = i; pj = j; }
        if (pi < 0) break;
        if (pi != t) {
            for (int j = 0; j < m; ++j) std::swap(a.at(t, j), a.at(pi, j));
            for (int j = 0; j < n; ++j) std::swap(u.at(t, j), u.at(pi, j));
        }
        if (pj != t) {
            for (int i = 0; i < n; ++i) std::swap(a.at(i, t), a.at(i, pj));
            for (int i = 0; i < m; ++i) std::swap(v.at(i, t), v.at(i, pj));
        }
        bool dirty = false;
        for (int i = t + 1; i < n; ++i) {
            if (a.at(i, t) == 0) continue;
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), a.at(i, t).get_mpz_t(), a.at(t, t).get_mpz_t());
            if (q != 0) {
                for (int j = 0; j < m; ++j) a.at(i, j) -= q * a.at(t, j);
                for (int j = 0; j < n; ++j) u.at(i, j) -= q * u.at(t, j);
            }
            if (a.at(i, t) != 0) dirty = true;
        }
        for (int j = t + 1; j < m; ++j) {
            if (a.at(t, j) == 0) continue;
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), a.at(t, j).get_mpz_t(), a.at(t, t).get_mpz_t());
            if (q != 0) {
                for (int i = 0; i < n; ++i) a.at(i, j) -= q * a.at(i, t);
                for (int i = 0; i < m; ++i) v.at(i, j) -= q * v.at(i, t);
            }
            if (a.at(t, j) != 0) dirty = true;
        }
        if (dirty) continue;
        // divisibility: fold in any entry the pivot does not divide
        bool fixed = true;
        for (int i = t + 1; i < n && fixed; ++i)
            for (int j = t + 1; j < m && fixed; ++j)
                if (!mpz_divisible_p(a.at(i, j).get_mpz_t(), a.at(t, t).get_mpz_t())) {
                    for (int c = 0; c < m; ++c) a.at(t, c) += a.at(i, c);
                    for (int c = 0; c < n; ++c) u.at(t, c) += u.at(i, c);
                    fixed = false;
                }
        if (!fixed) continue;
        if (a.at(t, t) < 0) {
            for (int j = 0; j < m; ++j) a.at(t, j) = -a.at(t, j);
            for (int j = 0; j < n; ++j) u.at(t, j) = -u.at(t, j);
        }
        ++t;
    }
    d = std::move(a);
}

// Solve B x = v over the integers where B is a column-HNF basis: each
// column's first nonzero row (its pivot) sits strictly below the previous
// column's.  Forward substitution; nullopt when v is not in the lattice.
std::optional<std::vector<mpz_class>> hnf_basis_solve(const ZMat& b, const std::vector<mpz_class>& v) {
    std::vector<mpz_class> rhs = v;
    std::vector<mpz_class> x(b.cols, mpz_class(0));
    for (int c = 0; c < b.cols; ++c) {
        int p = -1;
        for (int i = 0; i < b.rows; ++i)
            if (b.at(i, c) != 0) { p = i; break; }
        assert(p >= 0);
        mpz_class q, r;
        mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), rhs[p].get_mpz_t(), b.at(p, c).get_mpz_t());
        if (r != 0) return std::nullopt;
        x[c] = q;
        if (q != 0)
            for (int i = p; i < b.rows; ++i) rhs[i] -= q * b.at(i, c);
    }
    for (int i = 0; i < b.rows; ++i)
        if (rhs[i] != 0) return std::nullopt;
    return x;
}

mpz_class pow_ui(const mpz_class& b, unsigned e) {
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
    return r;
}

unsigned ell_val(const mpz_class& d, const mpz_class& ell, unsigned cap) {
    if (d == 0) return cap;
    mpz_class n = d;
    unsigned v = 0;
    while (v < cap && mpz_divisible_p(n.get_mpz_t(), ell.get_mpz_t())) {
        n /= ell;
        ++v;
    }
    return v;
}

// Columns of a chain-mode matrix lifted to integers, with m*I appended.
ZMat lift_with_modulus(const Mat& gens, int ambient, const CoeffMode& mode) {
    ZMat z(ambient, gens.cols() + ambient);
    for (int i = 0; i < ambient; ++i) {
        for (int j = 0; j < gens.cols(); ++j) z.at(i, j) = mode.reduce(gens.at(i, j)).get_num();
        z.at(i, gens.cols() + i) = mode.modulus;
    }
    return z;
}

}  // namespace

// ---------------------------------------------------------------------------
// Canonical forms

namespace {

EchelonForm rref_rational(const Mat& m) {
    EchelonForm f;
    int n = m.rows(), c = m.cols();
    Mat a = m;
    Mat u = Mat::identity(n);
    CoeffMode q = CoeffMode::rationals();
    int r = 0;
    for (int j = 0; j < c && r < n; ++j) {
        int piv = -1;
        for (int i = r; i < n; ++i)
            if (a.at(i, j) != 0) { piv = i; break; }
        if (piv < 0) continue;
        if (piv != r)
            for (int k = 0; k < c; ++k) std::swap(a.at(r, k), a.at(piv, k));
        if (piv != r)
            for (int k = 0; k < n; ++k) std::swap(u.at(r, k), u.at(piv, k));
        mpq_class inv = 1 / a.at(r, j);
        for (int k = 0; k < c; ++k) a.at(r, k) = q.reduce(mpq_class(a.at(r, k) * inv));
        for (int k = 0; k < n; ++k) u.at(r, k) = q.reduce(mpq_class(u.at(r, k) * inv));
        for (int i = 0; i < n; ++i) {
            if (i == r || a.at(i, j) == 0) continue;
            mpq_class fenc = a.at(i, j);
            for (int k = 0; k < c; ++k) a.at(i, k) = q.reduce(mpq_class(a.at(i, k) - fenc * a.at(r, k)));
            for (int k = 0; k < n; ++k) u.at(i, k) = q.reduce(mpq_class(u.at(i, k) - fenc * u.at(r, k)));
        }
        f.pivot_col.push_back(j);
        f.pivot_val.push_back(0);
        ++r;
    }
    f.H = std::move(a);
    f.U = std::move(u);
    return f;
}

// Working row for the Howell elimination: matrix row + provenance row.
struct HRow {
    std::vector<mpz_class> a;  // length cols
    std::vector<mpz_class> u;  // length pad (coefficients on padded input rows)
};

EchelonForm howell_chain(const Mat& m, const CoeffMode& mode) {
    const int rows = m.rows(), cols = m.cols();
    const mpz_class& mod = mode.modulus;
    const mpz_class& ell = mode.ell;
    const unsigned N = mode.precision;

    // Pass 1 would only count annihilator rows; instead pad generously
    // (one potential annihilator per column) and trim afterwards.
    const int pad = rows + cols;
    std::vector<HRow> work(pad);
    for (int i = 0; i < pad; ++i) {
        work[i].a.assign(cols, mpz_class(0));
        work[i].u.assign(pad, mpz_class(0));
        work[i].u[i] = 1;
        if (i < rows)
            for (int j = 0; j < cols; ++j) work[i].a[j] = mode.reduce(m.at(i, j)).get_num();
    }
    int spare = rows;  // next unused padding row

    auto rownorm = [&](HRow& r) {
        for (auto& x : r.a) mpz_mod(x.get_mpz_t(), x.get_mpz_t(), mod.get_mpz_t());
        for (auto& x : r.u) mpz_mod(x.get_mpz_t(), x.get_mpz_t(), mod.get_mpz_t());
    };
    auto axpy = [&](HRow& dst, const mpz_class& cval, const HRow& src) {
        for (int j = 0; j < cols; ++j) dst.a[j] += cval * src.a[j];
        for (int j = 0; j < pad; ++j) dst.u[j] += cval * src.u[j];
        rownorm(dst);
    };
    auto scale = [&](HRow& r, const mpz_class& cval) {
        for (auto& x : r.a) x *= cval;
        for (auto& x : r.u) x *= cval;
        rownorm(r);
    };
    auto valuation = [&](const mpz_class& x) { return ell_val(x, ell, N); };

    std::vector<int> order;  // processed pivot rows, in pivot-column order
    std::vector<int> pivcol, pivval;
    std::vector<bool> used(pad, false);

    for (int c = 0; c < cols; ++c) {
        // minimal valuation among unprocessed rows
        int best = -1;
        unsigned bestv = N;
        for (int i = 0; i < pad; ++i) {
            if (used[i]) continue;
            if (work[i].a[c] == 0) continue;
            unsigned v = valuation(work[i].a[c]);
            if (v < bestv || best < 0) { best = i; bestv = v; }
        }
        if (best < 0 || work[best].a[c] == 0) continue;
        // normalize pivot to ell^v
        mpz_class unitpart = work[best].a[c] / pow_ui(ell, bestv);
        mpz_class uinv;
        mpz_invert(uinv.get_mpz_t(), unitpart.get_mpz_t(), mod.get_mpz_t());
        scale(work[best], uinv);
        mpz_class piv = work[best].a[c];
        // clear the column in every other unprocessed row; the division is
        // exact because bestv is the minimal valuation in the column
        for (int i = 0; i < pad; ++i) {
            if (i == best || used[i]) continue;
            if (work[i].a[c] == 0) continue;
            mpz_class q = work[i].a[c] / piv;
            mpz_class nq = -q;
            axpy(work[i], nq, work[best]);
            assert(work[i].a[c] == 0);
        }
        // reduce processed rows above the pivot modulo ell^bestv
        for (int t : order) {
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), work[t].a[c].get_mpz_t(), piv.get_mpz_t());
            if (q != 0) {
                mpz_class nq = -q;
                axpy(work[t], nq, work[best]);
            }
        }
        used[best] = true;
        order.push_back(best);
        pivcol.push_back(c);
        pivval.push_back(int(bestv));
        // Howell saturation: append the annihilator multiple of the pivot
        // row, unless it vanishes entirely.
        if (bestv > 0 && spare < pad) {
            mpz_class factor = pow_ui(ell, N - bestv);
            bool nonzero = false;
            for (int j = 0; j < cols; ++j) {
                mpz_class t = factor * work[best].a[j];
                mpz_mod(t.get_mpz_t(), t.get_mpz_t(), mod.get_mpz_t());
                if (t != 0) { nonzero = true; break; }
            }
            if (nonzero) {
                int slot = spare++;
                axpy(work[slot], factor, work[best]);
            }
        }
    }

    // Assemble: pivot rows in pivot order, then the remaining (all-zero)
    // rows.  The working set is exactly [0, spare): input rows plus the
    // annihilator rows that were consumed, so H = U * pad(m) where pad(m)
    // appends spare - rows zero rows to the input.
    const int k = spare;
    EchelonForm f;
    f.H = Mat(k, cols);
    f.U = Mat(k, k);
    std::vector<int> layout;  // work-row index per output row
    layout.reserve(k);
    for (int t : order) layout.push_back(t);
    for (int i = 0; i < spare && int(layout.size()) < k; ++i)
        if (!used[i]) layout.push_back(i);
    for (int r = 0; r < k; ++r) {
        const HRow& src = work[layout[r]];
        for (int j = 0; j < cols; ++j) f.H.at(r, j) = mpq_class(src.a[j]);
        for (int j = 0; j < k; ++j) f.U.at(r, j) = mpq_class(src.u[j]);
    }
    for (size_t i = 0; i < pivcol.size(); ++i) {
        f.pivot_col.push_back(pivcol[i]);
        f.pivot_val.push_back(unsigned(pivval[i]));
    }
    return f;
}

}  // namespace

EchelonForm canonical_form(const Mat& m, const CoeffMode& mode) {
    if (mode.is_rational()) return rref_rational(reduce(m, mode));
    return howell_chain(m, mode);
}

// ---------------------------------------------------------------------------
// Span utilities

Mat colspan_basis(const Mat& m, const CoeffMode& mode) {
    EchelonForm f = canonical_form(m.transpose(), mode);
    int r = f.rank();
    return f.H.rows_slice(0, r).transpose();
}

bool span_contains(const Mat& basis, const Mat& v, const CoeffMode& mode) {
    if (basis.cols() == 0) return v.is_zero();
    return solve(basis, v, mode).has_value();
}

bool same_span(const Mat& a, const Mat& b, const CoeffMode& mode) {
    return colspan_basis(a, mode) == colspan_basis(b, mode);
}

// ---------------------------------------------------------------------------
// Kernel / cokernel / solve

namespace {

CanonicalModule kernel_rational(const Mat& m) {
    CoeffMode q = CoeffMode::rationals();
    EchelonForm f = rref_rational(m);
    std::vector<bool> ispiv(m.cols(), false);
    for (int p : f.pivot_col) ispiv[p] = true;
    std::vector<int> freec;
    for (int j = 0; j < m.cols(); ++j)
        if (!ispiv[j]) freec.push_back(j);
    Mat basis(m.cols(), int(freec.size()));
    for (size_t t = 0; t < freec.size(); ++t) {
        int j = freec[t];
        basis.at(j, int(t)) = 1;
        for (int r = 0; r < f.rank(); ++r) basis.at(f.pivot_col[r], int(t)) = -f.H.at(r, j);
    }
    // canonicalize the embedding basis
    Mat canon = colspan_basis(basis, q);
    CanonicalModule k = make_module(canon.cols(), {}, q);
    k.embedding_basis = canon;
    return k;
}

// Structure of the submodule of (Z/l^N)^n generated by the given columns.
CanonicalModule chain_submodule_structure(const Mat& gens, int ambient, const CoeffMode& mode) {
    if (ambient == 0) return make_module(0, {}, mode);
    ZMat lat = lift_with_modulus(gens, ambient, mode);
    ZMat bg = column_lattice_basis(lat);  // ambient x ambient (full rank: contains m*I)
    // m*I in bg-coordinates
    ZMat c(bg.cols, ambient);
    for (int j = 0; j < ambient; ++j) {
        std::vector<mpz_class> v(ambient, mpz_class(0));
        v[j] = mode.modulus;
        auto x = hnf_basis_solve(bg, v);
        assert(x.has_value());
        for (int i = 0; i < bg.cols; ++i) c.at(i, j) = (*x)[i];
    }
    ZMat d, u, v;
    smith(c, d, u, v);
    int free_rank = 0;
    std::vector<unsigned> tors;
    for (int i = 0; i < std::min(d.rows, d.cols); ++i) {
        unsigned e = ell_val(d.at(i, i), mode.ell, mode.precision);
        if (e >= mode.precision)
            ++free_rank;
        else if (e >= 1)
            tors.push_back(e);
    }
    return make_module(free_rank, std::move(tors), mode);
}

CanonicalModule kernel_chain(const Mat& m, const CoeffMode& mode) {
    int rows = m.rows(), cols = m.cols();
    // x in (Z/l^N)^cols with m x = 0  <=>  [m | l^N I] (x; y) = 0 over Z.
    ZMat b(rows, cols + rows);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) b.at(i, j) = mode.reduce(m.at(i, j)).get_num();
        b.at(i, cols + i) = mode.modulus;
    }
    ZMat kz = integer_kernel(b);
    // Every mod-l^N kernel element lifts to an integer kernel element of b,
    // so the projected columns generate the kernel module.
    Mat gens(cols, kz.cols);
    for (int j = 0; j < kz.cols; ++j)
        for (int i = 0; i < cols; ++i) gens.at(i, j) = mode.reduce(mpq_class(kz.at(i, j)));
    Mat basis = colspan_basis(gens, mode);
    CanonicalModule k = chain_submodule_structure(basis, cols, mode);
    k.embedding_basis = basis;
    return k;
}

}  // namespace

CanonicalModule kernel(const Mat& m, const CoeffMode& mode) {
    if (mode.is_rational()) return kernel_rational(reduce(m, mode));
    return kernel_chain(m, mode);
}

CanonicalModule cokernel_presentation(const Mat& m, const CoeffMode& mode) {
    if (mode.is_rational()) {
        EchelonForm f = canonical_form(reduce(m, mode), mode);
        return make_module(m.rows() - f.rank(), {}, mode);
    }
    // Z^rows / colspan([m | l^N I])
    ZMat b(m.rows(), m.cols() + m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) b.at(i, j) = mode.reduce(m.at(i, j)).get_num();
        b.at(i, m.cols() + i) = mode.modulus;
    }
    ZMat d, u, v;
    smith(b, d, u, v);
    int free_rank = 0;
    std::vector<unsigned> tors;
    for (int i = 0; i < m.rows(); ++i) {
        mpz_class di = (i < std::min(d.rows, d.cols)) ? d.at(i, i) : mpz_class(0);
        unsigned e = ell_val(di, mode.ell, mode.precision);
        if (e >= mode.precision)
            ++free_rank;
        else if (e >= 1)
            tors.push_back(e);
    }
    return make_module(free_rank, std::move(tors), mode);
}

std::optional<Mat> solve(const Mat& m, const Mat& rhs, const CoeffMode& mode) {
    if (m.rows() != rhs.rows()) fail("ShapeError", "solve: rhs row count mismatch");
    if (mode.is_rational()) {
        EchelonForm f = canonical_form(reduce(m, mode), mode);
        Mat ur = mul(f.U, reduce(rhs, mode), mode);
        Mat x(m.cols(), rhs.cols());
        for (int c = 0; c < rhs.cols(); ++c) {
            for (int r = f.rank(); r < ur.rows(); ++r)
                if (ur.at(r, c) != 0) return std::nullopt;
            // pivot variables from the reduced system; free variables zero
            for (int r = 0; r < f.rank(); ++r) {
                mpq_class vsum = ur.at(r, c);
                for (int j = f.pivot_col[r] + 1; j < m.cols(); ++j)
                    vsum -= f.H.at(r, j) * x.at(j, c);
                x.at(f.pivot_col[r], c) = mode.reduce(vsum);
            }
        }
        return x;
    }
    // chain mode: integer solve of [m | l^N I] z = rhs, project and reduce.
    int rows = m.rows(), cols = m.cols();
    ZMat b(rows, cols + rows);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) b.at(i, j) = mode.reduce(m.at(i, j)).get_num();
        b.at(i, cols + i) = mode.modulus;
    }
    ZMat zr(rows, rhs.cols());
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < rhs.cols(); ++j) zr.at(i, j) = mode.reduce(rhs.at(i, j)).get_num();
    auto z = integer_solve(b, zr);
    if (!z) return std::nullopt;
    Mat x(cols, rhs.cols());
    for (int i = 0; i < cols; ++i)
        for (int j = 0; j < rhs.cols(); ++j) x.at(i, j) = mode.reduce(mpq_class(z->at(i, j)));
    // canonicalize against the kernel: reduce entries at kernel pivot columns
    CanonicalModule k = kernel(m, mode);
    if (k.embedding_basis && k.embedding_basis->cols() > 0) {
        EchelonForm kf = canonical_form(k.embedding_basis->transpose(), mode);
        for (int c = 0; c < x.cols(); ++c) {
            for (int r = kf.rank() - 1; r >= 0; --r) {
                int p = kf.pivot_col[r];
                mpz_class piv = kf.H.at(r, p).get_num();
                mpz_class q;
                mpz_fdiv_q(q.get_mpz_t(), x.at(p, c).get_num().get_mpz_t(), piv.get_mpz_t());
                if (q != 0)
                    for (int j = 0; j < cols; ++j)
                        x.at(j, c) = mode.sub(x.at(j, c), mpq_class(q) * kf.H.at(r, j));
            }
        }
    }
    return x;
}

std::optional<Mat> try_inverse(const Mat& m, const CoeffMode& mode) {
    if (m.rows() != m.cols()) return std::nullopt;
    auto x = solve(m, Mat::identity(m.rows()), mode);
    if (!x) return std::nullopt;
    if (!mul(m, *x, mode).is_identity()) return std::nullopt;
    if (!mul(*x, m, mode).is_identity()) return std::nullopt;
    return x;
}

// ---------------------------------------------------------------------------
// smith_form_integers

std::vector<mpz_class> smith_form_integers(const Mat& m) {
    ZMat a = zmat_from(m);
    ZMat d, u, v;
    smith(a, d, u, v);
    std::vector<mpz_class> out;
    for (int i = 0; i < std::min(m.rows(), m.cols()); ++i)
        out.push_back(i < std::min(d.rows, d.cols) ? d.at(i, i) : mpz_class(0));
    return out;
}

// ---------------------------------------------------------------------------
// Subquotient

Subquotient subquotient(int ambient, const Mat& gens, const Mat& rels, const CoeffMode& mode) {
    Subquotient s;
    s.mode = mode;
    s.ambient = ambient;
    if (mode.is_rational()) {
        s.qbasis = colspan_basis(gens, mode);
        int g = s.qbasis.cols();
        // relation columns in qbasis coordinates
        Mat relc(g, rels.cols());
        if (rels.cols() > 0) {
            auto sol = solve(s.qbasis, rels, mode);
            if (!sol) fail("ShapeError", "subquotient: relations do not lie in the generator span");
            relc = *sol;
        }
        EchelonForm f = canonical_form(relc.transpose(), mode);
        s.qrelref = f.H.rows_slice(0, f.rank());
        s.qrel_pivots = f.pivot_col;
        std::vector<bool> ispiv(g, false);
        for (int p : s.qrel_pivots) ispiv[p] = true;
        for (int j = 0; j < g; ++j)
            if (!ispiv[j]) s.keep.push_back(j);
        s.structure = make_module(int(s.keep.size()), {}, mode);
        s.gen_lifts = Mat(ambient, int(s.keep.size()));
        for (size_t t = 0; t < s.keep.size(); ++t)
            for (int i = 0; i < ambient; ++i) s.gen_lifts.at(i, int(t)) = s.qbasis.at(i, s.keep[t]);
        return s;
    }
    // chain mode
    if (ambient == 0) {
        s.structure = make_module(0, {}, mode);
        s.gen_lifts = Mat(0, 0);
        return s;
    }
    ZMat latg = lift_with_modulus(gens, ambient, mode);
    ZMat bgz = column_lattice_basis(latg);
    if (bgz.cols != ambient) fail("ShapeError", "subquotient: generator lattice must be full rank with l^N folded in");
    ZMat latr = lift_with_modulus(rels, ambient, mode);
    ZMat brz = column_lattice_basis(latr);
    // relation basis in bg-coordinates (integral because span(R) + l^N Z^n is
    // inside span(G) + l^N Z^n)
    ZMat c(ambient, brz.cols);
    for (int j = 0; j < brz.cols; ++j) {
        std::vector<mpz_class> v(ambient);
        for (int i = 0; i < ambient; ++i) v[i] = brz.at(i, j);
        auto x = hnf_basis_solve(bgz, v);
        if (!x) fail("ShapeError", "subquotient: relations do not lie in the generator span");
        for (int i = 0; i < ambient; ++i) c.at(i, j) = (*x)[i];
    }
    ZMat d, u, v;
    smith(c, d, u, v);
    // quotient in smith coordinates w = u * (bg-coords); factor i has
    // annihilator d_i (divides l^N). Keep d_i != 1, order free first then
    // torsion by decreasing exponent.
    std::vector<std::pair<unsigned, int>> factors;  // (exponent, smith index)
    for (int i = 0; i < ambient; ++i) {
        mpz_class di = (i < std::min(d.rows, d.cols)) ? d.at(i, i) : mpz_class(0);
        if (di == 0) di = mode.modulus;  // no relation hits this coordinate (cannot happen: l^N I included)
        unsigned e = ell_val(di, mode.ell, mode.precision);
        if (e == 0) continue;
        factors.emplace_back(e, i);
    }
    std::stable_sort(factors.begin(), factors.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    s.bg = mat_from(bgz);
    s.usmith = mat_from(u);
    int free_rank = 0;
    std::vector<unsigned> tors;
    ZMat uinv_needed(ambient, int(factors.size()));
    // columns of bg * u^{-1} at the kept smith indices: solve u * x = e_i
    ZMat uz = u;
    for (size_t t = 0; t < factors.size(); ++t) {
        unsigned e = factors[t].first;
        int idx = factors[t].second;
        s.keep.push_back(idx);
        s.ann.push_back(pow_ui(mode.ell, e));
        if (e >= mode.precision)
            ++free_rank;
        else
            tors.push_back(e);
        ZMat rhs(ambient, 1);
        rhs.at(idx, 0) = 1;
        auto x = integer_solve(uz, rhs);
        assert(x.has_value());
        for (int i = 0; i < ambient; ++i) uinv_needed.at(i, int(t)) = x->at(i, 0);
    }
    s.structure = make_module(free_rank, std::move(tors), mode);
    ZMat lifts = zmul(bgz, uinv_needed);
    s.gen_lifts = Mat(ambient, int(factors.size()));
    for (int i = 0; i < ambient; ++i)
        for (int j = 0; j < int(factors.size()); ++j)
            s.gen_lifts.at(i, j) = mode.reduce(mpq_class(lifts.at(i, j)));
    return s;
}

Mat Subquotient::express(const Mat& v) const {
    if (mode.is_rational()) {
        int g = qbasis.cols();
        Mat coords(g, v.cols());
        if (g > 0) {
            auto sol = solve(qbasis, v, mode);
            if (!sol) fail("ShapeError", "express: vector is not in the generator span");
            coords = *sol;
        } else if (!v.is_zero()) {
            fail("ShapeError", "express: vector is not in the generator span");
        }
        // reduce modulo the relation subspace (RREF rows over qbasis coords)
        for (int c = 0; c < coords.cols(); ++c)
            for (int r = 0; r < qrelref.rows(); ++r) {
                mpq_class f = coords.at(qrel_pivots[r], c);
                if (f == 0) continue;
                for (int j = 0; j < g; ++j)
                    coords.at(j, c) = mode.reduce(mpq_class(coords.at(j, c) - f * qrelref.at(r, j)));
            }
        Mat out(int(keep.size()), v.cols());
        for (size_t t = 0; t < keep.size(); ++t)
            for (int c = 0; c < v.cols(); ++c) out.at(int(t), c) = coords.at(keep[t], c);
        return out;
    }
    // chain mode
    Mat out(int(keep.size()), v.cols());
    if (ambient == 0) return out;
    ZMat bgz = zmat_from(bg);
    ZMat uz = zmat_from(usmith);
    for (int c = 0; c < v.cols(); ++c) {
        std::vector<mpz_class> w(ambient);
        for (int i = 0; i < ambient; ++i) w[i] = mode.reduce(v.at(i, c)).get_num();
        auto x = hnf_basis_solve(bgz, w);
        if (!x) fail("ShapeError", "express: vector is not in the generator span");
        for (size_t t = 0; t < keep.size(); ++t) {
            mpz_class s = 0;
            for (int j = 0; j < ambient; ++j) s += uz.at(keep[t], j) * (*x)[j];
            mpz_class r;
            mpz_mod(r.get_mpz_t(), s.get_mpz_t(), ann[t].get_mpz_t());
            out.at(int(t), c) = mpq_class(r);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Integer polynomials

ZPoly poly_trim(ZPoly p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
    return p;
}

int poly_degree(const ZPoly& p) { return int(p.size()) - 1; }

ZPoly poly_mul(const ZPoly& a, const ZPoly& b) {
    if (a.empty() || b.empty()) return {};
    ZPoly r(a.size() + b.size() - 1, mpz_class(0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return poly_trim(std::move(r));
}

std::optional<ZPoly> poly_div_exact(const ZPoly& num, const ZPoly& den) {
    ZPoly n = poly_trim(num), d = poly_trim(den);
    if (d.empty()) fail("ShapeError", "polynomial division by zero");
    if (n.empty()) return ZPoly{};
    if (n.size() < d.size()) return std::nullopt;
    ZPoly q(n.size() - d.size() + 1, mpz_class(0));
    for (int i = int(q.size()) - 1; i >= 0; --i) {
        mpz_class lead = n[i + d.size() - 1];
        if (lead == 0) continue;
        mpz_class c, r;
        mpz_fdiv_qr(c.get_mpz_t(), r.get_mpz_t(), lead.get_mpz_t(), d.back().get_mpz_t());
        if (r != 0) return std::nullopt;
        q[i] = c;
        for (size_t j = 0; j < d.size(); ++j) n[i + j] -= c * d[j];
    }
    for (const auto& c : n)
        if (c != 0) return std::nullopt;
    return poly_trim(std::move(q));
}

std::string poly_to_string(const ZPoly& p) {
    if (p.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = int(p.size()) - 1; i >= 0; --i) {
        if (p[i] == 0) continue;
        mpz_class c = p[i];
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        mpz_class a = abs(c);
        if (a != 1 || i == 0) os << a.get_str();
        if (i >= 1) {
            os << "x";
            if (i > 1) os << "^" << i;
        }
        first = false;
    }
    return os.str();
}

unsigned euler_phi(unsigned k) {
    unsigned r = k;
    unsigned n = k;
    for (unsigned p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        while (n % p == 0) n /= p;
        r -= r / p;
    }
    if (n > 1) r -= r / n;
    return r;
}

ZPoly cyclotomic(unsigned k) {
    static std::map<unsigned, ZPoly> cache;
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    // x^k - 1 divided by all Phi_d, d | k, d < k
    ZPoly num(k + 1, mpz_class(0));
    num[0] = -1;
    num[k] = 1;
    for (unsigned d = 1; d < k; ++d) {
        if (k % d) continue;
        auto q = poly_div_exact(num, cyclotomic(d));
        assert(q.has_value());
        num = *q;
    }
    cache[k] = num;
    return num;
}

bool cyclotomic_product_test(const ZPoly& p) {
    ZPoly q = poly_trim(p);
    if (q.empty() || q.back() != 1) fail("NotMonic", "cyclotomic product test needs a monic polynomial");
    int deg = poly_degree(q);
    if (deg == 0) return true;
    // phi(k) >= sqrt(k/2), so phi(k) <= deg forces k <= 2 deg^2.
    for (unsigned k = 1; int(k) <= 2 * deg * deg; ++k) {
        if (int(euler_phi(k)) > deg) continue;
        ZPoly phik = cyclotomic(k);
        while (true) {
            auto d = poly_div_exact(q, phik);
            if (!d) break;
            q = *d;
        }
        if (poly_degree(q) == 0) break;
    }
    return poly_degree(q) == 0 && q[0] == 1;
}

ZPoly charpoly(const Mat& m) {
    if (m.rows() != m.cols()) fail("ShapeError", "charpoly needs a square matrix");
    int n = m.rows();
    CoeffMode q = CoeffMode::rationals();
    // Faddeev-LeVerrier: exact over Q.
    std::vector<mpq_class> c(n + 1);
    c[n] = 1;
    Mat mk = Mat::zero(n, n);  // M_0 = 0 => A M_0 + c_n I
    Mat a = m;
    for (int k = 1; k <= n; ++k) {
        // M_k = A*M_{k-1} + c_{n-k+1} I
        Mat am = mul(a, mk, q);
        for (int i = 0; i < n; ++i) am.at(i, i) += c[n - k + 1];
        mk = am;
        Mat prod = mul(a, mk, q);
        mpq_class tr = 0;
        for (int i = 0; i < n; ++i) tr += prod.at(i, i);
        c[n - k] = -tr / k;
    }
    ZPoly out(n + 1);
    for (int i = 0; i <= n; ++i) {
        mpq_class ci = c[i];
        ci.canonicalize();
        if (ci.get_den() != 1) fail("InvalidCoefficient", "charpoly of a non-integral matrix requested as integer polynomial");
        out[i] = ci.get_num();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scalar formatting

std::string scalar_to_string(const mpq_class& v) {
    return v.get_str();
}

mpq_class scalar_from_string(const std::string& s) {
    if (s.empty()) fail("E_NUMBER", "empty number");
    size_t slash = s.find('/');
    auto check_int = [&](const std::string& t) {
        if (t.empty()) fail("E_NUMBER", "malformed number '" + s + "'");
        size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size()) fail("E_NUMBER", "malformed number '" + s + "'");
        for (; i < t.size(); ++i)
            if (!isdigit(static_cast<unsigned char>(t[i]))) fail("E_NUMBER", "malformed number '" + s + "'");
    };
    if (slash == std::string::npos) {
        check_int(s);
        return mpq_class(mpz_class(s));
    }
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    check_int(num);
    check_int(den);
    mpz_class n(num), d(den);
    if (d <= 0) fail("E_FRACTION", "denominator must be positive in '" + s + "'");
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    if (g != 1) fail("E_FRACTION", "fraction '" + s + "' is not in lowest terms");
    mpq_class v(n, d);
    v.canonicalize();
    return v;
}

}  // namespace perv
