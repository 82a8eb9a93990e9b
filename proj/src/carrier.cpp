#include "perv/carrier.hpp"

namespace perv {

namespace {
mpz_class ell_pow(const CoeffMode& mode, unsigned e) {
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), mode.ell.get_mpz_t(), e);
    return p;
}
}  // namespace

bool carrier_map_valid(const Mat& a, const Carrier& src, const Carrier& dst, const CoeffMode& mode) {
    if (a.rows() != dst.rank || a.cols() != src.rank) return false;
    if (mode.is_rational()) return true;
    for (int i = 0; i < dst.rank; ++i)
        for (int j = 0; j < src.rank; ++j) {
            unsigned need = dst.exps[i] > src.exps[j] ? dst.exps[i] - src.exps[j] : 0;
            if (need == 0) continue;
            mpq_class v = mode.reduce(a.at(i, j));
            if (v == 0) continue;
            mpz_class p = ell_pow(mode, need);
            if (!mpz_divisible_p(v.get_num().get_mpz_t(), p.get_mpz_t())) return false;
        }
    return true;
}

Mat carrier_map_reduce(const Mat& a, const Carrier& dst, const CoeffMode& mode) {
    if (mode.is_rational()) return reduce(a, mode);
    Mat r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i) {
        mpz_class p = ell_pow(mode, dst.exps[i]);
        for (int j = 0; j < a.cols(); ++j) {
            mpq_class v = mode.reduce(a.at(i, j));
            mpz_class t;
            mpz_mod(t.get_mpz_t(), v.get_num().get_mpz_t(), p.get_mpz_t());
            r.at(i, j) = mpq_class(t);
        }
    }
    return r;
}

bool carrier_map_equal(const Mat& a, const Mat& b, const Carrier& dst, const CoeffMode& mode) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return carrier_map_reduce(a, dst, mode) == carrier_map_reduce(b, dst, mode);
}

std::optional<Mat> carrier_map_inverse(const Mat& a, const Carrier& c, const CoeffMode& mode) {
    if (a.rows() != a.cols() || a.rows() != c.rank) return std::nullopt;
    if (mode.is_rational() || c.is_free(mode)) return try_inverse(a, mode);
    // Unknown X with the divisibility floors of a valid self-map encoded as
    // X[i][j] = l^{f_ij} Y[i][j]; the equation a X = I is read row-wise
    // modulo l^{e_r}, realized by scaling each row by l^{N - e_r}.
    const int n = c.rank;
    const unsigned N = mode.precision;
    Mat sys(n * n, n * n);
    Mat rhs(n * n, 1);
    auto floor_of = [&](int i, int j) {
        return c.exps[i] > c.exps[j] ? c.exps[i] - c.exps[j] : 0u;
    };
    for (int r = 0; r < n; ++r)
        for (int col = 0; col < n; ++col) {
            int eq = col * n + r;
            mpq_class scale(ell_pow(mode, N - c.exps[r]));
            for (int j = 0; j < n; ++j) {
                // coefficient of Y[j][col]
                mpq_class coeff = mode.mul(a.at(r, j), mpq_class(ell_pow(mode, floor_of(j, col))));
                sys.at(eq, col * n + j) = mode.mul(scale, coeff);
            }
            rhs.at(eq, 0) = mode.mul(scale, mpq_class(r == col ? 1 : 0));
        }
    auto y = solve(sys, rhs, mode);
    if (!y) return std::nullopt;
    Mat x(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            x.at(i, j) = mode.mul(y->at(j * n + i, 0), mpq_class(ell_pow(mode, floor_of(i, j))));
    x = carrier_map_reduce(x, c, mode);
    if (!carrier_map_valid(x, c, c, mode)) return std::nullopt;
    if (!carrier_map_equal(mul(a, x, mode), Mat::identity(n), c, mode)) return std::nullopt;
    if (!carrier_map_equal(mul(x, a, mode), Mat::identity(n), c, mode)) return std::nullopt;
    return x;
}

}  // namespace perv
