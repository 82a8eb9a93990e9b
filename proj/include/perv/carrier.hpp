#pragma once

#include "perv/linalg.hpp"

namespace perv {

// Carrier of a representation or complex level: a module in invariant-factor
// block form.  Over Q a plain rank; over Z/l^N one exponent per generator
// (N marks a free factor).  Internal constructions (direct sums, inductions)
// keep block order, so exponents are not required to be sorted here.
struct Carrier {
    int rank = 0;
    std::vector<unsigned> exps;  // chain mode only, size == rank

    static Carrier free_of(int rank, const CoeffMode& mode) {
        Carrier c;
        c.rank = rank;
        if (mode.is_chain()) c.exps.assign(size_t(rank), mode.precision);
        return c;
    }
    static Carrier from_module(const CanonicalModule& m, const CoeffMode& mode) {
        Carrier c;
        c.rank = m.generator_count();
        if (mode.is_chain()) {
            c.exps.assign(size_t(m.free_rank), mode.precision);
            for (unsigned e : m.torsion_exponents) c.exps.push_back(e);
        }
        return c;
    }

    CanonicalModule to_module(const CoeffMode& mode) const {
        if (mode.is_rational()) return make_module(rank, {}, mode);
        int fr = 0;
        std::vector<unsigned> tors;
        for (unsigned e : exps) {
            if (e >= mode.precision)
                ++fr;
            else if (e >= 1)
                tors.push_back(e);
        }
        return make_module(fr, std::move(tors), mode);
    }

    bool is_free(const CoeffMode& mode) const {
        if (mode.is_rational()) return true;
        for (unsigned e : exps)
            if (e < mode.precision) return false;
        return true;
    }

    bool operator==(const Carrier& o) const { return rank == o.rank && exps == o.exps; }
    bool operator!=(const Carrier& o) const { return !(*this == o); }

    Carrier dsum(const Carrier& o) const {
        Carrier c;
        c.rank = rank + o.rank;
        c.exps = exps;
        c.exps.insert(c.exps.end(), o.exps.begin(), o.exps.end());
        return c;
    }
    Carrier repeat(int copies) const {
        Carrier c;
        c.rank = rank * copies;
        for (int i = 0; i < copies; ++i) c.exps.insert(c.exps.end(), exps.begin(), exps.end());
        return c;
    }

    // Columns l^{e_i} e_i for torsion generators: the presentation relations.
    Mat relation_columns(const CoeffMode& mode) const {
        if (mode.is_rational()) return Mat(rank, 0);
        std::vector<int> idx;
        for (int i = 0; i < rank; ++i)
            if (exps[i] < mode.precision) idx.push_back(i);
        Mat r(rank, int(idx.size()));
        for (size_t t = 0; t < idx.size(); ++t) {
            mpz_class p;
            mpz_pow_ui(p.get_mpz_t(), mode.ell.get_mpz_t(), exps[idx[t]]);
            r.at(idx[t], int(t)) = mpq_class(p);
        }
        return r;
    }
};

// Maps between carriers are plain matrices; entry (i, j) is read modulo
// l^{e_dst_i} and must be divisible by l^{max(0, e_dst_i - e_src_j)}.
bool carrier_map_valid(const Mat& a, const Carrier& src, const Carrier& dst, const CoeffMode& mode);
// Canonical representative: rows reduced modulo the target annihilators.
Mat carrier_map_reduce(const Mat& a, const Carrier& dst, const CoeffMode& mode);
bool carrier_map_equal(const Mat& a, const Mat& b, const Carrier& dst, const CoeffMode& mode);
// Inverse as a map of presented modules, when it exists.
std::optional<Mat> carrier_map_inverse(const Mat& a, const Carrier& c, const CoeffMode& mode);

}  // namespace perv
