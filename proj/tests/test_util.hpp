#pragma once

#include "perv/document.hpp"

namespace perv::testutil {

inline Mat mat(int rows, int cols, std::initializer_list<long> entries) {
    Mat m(rows, cols);
    auto it = entries.begin();
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m.at(i, j) = *it++;
    return m;
}

inline Mat random_matrix(Rng& rng, int rows, int cols, const CoeffMode& mode, long lo = -3, long hi = 3) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m.at(i, j) = mode.reduce(mpq_class(rng.uniform(lo, hi)));
    return m;
}

inline Mat random_invertible(Rng& rng, int n, const CoeffMode& mode) {
    for (int tries = 0; tries < 200; ++tries) {
        Mat m = random_matrix(rng, n, n, mode, mode.is_chain() ? 0 : -3, mode.is_chain() ? 4 : 3);
        if (try_inverse(m, mode)) return m;
    }
    return Mat::identity(n);
}

// random representation of a branch group, built from relation-safe templates
inline Representation random_branch_rep(Rng& rng, const GroupPtr& g, const CoeffMode& mode, int maxdim = 2) {
    int ng = g->num_generators();
    switch (g->kind) {
        case GroupPresentation::Kind::FreeProfinite:
        case GroupPresentation::Kind::ZhatFrobenius: {
            int n = int(rng.uniform(1, maxdim));
            std::vector<Mat> acts;
            for (int i = 0; i < ng; ++i) acts.push_back(random_invertible(rng, n, mode));
            return Representation(g, Carrier::free_of(n, mode), acts, mode);
        }
        case GroupPresentation::Kind::LocalTame: {
            // dim-1 and dim-2 templates conjugated by a random invertible
            const mpz_class& q = g->q;
            long pick = rng.uniform(0, 2);
            Mat t, f;
            if (pick == 0) {
                t = Mat::identity(1);
                f = Mat(1, 1);
                f.at(0, 0) = mpq_class(rng.uniform(1, 3));
            } else if (pick == 1) {
                // trivial inertia, free Frobenius
                int n = 2;
                t = Mat::identity(n);
                f = random_invertible(rng, n, mode);
            } else {
                // unipotent inertia: t = [[1,1],[0,1]], F = diag(q c, c)
                t = mat(2, 2, {1, 1, 0, 1});
                mpq_class c = mpq_class(rng.uniform(1, 2));
                f = Mat(2, 2);
                f.at(0, 0) = mode.reduce(mpq_class(q) * c);
                f.at(1, 1) = mode.reduce(c);
                if (!try_inverse(f, mode)) {
                    t = Mat::identity(1);
                    f = Mat::identity(1);
                }
            }
            Representation base(g, Carrier::free_of(t.rows(), mode), {t, f}, mode);
            Mat p = random_invertible(rng, t.rows(), mode);
            Representation out = base.conjugate(p);
            out.set_frobenius_weight_base(q);
            return out;
        }
        default:
            return Representation::trivial_rep(g, 1, mode);
    }
}

inline BranchSections random_sections(Rng& rng, const CurvePresentation& curve, const CoeffMode& mode,
                                      int maxdim = 2) {
    BranchSections out;
    for (const auto& b : curve.branches) out.emplace(b.name, random_branch_rep(rng, b.group, mode, maxdim));
    return out;
}

// random heart object: a direct sum drawn from {j_!, j_*, intermediate, skyscrapers}
inline HeartObject random_object(Rng& rng, CurvePtr curve, const CoeffMode& mode, int maxdim = 2) {
    BranchSections secs = random_sections(rng, *curve, mode, maxdim);
    HeartObject o;
    long pick = rng.uniform(0, 2);
    if (pick == 0)
        o = j_shriek(curve, secs, mode);
    else if (pick == 1)
        o = j_star(curve, secs, mode);
    else
        o = intermediate_extension(curve, secs, mode);
    if (rng.uniform(0, 1)) {
        // add a skyscraper at a random point
        const auto& pts = curve->points;
        const PointData& p = pts[size_t(rng.uniform(0, long(pts.size()) - 1))];
        GroupPtr res = p.residue.algebraically_closed ? GroupPresentation::trivial()
                                                      : GroupPresentation::zhat();
        Representation v = Representation::trivial_rep(res, 1, mode);
        if (res->num_generators() == 1) {
            Mat a(1, 1);
            a.at(0, 0) = mode.is_chain() ? mpq_class(1) : mpq_class(rng.uniform(0, 1) ? 1 : -1);
            v = Representation(res, Carrier::free_of(1, mode), {a}, mode);
        }
        if (!p.residue.algebraically_closed) v.set_frobenius_weight_base(p.residue.q);
        o = o.direct_sum(i_star(curve, p.name, v, mode));
    }
    return o;
}

// random morphism taken from the hom module basis with small coefficients
inline std::optional<HeartMorphism> random_morphism(Rng& rng, const HeartObject& a, const HeartObject& b) {
    HeartHom hom = hom_module(a, b);
    if (hom.basis.empty()) return std::nullopt;
    const CoeffMode& mode = a.mode;
    HeartMorphism acc = zero_morphism(a, b);
    for (const auto& m : hom.basis) {
        long c = rng.uniform(mode.is_chain() ? 0 : -2, 2);
        if (c == 0) continue;
        for (auto& [k, v] : acc.branch_maps)
            v = add(v, scalar_mul(mpq_class(c), m.branch_maps.at(k), mode), mode);
        for (auto& [k, v] : acc.point_maps) {
            const HeartPointMap& pm = m.point_maps.at(k);
            v.m0 = add(v.m0, scalar_mul(mpq_class(c), pm.m0, mode), mode);
            v.m1 = add(v.m1, scalar_mul(mpq_class(c), pm.m1, mode), mode);
            v.h = add(v.h, scalar_mul(mpq_class(c), pm.h, mode), mode);
        }
    }
    return acc;
}

}  // namespace perv::testutil
