#include "perv/weights.hpp"

#include <cassert>

namespace perv {

std::string to_string(WeightVerdict v) {
    switch (v) {
        case WeightVerdict::StronglyWeightZero: return "StronglyWeightZero";
        case WeightVerdict::HasPositiveWeight: return "HasPositiveWeight";
        case WeightVerdict::Unknown: return "Unknown";
    }
    return "?";
}

bool WeightReport::fully_determined() const {
    for (const auto& f : factors)
        if (!f.weight) return false;
    return true;
}

const Mat& frobenius_action(const Representation& r) {
    switch (r.group()->kind) {
        case GroupPresentation::Kind::ZhatFrobenius:
            return r.action(0);
        case GroupPresentation::Kind::LocalTame:
            return r.action(1);
        default:
            fail("WeightDataRequired", "no designated Frobenius generator on " + r.group()->describe());
    }
}

namespace {

// weight w with |g(0)|^2 = q^{w deg}, if an integer w exists
std::optional<int> weight_of_factor(const ZPoly& g, const mpz_class& q) {
    int deg = poly_degree(g);
    if (deg <= 0) return std::nullopt;
    mpz_class c = abs(g[0]);
    if (c == 0) return std::nullopt;
    mpz_class csq = c * c;
    // find k >= 0 with q^k == csq
    mpz_class pw = 1;
    int k = 0;
    while (pw < csq) {
        pw *= q;
        ++k;
        if (k > 4096) return std::nullopt;
    }
    if (pw != csq) return std::nullopt;
    if (k % deg != 0) return std::nullopt;
    return k / deg;
}

}  // namespace

WeightReport weight_grading(const Representation& r) {
    if (!r.mode().is_rational()) fail("UnsupportedMode", "weight analysis works over the rationals");
    if (!r.frobenius_weight_base()) fail("WeightDataRequired", "no Frobenius weight base declared");
    const mpz_class& q = *r.frobenius_weight_base();
    const Mat& f = frobenius_action(r);
    if (f.rows() > 12) fail("DegreeCap", "weight grading supports dimension at most 12");
    WeightReport out;
    if (f.rows() == 0) {
        out.verdict = WeightVerdict::StronglyWeightZero;
        out.max_weight = out.min_weight = 0;
        return out;
    }
    bool integral = true;
    for (int i = 0; i < f.rows() && integral; ++i)
        for (int j = 0; j < f.cols() && integral; ++j)
            if (f.at(i, j).get_den() != 1) integral = false;
    if (!integral) {
        WeightFactor wf;
        wf.poly = {};
        out.factors.push_back(wf);
        out.verdict = WeightVerdict::Unknown;
        return out;
    }
    ZPoly cp = charpoly(f);
    PolyFactorization fac = factor_monic_bounded(cp);
    bool all_known = true, any_positive = false, all_zero = true;
    int maxw = 0, minw = 0;
    bool first = true;
    for (const auto& [g, mult] : fac.factors) {
        WeightFactor wf;
        wf.poly = g;
        wf.multiplicity = mult;
        wf.weight = weight_of_factor(g, q);
        if (wf.weight) {
            if (first) {
                maxw = minw = *wf.weight;
                first = false;
            } else {
                maxw = std::max(maxw, *wf.weight);
                minw = std::min(minw, *wf.weight);
            }
            if (*wf.weight > 0) any_positive = true;
            if (*wf.weight != 0) all_zero = false;
        } else {
            all_known = false;
        }
        out.factors.push_back(std::move(wf));
    }
    if (poly_degree(fac.remainder) > 0) {
        WeightFactor wf;
        wf.poly = fac.remainder;
        wf.multiplicity = 1;
        out.factors.push_back(std::move(wf));
        all_known = false;
    }
    if (all_known) {
        out.max_weight = maxw;
        out.min_weight = minw;
    }
    if (cyclotomic_product_test(cp))
        out.verdict = WeightVerdict::StronglyWeightZero;
    else if (any_positive)
        out.verdict = WeightVerdict::HasPositiveWeight;
    else
        out.verdict = WeightVerdict::Unknown;
    (void)all_zero;
    return out;
}

Mat w_le_basis(const Representation& r, int a) {
    WeightReport rep = weight_grading(r);
    if (!rep.fully_determined()) fail("WeightUndetermined", "weight grading has unknown factors");
    const CoeffMode& mode = r.mode();
    const Mat& f = frobenius_action(r);
    int n = r.rank();
    Mat gens(n, 0);
    for (const auto& wf : rep.factors) {
        if (*wf.weight > a) continue;
        // generalized eigenspace: kernel of g(F)^mult
        Mat gf = Mat::identity(n);
        Mat base = Mat::zero(n, n);
        {
            // evaluate wf.poly at f
            Mat acc = Mat::zero(n, n);
            for (int i = int(wf.poly.size()) - 1; i >= 0; --i) {
                acc = mul(acc, f, mode);
                for (int d2 = 0; d2 < n; ++d2) acc.at(d2, d2) = mode.add(acc.at(d2, d2), mpq_class(wf.poly[size_t(i)]));
            }
            base = acc;
        }
        for (int k = 0; k < wf.multiplicity; ++k) gf = mul(gf, base, mode);
        CanonicalModule kk = kernel(gf, mode);
        if (kk.embedding_basis) gens = hstack(gens, *kk.embedding_basis);
    }
    return colspan_basis(gens, mode);
}

Representation w_le(const Representation& r, int a) {
    const CoeffMode& mode = r.mode();
    Mat basis = w_le_basis(r, a);
    int k = basis.cols();
    std::vector<Mat> acts;
    for (const Mat& g : r.actions()) {
        Mat image = mul(g, basis, mode);
        auto coords = solve(basis, image, mode);
        if (!coords)
            fail("WeightUndetermined", "a generator does not preserve the weight-bounded subspace");
        acts.push_back(*coords);
    }
    Representation out(r.group(), Carrier::free_of(k, mode), std::move(acts), mode,
                       r.frobenius_weight_base());
    return out;
}

TwoTermComplex omega0_point(const TwoTermComplex& c) { return omega0_point_embedded(c).complex; }

TruncatedTwoTerm omega0_point_embedded(const TwoTermComplex& c) {
    if (!c.weight_base) {
        TruncatedTwoTerm out;
        out.complex = c;
        out.incl0 = Mat::identity(c.c0.rank);
        out.incl1 = Mat::identity(c.c1.rank);
        return out;
    }
    const CoeffMode& mode = c.mode;
    // level representations with untwisted Frobenius
    Representation l0 = c.level_rep(0);
    Representation l1 = c.level_rep(1);
    Mat b0 = w_le_basis(l0, -c.weight_tag0);
    Mat b1 = w_le_basis(l1, -c.weight_tag1);
    // cut level 0 down to the preimage of span(b1): x in span(b0) with
    // d x in span(b1) + relations
    Mat rel1 = c.c1.relation_columns(mode);
    Mat db0 = mul(c.d, b0, mode);
    Mat sysm = hstack(db0, hstack(b1, rel1));
    CanonicalModule kk = kernel(sysm, mode);
    Mat coords(b0.cols(), 0);
    if (kk.embedding_basis && kk.embedding_basis->cols() > 0)
        coords = kk.embedding_basis->rows_slice(0, b0.cols());
    Mat kept0 = colspan_basis(mul(b0, coords, mode), mode);

    // present the kept levels as subquotients of the ambient levels
    Mat rel0 = c.c0.relation_columns(mode);
    Subquotient s0 = subquotient(c.c0.rank, hstack(kept0, rel0), rel0, mode);
    Subquotient s1 = subquotient(c.c1.rank, hstack(b1, rel1), rel1, mode);
    TruncatedTwoTerm res;
    TwoTermComplex& out = res.complex;
    out.mode = mode;
    out.residual = c.residual;
    out.c0 = Carrier::from_module(s0.structure, mode);
    out.c1 = Carrier::from_module(s1.structure, mode);
    out.d = s1.express(mul(c.d, s0.gen_lifts, mode));
    for (int g = 0; g < c.residual->num_generators(); ++g) {
        out.act0.push_back(s0.express(mul(c.act0[size_t(g)], s0.gen_lifts, mode)));
        out.act1.push_back(s1.express(mul(c.act1[size_t(g)], s1.gen_lifts, mode)));
    }
    if (c.act1_untwist) out.act1_untwist = s1.express(mul(*c.act1_untwist, s1.gen_lifts, mode));
    out.weight_tag0 = c.weight_tag0;
    out.weight_tag1 = c.weight_tag1;
    out.weight_base = c.weight_base;
    out.validate();
    res.incl0 = s0.gen_lifts;
    res.incl1 = s1.gen_lifts;
    return res;
}

std::optional<NotArtinCertificate> not_artin_certificate(const Representation& r) {
    if (!r.mode().is_rational()) return std::nullopt;
    for (int g = 0; g < int(r.actions().size()); ++g) {
        const Mat& m = r.action(g);
        bool integral = true;
        for (int i = 0; i < m.rows() && integral; ++i)
            for (int j = 0; j < m.cols() && integral; ++j)
                if (m.at(i, j).get_den() != 1) integral = false;
        if (!integral) continue;
        if (m.rows() == 0) continue;
        ZPoly cp = charpoly(m);
        if (!cyclotomic_product_test(cp)) return NotArtinCertificate{g, cp};
    }
    return std::nullopt;
}

ArtinVerdict artin_verdict(const Representation& r, long order_bound) {
    auto fi = finite_image_test(r, order_bound);
    if (fi.finite) return ArtinVerdict::ArtinCertified;
    if (not_artin_certificate(r)) return ArtinVerdict::NotArtin;
    return ArtinVerdict::Undetermined;
}

}  // namespace perv
