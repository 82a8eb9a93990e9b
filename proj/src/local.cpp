#include "perv/local.hpp"

#include <cassert>

namespace perv {

LocalProfile LocalProfile::geometric(const Mat& t, const Carrier& carrier, const CoeffMode& mode) {
    LocalProfile p;
    p.kind = Kind::TameGeometric;
    p.mode = mode;
    p.carrier = carrier;
    p.t = carrier_map_reduce(t, carrier, mode);
    return p;
}

LocalProfile LocalProfile::with_frobenius(const Mat& t, const Mat& f, const mpz_class& q,
                                          const Carrier& carrier, const CoeffMode& mode) {
    LocalProfile p;
    p.kind = Kind::TameFrobenius;
    p.mode = mode;
    p.carrier = carrier;
    p.t = carrier_map_reduce(t, carrier, mode);
    p.frobenius = carrier_map_reduce(f, carrier, mode);
    p.q = q;
    return p;
}

ProfileReport validate_profile(const LocalProfile& p) {
    ProfileReport rep;
    if (!carrier_map_valid(p.t, p.carrier, p.carrier, p.mode)) {
        rep.add("inertia generator is not a valid self-map of the carrier");
        return rep;
    }
    if (!carrier_map_inverse(p.t, p.carrier, p.mode)) rep.add("inertia generator is not invertible");
    if (p.kind == LocalProfile::Kind::TameFrobenius) {
        if (!p.frobenius) {
            rep.add("Frobenius matrix missing");
            return rep;
        }
        if (p.q < 2) rep.add("residue cardinality q must be at least 2");
        if (!carrier_map_inverse(*p.frobenius, p.carrier, p.mode)) rep.add("Frobenius is not invertible");
        // F t F^{-1} = t^q, checked multiplicatively
        Mat lhs = mul(*p.frobenius, p.t, p.mode);
        Mat rhs = mul(pow(p.t, p.q, p.mode), *p.frobenius, p.mode);
        if (!carrier_map_equal(lhs, rhs, p.carrier, p.mode))
            rep.add("tame relation F t F^{-1} = t^q fails");
        if (p.mode.is_chain() && mpz_divisible_p(p.q.get_mpz_t(), p.mode.ell.get_mpz_t()))
            rep.add("residue characteristic divides ell (ell must be invertible on the base)");
    }
    return rep;
}

Mat matrix_geometric_sum(const Mat& u, const mpz_class& e, const CoeffMode& mode) {
    assert(e >= 0);
    if (e == 0) return Mat::zero(u.rows(), u.rows());
    if (e == 1) return Mat::identity(u.rows());
    mpz_class half = e / 2;
    Mat s_half = matrix_geometric_sum(u, half, mode);
    Mat u_half = pow(u, half, mode);
    Mat s = add(s_half, mul(u_half, s_half, mode), mode);  // sum of 2*half terms
    if (mpz_odd_p(e.get_mpz_t())) {
        Mat u_even = mul(u_half, u_half, mode);
        s = add(s, u_even, mode);
    }
    return s;
}

TwoTermComplex TwoTermComplex::zero(GroupPtr residual, const CoeffMode& mode) {
    TwoTermComplex c;
    c.mode = mode;
    c.residual = std::move(residual);
    c.c0 = Carrier::free_of(0, mode);
    c.c1 = Carrier::free_of(0, mode);
    c.d = Mat(0, 0);
    c.act0.assign(size_t(c.residual->num_generators()), Mat(0, 0));
    c.act1.assign(size_t(c.residual->num_generators()), Mat(0, 0));
    return c;
}

void TwoTermComplex::validate() const {
    if (!residual) fail("ShapeError", "two-term complex needs a residual group");
    if (!carrier_map_valid(d, c0, c1, mode)) fail("ShapeError", "differential is not a valid carrier map");
    if (int(act0.size()) != residual->num_generators() || int(act1.size()) != residual->num_generators())
        fail("ShapeError", "one action per residual generator expected on both levels");
    for (size_t g = 0; g < act0.size(); ++g) {
        if (!carrier_map_valid(act0[g], c0, c0, mode) || !carrier_map_valid(act1[g], c1, c1, mode))
            fail("ShapeError", "residual action has the wrong shape");
        if (!carrier_map_inverse(act0[g], c0, mode) || !carrier_map_inverse(act1[g], c1, mode))
            fail("InvalidCoefficient", "residual action is not invertible");
        Mat lhs = mul(act1[g], d, mode);
        Mat rhs = mul(d, act0[g], mode);
        if (!carrier_map_equal(lhs, rhs, c1, mode))
            fail("ShapeError", "residual action does not commute with the differential");
    }
}

bool TwoTermComplex::is_acyclic() const {
    return h0(*this).rep.rank() == 0 && h1(*this).rep.rank() == 0;
}

TwoTermComplex TwoTermComplex::direct_sum(const TwoTermComplex& o) const {
    if (!residual->same_presentation(*o.residual) || mode != o.mode)
        fail("GroupMismatch", "direct sum of two-term complexes needs matching residual data");
    TwoTermComplex c;
    c.mode = mode;
    c.residual = residual;
    c.c0 = c0.dsum(o.c0);
    c.c1 = c1.dsum(o.c1);
    c.d = dsum(d, o.d);
    for (size_t g = 0; g < act0.size(); ++g) {
        c.act0.push_back(dsum(act0[g], o.act0[g]));
        c.act1.push_back(dsum(act1[g], o.act1[g]));
    }
    c.weight_tag0 = weight_tag0;
    c.weight_tag1 = weight_tag1;
    c.weight_base = weight_base ? weight_base : o.weight_base;
    if (act1_untwist || o.act1_untwist) {
        Mat left = act1_untwist ? *act1_untwist : Mat::identity(c1.rank);
        Mat right = o.act1_untwist ? *o.act1_untwist : Mat::identity(o.c1.rank);
        c.act1_untwist = dsum(left, right);
    }
    return c;
}

Mat TwoTermComplex::untwisted_act1(int generator) const {
    Mat a = act1[size_t(generator)];
    if (act1_untwist) a = mul(a, *act1_untwist, mode);
    return a;
}

Representation TwoTermComplex::level_rep(int level) const {
    const Carrier& c = level == 0 ? c0 : c1;
    if (level == 0) {
        Representation r(residual, c, act0, mode);
        if (weight_base) r.set_frobenius_weight_base(*weight_base);
        return r;
    }
    // level 1: untwisted actions give the weight-faithful representation;
    // they still satisfy the residual group's relations (conjugation by the
    // untwist factor tracks between the two normalizations)
    std::vector<Mat> acts;
    for (int g = 0; g < residual->num_generators(); ++g) acts.push_back(untwisted_act1(g));
    Representation r(residual, c, acts, mode);
    if (weight_base) r.set_frobenius_weight_base(*weight_base);
    return r;
}

TwoTermComplex boundary(const LocalProfile& p, const Representation& m) {
    ProfileReport pr = validate_profile(p);
    if (!pr.valid) fail("ProfileMismatch", "invalid local profile: " + pr.failures.front());
    const CoeffMode& mode = p.mode;
    if (m.mode() != mode) fail("ProfileMismatch", "mode mismatch between profile and representation");
    if (m.carrier() != p.carrier) fail("ProfileMismatch", "carrier mismatch between profile and representation");

    // match the representation's action matrices against the profile
    if (p.kind == LocalProfile::Kind::TameGeometric) {
        if (m.group()->num_generators() != 1)
            fail("ProfileMismatch", "geometric profile expects a single inertia generator");
        if (!carrier_map_equal(m.action(0), p.t, p.carrier, mode))
            fail("ProfileMismatch", "representation and profile disagree on the inertia action");
    } else {
        if (m.group()->kind != GroupPresentation::Kind::LocalTame)
            fail("ProfileMismatch", "Frobenius profile expects a tame local group");
        if (m.group()->q != p.q) fail("ProfileMismatch", "profile and group disagree on q");
        if (!carrier_map_equal(m.action(0), p.t, p.carrier, mode) ||
            !carrier_map_equal(m.action(1), *p.frobenius, p.carrier, mode))
            fail("ProfileMismatch", "representation and profile disagree on t or F");
    }

    TwoTermComplex c;
    c.mode = mode;
    c.c0 = m.carrier();
    c.c1 = m.carrier();
    c.d = sub(p.t, Mat::identity(p.t.rows()), mode);
    c.weight_tag0 = 0;
    c.weight_tag1 = 2;
    if (p.kind == LocalProfile::Kind::TameGeometric) {
        c.residual = GroupPresentation::trivial();
    } else {
        c.residual = GroupPresentation::zhat();
        c.weight_base = p.q;
        const Mat& f = *p.frobenius;
        Mat finv = *carrier_map_inverse(f, p.carrier, mode);
        Mat u = mul(finv, mul(p.t, f, mode), mode);  // u = F^{-1} t F, with u^q = t
        Mat n = matrix_geometric_sum(u, p.q, mode);
        auto ninv = carrier_map_inverse(n, p.carrier, mode);
        if (!ninv)
            fail("ProfileMismatch",
                 "inertia generator does not generate a pro-ell group (norm sum is not invertible)");
        c.act0 = {f};
        c.act1 = {mul(f, *ninv, mode)};
        c.act1_untwist = n;
    }
    c.validate();
    return c;
}

namespace {

// Submodule-with-action helper: gens inside the presented ambient level,
// with induced residual action; rels are divided out.
TaggedRep homology_rep(const TwoTermComplex& c, int level, const Mat& gens, const Mat& rels) {
    const Carrier& amb = level == 0 ? c.c0 : c.c1;
    Subquotient sq = subquotient(amb.rank, gens, rels, c.mode);
    Carrier newc = Carrier::from_module(sq.structure, c.mode);
    std::vector<Mat> acts;
    for (int g = 0; g < c.residual->num_generators(); ++g) {
        // level 1 reports the untwisted action (plain Frobenius on H^1)
        Mat a = level == 0 ? c.act0[size_t(g)] : c.untwisted_act1(g);
        acts.push_back(sq.express(mul(a, sq.gen_lifts, c.mode)));
    }
    Representation rep(c.residual, newc, acts, c.mode);
    if (c.weight_base) rep.set_frobenius_weight_base(*c.weight_base);
    TaggedRep out{std::move(rep), level == 0 ? c.weight_tag0 : c.weight_tag1};
    return out;
}

}  // namespace

TaggedRep h0(const TwoTermComplex& c) {
    // kernel of [d | rel_1] projected to the level-0 coordinates, modulo rel_0
    Mat rel0 = c.c0.relation_columns(c.mode);
    Mat rel1 = c.c1.relation_columns(c.mode);
    Mat sys = hstack(c.d, rel1);
    CanonicalModule k = kernel(sys, c.mode);
    Mat gens(c.c0.rank, 0);
    if (k.embedding_basis && k.embedding_basis->cols() > 0)
        gens = k.embedding_basis->rows_slice(0, c.c0.rank);
    gens = hstack(gens, rel0);
    return homology_rep(c, 0, gens, rel0);
}

TaggedRep h1(const TwoTermComplex& c) {
    Mat rel1 = c.c1.relation_columns(c.mode);
    Mat rels = hstack(c.d, rel1);
    return homology_rep(c, 1, Mat::identity(c.c1.rank), rels);
}

}  // namespace perv
