#include "perv/curve.hpp"

#include <cassert>
#include <set>

namespace perv {

const BranchData* CurvePresentation::find_branch(const std::string& n) const {
    for (const auto& b : branches)
        if (b.name == n) return &b;
    return nullptr;
}

const PointData* CurvePresentation::find_point(const std::string& n) const {
    for (const auto& p : points)
        if (p.name == n) return &p;
    return nullptr;
}

std::vector<const SlotData*> CurvePresentation::slots_over(const std::string& point) const {
    std::vector<const SlotData*> out;
    for (const auto& s : slots)
        if (s.point == point) out.push_back(&s);
    return out;
}

std::vector<const SlotData*> CurvePresentation::slots_of_branch(const std::string& branch) const {
    std::vector<const SlotData*> out;
    for (const auto& s : slots)
        if (s.branch == branch) out.push_back(&s);
    return out;
}

mpz_class CurvePresentation::slot_q(const SlotData& s) const {
    const PointData* p = find_point(s.point);
    assert(p && !p->residue.algebraically_closed);
    mpz_class q;
    mpz_pow_ui(q.get_mpz_t(), p->residue.q.get_mpz_t(), unsigned(s.residue_index));
    return q;
}

CurveReport validate_curve(const CurvePresentation& c, const CoeffMode& mode) {
    CurveReport rep;
    std::set<std::string> names;
    for (const auto& b : c.branches) {
        if (b.name.empty() || !names.insert("b:" + b.name).second) rep.add("duplicate or empty branch name '" + b.name + "'");
        if (!b.group) rep.add("branch '" + b.name + "' has no group");
    }
    for (const auto& p : c.points) {
        if (p.name.empty() || !names.insert("p:" + p.name).second) rep.add("duplicate or empty point name '" + p.name + "'");
        if (!p.residue.algebraically_closed) {
            if (p.residue.q < 2 || !is_prime_power(p.residue.q))
                rep.add("point '" + p.name + "' residue cardinality is not a prime power");
            if (mode.is_chain() && mpz_divisible_p(p.residue.q.get_mpz_t(), mode.ell.get_mpz_t()))
                rep.add("ell divides the residue characteristic at point '" + p.name + "'");
        }
    }
    for (const auto& s : c.slots) {
        if (s.name.empty() || !names.insert("y:" + s.name).second) rep.add("duplicate or empty slot name '" + s.name + "'");
        const BranchData* b = c.find_branch(s.branch);
        const PointData* p = c.find_point(s.point);
        if (!b) {
            rep.add("slot '" + s.name + "' references unknown branch '" + s.branch + "'");
            continue;
        }
        if (!p) {
            rep.add("slot '" + s.name + "' references unknown point '" + s.point + "'");
            continue;
        }
        auto word_ok = [&](const Word& w) {
            for (int letter : w) {
                int idx = letter > 0 ? letter : -letter;
                if (idx < 1 || idx > b->group->num_word_generators()) return false;
            }
            return true;
        };
        if (!word_ok(s.phi_t)) rep.add("slot '" + s.name + "' inertia word is out of range");
        if (p->residue.algebraically_closed) {
            if (s.residue_index != 1)
                rep.add("slot '" + s.name + "': geometric residue forces index 1");
            if (!s.phi_frob.empty())
                rep.add("slot '" + s.name + "': geometric residue admits no Frobenius word");
        } else {
            if (s.residue_index < 1) rep.add("slot '" + s.name + "' has a non-positive residue index");
            if (s.phi_frob.empty())
                rep.add("slot '" + s.name + "': finite residue requires a Frobenius word");
            else if (!word_ok(s.phi_frob))
                rep.add("slot '" + s.name + "' Frobenius word is out of range");
        }
    }
    // every closed point has at least one preimage slot; every branch meets
    // the boundary (the open complement stays affine)
    for (const auto& p : c.points)
        if (c.slots_over(p.name).empty()) rep.add("point '" + p.name + "' has no slot over it");
    for (const auto& b : c.branches)
        if (c.slots_of_branch(b.name).empty())
            rep.add("branch '" + b.name + "' has no boundary slot (its open part would be proper)");
    return rep;
}

bool is_prime_power(const mpz_class& q) {
    if (q < 2) return false;
    mpz_class n = q;
    mpz_class p = 2;
    while (p * p <= n) {
        if (n % p == 0) {
            while (n % p == 0) n /= p;
            return n == 1;
        }
        p += 1;
    }
    return true;  // prime
}

SlotEvaluation evaluate_slot(const CurvePresentation& c, const SlotData& s, const Representation& section,
                             const CoeffMode& mode) {
    const BranchData* b = c.find_branch(s.branch);
    const PointData* p = c.find_point(s.point);
    if (!b || !p) fail("CurveMismatch", "slot '" + s.name + "' references missing data");
    if (!section.group()->same_presentation(*b->group))
        fail("GroupMismatch", "section on branch '" + s.branch + "' has the wrong group");
    if (section.mode() != mode) fail("GroupMismatch", "section mode mismatch");
    SlotEvaluation ev;
    ev.index = s.residue_index;
    if (p->residue.algebraically_closed) {
        HomDescriptor phi;
        phi.source = GroupPresentation::zhat("t");
        phi.images = {s.phi_t};
        ev.local_rep = restrict_rep(section, phi);
        ev.profile = LocalProfile::geometric(ev.local_rep.action(0), section.carrier(), mode);
        ev.residual_x = GroupPresentation::trivial();
    } else {
        mpz_class qy = c.slot_q(s);
        HomDescriptor phi;
        phi.source = GroupPresentation::local_tame(qy);
        phi.images = {s.phi_t, s.phi_frob};
        ev.local_rep = restrict_rep(section, phi);
        ev.profile = LocalProfile::with_frobenius(ev.local_rep.action(0), ev.local_rep.action(1), qy,
                                                  section.carrier(), mode);
        ev.residual_x = GroupPresentation::zhat();
        ev.weight_base_x = p->residue.q;
    }
    return ev;
}

TwoTermComplex induce_two_term(const TwoTermComplex& c, int d, std::optional<mpz_class> target_base) {
    if (d < 1) fail("UnsupportedInduction", "induction index must be positive");
    if (d == 1) {
        TwoTermComplex out = c;
        if (target_base) out.weight_base = target_base;
        return out;
    }
    if (c.residual->kind != GroupPresentation::Kind::ZhatFrobenius)
        fail("UnsupportedInduction", "index > 1 induction needs a procyclic residual group");
    const CoeffMode& mode = c.mode;
    auto companion = [&](const Mat& corner, int n) {
        Mat f(n * d, n * d);
        for (int b = 0; b + 1 < d; ++b)
            for (int i = 0; i < n; ++i) f.at((b + 1) * n + i, b * n + i) = 1;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) f.at(i, (d - 1) * n + j) = corner.at(i, j);
        return f;
    };
    auto blockrep = [&](const Mat& m) {
        Mat out = m;
        for (int i = 1; i < d; ++i) out = dsum(out, m);
        return out;
    };
    TwoTermComplex out;
    out.mode = mode;
    out.residual = c.residual;
    out.c0 = c.c0.repeat(d);
    out.c1 = c.c1.repeat(d);
    out.d = blockrep(c.d);
    out.act0 = {companion(c.act0[0], c.c0.rank)};
    out.act1 = {companion(c.act1[0], c.c1.rank)};
    // untwist factor sits in the last block only
    Mat u = c.act1_untwist ? *c.act1_untwist : Mat::identity(c.c1.rank);
    if (!u.is_identity()) {
        Mat big = Mat::identity(c.c1.rank * d);
        for (int i = 0; i < c.c1.rank; ++i)
            for (int j = 0; j < c.c1.rank; ++j)
                big.at((d - 1) * c.c1.rank + i, (d - 1) * c.c1.rank + j) = u.at(i, j);
        out.act1_untwist = big;
    }
    out.weight_tag0 = c.weight_tag0;
    out.weight_tag1 = c.weight_tag1;
    out.weight_base = target_base;
    out.validate();
    return out;
}

TwoTermComplex boundary_target(const CurvePresentation& c, const std::string& point,
                               const BranchSections& sections, const CoeffMode& mode) {
    const PointData* p = c.find_point(point);
    if (!p) fail("CurveMismatch", "unknown point '" + point + "'");
    auto over = c.slots_over(point);
    if (over.empty()) fail("CurveMismatch", "point '" + point + "' has no slots");
    std::optional<TwoTermComplex> acc;
    for (const SlotData* s : over) {
        auto it = sections.find(s->branch);
        if (it == sections.end())
            fail("MissingBranchData", "no section on branch '" + s->branch + "'");
        SlotEvaluation ev = evaluate_slot(c, *s, it->second, mode);
        TwoTermComplex delta = boundary(ev.profile, ev.local_rep);
        TwoTermComplex ind = induce_two_term(delta, ev.index, ev.weight_base_x);
        acc = acc ? acc->direct_sum(ind) : ind;
    }
    return *acc;
}

// ---------------------------------------------------------------------------
// Presets

CurvePresentation p1_preset(int punctures) {
    if (punctures < 1) fail("ShapeError", "the projective line preset needs at least one puncture");
    CurvePresentation c;
    c.name = "p1";
    c.branches.push_back({"eta", GroupPresentation::free_profinite(punctures, true)});
    for (int i = 1; i <= punctures; ++i) {
        std::string xn = "x" + std::to_string(i);
        c.points.push_back({xn, ResidueDescriptor::closed_field()});
        c.slots.push_back({"y" + std::to_string(i), "eta", xn, Word{i}, Word{}, 1});
    }
    c.points.push_back({"inf", ResidueDescriptor::closed_field()});
    // the point at infinity carries the derived generator (g_1 ... g_m)^{-1}
    c.slots.push_back({"yinf", "eta", "inf", Word{punctures + 1}, Word{}, 1});
    return c;
}

CurvePresentation spec_zp_preset(const mpz_class& p) {
    if (!is_prime(p)) fail("ShapeError", "Spec Z_p preset needs a prime p");
    CurvePresentation c;
    c.name = "spec_zp";
    c.branches.push_back({"eta", GroupPresentation::local_tame(p)});
    c.points.push_back({"x", ResidueDescriptor::finite_field(p)});
    c.slots.push_back({"y", "eta", "x", Word{1}, Word{2}, 1});
    return c;
}

CurvePresentation node_preset() {
    CurvePresentation c;
    c.name = "node";
    c.branches.push_back({"eta1", GroupPresentation::free_profinite(1, false, {"g"})});
    c.branches.push_back({"eta2", GroupPresentation::free_profinite(1, false, {"g"})});
    c.points.push_back({"x", ResidueDescriptor::closed_field()});
    c.slots.push_back({"y1", "eta1", "x", Word{1}, Word{}, 1});
    c.slots.push_back({"y2", "eta2", "x", Word{1}, Word{}, 1});
    return c;
}

CurvePresentation sqrt5_preset() {
    CurvePresentation c;
    c.name = "sqrt5";
    // tame quotient at the inert place over 2 of Q(sqrt 5): residue F_4 upstairs
    c.branches.push_back({"eta", GroupPresentation::local_tame(4)});
    c.points.push_back({"x", ResidueDescriptor::finite_field(2)});
    c.slots.push_back({"y", "eta", "x", Word{1}, Word{2}, 2});
    return c;
}

}  // namespace perv
