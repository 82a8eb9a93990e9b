#include "doctest.h"
#include "perv/curve.hpp"
#include "test_util.hpp"

using namespace perv;
using testutil::mat;

TEST_CASE("the four presets validate") {
    CoeffMode q = CoeffMode::rationals();
    CHECK(validate_curve(p1_preset(2), q).valid);
    CHECK(validate_curve(spec_zp_preset(3), q).valid);
    CHECK(validate_curve(node_preset(), q).valid);
    CHECK(validate_curve(sqrt5_preset(), q).valid);
    // ell must stay invertible on the base
    CHECK(!validate_curve(sqrt5_preset(), CoeffMode::chain(2, 1)).valid);
    CHECK(validate_curve(sqrt5_preset(), CoeffMode::chain(3, 1)).valid);
}

TEST_CASE("structurally broken curves are rejected") {
    CoeffMode q = CoeffMode::rationals();
    auto c = node_preset();
    c.slots[0].point = "nowhere";
    CHECK(!validate_curve(c, q).valid);
    auto c2 = node_preset();
    c2.slots.pop_back();
    // branch eta2 loses its only boundary slot
    CHECK(!validate_curve(c2, q).valid);
    auto c3 = sqrt5_preset();
    c3.slots[0].phi_frob.clear();
    CHECK(!validate_curve(c3, q).valid);
}

TEST_CASE("p1 preset carries the product relation at infinity") {
    CHECK(p1_preset(1).points.size() == 2);  // one puncture plus infinity
    auto c = p1_preset(2);
    CHECK(c.points.size() == 3);
    CHECK(c.slots.back().phi_t == Word{3});  // derived generator
    CoeffMode q = CoeffMode::rationals();
    Representation r(c.find_branch("eta")->group, Carrier::free_of(2, q),
                     {mat(2, 2, {0, -1, 1, 0}), mat(2, 2, {0, 1, 1, 0})}, q);
    // the product of all marked local images is the identity
    Mat prod = Mat::identity(2);
    for (const auto& s : c.slots) prod = mul(prod, r.eval(s.phi_t), q);
    CHECK(prod.is_identity());
}

TEST_CASE("boundary targets at the presets") {
    CoeffMode q = CoeffMode::rationals();
    SUBCASE("p1 with trivial monodromy") {
        auto c = p1_preset(1);
        BranchSections secs;
        secs.emplace("eta", Representation::trivial_rep(c.find_branch("eta")->group, 1, q));
        TwoTermComplex t = boundary_target(c, "x1", secs, q);
        CHECK(t.c0.rank == 1);
        CHECK(t.c1.rank == 1);
        CHECK(t.d.is_zero());
        CHECK(h0(t).rep.rank() == 1);
        CHECK(h1(t).rep.rank() == 1);
    }
    SUBCASE("node glues both branches") {
        auto c = node_preset();
        BranchSections secs;
        secs.emplace("eta1", Representation(c.find_branch("eta1")->group, Carrier::free_of(1, q),
                                            {mat(1, 1, {1})}, q));
        secs.emplace("eta2", Representation(c.find_branch("eta2")->group, Carrier::free_of(2, q),
                                            {mat(2, 2, {0, -1, 1, 0})}, q));
        TwoTermComplex t = boundary_target(c, "x", secs, q);
        CHECK(t.c0.rank == 3);
        CHECK(h0(t).rep.rank() == 1);  // only the trivial branch has invariants
    }
    SUBCASE("sqrt5 induces along the index-2 inclusion") {
        auto c = sqrt5_preset();
        Mat t = Mat::identity(1);
        Mat f = mat(1, 1, {1});
        BranchSections secs;
        secs.emplace("eta", Representation(c.find_branch("eta")->group, Carrier::free_of(1, q), {t, f}, q));
        TwoTermComplex tc = boundary_target(c, "x", secs, q);
        CHECK(tc.c0.rank == 2);  // Ind along multiplication by 2
        CHECK(tc.weight_base.has_value());
        CHECK(*tc.weight_base == 2);
        CHECK(tc.act0[0] == mat(2, 2, {0, 1, 1, 0}));  // companion of the trivial Frobenius
    }
    SUBCASE("missing branch data is reported") {
        auto c = node_preset();
        BranchSections secs;
        secs.emplace("eta1", Representation::trivial_rep(c.find_branch("eta1")->group, 1, q));
        CHECK_THROWS_WITH_AS(boundary_target(c, "x", secs, q), doctest::Contains("MissingBranchData"),
                             Error);
    }
}

TEST_CASE("boundary target is additive in sections") {
    CoeffMode q = CoeffMode::rationals();
    auto c = p1_preset(2);
    GroupPtr g = c.find_branch("eta")->group;
    Representation a(g, Carrier::free_of(1, q), {mat(1, 1, {1}), mat(1, 1, {-1})}, q);
    Representation b(g, Carrier::free_of(2, q), {mat(2, 2, {0, -1, 1, 0}), mat(2, 2, {1, 0, 0, -1})}, q);
    BranchSections sa{{"eta", a}}, sb{{"eta", b}}, ssum{{"eta", a.direct_sum(b)}};
    for (const auto& p : c.points) {
        TwoTermComplex ta = boundary_target(c, p.name, sa, q);
        TwoTermComplex tb = boundary_target(c, p.name, sb, q);
        TwoTermComplex ts = boundary_target(c, p.name, ssum, q);
        CHECK(ta.c0.rank + tb.c0.rank == ts.c0.rank);
        CHECK(h0(ta).rep.rank() + h0(tb).rep.rank() == h0(ts).rep.rank());
        CHECK(h1(ta).rep.rank() + h1(tb).rep.rank() == h1(ts).rep.rank());
    }
}

TEST_CASE("spec_zp boundary target is the inertia complex of the local representation") {
    CoeffMode q = CoeffMode::rationals();
    auto c = spec_zp_preset(3);
    Mat t = mat(2, 2, {1, 1, 0, 1});
    Mat f = mat(2, 2, {3, 0, 0, 1});
    BranchSections secs;
    secs.emplace("eta", Representation(c.find_branch("eta")->group, Carrier::free_of(2, q), {t, f}, q));
    TwoTermComplex tc = boundary_target(c, "x", secs, q);
    CHECK(tc.c0.rank == 2);
    CHECK(tc.d == sub(t, Mat::identity(2), q));
    CHECK(*tc.weight_base == 3);
    CHECK(h0(tc).rep.action(0) == mat(1, 1, {3}));
}
