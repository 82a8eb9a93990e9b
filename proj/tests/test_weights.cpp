#include "doctest.h"
#include "perv/weights.hpp"
#include "test_util.hpp"

using namespace perv;
using testutil::mat;

namespace {
Representation frob_rep(const Mat& f, const mpz_class& q, const CoeffMode& mode) {
    auto zh = GroupPresentation::zhat();
    Representation r(zh, Carrier::free_of(f.rows(), mode), {f}, mode);
    r.set_frobenius_weight_base(q);
    return r;
}
}  // namespace

TEST_CASE("weight grading from the Frobenius charpoly") {
    CoeffMode q = CoeffMode::rationals();
    SUBCASE("identity has weight 0") {
        WeightReport r = weight_grading(frob_rep(Mat::identity(2), 3, q));
        CHECK(r.verdict == WeightVerdict::StronglyWeightZero);
        CHECK(*r.max_weight == 0);
        CHECK(*r.min_weight == 0);
    }
    SUBCASE("x^2 - x + 3 over q = 3 is pure of weight 1") {
        // companion matrix of x^2 - x + 3
        Mat f = mat(2, 2, {0, -3, 1, 1});
        WeightReport r = weight_grading(frob_rep(f, 3, q));
        REQUIRE(r.max_weight.has_value());
        CHECK(*r.max_weight == 1);
        CHECK(*r.min_weight == 1);
        CHECK(r.verdict == WeightVerdict::HasPositiveWeight);
    }
    SUBCASE("scalar q has weight 2") {
        WeightReport r = weight_grading(frob_rep(mat(1, 1, {5}), 5, q));
        CHECK(*r.max_weight == 2);
    }
    SUBCASE("missing weight base is reported") {
        auto zh = GroupPresentation::zhat();
        Representation r(zh, Carrier::free_of(1, q), {Mat::identity(1)}, q);
        CHECK_THROWS_WITH_AS(weight_grading(r), doctest::Contains("WeightDataRequired"), Error);
    }
}

TEST_CASE("weight truncation w_le") {
    CoeffMode q = CoeffMode::rationals();
    SUBCASE("all weights 0 keeps everything") {
        Representation r = frob_rep(Mat::identity(2), 3, q);
        CHECK(w_le(r, 0).rank() == 2);
        CHECK(w_le_basis(r, 0).cols() == 2);
    }
    SUBCASE("diag(1, q) splits into weights 0 and 2") {
        Representation r = frob_rep(mat(2, 2, {1, 0, 0, 3}), 3, q);
        Mat b0 = w_le_basis(r, 0);
        CHECK(b0.cols() == 1);
        CHECK(b0.at(0, 0) == 1);
        CHECK(b0.at(1, 0) == 0);
        CHECK(w_le_basis(r, -1).cols() == 0);
        CHECK(w_le_basis(r, 2).cols() == 2);
    }
    SUBCASE("idempotence and monotonicity") {
        Representation r = frob_rep(mat(2, 2, {1, 0, 0, 9}), 3, q);
        Representation r0 = w_le(r, 0);
        CHECK(w_le(r0, 0).rank() == r0.rank());
        Mat b0 = w_le_basis(r, 0);
        Mat b4 = w_le_basis(r, 4);
        CHECK(span_contains(b4, b0, q));
    }
}

TEST_CASE("weightless truncation of tagged two-term complexes") {
    CoeffMode q = CoeffMode::rationals();
    SUBCASE("geometric profile is untouched") {
        TwoTermComplex c = TwoTermComplex::zero(GroupPresentation::trivial(), q);
        c.c0 = Carrier::free_of(1, q);
        c.c1 = Carrier::free_of(1, q);
        c.d = Mat(1, 1);
        c.act0 = {};
        c.act1 = {};
        TwoTermComplex t = omega0_point(c);
        CHECK(t.c0.rank == 1);
        CHECK(t.c1.rank == 1);
    }
    SUBCASE("weight-0 level with tag +2 dies") {
        TwoTermComplex c;
        c.mode = q;
        c.residual = GroupPresentation::zhat();
        c.c0 = Carrier::free_of(1, q);
        c.c1 = Carrier::free_of(1, q);
        c.d = Mat(1, 1);
        c.act0 = {Mat::identity(1)};
        c.act1 = {Mat::identity(1)};
        c.weight_tag0 = 0;
        c.weight_tag1 = 2;
        c.weight_base = 3;
        TwoTermComplex t = omega0_point(c);
        CHECK(t.c0.rank == 1);
        CHECK(t.c1.rank == 0);
        // idempotent
        TwoTermComplex t2 = omega0_point(t);
        CHECK(t2.c0.rank == t.c0.rank);
        CHECK(t2.c1.rank == t.c1.rank);
    }
    SUBCASE("the degree-0 level shrinks to the preimage of the kept degree-1 level") {
        // d = t - 1 for unipotent t, tags (0, 2): level 1 dies, level 0 keeps ker(d)
        TwoTermComplex c;
        c.mode = q;
        c.residual = GroupPresentation::zhat();
        c.c0 = Carrier::free_of(2, q);
        c.c1 = Carrier::free_of(2, q);
        c.d = mat(2, 2, {0, 1, 0, 0});
        c.act0 = {Mat::identity(2)};
        c.act1 = {Mat::identity(2)};
        c.weight_tag0 = 0;
        c.weight_tag1 = 2;
        c.weight_base = 3;
        TwoTermComplex t = omega0_point(c);
        CHECK(t.c0.rank == 1);
        CHECK(t.c1.rank == 0);
    }
}

TEST_CASE("omega0 preserves exactness of weight-graded data") {
    CoeffMode q = CoeffMode::rationals();
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        // split SES of weight-graded representations: X, Z random diag weights
        auto build = [&](int n) {
            Mat f(n, n);
            for (int i = 0; i < n; ++i) {
                long w = rng.uniform(0, 2);
                mpz_class lam = 1;
                for (long k = 0; k < w; ++k) lam *= 3;
                f.at(i, i) = mpq_class(lam) * mpq_class(rng.uniform(0, 1) ? 1 : -1);
            }
            return frob_rep(f, 9, q);  // q = 9 so odd weights stay unknown-free: 9^{w/2} = 3^w
        };
        Representation x = build(int(rng.uniform(1, 2)));
        Representation z = build(int(rng.uniform(1, 2)));
        Representation y = x.direct_sum(z);
        long a = rng.uniform(-1, 2);
        Mat bx = w_le_basis(x, int(a));
        Mat by = w_le_basis(y, int(a));
        Mat bz = w_le_basis(z, int(a));
        CHECK(bx.cols() + bz.cols() == by.cols());
    }
}

TEST_CASE("not-artin certificates") {
    CoeffMode q = CoeffMode::rationals();
    auto zh = GroupPresentation::zhat();
    CHECK(!not_artin_certificate(Representation::trivial_rep(zh, 2, q)));
    // charpoly x^2 - x + 3: weight 1, not cyclotomic
    Representation w1(zh, Carrier::free_of(2, q), {mat(2, 2, {0, -3, 1, 1})}, q);
    auto cert = not_artin_certificate(w1);
    REQUIRE(cert.has_value());
    CHECK(cert->failing_charpoly == ZPoly{3, -1, 1});
    CHECK(artin_verdict(w1) == ArtinVerdict::NotArtin);
    // order-4 rotation: x^2 + 1 is cyclotomic
    Representation rot(zh, Carrier::free_of(2, q), {mat(2, 2, {0, -1, 1, 0})}, q);
    CHECK(!not_artin_certificate(rot));
    CHECK(artin_verdict(rot) == ArtinVerdict::ArtinCertified);
    // unipotent: no certificate either way
    Representation uni(zh, Carrier::free_of(2, q), {mat(2, 2, {1, 1, 0, 1})}, q);
    CHECK(!not_artin_certificate(uni));
    CHECK(artin_verdict(uni) == ArtinVerdict::Undetermined);
}

TEST_CASE("certificate soundness against finite image") {
    CoeffMode q = CoeffMode::rationals();
    Rng rng(77);
    auto g = GroupPresentation::free_profinite(2, false);
    for (int trial = 0; trial < 20; ++trial) {
        int n = int(rng.uniform(1, 3));
        Mat a(n, n), b(n, n);
        // permutation-with-signs matrices: always finite image
        for (int i = 0; i < n; ++i) {
            a.at((i + 1) % n, i) = rng.uniform(0, 1) ? 1 : -1;
            b.at(i, i) = rng.uniform(0, 1) ? 1 : -1;
        }
        Representation r(g, Carrier::free_of(n, q), {a, b}, q);
        if (finite_image_test(r, 4096).finite) CHECK(!not_artin_certificate(r).has_value());
    }
}
