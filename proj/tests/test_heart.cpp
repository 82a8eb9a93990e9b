#include "doctest.h"
#include "perv/heart.hpp"
#include "test_util.hpp"

using namespace perv;
using testutil::mat;
using testutil::random_morphism;
using testutil::random_object;
using testutil::random_sections;

namespace {

CurvePtr P1(int m) { return std::make_shared<CurvePresentation>(p1_preset(m)); }

BranchSections trivial_sections(const CurvePtr& c, const CoeffMode& mode, int rank = 1) {
    BranchSections s;
    for (const auto& b : c->branches) s.emplace(b.name, Representation::trivial_rep(b.group, rank, mode));
    return s;
}

}  // namespace

TEST_CASE("six functor normal forms") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    BranchSections secs = trivial_sections(c, q);
    HeartObject js = j_shriek(c, secs, q);
    HeartObject jst = j_star(c, secs, q);
    CHECK(validate_object(js, false).valid);
    CHECK(validate_object(jst, false).valid);
    CHECK(validate_object(js, true).valid);  // trivial monodromy is certified

    // j^* j_! = identity on branch data
    CHECK(j_upper_star(js).at("eta").action(0) == secs.at("eta").action(0));
    // i^* j_! = 0
    TwoTermComplex z = i_upper_star(js, "x1");
    CHECK(z.c0.rank == 0);
    CHECK(z.c1.rank == 0);
    // i^! j_* = fib(id) is acyclic
    CHECK(i_upper_shriek(jst, "x1").is_acyclic());
    // j_* has the boundary target as its point complex
    CHECK(jst.points.at("x1").complex.c0.rank == 1);
    CHECK(jst.points.at("x1").f0.is_identity());
    // skyscraper
    Representation v = Representation::trivial_rep(GroupPresentation::trivial(), 1, q);
    HeartObject sky = i_star(c, "x1", v, q);
    CHECK(validate_object(sky, true).valid);
    CHECK(sky.points.at("x1").complex.c1.rank == 1);
    CHECK(sky.points.at("x1").complex.c0.rank == 0);
}

TEST_CASE("H^0(f) injectivity is enforced") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    BranchSections secs = trivial_sections(c, q);
    HeartObject bad = j_shriek(c, secs, q);
    // a nonzero degree-0 point module with zero boundary map
    HeartPointPart pp;
    pp.complex.mode = q;
    pp.complex.residual = GroupPresentation::trivial();
    pp.complex.c0 = Carrier::free_of(1, q);
    pp.complex.c1 = Carrier::free_of(0, q);
    pp.complex.d = Mat(0, 1);
    TwoTermComplex t = bad.target_at("x1");
    pp.f0 = Mat(t.c0.rank, 1);
    pp.f1 = Mat(t.c1.rank, 0);
    bad.points["x1"] = pp;
    ObjectReport r = validate_object(bad, false);
    CHECK(!r.valid);
}

TEST_CASE("embed and extract round trip") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    Rng rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
        HeartObject o = random_object(rng, c, q);
        GluedComplex g = embed(o);
        g.validate();
        HeartObject back = extract(g);
        CHECK(validate_object(back, false).valid);
        auto iso = find_isomorphism(o, back);
        CHECK(iso.has_value());
    }
}

TEST_CASE("perverse cohomology of embeddings and shifts") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    Rng rng(55);
    HeartObject o = random_object(rng, c, q);
    GluedComplex g = embed(o);
    CHECK(perverse_cohomology(g, -1).is_zero());
    CHECK(perverse_cohomology(g, 1).is_zero());
    HeartObject h0o = perverse_cohomology(g, 0);
    CHECK(find_isomorphism(o, h0o).has_value());
    // shift convention: H^n of g[k] is H^{n+k} of g
    GluedComplex g2 = shift_glued(g, 2);
    CHECK(perverse_cohomology(g2, -2).is_zero() == o.is_zero());
    CHECK(!perverse_cohomology(g2, -2).is_zero());
    CHECK(perverse_cohomology(g2, 0).is_zero());
}

TEST_CASE("the four-term localization sequence of j_star (paper form)") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    BranchSections secs = trivial_sections(c, q);
    HeartMorphism can = jshriek_to_jstar(c, secs, q);
    validate_morphism(can);
    // kernel = i_* of the local invariants (nonzero for trivial monodromy)
    KernelResult k = kernel_heart(can);
    CHECK(!k.object.is_zero());
    long h1count = 0;
    for (const auto& [n, pp] : k.object.points) h1count += h1(pp.complex).rep.rank();
    CHECK(h1count == 2);  // one line per puncture (x1 and infinity)
    validate_morphism(k.mono);
    CHECK(morphism_is_zero(compose(can, k.mono)));
    // for monodromy without invariants the kernel vanishes
    BranchSections rot;
    rot.emplace("eta", Representation(c->find_branch("eta")->group, Carrier::free_of(2, q),
                                      {mat(2, 2, {0, -1, 1, 0})}, q));
    HeartMorphism can2 = jshriek_to_jstar(c, rot, q);
    CHECK(kernel_heart(can2).object.is_zero());
    // image is the intermediate extension in both cases
    CHECK(find_isomorphism(image_heart(can), intermediate_extension(c, secs, q)).has_value());
    CHECK(find_isomorphism(image_heart(can2), intermediate_extension(c, rot, q)).has_value());
}

TEST_CASE("localization sequence is exact on random objects") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    Rng rng(91);
    for (int trial = 0; trial < 3; ++trial) {
        HeartObject o = random_object(rng, c, q);
        LocalizationSequence seq = localization_sequence(o);
        CHECK(seq.exact);
    }
}

TEST_CASE("cross maps from skyscrapers into extensions by zero") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    Rng rng(123);
    for (int trial = 0; trial < 4; ++trial) {
        BranchSections secs = random_sections(rng, *c, q);
        HeartObject js = j_shriek(c, secs, q);
        Representation v = Representation::trivial_rep(GroupPresentation::trivial(), int(rng.uniform(1, 2)), q);
        HeartObject sky = i_star(c, "x1", v, q);
        HeartHom hom = hom_module(sky, js);
        // classification: Hom(i_* V, j_! W) = Hom(V, H^0 of the target at x)
        TwoTermComplex t = js.target_at("x1");
        HomSpace ref = hom_space(v, h0(t).rep);
        CHECK(hom.module.same_structure(ref.module));
        // and skyscrapers admit no maps out of j_! in the other direction
        // beyond the branch-zero ones
        HeartHom back = hom_module(js, sky);
        // Hom(j_! W, i_* V) = Hom(H^1-free part...) -- only check the zero map exists
        CHECK(morphism_is_zero(zero_morphism(js, sky)));
    }
}

TEST_CASE("adjunction: Hom(j_! A, M) = Hom(A, j^* M)") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    Rng rng(321);
    for (int trial = 0; trial < 4; ++trial) {
        BranchSections a = random_sections(rng, *c, q);
        HeartObject m = random_object(rng, c, q);
        HeartHom lhs = hom_module(j_shriek(c, a, q), m);
        // product of branch hom spaces
        int rank = 0;
        std::vector<unsigned> tors;
        for (const auto& [n, ar] : a) {
            HomSpace hs = hom_space(ar, m.branches.at(n));
            rank += hs.module.free_rank;
            tors.insert(tors.end(), hs.module.torsion_exponents.begin(), hs.module.torsion_exponents.end());
        }
        CanonicalModule rhs = make_module(rank, tors, q);
        CHECK(lhs.module.same_structure(rhs));
    }
}

TEST_CASE("kernel and cokernel universal properties on a seeded morphism") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    Rng rng(777);
    HeartObject a = random_object(rng, c, q);
    HeartObject b = random_object(rng, c, q);
    auto phi = random_morphism(rng, a, b);
    REQUIRE(phi.has_value());
    validate_morphism(*phi);
    KernelResult k = kernel_heart(*phi);
    validate_morphism(k.mono);
    CHECK(morphism_is_zero(compose(*phi, k.mono)));
    CokernelResult ck = cokernel_heart(*phi);
    validate_morphism(ck.epi);
    CHECK(morphism_is_zero(compose(ck.epi, *phi)));
    // test object: a skyscraper
    Representation v = Representation::trivial_rep(GroupPresentation::trivial(), 1, q);
    HeartObject t = i_star(c, "x1", v, q);
    HeartHom hom_tk = hom_module(t, k.object);
    HeartHom hom_ta = hom_module(t, a);
    HeartHom hom_tb = hom_module(t, b);
    // the induced map hom(T, a) -> hom(T, b) as a matrix over the carriers
    Carrier ca = Carrier::from_module(hom_ta.module, q);
    Carrier cb = Carrier::from_module(hom_tb.module, q);
    Mat ind(cb.rank, ca.rank);
    for (size_t i = 0; i < hom_ta.basis.size(); ++i) {
        Mat e = hom_tb.express(compose(*phi, hom_ta.basis[i]));
        for (int r = 0; r < e.rows(); ++r) ind.at(r, int(i)) = e.at(r, 0);
    }
    CanonicalModule kerind = kernel(ind, q);
    CHECK(kerind.free_rank == hom_tk.module.free_rank);
    // the mono induces an injection hom(T, K) -> hom(T, a) landing in the kernel
    for (const auto& bm : hom_tk.basis) {
        Mat e = hom_ta.express(compose(k.mono, bm));
        CHECK(mul(ind, e, q).is_zero());
    }
}

TEST_CASE("intermediate extension and carext conditions") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    SUBCASE("trivial monodromy keeps full invariants at each puncture") {
        BranchSections secs = trivial_sections(c, q);
        HeartObject ie = intermediate_extension(c, secs, q);
        CHECK(validate_object(ie, true).valid);
        CHECK(ie.points.at("x1").complex.c0.rank == 1);
        CHECK(ie.points.at("x1").complex.c1.rank == 0);
        CHECK(carext_check(ie).ok);
    }
    SUBCASE("unipotent monodromy keeps the fixed line") {
        BranchSections secs;
        secs.emplace("eta", Representation(c->find_branch("eta")->group, Carrier::free_of(2, q),
                                           {mat(2, 2, {1, 1, 0, 1})}, q));
        HeartObject ie = intermediate_extension(c, secs, q);
        CHECK(ie.points.at("x1").complex.c0.rank == 1);
        CHECK(carext_check(ie).ok);
    }
    SUBCASE("rotation monodromy has no point part and End of rank 1") {
        BranchSections secs;
        secs.emplace("eta", Representation(c->find_branch("eta")->group, Carrier::free_of(2, q),
                                           {mat(2, 2, {0, -1, 1, 0})}, q));
        HeartObject ie = intermediate_extension(c, secs, q);
        CHECK(ie.points.at("x1").complex.c0.rank == 0);
        CHECK(is_simple(ie));
    }
}

TEST_CASE("omega0_jstar at geometric and finite points") {
    CoeffMode q = CoeffMode::rationals();
    SUBCASE("algebraically closed residues: omega0_jstar = j_star") {
        CurvePtr c = P1(1);
        BranchSections secs = trivial_sections(c, q);
        HeartObject a = omega0_jstar(c, secs, q);
        HeartObject b = j_star(c, secs, q);
        CHECK(a.points.at("x1").complex.c0.rank == b.points.at("x1").complex.c0.rank);
        CHECK(a.points.at("x1").complex.c1.rank == b.points.at("x1").complex.c1.rank);
    }
    SUBCASE("sqrt5 with weight-0 data: omega0_jstar = intermediate extension") {
        CurvePtr c = std::make_shared<CurvePresentation>(sqrt5_preset());
        Mat t = Mat::identity(1);
        Mat f = mat(1, 1, {1});
        BranchSections secs;
        secs.emplace("eta", Representation(c->find_branch("eta")->group, Carrier::free_of(1, q), {t, f}, q));
        HeartObject om = omega0_jstar(c, secs, q);
        HeartObject ie = intermediate_extension(c, secs, q);
        CHECK(validate_object(om, false).valid);
        CHECK(om.points.at("x").complex.c1.rank == 0);  // +2 tag kills degree 1
        CHECK(find_isomorphism(om, ie).has_value());
        // with acyclic boundary all three coincide
        Mat rt = mat(1, 1, {-1});
        // F t F^{-1} = t^4 = t needs F-compatible choice; t = -1 has t^4 = 1 != t.
        // use t of order 3 in GL_2 instead: acyclic since 1 is not an eigenvalue
        Mat t3 = mat(2, 2, {0, -1, 1, -1});
        Mat f3 = *try_inverse(t3, q);  // F t F^{-1} = t^4 = t holds iff F commutes with t
        BranchSections s2;
        s2.emplace("eta", Representation(c->find_branch("eta")->group, Carrier::free_of(2, q), {t3, f3}, q));
        HeartObject om2 = omega0_jstar(c, s2, q);
        HeartObject js2 = j_shriek(c, s2, q);
        CHECK(om2.points.at("x").complex.c0.rank == 0);
        CHECK(find_isomorphism(om2, js2).has_value());
        (void)rt;
    }
}

TEST_CASE("composition factors and length") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    SUBCASE("skyscrapers are simple") {
        Representation v = Representation::trivial_rep(GroupPresentation::trivial(), 1, q);
        CHECK(is_simple(i_star(c, "x1", v, q)));
    }
    SUBCASE("j_star of the trivial rank-1 datum has length 3") {
        BranchSections secs = trivial_sections(c, q);
        auto f = composition_factors(j_star(c, secs, q));
        CHECK(f.size() == 3);  // j_!* plus one skyscraper per point
    }
    SUBCASE("length is additive along kernel and image") {
        Rng rng(4242);
        for (int trial = 0; trial < 2; ++trial) {
            HeartObject a = random_object(rng, c, q, 2);
            HeartObject b = random_object(rng, c, q, 2);
            auto phi = random_morphism(rng, a, b);
            if (!phi) continue;
            long left = heart_length(kernel_heart(*phi).object);
            long right = heart_length(image_heart(*phi));
            CHECK(left + right == heart_length(a));
        }
    }
}

TEST_CASE("chain-ring heart objects") {
    CoeffMode z9 = CoeffMode::chain(3, 2);
    CurvePtr c = P1(1);
    BranchSections secs;
    secs.emplace("eta", Representation(c->find_branch("eta")->group, Carrier::free_of(1, z9),
                                       {mat(1, 1, {2})}, z9));
    HeartObject js = j_shriek(c, secs, z9);
    HeartObject jst = j_star(c, secs, z9);
    CHECK(validate_object(js, false).valid);
    CHECK(validate_object(jst, false).valid);
    // t - 1 = multiplication by 1 is invertible: boundary acyclic, so the
    // canonical map is an isomorphism
    HeartMorphism can = jshriek_to_jstar(c, secs, z9);
    CHECK(kernel_heart(can).object.is_zero());
    CHECK(cokernel_heart(can).object.is_zero());
    // a non-invertible case: t = 4, t - 1 = 3 has kernel and cokernel Z/3
    BranchSections s2;
    s2.emplace("eta", Representation(c->find_branch("eta")->group, Carrier::free_of(1, z9),
                                     {mat(1, 1, {4})}, z9));
    HeartMorphism can2 = jshriek_to_jstar(c, s2, z9);
    KernelResult k = kernel_heart(can2);
    CHECK(!k.object.is_zero());
    validate_morphism(k.mono);
    CokernelResult ck = cokernel_heart(can2);
    CHECK(!ck.object.is_zero());
    CHECK(find_isomorphism(image_heart(can2), intermediate_extension(c, s2, z9)).has_value());
}

TEST_CASE("direct sums and zero objects") {
    CoeffMode q = CoeffMode::rationals();
    CurvePtr c = P1(1);
    HeartObject z = zero_object(c, q);
    CHECK(z.is_zero());
    CHECK(validate_object(z, true).valid);
    BranchSections secs = trivial_sections(c, q);
    HeartObject o = j_star(c, secs, q);
    HeartObject sum = o.direct_sum(o);
    CHECK(validate_object(sum, false).valid);
    CHECK(sum.branches.at("eta").rank() == 2);
    CHECK(heart_length(sum) == 2 * heart_length(o));
}
