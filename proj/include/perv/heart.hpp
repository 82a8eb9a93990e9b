#pragma once

#include <memory>

#include "perv/complexes.hpp"
#include "perv/system.hpp"
#include "perv/weights.hpp"

namespace perv {

using CurvePtr = std::shared_ptr<const CurvePresentation>;

// Point datum of a heart object: the complex M_x in degrees [0,1] over the
// residual group, and the chain map f_x into the boundary target at x.
struct HeartPointPart {
    TwoTermComplex complex;
    Mat f0, f1;
};

// Objects of the glued abelian category: branch representations, point
// complexes, and boundary maps with injective H^0.
struct HeartObject {
    CurvePtr curve;
    CoeffMode mode = CoeffMode::rationals();
    std::map<std::string, Representation> branches;
    std::map<std::string, HeartPointPart> points;

    const Representation& branch(const std::string& n) const { return branches.at(n); }
    const HeartPointPart& point(const std::string& n) const { return points.at(n); }
    TwoTermComplex target_at(const std::string& x) const;  // boundary target of the branch data
    bool is_zero() const;  // no cohomology anywhere
    HeartObject direct_sum(const HeartObject& o) const;
};

struct ObjectReport {
    bool valid = true;
    std::vector<std::string> failures;
    std::map<std::string, ArtinVerdict> verdicts;  // per component
    void add(const std::string& s) {
        valid = false;
        failures.push_back(s);
    }
};

ObjectReport validate_object(const HeartObject& o, bool strict);

// Morphisms: branch intertwiners, point chain maps, and homotopies h_x
// witnessing the boundary square g_x Phi_x - T(Phi) f_x = d h + h d.
struct HeartPointMap {
    Mat m0, m1;
    Mat h;  // M_x^1 -> T_target^0
};

struct HeartMorphism {
    std::shared_ptr<const HeartObject> src, tgt;
    std::map<std::string, Mat> branch_maps;
    std::map<std::string, HeartPointMap> point_maps;
};

void validate_morphism(const HeartMorphism& m);
HeartMorphism identity_morphism(const HeartObject& o);
HeartMorphism zero_morphism(const HeartObject& src, const HeartObject& tgt);
HeartMorphism compose(const HeartMorphism& second, const HeartMorphism& first);

// ---------------------------------------------------------------------------
// Derived comma model.

struct GluedComplex {
    CurvePtr curve;
    CoeffMode mode = CoeffMode::rationals();
    std::map<std::string, RepComplex> branch;
    std::map<std::string, RepComplex> point;          // over the residual groups
    std::map<std::string, std::map<int, Mat>> u;      // per point, per degree
    TargetComplex target_at(const std::string& x) const;
    void validate() const;
    bool bounded_ok(int cap = 64) const;
};

GluedComplex embed(const HeartObject& o);
HeartObject extract(const GluedComplex& g);  // NotInHeart if not concentrated
GluedComplex shift_glued(const GluedComplex& g, int s);
GluedComplex cone_glued(const HeartMorphism& phi);
GluedComplex direct_sum_glued(const GluedComplex& a, const GluedComplex& b);

// Perverse truncations in the comma model and perverse cohomology.
GluedComplex tau_le_perv(const GluedComplex& g, int n);
GluedComplex tau_ge_perv(const GluedComplex& g, int n);
HeartObject perverse_cohomology(const GluedComplex& g, int n);
// Degrees where the perverse cohomology is nonzero.
std::vector<int> perverse_amplitude(const GluedComplex& g);

// ---------------------------------------------------------------------------
// Six gluing functors (normal forms on the heart).

HeartObject zero_object(CurvePtr curve, const CoeffMode& mode);
HeartObject j_shriek(CurvePtr curve, const BranchSections& sections, const CoeffMode& mode);
HeartObject j_star(CurvePtr curve, const BranchSections& sections, const CoeffMode& mode);
HeartObject i_star(CurvePtr curve, const std::string& x, const Representation& v, const CoeffMode& mode);
BranchSections j_upper_star(const HeartObject& o);
TwoTermComplex i_upper_star(const HeartObject& o, const std::string& x);
RepComplex i_upper_shriek(const HeartObject& o, const std::string& x);  // fib(f_x), degrees [0,2]

// canonical map j_!(j^*o) -> o (identity on branches)
HeartMorphism counit_jshriek(const HeartObject& o);
// canonical map j_! L -> j_* L
HeartMorphism jshriek_to_jstar(CurvePtr curve, const BranchSections& sections, const CoeffMode& mode);
// canonical map j_! L -> omega0_jstar L
HeartMorphism jshriek_to_omega0_jstar(CurvePtr curve, const BranchSections& sections, const CoeffMode& mode);

// ---------------------------------------------------------------------------
// Hom modules.

struct HeartHom {
    CanonicalModule module;
    std::vector<HeartMorphism> basis;
    // Coordinates of a morphism's class in the basis.
    Mat express(const HeartMorphism& m) const;

    // implementation data
    Subquotient coords;
    CoeffMode mode;
    std::vector<std::pair<Carrier, Carrier>> phi_blocks;  // projected unknown blocks
    std::shared_ptr<const HeartObject> src, tgt;
    Mat tuple_column(const HeartMorphism& m) const;
};

HeartHom hom_module(const HeartObject& a, const HeartObject& b);

// ---------------------------------------------------------------------------
// Abelian structure.

struct KernelResult {
    HeartObject object;
    HeartMorphism mono;  // object -> src
};
struct CokernelResult {
    HeartObject object;
    HeartMorphism epi;  // tgt -> object
};

KernelResult kernel_heart(const HeartMorphism& phi);
CokernelResult cokernel_heart(const HeartMorphism& phi);
HeartObject image_heart(const HeartMorphism& phi);

bool morphism_is_zero(const HeartMorphism& phi);
// search for an isomorphism (mono with zero kernel and cokernel)
std::optional<HeartMorphism> find_isomorphism(const HeartObject& a, const HeartObject& b, unsigned seed = 0);

// ---------------------------------------------------------------------------
// Intermediate extension, weight truncation, localization, simples.

HeartObject intermediate_extension(CurvePtr curve, const BranchSections& sections, const CoeffMode& mode);
HeartObject omega0_jstar(CurvePtr curve, const BranchSections& sections, const CoeffMode& mode);

struct LocalizationSequence {
    HeartObject sub_skyscraper;   // i_* H^{-1} i^* o
    HeartObject jshriek_part;     // j_! j^* o
    HeartObject quot_skyscraper;  // i_* H^0 i^* o
    HeartMorphism alpha;          // sub_skyscraper -> jshriek_part
    HeartMorphism beta;           // jshriek_part -> o
    HeartMorphism gamma;          // o -> quot_skyscraper
    bool exact = false;
    std::vector<std::string> notes;
};

LocalizationSequence localization_sequence(const HeartObject& o);

// carext conditions for the middle extension at every point
struct CarextReport {
    bool ok = true;
    std::vector<std::string> failures;
};
CarextReport carext_check(const HeartObject& o);

bool is_simple(const HeartObject& o);
std::vector<HeartObject> composition_factors(const HeartObject& o);
long heart_length(const HeartObject& o);

}  // namespace perv
