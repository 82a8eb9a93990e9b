#pragma once

#include <map>

#include "perv/local.hpp"

namespace perv {

// Residue field of a closed point: separably closed, or finite with q
// elements.
struct ResidueDescriptor {
    bool algebraically_closed = true;
    mpz_class q;  // finite case

    static ResidueDescriptor closed_field() { return ResidueDescriptor{}; }
    static ResidueDescriptor finite_field(const mpz_class& q) {
        ResidueDescriptor r;
        r.algebraically_closed = false;
        r.q = q;
        return r;
    }
    bool operator==(const ResidueDescriptor& o) const {
        return algebraically_closed == o.algebraically_closed && (algebraically_closed || q == o.q);
    }
};

struct BranchData {
    std::string name;
    GroupPtr group;  // pi_1 of the open part of the branch
};

struct PointData {
    std::string name;
    ResidueDescriptor residue;
};

// Boundary slot y of the normalization: a closed point of a branch lying
// over the closed point nu(y), with the words embedding the local tame
// generators into the branch group and the residue index d(y).
struct SlotData {
    std::string name;
    std::string branch;
    std::string point;
    Word phi_t;
    Word phi_frob;        // finite residue only
    int residue_index = 1;  // d(y) = [G_k(y) : G_k(x)] reversed inclusion index
};

struct CurvePresentation {
    std::string name;  // preset tag or "custom"
    std::vector<BranchData> branches;
    std::vector<PointData> points;
    std::vector<SlotData> slots;

    const BranchData* find_branch(const std::string& n) const;
    const PointData* find_point(const std::string& n) const;
    std::vector<const SlotData*> slots_over(const std::string& point) const;
    std::vector<const SlotData*> slots_of_branch(const std::string& branch) const;
    // |k(y)| = q_x^{d(y)}
    mpz_class slot_q(const SlotData& s) const;
};

struct CurveReport {
    bool valid = true;
    std::vector<std::string> failures;
    void add(const std::string& s) {
        valid = false;
        failures.push_back(s);
    }
};

CurveReport validate_curve(const CurvePresentation& c, const CoeffMode& mode);

bool is_prime_power(const mpz_class& q);

// Sections: one representation of the branch group per branch name.
using BranchSections = std::map<std::string, Representation>;

// Local data of a slot evaluated on the section of its branch.
struct SlotEvaluation {
    LocalProfile profile;
    Representation local_rep;
    int index = 1;
    GroupPtr residual_x;                     // residual group at nu(y)
    std::optional<mpz_class> weight_base_x;  // q of nu(y) when finite
};

SlotEvaluation evaluate_slot(const CurvePresentation& c, const SlotData& s, const Representation& section,
                             const CoeffMode& mode);

// Levelwise induction of a two-term complex along the index-d inclusion of
// procyclic residual groups; the base q of the target point is recorded.
TwoTermComplex induce_two_term(const TwoTermComplex& c, int d,
                               std::optional<mpz_class> target_base);

// The boundary target at x: direct sum over nu(y) = x of
// Ind_{d(y)} of the boundary complex of the restricted section.
TwoTermComplex boundary_target(const CurvePresentation& c, const std::string& point,
                               const BranchSections& sections, const CoeffMode& mode);

// The four worked examples.
CurvePresentation p1_preset(int punctures);
CurvePresentation spec_zp_preset(const mpz_class& p);
CurvePresentation node_preset();
CurvePresentation sqrt5_preset();

}  // namespace perv
