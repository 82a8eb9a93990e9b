#pragma once

#include <map>

#include "perv/curve.hpp"

namespace perv {

// Bounded cochain complex of representations of a fixed group.  Levels are
// carriers in block form; differentials and actions are carrier maps.
class RepComplex {
public:
    RepComplex() = default;
    RepComplex(GroupPtr group, CoeffMode mode) : group_(std::move(group)), mode_(std::move(mode)) {}

    static RepComplex single(const Representation& r, int degree);
    static RepComplex zero_complex(GroupPtr group, const CoeffMode& mode);

    const GroupPtr& group() const { return group_; }
    const CoeffMode& mode() const { return mode_; }
    int lo() const { return lo_; }
    int hi() const { return hi_; }  // hi < lo means the zero complex
    bool is_zero_shape() const { return hi_ < lo_; }

    Carrier carrier_at(int n) const;
    Mat diff_at(int n) const;           // level n -> n+1 (zero map outside)
    Mat action_at(int n, int g) const;  // generator g on level n
    Representation level_rep(int n) const;

    // construction: levels must be added contiguously from low to high
    void push_level(int degree, const Carrier& c, std::vector<Mat> actions);
    void set_diff(int degree, const Mat& d);

    void validate() const;
    void trim();  // drop zero levels at both ends

    RepComplex shift(int s) const;  // X[s]^k = X^{k+s}, d scaled by (-1)^s
    RepComplex direct_sum(const RepComplex& o) const;

    // cohomology at degree n with induced action
    Representation cohomology(int n) const;
    bool is_acyclic() const;
    std::vector<int> nonzero_cohomology_degrees() const;

private:
    GroupPtr group_;
    CoeffMode mode_ = CoeffMode::rationals();
    int lo_ = 0, hi_ = -1;
    std::vector<Carrier> levels_;
    std::vector<Mat> diffs_;                 // diffs_[k - lo_]: level k -> k+1
    std::vector<std::vector<Mat>> actions_;  // per level, per generator
    int idx(int n) const { return n - lo_; }
    bool in_range(int n) const { return n >= lo_ && n <= hi_; }
};

// Strict chain map between complexes of the same group/mode.
struct ComplexMap {
    const RepComplex* src = nullptr;
    const RepComplex* tgt = nullptr;
    std::map<int, Mat> comps;  // per degree; missing = zero

    Mat at(int n) const;
    void validate() const;  // chain + equivariance
};

// Quotient truncation t_{>= m}: (coker d^{m-1}) in degree m, untouched above.
// Also returns the projection matrices per degree.
struct TruncationGE {
    RepComplex complex;
    std::map<int, Mat> proj;  // X^k -> (t_{>=m} X)^k
    std::map<int, Mat> sect;  // lifts of the degree-m generators back into X^m
};
TruncationGE truncate_ge(const RepComplex& x, int m);

// Subcomplex truncation t_{<= m}: ker d^m in degree m, untouched below, with
// inclusion matrices per degree.
struct TruncationLE {
    RepComplex complex;
    std::map<int, Mat> incl;  // (t_{<=m} X)^k -> X^k
};
TruncationLE truncate_le(const RepComplex& x, int m);

// cone(phi)^k = X^{k+1} (+) Y^k, d(x, y) = (-dx, phi x + dy)
RepComplex cone_complex(const RepComplex& x, const RepComplex& y, const std::map<int, Mat>& phi);
// fib(phi)^k = X^k (+) Y^{k-1}, d(x, y) = (dx, -phi x - dy)
RepComplex fib_complex(const RepComplex& x, const RepComplex& y, const std::map<int, Mat>& phi);

// ---------------------------------------------------------------------------
// Boundary-target totalization at a closed point.

// Layout of T_x(A) for branch complexes A: per degree k, per slot y over x,
// the induced block Ind_{d(y)}(A^k (+) A^{k-1}) with level-0 part first.
// Offsets describe where each piece sits inside the total carrier.
struct SlotBlocks {
    std::string slot;
    int index = 1;       // d(y)
    int lvl0_offset = 0; // offset of the first copy of the level-0 part
    int lvl0_rank = 0;   // rank of A^k (one copy)
    int lvl1_offset = 0;
    int lvl1_rank = 0;   // rank of A^{k-1} (one copy)
};

struct TargetComplex {
    RepComplex complex;  // over the residual group of x
    std::map<int, std::vector<SlotBlocks>> layout;  // per degree
};

// The totalized boundary target at a point, for branch complexes.
// d_T(a, b) = (d_A a, (-1)^k (t-1) a + d_A b) blockwise per slot, with the
// induction companion structure on residual actions.
TargetComplex boundary_target_complex(const CurvePresentation& curve, const std::string& point,
                                      const std::map<std::string, RepComplex>& branches,
                                      const CoeffMode& mode);

// Functorial action of the target on a family of branch chain maps.
std::map<int, Mat> boundary_target_map(const CurvePresentation& curve, const std::string& point,
                                       const TargetComplex& src_target, const TargetComplex& tgt_target,
                                       const std::map<std::string, ComplexMap>& branch_maps);

}  // namespace perv
