#include "perv/complexes.hpp"

#include <cassert>

namespace perv {

RepComplex RepComplex::single(const Representation& r, int degree) {
    RepComplex c(r.group(), r.mode());
    c.push_level(degree, r.carrier(), r.actions());
    c.trim();
    return c;
}

RepComplex RepComplex::zero_complex(GroupPtr group, const CoeffMode& mode) {
    return RepComplex(std::move(group), mode);
}

Carrier RepComplex::carrier_at(int n) const {
    if (!in_range(n)) return Carrier{};
    return levels_[size_t(idx(n))];
}

Mat RepComplex::diff_at(int n) const {
    if (!in_range(n) || !in_range(n + 1)) return Mat(carrier_at(n + 1).rank, carrier_at(n).rank);
    return diffs_[size_t(idx(n))];
}

Mat RepComplex::action_at(int n, int g) const {
    if (!in_range(n)) return Mat(0, 0);
    return actions_[size_t(idx(n))][size_t(g)];
}

Representation RepComplex::level_rep(int n) const {
    if (!in_range(n)) return Representation::trivial_rep(group_, 0, mode_);
    return Representation(group_, carrier_at(n), actions_[size_t(idx(n))], mode_);
}

void RepComplex::push_level(int degree, const Carrier& c, std::vector<Mat> actions) {
    if (hi_ < lo_) {
        lo_ = degree;
        hi_ = degree - 1;
    }
    if (degree != hi_ + 1) fail("ShapeError", "levels must be added contiguously");
    if (int(actions.size()) != group_->num_generators())
        fail("ShapeError", "one action per generator per level expected");
    levels_.push_back(c);
    actions_.push_back(std::move(actions));
    if (int(levels_.size()) >= 2) diffs_.push_back(Mat(c.rank, levels_[levels_.size() - 2].rank));
    hi_ = degree;
}

void RepComplex::set_diff(int degree, const Mat& d) {
    if (!in_range(degree) || !in_range(degree + 1)) fail("ShapeError", "differential out of range");
    diffs_[size_t(idx(degree))] = carrier_map_reduce(d, carrier_at(degree + 1), mode_);
}

void RepComplex::validate() const {
    for (int n = lo_; n <= hi_; ++n) {
        const Carrier& c = carrier_at(n);
        for (int g = 0; g < group_->num_generators(); ++g) {
            if (!carrier_map_valid(action_at(n, g), c, c, mode_))
                fail("ShapeError", "complex level action is invalid");
        }
        if (n < hi_) {
            if (!carrier_map_valid(diff_at(n), c, carrier_at(n + 1), mode_))
                fail("ShapeError", "complex differential is invalid");
            for (int g = 0; g < group_->num_generators(); ++g) {
                Mat lhs = mul(action_at(n + 1, g), diff_at(n), mode_);
                Mat rhs = mul(diff_at(n), action_at(n, g), mode_);
                if (!carrier_map_equal(lhs, rhs, carrier_at(n + 1), mode_))
                    fail("ShapeError", "complex differential is not equivariant");
            }
        }
        if (n + 2 <= hi_) {
            Mat dd = mul(diff_at(n + 1), diff_at(n), mode_);
            if (!carrier_map_equal(dd, Mat(carrier_at(n + 2).rank, c.rank), carrier_at(n + 2), mode_))
                fail("ShapeError", "differential does not square to zero");
        }
    }
}

void RepComplex::trim() {
    while (hi_ >= lo_ && levels_.back().rank == 0) {
        levels_.pop_back();
        actions_.pop_back();
        if (!diffs_.empty()) diffs_.pop_back();
        --hi_;
    }
    while (hi_ >= lo_ && levels_.front().rank == 0) {
        levels_.erase(levels_.begin());
        actions_.erase(actions_.begin());
        if (!diffs_.empty()) diffs_.erase(diffs_.begin());
        ++lo_;
    }
    if (hi_ < lo_) {
        lo_ = 0;
        hi_ = -1;
        levels_.clear();
        diffs_.clear();
        actions_.clear();
    }
}

RepComplex RepComplex::shift(int s) const {
    RepComplex out(group_, mode_);
    if (is_zero_shape()) return out;
    for (int n = lo_ - s; n <= hi_ - s; ++n) out.push_level(n, carrier_at(n + s), actions_[size_t(idx(n + s))]);
    for (int n = lo_ - s; n < hi_ - s; ++n) {
        Mat d = diff_at(n + s);
        if (s % 2 != 0) d = neg(d, mode_);
        out.set_diff(n, d);
    }
    return out;
}

RepComplex RepComplex::direct_sum(const RepComplex& o) const {
    RepComplex out(group_, mode_);
    if (is_zero_shape() && o.is_zero_shape()) return out;
    int l = std::min(is_zero_shape() ? o.lo() : lo_, o.is_zero_shape() ? lo_ : o.lo());
    int h = std::max(is_zero_shape() ? o.hi() : hi_, o.is_zero_shape() ? hi_ : o.hi());
    for (int n = l; n <= h; ++n) {
        Carrier c = carrier_at(n).dsum(o.carrier_at(n));
        std::vector<Mat> acts;
        for (int g = 0; g < group_->num_generators(); ++g)
            acts.push_back(dsum(
                in_range(n) ? action_at(n, g) : Mat(carrier_at(n).rank, carrier_at(n).rank),
                o.in_range(n) ? o.action_at(n, g) : Mat(o.carrier_at(n).rank, o.carrier_at(n).rank)));
        out.push_level(n, c, std::move(acts));
    }
    for (int n = l; n < h; ++n) out.set_diff(n, dsum(diff_at(n), o.diff_at(n)));
    out.trim();
    return out;
}

Representation RepComplex::cohomology(int n) const {
    // {x : d x in rel(n+1)} modulo (im d^{n-1} + rel(n))
    const Carrier& c = carrier_at(n);
    if (c.rank == 0) return Representation::trivial_rep(group_, 0, mode_);
    Mat reln = c.relation_columns(mode_);
    Mat relup = carrier_at(n + 1).relation_columns(mode_);
    Mat sys = hstack(diff_at(n), relup);
    CanonicalModule k = kernel(sys, mode_);
    Mat gens(c.rank, 0);
    if (k.embedding_basis && k.embedding_basis->cols() > 0)
        gens = k.embedding_basis->rows_slice(0, c.rank);
    gens = hstack(gens, reln);
    Mat rels = hstack(diff_at(n - 1), reln);
    Subquotient sq = subquotient(c.rank, gens, rels, mode_);
    Carrier newc = Carrier::from_module(sq.structure, mode_);
    std::vector<Mat> acts;
    for (int g = 0; g < group_->num_generators(); ++g)
        acts.push_back(sq.express(mul(action_at(n, g), sq.gen_lifts, mode_)));
    return Representation(group_, newc, std::move(acts), mode_);
}

bool RepComplex::is_acyclic() const { return nonzero_cohomology_degrees().empty(); }

std::vector<int> RepComplex::nonzero_cohomology_degrees() const {
    std::vector<int> out;
    for (int n = lo_; n <= hi_; ++n)
        if (cohomology(n).rank() > 0) out.push_back(n);
    return out;
}

Mat ComplexMap::at(int n) const {
    auto it = comps.find(n);
    if (it != comps.end()) return it->second;
    return Mat(tgt->carrier_at(n).rank, src->carrier_at(n).rank);
}

void ComplexMap::validate() const {
    int l = std::min(src->lo(), tgt->lo());
    int h = std::max(src->hi(), tgt->hi());
    for (int n = l; n <= h; ++n) {
        Mat f = at(n);
        if (!carrier_map_valid(f, src->carrier_at(n), tgt->carrier_at(n), src->mode()))
            fail("ShapeError", "chain map component is invalid");
        Mat lhs = mul(tgt->diff_at(n), f, src->mode());
        Mat rhs = mul(at(n + 1), src->diff_at(n), src->mode());
        if (!carrier_map_equal(lhs, rhs, tgt->carrier_at(n + 1), src->mode()))
            fail("ShapeError", "not a chain map at degree " + std::to_string(n));
        for (int g = 0; g < src->group()->num_generators(); ++g) {
            Mat le = mul(tgt->action_at(n, g), f, src->mode());
            Mat re = mul(f, src->action_at(n, g), src->mode());
            if (!carrier_map_equal(le, re, tgt->carrier_at(n), src->mode()))
                fail("ShapeError", "chain map is not equivariant at degree " + std::to_string(n));
        }
    }
}

TruncationGE truncate_ge(const RepComplex& x, int m) {
    TruncationGE out;
    out.complex = RepComplex(x.group(), x.mode());
    if (x.is_zero_shape() || x.hi() < m) return out;
    if (x.lo() >= m) {
        out.complex = x;
        for (int n = x.lo(); n <= x.hi(); ++n) out.proj[n] = Mat::identity(x.carrier_at(n).rank);
        out.sect[m] = Mat::identity(x.carrier_at(m).rank);
        return out;
    }
    const CoeffMode& mode = x.mode();
    // degree m level: coker(d^{m-1})
    const Carrier& cm = x.carrier_at(m);
    Mat rels = hstack(x.diff_at(m - 1), cm.relation_columns(mode));
    Subquotient sq = subquotient(cm.rank, Mat::identity(cm.rank), rels, mode);
    Carrier nc = Carrier::from_module(sq.structure, mode);
    std::vector<Mat> acts;
    for (int g = 0; g < x.group()->num_generators(); ++g)
        acts.push_back(sq.express(mul(x.action_at(m, g), sq.gen_lifts, mode)));
    out.complex.push_level(m, nc, std::move(acts));
    for (int n = m + 1; n <= x.hi(); ++n) {
        std::vector<Mat> a;
        for (int g = 0; g < x.group()->num_generators(); ++g) a.push_back(x.action_at(n, g));
        out.complex.push_level(n, x.carrier_at(n), std::move(a));
    }
    // differential out of the cokernel level
    if (m < x.hi()) out.complex.set_diff(m, mul(x.diff_at(m), sq.gen_lifts, mode));
    for (int n = m + 1; n < x.hi(); ++n) out.complex.set_diff(n, x.diff_at(n));
    out.proj[m] = sq.express(Mat::identity(cm.rank));
    out.sect[m] = sq.gen_lifts;
    for (int n = m + 1; n <= x.hi(); ++n) out.proj[n] = Mat::identity(x.carrier_at(n).rank);
    out.complex.trim();
    return out;
}

TruncationLE truncate_le(const RepComplex& x, int m) {
    TruncationLE out;
    out.complex = RepComplex(x.group(), x.mode());
    if (x.is_zero_shape() || x.lo() > m) return out;
    if (x.hi() <= m) {
        out.complex = x;
        for (int n = x.lo(); n <= x.hi(); ++n) out.incl[n] = Mat::identity(x.carrier_at(n).rank);
        return out;
    }
    const CoeffMode& mode = x.mode();
    for (int n = x.lo(); n < m; ++n) {
        std::vector<Mat> a;
        for (int g = 0; g < x.group()->num_generators(); ++g) a.push_back(x.action_at(n, g));
        out.complex.push_level(n, x.carrier_at(n), std::move(a));
        out.incl[n] = Mat::identity(x.carrier_at(n).rank);
    }
    // degree m level: {x : d x in rel(m+1)} as a subquotient of the ambient
    const Carrier& cm = x.carrier_at(m);
    Mat relm = cm.relation_columns(mode);
    Mat relup = x.carrier_at(m + 1).relation_columns(mode);
    CanonicalModule k = kernel(hstack(x.diff_at(m), relup), mode);
    Mat gens(cm.rank, 0);
    if (k.embedding_basis && k.embedding_basis->cols() > 0)
        gens = k.embedding_basis->rows_slice(0, cm.rank);
    gens = hstack(gens, relm);
    Subquotient sq = subquotient(cm.rank, gens, relm, mode);
    Carrier nc = Carrier::from_module(sq.structure, mode);
    std::vector<Mat> acts;
    for (int g = 0; g < x.group()->num_generators(); ++g)
        acts.push_back(sq.express(mul(x.action_at(m, g), sq.gen_lifts, mode)));
    out.complex.push_level(m, nc, std::move(acts));
    if (x.lo() < m) out.complex.set_diff(m - 1, sq.express(x.diff_at(m - 1)));
    for (int n = x.lo(); n + 1 < m; ++n) out.complex.set_diff(n, x.diff_at(n));
    out.incl[m] = sq.gen_lifts;
    out.complex.trim();
    return out;
}

RepComplex cone_complex(const RepComplex& x, const RepComplex& y, const std::map<int, Mat>& phi) {
    ComplexMap f{&x, &y, phi};
    RepComplex out(x.group(), x.mode());
    if (x.is_zero_shape() && y.is_zero_shape()) return out;
    int l = 1 << 28, h = -(1 << 28);
    if (!x.is_zero_shape()) {
        l = std::min(l, x.lo() - 1);
        h = std::max(h, x.hi() - 1);
    }
    if (!y.is_zero_shape()) {
        l = std::min(l, y.lo());
        h = std::max(h, y.hi());
    }
    const CoeffMode& mode = x.mode();
    for (int n = l; n <= h; ++n) {
        Carrier c = x.carrier_at(n + 1).dsum(y.carrier_at(n));
        std::vector<Mat> acts;
        for (int g = 0; g < x.group()->num_generators(); ++g) {
            Mat ax = x.carrier_at(n + 1).rank > 0 ? x.action_at(n + 1, g) : Mat(0, 0);
            Mat ay = y.carrier_at(n).rank > 0 ? y.action_at(n, g) : Mat(0, 0);
            acts.push_back(dsum(ax, ay));
        }
        out.push_level(n, c, std::move(acts));
    }
    for (int n = l; n < h; ++n) {
        int rx = x.carrier_at(n + 1).rank, ry = y.carrier_at(n).rank;
        int rx2 = x.carrier_at(n + 2).rank, ry2 = y.carrier_at(n + 1).rank;
        Mat d(rx2 + ry2, rx + ry);
        Mat dx = x.diff_at(n + 1);
        for (int i = 0; i < rx2; ++i)
            for (int j = 0; j < rx; ++j) d.at(i, j) = mode.reduce(mpq_class(-dx.at(i, j)));
        Mat fm = f.at(n + 1);
        for (int i = 0; i < ry2; ++i)
            for (int j = 0; j < rx; ++j) d.at(rx2 + i, j) = fm.at(i, j);
        Mat dy = y.diff_at(n);
        for (int i = 0; i < ry2; ++i)
            for (int j = 0; j < ry; ++j) d.at(rx2 + i, rx + j) = dy.at(i, j);
        out.set_diff(n, d);
    }
    out.trim();
    return out;
}

RepComplex fib_complex(const RepComplex& x, const RepComplex& y, const std::map<int, Mat>& phi) {
    ComplexMap f{&x, &y, phi};
    RepComplex out(x.group(), x.mode());
    if (x.is_zero_shape() && y.is_zero_shape()) return out;
    int l = 1 << 28, h = -(1 << 28);
    if (!x.is_zero_shape()) {
        l = std::min(l, x.lo());
        h = std::max(h, x.hi());
    }
    if (!y.is_zero_shape()) {
        l = std::min(l, y.lo() + 1);
        h = std::max(h, y.hi() + 1);
    }
    const CoeffMode& mode = x.mode();
    for (int n = l; n <= h; ++n) {
        Carrier c = x.carrier_at(n).dsum(y.carrier_at(n - 1));
        std::vector<Mat> acts;
        for (int g = 0; g < x.group()->num_generators(); ++g) {
            Mat ax = x.carrier_at(n).rank > 0 ? x.action_at(n, g) : Mat(0, 0);
            Mat ay = y.carrier_at(n - 1).rank > 0 ? y.action_at(n - 1, g) : Mat(0, 0);
            acts.push_back(dsum(ax, ay));
        }
        out.push_level(n, c, std::move(acts));
    }
    for (int n = l; n < h; ++n) {
        int rx = x.carrier_at(n).rank, ry = y.carrier_at(n - 1).rank;
        int rx2 = x.carrier_at(n + 1).rank, ry2 = y.carrier_at(n).rank;
        Mat d(rx2 + ry2, rx + ry);
        Mat dx = x.diff_at(n);
        for (int i = 0; i < rx2; ++i)
            for (int j = 0; j < rx; ++j) d.at(i, j) = dx.at(i, j);
        Mat fm = f.at(n);
        for (int i = 0; i < ry2; ++i)
            for (int j = 0; j < rx; ++j) d.at(rx2 + i, j) = mode.reduce(mpq_class(-fm.at(i, j)));
        Mat dy = y.diff_at(n - 1);
        for (int i = 0; i < ry2; ++i)
            for (int j = 0; j < ry; ++j) d.at(rx2 + i, rx + j) = mode.reduce(mpq_class(-dy.at(i, j)));
        out.set_diff(n, d);
    }
    out.trim();
    return out;
}

// ---------------------------------------------------------------------------
// Boundary-target totalization

namespace {

struct SlotLevelData {
    Mat t;                      // inertia action on a level of the restricted complex
    std::optional<Mat> frob;    // Frobenius action on that level
    mpz_class qy;               // |k(y)|
};

// evaluate the local generators on one level of a branch complex
SlotLevelData eval_slot_level(const CurvePresentation& curve, const SlotData& slot,
                              const RepComplex& branch, int degree, const CoeffMode& mode) {
    SlotLevelData out;
    Representation lr = branch.level_rep(degree);
    out.t = lr.eval(slot.phi_t);
    const PointData* p = curve.find_point(slot.point);
    if (!p->residue.algebraically_closed) {
        out.frob = lr.eval(slot.phi_frob);
        out.qy = curve.slot_q(slot);
    }
    return out;
}

}  // namespace

TargetComplex boundary_target_complex(const CurvePresentation& curve, const std::string& point,
                                      const std::map<std::string, RepComplex>& branches,
                                      const CoeffMode& mode) {
    const PointData* p = curve.find_point(point);
    if (!p) fail("CurveMismatch", "unknown point '" + point + "'");
    auto over = curve.slots_over(point);
    GroupPtr residual = p->residue.algebraically_closed ? GroupPresentation::trivial()
                                                        : GroupPresentation::zhat();
    TargetComplex out;
    out.complex = RepComplex(residual, mode);
    // degree range
    int lo = 0, hi = -1;
    bool any = false;
    for (const SlotData* s : over) {
        auto it = branches.find(s->branch);
        if (it == branches.end()) fail("MissingBranchData", "no branch complex for '" + s->branch + "'");
        const RepComplex& a = it->second;
        if (a.is_zero_shape()) continue;
        if (!any) {
            lo = a.lo();
            hi = a.hi() + 1;
            any = true;
        } else {
            lo = std::min(lo, a.lo());
            hi = std::max(hi, a.hi() + 1);
        }
    }
    if (!any) return out;

    // carriers and layout
    for (int n = lo; n <= hi; ++n) {
        Carrier level = Carrier::free_of(0, mode);
        std::vector<SlotBlocks> blocks;
        for (const SlotData* s : over) {
            const RepComplex& a = branches.at(s->branch);
            SlotBlocks b;
            b.slot = s->name;
            b.index = s->residue_index;
            b.lvl0_rank = a.carrier_at(n).rank;
            b.lvl1_rank = a.carrier_at(n - 1).rank;
            b.lvl0_offset = level.rank;
            Carrier piece = a.carrier_at(n).repeat(b.index);
            level = level.dsum(piece);
            b.lvl1_offset = level.rank;
            level = level.dsum(a.carrier_at(n - 1).repeat(b.index));
            blocks.push_back(b);
        }
        out.layout[n] = blocks;
        // residual actions
        std::vector<Mat> acts;
        if (residual->num_generators() == 1) {
            Mat f(level.rank, level.rank);
            for (const SlotBlocks& b : blocks) {
                const SlotData* s = nullptr;
                for (const SlotData* cand : over)
                    if (cand->name == b.slot) s = cand;
                const RepComplex& a = branches.at(s->branch);
                // level-0 part: companion of F on A^n
                SlotLevelData d0 = eval_slot_level(curve, *s, a, n, mode);
                SlotLevelData d1 = eval_slot_level(curve, *s, a, n - 1, mode);
                auto put_companion = [&](int offset, int rank, const Mat& corner, int d) {
                    for (int blk = 0; blk + 1 < d; ++blk)
                        for (int i = 0; i < rank; ++i) f.at(offset + (blk + 1) * rank + i, offset + blk * rank + i) = 1;
                    for (int i = 0; i < rank; ++i)
                        for (int j = 0; j < rank; ++j) f.at(offset + i, offset + (d - 1) * rank + j) = corner.at(i, j);
                };
                if (b.lvl0_rank > 0) put_companion(b.lvl0_offset, b.lvl0_rank, *d0.frob, b.index);
                if (b.lvl1_rank > 0) {
                    // level 1 carries F N^{-1}, N the geometric sum of F^{-1} t F
                    Mat finv = *carrier_map_inverse(*d1.frob, a.carrier_at(n - 1), mode);
                    Mat u = mul(finv, mul(d1.t, *d1.frob, mode), mode);
                    Mat nsum = matrix_geometric_sum(u, d1.qy, mode);
                    auto ninv = carrier_map_inverse(nsum, a.carrier_at(n - 1), mode);
                    if (!ninv)
                        fail("ProfileMismatch",
                             "inertia action is not pro-ell on a level of branch '" + s->branch + "'");
                    put_companion(b.lvl1_offset, b.lvl1_rank, mul(*d1.frob, *ninv, mode), b.index);
                }
            }
            acts.push_back(f);
        }
        out.complex.push_level(n, level, std::move(acts));
    }
    // differentials: d_T(a, b) = (d_A a, (-1)^n (t-1) a + d_A b)
    for (int n = lo; n < hi; ++n) {
        const auto& cur = out.layout[n];
        const auto& nxt = out.layout[n + 1];
        Mat d(out.complex.carrier_at(n + 1).rank, out.complex.carrier_at(n).rank);
        for (size_t bi = 0; bi < cur.size(); ++bi) {
            const SlotBlocks& b = cur[bi];
            const SlotBlocks& b2 = nxt[bi];
            const SlotData* s = nullptr;
            for (const SlotData* cand : over)
                if (cand->name == b.slot) s = cand;
            const RepComplex& a = branches.at(s->branch);
            Mat da = a.diff_at(n);        // A^n -> A^{n+1}
            Mat da1 = a.diff_at(n - 1);   // A^{n-1} -> A^n
            SlotLevelData dn = eval_slot_level(curve, *s, a, n, mode);
            Mat tau = sub(dn.t, Mat::identity(b.lvl0_rank), mode);
            if (((n % 2) + 2) % 2 == 1) tau = neg(tau, mode);
            for (int copy = 0; copy < b.index; ++copy) {
                // d_A on the level-0 part
                for (int i = 0; i < b2.lvl0_rank; ++i)
                    for (int j = 0; j < b.lvl0_rank; ++j)
                        d.at(b2.lvl0_offset + copy * b2.lvl0_rank + i, b.lvl0_offset + copy * b.lvl0_rank + j) =
                            da.at(i, j);
                // (t-1) with sign into the level-1 part (A^n summand of T^{n+1})
                for (int i = 0; i < b2.lvl1_rank; ++i)
                    for (int j = 0; j < b.lvl0_rank; ++j)
                        d.at(b2.lvl1_offset + copy * b2.lvl1_rank + i, b.lvl0_offset + copy * b.lvl0_rank + j) =
                            tau.at(i, j);
                // d_A on the level-1 part
                for (int i = 0; i < b2.lvl1_rank; ++i)
                    for (int j = 0; j < b.lvl1_rank; ++j)
                        d.at(b2.lvl1_offset + copy * b2.lvl1_rank + i, b.lvl1_offset + copy * b.lvl1_rank + j) =
                            da1.at(i, j);
            }
        }
        out.complex.set_diff(n, d);
    }
    out.complex.validate();
    return out;
}

std::map<int, Mat> boundary_target_map(const CurvePresentation& curve, const std::string& point,
                                       const TargetComplex& src_target, const TargetComplex& tgt_target,
                                       const std::map<std::string, ComplexMap>& branch_maps) {
    (void)curve;
    (void)point;
    std::map<int, Mat> out;
    for (const auto& [n, src_blocks] : src_target.layout) {
        auto it = tgt_target.layout.find(n);
        int tgt_rank = tgt_target.complex.carrier_at(n).rank;
        int src_rank = src_target.complex.carrier_at(n).rank;
        Mat m(tgt_rank, src_rank);
        if (it != tgt_target.layout.end()) {
            const auto& tgt_blocks = it->second;
            for (size_t bi = 0; bi < src_blocks.size(); ++bi) {
                const SlotBlocks& sb = src_blocks[bi];
                const SlotBlocks& tb = tgt_blocks[bi];
                assert(sb.slot == tb.slot);
                // find the branch of this slot
                std::string branch;
                for (const auto& s : curve.slots)
                    if (s.name == sb.slot) branch = s.branch;
                const ComplexMap& f = branch_maps.at(branch);
                Mat f0 = f.at(n), f1 = f.at(n - 1);
                for (int copy = 0; copy < sb.index; ++copy) {
                    for (int i = 0; i < tb.lvl0_rank; ++i)
                        for (int j = 0; j < sb.lvl0_rank; ++j)
                            m.at(tb.lvl0_offset + copy * tb.lvl0_rank + i, sb.lvl0_offset + copy * sb.lvl0_rank + j) =
                                f0.at(i, j);
                    for (int i = 0; i < tb.lvl1_rank; ++i)
                        for (int j = 0; j < sb.lvl1_rank; ++j)
                            m.at(tb.lvl1_offset + copy * tb.lvl1_rank + i, sb.lvl1_offset + copy * sb.lvl1_rank + j) =
                                f1.at(i, j);
                }
            }
        }
        out[n] = m;
    }
    return out;
}

}  // namespace perv
