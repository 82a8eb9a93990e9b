#include "perv/rep.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <sstream>

#include "perv/system.hpp"

namespace perv {

std::string word_to_string(const Word& w) {
    std::ostringstream os;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) os << " ";
        os << w[i];
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// GroupPresentation

GroupPtr make_group(GroupPresentation g) {
    g.close();
    return std::make_shared<const GroupPresentation>(std::move(g));
}

GroupPtr GroupPresentation::free_profinite(int m, bool with_product_relation,
                                           std::vector<std::string> names) {
    if (m < 1) fail("ShapeError", "free profinite group needs at least one generator");
    GroupPresentation g;
    g.kind = Kind::FreeProfinite;
    g.product_relation = with_product_relation;
    if (names.empty())
        for (int i = 1; i <= m; ++i) names.push_back("g" + std::to_string(i));
    if (int(names.size()) != m) fail("ShapeError", "generator name count mismatch");
    g.generator_names = std::move(names);
    return make_group(std::move(g));
}

GroupPtr GroupPresentation::zhat(std::string name) {
    GroupPresentation g;
    g.kind = Kind::ZhatFrobenius;
    g.generator_names = {std::move(name)};
    return make_group(std::move(g));
}

GroupPtr GroupPresentation::trivial() {
    GroupPresentation g;
    g.kind = Kind::Trivial;
    return make_group(std::move(g));
}

GroupPtr GroupPresentation::finite_explicit(std::vector<std::vector<int>> perms,
                                            std::vector<std::string> names) {
    GroupPresentation g;
    g.kind = Kind::FiniteExplicit;
    if (perms.empty()) fail("ShapeError", "finite explicit group needs at least one generator");
    size_t n = perms[0].size();
    for (const auto& p : perms) {
        if (p.size() != n) fail("ShapeError", "permutation degree mismatch");
        std::vector<bool> seen(n, false);
        for (int v : p) {
            if (v < 0 || size_t(v) >= n || seen[size_t(v)]) fail("ShapeError", "not a permutation");
            seen[size_t(v)] = true;
        }
    }
    g.perms = std::move(perms);
    if (names.empty())
        for (size_t i = 1; i <= g.perms.size(); ++i) names.push_back("s" + std::to_string(i));
    if (names.size() != g.perms.size()) fail("ShapeError", "generator name count mismatch");
    g.generator_names = std::move(names);
    return make_group(std::move(g));
}

GroupPtr GroupPresentation::local_tame(const mpz_class& q) {
    if (q < 2) fail("ShapeError", "tame local group needs a prime power q >= 2");
    GroupPresentation g;
    g.kind = Kind::LocalTame;
    g.q = q;
    g.generator_names = {"t", "F"};
    return make_group(std::move(g));
}

void GroupPresentation::close() {
    if (kind != Kind::FiniteExplicit) return;
    size_t n = perms[0].size();
    std::vector<int> id(n);
    for (size_t i = 0; i < n; ++i) id[i] = int(i);
    std::map<std::vector<int>, Word> found;
    found[id] = {};
    std::vector<std::vector<int>> queue = {id};
    const size_t cap = 1u << 20;
    while (!queue.empty()) {
        std::vector<int> p = queue.back();
        queue.pop_back();
        Word wp = found[p];
        for (size_t gi = 0; gi < perms.size(); ++gi) {
            // right multiplication: the word grows left-to-right
            std::vector<int> q2(n);
            for (size_t t = 0; t < n; ++t) q2[t] = p[size_t(perms[gi][t])];
            if (found.count(q2)) continue;
            Word w = wp;
            w.push_back(int(gi) + 1);
            found[q2] = w;
            queue.push_back(q2);
            if (found.size() > cap) fail("ShapeError", "finite group closure exceeded the cap");
        }
    }
    for (auto& [p, w] : found) elements_.push_back(Element{p, w});
}

bool GroupPresentation::same_presentation(const GroupPresentation& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case Kind::FreeProfinite:
            return generator_names.size() == o.generator_names.size() && product_relation == o.product_relation;
        case Kind::ZhatFrobenius:
        case Kind::Trivial:
            return true;
        case Kind::FiniteExplicit:
            return perms == o.perms;
        case Kind::LocalTame:
            return q == o.q;
    }
    return false;
}

std::string GroupPresentation::describe() const {
    switch (kind) {
        case Kind::FreeProfinite:
            return "free-profinite(" + std::to_string(generator_names.size()) +
                   (product_relation ? ", product relation" : "") + ")";
        case Kind::ZhatFrobenius: return "zhat";
        case Kind::Trivial: return "trivial";
        case Kind::FiniteExplicit:
            return "finite(" + std::to_string(order()) + " elements)";
        case Kind::LocalTame: return "local-tame(q=" + q.get_str() + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Representation

Representation::Representation(GroupPtr group, Carrier carrier, std::vector<Mat> actions, CoeffMode mode,
                               std::optional<mpz_class> frobenius_weight_base)
    : group_(std::move(group)),
      carrier_(std::move(carrier)),
      actions_(std::move(actions)),
      mode_(std::move(mode)),
      weight_base_(std::move(frobenius_weight_base)) {
    for (auto& a : actions_) a = carrier_map_reduce(a, carrier_, mode_);
    validate();
}

Representation Representation::trivial_rep(GroupPtr group, int rank, const CoeffMode& mode) {
    std::vector<Mat> acts(size_t(group->num_generators()), Mat::identity(rank));
    return Representation(std::move(group), Carrier::free_of(rank, mode), std::move(acts), mode);
}

void Representation::validate() const {
    if (!group_) fail("ShapeError", "representation needs a group");
    if (int(actions_.size()) != group_->num_generators())
        fail("ShapeError", "one action matrix per marked generator expected");
    for (const Mat& a : actions_) {
        if (!carrier_map_valid(a, carrier_, carrier_, mode_))
            fail("InvalidCoefficient", "action matrix is not a valid self-map of the carrier");
        if (!carrier_map_inverse(a, carrier_, mode_))
            fail("InvalidCoefficient", "action matrix is not invertible");
    }
    switch (group_->kind) {
        case GroupPresentation::Kind::FreeProfinite:
        case GroupPresentation::Kind::ZhatFrobenius:
        case GroupPresentation::Kind::Trivial:
            break;  // no defining relations
        case GroupPresentation::Kind::LocalTame: {
            // F t F^{-1} = t^q, checked as F t = t^q F
            const Mat& t = actions_[0];
            const Mat& f = actions_[1];
            Mat lhs = mul(f, t, mode_);
            Mat rhs = mul(pow(t, group_->q, mode_), f, mode_);
            if (!carrier_map_equal(lhs, rhs, carrier_, mode_))
                fail("NotAHomomorphism", "tame relation F t F^{-1} = t^q fails");
            break;
        }
        case GroupPresentation::Kind::FiniteExplicit: {
            // Walk the cached closure and check the multiplication table.
            std::map<std::vector<int>, Mat> val;
            size_t n = group_->perms[0].size();
            for (const auto& el : group_->elements()) {
                Mat m = Mat::identity(carrier_.rank);
                for (int letter : el.word) m = mul(m, actions_[size_t(letter - 1)], mode_);
                val[el.perm] = m;
            }
            for (const auto& el : group_->elements()) {
                for (size_t gi = 0; gi < group_->perms.size(); ++gi) {
                    std::vector<int> q2(n);
                    for (size_t t = 0; t < n; ++t) q2[t] = el.perm[size_t(group_->perms[gi][t])];
                    Mat expect = mul(val[el.perm], actions_[gi], mode_);
                    if (!carrier_map_equal(expect, val[q2], carrier_, mode_))
                        fail("NotAHomomorphism", "matrices do not satisfy the finite group's relations");
                }
            }
            break;
        }
    }
}

Mat Representation::eval_generator(int signed_index) const {
    int idx = signed_index > 0 ? signed_index : -signed_index;
    if (idx < 1 || idx > group_->num_word_generators())
        fail("ShapeError", "generator index out of range: " + std::to_string(signed_index));
    Mat m;
    if (idx <= group_->num_generators()) {
        m = actions_[size_t(idx - 1)];
    } else {
        // derived generator g_inf = (g_1 ... g_m)^{-1}
        Mat prod = Mat::identity(carrier_.rank);
        for (int i = 0; i < group_->num_generators(); ++i) prod = mul(prod, actions_[size_t(i)], mode_);
        auto inv = carrier_map_inverse(prod, carrier_, mode_);
        if (!inv) fail("InvalidCoefficient", "derived generator is not invertible");
        m = *inv;
    }
    if (signed_index < 0) {
        auto inv = carrier_map_inverse(m, carrier_, mode_);
        if (!inv) fail("InvalidCoefficient", "generator is not invertible");
        m = *inv;
    }
    return m;
}

Mat Representation::eval(const Word& w) const {
    // the word a b c denotes the product g_a g_b g_c
    Mat m = Mat::identity(carrier_.rank);
    for (int letter : w) m = mul(m, eval_generator(letter), mode_);
    return m;
}

Representation Representation::direct_sum(const Representation& o) const {
    if (!group_->same_presentation(*o.group_)) fail("GroupMismatch", "direct sum needs matching groups");
    if (mode_ != o.mode_) fail("GroupMismatch", "direct sum needs matching modes");
    std::vector<Mat> acts;
    for (size_t i = 0; i < actions_.size(); ++i) acts.push_back(dsum(actions_[i], o.actions_[i]));
    return Representation(group_, carrier_.dsum(o.carrier_), std::move(acts), mode_, weight_base_);
}

Representation Representation::conjugate(const Mat& p) const {
    auto pinv = carrier_map_inverse(p, carrier_, mode_);
    if (!pinv) fail("InvalidCoefficient", "conjugation needs an invertible matrix");
    std::vector<Mat> acts;
    for (const Mat& a : actions_) acts.push_back(mul(mul(p, a, mode_), *pinv, mode_));
    return Representation(group_, carrier_, std::move(acts), mode_, weight_base_);
}

// ---------------------------------------------------------------------------
// restrict / induce

Representation restrict_rep(const Representation& r, const HomDescriptor& along) {
    if (!along.source) fail("ShapeError", "restriction needs a source group");
    if (int(along.images.size()) != along.source->num_generators())
        fail("NotAHomomorphism", "restriction needs one image word per source generator");
    std::vector<Mat> acts;
    for (const Word& w : along.images) acts.push_back(r.eval(w));
    // Relation checks happen in the constructor.
    try {
        return Representation(along.source, r.carrier(), std::move(acts), r.mode(),
                              r.frobenius_weight_base());
    } catch (const Error& e) {
        if (e.code() == "NotAHomomorphism") throw;
        fail("NotAHomomorphism", std::string("restriction is not well defined: ") + e.what());
    }
}

namespace {

Representation induce_zhat(const Representation& r, int d) {
    if (d < 1) fail("UnsupportedInduction", "index must be >= 1");
    if (r.group()->kind != GroupPresentation::Kind::ZhatFrobenius &&
        r.group()->num_generators() != 1)
        fail("UnsupportedInduction", "procyclic induction needs a one-generator group");
    if (d == 1) return r;
    const Mat& t = r.action(0);
    int n = r.rank();
    Carrier big = r.carrier().repeat(d);
    Mat f(n * d, n * d);
    // block i -> block i+1 for i < d, block d -> block 1 via t
    for (int b = 0; b + 1 < d; ++b)
        for (int i = 0; i < n; ++i) f.at((b + 1) * n + i, b * n + i) = 1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f.at(i, (d - 1) * n + j) = t.at(i, j);
    return Representation(GroupPresentation::zhat(r.group()->generator_names[0]), big, {f}, r.mode());
}

Representation induce_cosets(const Representation& r, const InductionDescriptor& ind) {
    const GroupPtr& g = ind.target;
    if (!g || g->kind != GroupPresentation::Kind::FiniteExplicit)
        fail("UnsupportedInduction", "coset induction needs an explicit finite target group");
    size_t deg = g->perms[0].size();
    auto eval_perm = [&](const Word& w) {
        std::vector<int> p(deg);
        for (size_t i = 0; i < deg; ++i) p[i] = int(i);
        for (int letter : w) {
            std::vector<int> gp;
            if (letter > 0) {
                gp = g->perms[size_t(letter - 1)];
            } else {
                const auto& fwd = g->perms[size_t(-letter - 1)];
                gp.assign(deg, 0);
                for (size_t i = 0; i < deg; ++i) gp[size_t(fwd[i])] = int(i);
            }
            // right multiplication: words read left-to-right
            std::vector<int> np(deg);
            for (size_t i = 0; i < deg; ++i) np[i] = p[size_t(gp[i])];
            p = np;
        }
        return p;
    };
    auto compose = [&](const std::vector<int>& a, const std::vector<int>& b) {
        std::vector<int> c(deg);
        for (size_t i = 0; i < deg; ++i) c[i] = a[size_t(b[i])];
        return c;
    };
    auto invert = [&](const std::vector<int>& a) {
        std::vector<int> c(deg);
        for (size_t i = 0; i < deg; ++i) c[size_t(a[i])] = int(i);
        return c;
    };

    // subgroup closure with matrices: image of the source generators
    if (int(ind.embedded_generators.size()) != r.group()->num_generators())
        fail("UnsupportedInduction", "need one embedding word per source generator");
    std::vector<std::vector<int>> hgens;
    std::vector<Mat> hmats;
    for (size_t i = 0; i < ind.embedded_generators.size(); ++i) {
        hgens.push_back(eval_perm(ind.embedded_generators[i]));
        hmats.push_back(r.action(int(i)));
    }
    std::vector<int> id(deg);
    for (size_t i = 0; i < deg; ++i) id[i] = int(i);
    std::map<std::vector<int>, Mat> sub;
    sub[id] = Mat::identity(r.rank());
    std::vector<std::vector<int>> queue = {id};
    while (!queue.empty()) {
        auto p = queue.back();
        queue.pop_back();
        Mat pm = sub[p];
        for (size_t i = 0; i < hgens.size(); ++i) {
            auto q2 = compose(hgens[i], p);
            Mat m2 = mul(hmats[i], pm, r.mode());
            auto it = sub.find(q2);
            if (it == sub.end()) {
                sub[q2] = m2;
                queue.push_back(q2);
            } else if (!carrier_map_equal(it->second, m2, r.carrier(), r.mode())) {
                fail("NotAHomomorphism", "representation does not factor through the embedded subgroup");
            }
        }
    }
    // coset representatives
    int d = int(ind.coset_representatives.size());
    if (d < 1) fail("UnsupportedInduction", "need at least one coset representative");
    if (size_t(d) * sub.size() != size_t(g->order()))
        fail("UnsupportedInduction", "coset representatives do not partition the group");
    std::vector<std::vector<int>> reps;
    for (const Word& w : ind.coset_representatives) reps.push_back(eval_perm(w));
    // distinctness of cosets: r_j^{-1} r_i must avoid the subgroup for i != j
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (sub.count(compose(invert(reps[j]), reps[i])))
                fail("UnsupportedInduction", "coset representatives are not in distinct cosets");

    int n = r.rank();
    Carrier big = r.carrier().repeat(d);
    std::vector<Mat> acts;
    for (size_t gi = 0; gi < g->perms.size(); ++gi) {
        Mat a(n * d, n * d);
        for (int i = 0; i < d; ++i) {
            auto gri = compose(g->perms[gi], reps[size_t(i)]);
            int target = -1;
            Mat hmat;
            for (int j = 0; j < d; ++j) {
                auto h = compose(invert(reps[size_t(j)]), gri);
                auto it = sub.find(h);
                if (it != sub.end()) {
                    target = j;
                    hmat = it->second;
                    break;
                }
            }
            if (target < 0) fail("UnsupportedInduction", "coset representatives do not cover the group");
            for (int a2 = 0; a2 < n; ++a2)
                for (int b2 = 0; b2 < n; ++b2) a.at(target * n + a2, i * n + b2) = hmat.at(a2, b2);
        }
        acts.push_back(std::move(a));
    }
    return Representation(g, big, std::move(acts), r.mode());
}

}  // namespace

Representation induce(const Representation& r, const InductionDescriptor& along) {
    if (along.kind == InductionDescriptor::Kind::ZhatIndex) return induce_zhat(r, along.index);
    return induce_cosets(r, along);
}

// ---------------------------------------------------------------------------
// hom_space

Mat HomSpace::express(const Mat& intertwiner) const {
    const int t = dst.rank, s = src.rank;
    if (intertwiner.rows() != t || intertwiner.cols() != s)
        fail("ShapeError", "intertwiner has the wrong shape");
    Mat col(t * s, 1);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < s; ++j) {
            mpq_class v = mode.reduce(intertwiner.at(i, j));
            if (mode.is_chain()) {
                unsigned f = dst.exps[i] > src.exps[j] ? dst.exps[i] - src.exps[j] : 0;
                if (f > 0 && v != 0) {
                    mpz_class p;
                    mpz_pow_ui(p.get_mpz_t(), mode.ell.get_mpz_t(), f);
                    if (!mpz_divisible_p(v.get_num().get_mpz_t(), p.get_mpz_t()))
                        fail("InvalidCoefficient", "matrix violates a carrier divisibility floor");
                    v = mpq_class(mpz_class(v.get_num() / p));
                }
            }
            col.at(j * t + i, 0) = v;
        }
    return coords.express(col);
}

HomSpace hom_space(const Representation& a, const Representation& b) {
    if (!a.group()->same_presentation(*b.group())) fail("GroupMismatch", "hom space needs matching groups");
    if (a.mode() != b.mode()) fail("GroupMismatch", "hom space needs matching modes");
    const CoeffMode& mode = a.mode();
    CarrierSystem sys(mode);
    int x = sys.add_block(a.carrier(), b.carrier());
    for (int g = 0; g < a.group()->num_generators(); ++g) {
        // X rho_a(g) - rho_b(g) X = 0
        sys.add_zero_equation(b.carrier(), a.rank(),
                              {sys.right_term(x, a.action(g)),
                               sys.term(x, neg(b.action(g), mode), Mat::identity(a.rank()))});
    }
    SolvedHom sol = solve_modulo(sys);
    HomSpace out;
    out.module = sol.module;
    out.coords = sol.coords;
    out.src = a.carrier();
    out.dst = b.carrier();
    out.mode = mode;
    for (auto& t : sol.basis) out.basis.push_back(RepMorphism{t.blocks[0]});
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic RNG

unsigned long Rng::next() {
    // xorshift64*
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 2685821657736338717ull;
}

long Rng::uniform(long lo, long hi) {
    assert(hi >= lo);
    unsigned long span = (unsigned long)(hi - lo + 1);
    return lo + long(next() % span);
}

// ---------------------------------------------------------------------------
// Polynomial factorization (bounded)

namespace {

mpz_class poly_eval(const ZPoly& p, const mpz_class& x) {
    mpz_class acc = 0;
    for (int i = int(p.size()) - 1; i >= 0; --i) acc = acc * x + p[i];
    return acc;
}

std::vector<mpz_class> divisors_of(const mpz_class& n0) {
    mpz_class n = abs(n0);
    std::vector<mpz_class> ds;
    for (mpz_class d = 1; d * d <= n; ++d) {
        if (n % d != 0) continue;
        ds.push_back(d);
        if (d * d != n) ds.push_back(n / d);
    }
    std::sort(ds.begin(), ds.end());
    return ds;
}

// Cauchy root bound for a monic integer polynomial.
mpz_class root_bound(const ZPoly& p) {
    mpz_class b = 0;
    for (size_t i = 0; i + 1 < p.size(); ++i) b = std::max(b, mpz_class(abs(p[i])));
    return b + 1;
}

void take_factor(ZPoly& p, const ZPoly& f, PolyFactorization& out) {
    int mult = 0;
    while (true) {
        auto q = poly_div_exact(p, f);
        if (!q) break;
        p = *q;
        ++mult;
    }
    if (mult > 0) out.factors.emplace_back(f, mult);
}

}  // namespace

PolyFactorization factor_monic_bounded(const ZPoly& p0) {
    ZPoly p = poly_trim(p0);
    if (p.empty() || p.back() != 1) fail("NotMonic", "factorization needs a monic polynomial");
    PolyFactorization out;
    if (poly_degree(p) == 0) {
        out.remainder = {mpz_class(1)};
        out.complete = true;
        return out;
    }
    // factors of x
    if (p[0] == 0) {
        ZPoly x = {mpz_class(0), mpz_class(1)};
        take_factor(p, x, out);
    }
    // cyclotomic factors
    int deg = poly_degree(p);
    for (unsigned k = 1; int(k) <= 2 * deg * deg && poly_degree(p) > 0; ++k) {
        if (int(euler_phi(k)) > poly_degree(p)) continue;
        take_factor(p, cyclotomic(k), out);
    }
    // integer roots (monic: roots divide the constant term)
    if (poly_degree(p) > 0 && p[0] != 0) {
        for (const mpz_class& d : divisors_of(p[0])) {
            for (int sign = 1; sign >= -1; sign -= 2) {
                mpz_class r = sign * d;
                ZPoly lin = {mpz_class(-r), mpz_class(1)};
                while (poly_degree(p) > 0 && poly_eval(p, r) == 0) take_factor(p, lin, out);
            }
        }
    }
    // quadratic factors x^2 + b x + c, c | p(0)
    if (poly_degree(p) >= 4 || poly_degree(p) == 2) {
        mpz_class bb = root_bound(p);
        mpz_class bmax = 2 * bb;
        if (bmax <= 4096 && p[0] != 0) {
            for (const mpz_class& dv : divisors_of(p[0])) {
                for (int sign = 1; sign >= -1 && poly_degree(p) > 1; sign -= 2) {
                    mpz_class c = sign * dv;
                    if (abs(c) > bb * bb) continue;
                    for (mpz_class b = -bmax; b <= bmax && poly_degree(p) > 1; ++b) {
                        ZPoly quad = {c, b, mpz_class(1)};
                        // irreducible iff the discriminant is not a perfect square
                        mpz_class disc = b * b - 4 * c;
                        if (disc >= 0) {
                            mpz_class s;
                            mpz_sqrt(s.get_mpz_t(), disc.get_mpz_t());
                            if (s * s == disc) continue;  // splits; linear pass already ran
                        }
                        take_factor(p, quad, out);
                    }
                }
            }
        }
    }
    // cubic factors x^3 + a x^2 + b x + c, c | p(0); only for small bounds
    if (poly_degree(p) >= 3 && p[0] != 0) {
        mpz_class bb = root_bound(p);
        if (bb <= 24) {
            mpz_class amax = 3 * bb, bmax = 3 * bb * bb;
            for (const mpz_class& dv : divisors_of(p[0])) {
                for (int sign = 1; sign >= -1 && poly_degree(p) > 2; sign -= 2) {
                    mpz_class c = sign * dv;
                    for (mpz_class a = -amax; a <= amax && poly_degree(p) > 2; ++a)
                        for (mpz_class b = -bmax; b <= bmax && poly_degree(p) > 2; ++b) {
                            ZPoly cub = {c, b, a, mpz_class(1)};
                            // no integer roots remain in p, so a found cubic factor is irreducible
                            if (poly_eval(cub, mpz_class(0)) == 0) continue;
                            auto q = poly_div_exact(p, cub);
                            if (!q) continue;
                            // reject cubics with an integer root (would be reducible)
                            bool has_root = false;
                            for (const mpz_class& rd : divisors_of(c))
                                if (poly_eval(cub, rd) == 0 || poly_eval(cub, mpz_class(-rd)) == 0) {
                                    has_root = true;
                                    break;
                                }
                            if (has_root) continue;
                            take_factor(p, cub, out);
                        }
                }
            }
        }
    }
    out.remainder = p;
    out.complete = poly_degree(p) == 0;
    return out;
}

// ---------------------------------------------------------------------------
// Spinning / MeatAxe

namespace {

// Echelon basis of a subspace (rows), field modes only.
struct SpinBasis {
    CoeffMode mode;
    std::vector<std::vector<mpq_class>> rows;  // reduced echelon rows
    std::vector<int> pivots;

    explicit SpinBasis(const CoeffMode& m) : mode(m) {}

    // Reduce v against the basis; returns true (and absorbs) if independent.
    bool insert(std::vector<mpq_class> v) {
        for (size_t r = 0; r < rows.size(); ++r) {
            const mpq_class& c = v[size_t(pivots[r])];
            if (c != 0) {
                mpq_class f = c;
                for (size_t j = 0; j < v.size(); ++j)
                    v[j] = mode.sub(v[j], mode.mul(f, rows[r][j]));
            }
        }
        int p = -1;
        for (size_t j = 0; j < v.size(); ++j)
            if (v[j] != 0) { p = int(j); break; }
        if (p < 0) return false;
        mpq_class inv = *mode.inverse(v[size_t(p)]);
        for (auto& x : v) x = mode.mul(x, inv);
        // back-reduce existing rows
        for (size_t r = 0; r < rows.size(); ++r) {
            mpq_class c = rows[r][size_t(p)];
            if (c != 0)
                for (size_t j = 0; j < v.size(); ++j)
                    rows[r][j] = mode.sub(rows[r][j], mode.mul(c, v[j]));
        }
        rows.push_back(std::move(v));
        pivots.push_back(p);
        return true;
    }
    int dim() const { return int(rows.size()); }
};

std::vector<mpq_class> mat_apply(const Mat& a, const std::vector<mpq_class>& v, const CoeffMode& mode) {
    std::vector<mpq_class> out(size_t(a.rows()), mpq_class(0));
    for (int i = 0; i < a.rows(); ++i) {
        mpq_class s = 0;
        for (int j = 0; j < a.cols(); ++j)
            if (v[size_t(j)] != 0 && a.at(i, j) != 0) s += a.at(i, j) * v[size_t(j)];
        out[size_t(i)] = mode.reduce(s);
    }
    return out;
}

// Smallest subspace containing v and stable under the matrices.
SpinBasis spin(const std::vector<mpq_class>& v, const std::vector<Mat>& gens, const CoeffMode& mode) {
    SpinBasis basis(mode);
    std::vector<std::vector<mpq_class>> queue;
    if (basis.insert(v)) queue.push_back(v);
    while (!queue.empty()) {
        auto w = queue.back();
        queue.pop_back();
        for (const Mat& g : gens) {
            auto u = mat_apply(g, w, mode);
            if (basis.insert(u)) queue.push_back(u);
        }
    }
    return basis;
}

Mat basis_to_cols(const SpinBasis& b, int n) {
    Mat m(n, b.dim());
    for (int j = 0; j < b.dim(); ++j)
        for (int i = 0; i < n; ++i) m.at(i, j) = b.rows[size_t(j)][size_t(i)];
    return m;
}

void require_field_mode(const Representation& r) {
    if (r.mode().is_rational()) return;
    if (r.mode().precision == 1) return;
    fail("UnsupportedMode", "irreducibility machinery works over Q or Z/l only");
}

// Kernel basis columns of a over a field mode.
Mat field_kernel(const Mat& a, const CoeffMode& mode) {
    CanonicalModule k = kernel(a, mode);
    return k.embedding_basis ? *k.embedding_basis : Mat(a.cols(), 0);
}

// charpoly factorization over the active field mode.
// Over Q: bounded integer factorization.  Over Z/l: exhaustive search of
// monic divisors of degree <= deg/2 (desk-scale fields).
std::vector<std::pair<ZPoly, int>> field_factor(const ZPoly& cp, const CoeffMode& mode, bool& complete) {
    if (mode.is_rational()) {
        auto f = factor_monic_bounded(cp);
        complete = f.complete;
        return f.factors;
    }
    // coefficients mod l
    unsigned long ell = mode.ell.get_ui();
    auto norm = [&](const ZPoly& p) {
        ZPoly q = p;
        for (auto& c : q) {
            mpz_class r;
            mpz_mod(r.get_mpz_t(), c.get_mpz_t(), mode.ell.get_mpz_t());
            c = r;
        }
        return poly_trim(q);
    };
    auto divmod_ok = [&](const ZPoly& num, const ZPoly& den, ZPoly& quo) {
        // monic den over F_l
        ZPoly n = norm(num);
        if (n.size() < den.size()) return false;
        ZPoly q(n.size() - den.size() + 1, mpz_class(0));
        for (int i = int(q.size()) - 1; i >= 0; --i) {
            mpz_class c = n[i + den.size() - 1] % mode.ell;
            q[size_t(i)] = c;
            if (c == 0) continue;
            for (size_t j = 0; j < den.size(); ++j) {
                n[i + j] -= c * den[j];
                mpz_class r;
                mpz_mod(r.get_mpz_t(), n[i + j].get_mpz_t(), mode.ell.get_mpz_t());
                n[i + j] = r;
            }
        }
        for (auto& c : n)
            if (c % mode.ell != 0) return false;
        quo = norm(q);
        return true;
    };
    std::vector<std::pair<ZPoly, int>> out;
    ZPoly p = norm(cp);
    // peel monic irreducible divisors by increasing degree
    for (int d = 1; 2 * d <= poly_degree(p) || d == poly_degree(p); ++d) {
        if (poly_degree(p) <= 0) break;
        // enumerate monic polys of degree d over F_l
        unsigned long count = 1;
        for (int i = 0; i < d; ++i) count *= ell;
        for (unsigned long code = 0; code < count; ++code) {
            ZPoly cand(size_t(d) + 1, mpz_class(0));
            unsigned long cc = code;
            for (int i = 0; i < d; ++i) {
                cand[size_t(i)] = mpz_class((unsigned long)(cc % ell));
                cc /= ell;
            }
            cand[size_t(d)] = 1;
            // irreducible candidates only: no divisor of smaller degree found
            // (they were peeled first, so only check divisibility)
            ZPoly quo;
            int mult = 0;
            while (poly_degree(p) >= d && divmod_ok(p, cand, quo)) {
                // candidate must itself be irreducible: degree 1 always is;
                // otherwise it has no roots / small factors since smaller
                // degrees were exhausted on p's factors... verify directly.
                bool irred = true;
                for (int dd = 1; 2 * dd <= d && irred; ++dd) {
                    unsigned long c2 = 1;
                    for (int i = 0; i < dd; ++i) c2 *= ell;
                    for (unsigned long code2 = 0; code2 < c2 && irred; ++code2) {
                        ZPoly c2p(size_t(dd) + 1, mpz_class(0));
                        unsigned long t2 = code2;
                        for (int i = 0; i < dd; ++i) {
                            c2p[size_t(i)] = mpz_class((unsigned long)(t2 % ell));
                            t2 /= ell;
                        }
                        c2p[size_t(dd)] = 1;
                        ZPoly dummy;
                        if (divmod_ok(cand, c2p, dummy)) irred = false;
                    }
                }
                if (!irred) break;
                p = quo;
                ++mult;
            }
            if (mult > 0) out.emplace_back(cand, mult);
            if (poly_degree(p) <= 0) break;
        }
    }
    if (poly_degree(p) > 0) out.emplace_back(p, 1);  // leftover is irreducible by exhaustion
    complete = true;
    return out;
}

// Evaluate an integer polynomial on a matrix.
Mat poly_at(const ZPoly& p, const Mat& a, const CoeffMode& mode) {
    int n = a.rows();
    Mat acc = Mat::zero(n, n);
    for (int i = int(p.size()) - 1; i >= 0; --i) {
        acc = mul(acc, a, mode);
        for (int d = 0; d < n; ++d) acc.at(d, d) = mode.add(acc.at(d, d), mpq_class(p[size_t(i)]));
    }
    return acc;
}

std::vector<Mat> transposed_actions(const Representation& r) {
    std::vector<Mat> t;
    for (const Mat& a : r.actions()) t.push_back(a.transpose());
    return t;
}

// Deterministic candidate algebra elements.
std::vector<Mat> theta_candidates(const Representation& r, int count) {
    std::vector<Mat> cands;
    const auto& g = r.actions();
    for (const Mat& a : g) cands.push_back(a);
    for (size_t i = 0; i < g.size(); ++i)
        for (size_t j = 0; j < g.size(); ++j) {
            if (int(cands.size()) >= count) return cands;
            cands.push_back(add(g[i], g[j], r.mode()));
            cands.push_back(mul(g[i], g[j], r.mode()));
        }
    Rng rng(20240601);
    while (int(cands.size()) < count) {
        Mat acc = Mat::zero(r.rank(), r.rank());
        for (const Mat& a : g) {
            long c = rng.uniform(-2, 2);
            if (c != 0) acc = add(acc, scalar_mul(mpq_class(c), a, r.mode()), r.mode());
            if (rng.uniform(0, 1)) acc = add(acc, scalar_mul(mpq_class(rng.uniform(1, 2)), mul(a, g[rng.uniform(0, long(g.size()) - 1)], r.mode()), r.mode()), r.mode());
        }
        cands.push_back(acc);
    }
    return cands;
}

struct MeatAxeResult {
    bool decided = false;
    bool irreducible = false;
    Mat witness;  // columns spanning a proper invariant submodule (when reducible)
};

MeatAxeResult meataxe(const Representation& r) {
    MeatAxeResult res;
    const CoeffMode& mode = r.mode();
    int n = r.rank();
    if (n == 0) {
        res.decided = true;
        res.irreducible = false;
        return res;
    }
    if (n == 1) {
        res.decided = true;
        res.irreducible = true;
        return res;
    }
    if (r.group()->num_generators() == 0) {
        // trivial group: any line is invariant
        res.decided = true;
        res.irreducible = false;
        Mat w(n, 1);
        w.at(0, 0) = 1;
        res.witness = w;
        return res;
    }
    auto gens = r.actions();
    auto tgens = transposed_actions(r);
    for (const Mat& theta : theta_candidates(r, 48)) {
        ZPoly cp;
        if (mode.is_rational()) {
            bool integral = true;
            for (int i = 0; i < n && integral; ++i)
                for (int j = 0; j < n && integral; ++j)
                    if (theta.at(i, j).get_den() != 1) integral = false;
            if (!integral) continue;
            cp = charpoly(theta);
        } else {
            cp = charpoly(theta);
        }
        bool complete = false;
        auto factors = field_factor(cp, mode, complete);
        for (const auto& [f, mult] : factors) {
            if (poly_degree(f) < 1) continue;
            bool certified = true;
            if (mode.is_rational() && poly_degree(f) > 3) {
                // factor_monic_bounded only returns certified factors; the
                // remainder never reaches here
                certified = true;
            }
            Mat b = poly_at(f, theta, mode);
            Mat kerb = field_kernel(b, mode);
            if (kerb.cols() == 0) continue;
            // try to exhibit a proper invariant subspace from kernel vectors
            for (int c = 0; c < kerb.cols(); ++c) {
                std::vector<mpq_class> v(static_cast<size_t>(n));
                for (int i = 0; i < n; ++i) v[size_t(i)] = kerb.at(i, c);
                SpinBasis sp = spin(v, gens, mode);
                if (sp.dim() < n) {
                    res.decided = true;
                    res.irreducible = false;
                    res.witness = basis_to_cols(sp, n);
                    return res;
                }
            }
            if (mult == 1 && certified && kerb.cols() == poly_degree(f)) {
                // Norton: one kernel vector spins to everything; check the dual side
                Mat kerbt = field_kernel(b.transpose(), mode);
                assert(kerbt.cols() > 0);
                std::vector<mpq_class> w(static_cast<size_t>(n));
                for (int i = 0; i < n; ++i) w[size_t(i)] = kerbt.at(i, 0);
                SpinBasis spt = spin(w, tgens, mode);
                if (spt.dim() == n) {
                    res.decided = true;
                    res.irreducible = true;
                    return res;
                }
                // proper dual submodule: its perp is a proper invariant submodule
                Mat dual = basis_to_cols(spt, n);  // n x k columns spanning W*
                // perp = kernel of dual^T
                Mat perp = field_kernel(dual.transpose(), mode);
                res.decided = true;
                res.irreducible = false;
                res.witness = perp;
                return res;
            }
        }
    }
    // exhaustive fallback over tiny fields: spin every vector
    if (mode.is_chain()) {
        unsigned long ell = mode.ell.get_ui();
        unsigned long total = 1;
        bool overflow = false;
        for (int i = 0; i < n; ++i) {
            total *= ell;
            if (total > 2000000) { overflow = true; break; }
        }
        if (!overflow) {
            for (unsigned long code = 1; code < total; ++code) {
                std::vector<mpq_class> v(static_cast<size_t>(n));
                unsigned long cc = code;
                for (int i = 0; i < n; ++i) {
                    v[size_t(i)] = mpq_class((unsigned long)(cc % ell));
                    cc /= ell;
                }
                SpinBasis sp = spin(v, gens, mode);
                if (sp.dim() < n) {
                    res.decided = true;
                    res.irreducible = false;
                    res.witness = basis_to_cols(sp, n);
                    return res;
                }
            }
            res.decided = true;
            res.irreducible = true;
            return res;
        }
    } else {
        // Rational fallback for dim <= 3: a proper invariant subspace forces a
        // common rational eigenvector of the generators (dim-1 submodule) or
        // of their transposes (codim-1 submodule).  DFS over simultaneous
        // eigenspaces is complete.
        auto common_eigenline = [&](const std::vector<Mat>& acts) -> std::optional<Mat> {
            // state: basis columns of the current intersection
            Mat full = Mat::identity(n);
            std::vector<Mat> stack = {full};
            std::vector<size_t> depth = {0};
            while (!stack.empty()) {
                Mat s = stack.back();
                stack.pop_back();
                size_t gi = depth.back();
                depth.pop_back();
                if (s.cols() == 0) continue;
                if (gi == acts.size()) return s.col(0);
                auto fs = factor_monic_bounded(charpoly(acts[gi]));
                for (auto& [f, m] : fs.factors) {
                    if (poly_degree(f) != 1) continue;
                    mpq_class lam = mpq_class(-f[0]);
                    Mat shifted = acts[gi];
                    for (int i = 0; i < n; ++i) shifted.at(i, i) -= lam;
                    Mat eig = field_kernel(shifted, mode);
                    // intersect span(s) with span(eig)
                    Mat stacked = hstack(s, neg(eig, mode));
                    Mat kk = field_kernel(stacked, mode);
                    Mat inter(n, kk.cols());
                    for (int c = 0; c < kk.cols(); ++c) {
                        Mat coeff(s.cols(), 1);
                        for (int i = 0; i < s.cols(); ++i) coeff.at(i, 0) = kk.at(i, c);
                        Mat vcol = mul(s, coeff, mode);
                        for (int i = 0; i < n; ++i) inter.at(i, c) = vcol.at(i, 0);
                    }
                    stack.push_back(colspan_basis(inter, mode));
                    depth.push_back(gi + 1);
                }
            }
            return std::nullopt;
        };
        if (n <= 3) {
            if (auto w = common_eigenline(gens)) {
                res.decided = true;
                res.irreducible = false;
                res.witness = *w;
                return res;
            }
            if (auto wt = common_eigenline(tgens)) {
                Mat perp = field_kernel(wt->transpose(), mode);
                res.decided = true;
                res.irreducible = false;
                res.witness = perp;
                return res;
            }
            res.decided = true;
            res.irreducible = true;
            return res;
        }
    }
    return res;
}

}  // namespace

bool irreducibility_test(const Representation& r) {
    require_field_mode(r);
    MeatAxeResult res = meataxe(r);
    if (!res.decided) fail("UnsupportedMode", "irreducibility search was inconclusive at this dimension");
    return res.irreducible;
}

std::optional<Mat> invariant_submodule(const Representation& r) {
    require_field_mode(r);
    MeatAxeResult res = meataxe(r);
    if (!res.decided) fail("UnsupportedMode", "irreducibility search was inconclusive at this dimension");
    if (res.irreducible) return std::nullopt;
    if (r.rank() == 0) return std::nullopt;
    return res.witness;
}

std::vector<Representation> composition_series(const Representation& r) {
    require_field_mode(r);
    std::vector<Representation> out;
    if (r.rank() == 0) return out;
    auto w = invariant_submodule(r);
    if (!w) {
        out.push_back(r);
        return out;
    }
    const CoeffMode& mode = r.mode();
    int n = r.rank();
    int k = w->cols();
    assert(k > 0 && k < n);
    // complete the witness to a basis with standard vectors
    Mat p = *w;
    SpinBasis sb(mode);
    for (int c = 0; c < k; ++c) {
        std::vector<mpq_class> v(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) v[size_t(i)] = w->at(i, c);
        sb.insert(v);
    }
    for (int j = 0; j < n && p.cols() < n; ++j) {
        std::vector<mpq_class> e(size_t(n), mpq_class(0));
        e[size_t(j)] = 1;
        if (sb.insert(e)) {
            Mat col(n, 1);
            col.at(j, 0) = 1;
            p = hstack(p, col);
        }
    }
    auto pinv = try_inverse(p, mode);
    assert(pinv);
    std::vector<Mat> subacts, quoacts;
    for (const Mat& a : r.actions()) {
        Mat conj = mul(*pinv, mul(a, p, mode), mode);
        Mat sa(k, k), qa(n - k, n - k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) sa.at(i, j) = conj.at(i, j);
        for (int i = k; i < n; ++i)
            for (int j = k; j < n; ++j) qa.at(i - k, j - k) = conj.at(i, j);
        subacts.push_back(sa);
        quoacts.push_back(qa);
    }
    Representation sub(r.group(), Carrier::free_of(k, mode), subacts, mode, r.frobenius_weight_base());
    Representation quo(r.group(), Carrier::free_of(n - k, mode), quoacts, mode, r.frobenius_weight_base());
    auto a1 = composition_series(sub);
    auto a2 = composition_series(quo);
    out.insert(out.end(), a1.begin(), a1.end());
    out.insert(out.end(), a2.begin(), a2.end());
    return out;
}

FiniteImageResult finite_image_test(const Representation& r, long order_bound) {
    FiniteImageResult out;
    if (r.rank() == 0 || r.group()->num_generators() == 0) {
        out.finite = true;
        out.order = 1;
        return out;
    }
    std::set<std::string> seen;
    std::vector<Mat> queue;
    Mat id = Mat::identity(r.rank());
    seen.insert(carrier_map_reduce(id, r.carrier(), r.mode()).to_string());
    queue.push_back(id);
    while (!queue.empty()) {
        Mat m = queue.back();
        queue.pop_back();
        for (const Mat& g : r.actions()) {
            Mat nm = carrier_map_reduce(mul(g, m, r.mode()), r.carrier(), r.mode());
            std::string key = nm.to_string();
            if (seen.count(key)) continue;
            if (long(seen.size()) >= order_bound) return out;  // Unknown
            seen.insert(key);
            queue.push_back(nm);
        }
    }
    out.finite = true;
    out.order = long(seen.size());
    return out;
}

std::string to_string(ArtinVerdict v) {
    switch (v) {
        case ArtinVerdict::ArtinCertified: return "ArtinCertified";
        case ArtinVerdict::NotArtin: return "NotArtin";
        case ArtinVerdict::Undetermined: return "Undetermined";
    }
    return "?";
}

}  // namespace perv
