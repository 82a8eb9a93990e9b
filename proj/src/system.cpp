#include "perv/system.hpp"

#include <cassert>

namespace perv {

unsigned CarrierSystem::floor_of(const Block& b, int i, int j) const {
    if (mode_.is_rational()) return 0;
    unsigned ed = b.dst.exps[i], es = b.src.exps[j];
    return ed > es ? ed - es : 0;
}

mpz_class CarrierSystem::ell_pow(unsigned e) const {
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), mode_.ell.get_mpz_t(), e);
    return p;
}

int CarrierSystem::add_block(const Carrier& src, const Carrier& dst) {
    Block b{src, dst, total_};
    total_ += src.rank * dst.rank;
    blocks_.push_back(b);
    return int(blocks_.size()) - 1;
}

CarrierSystem::Term CarrierSystem::left_term(int block, const Mat& left) const {
    return Term{block, left, Mat::identity(blocks_[size_t(block)].src.rank)};
}

CarrierSystem::Term CarrierSystem::right_term(int block, const Mat& right) const {
    return Term{block, Mat::identity(blocks_[size_t(block)].dst.rank), right};
}

void CarrierSystem::add_zero_equation(const Carrier& eq_carrier, int eq_cols,
                                      const std::vector<Term>& terms) {
    add_equation(eq_carrier, eq_cols, terms, Mat::zero(eq_carrier.rank, eq_cols));
}

void CarrierSystem::add_equation(const Carrier& eq_carrier, int eq_cols,
                                 const std::vector<Term>& terms, const Mat& rhs) {
    assert(rhs.rows() == eq_carrier.rank && rhs.cols() == eq_cols);
    const unsigned N = mode_.precision;
    for (int r = 0; r < eq_carrier.rank; ++r) {
        mpq_class scale = 1;
        if (mode_.is_chain()) scale = mpq_class(ell_pow(N - eq_carrier.exps[r]));
        for (int c = 0; c < eq_cols; ++c) {
            std::vector<mpq_class> row(size_t(total_), mpq_class(0));
            for (const Term& t : terms) {
                const Block& b = blocks_[size_t(t.block)];
                assert(t.left.rows() == eq_carrier.rank && t.left.cols() == b.dst.rank);
                assert(t.right.rows() == b.src.rank && t.right.cols() == eq_cols);
                for (int i = 0; i < b.dst.rank; ++i) {
                    if (t.left.at(r, i) == 0) continue;
                    for (int j = 0; j < b.src.rank; ++j) {
                        if (t.right.at(j, c) == 0) continue;
                        mpq_class coeff = t.left.at(r, i) * t.right.at(j, c);
                        if (mode_.is_chain()) coeff *= mpq_class(ell_pow(floor_of(b, i, j)));
                        int var = b.offset + j * b.dst.rank + i;
                        row[size_t(var)] = mode_.add(row[size_t(var)], mode_.mul(scale, coeff));
                    }
                }
            }
            rows_.push_back(std::move(row));
            rhs_.push_back(mode_.mul(scale, rhs.at(r, c)));
        }
    }
}

CarrierSystem::Tuple CarrierSystem::zero_tuple() const {
    Tuple t;
    for (const Block& b : blocks_) t.blocks.push_back(Mat::zero(b.dst.rank, b.src.rank));
    return t;
}

Mat CarrierSystem::tuple_to_column(const Tuple& t) const {
    Mat col(total_, 1);
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& b = blocks_[bi];
        const Mat& x = t.blocks[bi];
        assert(x.rows() == b.dst.rank && x.cols() == b.src.rank);
        for (int i = 0; i < b.dst.rank; ++i)
            for (int j = 0; j < b.src.rank; ++j) {
                mpq_class v = mode_.reduce(x.at(i, j));
                if (mode_.is_chain()) {
                    unsigned f = floor_of(b, i, j);
                    if (f > 0) {
                        mpz_class p = ell_pow(f);
                        if (!mpz_divisible_p(v.get_num().get_mpz_t(), p.get_mpz_t()))
                            fail("InvalidCoefficient", "tuple entry violates a divisibility floor");
                        v = mpq_class(mpz_class(v.get_num() / p));
                    }
                }
                col.at(b.offset + j * b.dst.rank + i, 0) = v;
            }
    }
    return col;
}

CarrierSystem::Tuple CarrierSystem::column_to_tuple(const Mat& col) const {
    Tuple t;
    for (const Block& b : blocks_) {
        Mat x(b.dst.rank, b.src.rank);
        for (int i = 0; i < b.dst.rank; ++i)
            for (int j = 0; j < b.src.rank; ++j) {
                mpq_class v = col.at(b.offset + j * b.dst.rank + i, 0);
                if (mode_.is_chain()) v *= mpq_class(ell_pow(floor_of(b, i, j)));
                x.at(i, j) = mode_.reduce(v);
            }
        t.blocks.push_back(carrier_map_reduce(x, b.dst, mode_));
    }
    return t;
}

Mat CarrierSystem::kernel_columns() const {
    // rows created before later blocks are shorter; missing entries are zero
    Mat sys(int(rows_.size()), total_);
    for (size_t i = 0; i < rows_.size(); ++i)
        for (int j = 0; j < int(rows_[i].size()); ++j) sys.at(int(i), j) = rows_[i][size_t(j)];
    CanonicalModule k = kernel(sys, mode_);
    return k.embedding_basis ? *k.embedding_basis : Mat(total_, 0);
}

std::optional<CarrierSystem::Tuple> CarrierSystem::solve_affine() const {
    Mat sys(int(rows_.size()), total_);
    Mat rhs(int(rows_.size()), 1);
    for (size_t i = 0; i < rows_.size(); ++i) {
        for (int j = 0; j < int(rows_[i].size()); ++j) sys.at(int(i), j) = rows_[i][size_t(j)];
        rhs.at(int(i), 0) = rhs_[i];
    }
    auto x = solve(sys, rhs, mode_);
    if (!x) return std::nullopt;
    return column_to_tuple(*x);
}

Mat CarrierSystem::zero_map_relations() const {
    if (mode_.is_rational()) return Mat(total_, 0);
    std::vector<std::pair<int, unsigned>> cols;  // (var index, exponent of annihilator in Y coords)
    for (const Block& b : blocks_)
        for (int i = 0; i < b.dst.rank; ++i)
            for (int j = 0; j < b.src.rank; ++j) {
                unsigned e = b.dst.exps[i] - floor_of(b, i, j);
                if (e < mode_.precision) cols.emplace_back(b.offset + j * b.dst.rank + i, e);
            }
    Mat r(total_, int(cols.size()));
    for (size_t t = 0; t < cols.size(); ++t) r.at(cols[t].first, int(t)) = mpq_class(ell_pow(cols[t].second));
    return r;
}

Mat SolvedHom::express(const CarrierSystem& sys, const CarrierSystem::Tuple& t) const {
    return coords.express(sys.tuple_to_column(t));
}

SolvedHom solve_modulo(const CarrierSystem& sys,
                       const std::vector<CarrierSystem::Tuple>& extra_relations) {
    SolvedHom out;
    out.mode = sys.mode();
    Mat gens = sys.kernel_columns();
    Mat rels = sys.zero_map_relations();
    for (const auto& t : extra_relations) rels = hstack(rels, sys.tuple_to_column(t));
    out.coords = subquotient(sys.total_dim(), gens, rels, sys.mode());
    out.module = out.coords.structure;
    for (int j = 0; j < out.coords.gen_lifts.cols(); ++j)
        out.basis.push_back(sys.column_to_tuple(out.coords.gen_lifts.col(j)));
    return out;
}

}  // namespace perv
