#pragma once

#include "perv/carrier.hpp"

namespace perv {

// Linear systems whose unknowns are tuples of carrier maps.  Divisibility
// floors of valid maps are encoded by an entry-wise substitution
// X[i][j] = l^{floor} Y[i][j]; equations are read modulo the target
// annihilator of each row, realized by scaling over Z/l^N.  Equations have
// the shape  sum_t  L_t X_{b_t} R_t = C  in a stated target carrier.
class CarrierSystem {
public:
    explicit CarrierSystem(CoeffMode mode) : mode_(std::move(mode)) {}

    int add_block(const Carrier& src, const Carrier& dst);
    int block_count() const { return int(blocks_.size()); }

    struct Term {
        int block;
        Mat left;   // eq_rows x dst.rank
        Mat right;  // src.rank x eq_cols
    };
    // Convenience: identity left/right of the proper size.
    Term term(int block, const Mat& left, const Mat& right) const { return Term{block, left, right}; }
    Term left_term(int block, const Mat& left) const;   // right = identity
    Term right_term(int block, const Mat& right) const; // left = identity

    void add_equation(const Carrier& eq_carrier, int eq_cols, const std::vector<Term>& terms,
                      const Mat& rhs);
    void add_zero_equation(const Carrier& eq_carrier, int eq_cols, const std::vector<Term>& terms);

    struct Tuple {
        std::vector<Mat> blocks;
    };

    Tuple zero_tuple() const;
    // Encode a tuple of valid carrier maps as a Y-coordinate column.
    Mat tuple_to_column(const Tuple& t) const;
    Tuple column_to_tuple(const Mat& col) const;
    int total_dim() const { return total_; }

    // Generators of the homogeneous solution space (Y-coordinates columns).
    Mat kernel_columns() const;
    // One solution of the inhomogeneous system, if any.
    std::optional<Tuple> solve_affine() const;
    // Relations expressing that a block entry is the zero map (chain-mode
    // annihilator multiples of the unit maps); identity over Q is empty.
    Mat zero_map_relations() const;

    const CoeffMode& mode() const { return mode_; }

private:
    struct Block {
        Carrier src, dst;
        int offset;
    };
    CoeffMode mode_;
    std::vector<Block> blocks_;
    int total_ = 0;
    std::vector<std::vector<mpq_class>> rows_;  // system rows over Y
    std::vector<mpq_class> rhs_;

    unsigned floor_of(const Block& b, int i, int j) const;
    mpz_class ell_pow(unsigned e) const;
};

// A module of solutions modulo trivial ones, with tuple-valued basis.
struct SolvedHom {
    CanonicalModule module;
    std::vector<CarrierSystem::Tuple> basis;
    Subquotient coords;
    CoeffMode mode;
    // Express a solution tuple in the basis (coordinates of its class).
    Mat express(const CarrierSystem& sys, const CarrierSystem::Tuple& t) const;
};

// Kernel of the system modulo the span of `extra_relations` (tuples) and the
// zero-map relations of all blocks.
SolvedHom solve_modulo(const CarrierSystem& sys,
                       const std::vector<CarrierSystem::Tuple>& extra_relations = {});

}  // namespace perv
