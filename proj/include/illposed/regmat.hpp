#pragma once

#include "illposed/operators.hpp"
#include "illposed/types.hpp"

namespace ip::reg {

// One regularization term: weight lambda on ||L (x - x_ref)||. An empty
// x_ref means zero reference.
struct RegularizerSpec {
    Matrix L;
    Vector x_ref;  // size L.cols() or empty
    double lambda = 0.0;

    RegularizerSpec() = default;
    RegularizerSpec(Matrix L_, double lambda_) : L(std::move(L_)), lambda(lambda_) {}
    RegularizerSpec(Matrix L_, Vector x_ref_, double lambda_)
        : L(std::move(L_)), x_ref(std::move(x_ref_)), lambda(lambda_) {}

    Vector ref_or_zero() const {
        return x_ref.size() ? x_ref : Vector(Vector::Zero(L.cols()));
    }
};

enum class LKind { identity, d1, d1_invertible, d2, d2_reflexive };

// Difference matrices on a unit grid:
//   d1            (n-1) x n, rows [1,-1]
//   d1_invertible n x n lower bidiagonal, first row [1,0,...], below it
//                 1 on the subdiagonal and -1 on the diagonal
//   d2            (n-2) x n, rows [1,-2,1]
//   d2_reflexive  n x n, first row [-1,1,...], interior [1,-2,1],
//                 last row [...,-1,1]
Matrix build_L(LKind kind, Index n);

// 2D Laplacian as an operator: convolution of the devectorized image with
// [[0,1,0],[1,-4,1],[0,1,0]] under bc, revectorized.
LinearOperator laplacian2d_operator(Index height, Index width, ops::BoundaryCondition bc);

// The Laplacian stencil itself, for matrix-path comparisons.
ImageGrid laplacian2d_kernel();

}  // namespace ip::reg
