#include "illposed/regmat.hpp"

#include <stdexcept>

namespace ip::reg {

Matrix build_L(LKind kind, Index n) {
    switch (kind) {
        case LKind::identity:
            if (n < 1) throw std::invalid_argument("build_L: n too small");
            return Matrix::Identity(n, n);
        case LKind::d1: {
            if (n < 2) throw std::invalid_argument("build_L: d1 needs n >= 2");
            Matrix L = Matrix::Zero(n - 1, n);
            for (Index i = 0; i < n - 1; ++i) {
                L(i, i) = 1.0;
                L(i, i + 1) = -1.0;
            }
            return L;
        }
        case LKind::d1_invertible: {
            if (n < 2) throw std::invalid_argument("build_L: d1_invertible needs n >= 2");
            Matrix L = Matrix::Zero(n, n);
            L(0, 0) = 1.0;
            for (Index i = 1; i < n; ++i) {
                L(i, i - 1) = 1.0;
                L(i, i) = -1.0;
            }
            return L;
        }
        case LKind::d2: {
            if (n < 3) throw std::invalid_argument("build_L: d2 needs n >= 3");
            Matrix L = Matrix::Zero(n - 2, n);
            for (Index i = 0; i < n - 2; ++i) {
                L(i, i) = 1.0;
                L(i, i + 1) = -2.0;
                L(i, i + 2) = 1.0;
            }
            return L;
        }
        case LKind::d2_reflexive: {
            if (n < 3) throw std::invalid_argument("build_L: d2_reflexive needs n >= 3");
            Matrix L = Matrix::Zero(n, n);
            L(0, 0) = -1.0;
            L(0, 1) = 1.0;
            for (Index i = 1; i < n - 1; ++i) {
                L(i, i - 1) = 1.0;
                L(i, i) = -2.0;
                L(i, i + 1) = 1.0;
            }
            L(n - 1, n - 2) = -1.0;
            L(n - 1, n - 1) = 1.0;
            return L;
        }
    }
    throw std::invalid_argument("build_L: unknown kind");
}

ImageGrid laplacian2d_kernel() {
    ImageGrid K(3, 3, 0.0);
    K(0, 1) = 1.0;
    K(1, 0) = 1.0;
    K(1, 1) = -4.0;
    K(1, 2) = 1.0;
    K(2, 1) = 1.0;
    return K;
}

LinearOperator laplacian2d_operator(Index height, Index width, ops::BoundaryCondition bc) {
    if (height < 3 || width < 3)
        throw std::invalid_argument("laplacian2d_operator: dims must be >= 3x3");
    const Index n = height * width;
    // Dense-backed at desk scale so the adjoint is exact for every bc.
    auto M = std::make_shared<Matrix>(ops::conv_matrix(laplacian2d_kernel(), height, width, bc));
    return LinearOperator(
        n, n,
        [M](const Vector& x) { return Vector(*M * x); },
        [M](const Vector& y) { return Vector(M->transpose() * y); });
}

}  // namespace ip::reg
