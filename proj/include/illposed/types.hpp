#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace ip {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// 2D grayscale image, row-major storage.
struct ImageGrid {
    Index height = 0;
    Index width = 0;
    std::vector<double> data;  // size height*width, entry (i,j) at i*width+j

    ImageGrid() = default;
    ImageGrid(Index h, Index w, double fill = 0.0)
        : height(h), width(w), data(static_cast<size_t>(h * w), fill) {
        if (h < 0 || w < 0) throw std::invalid_argument("ImageGrid: negative dims");
    }

    double& operator()(Index i, Index j) { return data[static_cast<size_t>(i * width + j)]; }
    double operator()(Index i, Index j) const { return data[static_cast<size_t>(i * width + j)]; }
    Index size() const { return height * width; }
};

// Stacks columns top to bottom: v[j*h + i] = X(i,j). Exact copy, no arithmetic.
inline Vector vectorize(const ImageGrid& X) {
    Vector v(X.size());
    for (Index j = 0; j < X.width; ++j)
        for (Index i = 0; i < X.height; ++i) v[j * X.height + i] = X(i, j);
    return v;
}

inline ImageGrid devectorize(const Vector& v, Index h, Index w) {
    if (v.size() != h * w) throw std::invalid_argument("devectorize: size mismatch");
    ImageGrid X(h, w);
    for (Index j = 0; j < w; ++j)
        for (Index i = 0; i < h; ++i) X(i, j) = v[j * h + i];
    return X;
}

// Forward map with adjoint. Dense matrices wrap into this; matrix-free ops
// (big convolutions, dictionaries, subsampling chains) supply lambdas.
class LinearOperator {
  public:
    LinearOperator() = default;
    LinearOperator(Index m, Index n,
                   std::function<Vector(const Vector&)> fwd,
                   std::function<Vector(const Vector&)> adj)
        : m_(m), n_(n), fwd_(std::move(fwd)), adj_(std::move(adj)) {}

    static LinearOperator from_matrix(Matrix A) {
        auto M = std::make_shared<Matrix>(std::move(A));
        return LinearOperator(
            M->rows(), M->cols(),
            [M](const Vector& x) { return Vector(*M * x); },
            [M](const Vector& y) { return Vector(M->transpose() * y); });
    }

    Index rows() const { return m_; }
    Index cols() const { return n_; }

    Vector apply(const Vector& x) const {
        if (x.size() != n_) throw std::invalid_argument("LinearOperator::apply: size mismatch");
        return fwd_(x);
    }
    Vector apply_transpose(const Vector& y) const {
        if (y.size() != m_) throw std::invalid_argument("LinearOperator::apply_transpose: size mismatch");
        return adj_(y);
    }

    // Materializes the dense matrix column by column. Desk-scale helper.
    Matrix to_dense() const {
        Matrix A(m_, n_);
        Vector e = Vector::Zero(n_);
        for (Index j = 0; j < n_; ++j) {
            e[j] = 1.0;
            A.col(j) = fwd_(e);
            e[j] = 0.0;
        }
        return A;
    }

    bool valid() const { return static_cast<bool>(fwd_) && static_cast<bool>(adj_); }

  private:
    Index m_ = 0, n_ = 0;
    std::function<Vector(const Vector&)> fwd_, adj_;
};

}  // namespace ip
