#pragma once

#include "videogem/common.hpp"

#include <cmath>

namespace videogem {

/// Row-wise softmax, max-shifted.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& expr) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> logits = expr;
  Matrix<Scalar> out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const Scalar peak = logits.row(i).maxCoeff();
    Scalar total(0);
    for (Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp(logits(i, j) - peak);
      total += out(i, j);
    }
    out.row(i) /= total;
  }
  return out;
}

/// Softmax of a vector.
template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  return softmax_rows(logits.transpose()).transpose();
}

/// Divides each row by (its L2 norm + kNormEpsilon).
template <typename Derived>
Matrix<typename Derived::Scalar> normalize_rows(const Eigen::MatrixBase<Derived>& expr) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> x = expr;
  Matrix<Scalar> out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    out.row(i) = x.row(i) / (x.row(i).norm() + Scalar(kNormEpsilon));
  }
  return out;
}

/// Cosine similarity; 0 when either side is a zero vector.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return a.dot(b) / (na * nb);
}

}  // namespace videogem
