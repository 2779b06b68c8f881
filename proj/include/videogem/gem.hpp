#pragma once

// Self-self attention pathway running alongside a frozen ViT.
//
// For a projection W (one of W_q, W_k, W_v) and tokens X, each head works on
// its own d_h-wide slice:
//
//   P0 = rownorm(X W)
//   Pj = rownorm(softmax(P{j-1} P{j-1}^T / tau) P{j-1})      j = 1..J
//   O  = softmax(PJ PJ^T / tau) V,   V = X W_v
//
// The q-q, k-k and v-v branches are averaged, heads concatenated, and the
// block's attention output projection applied.

#include "videogem/backbone.hpp"
#include "videogem/ops.hpp"

#include <cmath>
#include <vector>

namespace videogem {

struct SelfSelfConfig {
  int iterations = 1;
  /// Divisor applied to P P^T before the softmax.
  double temperature = 1.0;
  int heads = 1;
  int head_dim = 1;

  int width() const { return heads * head_dim; }
  void validate() const;

  /// Defaults for a backbone: J = 1, tau = sqrt(d_h).
  static SelfSelfConfig for_backbone(const BackboneDescriptor& d, int iterations = 1);
};

inline void SelfSelfConfig::validate() const {
  if (iterations < 0) throw InvalidInput("self-self: iterations must be >= 0");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw InvalidInput("self-self: temperature must be > 0");
  if (heads < 1 || head_dim < 1) throw InvalidInput("self-self: head layout must be positive");
}

inline SelfSelfConfig SelfSelfConfig::for_backbone(const BackboneDescriptor& d, int iterations) {
  return SelfSelfConfig{iterations, std::sqrt(static_cast<double>(d.head_dim)), d.head_count, d.head_dim};
}

namespace detail {

template <typename DerivedT, typename DerivedW>
void check_projection(const Eigen::MatrixBase<DerivedT>& tokens, const Eigen::MatrixBase<DerivedW>& w,
                      const SelfSelfConfig& cfg) {
  cfg.validate();
  if (w.rows() != tokens.cols()) throw InvalidInput("self-self: projection rows do not match token width");
  if (w.cols() != cfg.width()) throw InvalidInput("self-self: projection cols != heads * head_dim");
  if (!tokens.allFinite()) throw InvalidInput("self-self: non-finite token");
}

}  // namespace detail

/// Self-self attention matrix of one head block: softmax(P P^T / tau).
template <typename Derived>
Matrix<typename Derived::Scalar> self_self_attention(const Eigen::MatrixBase<Derived>& p, double temperature) {
  using Scalar = typename Derived::Scalar;
  return softmax_rows((p * p.transpose()) / Scalar(temperature));
}

/// Iterated, L2-normalized self-self projection P^(J), heads side by side.
template <typename DerivedT, typename DerivedW>
Matrix<typename DerivedT::Scalar> self_self_iterate(const Eigen::MatrixBase<DerivedT>& tokens,
                                                     const Eigen::MatrixBase<DerivedW>& w_proj,
                                                     const SelfSelfConfig& cfg) {
  using Scalar = typename DerivedT::Scalar;
  detail::check_projection(tokens, w_proj, cfg);
  const Matrix<Scalar> projected = tokens * w_proj;
  Matrix<Scalar> out(projected.rows(), projected.cols());
  for (int h = 0; h < cfg.heads; ++h) {
    Matrix<Scalar> p = normalize_rows(projected.middleCols(h * cfg.head_dim, cfg.head_dim));
    for (int j = 0; j < cfg.iterations; ++j) {
      const Matrix<Scalar> attn = self_self_attention(p, cfg.temperature);
      p = normalize_rows(attn * p);
    }
    out.middleCols(h * cfg.head_dim, cfg.head_dim) = p;
  }
  return out;
}

/// One branch: softmax(P^(J) P^(J)^T / tau) V, per head.
template <typename DerivedT, typename DerivedW, typename DerivedV>
Matrix<typename DerivedT::Scalar> self_self_branch(const Eigen::MatrixBase<DerivedT>& tokens,
                                                    const Eigen::MatrixBase<DerivedW>& w_proj,
                                                    const Eigen::MatrixBase<DerivedV>& values,
                                                    const SelfSelfConfig& cfg) {
  using Scalar = typename DerivedT::Scalar;
  const Matrix<Scalar> p = self_self_iterate(tokens, w_proj, cfg);
  Matrix<Scalar> out(values.rows(), values.cols());
  for (int h = 0; h < cfg.heads; ++h) {
    const Matrix<Scalar> attn = self_self_attention(p.middleCols(h * cfg.head_dim, cfg.head_dim), cfg.temperature);
    out.middleCols(h * cfg.head_dim, cfg.head_dim) = attn * values.middleCols(h * cfg.head_dim, cfg.head_dim);
  }
  return out;
}

/// (O_qq + O_kk + O_vv) / 3 with heads concatenated, before the output projection.
template <typename DerivedT, typename DerivedQ, typename DerivedK, typename DerivedV>
Matrix<typename DerivedT::Scalar> self_self_values(const Eigen::MatrixBase<DerivedT>& tokens,
                                                    const Eigen::MatrixBase<DerivedQ>& w_q,
                                                    const Eigen::MatrixBase<DerivedK>& w_k,
                                                    const Eigen::MatrixBase<DerivedV>& w_v,
                                                    const SelfSelfConfig& cfg) {
  using Scalar = typename DerivedT::Scalar;
  detail::check_projection(tokens, w_v, cfg);
  const Matrix<Scalar> values = tokens * w_v;
  const Matrix<Scalar> qq = self_self_branch(tokens, w_q, values, cfg);
  const Matrix<Scalar> kk = self_self_branch(tokens, w_k, values, cfg);
  const Matrix<Scalar> vv = self_self_branch(tokens, w_v, values, cfg);
  return (qq + kk + vv) / Scalar(3);
}

/// O_qkv projected through the block's attention output weights.
template <typename DerivedT, typename DerivedQ, typename DerivedK, typename DerivedV, typename DerivedO,
          typename DerivedB>
Matrix<typename DerivedT::Scalar> self_self_output(const Eigen::MatrixBase<DerivedT>& tokens,
                                                    const Eigen::MatrixBase<DerivedQ>& w_q,
                                                    const Eigen::MatrixBase<DerivedK>& w_k,
                                                    const Eigen::MatrixBase<DerivedV>& w_v,
                                                    const Eigen::MatrixBase<DerivedO>& w_out,
                                                    const Eigen::MatrixBase<DerivedB>& b_out,
                                                    const SelfSelfConfig& cfg) {
  using Scalar = typename DerivedT::Scalar;
  if (w_out.rows() != cfg.width()) throw InvalidInput("self-self: output projection rows != heads * head_dim");
  if (b_out.size() != w_out.cols()) throw InvalidInput("self-self: output bias width mismatch");
  Matrix<Scalar> out = self_self_values(tokens, w_q, w_k, w_v, cfg) * w_out;
  out.rowwise() += b_out.transpose().template cast<Scalar>();
  return out;
}

/// What each pathway layer after the first consumes.
enum class PathwayInput {
  /// The running pathway state X^{L-K} + sum of earlier Z.
  accumulated,
  /// The frozen backbone's own X^{l-1}.
  backbone,
};

/// Self-self pathway over the last K layers of a trace.
struct PathwayState {
  int layer_count = 0;  // L
  int depth = 0;        // K
  /// X^{L-K}.
  MatrixXd base;
  /// Z^l for l = L-K+1 .. L, stored at index l-(L-K+1).
  std::vector<MatrixXd> z;
  /// O_GEM = X^{L-K} + sum Z^l, summed in layer order.
  MatrixXd output;

  int first_layer() const { return layer_count - depth + 1; }
  const MatrixXd& Z(int l) const { return z.at(static_cast<std::size_t>(l - first_layer())); }
};

/// Runs the pathway for the last K layers. Each pathway layer applies its
/// block's first layer norm and attention weights; MLPs are never applied.
PathwayState gem_accumulate(const LayerTrace& trace, int depth, const SelfSelfConfig& cfg,
                            PathwayInput input = PathwayInput::accumulated);

}  // namespace videogem
