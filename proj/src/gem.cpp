#include "videogem/gem.hpp"

namespace videogem {

PathwayState gem_accumulate(const LayerTrace& trace, int depth, const SelfSelfConfig& cfg, PathwayInput input) {
  const int L = trace.layer_count();
  if (depth < 0 || depth > L) {
    throw InvalidInput("gem: depth " + std::to_string(depth) + " outside [0, " + std::to_string(L) + "]");
  }
  cfg.validate();

  PathwayState state;
  state.layer_count = L;
  state.depth = depth;
  state.base = trace.X(L - depth);
  state.output = state.base;
  for (int l = L - depth + 1; l <= L; ++l) {
    const AttentionWeights& w = trace.weights(l);
    const MatrixXd& source = input == PathwayInput::accumulated ? state.output : trace.X(l - 1);
    const MatrixXd normed = layer_norm(source, w.ln_gain, w.ln_bias);
    MatrixXd z = self_self_output(normed, w.w_q, w.w_k, w.w_v, w.w_out, w.b_out, cfg);
    state.output += z;
    state.z.push_back(std::move(z));
  }
  return state;
}

}  // namespace videogem
