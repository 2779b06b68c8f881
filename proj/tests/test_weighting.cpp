#include "doctest.h"
#include "oracles.hpp"

#include "videogem/toy_backbone.hpp"
#include "videogem/weighting.hpp"

#include <random>

using namespace videogem;

namespace {

const ToyBackbone& deep_toy() {
  static const ToyBackbone bb(generate_toy_weights(77, ToyConfig{8, 8, 2, 2, 2, 1, 0, 0}));
  return bb;
}

LayerTrace deep_trace(std::uint32_t seed) { return deep_toy().forward_with_trace(oracle::noise_batch(1, 4, 4, seed)); }

const std::vector<double> kDefaultWs{0.3, 0.4, 0.5, 0.6, 0.7, 0.9, 0.9, 0.9};

}  // namespace

TEST_SUITE("weighting") {

TEST_CASE("unit static weights reduce to the plain pathway sum") {
  const LayerTrace trace = deep_trace(1);
  const PathwayState s = gem_accumulate(trace, 7, SelfSelfConfig::for_backbone(trace.descriptor));
  const std::vector<double> ones(8, 1.0);
  CHECK(oracle::max_abs_diff(static_weighted_output(s, ones), s.output) < 1e-7);
  const std::vector<double> zeros(8, 0.0);
  CHECK(static_weighted_output(s, zeros).isZero(0.0));
  CHECK_THROWS_AS(static_weighted_output(s, std::vector<double>(7, 1.0)), InvalidInput);
}

TEST_CASE("default static weights against a hand sum") {
  const LayerTrace trace = deep_trace(2);
  const PathwayState s = gem_accumulate(trace, 7, SelfSelfConfig::for_backbone(trace.descriptor));
  oracle::Mat expected = oracle::scale(oracle::from_eigen(trace.X(1)), 0.3);
  const double ws[] = {0.4, 0.5, 0.6, 0.7, 0.9, 0.9, 0.9};
  for (int l = 2; l <= 8; ++l)
    expected = oracle::add(expected, oracle::scale(oracle::from_eigen(s.Z(l)), ws[l - 2]));
  CHECK(oracle::max_abs_diff(expected, static_weighted_output(s, kDefaultWs)) < oracle::kWeightingTol);
}

TEST_CASE("removal similarities") {
  SUBCASE("zero residuals give equal entries") {
    const VectorXd x = (VectorXd(3) << 1.0, 2.0, -1.0).finished();
    const VectorXd e = (VectorXd(3) << 0.5, 0.0, 1.0).finished();
    const VectorXd s = removal_similarities(x, MatrixXd::Zero(3, 3), e, [](const VectorXd& v) { return v; });
    CHECK(s(0) == s(1));
    CHECK(s(1) == s(2));
    CHECK(s(0) == doctest::Approx(oracle::cosine({1.0, 2.0, -1.0}, {0.5, 0.0, 1.0})));
  }
  SUBCASE("orthogonal after removal") {
    const VectorXd x = (VectorXd(2) << 1.0, 1.0).finished();
    const MatrixXd y = (MatrixXd(1, 2) << 1.0, 0.0).finished();
    const VectorXd e = (VectorXd(2) << 1.0, 0.0).finished();
    CHECK(removal_similarities(x, y, e, [](const VectorXd& v) { return v; })(0) == 0.0);
  }
  SUBCASE("residual equal to the whole token") {
    const VectorXd x = (VectorXd(2) << 1.0, 3.0).finished();
    const MatrixXd y = x.transpose();
    CHECK(removal_similarities(x, y, x, [](const VectorXd& v) { return v; })(0) == 0.0);
  }
}

TEST_CASE("layer similarities against the loop cosine") {
  const LayerTrace trace = deep_trace(3);
  const TextEmbedding text = deep_toy().encode_text("A photo of a person cutting onion.");
  const VectorXd s = layer_similarities(trace, text, 3);
  REQUIRE(s.size() == 3);
  const oracle::Vec x = oracle::vec_from(trace.cls_final());
  const oracle::Vec e = oracle::vec_from(text.vector);
  for (int i = 0; i < 3; ++i) {
    const int l = 6 + i;
    oracle::Vec removed = x;
    for (std::size_t j = 0; j < removed.size(); ++j) removed[j] -= trace.Y(l)(0, static_cast<Index>(j));
    CHECK(std::abs(s(i) - oracle::cosine(oracle::joint_map(removed, trace.joint), e)) < oracle::kCosineTol);
  }
  CHECK_THROWS_AS(layer_similarities(trace, TextEmbedding{VectorXd::Ones(3), ""}, 3), InvalidInput);
}

TEST_CASE("softmax with tau_d = 20") {
  const VectorXd s = (VectorXd(3) << 0.1, 0.2, 0.3).finished();
  const DynamicWeights w = dynamic_weights(s, 20.0);
  const oracle::Vec ref = oracle::softmax({-2.0, -4.0, -6.0});
  for (int i = 0; i < 3; ++i) CHECK(std::abs(w.weights(i) - ref[static_cast<std::size_t>(i)]) < 1e-12);
  // Oracle output, frozen.
  CHECK(std::abs(w.weights(0) - 0.8668) < 5e-5);
  CHECK(std::abs(w.weights(1) - 0.1173) < 5e-5);
  CHECK(std::abs(w.weights(2) - 0.0159) < 5e-5);
}

TEST_CASE("dynamic weight contract") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    VectorXd s(3);
    for (Index i = 0; i < 3; ++i) s(i) = u(rng);
    const VectorXd w = dynamic_weights(s, 20.0).weights;
    CHECK(std::abs(w.sum() - 1.0) < 1e-6);
    VectorXd bumped = s;
    bumped(trial % 3) += 0.05;
    CHECK(dynamic_weights(bumped, 20.0).weights(trial % 3) < w(trial % 3));
    const VectorXd flat = dynamic_weights(s, 1e-9).weights;
    CHECK((flat.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-6);
  }
  const VectorXd equal = dynamic_weights(VectorXd::Constant(3, 0.4), 20.0).weights;
  CHECK((equal.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(dynamic_weights(VectorXd::Constant(3, std::nan("")), 20.0), InvalidInput);
}

TEST_CASE("effective layer weights per mode") {
  WeightConfig cfg;
  const DynamicWeights dyn = dynamic_weights((VectorXd(3) << 0.1, 0.2, 0.3).finished(), 20.0);

  cfg.mode = WeightingMode::none;
  CHECK(layer_weights(cfg, nullptr) == std::vector<double>(8, 1.0));
  cfg.mode = WeightingMode::static_weights;
  CHECK(layer_weights(cfg, nullptr) == kDefaultWs);

  cfg.mode = WeightingMode::dynamic;
  auto w = layer_weights(cfg, &dyn);
  for (int i = 0; i < 5; ++i) CHECK(w[static_cast<std::size_t>(i)] == 1.0);
  for (int i = 0; i < 3; ++i) CHECK(w[static_cast<std::size_t>(5 + i)] == dyn.weights(i));

  cfg.mode = WeightingMode::combined;
  w = layer_weights(cfg, &dyn);
  for (int i = 0; i < 5; ++i) CHECK(w[static_cast<std::size_t>(i)] == kDefaultWs[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(w[static_cast<std::size_t>(5 + i)] - (0.9 - 1.0 / 3.0 + dyn.weights(i))) < 1e-15);
  CHECK_THROWS_AS(layer_weights(cfg, nullptr), InvalidInput);
}

TEST_CASE("equal similarities make combined equal static") {
  const LayerTrace trace = deep_trace(5);
  const PathwayState s = gem_accumulate(trace, 7, SelfSelfConfig::for_backbone(trace.descriptor));
  WeightConfig cfg;
  const DynamicWeights dyn = dynamic_weights(VectorXd::Constant(3, 0.25), 20.0);
  const MatrixXd comb = weighted_layer_sum(s, layer_weights(cfg, &dyn));
  CHECK(oracle::max_abs_diff(comb, static_weighted_output(s, kDefaultWs)) < oracle::kWeightingTol);
}

TEST_CASE("default configuration against an unrolled computation") {
  const LayerTrace trace = deep_trace(6);
  const TextEmbedding text = deep_toy().encode_text("A photo of a person using onion.");
  const int h = trace.descriptor.head_count, hd = trace.descriptor.head_dim;
  const double tau = std::sqrt(static_cast<double>(hd));

  // Pathway, layer by layer.
  std::vector<oracle::Mat> z(9);
  oracle::Mat acc = oracle::from_eigen(trace.X(1));
  for (int l = 2; l <= 8; ++l) {
    z[static_cast<std::size_t>(l)] = oracle::pathway_layer(acc, trace.weights(l), h, hd, 1, tau);
    acc = oracle::add(acc, z[static_cast<std::size_t>(l)]);
  }
  // Dynamic weights for layers 6, 7, 8.
  const oracle::Vec x = oracle::vec_from(trace.cls_final()), e = oracle::vec_from(text.vector);
  oracle::Vec logits;
  for (int l = 6; l <= 8; ++l) {
    oracle::Vec removed = x;
    for (std::size_t j = 0; j < removed.size(); ++j) removed[j] -= trace.Y(l)(0, static_cast<Index>(j));
    logits.push_back(-20.0 * oracle::cosine(oracle::joint_map(removed, trace.joint), e));
  }
  const oracle::Vec wd = oracle::softmax(logits);
  const double wc[] = {0.3, 0.4, 0.5, 0.6, 0.7, 0.9 - 1.0 / 3.0 + wd[0], 0.9 - 1.0 / 3.0 + wd[1],
                       0.9 - 1.0 / 3.0 + wd[2]};
  oracle::Mat expected = oracle::scale(oracle::from_eigen(trace.X(1)), wc[0]);
  for (int l = 2; l <= 8; ++l)
    expected = oracle::add(expected, oracle::scale(z[static_cast<std::size_t>(l)], wc[l - 1]));

  WeightConfig cfg;
  const PathwayState s = gem_accumulate(trace, 7, SelfSelfConfig{1, tau, h, hd});
  CHECK(oracle::max_abs_diff(expected, combined_output(trace, s, cfg, &text)) < oracle::kWeightingTol);
}

TEST_CASE("mode coherence") {
  const LayerTrace trace = deep_trace(7);
  const TextEmbedding text = deep_toy().encode_text("A photo of a person.");
  const PathwayState s = gem_accumulate(trace, 7, SelfSelfConfig::for_backbone(trace.descriptor));

  WeightConfig none;
  none.mode = WeightingMode::none;
  CHECK(combined_output(trace, s, none, nullptr) == s.output);

  WeightConfig d0;
  d0.dynamic_depth = 0;
  WeightConfig stat;
  stat.mode = WeightingMode::static_weights;
  CHECK(combined_output(trace, s, d0, nullptr) == combined_output(trace, s, stat, nullptr));

  stat.static_weights.assign(8, 1.0);
  CHECK(oracle::max_abs_diff(combined_output(trace, s, stat, nullptr), s.output) < 1e-7);

  WeightConfig comb;
  CHECK_THROWS_AS(combined_output(trace, s, comb, nullptr), InvalidInput);
  CHECK_NOTHROW(combined_output(trace, s, comb, &text));

  const PathwayState k0 = gem_accumulate(trace, 0, SelfSelfConfig::for_backbone(trace.descriptor));
  const WeightConfig c0 = comb.with_depth(0);
  CHECK(combined_output(trace, k0, c0, &text) == trace.X(8));
}

TEST_CASE("different prompts give different dynamic weights") {
  const LayerTrace trace = deep_trace(8);
  WeightConfig cfg;
  const TextEmbedding a = deep_toy().encode_text("A photo of a person cutting something.");
  const TextEmbedding b = deep_toy().encode_text("A photo of a person using zucchini.");
  const auto wa = prompt_dynamic_weights(trace, cfg, &a);
  const auto wb = prompt_dynamic_weights(trace, cfg, &b);
  REQUIRE(wa);
  REQUIRE(wb);
  CHECK((wa->weights - wb->weights).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("config validation and depth truncation") {
  WeightConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  const WeightConfig k2 = cfg.with_depth(2);
  CHECK(k2.depth == 2);
  CHECK(k2.dynamic_depth == 2);
  CHECK(k2.static_weights == std::vector<double>{0.9, 0.9, 0.9});
  CHECK(cfg.with_depth(0).dynamic_depth == 0);
  CHECK(cfg.with_depth(5).dynamic_depth == 3);
  CHECK_THROWS_AS(cfg.with_depth(8), InvalidInput);

  WeightConfig bad = cfg;
  bad.dynamic_depth = 8;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = cfg;
  bad.static_weights.pop_back();
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = cfg;
  bad.dynamic_temperature = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);

  CHECK(parse_weighting_mode("s+d") == WeightingMode::combined);
  CHECK(parse_weighting_mode("stat") == WeightingMode::static_weights);
  CHECK(!parse_weighting_mode("both"));
}

}
