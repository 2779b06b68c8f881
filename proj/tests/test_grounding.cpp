#include "doctest.h"
#include "oracles.hpp"

#include "videogem/grounding.hpp"
#include "videogem/heatmap_io.hpp"
#include "videogem/toy_backbone.hpp"

#include <random>

using namespace videogem;

TEST_SUITE("grounding") {

TEST_CASE("frame sampling") {
  CHECK(sample_frame_indices(10, 30, 8, FrameMode::video) == std::vector<int>{6, 7, 8, 9, 10, 11, 12, 13});
  CHECK(target_position(8, FrameMode::video) == 4);
  CHECK(sample_frame_indices(0, 30, 8, FrameMode::video) == std::vector<int>{0, 0, 0, 0, 0, 1, 2, 3});
  CHECK(sample_frame_indices(29, 30, 8, FrameMode::video) == std::vector<int>{25, 26, 27, 28, 29, 29, 29, 29});
  CHECK(sample_frame_indices(5, 30, 8, FrameMode::repeated_image) == std::vector<int>(8, 5));
  CHECK(target_position(8, FrameMode::repeated_image) == 0);
  CHECK(sample_frame_indices(0, 1, 1, FrameMode::video) == std::vector<int>{0});
  CHECK_THROWS_AS(sample_frame_indices(30, 30, 8, FrameMode::video), InvalidInput);
  CHECK_THROWS_AS(sample_frame_indices(0, 0, 8, FrameMode::video), InvalidInput);
}

TEST_CASE("patch similarity extremes") {
  JointProjection joint;
  joint.ln_gain = VectorXd::Ones(4);
  joint.ln_bias = VectorXd::Zero(4);
  joint.proj = MatrixXd::Identity(4, 4);
  // After LN (1, -1, 0, 0) keeps its direction; (0, 0, 1, -1) is orthogonal to it.
  MatrixXd tokens(3, 4);
  tokens << 9, 9, 9, 9, 1, -1, 0, 0, 0, 0, 1, -1;
  const TextEmbedding e{(VectorXd(4) << 2, -2, 0, 0).finished(), ""};
  const VectorXd s = patch_text_similarity(tokens, e, joint);
  REQUIRE(s.size() == 2);
  CHECK(s(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s(1)) < 1e-12);
}

TEST_CASE("patch similarity against the loop cosine") {
  const ToyBackbone bb = ToyBackbone::load(oracle::data_dir() / "fixtures/toy_seed42.bin");
  const LayerTrace trace = bb.forward_with_trace(oracle::noise_batch(1, 4, 4, 9));
  const TextEmbedding e = bb.encode_text("A photo of a person.");
  const VectorXd s = patch_text_similarity(trace.X(4), e, trace.joint);
  REQUIRE(s.size() == 4);
  const auto x = oracle::from_eigen(trace.X(4));
  for (int i = 0; i < 4; ++i) {
    const double ref = oracle::cosine(oracle::joint_map(x[static_cast<std::size_t>(i + 1)], trace.joint), oracle::vec_from(e.vector));
    CHECK(std::abs(s(i) - ref) < oracle::kCosineTol);
  }
}

TEST_CASE("one-hot 2x2 upsampled to 4x4") {
  const VectorXd s = (VectorXd(4) << 1, 0, 0, 0).finished();
  const Heatmap h = heatmap_for_target_frame(s, 0, 2, 2, 4, 4);
  MatrixXd expected(4, 4);
  expected << 1.0, 0.75, 0.25, 0.0,
              0.75, 0.5625, 0.1875, 0.0,
              0.25, 0.1875, 0.0625, 0.0,
              0.0, 0.0, 0.0, 0.0;
  CHECK((h.grid - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bilinear resize keeps constant fields and identity size") {
  MatrixXd g(2, 3);
  g << 1, 2, 3, 4, 5, 6;
  CHECK(bilinear_resize(g, 2, 3) == g);
  CHECK(bilinear_resize(MatrixXd::Constant(2, 2, 0.7), 5, 3).isApproxToConstant(0.7));
}

TEST_CASE("normalization range") {
  CHECK(heatmap_for_target_frame(VectorXd::Constant(4, 0.3), 0, 2, 2, 8, 8).grid.isZero(0.0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    VectorXd s(8);
    for (Index i = 0; i < 8; ++i) s(i) = g(rng);
    const Heatmap h = heatmap_for_target_frame(s, 1, 2, 2, 6, 10);
    CHECK(h.grid.minCoeff() == 0.0);
    CHECK(h.grid.maxCoeff() == 1.0);
    CHECK(h.width() == 10);
    CHECK(h.height() == 6);
  }
}

TEST_CASE("argmax and ties") {
  Heatmap h{MatrixXd::Zero(6, 4)};
  h.grid(5, 3) = 1.0;
  CHECK(predict_center(h).x == 3);
  CHECK(predict_center(h).y == 5);

  CHECK(predict_center(Heatmap{MatrixXd::Zero(3, 3)}).x == 0);
  CHECK(predict_center(Heatmap{MatrixXd::Zero(3, 3)}).y == 0);

  Heatmap tie{MatrixXd::Zero(3, 3)};
  tie.grid(1, 1) = 1.0;  // (x=1, y=1)
  tie.grid(0, 2) = 1.0;  // (x=2, y=0)
  const auto c = predict_center(tie);
  CHECK(c.x == 2);
  CHECK(c.y == 0);
}

TEST_CASE("argmax survives monotone rescaling") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd s(4);
  for (Index i = 0; i < 4; ++i) s(i) = u(rng);
  const auto a = predict_center(heatmap_for_target_frame(s, 0, 2, 2, 8, 8));
  const VectorXd t = (3.0 * s.array() + 1.0).exp().matrix();
  const auto b = predict_center(heatmap_for_target_frame(t, 0, 2, 2, 8, 8));
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
}

TEST_CASE("other frames do not touch the target heatmap") {
  VectorXd s(12);
  for (Index i = 0; i < 12; ++i) s(i) = static_cast<double>((i * 7) % 5);
  const Heatmap a = heatmap_for_target_frame(s, 1, 2, 2, 4, 4);
  VectorXd changed = s;
  changed.head(4).setConstant(100.0);
  changed.tail(4).setConstant(-3.0);
  CHECK(heatmap_for_target_frame(changed, 1, 2, 2, 4, 4).grid == a.grid);
  CHECK_THROWS_AS(heatmap_for_target_frame(s, 3, 2, 2, 4, 4), InvalidInput);
  CHECK_THROWS_AS(heatmap_for_target_frame(VectorXd::Zero(5), 0, 2, 2, 4, 4), InvalidInput);
}

TEST_CASE("raw heatmap sidecar round trip") {
  Heatmap h{MatrixXd(2, 3)};
  h.grid << 0.0, 0.25, 1.0, 0.5, 0.125, 0.75;
  const auto bytes = encode_heatmap_raw(h);
  CHECK(bytes.size() == 16 + 6 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "VGEMHEAT");
  CHECK(decode_heatmap_raw(bytes).grid == h.grid);
  auto cut = bytes;
  cut.pop_back();
  CHECK_THROWS(decode_heatmap_raw(cut));
}

}
