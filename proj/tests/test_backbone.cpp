#include "doctest.h"
#include "oracles.hpp"

#include "videogem/backbone.hpp"
#include "videogem/toy_backbone.hpp"

#include <bit>
#include <fstream>
#include <iterator>

using namespace videogem;

namespace {

ToyBackbone seed42() { return ToyBackbone::load(oracle::data_dir() / "fixtures/toy_seed42.bin"); }

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("backbone") {

TEST_CASE("toy forward matches the loop transformer") {
  const ToyBackbone bb = seed42();
  const FrameBatch batch = oracle::noise_batch(2, 8, 6, 3);
  const LayerTrace trace = bb.forward_with_trace(batch);
  const auto ref = oracle::transformer_forward(bb.weights(), batch.frames);

  REQUIRE(trace.layer_outputs.size() == 5);
  CHECK(trace.token_count() == 1 + 2 * 4);
  for (int l = 0; l <= 4; ++l) CHECK(oracle::max_abs_diff(ref.x[static_cast<std::size_t>(l)], trace.X(l)) < oracle::kForwardTol);
}

TEST_CASE("residual bookkeeping") {
  const ToyBackbone bb = seed42();
  const LayerTrace trace = bb.forward_with_trace(oracle::noise_batch(3, 4, 4, 11, 1));

  MatrixXd rebuilt = trace.X(0);
  for (int l = 1; l <= trace.layer_count(); ++l) {
    CHECK((trace.X(l) - trace.X(l - 1) - trace.Y(l)).cwiseAbs().maxCoeff() < 1e-12);
    rebuilt += trace.Y(l);
  }
  CHECK((rebuilt - trace.X(4)).cwiseAbs().maxCoeff() < oracle::kClsDecompTol);

  const VectorXd sum = trace.cls_residuals.colwise().sum().transpose();
  CHECK((trace.cls_final() - sum).cwiseAbs().maxCoeff() < oracle::kClsDecompTol);
}

TEST_CASE("repeated image blocks are bitwise equal") {
  const ToyBackbone bb = seed42();
  FrameBatch batch;
  batch.mode = FrameMode::repeated_image;
  batch.frames.assign(8, oracle::noise_image(6, 4, 5));
  const LayerTrace trace = bb.forward_with_trace(batch);
  const MatrixXd& x0 = trace.X(0);
  for (int t = 1; t < 8; ++t) CHECK(x0.middleRows(1 + 4 * t, 4) == x0.middleRows(1, 4));
}

TEST_CASE("zero weights give zero residuals") {
  ToyConfig cfg;
  const ToyBackbone bb(zero_toy_weights(9, cfg));
  const LayerTrace trace = bb.forward_with_trace(oracle::noise_batch(2, 4, 4, 2));
  for (int l = 1; l <= cfg.layers; ++l) {
    CHECK(trace.Y(l).isZero(0.0));
    CHECK(trace.X(l) == trace.X(0));
  }
}

TEST_CASE("video backbone takes its native frame count") {
  const ToyBackbone bb = ToyBackbone::load(oracle::data_dir() / "fixtures/toy_video_seed7.bin");
  CHECK(bb.descriptor().native_frame_count == 8);
  CHECK_THROWS_AS(bb.forward_with_trace(oracle::noise_batch(3, 8, 8, 1)), InvalidInput);
  CHECK(bb.forward_with_trace(oracle::noise_batch(8, 8, 8, 1, 4)).token_count() == 1 + 8 * 16);
}

TEST_CASE("frames that do not tile the grid are rejected") {
  const ToyBackbone bb = seed42();
  CHECK_THROWS_AS(bb.forward_with_trace(oracle::noise_batch(1, 5, 4, 1)), InvalidInput);
  FrameBatch mixed = oracle::noise_batch(2, 4, 4, 1);
  mixed.frames[1] = oracle::noise_image(6, 4, 2);
  CHECK_THROWS_AS(bb.forward_with_trace(mixed), InvalidInput);
  FrameBatch empty;
  CHECK_THROWS_AS(bb.forward_with_trace(empty), InvalidInput);
}

TEST_CASE("text stub") {
  const ToyBackbone bb = seed42();
  CHECK(bb.encode_text("cutting onion").vector == bb.encode_text("cutting onion").vector);
  CHECK(bb.encode_text("a").vector != bb.encode_text("b").vector);
  CHECK(bb.encode_text("a").vector.size() == bb.descriptor().joint_dim);
  CHECK_THROWS_AS(bb.encode_text(""), InvalidInput);

  // Reference computed from the fixture bytes by fixtures/make_text_embedding.py, float64 little-endian.
  const auto bytes = slurp(oracle::data_dir() / "fixtures/text_cutting_onion_seed42.f64");
  const VectorXd v = bb.encode_text("cutting onion").vector;
  REQUIRE(bytes.size() == static_cast<std::size_t>(v.size()) * 8);
  for (Index i = 0; i < v.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[static_cast<std::size_t>(i * 8 + b)]) << (8 * b);
    CHECK(std::abs(v(i) - std::bit_cast<double>(bits)) < 1e-12);
  }
}

TEST_CASE("fixture generation is deterministic") {
  ToyConfig cfg;
  const auto a = serialize_toy_weights(generate_toy_weights(42, cfg));
  const auto b = serialize_toy_weights(generate_toy_weights(42, cfg));
  CHECK(a == b);
  CHECK(a == slurp(oracle::data_dir() / "fixtures/toy_seed42.bin"));
  CHECK(serialize_toy_weights(generate_toy_weights(1, cfg)) != serialize_toy_weights(generate_toy_weights(2, cfg)));

  const auto round = serialize_toy_weights(deserialize_toy_weights(a));
  CHECK(round == a);
}

TEST_CASE("fixture header layout") {
  const auto bytes = slurp(oracle::data_dir() / "fixtures/toy_seed42.bin");
  REQUIRE(bytes.size() > 52);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "VGEMTOY1");
  CHECK(bytes[8] == 42);
  // layers, embed_dim, heads
  CHECK(bytes[16] == 4);
  CHECK(bytes[20] == 8);
  CHECK(bytes[24] == 2);
}

TEST_CASE("corrupt fixtures") {
  auto bytes = serialize_toy_weights(generate_toy_weights(42, ToyConfig{}));
  auto truncated = bytes;
  truncated.resize(truncated.size() - 4);
  CHECK_THROWS_AS(deserialize_toy_weights(truncated), CorruptFixture);
  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(deserialize_toy_weights(extra), CorruptFixture);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_toy_weights(magic), CorruptFixture);
  std::vector<std::uint8_t> header_only(bytes.begin(), bytes.begin() + 52);
  CHECK_THROWS_AS(deserialize_toy_weights(header_only), CorruptFixture);
  CHECK_THROWS_AS(ToyBackbone::load("/nonexistent/toy.bin"), IoError);
}

TEST_CASE("inconsistent dims are rejected") {
  ToyConfig cfg;
  cfg.heads = 3;
  CHECK_THROWS_AS(generate_toy_weights(1, cfg), InvalidInput);
  BackboneDescriptor d = ToyConfig{}.descriptor();
  CHECK_NOTHROW(d.validate());
  d.head_dim = 3;
  CHECK_THROWS_AS(d.validate(), InvalidInput);
}

TEST_CASE("adapters") {
  CHECK_THROWS_AS(open_backbone("viclip", "weights.pt"), ConfigError);
  CHECK_THROWS_AS(open_backbone("toy", ""), ConfigError);
  const auto bb = open_backbone("toy", (oracle::data_dir() / "fixtures/toy_seed42.bin").string());
  CHECK(bb->descriptor().layer_count == 4);
}

}
