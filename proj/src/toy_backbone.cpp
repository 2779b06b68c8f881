#include "videogem/toy_backbone.hpp"

#include "videogem/ops.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

namespace videogem {

namespace {

constexpr std::array<char, 8> kMagic = {'V', 'G', 'E', 'M', 'T', 'O', 'Y', '1'};
constexpr std::size_t kHeaderBytes = 8 + 8 + 9 * 4;

// Uniform draws in [-1, 1) from the top 24 bits of each 64-bit output. The
// mt19937_64 sequence is fixed by the standard, so fixtures match everywhere.
class WeightStream {
 public:
  explicit WeightStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    const std::uint64_t bits = engine_() >> 40;
    return 2.0 * (static_cast<double>(bits) * 0x1.0p-24) - 1.0;
  }

  MatrixXf matrix(int rows, int cols, double scale, double offset = 0.0) {
    MatrixXf m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = static_cast<float>(offset + scale * next());
    return m;
  }

  VectorXf vector(int n, double scale, double offset = 0.0) {
    VectorXf v(n);
    for (int i = 0; i < n; ++i) v(i) = static_cast<float>(offset + scale * next());
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

void validate_config(const ToyConfig& c) {
  if (c.layers < 1 || c.embed_dim < 1 || c.heads < 1 || c.grid_rows < 1 || c.grid_cols < 1) {
    throw InvalidInput("toy config: dims must be positive");
  }
  if (c.embed_dim % c.heads != 0) {
    throw InvalidInput("toy config: embed_dim " + std::to_string(c.embed_dim) + " not divisible by heads " +
                       std::to_string(c.heads));
  }
  if (c.native_frames != 1 && c.native_frames != 8) throw InvalidInput("toy config: native_frames must be 1 or 8");
  if (c.joint_dim < 0 || c.mlp_dim < 0) throw InvalidInput("toy config: negative joint/mlp dim");
}

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  template <typename Derived>
  void tensor(const Eigen::DenseBase<Derived>& m) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) f32(m(i, j));
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  MatrixXf matrix(int rows, int cols) {
    MatrixXf m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = f32();
    return m;
  }
  VectorXf vector(int n) {
    VectorXf v(n);
    for (int i = 0; i < n; ++i) v(i) = f32();
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void need(std::size_t n) const {
    if (remaining() < n) throw CorruptFixture("toy fixture truncated at byte " + std::to_string(pos_));
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  const std::uint8_t* cursor() const { return bytes_.data() + pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

VectorXd to_double(const VectorXf& v) { return v.cast<double>(); }
MatrixXd to_double(const MatrixXf& m) { return m.cast<double>(); }

}  // namespace

BackboneDescriptor ToyConfig::descriptor() const {
  BackboneDescriptor d;
  d.layer_count = layers;
  d.embed_dim = embed_dim;
  d.head_count = heads;
  d.head_dim = heads > 0 ? embed_dim / heads : 0;
  d.grid_rows = grid_rows;
  d.grid_cols = grid_cols;
  d.native_frame_count = native_frames;
  d.joint_dim = resolved_joint_dim();
  return d;
}

ToyWeights generate_toy_weights(std::uint64_t seed, const ToyConfig& config) {
  validate_config(config);
  const int d = config.embed_dim;
  const int m = config.resolved_mlp_dim();
  const int j = config.resolved_joint_dim();
  const int n = config.grid_rows * config.grid_cols;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  WeightStream s(seed);
  ToyWeights w;
  w.config = config;
  w.seed = seed;
  w.patch_w = s.matrix(3, d, 1.0 / std::sqrt(3.0));
  w.patch_b = s.vector(d, 0.02);
  w.class_embed = s.vector(d, 0.5);
  w.pos_embed = s.matrix(n, d, 0.5);
  w.layers.resize(static_cast<std::size_t>(config.layers));
  for (auto& layer : w.layers) {
    layer.ln1_gain = s.vector(d, 0.1, 1.0);
    layer.ln1_bias = s.vector(d, 0.02);
    layer.w_q = s.matrix(d, d, inv_sqrt_d);
    layer.w_k = s.matrix(d, d, inv_sqrt_d);
    layer.w_v = s.matrix(d, d, inv_sqrt_d);
    layer.w_out = s.matrix(d, d, inv_sqrt_d);
    layer.b_out = s.vector(d, 0.02);
    layer.ln2_gain = s.vector(d, 0.1, 1.0);
    layer.ln2_bias = s.vector(d, 0.02);
    layer.fc1_w = s.matrix(d, m, inv_sqrt_d);
    layer.fc1_b = s.vector(m, 0.02);
    layer.fc2_w = s.matrix(m, d, 1.0 / std::sqrt(static_cast<double>(m)));
    layer.fc2_b = s.vector(d, 0.02);
  }
  w.post_gain = s.vector(d, 0.1, 1.0);
  w.post_bias = s.vector(d, 0.02);
  w.proj = s.matrix(d, j, inv_sqrt_d);
  w.text_proj = s.matrix(256, j, 1.0);
  return w;
}

ToyWeights zero_toy_weights(std::uint64_t seed, const ToyConfig& config) {
  ToyWeights w = generate_toy_weights(seed, config);
  for (auto& layer : w.layers) {
    layer.ln1_gain.setOnes();
    layer.ln1_bias.setZero();
    layer.w_q.setZero();
    layer.w_k.setZero();
    layer.w_v.setZero();
    layer.w_out.setZero();
    layer.b_out.setZero();
    layer.ln2_gain.setOnes();
    layer.ln2_bias.setZero();
    layer.fc1_w.setZero();
    layer.fc1_b.setZero();
    layer.fc2_w.setZero();
    layer.fc2_b.setZero();
  }
  return w;
}

std::vector<std::uint8_t> serialize_toy_weights(const ToyWeights& w) {
  const ToyConfig& c = w.config;
  ByteWriter out;
  out.raw(kMagic.data(), kMagic.size());
  out.u64(w.seed);
  for (int v : {c.layers, c.embed_dim, c.heads, c.embed_dim / c.heads, c.grid_rows, c.grid_cols, c.native_frames,
                c.resolved_joint_dim(), c.resolved_mlp_dim()}) {
    out.u32(static_cast<std::uint32_t>(v));
  }
  out.tensor(w.patch_w);
  out.tensor(w.patch_b);
  out.tensor(w.class_embed);
  out.tensor(w.pos_embed);
  for (const auto& l : w.layers) {
    out.tensor(l.ln1_gain);
    out.tensor(l.ln1_bias);
    out.tensor(l.w_q);
    out.tensor(l.w_k);
    out.tensor(l.w_v);
    out.tensor(l.w_out);
    out.tensor(l.b_out);
    out.tensor(l.ln2_gain);
    out.tensor(l.ln2_bias);
    out.tensor(l.fc1_w);
    out.tensor(l.fc1_b);
    out.tensor(l.fc2_w);
    out.tensor(l.fc2_b);
  }
  out.tensor(w.post_gain);
  out.tensor(w.post_bias);
  out.tensor(w.proj);
  out.tensor(w.text_proj);
  return out.take();
}

ToyWeights deserialize_toy_weights(const std::vector<std::uint8_t>& bytes) {
  ByteReader in(bytes);
  in.need(kHeaderBytes);
  if (std::memcmp(in.cursor(), kMagic.data(), kMagic.size()) != 0) throw CorruptFixture("toy fixture: bad magic");
  in.skip(kMagic.size());

  ToyWeights w;
  w.seed = in.u64();
  ToyConfig& c = w.config;
  c.layers = static_cast<int>(in.u32());
  c.embed_dim = static_cast<int>(in.u32());
  c.heads = static_cast<int>(in.u32());
  const int head_dim = static_cast<int>(in.u32());
  c.grid_rows = static_cast<int>(in.u32());
  c.grid_cols = static_cast<int>(in.u32());
  c.native_frames = static_cast<int>(in.u32());
  c.joint_dim = static_cast<int>(in.u32());
  c.mlp_dim = static_cast<int>(in.u32());
  try {
    validate_config(c);
  } catch (const InvalidInput& e) {
    throw CorruptFixture(std::string("toy fixture header: ") + e.what());
  }
  if (head_dim * c.heads != c.embed_dim) throw CorruptFixture("toy fixture header: head_dim inconsistent");
  if (c.joint_dim < 1 || c.mlp_dim < 1) throw CorruptFixture("toy fixture header: zero joint or mlp dim");

  const int d = c.embed_dim, m = c.mlp_dim, j = c.joint_dim, n = c.grid_rows * c.grid_cols;
  const std::size_t per_layer =
      6 * static_cast<std::size_t>(d) + 4 * static_cast<std::size_t>(d) * d + 2 * static_cast<std::size_t>(d) * m + m;
  const std::size_t expected = 3 * static_cast<std::size_t>(d) + 2 * d + static_cast<std::size_t>(n) * d +
                               per_layer * c.layers + 2 * d + static_cast<std::size_t>(d) * j + 256 * j;
  if (in.remaining() != 4 * expected) {
    throw CorruptFixture("toy fixture: expected " + std::to_string(4 * expected) + " weight bytes, found " +
                         std::to_string(in.remaining()));
  }

  w.patch_w = in.matrix(3, d);
  w.patch_b = in.vector(d);
  w.class_embed = in.vector(d);
  w.pos_embed = in.matrix(n, d);
  w.layers.resize(static_cast<std::size_t>(c.layers));
  for (auto& l : w.layers) {
    l.ln1_gain = in.vector(d);
    l.ln1_bias = in.vector(d);
    l.w_q = in.matrix(d, d);
    l.w_k = in.matrix(d, d);
    l.w_v = in.matrix(d, d);
    l.w_out = in.matrix(d, d);
    l.b_out = in.vector(d);
    l.ln2_gain = in.vector(d);
    l.ln2_bias = in.vector(d);
    l.fc1_w = in.matrix(d, m);
    l.fc1_b = in.vector(m);
    l.fc2_w = in.matrix(m, d);
    l.fc2_b = in.vector(d);
  }
  w.post_gain = in.vector(d);
  w.post_bias = in.vector(d);
  w.proj = in.matrix(d, j);
  w.text_proj = in.matrix(256, j);
  return w;
}

void write_toy_fixture(const ToyWeights& weights, const std::filesystem::path& path) {
  const auto bytes = serialize_toy_weights(weights);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ToyWeights read_toy_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open fixture " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_toy_weights(bytes);
}

BackboneDescriptor make_toy_backbone(std::uint64_t seed, const ToyConfig& config,
                                     const std::filesystem::path& fixture_path) {
  write_toy_fixture(generate_toy_weights(seed, config), fixture_path);
  BackboneDescriptor d = config.descriptor();
  d.weight_source = fixture_path.string();
  return d;
}

double quick_gelu(double x) { return x / (1.0 + std::exp(-1.702 * x)); }

ToyBackbone::ToyBackbone(ToyWeights weights, std::string source) : weights_(std::move(weights)) {
  validate_config(weights_.config);
  descriptor_ = weights_.config.descriptor();
  descriptor_.weight_source = std::move(source);
  descriptor_.validate();

  patch_w_ = to_double(weights_.patch_w);
  patch_b_ = to_double(weights_.patch_b);
  class_embed_ = to_double(weights_.class_embed);
  pos_embed_ = to_double(weights_.pos_embed);
  for (const auto& l : weights_.layers) {
    Layer layer;
    layer.attention.ln_gain = to_double(l.ln1_gain);
    layer.attention.ln_bias = to_double(l.ln1_bias);
    layer.attention.w_q = to_double(l.w_q);
    layer.attention.w_k = to_double(l.w_k);
    layer.attention.w_v = to_double(l.w_v);
    layer.attention.w_out = to_double(l.w_out);
    layer.attention.b_out = to_double(l.b_out);
    layer.ln2_gain = to_double(l.ln2_gain);
    layer.ln2_bias = to_double(l.ln2_bias);
    layer.fc1_w = to_double(l.fc1_w);
    layer.fc1_b = to_double(l.fc1_b);
    layer.fc2_w = to_double(l.fc2_w);
    layer.fc2_b = to_double(l.fc2_b);
    layers_.push_back(std::move(layer));
  }
  joint_.ln_gain = to_double(weights_.post_gain);
  joint_.ln_bias = to_double(weights_.post_bias);
  joint_.proj = to_double(weights_.proj);
  text_proj_ = to_double(weights_.text_proj);
}

ToyBackbone ToyBackbone::load(const std::filesystem::path& fixture_path) {
  return ToyBackbone(read_toy_fixture(fixture_path), fixture_path.string());
}

MatrixXd ToyBackbone::patch_features(const Image& frame) const {
  const int rows = descriptor_.grid_rows, cols = descriptor_.grid_cols;
  if (frame.height % rows != 0 || frame.width % cols != 0) {
    throw InvalidInput("frame " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                       " does not tile the " + std::to_string(rows) + "x" + std::to_string(cols) + " patch grid");
  }
  const int ph = frame.height / rows, pw = frame.width / cols;
  MatrixXd features(rows * cols, 3);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::array<std::uint64_t, 3> sum{};
      for (int y = r * ph; y < (r + 1) * ph; ++y)
        for (int x = c * pw; x < (c + 1) * pw; ++x)
          for (int ch = 0; ch < 3; ++ch) sum[ch] += frame.at(x, y, ch);
      const double count = static_cast<double>(ph) * pw * 255.0;
      for (int ch = 0; ch < 3; ++ch) features(r * cols + c, ch) = 2.0 * (static_cast<double>(sum[ch]) / count) - 1.0;
    }
  }
  return features;
}

LayerTrace ToyBackbone::forward_with_trace(const FrameBatch& batch) const {
  batch.validate();
  const int t_count = batch.frame_count();
  if (descriptor_.is_video() && t_count != descriptor_.native_frame_count) {
    throw InvalidInput("video backbone expects " + std::to_string(descriptor_.native_frame_count) +
                       " frames, got " + std::to_string(t_count));
  }
  const int d = descriptor_.embed_dim, n = descriptor_.patch_count();
  const int heads = descriptor_.head_count, hd = descriptor_.head_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  LayerTrace trace;
  trace.descriptor = descriptor_;
  trace.frame_count = t_count;

  // Patch embedding runs per frame; the transformer then sees all T*N tokens.
  MatrixXd x(1 + static_cast<Index>(t_count) * n, d);
  x.row(0) = class_embed_.transpose();
  for (int t = 0; t < t_count; ++t) {
    const MatrixXd features = patch_features(batch.frames[static_cast<std::size_t>(t)]);
    MatrixXd tokens = features * patch_w_;
    tokens.rowwise() += patch_b_.transpose();
    tokens += pos_embed_;
    x.middleRows(1 + static_cast<Index>(t) * n, n) = tokens;
  }
  trace.layer_outputs.push_back(x);

  for (const auto& layer : layers_) {
    const AttentionWeights& aw = layer.attention;
    const MatrixXd a = layer_norm(x, aw.ln_gain, aw.ln_bias);
    const MatrixXd q = a * aw.w_q, k = a * aw.w_k, v = a * aw.w_v;
    MatrixXd heads_out(x.rows(), heads * hd);
    for (int h = 0; h < heads; ++h) {
      const auto qh = q.middleCols(h * hd, hd);
      const auto kh = k.middleCols(h * hd, hd);
      const MatrixXd attn = softmax_rows((qh * kh.transpose()) * scale);
      heads_out.middleCols(h * hd, hd) = attn * v.middleCols(h * hd, hd);
    }
    MatrixXd attn_out = heads_out * aw.w_out;
    attn_out.rowwise() += aw.b_out.transpose();
    const MatrixXd mid = x + attn_out;

    MatrixXd hidden = layer_norm(mid, layer.ln2_gain, layer.ln2_bias) * layer.fc1_w;
    hidden.rowwise() += layer.fc1_b.transpose();
    hidden = hidden.unaryExpr([](double v) { return quick_gelu(v); });
    MatrixXd mlp_out = hidden * layer.fc2_w;
    mlp_out.rowwise() += layer.fc2_b.transpose();

    MatrixXd residual = attn_out + mlp_out;
    x = mid + mlp_out;
    trace.pre_residual.push_back(std::move(residual));
    trace.layer_outputs.push_back(x);
    trace.attention.push_back(aw);
  }

  const int L = descriptor_.layer_count;
  trace.cls_residuals.resize(L, d);
  for (int l = 1; l <= L; ++l) trace.cls_residuals.row(l - 1) = trace.Y(l).row(0);
  trace.cls_residuals.row(0) += trace.X(0).row(0);
  trace.joint = joint_;
  return trace;
}

TextEmbedding ToyBackbone::encode_text(std::string_view prompt) const {
  if (prompt.empty()) throw InvalidInput("empty prompt");
  VectorXd histogram = VectorXd::Zero(256);
  for (unsigned char ch : prompt) histogram(ch) += 1.0;
  histogram /= static_cast<double>(prompt.size());
  return TextEmbedding{text_proj_.transpose() * histogram, std::string(prompt)};
}

}  // namespace videogem
