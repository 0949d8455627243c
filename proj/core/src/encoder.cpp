#include "locokernel/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace locokernel {

namespace {

constexpr int kPad = kCnnKernel / 2;

Eigen::MatrixXd seeded_matrix(Rng& rng, int rows, int cols) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  return m;
}

Eigen::VectorXd seeded_vector(Rng& rng, int n, double bound) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(-bound, bound);
  return v;
}

// One same-padded stride-1 convolution layer. `input` holds one row of
// in_channels values per grid cell (token order); kernels are flattened
// (in_channel, ki, kj) row-major per output channel.
Eigen::MatrixXd conv_layer(const Eigen::MatrixXd& input, const Eigen::MatrixXd& weights,
                           const Eigen::VectorXd& bias, bool relu) {
  const int in_channels = static_cast<int>(input.cols());
  const int out_channels = static_cast<int>(weights.rows());
  Eigen::MatrixXd out(kHeightmapCells, out_channels);
  for (int r = 0; r < kHeightmapRows; ++r) {
    for (int c = 0; c < kHeightmapCols; ++c) {
      for (int o = 0; o < out_channels; ++o) {
        double acc = bias(o);
        for (int ch = 0; ch < in_channels; ++ch) {
          for (int ki = 0; ki < kCnnKernel; ++ki) {
            const int ri = r + ki - kPad;
            if (ri < 0 || ri >= kHeightmapRows) continue;
            for (int kj = 0; kj < kCnnKernel; ++kj) {
              const int cj = c + kj - kPad;
              if (cj < 0 || cj >= kHeightmapCols) continue;
              const int w_idx = (ch * kCnnKernel + ki) * kCnnKernel + kj;
              acc += weights(o, w_idx) * input(token_index(ri, cj), ch);
            }
          }
        }
        out(token_index(r, c), o) = relu ? std::max(0.0, acc) : acc;
      }
    }
  }
  return out;
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " contains non-finite values");
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("parameter file truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

float read_f32(std::istream& in) {
  const std::uint32_t bits = read_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void write_array(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
  write_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  if (m.cols() == 1) {
    write_u32(out, 1);
    write_u32(out, static_cast<std::uint32_t>(m.rows()));
  } else {
    write_u32(out, 2);
    write_u32(out, static_cast<std::uint32_t>(m.rows()));
    write_u32(out, static_cast<std::uint32_t>(m.cols()));
  }
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) write_f32(out, static_cast<float>(m(r, c)));
}

struct NamedArray {
  std::string name;
  Eigen::MatrixXd data;
};

NamedArray read_array(std::istream& in) {
  NamedArray a;
  const std::uint32_t name_len = read_u32(in);
  if (name_len > 256) throw std::runtime_error("parameter array name too long");
  a.name.resize(name_len);
  if (!in.read(a.name.data(), name_len)) throw std::runtime_error("parameter file truncated");
  const std::uint32_t rank = read_u32(in);
  if (rank < 1 || rank > 2) throw std::runtime_error("unsupported parameter array rank");
  const std::uint32_t rows = read_u32(in);
  const std::uint32_t cols = rank == 2 ? read_u32(in) : 1;
  if (rows == 0 || cols == 0 || static_cast<std::uint64_t>(rows) * cols > (1u << 26))
    throw std::runtime_error("parameter array dimensions out of range");
  a.data.resize(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) a.data(r, c) = read_f32(in);
  return a;
}

constexpr std::uint32_t kParamsVersion = 1;
constexpr char kParamsMagic[4] = {'L', 'K', 'N', 'W'};

}  // namespace

EncoderParams EncoderParams::seeded(std::uint64_t seed, int heads) {
  Rng rng(seed);
  EncoderParams p;
  p.heads = heads;
  p.conv1_w = seeded_matrix(rng, kCnnHiddenChannels, kCnnKernel * kCnnKernel);
  p.conv1_b = seeded_vector(rng, kCnnHiddenChannels, 0.2);
  p.conv2_w = seeded_matrix(rng, kCnnOutChannels, kCnnHiddenChannels * kCnnKernel * kCnnKernel);
  p.conv2_b = seeded_vector(rng, kCnnOutChannels, 0.05);
  p.proprio_w = seeded_matrix(rng, kModelDim, kProprioDim);
  p.proprio_b = seeded_vector(rng, kModelDim, 0.1);
  p.query_w = seeded_matrix(rng, kModelDim, kModelDim);
  p.query_b = seeded_vector(rng, kModelDim, 0.1);
  p.key_w = seeded_matrix(rng, kModelDim, kModelDim);
  p.key_b = seeded_vector(rng, kModelDim, 0.1);
  p.value_w = seeded_matrix(rng, kModelDim, kModelDim);
  p.value_b = seeded_vector(rng, kModelDim, 0.1);
  p.out_w = seeded_matrix(rng, kModelDim, kModelDim);
  p.out_b = seeded_vector(rng, kModelDim, 0.1);
  p.validate();
  return p;
}

void EncoderParams::validate() const {
  auto expect = [](const Eigen::MatrixXd& m, int rows, int cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols)
      throw std::invalid_argument(std::string("encoder parameter ") + name + " has wrong shape");
    if (!m.allFinite())
      throw std::invalid_argument(std::string("encoder parameter ") + name + " is not finite");
  };
  expect(conv1_w, kCnnHiddenChannels, kCnnKernel * kCnnKernel, "conv1_w");
  expect(conv1_b, kCnnHiddenChannels, 1, "conv1_b");
  expect(conv2_w, kCnnOutChannels, kCnnHiddenChannels * kCnnKernel * kCnnKernel, "conv2_w");
  expect(conv2_b, kCnnOutChannels, 1, "conv2_b");
  expect(proprio_w, kModelDim, kProprioDim, "proprio_w");
  expect(proprio_b, kModelDim, 1, "proprio_b");
  expect(query_w, kModelDim, kModelDim, "query_w");
  expect(key_w, kModelDim, kModelDim, "key_w");
  expect(value_w, kModelDim, kModelDim, "value_w");
  expect(out_w, kModelDim, kModelDim, "out_w");
  expect(query_b, kModelDim, 1, "query_b");
  expect(key_b, kModelDim, 1, "key_b");
  expect(value_b, kModelDim, 1, "value_b");
  expect(out_b, kModelDim, 1, "out_b");
  if (heads < 1 || kModelDim % heads != 0)
    throw std::invalid_argument("head count must divide the model width");
}

void EncoderParams::save(const std::string& path) const {
  validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open parameter file for writing: " + path);
  out.write(kParamsMagic, 4);
  write_u32(out, kParamsVersion);
  write_u32(out, static_cast<std::uint32_t>(heads));
  write_u32(out, 14);
  write_array(out, "conv1_w", conv1_w);
  write_array(out, "conv1_b", conv1_b);
  write_array(out, "conv2_w", conv2_w);
  write_array(out, "conv2_b", conv2_b);
  write_array(out, "proprio_w", proprio_w);
  write_array(out, "proprio_b", proprio_b);
  write_array(out, "query_w", query_w);
  write_array(out, "query_b", query_b);
  write_array(out, "key_w", key_w);
  write_array(out, "key_b", key_b);
  write_array(out, "value_w", value_w);
  write_array(out, "value_b", value_b);
  write_array(out, "out_w", out_w);
  write_array(out, "out_b", out_b);
  if (!out) throw std::runtime_error("error writing parameter file: " + path);
}

EncoderParams EncoderParams::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open parameter file: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kParamsMagic, 4) != 0)
    throw std::runtime_error("not a parameter file (bad magic): " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kParamsVersion) throw std::runtime_error("unsupported parameter file version");
  EncoderParams p;
  p.heads = static_cast<int>(read_u32(in));
  const std::uint32_t count = read_u32(in);
  auto as_vector = [](const NamedArray& a) -> Eigen::VectorXd {
    if (a.data.cols() != 1) throw std::runtime_error("parameter " + a.name + " must be rank 1");
    return a.data.col(0);
  };
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a = read_array(in);
    if (a.name == "conv1_w") p.conv1_w = a.data;
    else if (a.name == "conv1_b") p.conv1_b = as_vector(a);
    else if (a.name == "conv2_w") p.conv2_w = a.data;
    else if (a.name == "conv2_b") p.conv2_b = as_vector(a);
    else if (a.name == "proprio_w") p.proprio_w = a.data;
    else if (a.name == "proprio_b") p.proprio_b = as_vector(a);
    else if (a.name == "query_w") p.query_w = a.data;
    else if (a.name == "query_b") p.query_b = as_vector(a);
    else if (a.name == "key_w") p.key_w = a.data;
    else if (a.name == "key_b") p.key_b = as_vector(a);
    else if (a.name == "value_w") p.value_w = a.data;
    else if (a.name == "value_b") p.value_b = as_vector(a);
    else if (a.name == "out_w") p.out_w = a.data;
    else if (a.name == "out_b") p.out_b = as_vector(a);
    else throw std::runtime_error("unknown parameter array: " + a.name);
  }
  p.validate();
  return p;
}

Eigen::MatrixXd cnn_features(const HeightmapMatrix& heightmap, const EncoderParams& params) {
  Eigen::MatrixXd input(kHeightmapCells, 1);
  for (int r = 0; r < kHeightmapRows; ++r)
    for (int c = 0; c < kHeightmapCols; ++c) input(token_index(r, c), 0) = heightmap(r, c);
  check_finite(input, "heightmap");
  const Eigen::MatrixXd hidden = conv_layer(input, params.conv1_w, params.conv1_b, true);
  return conv_layer(hidden, params.conv2_w, params.conv2_b, false);
}

Eigen::MatrixXd concat_tokens(const Eigen::Matrix<double, kHeightmapCells, 3>& coords,
                              const Eigen::MatrixXd& features, const Footmap& footmap) {
  if (features.rows() != kHeightmapCells || features.cols() != kCnnOutChannels)
    throw std::invalid_argument("feature grid has wrong shape");
  Eigen::MatrixXd tokens(kHeightmapCells, kModelDim);
  tokens.leftCols<3>() = coords;
  tokens.middleCols(3, kCnnOutChannels) = features;
  for (int r = 0; r < kHeightmapRows; ++r)
    for (int c = 0; c < kHeightmapCols; ++c)
      for (int k = 0; k < kFootCount; ++k)
        tokens(token_index(r, c), 3 + kCnnOutChannels + k) = footmap.channels[k](r, c);
  return tokens;
}

Eigen::VectorXd proprio_embed(const ProprioVector& proprio, const EncoderParams& params) {
  if (!proprio.allFinite()) throw std::invalid_argument("proprioception is not finite");
  return params.proprio_w * proprio + params.proprio_b;
}

AttentionResult mha_encode(const Eigen::MatrixXd& tokens, const Eigen::VectorXd& query,
                           const EncoderParams& params) {
  if (tokens.rows() != kHeightmapCells || tokens.cols() != kModelDim)
    throw std::invalid_argument("token grid must be 187 x 64");
  if (query.size() != kModelDim) throw std::invalid_argument("query must have length 64");
  check_finite(tokens, "tokens");
  check_finite(query, "query");

  const int head_dim = kModelDim / params.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  const Eigen::VectorXd q = params.query_w * query + params.query_b;
  const Eigen::MatrixXd k =
      (tokens * params.key_w.transpose()).rowwise() + params.key_b.transpose();
  const Eigen::MatrixXd v =
      (tokens * params.value_w.transpose()).rowwise() + params.value_b.transpose();

  AttentionResult result;
  result.weights.resize(params.heads, kHeightmapCells);
  result.head_outputs.resize(params.heads, head_dim);
  Eigen::VectorXd concat(kModelDim);
  for (int h = 0; h < params.heads; ++h) {
    const auto q_h = q.segment(h * head_dim, head_dim);
    const auto k_h = k.middleCols(h * head_dim, head_dim);
    const auto v_h = v.middleCols(h * head_dim, head_dim);
    Eigen::VectorXd logits = scale * (k_h * q_h);
    const double max_logit = logits.maxCoeff();
    Eigen::VectorXd w = (logits.array() - max_logit).exp();
    w /= w.sum();
    result.weights.row(h) = w.transpose();
    const Eigen::VectorXd head_out = v_h.transpose() * w;
    result.head_outputs.row(h) = head_out.transpose();
    concat.segment(h * head_dim, head_dim) = head_out;
  }
  result.z = params.out_w * concat + params.out_b;
  return result;
}

EncodeResult encode(const ObservationFrame& frame, const EncoderParams& params) {
  params.validate();
  EncodeResult result;
  const Eigen::MatrixXd features = cnn_features(frame.heightmap.values, params);
  result.tokens = concat_tokens(cell_coords_3d(frame.heightmap), features, frame.footmap);
  const Eigen::VectorXd query = proprio_embed(frame.proprio, params);
  result.attention = mha_encode(result.tokens, query, params);
  result.z = result.attention.z;
  return result;
}

}  // namespace locokernel
