#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "locokernel/observation.hpp"

namespace locokernel {

inline constexpr int kModelDim = 64;                      // attention width d
inline constexpr int kCnnHiddenChannels = 16;             // first conv layer
inline constexpr int kCnnOutChannels = kModelDim - 7;     // 57
inline constexpr int kCnnKernel = 5;
inline constexpr int kObservationDim = kProprioDim + kModelDim;  // 112

/// Forward-pass weights for the heightmap encoder. Convolution kernels are
/// stored one output channel per row, flattened (in_channel, ki, kj)
/// row-major; projections are (out x in) with a bias vector each.
struct EncoderParams {
  Eigen::MatrixXd conv1_w;  // 16 x 25
  Eigen::VectorXd conv1_b;  // 16
  Eigen::MatrixXd conv2_w;  // 57 x (16*25)
  Eigen::VectorXd conv2_b;  // 57
  Eigen::MatrixXd proprio_w;  // 64 x 48
  Eigen::VectorXd proprio_b;  // 64
  Eigen::MatrixXd query_w, key_w, value_w, out_w;  // 64 x 64 each
  Eigen::VectorXd query_b, key_b, value_b, out_b;  // 64 each
  int heads = 4;

  /// Deterministic uniform init in +-1/sqrt(fan_in) per array; used by the
  /// tests and as a stand-in until trained weights are loaded.
  static EncoderParams seeded(std::uint64_t seed, int heads = 4);

  /// Binary container: magic `LKNW`, u32 version, u32 array count, then per
  /// array a length-prefixed name, u32 rank, u32 dims and little-endian
  /// float32 data.
  void save(const std::string& path) const;
  static EncoderParams load(const std::string& path);

  void validate() const;  // dims, finiteness, heads divides d
};

/// Two same-padded 5x5 convolutions (16 then 57 channels, ReLU between)
/// over the 17x11 heightmap; one row of 57 features per grid cell, token
/// order. Spatial dims are preserved so every cell keeps a feature vector.
Eigen::MatrixXd cnn_features(const HeightmapMatrix& heightmap, const EncoderParams& params);

/// Per-token [coords(3), cnn(57), footmap(4)] concatenation, 187 x 64.
Eigen::MatrixXd concat_tokens(const Eigen::Matrix<double, kHeightmapCells, 3>& coords,
                              const Eigen::MatrixXd& features, const Footmap& footmap);

/// Affine projection of the 48-dim proprioception to model width.
Eigen::VectorXd proprio_embed(const ProprioVector& proprio, const EncoderParams& params);

struct AttentionResult {
  Eigen::VectorXd z;             // 64
  Eigen::MatrixXd weights;       // heads x 187, rows sum to 1
  Eigen::MatrixXd head_outputs;  // heads x head_dim, pre output projection
};

/// Single-query multi-head attention over the 187 tokens, per-head softmax
/// scaled by 1/sqrt(d/heads).
AttentionResult mha_encode(const Eigen::MatrixXd& tokens, const Eigen::VectorXd& query,
                           const EncoderParams& params);

struct EncodeResult {
  Eigen::VectorXd z;        // 64-dim exteroception code
  Eigen::MatrixXd tokens;   // 187 x 64 concatenated heightmap features
  AttentionResult attention;
};

/// Full pipeline: CNN features -> token concat -> proprio query -> MHA.
EncodeResult encode(const ObservationFrame& frame, const EncoderParams& params);

}  // namespace locokernel
