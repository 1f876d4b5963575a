#pragma once

#include <span>

#include "protosed/tensor.hpp"

namespace protosed {

enum class Mode { kTrain, kEval };

// ---- elementwise / reductions ----------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);
Tensor sum(const Tensor& a);
/// Elementwise mean of same-shape tensors (prototype averaging).
Tensor mean_of(std::span<const Tensor> tensors);

// ---- activations ------------------------------------------------------------

/// x >= 0 -> x, x < 0 -> slope*x. The derivative at exactly 0 is taken from
/// the positive branch (1).
Tensor leaky_relu(const Tensor& x, float slope);
Tensor sigmoid(const Tensor& x);

// ---- convolution / pooling / linear ------------------------------------------

Shape conv2d_output_shape(const Shape& input, const Shape& kernel, int stride, int padding);
Shape conv1d_output_shape(const Shape& input, const Shape& kernel, int stride, int padding);
Shape avg_pool2d_output_shape(const Shape& input, int k);

/// Cross-correlation (no kernel flip): input [C_in,H,W], kernel
/// [C_out,C_in,kh,kw], bias [C_out]. Output [C_out,H',W'] with
/// H' = floor((H + 2*padding - kh)/stride) + 1.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride = 1, int padding = 0);

/// 1-D analogue: input [C_in,T], kernel [C_out,C_in,k], bias [C_out].
Tensor conv1d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride = 1, int padding = 0);

/// Per-channel mean over all remaining axes: [C,H,W] -> [C].
Tensor global_avg_pool(const Tensor& x);
/// [C,T] -> [C].
Tensor global_avg_pool1d(const Tensor& x);

/// Non-overlapping k x k window means; trailing remainder rows/cols dropped.
Tensor avg_pool2d(const Tensor& x, int k);

/// weight [M,N] * x [N] + bias [M] -> [M].
Tensor fully_connected(const Tensor& x, const Tensor& weight, const Tensor& bias);

// ---- broadcast scaling (squeeze-excitation recalibration) --------------------

/// out[c,i,j] = s[c] * x[c,i,j]
Tensor channel_scale(const Tensor& x, const Tensor& s);
/// out[c,i,j] = s[0,i,j] * x[c,i,j]
Tensor spatial_scale(const Tensor& x, const Tensor& s);

/// [C,H,W] -> [C*W, H]: fuses channel and frequency axes, keeps time (H) as
/// the sequence axis for the 1-D projection head.
Tensor fuse_channel_freq(const Tensor& x);

// ---- batch normalization ------------------------------------------------------

/// Affine parameters plus persistent running statistics, all shape [C].
/// Train mode normalizes each channel over the remaining axes of the input
/// and updates the running stats in place; eval mode normalizes with the
/// running stats.
struct BatchNormState {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  float momentum = 0.1f;
  float eps = 1e-5f;
};

/// Fresh state for C channels: gamma=1, beta=0, running stats (0, 1).
BatchNormState make_batchnorm_state(int channels, float momentum = 0.1f, float eps = 1e-5f);

Tensor batchnorm(const Tensor& x, BatchNormState& bn, Mode mode);

// ---- metric head ---------------------------------------------------------------

/// Euclidean distances from one query embedding to each prototype, in
/// prototype order: out[p] = sqrt(sum_i (q_i - proto_p_i)^2).
Tensor pairwise_dist(const Tensor& query, std::span<const Tensor> prototypes);

/// Cross-entropy of softmax over negated distances (optionally squared)
/// against the target index.
Tensor proto_cross_entropy(const Tensor& distances, int target, bool squared = false);

}  // namespace protosed
