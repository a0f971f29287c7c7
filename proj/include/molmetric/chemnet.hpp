//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLMETRIC_CHEMNET_HPP
#define MOLMETRIC_CHEMNET_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "molmetric/error.hpp"
#include "molmetric/smiles.hpp"

namespace molmetric::chemnet {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

class ShapeError : public InputError {
 public:
  using InputError::InputError;
};

// ---------------------------------------------------------------------------
// Layer primitives. Sequences are T x C matrices, one row per time step.
// ---------------------------------------------------------------------------

inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

template <typename Scalar>
Scalar selu(Scalar x) {
  const auto lambda = static_cast<Scalar>(kSeluLambda);
  const auto alpha = static_cast<Scalar>(kSeluAlpha);
  return x > Scalar(0) ? lambda * x : lambda * alpha * std::expm1(x);
}

template <typename Derived>
void selu_inplace(Eigen::MatrixBase<Derived>& m) {
  m = m.unaryExpr([](auto x) { return selu(x); });
}

/// Stride-1 convolution with "same" zero padding.
///
/// `kernel` stores the [K x Cin x Cout] tensor as a (K * Cin) x Cout matrix
/// whose row k * Cin + i holds kernel[k, i, :]. Output row t is
/// bias + sum_{k,i} input[t + k - K/2, i] * kernel[k, i, :].
template <typename Scalar>
Matrix<Scalar> conv1d_forward(const Eigen::Ref<const Matrix<Scalar>>& input,
                              const Eigen::Ref<const Matrix<Scalar>>& kernel,
                              const Eigen::Ref<const RowVector<Scalar>>& bias) {
  const Eigen::Index t_len = input.rows();
  const Eigen::Index c_in = input.cols();
  const Eigen::Index c_out = kernel.cols();
  if (c_in == 0 || kernel.rows() % c_in != 0 || bias.size() != c_out) {
    throw ShapeError("ShapeMismatch: conv1d kernel " +
                     std::to_string(kernel.rows()) + "x" +
                     std::to_string(kernel.cols()) + " incompatible with " +
                     std::to_string(c_in) + " input channels and bias of " +
                     std::to_string(bias.size()));
  }
  const Eigen::Index k_len = kernel.rows() / c_in;
  const Eigen::Index half = k_len / 2;

  Matrix<Scalar> patches = Matrix<Scalar>::Zero(t_len, k_len * c_in);
  for (Eigen::Index k = 0; k < k_len; ++k) {
    const Eigen::Index shift = k - half;
    const Eigen::Index lo = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index hi = std::min<Eigen::Index>(t_len, t_len - shift);
    if (hi > lo) {
      patches.block(lo, k * c_in, hi - lo, c_in) =
          input.middleRows(lo + shift, hi - lo);
    }
  }
  Matrix<Scalar> out = patches * kernel;
  out.rowwise() += bias;
  return out;
}

/// out[t, c] = max over input rows [t * stride, t * stride + window).
template <typename Scalar>
Matrix<Scalar> maxpool1d(const Eigen::Ref<const Matrix<Scalar>>& input,
                         int window, int stride) {
  if (window < 1 || stride < 1 || input.rows() < window) {
    throw ShapeError("ShapeMismatch: maxpool window " + std::to_string(window) +
                     " stride " + std::to_string(stride) + " over " +
                     std::to_string(input.rows()) + " rows");
  }
  const Eigen::Index out_len = (input.rows() - window) / stride + 1;
  Matrix<Scalar> out(out_len, input.cols());
  for (Eigen::Index t = 0; t < out_len; ++t) {
    out.row(t) = input.middleRows(t * stride, window).colwise().maxCoeff();
  }
  return out;
}

/// Weights of one LSTM layer. Gate blocks along the 4H columns are ordered
/// input, forget, cell candidate, output.
template <typename Scalar>
struct LstmWeights {
  Matrix<Scalar> kernel;     // in x 4H
  Matrix<Scalar> recurrent;  // H x 4H
  RowVector<Scalar> bias;    // 4H

  Eigen::Index units() const { return recurrent.rows(); }
  Eigen::Index input_size() const { return kernel.rows(); }
};

template <typename Scalar>
struct LstmState {
  RowVector<Scalar> h;
  RowVector<Scalar> c;
};

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

template <typename Scalar>
LstmState<Scalar> lstm_step(const Eigen::Ref<const RowVector<Scalar>>& x,
                            const LstmState<Scalar>& prev,
                            const LstmWeights<Scalar>& w) {
  const Eigen::Index units = w.units();
  if (x.size() != w.input_size() || prev.h.size() != units ||
      prev.c.size() != units || w.kernel.cols() != 4 * units ||
      w.recurrent.cols() != 4 * units || w.bias.size() != 4 * units) {
    throw ShapeError("ShapeMismatch: LSTM step with input " +
                     std::to_string(x.size()) + " and " +
                     std::to_string(units) + " units");
  }
  RowVector<Scalar> z = x * w.kernel + prev.h * w.recurrent + w.bias;
  const auto gate = [&](int g) { return z.segment(g * units, units); };

  LstmState<Scalar> next;
  const RowVector<Scalar> i = gate(0).unaryExpr([](Scalar v) { return sigmoid(v); });
  const RowVector<Scalar> f = gate(1).unaryExpr([](Scalar v) { return sigmoid(v); });
  const RowVector<Scalar> g = gate(2).unaryExpr([](Scalar v) { return std::tanh(v); });
  const RowVector<Scalar> o = gate(3).unaryExpr([](Scalar v) { return sigmoid(v); });
  next.c = f.cwiseProduct(prev.c) + i.cwiseProduct(g);
  next.h = o.cwiseProduct(next.c.unaryExpr([](Scalar v) { return std::tanh(v); }));
  return next;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct Architecture {
  int vocab_size = 39;
  int max_len = smiles::kDefaultMaxLen;
  int conv1_filters = 32;
  int conv1_kernel = 9;
  int conv2_filters = 64;
  int conv2_kernel = 9;
  int pool_window = 2;
  int pool_stride = 2;
  int lstm1_units = 256;
  int lstm2_units = 512;
  int dense_units = 64;

  bool operator==(const Architecture&) const = default;
};

enum class LayerKind { kConv1d, kMaxPool1d, kLstm, kDense };

struct TensorSpec {
  std::string name;
  std::vector<std::int64_t> shape;
  std::int64_t fan_in = 1;
};

struct LayerSpec {
  LayerKind kind;
  std::string name;
  int kernel = 0;  // conv kernel or pool window
  int stride = 1;
  int units = 0;   // filters, LSTM units or dense outputs
  std::vector<TensorSpec> tensors;
};

/// conv1d, conv1d, maxpool1d, lstm, lstm, dense. Throws ShapeError for
/// non-positive dimensions.
std::vector<LayerSpec> layer_specs(const Architecture& arch);

struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;  // row-major

  std::int64_t size() const;
  bool operator==(const Tensor&) const = default;
};

class ChemNetModel {
 public:
  ChemNetModel(Architecture arch, std::map<std::string, Tensor> weights,
               smiles::Vocabulary vocab = smiles::Vocabulary::default_vocabulary());

  const Architecture& architecture() const { return arch_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::map<std::string, Tensor>& weights() const { return weights_; }
  const Tensor& tensor(const std::string& name) const;
  const smiles::Vocabulary& vocabulary() const { return vocab_; }

  int vocab_size() const { return arch_.vocab_size; }
  int max_len() const { return arch_.max_len; }
  int embedding_dim() const { return arch_.lstm2_units; }

  /// Tensor `name` viewed as a rows x cols matrix (leading dimensions
  /// flattened into rows).
  template <typename Scalar>
  Matrix<Scalar> matrix(const std::string& name) const;

  bool operator==(const ChemNetModel& other) const {
    return arch_ == other.arch_ && weights_ == other.weights_ &&
           vocab_.symbols() == other.vocab_.symbols();
  }

 private:
  Architecture arch_;
  std::vector<LayerSpec> layers_;
  std::map<std::string, Tensor> weights_;
  smiles::Vocabulary vocab_;
};

/// Stream seed for tensor `tensor_index` of layer `layer_index`.
std::uint64_t tensor_stream_seed(std::uint64_t seed, int layer_index,
                                 int tensor_index);

/// Deterministic stand-in weights: every value uniform in
/// (-1/sqrt(fan_in), 1/sqrt(fan_in)) from a splitmix64 stream per tensor.
ChemNetModel seeded_init(const Architecture& arch, std::uint64_t seed);

/// Manifest JSON plus one raw little-endian float32 payload file.
void save_model(const std::filesystem::path& manifest, const ChemNetModel& model);
ChemNetModel load_model(const std::filesystem::path& manifest);

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

struct EmbedDiagnostics {
  double max_abs_activation = 0.0;
};

/// Final hidden state of the second LSTM for each molecule.
///
/// Only the non-padding rows of each token matrix (symbols plus END) enter
/// the network; the convolutions zero-pad at both ends of that real
/// sequence. Molecules are processed in fixed-width lockstep groups so every
/// embedding is bit-identical whatever batch it arrives in.
template <typename Scalar>
class Embedder {
 public:
  explicit Embedder(const ChemNetModel& model);

  int embedding_dim() const { return static_cast<int>(h2_); }

  /// One row per input, in input order.
  Matrix<Scalar> embed(std::span<const smiles::TokenMatrix> batch,
                       EmbedDiagnostics* diag = nullptr) const;

  /// Pooled conv features of one molecule (exposed for testing).
  Matrix<Scalar> features(const smiles::TokenMatrix& tokens) const;

 private:
  void embed_group(std::span<const smiles::TokenMatrix* const> group,
                   Matrix<Scalar>& out, std::span<const Eigen::Index> rows,
                   double& max_abs) const;

  Architecture arch_;
  Matrix<Scalar> conv1_;  // (K1 * V) x F1
  RowVector<Scalar> conv1_bias_;
  Matrix<Scalar> conv2_;
  RowVector<Scalar> conv2_bias_;
  Matrix<Scalar> lstm1_;  // (F2 + H1) x 4H1, kernel stacked over recurrent
  RowVector<Scalar> lstm1_bias_;
  Matrix<Scalar> lstm2_;
  RowVector<Scalar> lstm2_bias_;
  Eigen::Index h1_ = 0;
  Eigen::Index h2_ = 0;
};

extern template class Embedder<float>;
extern template class Embedder<double>;

/// Convenience wrapper over Embedder<float>.
Matrix<float> embed(const ChemNetModel& model,
                    std::span<const smiles::TokenMatrix> batch);

/// Straightforward per-molecule evaluation built from the layer primitives.
/// Slow; used to cross-check the batched path.
template <typename Scalar>
RowVector<Scalar> reference_embedding(const ChemNetModel& model,
                                      const smiles::TokenMatrix& tokens,
                                      EmbedDiagnostics* diag = nullptr);

}  // namespace molmetric::chemnet

#endif  // MOLMETRIC_CHEMNET_HPP
