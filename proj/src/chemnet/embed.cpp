//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <numeric>

#include "molmetric/chemnet.hpp"
#include "molmetric/parallel.hpp"

namespace molmetric::chemnet {
namespace {

// Molecules advance through the LSTMs in lockstep groups of this many rows.
// The group is always full (unused rows are zero) so the GEMM shapes, and
// therefore the floating-point evaluation order, never depend on the batch.
constexpr Eigen::Index kGroup = 32;

// Rows that enter the network: symbols plus END, at least one pool window.
int effective_length(const smiles::TokenMatrix& tokens, int window) {
  return std::max(tokens.length(), window);
}

template <typename Scalar>
Matrix<Scalar> stack(const Matrix<Scalar>& top, const Matrix<Scalar>& bottom) {
  Matrix<Scalar> out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : static_cast<double>(m.cwiseAbs().maxCoeff());
}

// c <- sigma(f) * c + sigma(i) * tanh(g);  h <- sigma(o) * tanh(c)
template <typename Scalar>
void lstm_gates(const Matrix<Scalar>& z, Matrix<Scalar>& c, Matrix<Scalar>& h) {
  const Eigen::Index u = c.cols();
  c.array() = z.middleCols(u, u).array().logistic() * c.array() +
              z.leftCols(u).array().logistic() * z.middleCols(2 * u, u).array().tanh();
  h.array() = z.rightCols(u).array().logistic() * c.array().tanh();
}

}  // namespace

template <typename Scalar>
Embedder<Scalar>::Embedder(const ChemNetModel& model)
    : arch_(model.architecture()),
      conv1_(model.matrix<Scalar>("conv1.kernel")),
      conv1_bias_(model.matrix<Scalar>("conv1.bias")),
      conv2_(model.matrix<Scalar>("conv2.kernel")),
      conv2_bias_(model.matrix<Scalar>("conv2.bias")),
      lstm1_(stack<Scalar>(model.matrix<Scalar>("lstm1.kernel"),
                           model.matrix<Scalar>("lstm1.recurrent_kernel"))),
      lstm1_bias_(model.matrix<Scalar>("lstm1.bias")),
      lstm2_(stack<Scalar>(model.matrix<Scalar>("lstm2.kernel"),
                           model.matrix<Scalar>("lstm2.recurrent_kernel"))),
      lstm2_bias_(model.matrix<Scalar>("lstm2.bias")),
      h1_(arch_.lstm1_units),
      h2_(arch_.lstm2_units) {}

template <typename Scalar>
Matrix<Scalar> Embedder<Scalar>::features(const smiles::TokenMatrix& tokens) const {
  if (tokens.cols() != arch_.vocab_size) {
    throw ShapeError("ShapeMismatch: token matrix has " +
                     std::to_string(tokens.cols()) + " columns, model expects " +
                     std::to_string(arch_.vocab_size));
  }
  const auto cols = tokens.columns();
  const int real = tokens.length();
  const int len = effective_length(tokens, arch_.pool_window);
  const int k1 = arch_.conv1_kernel;
  const int half = k1 / 2;
  const int vocab = arch_.vocab_size;

  // First convolution on a one-hot input is a sum of kernel rows.
  Matrix<Scalar> x1(len, arch_.conv1_filters);
  for (int t = 0; t < len; ++t) {
    x1.row(t) = conv1_bias_;
    for (int k = 0; k < k1; ++k) {
      const int src = t + k - half;
      if (src >= 0 && src < real) x1.row(t) += conv1_.row(k * vocab + cols[src]);
    }
  }
  selu_inplace(x1);
  Matrix<Scalar> x2 = conv1d_forward<Scalar>(x1, conv2_, conv2_bias_);
  selu_inplace(x2);
  return maxpool1d<Scalar>(x2, arch_.pool_window, arch_.pool_stride);
}

template <typename Scalar>
void Embedder<Scalar>::embed_group(
    std::span<const smiles::TokenMatrix* const> group, Matrix<Scalar>& out,
    std::span<const Eigen::Index> rows, double& max_abs_seen) const {
  const Eigen::Index f2 = arch_.conv2_filters;
  std::vector<Matrix<Scalar>> feats;
  feats.reserve(group.size());
  Eigen::Index steps = 0;
  for (const smiles::TokenMatrix* tokens : group) {
    feats.push_back(features(*tokens));
    max_abs_seen = std::max(max_abs_seen, max_abs(feats.back()));
    steps = std::max(steps, feats.back().rows());
  }

  Matrix<Scalar> in1 = Matrix<Scalar>::Zero(kGroup, f2 + h1_);
  Matrix<Scalar> in2 = Matrix<Scalar>::Zero(kGroup, h1_ + h2_);
  Matrix<Scalar> z1(kGroup, 4 * h1_), z2(kGroup, 4 * h2_);
  Matrix<Scalar> c1 = Matrix<Scalar>::Zero(kGroup, h1_);
  Matrix<Scalar> h1 = Matrix<Scalar>::Zero(kGroup, h1_);
  Matrix<Scalar> c2 = Matrix<Scalar>::Zero(kGroup, h2_);
  Matrix<Scalar> h2 = Matrix<Scalar>::Zero(kGroup, h2_);

  for (Eigen::Index s = 0; s < steps; ++s) {
    for (std::size_t g = 0; g < feats.size(); ++g) {
      if (s < feats[g].rows()) {
        in1.row(g).head(f2) = feats[g].row(s);
      } else {
        in1.row(g).head(f2).setZero();
      }
    }
    in1.rightCols(h1_) = h1;
    z1.noalias() = in1 * lstm1_;
    z1.rowwise() += lstm1_bias_;
    lstm_gates(z1, c1, h1);

    in2.leftCols(h1_) = h1;
    in2.rightCols(h2_) = h2;
    z2.noalias() = in2 * lstm2_;
    z2.rowwise() += lstm2_bias_;
    lstm_gates(z2, c2, h2);

    for (std::size_t g = 0; g < feats.size(); ++g) {
      if (s + 1 == feats[g].rows()) {
        out.row(rows[g]) = h2.row(static_cast<Eigen::Index>(g));
        max_abs_seen = std::max({max_abs_seen, max_abs(c1.row(g)),
                                 max_abs(c2.row(g))});
      }
    }
  }
}

template <typename Scalar>
Matrix<Scalar> Embedder<Scalar>::embed(std::span<const smiles::TokenMatrix> batch,
                                       EmbedDiagnostics* diag) const {
  const std::size_t n = batch.size();
  Matrix<Scalar> out(static_cast<Eigen::Index>(n), h2_);
  if (n == 0) return out;
  for (const smiles::TokenMatrix& t : batch) {
    if (t.cols() != arch_.vocab_size) {
      throw ShapeError("ShapeMismatch: token matrix has " +
                       std::to_string(t.cols()) + " columns, model expects " +
                       std::to_string(arch_.vocab_size));
    }
  }

  // Similar lengths share a group to limit idle lockstep steps.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return batch[a].length() > batch[b].length();
  });

  const std::size_t groups = (n + kGroup - 1) / kGroup;
  std::vector<double> peaks(groups, 0.0);
  parallel_for(groups, [&](std::size_t gi) {
    std::vector<const smiles::TokenMatrix*> members;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = gi * kGroup; i < std::min(n, (gi + 1) * kGroup); ++i) {
      members.push_back(&batch[order[i]]);
      rows.push_back(static_cast<Eigen::Index>(order[i]));
    }
    embed_group(members, out, rows, peaks[gi]);
  });

  const double peak = *std::max_element(peaks.begin(), peaks.end());
  if (!std::isfinite(peak) || !out.allFinite()) {
    throw NumericalError("NonFiniteActivation: embedding produced a non-finite value");
  }
  if (diag) diag->max_abs_activation = std::max(diag->max_abs_activation, peak);
  return out;
}

template class Embedder<float>;
template class Embedder<double>;

Matrix<float> embed(const ChemNetModel& model,
                    std::span<const smiles::TokenMatrix> batch) {
  return Embedder<float>(model).embed(batch);
}

template <typename Scalar>
RowVector<Scalar> reference_embedding(const ChemNetModel& model,
                                      const smiles::TokenMatrix& tokens,
                                      EmbedDiagnostics* diag) {
  const Architecture& a = model.architecture();
  if (tokens.cols() != a.vocab_size) {
    throw ShapeError("ShapeMismatch: token matrix has " +
                     std::to_string(tokens.cols()) + " columns, model expects " +
                     std::to_string(a.vocab_size));
  }
  const int len = effective_length(tokens, a.pool_window);
  Matrix<Scalar> x = Matrix<Scalar>::Zero(len, a.vocab_size);
  x.topRows(tokens.length()) =
      tokens.dense<Scalar>().topRows(tokens.length());

  double peak = 0.0;
  Matrix<Scalar> y = conv1d_forward<Scalar>(
      x, model.matrix<Scalar>("conv1.kernel"),
      model.matrix<Scalar>("conv1.bias"));
  peak = std::max(peak, max_abs(y));
  selu_inplace(y);
  y = conv1d_forward<Scalar>(y, model.matrix<Scalar>("conv2.kernel"),
                             model.matrix<Scalar>("conv2.bias"));
  peak = std::max(peak, max_abs(y));
  selu_inplace(y);
  y = maxpool1d<Scalar>(y, a.pool_window, a.pool_stride);

  const auto load = [&](const std::string& layer) {
    LstmWeights<Scalar> w;
    w.kernel = model.matrix<Scalar>(layer + ".kernel");
    w.recurrent = model.matrix<Scalar>(layer + ".recurrent_kernel");
    w.bias = model.matrix<Scalar>(layer + ".bias");
    return w;
  };
  const LstmWeights<Scalar> w1 = load("lstm1");
  const LstmWeights<Scalar> w2 = load("lstm2");
  LstmState<Scalar> s1{RowVector<Scalar>::Zero(a.lstm1_units),
                       RowVector<Scalar>::Zero(a.lstm1_units)};
  LstmState<Scalar> s2{RowVector<Scalar>::Zero(a.lstm2_units),
                       RowVector<Scalar>::Zero(a.lstm2_units)};
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    s1 = lstm_step<Scalar>(y.row(t), s1, w1);
    s2 = lstm_step<Scalar>(s1.h, s2, w2);
    peak = std::max({peak, max_abs(s1.c), max_abs(s2.c)});
  }
  if (diag) diag->max_abs_activation = std::max(diag->max_abs_activation, peak);
  return s2.h;
}

template RowVector<float> reference_embedding<float>(const ChemNetModel&,
                                                     const smiles::TokenMatrix&,
                                                     EmbedDiagnostics*);
template RowVector<double> reference_embedding<double>(const ChemNetModel&,
                                                       const smiles::TokenMatrix&,
                                                       EmbedDiagnostics*);

}  // namespace molmetric::chemnet
