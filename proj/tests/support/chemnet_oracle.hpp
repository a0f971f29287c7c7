//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLMETRIC_TESTS_CHEMNET_ORACLE_HPP
#define MOLMETRIC_TESTS_CHEMNET_ORACLE_HPP

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "molmetric/chemnet.hpp"
#include "support/oracles.hpp"

namespace molmetric::testing {

using chemnet::Architecture;
using chemnet::ChemNetModel;
using chemnet::Tensor;
using smiles::one_hot_encode;
using smiles::TokenMatrix;
using smiles::Vocabulary;

inline Architecture small_arch() {
  Architecture a;
  a.conv1_filters = 4;
  a.conv1_kernel = 3;
  a.conv2_filters = 5;
  a.conv2_kernel = 5;
  a.lstm1_units = 6;
  a.lstm2_units = 7;
  a.dense_units = 3;
  a.max_len = 40;
  return a;
}

inline std::vector<double> tensor_values(const ChemNetModel& m, const std::string& name) {
  const Tensor& t = m.tensor(name);
  return {t.data.begin(), t.data.end()};
}

inline std::vector<TokenMatrix> encode(const std::vector<std::string>& smiles, int max_len) {
  std::vector<TokenMatrix> out;
  for (const std::string& s : smiles) {
    out.push_back(one_hot_encode(s, Vocabulary::default_vocabulary(), max_len));
  }
  return out;
}

inline double selu_oracle(double x) {
  return x > 0 ? 1.0507009873554805 * x
               : 1.0507009873554805 * 1.6732632423543772 * (std::exp(x) - 1);
}

// Whole forward pass with the loop oracles.
inline std::vector<double> embedding_oracle(const ChemNetModel& m, const TokenMatrix& tokens) {
  const Architecture& a = m.architecture();
  const int len = std::max(tokens.length(), a.pool_window);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(len, a.vocab_size);
  for (int r = 0; r < tokens.length(); ++r) x(r, tokens.columns()[r]) = 1.0;

  auto conv = [&](const Eigen::MatrixXd& in, const std::string& name, int k) {
    Eigen::MatrixXd y = conv1d_oracle(in, tensor_values(m, name + ".kernel"),
                                      tensor_values(m, name + ".bias"), k);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = selu_oracle(y(i));
    return y;
  };
  const Eigen::MatrixXd y2 = conv(conv(x, "conv1", a.conv1_kernel), "conv2", a.conv2_kernel);
  const int steps = (len - a.pool_window) / a.pool_stride + 1;

  auto weights = [&](const std::string& name) {
    return std::tuple{m.matrix<double>(name + ".kernel"),
                      m.matrix<double>(name + ".recurrent_kernel"),
                      Eigen::RowVectorXd(m.matrix<double>(name + ".bias"))};
  };
  const auto [w1, u1, b1] = weights("lstm1");
  const auto [w2, u2, b2] = weights("lstm2");
  std::vector<double> h1(a.lstm1_units, 0.0), c1(a.lstm1_units, 0.0);
  std::vector<double> h2(a.lstm2_units, 0.0), c2(a.lstm2_units, 0.0);
  for (int t = 0; t < steps; ++t) {
    std::vector<double> pooled(y2.cols(), -INFINITY);
    for (int w = 0; w < a.pool_window; ++w) {
      for (Eigen::Index c = 0; c < y2.cols(); ++c) {
        pooled[c] = std::max(pooled[c], y2(t * a.pool_stride + w, c));
      }
    }
    lstm_step_oracle(pooled, h1, c1, w1, u1, b1);
    lstm_step_oracle(h1, h2, c2, w2, u2, b2);
  }
  return h2;
}

}  // namespace molmetric::testing

#endif  // MOLMETRIC_TESTS_CHEMNET_ORACLE_HPP
