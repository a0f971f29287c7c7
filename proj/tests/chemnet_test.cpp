//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "molmetric/chemnet.hpp"
#include "support/chemnet_oracle.hpp"
#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace molmetric;
using namespace molmetric::chemnet;
using smiles::one_hot_encode;
using smiles::TokenMatrix;
using smiles::Vocabulary;
using testing::embedding_oracle;
using testing::encode;
using testing::selu_oracle;
using testing::small_arch;

namespace {

std::filesystem::path temp_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "molmetric_chemnet_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string error_of(const std::filesystem::path& manifest) {
  try {
    load_model(manifest);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("chemnet") {

TEST_CASE("selu") {
  CHECK(selu(0.0) == 0.0);
  CHECK(selu(1.0) == doctest::Approx(1.0507009873554805).epsilon(1e-15));
  CHECK(std::abs(selu(-50.0) + kSeluLambda * kSeluAlpha) <= 1e-6);
  CHECK(-kSeluLambda * kSeluAlpha == doctest::Approx(-1.7581).epsilon(1e-4));
  SplitMix64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const double x = 10 * (rng.uniform_open() - 0.5);
    CHECK(std::abs(selu(x) - selu_oracle(x)) <= 1e-12);
  }
}

TEST_CASE("conv1d examples") {
  SplitMix64 rng(2);
  const Eigen::MatrixXd in = testing::normal_matrix(6, 3, rng);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  CHECK(conv1d_forward<double>(in, id, Eigen::RowVectorXd::Zero(3)) == in);

  Eigen::RowVectorXd b(2);
  b << 0.5, -2.0;
  const Eigen::MatrixXd out = conv1d_forward<double>(in, Eigen::MatrixXd::Zero(9, 2), b);
  for (Eigen::Index t = 0; t < 6; ++t) CHECK(out.row(t) == b);

  CHECK_THROWS_AS(conv1d_forward<double>(in, Eigen::MatrixXd::Zero(8, 2), b), ShapeError);
  CHECK_THROWS_AS(conv1d_forward<double>(in, Eigen::MatrixXd::Zero(9, 2),
                                         Eigen::RowVectorXd::Zero(3)),
                  ShapeError);
}

TEST_CASE("conv1d matches the loop oracle") {
  SplitMix64 rng(3);
  struct Shape { int t, c_in, c_out, k; };
  for (const Shape s : {Shape{4, 1, 1, 3}, Shape{7, 3, 5, 5}, Shape{2, 4, 2, 9},
                        Shape{12, 6, 3, 1}, Shape{5, 2, 2, 4}}) {
    const Eigen::MatrixXd in = testing::normal_matrix(s.t, s.c_in, rng);
    std::vector<double> kernel(static_cast<std::size_t>(s.k * s.c_in * s.c_out));
    for (double& v : kernel) v = testing::normal(rng);
    std::vector<double> bias(static_cast<std::size_t>(s.c_out));
    for (double& v : bias) v = testing::normal(rng);
    Eigen::MatrixXd km(s.k * s.c_in, s.c_out);
    for (int r = 0; r < km.rows(); ++r) {
      for (int c = 0; c < s.c_out; ++c) km(r, c) = kernel[r * s.c_out + c];
    }
    const Eigen::RowVectorXd bv = Eigen::Map<Eigen::RowVectorXd>(bias.data(), s.c_out);
    const Eigen::MatrixXd got = conv1d_forward<double>(in, km, bv);
    const Eigen::MatrixXd want = testing::conv1d_oracle(in, kernel, bias, s.k);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("maxpool1d") {
  Eigen::MatrixXd in(4, 1);
  in << 1, 3, 2, 5;
  CHECK(maxpool1d<double>(in, 1, 1) == in);
  const Eigen::MatrixXd p = maxpool1d<double>(in, 2, 2);
  REQUIRE(p.rows() == 2);
  CHECK(p(0, 0) == 3);
  CHECK(p(1, 0) == 5);
  const Eigen::MatrixXd c = maxpool1d<double>(Eigen::MatrixXd::Constant(9, 2, 0.25), 3, 2);
  CHECK(c.rows() == 4);
  CHECK((c.array() == 0.25).all());
  CHECK_THROWS_AS(maxpool1d<double>(in, 5, 1), ShapeError);
  CHECK_THROWS_AS(maxpool1d<double>(in, 0, 1), ShapeError);
}

TEST_CASE("lstm_step examples") {
  LstmWeights<double> w{Eigen::MatrixXd::Zero(3, 8), Eigen::MatrixXd::Zero(2, 8),
                        Eigen::RowVectorXd::Zero(8)};
  const LstmState<double> zero{Eigen::RowVectorXd::Zero(2), Eigen::RowVectorXd::Zero(2)};
  const LstmState<double> s = lstm_step<double>(Eigen::RowVectorXd::Zero(3), zero, w);
  CHECK(s.h.isZero(0.0));
  CHECK(s.c.isZero(0.0));

  // Input gate shut, forget gate open: the cell state carries over.
  w.bias.segment(0, 2).setConstant(-50);
  w.bias.segment(2, 2).setConstant(50);
  SplitMix64 rng(4);
  w.kernel = testing::normal_matrix(3, 8, rng);
  const LstmState<double> prev{Eigen::RowVectorXd::Zero(2), Eigen::RowVector2d(0.7, -1.3)};
  const LstmState<double> carried =
      lstm_step<double>(Eigen::RowVector3d(0.1, 0.2, -0.1), prev, w);
  CHECK((carried.c - prev.c).cwiseAbs().maxCoeff() <= 1e-6);

  CHECK_THROWS_AS(lstm_step<double>(Eigen::RowVectorXd::Zero(4), zero, w), ShapeError);
}

TEST_CASE("lstm_step matches the scalar oracle") {
  SplitMix64 rng(5);
  for (int units : {1, 2, 5}) {
    const int in = 3;
    LstmWeights<double> w{testing::normal_matrix(in, 4 * units, rng),
                          testing::normal_matrix(units, 4 * units, rng),
                          testing::normal_matrix(1, 4 * units, rng)};
    std::vector<double> x(in), h(units), c(units);
    for (double& v : x) v = testing::normal(rng);
    for (double& v : h) v = testing::normal(rng);
    for (double& v : c) v = testing::normal(rng);
    const LstmState<double> prev{Eigen::Map<Eigen::RowVectorXd>(h.data(), units),
                                 Eigen::Map<Eigen::RowVectorXd>(c.data(), units)};
    const LstmState<double> got =
        lstm_step<double>(Eigen::Map<Eigen::RowVectorXd>(x.data(), in), prev, w);
    testing::lstm_step_oracle(x, h, c, w.kernel, w.recurrent, w.bias);
    for (int j = 0; j < units; ++j) {
      CHECK(std::abs(got.h(j) - h[j]) <= 1e-12);
      CHECK(std::abs(got.c(j) - c[j]) <= 1e-12);
    }
  }
}

TEST_CASE("layer specs") {
  const auto layers = layer_specs(Architecture{});
  REQUIRE(layers.size() == 6);
  CHECK(layers[0].kind == LayerKind::kConv1d);
  CHECK(layers[1].kind == LayerKind::kConv1d);
  CHECK(layers[2].kind == LayerKind::kMaxPool1d);
  CHECK(layers[3].kind == LayerKind::kLstm);
  CHECK(layers[4].kind == LayerKind::kLstm);
  CHECK(layers[5].kind == LayerKind::kDense);
  CHECK(layers[0].tensors[0].shape == std::vector<std::int64_t>{9, 39, 32});
  CHECK(layers[1].tensors[0].shape == std::vector<std::int64_t>{9, 32, 64});
  CHECK(layers[3].tensors[0].shape == std::vector<std::int64_t>{64, 1024});
  CHECK(layers[4].tensors[1].shape == std::vector<std::int64_t>{512, 2048});
  CHECK(layers[5].tensors[0].shape == std::vector<std::int64_t>{512, 64});
  Architecture bad;
  bad.lstm1_units = 0;
  CHECK_THROWS_AS(layer_specs(bad), ShapeError);
}

TEST_CASE("seeded_init") {
  const Architecture a = small_arch();
  CHECK(seeded_init(a, 9) == seeded_init(a, 9));
  CHECK_FALSE(seeded_init(a, 9) == seeded_init(a, 10));
  const ChemNetModel m = seeded_init(Architecture{}, 7);
  CHECK(m.embedding_dim() == 512);
  for (const LayerSpec& layer : m.layers()) {
    for (const TensorSpec& spec : layer.tensors) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
      for (float v : m.tensor(spec.name).data) {
        CHECK_MESSAGE(std::abs(v) < bound * (1 + 1e-6), spec.name);
        if (std::abs(v) >= bound * (1 + 1e-6)) break;
      }
    }
  }
}

TEST_CASE("seeded_init first draw") {
  // fan_in of conv1.kernel is K * vocab = 1 * 32.
  Architecture a = small_arch();
  a.conv1_kernel = 1;
  a.vocab_size = 32;
  const ChemNetModel m = seeded_init(a, 0);
  // First output of splitmix64 started at 0, top 53 bits centred in their
  // interval, mapped from (0, 1) onto (-1/sqrt(32), 1/sqrt(32)).
  const std::uint64_t first = 0xE220A8397B1DCDAFULL;
  const double u = (static_cast<double>(first >> 11) + 0.5) / 9007199254740992.0;
  const float expected = static_cast<float>((2 * u - 1) / std::sqrt(32.0));
  CHECK(m.tensor("conv1.kernel").data[0] == expected);
  CHECK(expected == doctest::Approx(0.1355).epsilon(1e-3));
}

TEST_CASE("save and load round trip") {
  const auto dir = temp_dir("roundtrip");
  const ChemNetModel m = seeded_init(small_arch(), 3);
  save_model(dir / "model.json", m);
  CHECK(load_model(dir / "model.json") == m);
  CHECK(std::filesystem::exists(dir / "model.weights.bin"));
}

TEST_CASE("load_model rejects damaged files") {
  const auto dir = temp_dir("damaged");
  const ChemNetModel m = seeded_init(small_arch(), 3);
  const auto manifest = dir / "model.json";
  const auto payload = dir / "model.weights.bin";

  save_model(manifest, m);
  const auto size = std::filesystem::file_size(payload);
  std::filesystem::resize_file(payload, size - 4);
  CHECK(error_of(manifest).rfind("CorruptFile", 0) == 0);

  save_model(manifest, m);
  { std::ofstream(payload, std::ios::app | std::ios::binary) << "xxxx"; }
  CHECK(error_of(manifest).rfind("CorruptFile", 0) == 0);

  save_model(manifest, m);
  nlohmann::json j;
  std::ifstream(manifest) >> j;
  auto& tensors = j["tensors"];
  for (auto it = tensors.begin(); it != tensors.end(); ++it) {
    if ((*it)["name"] == "dense.bias") {
      tensors.erase(it);
      break;
    }
  }
  std::ofstream(dir / "missing.json") << j.dump();
  std::filesystem::copy_file(payload, dir / "missing.weights.bin");
  CHECK(error_of(dir / "missing.json") == "MissingTensor: dense.bias");

  std::ifstream(manifest) >> j;
  j["tensors"][0]["shape"] = {3, 39, 5};
  std::ofstream(dir / "shape.json") << j.dump();
  CHECK_THROWS_AS(load_model(dir / "shape.json"), ShapeError);

  std::ifstream(manifest) >> j;
  j["tensors"][1]["byte_offset"] = 0;
  std::ofstream(dir / "overlap.json") << j.dump();
  CHECK(error_of(dir / "overlap.json").rfind("CorruptFile", 0) == 0);

  std::ofstream(dir / "garbage.json") << "{ not json";
  CHECK(error_of(dir / "garbage.json").rfind("CorruptFile", 0) == 0);
  CHECK(error_of(dir / "absent.json").rfind("UnreadableFile", 0) == 0);
}

TEST_CASE("embedding shape and determinism") {
  const ChemNetModel m = seeded_init(Architecture{}, 7);
  const auto batch = encode({"CCO", "CCO", "c1ccccc1C(=O)O"}, m.max_len());
  const Matrix<float> e = embed(m, batch);
  CHECK(e.rows() == 3);
  CHECK(e.cols() == m.embedding_dim());
  CHECK(e.row(0) == e.row(1));
  CHECK(e.row(0) != e.row(2));
  CHECK(embed(m, batch) == e);
}

TEST_CASE("batch partition invariance") {
  const ChemNetModel m = seeded_init(Architecture{}, 7);
  const auto batch = encode(testing::corpus_smiles(70, 3), m.max_len());
  const Embedder<float> embedder(m);
  const Matrix<float> all = embedder.embed(batch);
  for (std::size_t i : {0, 1, 33, 69}) {
    const Matrix<float> one = embedder.embed(std::span(batch).subspan(i, 1));
    CHECK(std::memcmp(one.data(), all.row(i).eval().data(), sizeof(float) * one.size()) == 0);
  }
  const Matrix<float> pair = embedder.embed(std::span(batch).subspan(10, 2));
  CHECK(pair.row(0) == all.row(10));
  CHECK(pair.row(1) == all.row(11));
  set_num_threads(1);
  CHECK(embedder.embed(batch) == all);
  set_num_threads(0);
}

TEST_CASE("padding invariance") {
  const ChemNetModel m = seeded_init(Architecture{}, 7);
  const Embedder<float> embedder(m);
  for (const char* s : {"C", "CC(=O)Nc1ccc(O)cc1", "CCCCCCCCCCCCCCCCCCCCCCCC"}) {
    const TokenMatrix t = one_hot_encode(s, m.vocabulary(), 60);
    const std::vector<TokenMatrix> a{t};
    const std::vector<TokenMatrix> b{t.padded(290)};
    CHECK(embedder.embed(a) == embedder.embed(b));
  }
  CHECK_THROWS_AS(embedder.embed(std::vector<TokenMatrix>{TokenMatrix({0}, 5, 12)}),
                  ShapeError);
}

TEST_CASE("batched path matches the loop oracle in double precision") {
  const ChemNetModel m = seeded_init(small_arch(), 11);
  const Embedder<double> embedder(m);
  const auto batch = encode({"C", "CCO", "CC(=O)Nc1ccc(O)cc1", "O=C(O)c1ccccc1OC(C)=O",
                             "C1CC2CCC1CC2", "N#Cc1ccc(Cl)cc1Br"},
                            m.max_len());
  const Matrix<double> got = embedder.embed(batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::vector<double> want = embedding_oracle(m, batch[i]);
    const RowVector<double> ref = reference_embedding<double>(m, batch[i]);
    for (int j = 0; j < m.embedding_dim(); ++j) {
      CHECK(std::abs(got(static_cast<Eigen::Index>(i), j) - want[j]) <= 1e-12);
      CHECK(std::abs(ref(j) - want[j]) <= 1e-12);
    }
  }
}

TEST_CASE("pooled features match the dense convolution path") {
  const ChemNetModel m = seeded_init(Architecture{}, 7);
  const Embedder<double> embedder(m);
  const TokenMatrix t = one_hot_encode("CC(=O)Nc1ccc(O)cc1", m.vocabulary(), m.max_len());
  const Matrix<double> x = t.dense<double>().topRows(t.length());
  Matrix<double> y = conv1d_forward<double>(x, m.matrix<double>("conv1.kernel"),
                                            m.matrix<double>("conv1.bias"));
  selu_inplace(y);
  y = conv1d_forward<double>(y, m.matrix<double>("conv2.kernel"), m.matrix<double>("conv2.bias"));
  selu_inplace(y);
  y = maxpool1d<double>(y, 2, 2);
  CHECK((embedder.features(t) - y).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("float path stays close to the double path") {
  const ChemNetModel m = seeded_init(Architecture{}, 7);
  const auto batch = encode(testing::corpus_smiles(8, 5), m.max_len());
  const Matrix<float> f = Embedder<float>(m).embed(batch);
  const Matrix<double> d = Embedder<double>(m).embed(batch);
  CHECK((f.cast<double>() - d).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("activations stay bounded on corpus molecules") {
  const ChemNetModel m = seeded_init(Architecture{}, 7);
  const auto batch = encode(testing::corpus_smiles(500, 9), m.max_len());
  EmbedDiagnostics diag;
  const Matrix<float> e = Embedder<float>(m).embed(batch, &diag);
  CHECK(e.allFinite());
  CHECK(diag.max_abs_activation < 1e6);
}

}  // TEST_SUITE
