//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "molmetric/chemnet.hpp"
#include "molmetric/random.hpp"

namespace molmetric::chemnet {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "molmetric-chemnet";

std::string shape_string(const std::vector<std::int64_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::int64_t product(const std::vector<std::int64_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                         std::multiplies<>());
}

void check_positive(int v, const char* what) {
  if (v <= 0) {
    throw ShapeError(std::string("ShapeMismatch: ") + what +
                     " must be positive, got " + std::to_string(v));
  }
}

json architecture_json(const Architecture& a) {
  return {
      {"vocab_size", a.vocab_size},       {"max_len", a.max_len},
      {"conv1_filters", a.conv1_filters}, {"conv1_kernel", a.conv1_kernel},
      {"conv2_filters", a.conv2_filters}, {"conv2_kernel", a.conv2_kernel},
      {"pool_window", a.pool_window},     {"pool_stride", a.pool_stride},
      {"lstm1_units", a.lstm1_units},     {"lstm2_units", a.lstm2_units},
      {"dense_units", a.dense_units},
  };
}

Architecture architecture_from_json(const json& j) {
  Architecture a;
  a.vocab_size = j.at("vocab_size").get<int>();
  a.max_len = j.at("max_len").get<int>();
  a.conv1_filters = j.at("conv1_filters").get<int>();
  a.conv1_kernel = j.at("conv1_kernel").get<int>();
  a.conv2_filters = j.at("conv2_filters").get<int>();
  a.conv2_kernel = j.at("conv2_kernel").get<int>();
  a.pool_window = j.at("pool_window").get<int>();
  a.pool_stride = j.at("pool_stride").get<int>();
  a.lstm1_units = j.at("lstm1_units").get<int>();
  a.lstm2_units = j.at("lstm2_units").get<int>();
  a.dense_units = j.at("dense_units").get<int>();
  return a;
}

float read_f32(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) {
    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<float>(bits);
}

void write_f32(std::ostream& os, float v) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>(bits >> (8 * i));
  os.write(buf, 4);
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("UnreadableFile: " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

std::vector<LayerSpec> layer_specs(const Architecture& a) {
  check_positive(a.vocab_size, "vocab_size");
  check_positive(a.max_len, "max_len");
  check_positive(a.conv1_filters, "conv1_filters");
  check_positive(a.conv1_kernel, "conv1_kernel");
  check_positive(a.conv2_filters, "conv2_filters");
  check_positive(a.conv2_kernel, "conv2_kernel");
  check_positive(a.pool_window, "pool_window");
  check_positive(a.pool_stride, "pool_stride");
  check_positive(a.lstm1_units, "lstm1_units");
  check_positive(a.lstm2_units, "lstm2_units");
  check_positive(a.dense_units, "dense_units");

  const auto conv = [](std::string name, int k, int c_in, int c_out) {
    const std::int64_t fan_in = std::int64_t{k} * c_in;
    return LayerSpec{LayerKind::kConv1d, name, k, 1, c_out,
                     {{name + ".kernel", {k, c_in, c_out}, fan_in},
                      {name + ".bias", {c_out}, fan_in}}};
  };
  const auto lstm = [](std::string name, int in, int units) {
    const std::int64_t fan_in = std::int64_t{in} + units;
    return LayerSpec{LayerKind::kLstm, name, 0, 1, units,
                     {{name + ".kernel", {in, 4 * units}, fan_in},
                      {name + ".recurrent_kernel", {units, 4 * units}, fan_in},
                      {name + ".bias", {4 * units}, fan_in}}};
  };

  std::vector<LayerSpec> out;
  out.push_back(conv("conv1", a.conv1_kernel, a.vocab_size, a.conv1_filters));
  out.push_back(conv("conv2", a.conv2_kernel, a.conv1_filters, a.conv2_filters));
  out.push_back(LayerSpec{LayerKind::kMaxPool1d, "pool", a.pool_window,
                          a.pool_stride, a.conv2_filters, {}});
  out.push_back(lstm("lstm1", a.conv2_filters, a.lstm1_units));
  out.push_back(lstm("lstm2", a.lstm1_units, a.lstm2_units));
  out.push_back(LayerSpec{LayerKind::kDense, "dense", 0, 1, a.dense_units,
                          {{"dense.kernel", {a.lstm2_units, a.dense_units},
                            a.lstm2_units},
                           {"dense.bias", {a.dense_units}, a.lstm2_units}}});
  return out;
}

std::int64_t Tensor::size() const { return product(shape); }

ChemNetModel::ChemNetModel(Architecture arch,
                           std::map<std::string, Tensor> weights,
                           smiles::Vocabulary vocab)
    : arch_(arch),
      layers_(layer_specs(arch)),
      weights_(std::move(weights)),
      vocab_(std::move(vocab)) {
  if (static_cast<int>(vocab_.size()) != arch_.vocab_size) {
    throw ShapeError("ShapeMismatch: vocabulary has " +
                     std::to_string(vocab_.size()) + " symbols, model expects " +
                     std::to_string(arch_.vocab_size));
  }
  for (const LayerSpec& layer : layers_) {
    for (const TensorSpec& spec : layer.tensors) {
      const auto it = weights_.find(spec.name);
      if (it == weights_.end()) throw InputError("MissingTensor: " + spec.name);
      if (it->second.shape != spec.shape) {
        throw ShapeError("ShapeMismatch: " + spec.name + " expected " +
                         shape_string(spec.shape) + ", found " +
                         shape_string(it->second.shape));
      }
      if (static_cast<std::int64_t>(it->second.data.size()) != it->second.size()) {
        throw ShapeError("ShapeMismatch: " + spec.name + " holds " +
                         std::to_string(it->second.data.size()) + " values for shape " +
                         shape_string(spec.shape));
      }
    }
  }
}

const Tensor& ChemNetModel::tensor(const std::string& name) const {
  const auto it = weights_.find(name);
  if (it == weights_.end()) throw InputError("MissingTensor: " + name);
  return it->second;
}

template <typename Scalar>
Matrix<Scalar> ChemNetModel::matrix(const std::string& name) const {
  const Tensor& t = tensor(name);
  const std::int64_t cols = t.shape.empty() ? 1 : t.shape.back();
  const std::int64_t rows = cols == 0 ? 0 : t.size() / cols;
  Matrix<Scalar> m(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      m(r, c) = static_cast<Scalar>(t.data[static_cast<std::size_t>(r * cols + c)]);
    }
  }
  return m;
}

template Matrix<float> ChemNetModel::matrix<float>(const std::string&) const;
template Matrix<double> ChemNetModel::matrix<double>(const std::string&) const;

std::uint64_t tensor_stream_seed(std::uint64_t seed, int layer_index,
                                 int tensor_index) {
  const std::uint64_t key = (static_cast<std::uint64_t>(layer_index) << 32) |
                            static_cast<std::uint32_t>(tensor_index);
  return seed ^ mix64(key);
}

ChemNetModel seeded_init(const Architecture& arch, std::uint64_t seed) {
  std::map<std::string, Tensor> weights;
  const std::vector<LayerSpec> layers = layer_specs(arch);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t t = 0; t < layers[l].tensors.size(); ++t) {
      const TensorSpec& spec = layers[l].tensors[t];
      SplitMix64 rng(tensor_stream_seed(seed, static_cast<int>(l),
                                        static_cast<int>(t)));
      const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
      Tensor tensor{spec.shape, {}};
      tensor.data.resize(static_cast<std::size_t>(product(spec.shape)));
      for (float& v : tensor.data) {
        v = static_cast<float>((2.0 * rng.uniform_open() - 1.0) * bound);
      }
      weights.emplace(spec.name, std::move(tensor));
    }
  }
  std::vector<std::string> symbols = smiles::Vocabulary::default_vocabulary().symbols();
  if (static_cast<int>(symbols.size()) != arch.vocab_size) {
    // Width-only vocabulary for non-default test architectures.
    symbols.clear();
    for (int i = 0; i + 2 < arch.vocab_size; ++i) {
      symbols.push_back("<" + std::to_string(i) + ">");
    }
    symbols.emplace_back(smiles::Vocabulary::kUnknown);
    symbols.emplace_back(smiles::Vocabulary::kEnd);
    if (arch.vocab_size < 2) {
      throw ShapeError("ShapeMismatch: vocab_size must be at least 2");
    }
  }
  return ChemNetModel(arch, std::move(weights),
                      smiles::Vocabulary(std::move(symbols)));
}

void save_model(const std::filesystem::path& manifest, const ChemNetModel& model) {
  const std::string payload_name = manifest.stem().string() + ".weights.bin";
  const std::filesystem::path payload = manifest.parent_path() / payload_name;

  std::ofstream p(payload, std::ios::binary);
  if (!p) throw InputError("cannot write " + payload.string());
  json tensors = json::array();
  std::int64_t offset = 0;
  for (const LayerSpec& layer : model.layers()) {
    for (const TensorSpec& spec : layer.tensors) {
      const Tensor& t = model.tensor(spec.name);
      tensors.push_back({{"name", spec.name},
                         {"shape", t.shape},
                         {"dtype", "f32"},
                         {"file", payload_name},
                         {"byte_offset", offset}});
      for (float v : t.data) write_f32(p, v);
      offset += 4 * t.size();
    }
  }
  if (!p) throw InputError("failed writing " + payload.string());

  const json j = {{"format", kFormat},
                  {"version", 1},
                  {"architecture", architecture_json(model.architecture())},
                  {"vocabulary", model.vocabulary().symbols()},
                  {"tensors", tensors}};
  std::ofstream m(manifest);
  if (!m) throw InputError("cannot write " + manifest.string());
  m << j.dump(2) << '\n';
}

ChemNetModel load_model(const std::filesystem::path& manifest) {
  json j;
  {
    std::ifstream in(manifest);
    if (!in) throw InputError("UnreadableFile: " + manifest.string());
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw InputError("CorruptFile: " + manifest.string() + ": " + e.what());
    }
  }

  struct Entry {
    std::vector<std::int64_t> shape;
    std::string file;
    std::int64_t offset;
  };
  Architecture arch;
  std::vector<std::string> vocab;
  std::map<std::string, Entry> entries;
  try {
    arch = architecture_from_json(j.at("architecture"));
    vocab = j.contains("vocabulary")
                ? j.at("vocabulary").get<std::vector<std::string>>()
                : smiles::Vocabulary::default_vocabulary().symbols();
    for (const json& t : j.at("tensors")) {
      const std::string dtype = t.at("dtype").get<std::string>();
      const std::string name = t.at("name").get<std::string>();
      if (dtype != "f32") {
        throw InputError("CorruptFile: tensor " + name + " has dtype " + dtype);
      }
      entries[name] = {t.at("shape").get<std::vector<std::int64_t>>(),
                       t.at("file").get<std::string>(),
                       t.at("byte_offset").get<std::int64_t>()};
    }
  } catch (const json::exception& e) {
    throw InputError("CorruptFile: " + manifest.string() + ": " + e.what());
  }

  const std::vector<LayerSpec> specs = layer_specs(arch);
  for (const LayerSpec& layer : specs) {
    for (const TensorSpec& spec : layer.tensors) {
      const auto it = entries.find(spec.name);
      if (it == entries.end()) throw InputError("MissingTensor: " + spec.name);
      if (it->second.shape != spec.shape) {
        throw ShapeError("ShapeMismatch: " + spec.name + " expected " +
                         shape_string(spec.shape) + ", found " +
                         shape_string(it->second.shape));
      }
    }
  }

  // Every payload file must be covered exactly by its tensors.
  std::map<std::string, std::string> files;
  std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> spans;
  for (const auto& [name, e] : entries) {
    if (!files.count(e.file)) files[e.file] = read_all(manifest.parent_path() / e.file);
    const std::int64_t bytes = 4 * product(e.shape);
    const auto size = static_cast<std::int64_t>(files[e.file].size());
    if (e.offset < 0 || e.offset + bytes > size) {
      throw InputError("CorruptFile: tensor " + name + " needs bytes [" +
                       std::to_string(e.offset) + ", " +
                       std::to_string(e.offset + bytes) + ") but " + e.file +
                       " has " + std::to_string(size));
    }
    spans[e.file].emplace_back(e.offset, e.offset + bytes);
  }
  for (auto& [file, ranges] : spans) {
    std::sort(ranges.begin(), ranges.end());
    std::int64_t cursor = 0;
    for (const auto& [lo, hi] : ranges) {
      if (lo != cursor) {
        throw InputError("CorruptFile: " + file + " has " +
                         (lo < cursor ? "overlapping" : "unused") +
                         " bytes at offset " + std::to_string(std::min(lo, cursor)));
      }
      cursor = hi;
    }
    if (cursor != static_cast<std::int64_t>(files[file].size())) {
      throw InputError("CorruptFile: " + file + " has " +
                       std::to_string(files[file].size() - cursor) +
                       " trailing bytes");
    }
  }

  std::map<std::string, Tensor> weights;
  for (const LayerSpec& layer : specs) {
    for (const TensorSpec& spec : layer.tensors) {
      const auto it = entries.find(spec.name);
      Tensor t{spec.shape, {}};
      t.data.resize(static_cast<std::size_t>(product(spec.shape)));
      const char* p = files[it->second.file].data() + it->second.offset;
      for (float& v : t.data) {
        v = read_f32(p);
        p += 4;
      }
      weights.emplace(spec.name, std::move(t));
    }
  }
  return ChemNetModel(arch, std::move(weights), smiles::Vocabulary(std::move(vocab)));
}

}  // namespace molmetric::chemnet
