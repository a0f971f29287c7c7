//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "molmetric/frechet.hpp"

namespace molmetric::frechet {
namespace {

using nlohmann::json;

void write_f64(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>(bits >> (8 * i));
  os.write(buf, 8);
}

double read_f64(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

std::filesystem::path payload_path(const std::filesystem::path& manifest) {
  return std::filesystem::path(manifest.string() + ".bin");
}

}  // namespace

void save_stats(const std::filesystem::path& manifest,
                const GaussianStats<double>& stats, double eps_used) {
  const std::filesystem::path payload = payload_path(manifest);
  json j = {
      {"format", "molmetric-gaussian-stats"},
      {"version", 1},
      {"dim", stats.dim()},
      {"n", stats.n},
      {"eps_used", eps_used},
      {"covariance", "unbiased"},
      {"dtype", "f64"},
      {"layout", "mean then row-major covariance"},
      {"payload", payload.filename().string()},
  };
  std::ofstream m(manifest);
  if (!m) throw InputError("cannot write " + manifest.string());
  m << j.dump(2) << '\n';

  std::ofstream p(payload, std::ios::binary);
  if (!p) throw InputError("cannot write " + payload.string());
  for (Eigen::Index i = 0; i < stats.dim(); ++i) write_f64(p, stats.mean(i));
  for (Eigen::Index r = 0; r < stats.dim(); ++r) {
    for (Eigen::Index c = 0; c < stats.dim(); ++c) write_f64(p, stats.cov(r, c));
  }
  if (!p) throw InputError("failed writing " + payload.string());
}

StatsFile load_stats(const std::filesystem::path& manifest) {
  std::ifstream m(manifest);
  if (!m) throw InputError("UnreadableFile: " + manifest.string());
  json j;
  try {
    m >> j;
  } catch (const json::exception& e) {
    throw InputError("CorruptFile: " + manifest.string() + ": " + e.what());
  }

  StatsFile out;
  std::filesystem::path payload;
  Eigen::Index dim = 0;
  try {
    dim = j.at("dim").get<Eigen::Index>();
    out.stats.n = j.at("n").get<std::int64_t>();
    out.eps_used = j.value("eps_used", kDefaultEps);
    out.covariance = j.value("covariance", std::string("unbiased"));
    payload = manifest.parent_path() / j.at("payload").get<std::string>();
  } catch (const json::exception& e) {
    throw InputError("CorruptFile: " + manifest.string() + ": " + e.what());
  }
  if (dim <= 0) throw InputError("CorruptFile: non-positive dim");

  std::ifstream p(payload, std::ios::binary);
  if (!p) throw InputError("UnreadableFile: " + payload.string());
  std::string bytes((std::istreambuf_iterator<char>(p)),
                    std::istreambuf_iterator<char>());
  const std::size_t expected =
      8 * (static_cast<std::size_t>(dim) + static_cast<std::size_t>(dim * dim));
  if (bytes.size() != expected) {
    throw InputError("CorruptFile: " + payload.string() + " has " +
                     std::to_string(bytes.size()) + " bytes, expected " +
                     std::to_string(expected));
  }

  out.stats.mean.resize(dim);
  out.stats.cov.resize(dim, dim);
  const char* ptr = bytes.data();
  for (Eigen::Index i = 0; i < dim; ++i, ptr += 8) out.stats.mean(i) = read_f64(ptr);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c, ptr += 8) {
      out.stats.cov(r, c) = read_f64(ptr);
    }
  }
  return out;
}

}  // namespace molmetric::frechet
