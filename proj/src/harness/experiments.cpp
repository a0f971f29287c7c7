//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <numeric>

#include "molmetric/harness.hpp"
#include "molmetric/parallel.hpp"
#include "molmetric/random.hpp"
#include "molmetric/smiles.hpp"

namespace molmetric::harness {
namespace {

constexpr std::size_t kShard = static_cast<std::size_t>(frechet::kStatsShardRows);

// One shard's moments, folded block by block as estimate_stats does.
frechet::MomentAccumulator shard_moments(const Eigen::MatrixXd& rows) {
  frechet::MomentAccumulator acc(rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); r += frechet::kStatsBlockRows) {
    acc.add(rows.middleRows(r, std::min(frechet::kStatsBlockRows, rows.rows() - r)));
  }
  return acc;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

}  // namespace

ValiditySplit split_valid(std::span<const std::string> smiles) {
  std::vector<char> ok(smiles.size(), 0);
  parallel_for((smiles.size() + 255) / 256, [&](std::size_t t) {
    for (std::size_t i = t * 256; i < std::min(smiles.size(), (t + 1) * 256); ++i) {
      ok[i] = smiles::check_validity(smiles[i]).valid ? 1 : 0;
    }
  });
  ValiditySplit out;
  out.total = smiles.size();
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    if (ok[i]) out.valid.push_back(smiles[i]);
  }
  return out;
}

std::vector<fingerprint::Fingerprint> fingerprints(std::span<const std::string> smiles) {
  std::vector<fingerprint::Fingerprint> out(smiles.size());
  parallel_for((smiles.size() + 255) / 256, [&](std::size_t t) {
    for (std::size_t i = t * 256; i < std::min(smiles.size(), (t + 1) * 256); ++i) {
      try {
        out[i] = fingerprint::morgan_fingerprint(smiles::parse_smiles(smiles[i]));
      } catch (const smiles::SmilesError& e) {
        throw InputError("InvalidSmiles: record " + std::to_string(i + 1) + " '" +
                         smiles[i] + "': " + e.what());
      }
    }
  });
  return out;
}

frechet::GaussianStats<double> fingerprint_stats(
    std::span<const fingerprint::Fingerprint> fps) {
  if (fps.empty()) {
    throw InputError("InsufficientSamples: need at least 2 embeddings, got 0");
  }
  // Shard-wise, matching estimate_stats on the full 0/1 matrix.
  frechet::MomentAccumulator total(fps.front().size());
  for (std::size_t begin = 0; begin < fps.size(); begin += kShard) {
    const std::size_t end = std::min(fps.size(), begin + kShard);
    total.merge(shard_moments(fingerprint::to_matrix(fps.subspan(begin, end - begin))));
  }
  return total.finalize();
}

double ffd(const frechet::GaussianStats<double>& a,
           const frechet::GaussianStats<double>& b, double eps) {
  return frechet::frechet_distance(a, b, frechet::FrechetOptions{eps, true});
}

Featurizer::Featurizer(const chemnet::ChemNetModel& model)
    : model_(&model), embedder_(model) {}

Eigen::MatrixXd Featurizer::embed(std::span<const std::string> smiles) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(smiles.size()), dim());
  for (std::size_t begin = 0; begin < smiles.size(); begin += kShard) {
    const std::size_t end = std::min(smiles.size(), begin + kShard);
    std::vector<smiles::TokenMatrix> tokens;
    tokens.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      tokens.push_back(smiles::one_hot_encode(smiles[i], model_->vocabulary(),
                                              model_->max_len()));
    }
    out.middleRows(static_cast<Eigen::Index>(begin),
                   static_cast<Eigen::Index>(end - begin)) =
        embedder_.embed(tokens).cast<double>();
  }
  return out;
}

frechet::GaussianStats<double> Featurizer::stats(std::span<const std::string> smiles) const {
  if (smiles.size() < 2) {
    throw InputError("InsufficientSamples: need at least 2 embeddings, got " +
                     std::to_string(smiles.size()));
  }
  frechet::MomentAccumulator total(dim());
  for (std::size_t begin = 0; begin < smiles.size(); begin += kShard) {
    const std::size_t end = std::min(smiles.size(), begin + kShard);
    total.merge(shard_moments(embed(smiles.subspan(begin, end - begin))));
  }
  return total.finalize();
}

frechet::GaussianStats<double> Pool::embedding_stats(std::span<const std::size_t> idx) const {
  return frechet::estimate_stats(gather_rows(embeddings, idx));
}

frechet::GaussianStats<double> Pool::fingerprint_stats(std::span<const std::size_t> idx) const {
  std::vector<fingerprint::Fingerprint> subset;
  subset.reserve(idx.size());
  for (std::size_t i : idx) subset.push_back(fps[i]);
  return harness::fingerprint_stats(subset);
}

Pool make_pool(std::vector<DatasetRecord> records, const Featurizer& featurizer) {
  Pool pool;
  pool.records = std::move(records);
  std::vector<std::string> smiles;
  smiles.reserve(pool.records.size());
  for (const DatasetRecord& r : pool.records) smiles.push_back(r.smiles);
  pool.fps = fingerprints(smiles);
  pool.embeddings = featurizer.embed(smiles);
  return pool;
}

PoolReference make_reference(const Pool& pool) {
  return PoolReference{frechet::FrechetReference(frechet::estimate_stats(pool.embeddings)),
                       frechet::FrechetReference(fingerprint_stats(pool.fps))};
}

std::vector<ConvergenceRow> convergence_experiment(
    const Eigen::MatrixXd& pool, const frechet::GaussianStats<double>& reference,
    std::span<const std::size_t> sizes, int repeats, std::uint64_t seed, double eps) {
  if (repeats < 1) throw InputError("repeats must be positive");
  const frechet::FrechetReference ref(reference);
  const auto n_pool = static_cast<std::size_t>(pool.rows());

  std::vector<ConvergenceRow> rows(sizes.size());
  std::vector<std::size_t> tasks;  // size index * repeats + repeat
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    rows[s].size = sizes[s];
    rows[s].repeats = repeats;
    rows[s].skipped = sizes[s] > n_pool || sizes[s] < 2;
    if (rows[s].skipped) continue;
    for (int r = 0; r < repeats; ++r) tasks.push_back(s * repeats + r);
  }

  std::vector<double> d2(sizes.size() * static_cast<std::size_t>(repeats), 0.0);
  parallel_for(tasks.size(), [&](std::size_t t) {
    const std::size_t task = tasks[t];
    const std::size_t size = sizes[task / static_cast<std::size_t>(repeats)];
    const auto idx = sample_without_replacement(n_pool, size, derive_seed(seed, task));
    d2[task] = ref.distance(frechet::estimate_stats(gather_rows(pool, idx)),
                            frechet::FrechetOptions{eps, false});
  });

  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (rows[s].skipped) continue;
    const auto first = d2.begin() + static_cast<std::ptrdiff_t>(s * repeats);
    const MeanStd ms = mean_std(std::vector<double>(first, first + repeats));
    rows[s].mean = ms.mean;
    rows[s].std = ms.std;
  }
  return rows;
}

ScoreResult score_generator(std::span<const std::string> candidates,
                            const frechet::GaussianStats<double>& reference,
                            const Featurizer& featurizer, std::size_t sample_size,
                            int repeats, std::uint64_t seed, double eps) {
  if (candidates.empty()) throw InputError("AllInvalid: no candidates supplied");
  if (repeats < 1) throw InputError("repeats must be positive");
  const ValiditySplit split = split_valid(candidates);
  if (split.valid.empty()) {
    throw InputError("AllInvalid: none of " + std::to_string(candidates.size()) +
                     " candidates is a valid SMILES string");
  }

  ScoreResult out;
  out.n_total = split.total;
  out.n_valid = split.valid.size();
  out.validity = split.fraction();
  out.sample_size = std::min(sample_size, out.n_valid);
  out.repeats = repeats;

  // Embed only molecules that some repeat draws.
  std::vector<std::vector<std::size_t>> draws(static_cast<std::size_t>(repeats));
  std::vector<char> used(out.n_valid, 0);
  for (int r = 0; r < repeats; ++r) {
    draws[r] = sample_without_replacement(out.n_valid, out.sample_size,
                                          derive_seed(seed, static_cast<std::uint64_t>(r)));
    for (std::size_t i : draws[r]) used[i] = 1;
  }
  std::vector<std::size_t> slot(out.n_valid, 0);
  std::vector<std::string> needed;
  for (std::size_t i = 0; i < out.n_valid; ++i) {
    if (!used[i]) continue;
    slot[i] = needed.size();
    needed.push_back(split.valid[i]);
  }
  const Eigen::MatrixXd emb = featurizer.embed(needed);

  const frechet::FrechetReference ref(reference);
  std::vector<double> scores(static_cast<std::size_t>(repeats));
  parallel_for(scores.size(), [&](std::size_t r) {
    std::vector<std::size_t> rows;
    rows.reserve(draws[r].size());
    for (std::size_t i : draws[r]) rows.push_back(slot[i]);
    scores[r] = ref.distance(frechet::estimate_stats(gather_rows(emb, rows)),
                             frechet::FrechetOptions{eps, false});
  });
  const MeanStd ms = mean_std(scores);
  out.mean = ms.mean;
  out.std = ms.std;
  return out;
}

std::vector<DetectionRow> detection_experiment(const Pool& pool,
                                               const PoolReference& reference,
                                               Bias bias, std::size_t n, int seeds,
                                               std::uint64_t seed, double eps,
                                               const DisturbanceConfig& config) {
  std::vector<DetectionRow> rows(static_cast<std::size_t>(std::max(seeds, 0)));
  const frechet::FrechetOptions fcd_opts{eps, false};
  const frechet::FrechetOptions ffd_opts{eps, true};
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const std::uint64_t task_seed = derive_seed(seed, s);
    const auto disturbed =
        disturbed_indices(pool.records, pool.fps, bias, n, task_seed, config);
    const auto random = sample_without_replacement(pool.size(), n, task_seed);
    DetectionRow& row = rows[s];
    row.bias = bias;
    row.seed = task_seed;
    row.fcd_disturbed = reference.embedding.distance(pool.embedding_stats(disturbed), fcd_opts);
    row.fcd_random = reference.embedding.distance(pool.embedding_stats(random), fcd_opts);
    row.ffd_disturbed =
        reference.fingerprint.distance(pool.fingerprint_stats(disturbed), ffd_opts);
    row.ffd_random = reference.fingerprint.distance(pool.fingerprint_stats(random), ffd_opts);
  }
  return rows;
}

}  // namespace molmetric::harness
