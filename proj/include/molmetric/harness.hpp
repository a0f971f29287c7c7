//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLMETRIC_HARNESS_HPP
#define MOLMETRIC_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "molmetric/chemnet.hpp"
#include "molmetric/error.hpp"
#include "molmetric/fingerprint.hpp"
#include "molmetric/frechet.hpp"

namespace molmetric::harness {

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct DatasetRecord {
  std::string smiles;
  std::map<std::string, double> descriptors;

  std::optional<double> get(const std::string& column) const;
};

struct Reject {
  std::size_t line = 0;  // 1-based
  std::string text;
  std::string reason;
};

struct Dataset {
  std::vector<DatasetRecord> records;
  std::vector<Reject> rejects;
  std::vector<std::string> columns;  // descriptor columns in file order

  std::vector<std::string> smiles() const;
};

enum class Format { kSmi, kCsv };

// .csv (case-insensitive) is csv, everything else smi.
Format format_for(const std::filesystem::path& path);

// Throws InputError "UnreadableFile: <path>" or "MissingColumn(smiles)".
Dataset load_dataset(const std::filesystem::path& path, Format format);
Dataset load_dataset(const std::filesystem::path& path);

// Same parsing applied to in-memory text.
Dataset parse_csv(std::string_view text);
Dataset parse_smi(std::string_view text);

std::vector<DatasetRecord> select(std::span<const DatasetRecord> records,
                                  std::span<const std::size_t> indices);

// ---------------------------------------------------------------------------
// Disturbed sets
// ---------------------------------------------------------------------------

enum class Side { kBelow, kAbove };

// Linear interpolation between closest ranks: with sorted values x[0..N-1],
// h = (N - 1) * p / 100 and the result is x[floor h] + frac(h) * (x[ceil h] -
// x[floor h]). Throws InputError for empty input or p outside (0, 100).
double percentile(std::vector<double> values, double p);

// Indices of n records strictly beyond the percentile threshold of `column`,
// drawn without replacement. Throws "NotEnoughQualifyingRecords(found,
// requested)".
std::vector<std::size_t> percentile_filter_indices(
    std::span<const DatasetRecord> records, const std::string& column,
    Side side, double pct, std::size_t n, std::uint64_t seed);

std::vector<DatasetRecord> percentile_filter(std::span<const DatasetRecord> records,
                                             const std::string& column, Side side,
                                             double pct, std::size_t n,
                                             std::uint64_t seed);

// Largest single-linkage cluster of size >= n (ties: lowest label), then n
// of its members. Throws "NoClusterLargeEnough(largest, requested)".
std::vector<std::size_t> mode_collapse_indices(
    std::span<const fingerprint::Fingerprint> fps, double cutoff,
    std::size_t n, std::uint64_t seed);

// Throws InputError if a record is not a valid SMILES string.
std::vector<DatasetRecord> mode_collapse_sample(std::span<const DatasetRecord> records,
                                                double cutoff, std::size_t n,
                                                std::uint64_t seed);

std::vector<std::size_t> target_class_indices(std::span<const DatasetRecord> records,
                                              const std::string& column,
                                              double threshold, std::size_t n,
                                              std::uint64_t seed);

std::vector<DatasetRecord> target_class_sample(std::span<const DatasetRecord> records,
                                               const std::string& column,
                                               double threshold, std::size_t n,
                                               std::uint64_t seed);

// The five disturbances: low druglikeness, high logP, low SA score, mode
// collapse and target-class restriction.
enum class Bias { kDruglike, kLogP, kSA, kModeCollapse, kTarget };

inline constexpr Bias kAllBiases[] = {Bias::kDruglike, Bias::kLogP, Bias::kSA,
                                      Bias::kModeCollapse, Bias::kTarget};

std::string bias_name(Bias bias);
Bias parse_bias(std::string_view name);  // druglike, logp, sa, modecollapse, target

struct DisturbanceConfig {
  double low_percentile = 5.0;
  double high_percentile = 95.0;
  double cluster_cutoff = fingerprint::kDefaultClusterCutoff;
  double activity_threshold = 0.5;
};

// `fps` must hold the fingerprints of `records` (only used for mode collapse).
std::vector<std::size_t> disturbed_indices(std::span<const DatasetRecord> records,
                                           std::span<const fingerprint::Fingerprint> fps,
                                           Bias bias, std::size_t n,
                                           std::uint64_t seed,
                                           const DisturbanceConfig& config = {});

// ---------------------------------------------------------------------------
// Baseline generator
// ---------------------------------------------------------------------------

// Strings of uniform length 1..50 over {C, N, O}, emitted unfiltered.
std::vector<std::string> random_cno_baseline(std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Featurization
// ---------------------------------------------------------------------------

struct ValiditySplit {
  std::vector<std::string> valid;
  std::size_t total = 0;

  double fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(valid.size()) / total;
  }
};

ValiditySplit split_valid(std::span<const std::string> smiles);

// Throws InputError naming the first string that does not parse.
std::vector<fingerprint::Fingerprint> fingerprints(std::span<const std::string> smiles);

frechet::GaussianStats<double> fingerprint_stats(
    std::span<const fingerprint::Fingerprint> fps);

// Fingerprint Frechet distance; always regularized.
double ffd(const frechet::GaussianStats<double>& a,
           const frechet::GaussianStats<double>& b, double eps);

class Featurizer {
 public:
  explicit Featurizer(const chemnet::ChemNetModel& model);

  const chemnet::ChemNetModel& model() const { return *model_; }
  int dim() const { return embedder_.embedding_dim(); }

  // One embedding per string (widened to double).
  Eigen::MatrixXd embed(std::span<const std::string> smiles) const;

  // Embeds shard by shard, folding each into the running moments; equal
  // to frechet::estimate_stats(embed(smiles)) bit for bit.
  frechet::GaussianStats<double> stats(std::span<const std::string> smiles) const;

 private:
  const chemnet::ChemNetModel* model_;
  chemnet::Embedder<float> embedder_;
};

// Pre-featurized pool of molecules for repeated subset experiments.
struct Pool {
  std::vector<DatasetRecord> records;
  std::vector<fingerprint::Fingerprint> fps;
  Eigen::MatrixXd embeddings;

  std::size_t size() const { return records.size(); }
  frechet::GaussianStats<double> embedding_stats(std::span<const std::size_t> idx) const;
  frechet::GaussianStats<double> fingerprint_stats(std::span<const std::size_t> idx) const;
};

Pool make_pool(std::vector<DatasetRecord> records, const Featurizer& featurizer);

// Whole-pool statistics with cached factorizations.
struct PoolReference {
  frechet::FrechetReference embedding;
  frechet::FrechetReference fingerprint;
};

PoolReference make_reference(const Pool& pool);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

inline const std::vector<std::size_t> kConvergenceSizes = {5, 50, 500, 5000, 50000, 300000};

struct ConvergenceRow {
  std::size_t size = 0;
  int repeats = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation across repeats
  bool skipped = false;
};

// Per size and repeat: draw `size` pool rows without replacement, estimate
// their moments and take d^2 against `reference`. Sizes above the pool size
// are reported as skipped.
std::vector<ConvergenceRow> convergence_experiment(
    const Eigen::MatrixXd& pool, const frechet::GaussianStats<double>& reference,
    std::span<const std::size_t> sizes, int repeats, std::uint64_t seed,
    double eps = frechet::kDefaultEps);

struct ScoreResult {
  double mean = 0.0;
  double std = 0.0;
  double validity = 0.0;
  std::size_t n_valid = 0;
  std::size_t n_total = 0;
  std::size_t sample_size = 0;
  int repeats = 0;
};

// Invalid strings are dropped first; each repeat scores
// min(sample_size, n_valid) valid strings. Throws "AllInvalid".
ScoreResult score_generator(std::span<const std::string> candidates,
                            const frechet::GaussianStats<double>& reference,
                            const Featurizer& featurizer,
                            std::size_t sample_size = 10000, int repeats = 10,
                            std::uint64_t seed = 42,
                            double eps = frechet::kDefaultEps);

struct DetectionRow {
  Bias bias;
  std::uint64_t seed = 0;
  double fcd_disturbed = 0.0;
  double fcd_random = 0.0;
  double ffd_disturbed = 0.0;
  double ffd_random = 0.0;
};

// Disturbed set versus a same-size random subset, both scored against the
// statistics of the whole pool, once per seed derived from `seed`.
std::vector<DetectionRow> detection_experiment(const Pool& pool,
                                               const PoolReference& reference, Bias bias,
                                               std::size_t n, int seeds,
                                               std::uint64_t seed, double eps,
                                               const DisturbanceConfig& config = {});

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct MetricSelection {
  bool validity = true;
  bool descriptors = true;
  bool diversity = true;
  bool ffd = true;
  bool fcd = true;
};

struct DescriptorSummary {
  std::optional<double> mean;
  std::optional<double> std;
  bool operator==(const DescriptorSummary&) const = default;
};

struct MetricRow {
  std::string name;
  std::size_t n = 0;
  std::optional<double> validity;
  std::map<std::string, DescriptorSummary> descriptors;
  std::optional<double> internal_diversity;
  std::optional<double> ffd;
  std::optional<double> fcd;
  bool operator==(const MetricRow&) const = default;
};

struct ReportMetadata {
  std::uint64_t seed = 42;
  std::string reference_id;
  double eps = frechet::kDefaultEps;
  std::string timestamp;
  bool operator==(const ReportMetadata&) const = default;
};

struct MetricReport {
  std::vector<std::string> columns;  // descriptor columns, in order
  std::vector<MetricRow> rows;
  ReportMetadata metadata;
  bool operator==(const MetricReport&) const = default;
};

struct NamedSet {
  std::string name;
  std::vector<DatasetRecord> records;

  std::vector<std::string> smiles_list() const;
};

struct ReportOptions {
  MetricSelection metrics;
  std::uint64_t seed = 42;
  double eps = frechet::kDefaultEps;
  std::size_t diversity_subset = 5000;
  int diversity_repeats = 5;
  std::string timestamp;  // empty: current UTC time
};

// The first row describes the reference itself. Writes report.csv and
// report.json into `out_dir` when it is non-empty.
MetricReport run_report(const NamedSet& reference,
                        const frechet::GaussianStats<double>& reference_stats,
                        const std::string& reference_id,
                        std::span<const NamedSet> sets, const Featurizer& featurizer,
                        const ReportOptions& options,
                        const std::filesystem::path& out_dir = {});

// %.17g, so every double survives a text round trip.
std::string format_real(double v);

std::string report_csv(const MetricReport& report);
MetricReport parse_report_csv(std::string_view text);
std::string report_json(const MetricReport& report);
std::string convergence_csv(std::span<const ConvergenceRow> rows);

}  // namespace molmetric::harness

#endif  // MOLMETRIC_HARNESS_HPP
