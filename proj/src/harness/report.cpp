//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "molmetric/harness.hpp"
#include "molmetric/random.hpp"

namespace molmetric::harness {
namespace {

using nlohmann::ordered_json;

const std::vector<std::string> kPreferredColumns = {"logp", "qed", "sa_score", "activity"};

std::vector<std::string> descriptor_columns(const NamedSet& reference,
                                            std::span<const NamedSet> sets) {
  std::set<std::string> seen;
  const auto scan = [&](const NamedSet& s) {
    for (const DatasetRecord& r : s.records) {
      for (const auto& [k, v] : r.descriptors) seen.insert(k);
    }
  };
  scan(reference);
  for (const NamedSet& s : sets) scan(s);
  std::vector<std::string> out;
  for (const std::string& c : kPreferredColumns) {
    if (seen.erase(c)) out.push_back(c);
  }
  out.insert(out.end(), seen.begin(), seen.end());
  return out;
}

DescriptorSummary summarize(const std::vector<DatasetRecord>& records,
                            const std::string& column) {
  std::vector<double> v;
  for (const DatasetRecord& r : records) {
    if (auto x = r.get(column)) v.push_back(*x);
  }
  DescriptorSummary out;
  if (v.empty()) return out;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  out.mean = mean;
  out.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string cell(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string();
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::optional<double> parse_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("CorruptFile: report cell '" + s + "' is not a real");
  }
  return v;
}

ordered_json json_value(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MetricReport run_report(const NamedSet& reference,
                        const frechet::GaussianStats<double>& reference_stats,
                        const std::string& reference_id, std::span<const NamedSet> sets,
                        const Featurizer& featurizer, const ReportOptions& options,
                        const std::filesystem::path& out_dir) {
  MetricReport report;
  report.columns = descriptor_columns(reference, sets);
  report.metadata = {options.seed, reference_id, options.eps,
                     options.timestamp.empty() ? utc_now() : options.timestamp};

  const MetricSelection& sel = options.metrics;
  std::optional<frechet::FrechetReference> fcd_ref;
  if (sel.fcd) fcd_ref.emplace(reference_stats);
  std::optional<frechet::FrechetReference> ffd_ref;
  if (sel.ffd) {
    const ValiditySplit ref_valid = split_valid(reference.smiles_list());
    ffd_ref.emplace(fingerprint_stats(fingerprints(ref_valid.valid)));
  }

  std::vector<const NamedSet*> all = {&reference};
  for (const NamedSet& s : sets) all.push_back(&s);
  for (std::size_t k = 0; k < all.size(); ++k) {
    const NamedSet& set = *all[k];
    if (set.records.empty()) throw InputError("set '" + set.name + "' is empty");
    MetricRow row;
    row.name = set.name;
    row.n = set.records.size();
    const ValiditySplit split = split_valid(set.smiles_list());
    if (sel.validity) row.validity = split.fraction();
    if (sel.descriptors) {
      for (const std::string& c : report.columns) row.descriptors[c] = summarize(set.records, c);
    }
    if (sel.diversity || sel.ffd) {
      const auto fps = fingerprints(split.valid);
      if (sel.diversity) {
        row.internal_diversity = fingerprint::internal_diversity(
            fps, options.diversity_subset, options.diversity_repeats,
            derive_seed(options.seed, k));
      }
      if (sel.ffd) {
        row.ffd = ffd_ref->distance(fingerprint_stats(fps),
                                    frechet::FrechetOptions{options.eps, true});
      }
    }
    if (sel.fcd) {
      row.fcd = fcd_ref->distance(featurizer.stats(split.valid),
                                  frechet::FrechetOptions{options.eps, false});
    }
    report.rows.push_back(std::move(row));
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir / "report.csv", std::ios::binary);
    std::ofstream json(out_dir / "report.json", std::ios::binary);
    if (!csv || !json) throw InputError("cannot write report into " + out_dir.string());
    csv << report_csv(report);
    json << report_json(report);
  }
  return report;
}

std::string report_csv(const MetricReport& report) {
  std::ostringstream os;
  os << "# seed=" << report.metadata.seed << '\n';
  os << "# reference=" << report.metadata.reference_id << '\n';
  os << "# eps=" << format_real(report.metadata.eps) << '\n';
  os << "set,n,validity";
  for (const std::string& c : report.columns) os << ',' << quote(c + "_mean") << ',' << quote(c + "_std");
  os << ",internal_diversity,ffd,fcd\n";
  for (const MetricRow& row : report.rows) {
    os << quote(row.name) << ',' << row.n << ',' << cell(row.validity);
    for (const std::string& c : report.columns) {
      const auto it = row.descriptors.find(c);
      const DescriptorSummary d = it == row.descriptors.end() ? DescriptorSummary{} : it->second;
      os << ',' << cell(d.mean) << ',' << cell(d.std);
    }
    os << ',' << cell(row.internal_diversity) << ',' << cell(row.ffd) << ','
       << cell(row.fcd) << '\n';
  }
  return os.str();
}

MetricReport parse_report_csv(std::string_view text) {
  MetricReport report;
  std::vector<std::string> header;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "seed") {
        report.metadata.seed = std::stoull(value);
      } else if (key == "reference") {
        report.metadata.reference_id = value;
      } else if (key == "eps") {
        report.metadata.eps = *parse_cell(value);
      }
      continue;
    }
    const std::vector<std::string> fields = split_fields(line);
    if (header.empty()) {
      header = fields;
      if (header.size() < 6 || header[0] != "set" || (header.size() - 6) % 2 != 0) {
        throw InputError("CorruptFile: unexpected report header");
      }
      for (std::size_t i = 3; i + 3 < header.size(); i += 2) {
        const std::string& h = header[i];
        if (h.size() < 5 || h.substr(h.size() - 5) != "_mean") {
          throw InputError("CorruptFile: unexpected report column '" + h + "'");
        }
        report.columns.push_back(h.substr(0, h.size() - 5));
      }
      continue;
    }
    if (fields.size() != header.size()) {
      throw InputError("CorruptFile: report row has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(header.size()));
    }
    MetricRow row;
    row.name = fields[0];
    row.n = std::stoull(fields[1]);
    row.validity = parse_cell(fields[2]);
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      row.descriptors[report.columns[c]] = {parse_cell(fields[3 + 2 * c]),
                                            parse_cell(fields[4 + 2 * c])};
    }
    const std::size_t tail = header.size() - 3;
    row.internal_diversity = parse_cell(fields[tail]);
    row.ffd = parse_cell(fields[tail + 1]);
    row.fcd = parse_cell(fields[tail + 2]);
    report.rows.push_back(std::move(row));
  }
  if (header.empty()) throw InputError("CorruptFile: report has no header");
  return report;
}

std::string report_json(const MetricReport& report) {
  ordered_json rows = ordered_json::array();
  for (const MetricRow& row : report.rows) {
    ordered_json desc = ordered_json::object();
    for (const std::string& c : report.columns) {
      const auto it = row.descriptors.find(c);
      const DescriptorSummary d = it == row.descriptors.end() ? DescriptorSummary{} : it->second;
      desc[c] = {{"mean", json_value(d.mean)}, {"std", json_value(d.std)}};
    }
    rows.push_back({{"set", row.name},
                    {"n", row.n},
                    {"validity", json_value(row.validity)},
                    {"descriptors", desc},
                    {"internal_diversity", json_value(row.internal_diversity)},
                    {"ffd", json_value(row.ffd)},
                    {"fcd", json_value(row.fcd)}});
  }
  const ordered_json j = {{"metadata",
                           {{"seed", report.metadata.seed},
                            {"reference", report.metadata.reference_id},
                            {"eps", report.metadata.eps},
                            {"timestamp", report.metadata.timestamp}}},
                          {"rows", rows}};
  return j.dump(2) + "\n";
}

std::string convergence_csv(std::span<const ConvergenceRow> rows) {
  std::ostringstream os;
  os << "size,repeats,mean_d2,std_d2,skipped\n";
  for (const ConvergenceRow& r : rows) {
    os << r.size << ',' << r.repeats << ',';
    if (r.skipped) {
      os << ",,1\n";
    } else {
      os << format_real(r.mean) << ',' << format_real(r.std) << ",0\n";
    }
  }
  return os.str();
}

}  // namespace molmetric::harness
