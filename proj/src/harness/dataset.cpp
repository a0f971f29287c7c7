//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "molmetric/harness.hpp"

namespace molmetric::harness {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Splits one CSV line; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
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
      fields.push_back(std::string(trim(cur)));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::string(trim(cur)));
  return fields;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in || std::filesystem::is_directory(path)) {
    throw InputError("UnreadableFile: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::optional<double> DatasetRecord::get(const std::string& column) const {
  const auto it = descriptors.find(column);
  if (it == descriptors.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Dataset::smiles() const {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const DatasetRecord& r : records) out.push_back(r.smiles);
  return out;
}

std::vector<std::string> NamedSet::smiles_list() const {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const DatasetRecord& r : records) out.push_back(r.smiles);
  return out;
}

Format format_for(const std::filesystem::path& path) {
  return lower(path.extension().string()) == ".csv" ? Format::kCsv : Format::kSmi;
}

Dataset parse_smi(std::string_view text) {
  Dataset out;
  for_each_line(text, [&](std::size_t, std::string_view line) {
    line = trim(line);
    if (line.empty()) return;
    const std::size_t end = line.find_first_of(" \t");
    out.records.push_back({std::string(line.substr(0, end)), {}});
  });
  return out;
}

Dataset parse_csv(std::string_view text) {
  Dataset out;
  std::vector<std::string> header;
  int smiles_col = -1;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty()) return;
    if (header.empty()) {
      header = split_csv(line);
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (lower(header[i]) == "smiles" && smiles_col < 0) {
          smiles_col = static_cast<int>(i);
        } else {
          out.columns.push_back(header[i]);
        }
      }
      if (smiles_col < 0) throw InputError("MissingColumn(smiles)");
      return;
    }
    const std::vector<std::string> fields = split_csv(line);
    const auto reject = [&](std::string reason) {
      out.rejects.push_back({line_no, std::string(line), std::move(reason)});
    };
    if (fields.size() != header.size()) {
      reject("expected " + std::to_string(header.size()) + " fields, found " +
             std::to_string(fields.size()));
      return;
    }
    DatasetRecord rec;
    rec.smiles = fields[static_cast<std::size_t>(smiles_col)];
    if (rec.smiles.empty()) {
      reject("empty smiles");
      return;
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (static_cast<int>(i) == smiles_col || fields[i].empty()) continue;
      const std::optional<double> v = parse_real(fields[i]);
      if (!v) {
        reject("column " + header[i] + ": cannot parse '" + fields[i] + "' as a real");
        return;
      }
      if (!std::isfinite(*v)) {
        reject("column " + header[i] + ": non-finite value '" + fields[i] + "'");
        return;
      }
      rec.descriptors[header[i]] = *v;
    }
    out.records.push_back(std::move(rec));
  });
  if (header.empty()) throw InputError("MissingColumn(smiles)");
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, Format format) {
  const std::string text = read_file(path);
  return format == Format::kCsv ? parse_csv(text) : parse_smi(text);
}

Dataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, format_for(path));
}

std::vector<DatasetRecord> select(std::span<const DatasetRecord> records,
                                  std::span<const std::size_t> indices) {
  std::vector<DatasetRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(records[i]);
  return out;
}

}  // namespace molmetric::harness
