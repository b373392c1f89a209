#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "detox/core/errors.hpp"
#include "detox/core/types.hpp"
#include "detox/util/io.hpp"

namespace detox::ingest {

enum class SourceFormat { jsonl, tsv, csv };

inline SourceFormat parse_source_format(std::string_view s) {
  if (s == "jsonl") return SourceFormat::jsonl;
  if (s == "tsv") return SourceFormat::tsv;
  if (s == "csv") return SourceFormat::csv;
  throw ConfigError("unknown source format '" + std::string(s) + "'");
}

struct ColumnMap {
  std::string text = "text";
  std::vector<std::string> labels;  // one column per annotator, or a single column of votes
  std::optional<std::string> lang;  // rows whose value differs from the source language are ignored
};

struct SourceSpec {
  std::string name;
  std::filesystem::path path;
  SourceFormat format = SourceFormat::jsonl;
  ColumnMap columns;
  LangTag lang;
};

inline void from_json(const json& j, SourceSpec& s) {
  s.name = j.at("name").get<std::string>();
  s.path = j.at("path").get<std::string>();
  s.format = parse_source_format(j.value("format", std::string("jsonl")));
  s.lang = j.at("lang").get<LangTag>();
  if (auto c = j.find("columns"); c != j.end()) {
    s.columns.text = c->value("text", std::string("text"));
    if (auto l = c->find("labels"); l != c->end()) {
      s.columns.labels = l->is_array() ? l->get<std::vector<std::string>>()
                                       : std::vector<std::string>{l->get<std::string>()};
    }
    if (auto l = c->find("lang"); l != c->end() && !l->is_null()) s.columns.lang = l->get<std::string>();
  }
  if (s.name.empty()) throw ConfigError("source without a name");
}

struct LoadResult {
  std::vector<ToxicSample> samples;
  std::size_t skipped = 0;        // malformed rows
  std::size_t other_language = 0;  // rows filtered out by the lang column
};

/// Splits delimited text into rows. CSV honours RFC 4180 quoting (quoted
/// fields may contain delimiters, doubled quotes and newlines); TSV fields
/// are split on tabs verbatim.
inline std::vector<std::vector<std::string>> read_delimited(const std::string& content, char delim, bool quoting) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool any = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    any = false;
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (quoting && in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (quoting && c == '"' && field.empty()) {
      in_quotes = true;
      any = true;
    } else if (c == delim) {
      end_field();
      any = true;
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_row();
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) end_row();
  return rows;
}

/// Parses annotator votes from a cell: "1", "0", "true", "toxic", or a
/// separated list such as "1,1,0". Fractional scores count as toxic from 0.5.
inline std::optional<std::vector<int>> parse_votes(const std::string& cell) {
  std::vector<int> votes;
  std::string token;
  auto flush = [&]() -> bool {
    if (token.empty()) return true;
    std::string t = token;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    token.clear();
    if (t == "true" || t == "toxic" || t == "yes") {
      votes.push_back(1);
      return true;
    }
    if (t == "false" || t == "non-toxic" || t == "neutral" || t == "no") {
      votes.push_back(0);
      return true;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) return false;
      votes.push_back(v >= 0.5 ? 1 : 0);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  };
  for (char c : cell) {
    if (c == ',' || c == ';' || c == '|' || c == ' ') {
      if (!flush()) return std::nullopt;
    } else {
      token += c;
    }
  }
  if (!flush()) return std::nullopt;
  return votes;
}

namespace detail {

inline std::optional<std::vector<int>> votes_from_json(const json& v) {
  if (v.is_array()) {
    std::vector<int> out;
    for (const auto& e : v) {
      auto part = votes_from_json(e);
      if (!part) return std::nullopt;
      out.insert(out.end(), part->begin(), part->end());
    }
    return out;
  }
  if (v.is_boolean()) return std::vector<int>{v.get<bool>() ? 1 : 0};
  if (v.is_number()) return std::vector<int>{v.get<double>() >= 0.5 ? 1 : 0};
  if (v.is_string()) return parse_votes(v.get<std::string>());
  return std::nullopt;
}

}  // namespace detail

/// Loads one raw corpus. Sample ids are "<source name>:<row index>" where the
/// row index counts data rows from zero (malformed rows keep their index).
inline LoadResult load_source(const SourceSpec& spec) {
  LoadResult result;
  if (!std::filesystem::exists(spec.path)) throw ConfigError("source '" + spec.name + "': missing file " + spec.path.string());
  const auto content = io::read_file(spec.path);

  auto make_sample = [&](std::size_t row, std::string text, std::vector<int> labels) {
    ToxicSample s;
    s.id = spec.name + ":" + std::to_string(row);
    s.lang = spec.lang;
    s.text = std::move(text);
    s.source = spec.name;
    s.labels = std::move(labels);
    result.samples.push_back(std::move(s));
  };
  auto skip = [&](std::size_t row, const std::string& why) {
    ++result.skipped;
    spdlog::warn("source '{}': skipping row {}: {}", spec.name, row, why);
  };

  if (spec.format == SourceFormat::jsonl) {
    std::istringstream in(content);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const std::size_t index = row++;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error&) {
        skip(index, "invalid JSON");
        continue;
      }
      if (!j.is_object() || !j.contains(spec.columns.text) || !j.at(spec.columns.text).is_string()) {
        skip(index, "missing text column '" + spec.columns.text + "'");
        continue;
      }
      if (spec.columns.lang) {
        auto it = j.find(*spec.columns.lang);
        if (it == j.end() || !it->is_string()) {
          skip(index, "missing language column");
          continue;
        }
        if (it->get<std::string>() != spec.lang.code()) {
          ++result.other_language;
          continue;
        }
      }
      std::vector<int> labels;
      bool bad = false;
      for (const auto& col : spec.columns.labels) {
        auto it = j.find(col);
        auto votes = it == j.end() ? std::nullopt : detail::votes_from_json(*it);
        if (!votes) {
          bad = true;
          break;
        }
        labels.insert(labels.end(), votes->begin(), votes->end());
      }
      if (bad) {
        skip(index, "missing or unparsable label column");
        continue;
      }
      make_sample(index, j.at(spec.columns.text).get<std::string>(), std::move(labels));
    }
    return result;
  }

  const bool csv = spec.format == SourceFormat::csv;
  auto rows = read_delimited(content, csv ? ',' : '\t', csv);
  if (rows.empty()) return result;

  const auto& header = rows.front();
  auto column_index = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("source '" + spec.name + "': missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto text_col = column_index(spec.columns.text);
  std::vector<std::size_t> label_cols;
  for (const auto& c : spec.columns.labels) label_cols.push_back(column_index(c));
  std::optional<std::size_t> lang_col;
  if (spec.columns.lang) lang_col = column_index(*spec.columns.lang);

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t index = r - 1;
    const auto& fields = rows[r];
    if (fields.size() == 1 && fields[0].empty()) {
      skip(index, "blank line");
      continue;
    }
    if (fields.size() != header.size()) {
      skip(index, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    if (lang_col && fields[*lang_col] != spec.lang.code()) {
      ++result.other_language;
      continue;
    }
    std::vector<int> labels;
    bool bad = false;
    for (auto col : label_cols) {
      auto votes = parse_votes(fields[col]);
      if (!votes) {
        bad = true;
        break;
      }
      labels.insert(labels.end(), votes->begin(), votes->end());
    }
    if (bad) {
      skip(index, "unparsable label");
      continue;
    }
    make_sample(index, fields[text_col], std::move(labels));
  }
  return result;
}

}  // namespace detox::ingest
