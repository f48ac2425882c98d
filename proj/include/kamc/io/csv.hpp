#pragma once

#include <charconv>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kamc/combinatorics.hpp"
#include "kamc/error.hpp"
#include "kamc/exterior.hpp"
#include "kamc/ka/outer.hpp"
#include "kamc/training/interleave.hpp"

namespace kamc::io {

// CSV dialect: comma separated, header row, LF line endings, floats with 17
// significant digits, empty field for an absent value.

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

inline double parse_double(std::string_view s) {
  // strtod rather than from_chars: libstdc++ 11 lacks floating from_chars.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw Error("csv: cannot parse number '" + tmp + "'");
  return v;
}

inline std::optional<double> parse_optional(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

inline std::size_t parse_size(std::string_view s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error("csv: cannot parse integer '" + std::string(s) + "'");
  return v;
}

using CsvRow = std::vector<std::string>;

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;
};

inline std::string write_csv(const CsvTable& t) {
  std::string out;
  auto line = [&](const CsvRow& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += r[i];
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

inline CsvTable read_csv(std::string_view text) {
  CsvTable t;
  bool first = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    CsvRow row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (first) {
      t.header = std::move(row);
      first = false;
    } else {
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

inline std::string format_subset(const Subset& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(s[i]);
  }
  return out;
}

inline Subset parse_subset(std::string_view s) {
  Subset out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto sp = s.find(' ', start);
    out.push_back(parse_size(s.substr(start, sp - start)));
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  return out;
}

/// One row per minor: rowSubset, colSubset, value (subsets space separated).
inline std::string minors_csv(const MinorTable& t) {
  CsvTable out{{"rowSubset", "colSubset", "value"}, {}};
  const auto rs = t.row_subsets();
  const auto cs = t.col_subsets();
  for (std::size_t r = 0; r < rs.size(); ++r)
    for (std::size_t c = 0; c < cs.size(); ++c)
      out.rows.push_back({format_subset(rs[r]), format_subset(cs[c]), format_double(t(r, c))});
  return write_csv(out);
}

/// Inverse of minors_csv given the source shape.
inline MinorTable minors_from_csv(std::string_view text, std::size_t source_rows,
                                  std::size_t source_cols) {
  const CsvTable t = read_csv(text);
  if (t.rows.empty()) throw Error("minors csv: no rows");
  const std::size_t h = parse_subset(t.rows.front().at(0)).size();
  Matrix grid(binomial(source_rows, h), binomial(source_cols, h));
  if (t.rows.size() != grid.size()) throw Error("minors csv: wrong row count");
  for (const auto& row : t.rows)
    grid(subset_rank(parse_subset(row.at(0)), source_rows),
         subset_rank(parse_subset(row.at(1)), source_cols)) = parse_double(row.at(2));
  return MinorTable(h, source_rows, source_cols, std::move(grid));
}

/// iteration, supError, ratio (ratio empty for iteration 0).
inline std::string iteration_csv(const ka::IterationReport& r) {
  CsvTable out{{"iteration", "supError", "ratio"}, {}};
  for (std::size_t t = 0; t < r.errors.size(); ++t)
    out.rows.push_back({std::to_string(t), format_double(r.errors[t]),
                        t == 0 ? std::string{} : format_double(r.ratios[t - 1])});
  return write_csv(out);
}

inline ka::IterationReport iteration_from_csv(std::string_view text) {
  ka::IterationReport r;
  for (const auto& row : read_csv(text).rows) {
    r.errors.push_back(parse_double(row.at(1)));
    if (auto ratio = parse_optional(row.at(2))) r.ratios.push_back(*ratio);
  }
  return r;
}

/// step, taskLoss, mcValue, deltaPrimeApplied, degenerateCount.
inline std::string metrics_csv(const training::RunMetrics& m) {
  CsvTable out{{"step", "taskLoss", "mcValue", "deltaPrimeApplied", "degenerateCount"}, {}};
  for (const auto& r : m.records)
    out.rows.push_back({std::to_string(r.step), format_double(r.task_loss),
                        format_optional(r.mc_value), format_double(r.delta_prime_applied),
                        std::to_string(r.degenerate_count)});
  return write_csv(out);
}

inline std::vector<training::StepRecord> metrics_from_csv(std::string_view text) {
  std::vector<training::StepRecord> out;
  for (const auto& row : read_csv(text).rows) {
    training::StepRecord r;
    r.step = parse_size(row.at(0));
    r.task_loss = parse_double(row.at(1));
    r.mc_value = parse_optional(row.at(2));
    r.delta_prime_applied = parse_double(row.at(3));
    r.degenerate_count = parse_size(row.at(4));
    out.push_back(r);
  }
  return out;
}

/// step, then taskLoss_r / mcValue_r for every run r.
inline std::string comparison_csv(const training::ComparisonReport& c) {
  CsvTable out{{"step"}, {}};
  for (std::size_t r = 0; r < c.runs.size(); ++r) {
    out.header.push_back("taskLoss_" + std::to_string(r));
    out.header.push_back("mcValue_" + std::to_string(r));
  }
  for (const auto& row : c.aligned) {
    CsvRow line{std::to_string(row.step)};
    for (std::size_t r = 0; r < row.task_loss.size(); ++r) {
      line.push_back(format_double(row.task_loss[r]));
      line.push_back(format_optional(row.mc_value[r]));
    }
    out.rows.push_back(std::move(line));
  }
  return write_csv(out);
}

}  // namespace kamc::io
