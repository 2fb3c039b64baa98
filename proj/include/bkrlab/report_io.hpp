#pragma once

// CSV and markdown emission for report lists, and reading CSV back.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bkrlab/report.hpp"
#include "bkrlab/space.hpp"

namespace bkr {

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"name",   "lhs",     "rhs", "slack", "holds",
                                             "method", "witness", "ci",  "kind"};
  return cols;
}

/// 17 significant digits: round-trips every double.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline const char* kind_name(const InequalityReport& r) { return r.observation ? "observation" : "theorem"; }

/// "lhs_half_width;rhs_half_width;samples" for Monte Carlo rows, empty otherwise.
inline std::string ci_field(const InequalityReport& r) {
  if (!r.mc) return "";
  return fmt17(r.mc->lhs_half_width) + ";" + fmt17(r.mc->rhs_half_width) + ";" + std::to_string(r.mc->samples);
}

inline void write_csv(std::ostream& os, const std::vector<InequalityReport>& reports) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : reports) {
    os << csv_quote(r.name) << ',' << fmt17(r.lhs) << ',' << fmt17(r.rhs) << ',' << fmt17(r.slack) << ','
       << (r.holds ? "true" : "false") << ',' << method_name(r.method) << ',' << csv_quote(r.witness) << ','
       << ci_field(r) << ',' << kind_name(r) << '\n';
  }
}

/// Rows of a CSV file, handling quoted fields.
inline std::vector<std::vector<std::string>> read_csv(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (is.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          field += '"';
          is.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw InvalidInput("csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Markdown table from CSV rows (header row first, in write_csv layout).
inline void write_markdown_rows(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) throw InvalidInput("csv: empty file");
  const auto& head = rows[0];
  if (head != csv_columns()) throw InvalidInput("csv: unexpected header");
  auto cell = [](std::string s) {
    std::string out;
    for (char c : s) out += c == '|' ? std::string("\\|") : std::string(1, c);
    return out;
  };
  auto num = [](const std::string& s) {
    try {
      return fmt6(std::stod(s));
    } catch (const std::exception&) {
      throw InvalidInput("csv: bad number '" + s + "'");
    }
  };
  os << "| name | lhs | rhs | slack | holds | method | kind | witness |\n";
  os << "|---|---|---|---|---|---|---|---|\n";
  std::size_t violated = 0, theorems = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != head.size()) throw InvalidInput("csv: row " + std::to_string(i + 1) + " has wrong field count");
    os << "| " << cell(r[0]) << " | " << num(r[1]) << " | " << num(r[2]) << " | " << num(r[3]) << " | " << r[4]
       << " | " << r[5] << " | " << r[8] << " | " << cell(r[6]) << " |\n";
    if (r[8] == "theorem") {
      ++theorems;
      if (r[4] != "true") ++violated;
    }
  }
  os << "\n" << theorems << " inequalities checked, " << violated << " violated; " << (rows.size() - 1 - theorems)
     << " observations.\n";
}

inline void write_markdown(std::ostream& os, const std::vector<InequalityReport>& reports) {
  std::stringstream ss;
  write_csv(ss, reports);
  write_markdown_rows(os, read_csv(ss));
}

/// True when every non-observation report holds.
inline bool all_hold(const std::vector<InequalityReport>& reports) {
  for (const auto& r : reports)
    if (!r.observation && !r.holds) return false;
  return true;
}

}  // namespace bkr
