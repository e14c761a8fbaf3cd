#include "monotest/csv.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <sstream>
#include <utility>

namespace monotest {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no, const std::string& col) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(s, &consumed);
    if (consumed != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw CsvError("line " + std::to_string(line_no) + ": cannot parse " + col + " value '" + s + "'");
  }
}

long parse_long(const std::string& s, std::size_t line_no, const std::string& col) {
  try {
    std::size_t consumed = 0;
    const long v = std::stol(s, &consumed);
    if (consumed != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw CsvError("line " + std::to_string(line_no) + ": cannot parse " + col + " value '" + s + "'");
  }
}

// Yields (line_no, fields) for each data row after validating the header.
template <typename RowFn>
void for_each_row(std::istream& in, const std::string& expected_header, RowFn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  const auto expected = split_fields(expected_header);
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split_fields(t);
    if (!header_seen) {
      if (fields != expected) {
        throw CsvError("line " + std::to_string(line_no) + ": expected header '" + expected_header +
                       "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != expected.size()) {
      throw CsvError("line " + std::to_string(line_no) + ": expected " +
                     std::to_string(expected.size()) + " fields, got " +
                     std::to_string(fields.size()));
    }
    fn(line_no, fields);
  }
  if (!header_seen) throw CsvError("missing header row '" + expected_header + "'");
}

template <typename Sample>
Sample& group_for(std::vector<Sample>& groups, std::map<std::string, std::size_t>& index,
                  const std::string& label) {
  const auto it = index.find(label);
  if (it != index.end()) return groups[it->second];
  index.emplace(label, groups.size());
  groups.push_back(Sample{});
  groups.back().label = label;
  return groups.back();
}

}  // namespace

std::vector<DensitySample> read_density_csv(std::istream& in) {
  std::vector<DensitySample> groups;
  std::map<std::string, std::size_t> index;
  for_each_row(in, "group,x", [&](std::size_t line_no, const std::vector<std::string>& f) {
    auto& g = group_for(groups, index, f[0]);
    g.x.push_back(parse_double(f[1], line_no, "x"));
  });
  if (groups.empty()) throw CsvError("no data rows");
  return groups;
}

std::vector<RegressionSample> read_regression_csv(std::istream& in) {
  struct Raw {
    std::string label;
    std::vector<std::pair<long, double>> rows;
  };
  std::vector<Raw> raw;
  std::map<std::string, std::size_t> index;
  for_each_row(in, "group,i,y", [&](std::size_t line_no, const std::vector<std::string>& f) {
    auto& g = group_for(raw, index, f[0]);
    g.rows.emplace_back(parse_long(f[1], line_no, "i"), parse_double(f[2], line_no, "y"));
  });
  if (raw.empty()) throw CsvError("no data rows");

  std::vector<RegressionSample> groups;
  groups.reserve(raw.size());
  for (auto& g : raw) {
    std::sort(g.rows.begin(), g.rows.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    RegressionSample s;
    s.label = g.label;
    s.y.reserve(g.rows.size());
    for (std::size_t k = 0; k < g.rows.size(); ++k) {
      if (g.rows[k].first != static_cast<long>(k + 1)) {
        throw CsvError("group '" + g.label + "': design indices must be 1..n without gaps");
      }
      s.y.push_back(g.rows[k].second);
    }
    groups.push_back(std::move(s));
  }
  return groups;
}

std::vector<CensoredSample> read_censored_csv(std::istream& in) {
  std::vector<CensoredSample> groups;
  std::map<std::string, std::size_t> index;
  for_each_row(in, "group,x,delta", [&](std::size_t line_no, const std::vector<std::string>& f) {
    auto& g = group_for(groups, index, f[0]);
    g.x.push_back(parse_double(f[1], line_no, "x"));
    const long d = parse_long(f[2], line_no, "delta");
    if (d != 0 && d != 1) {
      throw CsvError("line " + std::to_string(line_no) + ": delta must be 0 or 1");
    }
    g.delta.push_back(static_cast<int>(d));
  });
  if (groups.empty()) throw CsvError("no data rows");
  return groups;
}

}  // namespace monotest
