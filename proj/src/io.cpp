#include "fieldplan/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace fieldplan {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  if (!current.empty()) lines.push_back(current);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& field, const std::string& what) {
  const std::string s = trim(field);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  require(ec == std::errc() && ptr == s.data() + s.size(), "non-integer-field",
          what + ": not an integer: '" + field + "'");
  return value;
}

double parse_double(const std::string& field, const std::string& what) {
  const std::string s = trim(field);
  require(!s.empty(), "non-numeric-yield", what + ": empty numeric field");
  errno = 0;
  char* end = nullptr;
  double value = std::strtod(s.c_str(), &end);
  require(errno == 0 && end == s.c_str() + s.size() && std::isfinite(value), "non-numeric-yield",
          what + ": not a finite number: '" + field + "'");
  return value;
}

// Shortest round-trip double formatting, locale independent.
std::string format_double(double v) {
  char buffer[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, v);
    double back = 0.0;
    std::sscanf(buffer, "%lf", &back);
    if (back == v) break;
  }
  return buffer;
}

}  // namespace

std::string write_design_csv(const DesignPlan& plan) {
  std::string out = "row,col,treatment";
  if (plan.has_rep()) out += ",rep";
  if (plan.has_block()) out += ",block";
  if (plan.has_env()) out += ",env";
  out += '\n';
  for (int p = 0; p < plan.layout.size(); ++p) {
    const auto i = static_cast<std::size_t>(p);
    out += std::to_string(plan.layout.row_of(p));
    out += ',';
    out += std::to_string(plan.layout.col_of(p));
    out += ',';
    out += plan.treatment[i];
    if (plan.has_rep()) out += ',' + std::to_string(plan.rep[i]);
    if (plan.has_block()) out += ',' + std::to_string(plan.block[i]);
    if (plan.has_env()) out += ',' + std::to_string(plan.env[i]);
    out += '\n';
  }
  return out;
}

DesignPlan parse_design_csv(const std::string& text) {
  const auto lines = split_lines(text);
  require(!lines.empty(), "empty-design-csv", "design CSV has no content");
  const auto header = split_fields(lines[0]);
  require(header.size() >= 3 && trim(header[0]) == "row" && trim(header[1]) == "col" &&
              trim(header[2]) == "treatment",
          "bad-design-header", "design CSV must start with header row,col,treatment[,rep,block,env]");
  int rep_col = -1, block_col = -1, env_col = -1;
  for (std::size_t i = 3; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (name == "rep") rep_col = static_cast<int>(i);
    else if (name == "block") block_col = static_cast<int>(i);
    else if (name == "env") env_col = static_cast<int>(i);
    else fail("bad-design-header", "unknown design CSV column '" + name + "'");
  }

  struct Record {
    std::string treatment;
    int rep = 0, block = 0, env = 0;
  };
  std::map<std::pair<int, int>, Record> records;
  int max_row = -1, max_col = -1;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_fields(lines[li]);
    require(fields.size() == header.size(), "bad-design-row",
            "line " + std::to_string(li + 1) + ": expected " + std::to_string(header.size()) +
                " fields, got " + std::to_string(fields.size()));
    const int row = parse_int(fields[0], "row");
    const int col = parse_int(fields[1], "col");
    require(row >= 0 && col >= 0, "coordinate-out-of-bounds",
            "line " + std::to_string(li + 1) + ": negative plot coordinate");
    Record rec;
    rec.treatment = trim(fields[2]);
    require(!rec.treatment.empty(), "missing-treatment",
            "line " + std::to_string(li + 1) + ": missing treatment label");
    if (rep_col >= 0) rec.rep = parse_int(fields[static_cast<std::size_t>(rep_col)], "rep");
    if (block_col >= 0) rec.block = parse_int(fields[static_cast<std::size_t>(block_col)], "block");
    if (env_col >= 0) rec.env = parse_int(fields[static_cast<std::size_t>(env_col)], "env");
    auto [it, inserted] = records.emplace(std::make_pair(row, col), rec);
    require(inserted, "duplicate-plot-coordinate",
            "plot (" + std::to_string(row) + "," + std::to_string(col) + ") appears more than once");
    max_row = std::max(max_row, row);
    max_col = std::max(max_col, col);
  }
  require(!records.empty(), "empty-design-csv", "design CSV has no plot rows");

  DesignPlan plan;
  plan.layout = FieldLayout(max_row + 1, max_col + 1);
  const auto n = static_cast<std::size_t>(plan.layout.size());
  require(records.size() == n, "missing-plot",
          "plot grid is not fully covered: have " + std::to_string(records.size()) + " of " +
              std::to_string(n) + " plots");
  plan.treatment.resize(n);
  if (rep_col >= 0) plan.rep.resize(n);
  if (block_col >= 0) plan.block.resize(n);
  if (env_col >= 0) plan.env.resize(n);
  for (const auto& [coord, rec] : records) {
    const auto p = static_cast<std::size_t>(plan.layout.index(coord.first, coord.second));
    plan.treatment[p] = rec.treatment;
    if (rep_col >= 0) plan.rep[p] = rec.rep;
    if (block_col >= 0) plan.block[p] = rec.block;
    if (env_col >= 0) plan.env[p] = rec.env;
  }
  return plan;
}

std::string write_uniformity_csv(const UniformityGrid& grid) {
  std::string out;
  for (int i = 0; i < grid.layout.rows; ++i) {
    for (int j = 0; j < grid.layout.cols; ++j) {
      if (j > 0) out += ',';
      out += format_double(grid.yield(i, j));
    }
    out += '\n';
  }
  return out;
}

UniformityGrid parse_uniformity_csv(const std::string& text) {
  const auto lines = split_lines(text);
  require(!lines.empty(), "empty-grid-csv", "uniformity CSV has no content");

  const auto first = split_fields(lines[0]);
  const bool long_form = first.size() == 3 && trim(first[0]) == "row" && trim(first[1]) == "col" &&
                         trim(first[2]) == "yield";
  if (long_form) {
    std::map<std::pair<int, int>, double> cells;
    int max_row = -1, max_col = -1;
    for (std::size_t li = 1; li < lines.size(); ++li) {
      if (trim(lines[li]).empty()) continue;
      const auto fields = split_fields(lines[li]);
      require(fields.size() == 3, "bad-grid-row",
              "line " + std::to_string(li + 1) + ": expected row,col,yield");
      const int row = parse_int(fields[0], "row");
      const int col = parse_int(fields[1], "col");
      require(row >= 0 && col >= 0, "coordinate-out-of-bounds", "negative grid coordinate");
      const double value = parse_double(fields[2], "yield");
      auto [it, inserted] = cells.emplace(std::make_pair(row, col), value);
      require(inserted, "duplicate-plot-coordinate",
              "cell (" + std::to_string(row) + "," + std::to_string(col) + ") appears more than once");
      max_row = std::max(max_row, row);
      max_col = std::max(max_col, col);
    }
    require(!cells.empty(), "empty-grid-csv", "uniformity CSV has no cells");
    const FieldLayout layout(max_row + 1, max_col + 1);
    require(static_cast<int>(cells.size()) == layout.size(), "missing-cell",
            "long-form grid does not cover every cell");
    Matrix yield(layout.rows, layout.cols);
    for (const auto& [coord, value] : cells) yield(coord.first, coord.second) = value;
    return UniformityGrid(layout, std::move(yield));
  }

  std::vector<std::vector<double>> matrix;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_fields(lines[li]);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, "yield"));
    if (!matrix.empty()) {
      require(row.size() == matrix[0].size(), "ragged-matrix",
              "line " + std::to_string(li + 1) + ": row length " + std::to_string(row.size()) +
                  " differs from " + std::to_string(matrix[0].size()));
    }
    matrix.push_back(std::move(row));
  }
  require(!matrix.empty(), "empty-grid-csv", "uniformity CSV has no cells");
  const FieldLayout layout(static_cast<int>(matrix.size()), static_cast<int>(matrix[0].size()));
  Matrix yield(layout.rows, layout.cols);
  for (int i = 0; i < layout.rows; ++i)
    for (int j = 0; j < layout.cols; ++j) yield(i, j) = matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return UniformityGrid(layout, std::move(yield));
}

std::string write_plan_metadata(const DesignPlan& plan) {
  nlohmann::json meta;
  meta["class"] = plan.design_class;
  meta["seed"] = plan.seed;
  meta["dims"] = {{"rows", plan.layout.rows},
                  {"cols", plan.layout.cols},
                  {"treatments", plan.treatments().size()}};
  return meta.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "unreadable-input", "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    require(out.good(), "unwritable-output", "cannot open '" + temp + "'");
    out << content;
    out.flush();
    require(out.good(), "unwritable-output", "failed writing '" + temp + "'");
  }
  require(std::rename(temp.c_str(), path.c_str()) == 0, "unwritable-output",
          "cannot rename '" + temp + "' to '" + path + "': " + std::strerror(errno));
}

}  // namespace fieldplan
