#pragma once

#include <string>

#include "fieldplan/types.hpp"

namespace fieldplan {

// Design CSV: header `row,col,treatment[,rep,block,env]`, one plot per line,
// UTF-8, LF line endings. Optional columns are present iff the plan carries
// the corresponding tags. Rows are written in row-major plot order, which is
// the canonical form the parser round-trips bit-exactly.
std::string write_design_csv(const DesignPlan& plan);
DesignPlan parse_design_csv(const std::string& text);

// Uniformity CSV: headerless real matrix, or long form `row,col,yield`
// (detected by its header). The writer emits the matrix form.
std::string write_uniformity_csv(const UniformityGrid& grid);
UniformityGrid parse_uniformity_csv(const std::string& text);

// Metadata JSON sidecar: { "class": ..., "seed": ..., "dims": {...} }.
std::string write_plan_metadata(const DesignPlan& plan);

std::string read_text_file(const std::string& path);
// Write-to-temp then atomic rename; no partial output is ever visible.
void write_text_file_atomic(const std::string& path, const std::string& content);

}  // namespace fieldplan
