#include "fieldplan/types.hpp"

#include <algorithm>
#include <set>

namespace fieldplan {

std::vector<std::string> DesignPlan::treatments() const {
  std::set<std::string> seen(treatment.begin(), treatment.end());
  return {seen.begin(), seen.end()};
}

std::map<std::string, std::vector<int>> DesignPlan::plots_by_treatment() const {
  std::map<std::string, std::vector<int>> out;
  for (int p = 0; p < layout.size(); ++p) out[treatment[static_cast<std::size_t>(p)]].push_back(p);
  return out;
}

std::vector<std::string> default_labels(int count, const std::string& prefix) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(count));
  if (prefix.empty() && count <= 26) {
    for (int i = 0; i < count; ++i) labels.push_back(std::string(1, char('A' + i)));
    return labels;
  }
  const std::string head = prefix.empty() ? "T" : prefix;
  int width = 1;
  for (int v = count; v >= 10; v /= 10) ++width;
  for (int i = 1; i <= count; ++i) {
    std::string digits = std::to_string(i);
    labels.push_back(head + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits);
  }
  return labels;
}

namespace {

// Per-group treatment counts must be either all equal (full replicate) or all
// <= 1 (incomplete block / p-rep group).
void check_groups(const DesignPlan& plan, const std::vector<int>& tags, const std::string& what,
                  std::vector<std::string>& problems) {
  std::map<int, std::map<std::string, int>> counts;
  for (int p = 0; p < plan.layout.size(); ++p) {
    counts[tags[static_cast<std::size_t>(p)]][plan.treatment[static_cast<std::size_t>(p)]]++;
  }
  for (const auto& [group, by_label] : counts) {
    int low = by_label.begin()->second;
    int high = low;
    for (const auto& [label, c] : by_label) {
      low = std::min(low, c);
      high = std::max(high, c);
    }
    if (high <= 1) continue;  // partial group: every treatment at most once
    bool full = (low == high);
    if (full) {
      // a full group must contain every treatment of the plan
      if (by_label.size() != plan.treatments().size()) full = false;
    }
    if (!full) {
      problems.push_back(what + " " + std::to_string(group) +
                         " is neither a full replicate nor a <=1-per-treatment group");
    }
  }
}

}  // namespace

std::vector<std::string> validate_plan(const DesignPlan& plan) {
  std::vector<std::string> problems;
  const auto n = static_cast<std::size_t>(plan.layout.size());
  if (plan.layout.rows < 1 || plan.layout.cols < 1) problems.push_back("layout has empty dimensions");
  if (plan.treatment.size() != n) {
    problems.push_back("treatment assignment does not cover every plot exactly once");
    return problems;  // remaining checks assume a full assignment
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (plan.treatment[p].empty()) {
      problems.push_back("plot " + std::to_string(p) + " has an empty treatment label");
    }
  }
  for (const auto* tags : {&plan.rep, &plan.block, &plan.env}) {
    if (!tags->empty() && tags->size() != n) {
      problems.push_back("tag vector length does not match plot count");
      return problems;
    }
  }
  if (plan.has_rep()) check_groups(plan, plan.rep, "replicate", problems);
  if (plan.has_block()) check_groups(plan, plan.block, "block", problems);
  return problems;
}

}  // namespace fieldplan
