// fieldplan: field-experiment design generation, uniformity-trial validity
// checking, balanced MET analysis, power and trial allocation.

#include <CLI11.hpp>
#include <chrono>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fieldplan/allocation.hpp"
#include "fieldplan/aopt.hpp"
#include "fieldplan/augmented.hpp"
#include "fieldplan/design.hpp"
#include "fieldplan/io.hpp"
#include "fieldplan/met.hpp"
#include "fieldplan/met_stats.hpp"
#include "fieldplan/nbed.hpp"
#include "fieldplan/power.hpp"
#include "fieldplan/prep.hpp"
#include "fieldplan/sliding.hpp"
#include "fieldplan/validity.hpp"

namespace {

using nlohmann::json;
using namespace fieldplan;

constexpr const char* kVersion = "0.3.0";

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

// Tracks everything needed to reproduce a run; written next to the primary
// output as <out>.manifest.json.
struct Manifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  bool has_seed = false;
  json input_digests = json::object();
  std::vector<std::string> outputs;

  void add_input(const std::string& path, const std::string& content) {
    input_digests[path] = hex64(fnv1a(content));
  }

  void write(const std::string& primary_output) const {
    json doc;
    doc["tool"] = "fieldplan";
    doc["version"] = kVersion;
    doc["subcommand"] = subcommand;
    doc["argv"] = argv;
    if (has_seed) doc["seed"] = seed;
    doc["inputs"] = input_digests;
    doc["outputs"] = outputs;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    doc["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    write_text_file_atomic(primary_output + ".manifest.json", doc.dump(2) + "\n");
  }
};

std::string read_input(Manifest& manifest, const std::string& path) {
  std::string content = read_text_file(path);
  manifest.add_input(path, content);
  return content;
}

int resolve_threads(int threads_flag) {
  if (threads_flag > 0) return threads_flag;
  if (const char* env = std::getenv("FIELDPLAN_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 1;
}

Matrix parse_numeric_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::string field;
    std::istringstream fields(line);
    while (std::getline(fields, field, ',')) row.push_back(std::stod(field));
    require(rows.empty() || row.size() == rows[0].size(), "ragged-matrix",
            "numeric CSV rows have unequal length");
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "empty-matrix", "numeric CSV has no rows");
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[0].size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

SyntheticGridSpec parse_synthetic_spec(const std::string& text) {
  const json doc = json::parse(text);
  SyntheticGridSpec spec;
  spec.rows = doc.at("rows").get<int>();
  spec.cols = doc.at("cols").get<int>();
  spec.rho_row = doc.value("rho_row", 0.0);
  spec.rho_col = doc.value("rho_col", 0.0);
  spec.sigma2 = doc.value("sigma2", 1.0);
  spec.trend_row = doc.value("trend_row", 0.0);
  spec.trend_col = doc.value("trend_col", 0.0);
  spec.validate();
  return spec;
}

json ems_to_json(const std::vector<EmsTerm>& ems) {
  json out = json::object();
  for (const auto& term : ems) out[ems_symbol_name(term.symbol)] = term.coefficient;
  return out;
}

json component_to_json(const Component& c) {
  json out;
  out["value"] = c.value;
  out["negative"] = c.negative;
  out["available"] = c.available;
  return out;
}

json validity_report_to_json(const ValidityReport& report) {
  json doc;
  doc["n_reps"] = report.n_reps;
  doc["n_valid"] = report.n_valid;
  doc["n_degenerate"] = report.n_degenerate;
  doc["alpha"] = report.alpha;
  doc["type1_rate"] = report.type1_rate;
  doc["type1_ci"] = {{"lower", report.type1_ci.lower}, {"upper", report.type1_ci.upper}};
  doc["empirical_sed"] = report.empirical_sed;
  doc["mean_model_sed"] = report.mean_model_sed;
  doc["sed_ratio"] = report.sed_ratio;
  doc["mean_tec"] = report.mean_tec;
  doc["se_tec"] = report.se_tec;
  doc["null_tec"] = report.null_tec;
  doc["design_policy"] = report.design_policy;
  doc["grid_policy"] = report.grid_policy;
  return doc;
}

std::string points_csv(const ValidityReport& report) {
  std::string out = "rep,degenerate,p_value,tec,model_sed\n";
  for (const auto& point : report.points) {
    char line[160];
    std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g\n", point.rep,
                  point.degenerate ? 1 : 0, point.p_value, point.tec, point.model_sed);
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string design_class;
  int t = 0, r = 0, rows = 0, cols = 0;
  std::uint64_t seed = 0;
  std::string out;
  // class specific
  std::string latin_class = "full";
  std::string pattern = "repeat";
  bool permute_labels = false;
  int max_row_adjacency = 1, ed_rows = 1, ed_cols = 1, ed_cap = 1;
  bool col_adjacency = false;
  int checks = 0, n_test = 0, check_reps = 0;
  int n_env = 0, dup_per_env = 0, blocks_per_env = 0;
  std::int64_t max_iters = 200000;
  int window = 5;
  double sigma_b2 = 1.0, sigma_e2 = 0.1;
  bool wrap = false;
  std::string cov_file;
};

FieldLayout generate_layout(const GenerateArgs& a) {
  if (a.rows > 0 && a.cols > 0) return FieldLayout(a.rows, a.cols);
  return FieldLayout(1, a.t * a.r);
}

void run_generate(const GenerateArgs& a, Manifest& manifest) {
  DesignPlan plan;
  json extra = json::object();
  if (a.design_class == "crd") {
    plan = gen_crd(a.t, a.r, generate_layout(a), a.seed);
  } else if (a.design_class == "rcbd") {
    plan = gen_rcbd(a.t, a.r, generate_layout(a), a.seed);
  } else if (a.design_class == "latin") {
    LatinClass latin_class;
    if (a.latin_class == "full") latin_class.kind = LatinKind::full;
    else if (a.latin_class == "knut_vik") latin_class.kind = LatinKind::knut_vik;
    else if (a.latin_class == "diagonal") latin_class.kind = LatinKind::diagonal;
    else fail("unknown-latin-class", "latin class must be full, knut_vik or diagonal");
    plan = gen_latin(a.t, latin_class, a.seed);
  } else if (a.design_class == "systematic") {
    SystematicPattern pattern;
    if (a.pattern == "repeat") pattern = SystematicPattern::repeat;
    else if (a.pattern == "sandwich") pattern = SystematicPattern::sandwich;
    else fail("unknown-pattern", "pattern must be repeat or sandwich");
    plan = gen_systematic(a.t, a.r, pattern, a.permute_labels, a.seed);
  } else if (a.design_class == "nbed") {
    NbEdConstraints constraints;
    constraints.max_row_adjacency = a.max_row_adjacency;
    constraints.ed_rows = a.ed_rows;
    constraints.ed_cols = a.ed_cols;
    constraints.ed_cap = a.ed_cap;
    constraints.include_col_adjacency = a.col_adjacency;
    auto result = nbed_search(a.t, a.rows, a.cols, a.r, constraints, a.seed, a.max_iters);
    plan = std::move(result.plan);
    extra["evaluations"] = result.evaluations;
  } else if (a.design_class == "augmented") {
    auto result = gen_augmented_rowcolumn(a.checks, a.n_test, a.rows, a.cols, a.check_reps, a.seed,
                                          a.max_iters);
    plan = std::move(result.plan);
    extra["aef"] = result.efficiency.aef;
    extra["evaluations"] = result.evaluations;
  } else if (a.design_class == "prep") {
    auto result = gen_prep(a.t, a.n_env, a.dup_per_env, a.blocks_per_env, a.seed, a.max_iters);
    plan = std::move(result.plan);
    extra["aef"] = result.efficiency.aef;
    extra["evaluations"] = result.evaluations;
  } else if (a.design_class == "aopt") {
    const FieldLayout layout(1, a.t * a.r);
    Matrix cov;
    if (!a.cov_file.empty()) {
      cov = parse_numeric_csv(read_input(manifest, a.cov_file));
    } else {
      cov = sliding_block_covariance(layout.size(), SlidingBlockSpec(a.window, a.sigma_b2, a.sigma_e2),
                                     a.wrap);
    }
    auto result = aopt_search(layout, a.t, a.r, cov, a.seed, a.max_iters);
    plan = std::move(result.plan);
    extra["criterion"] = result.criterion;
    extra["evaluations"] = result.evaluations;
  } else {
    fail("unknown-design-class", "no generator for class '" + a.design_class + "'");
  }

  const auto problems = validate_plan(plan);
  require(problems.empty(), "invalid-generated-plan",
          problems.empty() ? "" : problems.front());

  write_text_file_atomic(a.out, write_design_csv(plan));
  manifest.outputs.push_back(a.out);
  json meta = json::parse(write_plan_metadata(plan));
  for (auto& [key, value] : extra.items()) meta[key] = value;
  const std::string meta_path = a.out + ".meta.json";
  write_text_file_atomic(meta_path, meta.dump(2) + "\n");
  manifest.outputs.push_back(meta_path);
}

// ---------------------------------------------------------------------------
// validate / tec

struct ValidateArgs {
  std::string design_file;
  std::string design_class;
  int t = 5, r = 4;
  std::string pattern = "repeat";
  std::string grid_file;
  std::string synthetic_file;
  std::string model = "rcbd";
  std::string gls_cov_file;
  double alpha = 0.05;
  int reps = 1000;
  std::uint64_t seed = 0;
  std::string out;
  std::string points_file;
  std::string placement = "random";
  bool permute_labels = true;
  int threads = 0;
};

ModelSpec parse_model(const std::string& name, const std::string& gls_cov_file, Manifest& manifest) {
  ModelSpec model;
  if (name == "crd") model.kind = NullModel::crd;
  else if (name == "rcbd") model.kind = NullModel::rcbd;
  else if (name == "rowcol") model.kind = NullModel::rowcol;
  else if (name == "ancova") model.kind = NullModel::ancova_position;
  else fail("unknown-model", "model must be crd, rcbd, rowcol or ancova");
  if (!gls_cov_file.empty()) model.gls_cov = parse_numeric_csv(read_input(manifest, gls_cov_file));
  return model;
}

void run_validate(const ValidateArgs& a, Manifest& manifest) {
  ValiditySpec spec;
  spec.model = parse_model(a.model, a.gls_cov_file, manifest);
  spec.alpha = a.alpha;
  spec.n_reps = a.reps;
  spec.collect_points = !a.points_file.empty();
  spec.random_placement = a.placement == "random";

  if (!a.design_file.empty()) {
    DesignPlan plan = parse_design_csv(read_input(manifest, a.design_file));
    spec.design_policy = a.permute_labels ? "fixed-plan+label-permutation" : "fixed-plan";
    spec.draw_design = fixed_plan_source(std::move(plan), a.permute_labels);
  } else if (a.design_class == "crd") {
    const FieldLayout layout(1, a.t * a.r);
    const int t = a.t, r = a.r;
    spec.draw_design = [t, r, layout](Rng& rng, int) { return gen_crd(t, r, layout, rng.bits()); };
    spec.design_policy = "rerandomized-crd";
  } else if (a.design_class == "rcbd") {
    const FieldLayout layout(1, a.t * a.r);
    const int t = a.t, r = a.r;
    spec.draw_design = [t, r, layout](Rng& rng, int) { return gen_rcbd(t, r, layout, rng.bits()); };
    spec.design_policy = "rerandomized-rcbd";
  } else if (a.design_class == "systematic") {
    const SystematicPattern pattern =
        a.pattern == "sandwich" ? SystematicPattern::sandwich : SystematicPattern::repeat;
    DesignPlan plan = gen_systematic(a.t, a.r, pattern);
    spec.design_policy = a.permute_labels ? "systematic+label-permutation" : "systematic-fixed";
    spec.draw_design = fixed_plan_source(std::move(plan), a.permute_labels);
  } else if (a.design_class == "latin" || a.design_class == "knut_vik" ||
             a.design_class == "diagonal") {
    LatinClass latin_class;
    latin_class.kind = a.design_class == "latin"      ? LatinKind::full
                       : a.design_class == "knut_vik" ? LatinKind::knut_vik
                                                      : LatinKind::diagonal;
    const int t = a.t;
    spec.draw_design = [t, latin_class](Rng& rng, int) { return gen_latin(t, latin_class, rng.bits()); };
    spec.design_policy = "rerandomized-" + a.design_class;
  } else {
    fail("missing-design-source", "give --design or a supported --class");
  }

  if (!a.grid_file.empty()) {
    spec.draw_grid = fixed_grid_source(parse_uniformity_csv(read_input(manifest, a.grid_file)));
    spec.grid_policy = "fixed-grid";
  } else if (!a.synthetic_file.empty()) {
    spec.draw_grid = synthetic_grid_source(parse_synthetic_spec(read_input(manifest, a.synthetic_file)));
    spec.grid_policy = "fresh-synthetic-per-rep";
  } else {
    fail("missing-grid-source", "give --grid or --synthetic");
  }

  const ValidityReport report = empirical_validity(spec, a.seed, resolve_threads(a.threads));
  json doc = validity_report_to_json(report);
  doc["seed"] = a.seed;
  write_text_file_atomic(a.out, doc.dump(2) + "\n");
  manifest.outputs.push_back(a.out);
  if (!a.points_file.empty()) {
    write_text_file_atomic(a.points_file, points_csv(report));
    manifest.outputs.push_back(a.points_file);
  }
}

// ---------------------------------------------------------------------------
// anova

void run_anova(const std::string& data_file, const std::string& aggregate, const std::string& out,
               Manifest& manifest) {
  MetDataset data = parse_met_csv(read_input(manifest, data_file));
  if (aggregate == "means" || aggregate == "sums") {
    data = aggregate_met(data, aggregate == "means" ? AggregationMode::means : AggregationMode::sums);
  } else {
    require(aggregate == "plots", "unknown-aggregation", "aggregate must be plots, means or sums");
  }
  const AnovaTable table = anova_met(data);
  {
    double corrected_ss = 0.0;
    for (const auto& row : table.rows) {
      if (row.source != "general-mean") corrected_ss += row.ss;
    }
    require(corrected_ss > 1e-12 * std::max(1.0, data.y.squaredNorm()), "degenerate-data",
            "dataset has no variation around the general mean");
  }

  json doc;
  doc["dims"] = {{"t", data.dims.t}, {"m", data.dims.m}, {"n", data.dims.n}, {"r", data.dims.r}};
  doc["rows"] = json::array();
  for (const auto& row : table.rows) {
    doc["rows"].push_back({{"source", row.source},
                           {"df", row.df},
                           {"ss", row.ss},
                           {"ms", row.ms},
                           {"ems", ems_to_json(row.ems)}});
  }
  const VarianceComponents vc = mom_components(table, data.dims);
  doc["components"] = {{"sigma2", component_to_json(vc.sigma2)},
                       {"sigma_fs2", component_to_json(vc.sigma_fs2)},
                       {"sigma_f2", component_to_json(vc.sigma_f2)},
                       {"sigma_s2", component_to_json(vc.sigma_s2)},
                       {"sigma_ftau2", component_to_json(vc.sigma_ftau2)},
                       {"sigma_taus2", component_to_json(vc.sigma_taus2)},
                       {"sigma_ftaus2", component_to_json(vc.sigma_ftaus2)},
                       {"sigma_tau2", component_to_json(vc.sigma_tau2)}};

  const auto est_vm = est_var_general_mean(table, data.dims);
  doc["est_var_general_mean"] = {{"value", est_vm.value}, {"negative", est_vm.negative}};
  {
    const auto& f = table.row("farms");
    const auto& s = table.row("seasons");
    const auto& fs = table.row("farms-x-seasons");
    if (est_vm.value > 0.0) {
      doc["est_var_general_mean"]["satterthwaite_df"] = satterthwaite_df(
          {{f.ms, double(f.df), +1}, {s.ms, double(s.df), +1}, {fs.ms, double(fs.df), -1}});
    }
  }
  if (data.dims.t > 1) {
    const auto est_sv = est_semivariance(table, data.dims);
    doc["est_semivariance"] = {{"value", est_sv.value}, {"negative", est_sv.negative}};
    doc["semivariance_from_components"] = semivariance(vc, data.dims);
    if (est_sv.value > 0.0 && vc.sigma_tau2.value >= 0.0) {
      doc["heritability"] = heritability(std::max(0.0, vc.sigma_tau2.value), est_sv.value);
    }
    const auto& tf = table.row("treatments-x-farms");
    const auto& ts = table.row("treatments-x-seasons");
    const auto& tfs = table.row("treatments-x-farms-x-seasons");
    if (est_sv.value > 0.0) {
      doc["est_semivariance"]["satterthwaite_df"] = satterthwaite_df(
          {{tf.ms, double(tf.df), +1}, {ts.ms, double(ts.df), +1}, {tfs.ms, double(tfs.df), -1}});
      const TreatmentTest test = met_treatment_test(table);
      doc["treatment_test"] = {{"f", test.f},
                               {"ndf", test.ndf},
                               {"ddf", test.ddf},
                               {"p_value", test.p_value},
                               {"denominator_ms", test.denominator}};
    }
  }
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_text_file_atomic(out, doc.dump(2) + "\n");
    manifest.outputs.push_back(out);
  }
}

// ---------------------------------------------------------------------------
// power

void run_power(const std::string& frame_file, const std::string& vc_file,
               const std::string& contrast_file, double alpha, const std::string& ddf_rule,
               double user_ddf, const std::string& out, Manifest& manifest) {
  PowerRequest request;
  request.alpha = alpha;

  // frame: arbitrary factor columns plus y carrying the fixed-effect truth
  {
    std::istringstream in(read_input(manifest, frame_file));
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "empty-frame", "frame CSV has no content");
    std::vector<std::string> names;
    {
      std::istringstream fields(line);
      std::string field;
      while (std::getline(fields, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        names.push_back(field);
      }
    }
    require(!names.empty() && names.back() == "y", "bad-frame-header",
            "frame CSV must end with a y column");
    std::vector<std::map<std::string, int>> level_maps(names.size() - 1);
    std::vector<std::vector<std::string>> raw_columns(names.size() - 1);
    std::vector<double> y_values;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string field;
      std::size_t c = 0;
      while (std::getline(fields, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        if (c + 1 < names.size()) {
          level_maps[c].emplace(field, 0);
          raw_columns[c].push_back(field);
        } else {
          y_values.push_back(std::stod(field));
        }
        ++c;
      }
      require(c == names.size(), "bad-frame-row", "frame row has the wrong field count");
    }
    require(!y_values.empty(), "empty-frame", "frame CSV has no data rows");
    for (auto& level_map : level_maps) {
      int next = 0;
      for (auto& [label, id] : level_map) id = next++;
    }
    for (std::size_t c = 0; c + 1 < names.size(); ++c) {
      std::vector<int> column;
      column.reserve(raw_columns[c].size());
      for (const auto& label : raw_columns[c]) column.push_back(level_maps[c].at(label));
      request.factors[names[c]] = std::move(column);
    }
    require(request.factors.count("treatment"), "missing-treatment-column",
            "frame needs a treatment column");
    const auto& treatment = request.factors.at("treatment");
    int t = 0;
    for (int level : treatment) t = std::max(t, level + 1);
    request.treatment_means = Vector::Zero(t);
    Vector seen = Vector::Zero(t);
    for (std::size_t p = 0; p < y_values.size(); ++p) {
      const int h = treatment[p];
      if (seen(h) == 0.0) {
        request.treatment_means(h) = y_values[p];
        seen(h) = 1.0;
      } else {
        require(request.treatment_means(h) == y_values[p], "inconsistent-truth",
                "y must be constant within each treatment level");
      }
    }
  }

  {
    const json doc = json::parse(read_input(manifest, vc_file));
    request.residual_variance = doc.at("residual").get<double>();
    if (doc.contains("terms")) {
      for (const auto& term : doc.at("terms")) {
        RandomEffectTerm effect;
        for (const auto& factor : term.at("factors")) effect.factors.push_back(factor.get<std::string>());
        effect.variance = term.at("variance").get<double>();
        request.random_effects.push_back(std::move(effect));
      }
    }
  }

  request.contrast = parse_numeric_csv(read_input(manifest, contrast_file));
  if (ddf_rule == "residual") request.ddf_rule = DdfRule::residual;
  else if (ddf_rule == "satterthwaite") request.ddf_rule = DdfRule::satterthwaite;
  else if (ddf_rule == "user") {
    request.ddf_rule = DdfRule::user;
    request.user_ddf = user_ddf;
  } else {
    fail("unknown-ddf-rule", "ddf rule must be residual, satterthwaite or user");
  }

  const PowerResult result = stroup_power(request);
  json doc;
  doc["lambda"] = result.lambda;
  doc["ndf"] = result.ndf;
  doc["ddf"] = result.ddf;
  doc["critical_value"] = result.critical_value;
  doc["power"] = result.power;
  doc["alpha"] = alpha;
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_text_file_atomic(out, doc.dump(2) + "\n");
    manifest.outputs.push_back(out);
  }
}

// ---------------------------------------------------------------------------
// allocate

void run_allocate(const std::string& gamma_file, const std::string& v_file,
                  const std::string& weights_file, int budget, const std::string& method,
                  const std::string& out, Manifest& manifest) {
  AllocationProblem problem;
  problem.gamma = parse_numeric_csv(read_input(manifest, gamma_file));
  const Matrix v_mat = parse_numeric_csv(read_input(manifest, v_file));
  problem.v = v_mat.reshaped();
  problem.budget = budget;
  if (!weights_file.empty()) {
    const Matrix w_mat = parse_numeric_csv(read_input(manifest, weights_file));
    problem.weights = w_mat.reshaped();
  } else {
    problem.weights = equal_weights(problem.zones());
  }

  AllocationMethod m;
  if (method == "exhaustive") m = AllocationMethod::exhaustive;
  else if (method == "greedy") m = AllocationMethod::greedy;
  else fail("unknown-method", "method must be exhaustive or greedy");

  const AllocationResult result = optimize_allocation(problem, m);
  json doc;
  doc["alloc"] = result.alloc;
  doc["criterion"] = result.criterion;
  doc["certificate"] = result.certificate;
  doc["budget"] = budget;
  doc["criterion_model"] = "per-trial genotype-mean error variance v_p; zones without trials "
                           "predicted through the genetic covariance";
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_text_file_atomic(out, doc.dump(2) + "\n");
    manifest.outputs.push_back(out);
  }
}

// ---------------------------------------------------------------------------
// dispatch

int run_command(const std::vector<std::string>& args);

int run_rerun(const std::string& manifest_file) {
  const json doc = json::parse(read_text_file(manifest_file));
  std::vector<std::string> argv;
  for (const auto& arg : doc.at("argv")) argv.push_back(arg.get<std::string>());
  return run_command(argv);
}

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"field-experiment design, validity and MET analysis toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Manifest manifest;
  manifest.argv = args;

  // generate (and its p-rep alias)
  GenerateArgs gen;
  auto add_generate_options = [&](CLI::App* cmd, bool fixed_prep) {
    if (fixed_prep) gen.design_class = "prep";
    else cmd->add_option("--class", gen.design_class, "design class")->required();
    cmd->add_option("--t", gen.t, "number of treatments");
    cmd->add_option("--r", gen.r, "replicates");
    cmd->add_option("--rows", gen.rows, "layout rows");
    cmd->add_option("--cols", gen.cols, "layout columns");
    cmd->add_option("--seed", gen.seed, "random seed")->required();
    cmd->add_option("--out", gen.out, "output plan CSV")->required();
    cmd->add_option("--latin-class", gen.latin_class, "full|knut_vik|diagonal");
    cmd->add_option("--pattern", gen.pattern, "repeat|sandwich");
    cmd->add_flag("--permute-labels", gen.permute_labels, "apply a seeded label permutation");
    cmd->add_option("--max-row-adjacency", gen.max_row_adjacency, "NB cap per treatment pair");
    cmd->add_option("--ed-rows", gen.ed_rows, "coarse ED rows");
    cmd->add_option("--ed-cols", gen.ed_cols, "coarse ED columns");
    cmd->add_option("--ed-cap", gen.ed_cap, "max replicates per treatment per coarse cell");
    cmd->add_flag("--col-adjacency", gen.col_adjacency, "also restrict column adjacency");
    cmd->add_option("--checks", gen.checks, "number of check varieties");
    cmd->add_option("--n-test", gen.n_test, "number of unreplicated test lines");
    cmd->add_option("--check-reps", gen.check_reps, "replicates per check");
    cmd->add_option("--n-env", gen.n_env, "environments");
    cmd->add_option("--dup-per-env", gen.dup_per_env, "lines duplicated per environment");
    cmd->add_option("--blocks-per-env", gen.blocks_per_env, "incomplete blocks per environment");
    cmd->add_option("--max-iters", gen.max_iters, "search evaluation budget");
    cmd->add_option("--w", gen.window, "sliding-block window width");
    cmd->add_option("--sigma-b2", gen.sigma_b2, "sliding-block variance");
    cmd->add_option("--sigma-e2", gen.sigma_e2, "residual plot variance");
    cmd->add_flag("--wrap", gen.wrap, "circular sliding-block covariance");
    cmd->add_option("--cov", gen.cov_file, "explicit plot covariance CSV");
  };
  CLI::App* generate = app.add_subcommand("generate", "generate a design plan");
  add_generate_options(generate, false);
  CLI::App* prep_alias = app.add_subcommand("prep", "generate a p-rep MET design");
  add_generate_options(prep_alias, true);

  // validate
  ValidateArgs val;
  CLI::App* validate = app.add_subcommand("validate", "uniformity-overlay validity Monte Carlo");
  validate->add_option("--design", val.design_file, "fixed plan CSV");
  validate->add_option("--class", val.design_class, "crd|rcbd|systematic|latin|knut_vik|diagonal");
  validate->add_option("--t", val.t, "treatments (generated classes)");
  validate->add_option("--r", val.r, "replicates (generated classes)");
  validate->add_option("--pattern", val.pattern, "repeat|sandwich (systematic)");
  validate->add_option("--grid", val.grid_file, "fixed uniformity grid CSV");
  validate->add_option("--synthetic", val.synthetic_file, "synthetic grid spec JSON");
  validate->add_option("--model", val.model, "crd|rcbd|rowcol|ancova");
  validate->add_option("--gls-cov", val.gls_cov_file, "GLS plot covariance CSV");
  validate->add_option("--alpha", val.alpha, "test level");
  validate->add_option("--reps", val.reps, "Monte Carlo replicates")->required();
  validate->add_option("--seed", val.seed, "meta seed")->required();
  validate->add_option("--out", val.out, "report JSON")->required();
  validate->add_option("--emit-points", val.points_file, "per-replicate CSV");
  validate->add_option("--placement", val.placement, "random|fixed origin policy");
  validate->add_flag("!--no-permute-labels", val.permute_labels,
                     "disable label permutation for fixed plans");
  validate->add_option("--threads", val.threads, "worker threads");

  // tec
  ValidateArgs tec_args;
  tec_args.model = "rowcol";
  CLI::App* tec_cmd = app.add_subcommand("tec", "treatment-error-coefficient distribution");
  tec_cmd->add_option("--class", tec_args.design_class, "latin|knut_vik|diagonal|crd|rcbd")
      ->required();
  tec_cmd->add_option("--t", tec_args.t, "treatments");
  tec_cmd->add_option("--r", tec_args.r, "replicates (crd/rcbd)");
  tec_cmd->add_option("--grid", tec_args.grid_file, "fixed uniformity grid CSV");
  tec_cmd->add_option("--synthetic", tec_args.synthetic_file, "synthetic grid spec JSON");
  tec_cmd->add_option("--model", tec_args.model, "crd|rcbd|rowcol|ancova");
  tec_cmd->add_option("--reps", tec_args.reps, "Monte Carlo replicates")->required();
  tec_cmd->add_option("--seed", tec_args.seed, "meta seed")->required();
  tec_cmd->add_option("--out", tec_args.out, "report JSON")->required();
  tec_cmd->add_option("--emit-points", tec_args.points_file, "per-replicate CSV");
  tec_cmd->add_option("--threads", tec_args.threads, "worker threads");

  // anova
  std::string anova_data, anova_aggregate = "plots", anova_out;
  CLI::App* anova = app.add_subcommand("anova", "balanced MET ANOVA and variance components");
  anova->add_option("--data", anova_data, "MET CSV (treatment,farm,season,rep,y)")->required();
  anova->add_option("--aggregate", anova_aggregate, "plots|means|sums");
  anova->add_option("--out", anova_out, "output JSON (stdout when omitted)");

  // power
  std::string power_frame, power_vc, power_contrast, power_ddf = "residual", power_out;
  double power_alpha = 0.05, power_user_ddf = 0.0;
  CLI::App* power = app.add_subcommand("power", "fixed-variance noncentrality power");
  power->add_option("--frame", power_frame, "design frame CSV with y = truth means")->required();
  power->add_option("--vc", power_vc, "variance parameter JSON")->required();
  power->add_option("--contrast", power_contrast, "contrast matrix CSV")->required();
  power->add_option("--alpha", power_alpha, "test level");
  power->add_option("--ddf", power_ddf, "residual|satterthwaite|user");
  power->add_option("--ddf-value", power_user_ddf, "denominator df when --ddf user");
  power->add_option("--out", power_out, "output JSON (stdout when omitted)");

  // allocate
  std::string alloc_gamma, alloc_v, alloc_weights, alloc_method = "exhaustive", alloc_out;
  int alloc_budget = 0;
  CLI::App* allocate = app.add_subcommand("allocate", "optimal allocation of trials to zones");
  allocate->add_option("--gamma", alloc_gamma, "genetic covariance CSV")->required();
  allocate->add_option("--v", alloc_v, "per-zone per-trial error variance CSV")->required();
  allocate->add_option("--weights", alloc_weights, "per-zone weights CSV");
  allocate->add_option("--budget", alloc_budget, "total trials")->required();
  allocate->add_option("--method", alloc_method, "exhaustive|greedy");
  allocate->add_option("--out", alloc_out, "output JSON (stdout when omitted)");

  // rerun
  std::string rerun_manifest;
  CLI::App* rerun = app.add_subcommand("rerun", "re-execute a run from its manifest");
  rerun->add_option("--manifest", rerun_manifest, "manifest JSON")->required();

  std::vector<const char*> argv;
  argv.push_back("fieldplan");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (rerun->parsed()) return run_rerun(rerun_manifest);

  if (generate->parsed() || prep_alias->parsed()) {
    manifest.subcommand = prep_alias->parsed() ? "prep" : "generate";
    manifest.seed = gen.seed;
    manifest.has_seed = true;
    run_generate(gen, manifest);
    manifest.write(gen.out);
  } else if (validate->parsed()) {
    manifest.subcommand = "validate";
    manifest.seed = val.seed;
    manifest.has_seed = true;
    run_validate(val, manifest);
    manifest.write(val.out);
  } else if (tec_cmd->parsed()) {
    manifest.subcommand = "tec";
    manifest.seed = tec_args.seed;
    manifest.has_seed = true;
    if (tec_args.design_class == "latin" || tec_args.design_class == "knut_vik" ||
        tec_args.design_class == "diagonal") {
      if (tec_args.model.empty()) tec_args.model = "rowcol";
    }
    run_validate(tec_args, manifest);
    manifest.write(tec_args.out);
  } else if (anova->parsed()) {
    manifest.subcommand = "anova";
    run_anova(anova_data, anova_aggregate, anova_out, manifest);
    if (!anova_out.empty()) manifest.write(anova_out);
  } else if (power->parsed()) {
    manifest.subcommand = "power";
    run_power(power_frame, power_vc, power_contrast, power_alpha, power_ddf, power_user_ddf,
              power_out, manifest);
    if (!power_out.empty()) manifest.write(power_out);
  } else if (allocate->parsed()) {
    manifest.subcommand = "allocate";
    run_allocate(alloc_gamma, alloc_v, alloc_weights, alloc_budget, alloc_method, alloc_out,
                 manifest);
    if (!alloc_out.empty()) manifest.write(alloc_out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return run_command(args);
  } catch (const fieldplan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
