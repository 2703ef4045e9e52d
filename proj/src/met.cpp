#include "fieldplan/met.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <sstream>

namespace fieldplan {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == sep) {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

}  // namespace

MetDataset parse_met_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty-met-csv", "MET CSV has no content");
  const auto header = split(line, ',');
  require(header.size() == 5 && header[0] == "treatment" && header[1] == "farm" &&
              header[2] == "season" && header[3] == "rep" && header[4] == "y",
          "bad-met-header", "MET CSV must start with header treatment,farm,season,rep,y");

  struct Obs {
    std::array<std::string, 4> levels;
    double y;
  };
  std::vector<Obs> observations;
  std::array<std::map<std::string, int>, 4> level_maps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    require(fields.size() == 5, "bad-met-row", "MET CSV row must have 5 fields");
    Obs obs;
    for (int c = 0; c < 4; ++c) {
      obs.levels[static_cast<std::size_t>(c)] = fields[static_cast<std::size_t>(c)];
      level_maps[static_cast<std::size_t>(c)].emplace(fields[static_cast<std::size_t>(c)], 0);
    }
    try {
      obs.y = std::stod(fields[4]);
    } catch (const std::exception&) {
      fail("non-numeric-response", "MET CSV response is not numeric: '" + fields[4] + "'");
    }
    observations.push_back(std::move(obs));
  }
  require(!observations.empty(), "empty-met-csv", "MET CSV has no data rows");
  for (auto& level_map : level_maps) {
    int next = 0;
    for (auto& [label, id] : level_map) id = next++;
  }
  const MetDims dims(static_cast<int>(level_maps[0].size()), static_cast<int>(level_maps[1].size()),
                     static_cast<int>(level_maps[2].size()), static_cast<int>(level_maps[3].size()));
  require(static_cast<int>(observations.size()) == dims.total(), "unbalanced-met-data",
          "expected " + std::to_string(dims.total()) + " observations for a balanced layout, got " +
              std::to_string(observations.size()));
  MetDataset data(dims);
  std::vector<bool> seen(static_cast<std::size_t>(dims.total()), false);
  for (const auto& obs : observations) {
    const int idx = data.index(level_maps[0].at(obs.levels[0]), level_maps[1].at(obs.levels[1]),
                               level_maps[2].at(obs.levels[2]), level_maps[3].at(obs.levels[3]));
    require(!seen[static_cast<std::size_t>(idx)], "unbalanced-met-data", "duplicate cell in MET CSV");
    seen[static_cast<std::size_t>(idx)] = true;
    data.y(idx) = obs.y;
  }
  return data;
}

const char* ems_symbol_name(EmsSymbol symbol) {
  switch (symbol) {
    case EmsSymbol::sigma2: return "sigma2";
    case EmsSymbol::sigma_fs2: return "sigma_fs2";
    case EmsSymbol::sigma_f2: return "sigma_f2";
    case EmsSymbol::sigma_s2: return "sigma_s2";
    case EmsSymbol::sigma_ftau2: return "sigma_ftau2";
    case EmsSymbol::sigma_taus2: return "sigma_taus2";
    case EmsSymbol::sigma_ftaus2: return "sigma_ftaus2";
    case EmsSymbol::q_tau: return "q_tau";
    case EmsSymbol::mu2: return "mu2";
  }
  return "?";
}

bool AnovaTable::has_row(const std::string& source) const {
  for (const auto& r : rows)
    if (r.source == source) return true;
  return false;
}

const AnovaRow& AnovaTable::row(const std::string& source) const {
  for (const auto& r : rows)
    if (r.source == source) return r;
  fail("missing-anova-row", "ANOVA table has no row '" + source + "'");
}

AnovaTable anova_met(const MetDataset& data) {
  const int t = data.dims.t, m = data.dims.m, n = data.dims.n, r = data.dims.r;
  const long long N = data.dims.total();

  // cell and margin means
  const double grand = data.y.mean();
  Matrix mean_hi = Matrix::Zero(t, m), mean_hj = Matrix::Zero(t, n), mean_ij = Matrix::Zero(m, n);
  std::vector<Matrix> mean_hij(static_cast<std::size_t>(t), Matrix::Zero(m, n));
  Vector mean_h = Vector::Zero(t), mean_i = Vector::Zero(m), mean_j = Vector::Zero(n);
  for (int h = 0; h < t; ++h)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int k = 0; k < r; ++k) sum += data.at(h, i, j, k);
        const double cell = sum / r;
        mean_hij[static_cast<std::size_t>(h)](i, j) = cell;
        mean_hi(h, i) += cell / n;
        mean_hj(h, j) += cell / m;
        mean_ij(i, j) += cell / t;
        mean_h(h) += cell / (m * n);
        mean_i(i) += cell / (t * n);
        mean_j(j) += cell / (t * m);
      }

  double ss_t = 0.0, ss_f = 0.0, ss_s = 0.0, ss_fs = 0.0, ss_tf = 0.0, ss_ts = 0.0, ss_tfs = 0.0,
         ss_e = 0.0;
  for (int h = 0; h < t; ++h) ss_t += (mean_h(h) - grand) * (mean_h(h) - grand);
  ss_t *= m * n * r;
  for (int i = 0; i < m; ++i) ss_f += (mean_i(i) - grand) * (mean_i(i) - grand);
  ss_f *= t * n * r;
  for (int j = 0; j < n; ++j) ss_s += (mean_j(j) - grand) * (mean_j(j) - grand);
  ss_s *= t * m * r;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = mean_ij(i, j) - mean_i(i) - mean_j(j) + grand;
      ss_fs += d * d;
    }
  ss_fs *= t * r;
  for (int h = 0; h < t; ++h)
    for (int i = 0; i < m; ++i) {
      const double d = mean_hi(h, i) - mean_h(h) - mean_i(i) + grand;
      ss_tf += d * d;
    }
  ss_tf *= n * r;
  for (int h = 0; h < t; ++h)
    for (int j = 0; j < n; ++j) {
      const double d = mean_hj(h, j) - mean_h(h) - mean_j(j) + grand;
      ss_ts += d * d;
    }
  ss_ts *= m * r;
  for (int h = 0; h < t; ++h)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const double d = mean_hij[static_cast<std::size_t>(h)](i, j) - mean_hi(h, i) - mean_hj(h, j) -
                         mean_ij(i, j) + mean_h(h) + mean_i(i) + mean_j(j) - grand;
        ss_tfs += d * d;
      }
  ss_tfs *= r;
  for (int h = 0; h < t; ++h)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < r; ++k) {
          const double d = data.at(h, i, j, k) - mean_hij[static_cast<std::size_t>(h)](i, j);
          ss_e += d * d;
        }

  AnovaTable table;
  table.dims = data.dims;
  auto add = [&](const std::string& source, long long df, double ss, std::vector<EmsTerm> ems) {
    if (df <= 0) return;
    AnovaRow row;
    row.source = source;
    row.df = df;
    row.ss = ss;
    row.ms = ss / static_cast<double>(df);
    row.ems = std::move(ems);
    table.rows.push_back(std::move(row));
  };

  const long long rl = r, ml = m, nl = n, tl = t;
  using S = EmsSymbol;
  if (t == 1) {
    add("general-mean", 1, N * grand * grand,
        {{S::sigma2, 1}, {S::sigma_fs2, rl}, {S::sigma_f2, rl * nl}, {S::sigma_s2, rl * ml}, {S::mu2, rl * ml * nl}});
    add("farms", m - 1, ss_f, {{S::sigma2, 1}, {S::sigma_fs2, rl}, {S::sigma_f2, rl * nl}});
    add("seasons", n - 1, ss_s, {{S::sigma2, 1}, {S::sigma_fs2, rl}, {S::sigma_s2, rl * ml}});
    add("farms-x-seasons", static_cast<long long>(m - 1) * (n - 1), ss_fs,
        {{S::sigma2, 1}, {S::sigma_fs2, rl}});
    add("error", static_cast<long long>(m) * n * (r - 1), ss_e, {{S::sigma2, 1}});
    return table;
  }

  add("general-mean", 1, N * grand * grand,
      {{S::sigma2, 1},
       {S::sigma_ftaus2, rl},
       {S::sigma_ftau2, rl * nl},
       {S::sigma_taus2, rl * ml},
       {S::sigma_fs2, rl * tl},
       {S::sigma_f2, rl * tl * nl},
       {S::sigma_s2, rl * tl * ml},
       {S::mu2, rl * tl * ml * nl}});
  add("treatments", t - 1, ss_t,
      {{S::sigma2, 1},
       {S::sigma_ftaus2, rl},
       {S::sigma_ftau2, rl * nl},
       {S::sigma_taus2, rl * ml},
       {S::q_tau, rl * ml * nl}});
  add("farms", m - 1, ss_f,
      {{S::sigma2, 1},
       {S::sigma_ftaus2, rl},
       {S::sigma_ftau2, rl * nl},
       {S::sigma_fs2, rl * tl},
       {S::sigma_f2, rl * tl * nl}});
  add("seasons", n - 1, ss_s,
      {{S::sigma2, 1},
       {S::sigma_ftaus2, rl},
       {S::sigma_taus2, rl * ml},
       {S::sigma_fs2, rl * tl},
       {S::sigma_s2, rl * tl * ml}});
  add("farms-x-seasons", static_cast<long long>(m - 1) * (n - 1), ss_fs,
      {{S::sigma2, 1}, {S::sigma_ftaus2, rl}, {S::sigma_fs2, rl * tl}});
  add("treatments-x-farms", static_cast<long long>(t - 1) * (m - 1), ss_tf,
      {{S::sigma2, 1}, {S::sigma_ftaus2, rl}, {S::sigma_ftau2, rl * nl}});
  add("treatments-x-seasons", static_cast<long long>(t - 1) * (n - 1), ss_ts,
      {{S::sigma2, 1}, {S::sigma_ftaus2, rl}, {S::sigma_taus2, rl * ml}});
  add("treatments-x-farms-x-seasons", static_cast<long long>(t - 1) * (m - 1) * (n - 1), ss_tfs,
      {{S::sigma2, 1}, {S::sigma_ftaus2, rl}});
  add("error", static_cast<long long>(t) * m * n * (r - 1), ss_e, {{S::sigma2, 1}});
  return table;
}

VarianceComponents mom_components(const AnovaTable& table, const MetDims& dims) {
  const double r = dims.r, m = dims.m, n = dims.n, t = dims.t;
  VarianceComponents vc;
  auto set = [](Component& c, double value) {
    c.value = value;
    c.negative = value < 0.0;
    c.available = true;
  };

  const bool has_error = table.has_row("error");
  if (has_error) {
    set(vc.sigma2, table.row("error").ms);
    vc.sigma2.negative = false;
  } else {
    vc.sigma2 = Component{0.0, false, false};  // confounded with the finest interaction
  }
  const double ms_r = has_error ? table.row("error").ms : 0.0;

  if (dims.t == 1) {
    require(table.has_row("farms") && table.has_row("seasons") && table.has_row("farms-x-seasons"),
            "missing-anova-row", "need farms, seasons and farms-x-seasons rows");
    const double ms_f = table.row("farms").ms;
    const double ms_s = table.row("seasons").ms;
    const double ms_fs = table.row("farms-x-seasons").ms;
    set(vc.sigma_fs2, (ms_fs - ms_r) / r);
    set(vc.sigma_f2, (ms_f - ms_fs) / (r * n));
    set(vc.sigma_s2, (ms_s - ms_fs) / (r * m));
    vc.sigma_ftau2.available = vc.sigma_taus2.available = vc.sigma_ftaus2.available =
        vc.sigma_tau2.available = false;
    return vc;
  }

  for (const char* source : {"treatments", "farms", "seasons", "farms-x-seasons",
                             "treatments-x-farms", "treatments-x-seasons",
                             "treatments-x-farms-x-seasons"}) {
    require(table.has_row(source), "missing-anova-row", std::string("need row '") + source + "'");
  }
  const double ms_t = table.row("treatments").ms;
  const double ms_f = table.row("farms").ms;
  const double ms_s = table.row("seasons").ms;
  const double ms_fs = table.row("farms-x-seasons").ms;
  const double ms_tf = table.row("treatments-x-farms").ms;
  const double ms_ts = table.row("treatments-x-seasons").ms;
  const double ms_tfs = table.row("treatments-x-farms-x-seasons").ms;

  set(vc.sigma_ftaus2, (ms_tfs - ms_r) / r);
  set(vc.sigma_ftau2, (ms_tf - ms_tfs) / (r * n));
  set(vc.sigma_taus2, (ms_ts - ms_tfs) / (r * m));
  set(vc.sigma_fs2, (ms_fs - ms_tfs) / (t * r));
  set(vc.sigma_f2, (ms_f - ms_fs - ms_tf + ms_tfs) / (t * n * r));
  set(vc.sigma_s2, (ms_s - ms_fs - ms_ts + ms_tfs) / (t * m * r));
  set(vc.sigma_tau2, (ms_t - ms_tf - ms_ts + ms_tfs) / (r * m * n));
  return vc;
}

MetDataset aggregate_met(const MetDataset& data, AggregationMode mode) {
  if (mode == AggregationMode::plots) return data;
  const int t = data.dims.t, m = data.dims.m, n = data.dims.n, r = data.dims.r;
  MetDataset out(MetDims(t, m, n, 1));
  for (int h = 0; h < t; ++h)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int k = 0; k < r; ++k) sum += data.at(h, i, j, k);
        out.at(h, i, j, 0) = sum / r;  // sums rescale to means
      }
  return out;
}

}  // namespace fieldplan
