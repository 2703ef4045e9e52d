#include "fieldplan/prep.hpp"

#include <algorithm>
#include <numeric>

#include "fieldplan/linalg.hpp"
#include "fieldplan/rng.hpp"

namespace fieldplan {

std::vector<int> prep_duplicated_lines(int t, int dup_per_env, int env) {
  std::vector<int> lines;
  lines.reserve(static_cast<std::size_t>(dup_per_env));
  for (int i = 0; i < dup_per_env; ++i) lines.push_back((env * dup_per_env + i) % t);
  std::sort(lines.begin(), lines.end());
  return lines;
}

namespace {

struct PrepStructure {
  int t = 0, n_env = 0, dup = 0;
  int env_cols = 0;             // t + dup
  std::vector<int> rep_of;      // global replicate id per plot
  std::vector<int> block_of;    // global block id per plot
  std::vector<int> env_of;
  std::vector<int> block_size;  // by global block id
};

// Blocks are nested in replicate groups which are nested in environments, so
// the block indicators span the whole nuisance space (including the mean) and
// C = T'T - sum_b (1/k_b) n_b n_b' with 0/1 block membership vectors.
double prep_aef(const std::vector<int>& label_of, const PrepStructure& s,
                std::vector<double>* eigenvalues_out = nullptr) {
  const int t = s.t;
  Matrix info = Matrix::Zero(t, t);
  Vector replication = Vector::Zero(t);
  for (std::size_t p = 0; p < label_of.size(); ++p) {
    info(label_of[p], label_of[p]) += 1.0;
    replication(label_of[p]) += 1.0;
  }
  std::vector<std::vector<int>> members(s.block_size.size());
  for (std::size_t p = 0; p < label_of.size(); ++p) {
    members[static_cast<std::size_t>(s.block_of[p])].push_back(label_of[p]);
  }
  for (std::size_t b = 0; b < members.size(); ++b) {
    const double inv_k = 1.0 / s.block_size[b];
    for (int x : members[b])
      for (int y : members[b]) info(x, y) -= inv_k;
  }
  const Vector scale = replication.cwiseSqrt().cwiseInverse();
  const auto eigenvalues = nonzero_eigenvalues(scale.asDiagonal() * info * scale.asDiagonal());
  if (eigenvalues_out) *eigenvalues_out = eigenvalues;
  if (static_cast<int>(eigenvalues.size()) != t - 1) return 0.0;
  double inverse_sum = 0.0;
  for (double e : eigenvalues) inverse_sum += 1.0 / e;
  return (t - 1) / inverse_sum;
}

}  // namespace

PrepResult gen_prep(int t, int n_env, int dup_per_env, int blocks_per_env, std::uint64_t seed,
                    std::int64_t max_iters) {
  require(t >= 2 && n_env >= 1, "invalid-dims", "need t >= 2 and n_env >= 1");
  require(dup_per_env >= 1 && dup_per_env <= t, "infeasible-quotas",
          "dup_per_env must be in [1, t]");
  require(blocks_per_env >= 2, "infeasible-quotas",
          "need at least two blocks per environment so duplicates can split");
  const int env_cols = t + dup_per_env;
  require(blocks_per_env <= env_cols, "infeasible-quotas", "more blocks than plots per environment");

  PrepStructure s;
  s.t = t;
  s.n_env = n_env;
  s.dup = dup_per_env;
  s.env_cols = env_cols;
  const int n = n_env * env_cols;
  s.rep_of.resize(static_cast<std::size_t>(n));
  s.block_of.resize(static_cast<std::size_t>(n));
  s.env_of.resize(static_cast<std::size_t>(n));

  const int singles = t - dup_per_env;
  const int rep0_size = dup_per_env + (singles + 1) / 2;
  const int rep1_size = env_cols - rep0_size;
  const int rep0_blocks = std::max(
      1, std::min(blocks_per_env - 1,
                  static_cast<int>(std::lround(double(blocks_per_env) * rep0_size / env_cols))));
  const int rep1_blocks = blocks_per_env - rep0_blocks;
  require(rep0_blocks <= rep0_size && rep1_blocks <= rep1_size, "infeasible-quotas",
          "block count exceeds replicate group size");

  int next_block = 0;
  for (int e = 0; e < n_env; ++e) {
    for (int rep = 0; rep < 2; ++rep) {
      const int offset = rep == 0 ? 0 : rep0_size;
      const int size = rep == 0 ? rep0_size : rep1_size;
      const int n_blocks = rep == 0 ? rep0_blocks : rep1_blocks;
      const int base = size / n_blocks;
      const int extra = size % n_blocks;  // first `extra` blocks get one more plot
      int col = offset;
      for (int b = 0; b < n_blocks; ++b) {
        const int block_len = base + (b < extra ? 1 : 0);
        for (int k = 0; k < block_len; ++k, ++col) {
          const int p = e * env_cols + col;
          s.env_of[static_cast<std::size_t>(p)] = e;
          s.rep_of[static_cast<std::size_t>(p)] = e * 2 + rep;
          s.block_of[static_cast<std::size_t>(p)] = next_block;
        }
        s.block_size.push_back(block_len);
        ++next_block;
      }
    }
  }

  Rng rng(seed);
  std::vector<int> label_of(static_cast<std::size_t>(n));
  for (int e = 0; e < n_env; ++e) {
    const auto dups = prep_duplicated_lines(t, dup_per_env, e);
    std::vector<bool> is_dup(static_cast<std::size_t>(t), false);
    for (int line : dups) is_dup[static_cast<std::size_t>(line)] = true;
    std::vector<int> single_lines;
    for (int line = 0; line < t; ++line)
      if (!is_dup[static_cast<std::size_t>(line)]) single_lines.push_back(line);
    rng.shuffle(single_lines);

    std::vector<int> rep0(dups);
    std::vector<int> rep1(dups);
    for (std::size_t i = 0; i < single_lines.size(); ++i) {
      (i < static_cast<std::size_t>(rep0_size - dup_per_env) ? rep0 : rep1).push_back(single_lines[i]);
    }
    rng.shuffle(rep0);
    rng.shuffle(rep1);
    for (int k = 0; k < rep0_size; ++k) label_of[static_cast<std::size_t>(e * env_cols + k)] = rep0[static_cast<std::size_t>(k)];
    for (int k = 0; k < rep1_size; ++k) label_of[static_cast<std::size_t>(e * env_cols + rep0_size + k)] = rep1[static_cast<std::size_t>(k)];
  }

  // rep-level occupancy for swap validity (block-level follows from nesting)
  std::vector<std::vector<int>> rep_count(static_cast<std::size_t>(2 * n_env),
                                          std::vector<int>(static_cast<std::size_t>(t), 0));
  for (int p = 0; p < n; ++p) rep_count[static_cast<std::size_t>(s.rep_of[static_cast<std::size_t>(p)])][static_cast<std::size_t>(label_of[static_cast<std::size_t>(p)])]++;

  double current = prep_aef(label_of, s);
  std::int64_t evaluations = 1;
  bool improved = true;
  while (improved && evaluations < max_iters) {
    improved = false;
    std::vector<std::pair<int, int>> pairs;
    for (int e = 0; e < n_env; ++e)
      for (int i = 0; i < env_cols; ++i)
        for (int j = i + 1; j < env_cols; ++j)
          pairs.emplace_back(e * env_cols + i, e * env_cols + j);
    rng.shuffle(pairs);
    for (const auto& [i, j] : pairs) {
      const int x = label_of[static_cast<std::size_t>(i)];
      const int y = label_of[static_cast<std::size_t>(j)];
      if (x == y) continue;
      const int ri = s.rep_of[static_cast<std::size_t>(i)];
      const int rj = s.rep_of[static_cast<std::size_t>(j)];
      if (ri != rj) {
        if (rep_count[static_cast<std::size_t>(ri)][static_cast<std::size_t>(y)] > 0 ||
            rep_count[static_cast<std::size_t>(rj)][static_cast<std::size_t>(x)] > 0)
          continue;
      }
      std::swap(label_of[static_cast<std::size_t>(i)], label_of[static_cast<std::size_t>(j)]);
      const double candidate = prep_aef(label_of, s);
      ++evaluations;
      if (candidate > current + 1e-12) {
        current = candidate;
        improved = true;
        if (ri != rj) {
          rep_count[static_cast<std::size_t>(ri)][static_cast<std::size_t>(x)]--;
          rep_count[static_cast<std::size_t>(ri)][static_cast<std::size_t>(y)]++;
          rep_count[static_cast<std::size_t>(rj)][static_cast<std::size_t>(y)]--;
          rep_count[static_cast<std::size_t>(rj)][static_cast<std::size_t>(x)]++;
        }
      } else {
        std::swap(label_of[static_cast<std::size_t>(i)], label_of[static_cast<std::size_t>(j)]);
      }
      if (evaluations >= max_iters) break;
    }
  }

  const auto names = default_labels(t);
  PrepResult result;
  result.plan.layout = FieldLayout(n_env, env_cols);
  result.plan.treatment.resize(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) result.plan.treatment[static_cast<std::size_t>(p)] = names[static_cast<std::size_t>(label_of[static_cast<std::size_t>(p)])];
  result.plan.rep = s.rep_of;
  result.plan.block = s.block_of;
  result.plan.env = s.env_of;
  result.plan.design_class = "prep";
  result.plan.seed = seed;
  result.evaluations = evaluations;

  std::vector<double> eigenvalues;
  const double aef = prep_aef(label_of, s, &eigenvalues);
  require(aef > 0.0, "disconnected-design", "p-rep assignment is disconnected");
  result.efficiency.aef = aef;
  result.efficiency.eigenvalues = eigenvalues;
  return result;
}

}  // namespace fieldplan
