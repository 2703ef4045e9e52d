#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fieldplan/types.hpp"

namespace fieldplan {

enum class LatinKind { full, knut_vik, diagonal };

struct LatinClass {
  LatinKind kind = LatinKind::full;
};

// Valid cyclic-shift steps for the systematic Latin classes: knight's-move
// squares use steps s with gcd(s, t) = 1 and s not in {1, t-1}; diagonal
// squares use steps {1, t-1}.
std::vector<int> latin_shift_steps(LatinKind kind, int t);

enum class BlockOrientation { row_major, col_major };

enum class SystematicPattern { repeat, sandwich };

// Completely randomized design: each of t treatments r times, uniformly
// permuted over the layout.
DesignPlan gen_crd(int t, int r, const FieldLayout& layout, std::uint64_t seed);

// Randomized complete block design: r contiguous blocks of t plots, each an
// independent uniform permutation of the treatments.
DesignPlan gen_rcbd(int t, int r, const FieldLayout& layout, std::uint64_t seed,
                    BlockOrientation orientation = BlockOrientation::row_major);

// Latin square of order t. kind=full draws uniformly over all squares
// (exact by enumeration for t <= 5, row-by-row rejection at t = 6);
// knut_vik / diagonal draw uniformly from the cyclic-shift class.
DesignPlan gen_latin(int t, LatinClass latin_class, std::uint64_t seed);

// Deterministic 1x(t*r) layouts: `repeat` lays the treatments in order r
// times; `sandwich` alternates forward and reversed copies (r even). When
// permute_labels is set, a seeded label permutation is applied on top.
DesignPlan gen_systematic(int t, int r, SystematicPattern pattern, bool permute_labels = false,
                          std::uint64_t seed = 0);

// All Latin squares of order t as flat t*t value arrays (entries 0..t-1),
// in lexicographic DFS order. Cached; only supported for t <= 5.
const std::vector<std::vector<std::uint8_t>>& enumerate_latin_squares(int t);

// Cyclic shift square with identity first row: entry (i, j) = (j + step*i)
// mod t. The systematic Latin classes relabel this with a random base row.
std::vector<std::uint8_t> shift_square(int t, int step);

// Membership test for the cyclic-shift classes (rows are shifts of row 0 by
// s*i for some class step s).
bool is_shift_square(const std::vector<std::uint8_t>& square, int t, LatinKind kind);

struct PositionalCovariateResult {
  std::vector<DesignPlan> optima;   // one representative per label orbit
  double criterion = 0.0;           // shared A-criterion value of the optima
  std::int64_t arrangements_scored = 0;
};

// Exhaustively scores all block-wise treatment arrangements of a 1x(t*r)
// strip under the fixed model {blocks + treatments + linear plot-position
// covariate} and returns the A-optimal set. The first block is fixed to the
// canonical treatment order, which collapses label-permutation orbits.
PositionalCovariateResult positional_covariate_set(int t, int r, const FieldLayout& layout);

}  // namespace fieldplan
