#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ftsweep/catalog.hpp"
#include "ftsweep/errors.hpp"
#include "ftsweep/rng.hpp"

namespace ftsweep {

/// A stratified partition of sample indices. Index lists are sorted so two
/// runs with the same inputs and seed produce byte-identical membership.
struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;  // DegenerateSplit notices, non-fatal
};

inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

/// Stratified split: each category is shuffled with its own deterministic
/// generator seeded by (seed, category), then the first
/// round(train_fraction * n_c) indices go to train and the remainder to val.
inline SplitResult stratified_split(std::span<const ObjectClass> labels,
                                    double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train_fraction must be in (0, 1), got " + std::to_string(train_fraction));
  }
  SplitResult result;
  result.seed = seed;

  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (static_cast<std::size_t>(labels[i]) == c) members.push_back(i);
    }
    if (members.empty()) continue;

    Rng rng(mix_seed(seed, kClassNames[c]));
    rng.shuffle(members);

    const std::size_t n_train =
        std::min(members.size(), round_half_up(train_fraction * static_cast<double>(members.size())));
    const std::size_t n_val = members.size() - n_train;
    if (members.size() >= 2 && (n_train == 0 || n_val == 0)) {
      result.warnings.push_back("degenerate split: class " + std::string(kClassNames[c]) +
                                " falls entirely in one side (" + std::to_string(members.size()) +
                                " samples)");
    }
    result.train.insert(result.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    result.val.insert(result.val.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  }

  std::sort(result.train.begin(), result.train.end());
  std::sort(result.val.begin(), result.val.end());
  return result;
}

}  // namespace ftsweep
