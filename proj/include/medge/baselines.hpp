#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "medge/evaluator.hpp"

namespace medge {

struct BaselineOptions {
  /// Use the highest rate for every request instead of the paired plan's.
  bool max_rate = false;
  /// Draws per request before RandS gives up.
  int redraws = 50;
};

/// Closest-EC placement of both functions with the paired plan's caching.
/// Falls back to the second closest EC when the closest has fewer than two
/// free VM slots; when both are full the closest is kept and the overload
/// shows up in the evaluator.
Plan cec(const Instance& inst, const Plan& paired, const BaselineOptions& options = {});

/// Uniformly random EC for each function, redrawn while the EC is full.
/// Returns nullopt when some request exhausts its redraws.
std::optional<Plan> rand_s(const Instance& inst, const Plan& paired, std::mt19937_64& rng,
                           const BaselineOptions& options = {});

}  // namespace medge
