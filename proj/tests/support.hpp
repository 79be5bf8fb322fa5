#pragma once

#include <cstdint>
#include <random>

#include "medge/workload.hpp"

namespace medge::testing {

/// A two-EC instance small enough for exhaustive enumeration: at most two
/// requests, one model with two AROs and three rates. Capacities are drawn
/// tight so that VM and cache limits bind on some seeds.
inline WorkloadConfig tiny_config(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 17);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  WorkloadConfig c;
  c.topology.site_count = 3;
  c.topology.branching = 2;
  c.topology.active_sites = {1, 2};
  c.topology.region_roots = {1, 2};
  c.requests = pick(1, 2);
  c.model_count = 1;
  c.models_per_request = 1;
  c.aros_per_model = 2;
  c.min_targets_per_model = 1;
  c.max_targets_per_model = 2;
  c.vm_count = pick(1, 3);
  c.min_ec_cache_mb = 0.0;
  c.max_ec_cache_mb = 20.0;
  c.mobility_total = pick(0, 2) * 0.5;
  const int rates = pick(2, 3);
  const int first = pick(0, 7 - rates);
  RateTable full = default_rate_table();
  c.rates.rates_bps.assign(full.rates_bps.begin() + first, full.rates_bps.begin() + first + rates);
  c.rates.ssim.assign(full.ssim.begin() + first, full.ssim.begin() + first + rates);
  c.foreground_scale = uniform(0.5, 4.0);
  c.background_scale = uniform(0.5, 2.0);
  c.pointer_bits = pick(0, 1) * 512.0;
  c.params.shared_region_frames = pick(0, 1) == 1;
  return c;
}

}  // namespace medge::testing
