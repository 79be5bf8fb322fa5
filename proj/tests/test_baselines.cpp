#include <cmath>
#include <map>

#include "doctest.h"
#include "medge/baselines.hpp"

using namespace medge;

namespace {

Plan rates_only(const Instance& inst, int g) {
  Plan p;
  p.rate_index.assign(inst.requests.size(), g);
  return p;
}

// Smallest hop count from `site` to an active EC, ties to the lower node id.
int closest_ec(const Instance& inst, int site) {
  int best = -1;
  for (const EcProfile& ec : inst.ecs) {
    if (best < 0 || inst.topology.hops(site, ec.node) < inst.topology.hops(site, best)) best = ec.node;
  }
  return best;
}

}  // namespace

TEST_CASE("CEC places both functions at the closest EC") {
  WorkloadConfig cfg;
  cfg.vm_count = 100;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = generate_instance(cfg, seed);
    Plan paired = rates_only(inst, 1);
    paired.cached_models = {{0, inst.ecs[0].node}};
    const Plan plan = cec(inst, paired);
    for (const Request& q : inst.requests) {
      CHECK(plan.compute_node[q.id] == closest_ec(inst, q.origin));
      CHECK(plan.storage_node[q.id] == plan.compute_node[q.id]);
    }
    CHECK(plan.rate_index == paired.rate_index);
    CHECK(plan.cached_models == paired.cached_models);
    CHECK(cec(inst, paired, {true, 50}).rate_index == std::vector<int>(inst.requests.size(), 6));
  }
}

TEST_CASE("CEC breaks distance ties toward the lower node id") {
  // Site 0 is the root: sites 1, 2 and 3 are all one hop away.
  WorkloadConfig cfg;
  cfg.requests = 1;
  cfg.topology.active_sites = {3, 1, 2};
  const Instance inst = generate_instance(cfg, 1);
  Instance at_root = inst;
  at_root.requests[0].origin = 0;
  CHECK(cec(at_root, rates_only(inst, 0)).compute_node[0] == 1);
}

TEST_CASE("CEC moves to the second closest EC when the closest is full") {
  WorkloadConfig cfg;
  cfg.vm_count = 2;
  cfg.requests = 6;
  const Instance inst = generate_instance(cfg, 4);
  Instance crowded = inst;
  for (Request& q : crowded.requests) q.origin = inst.ecs[0].node;
  const Plan plan = cec(crowded, rates_only(inst, 0));
  CHECK(plan.compute_node[0] == inst.ecs[0].node);
  CHECK(plan.compute_node[1] != inst.ecs[0].node);
  // Once the backup fills too the closest is kept and overloads.
  std::map<int, int> per_node;
  for (int n : plan.compute_node) ++per_node[n];
  CHECK(per_node[inst.ecs[0].node] >= 2);
  CHECK(evaluate(crowded, plan).overloaded > 0);
}

TEST_CASE("RandS respects VM slots and is reproducible") {
  const Instance inst = generate_instance(WorkloadConfig{}, 3);
  std::mt19937_64 a(17), b(17);
  const auto pa = rand_s(inst, rates_only(inst, 2), a);
  const auto pb = rand_s(inst, rates_only(inst, 2), b);
  REQUIRE(pa.has_value());
  CHECK(*pa == *pb);
  std::map<int, int> used;
  for (std::size_t r = 0; r < inst.requests.size(); ++r) {
    ++used[pa->compute_node[r]];
    ++used[pa->storage_node[r]];
  }
  for (const EcProfile& ec : inst.ecs) CHECK(used[ec.node] <= ec.vm_count);
  CHECK(evaluate(inst, *pa).overloaded == 0);
}

TEST_CASE("RandS with a single EC") {
  WorkloadConfig cfg;
  cfg.topology.site_count = 1;
  cfg.topology.active_sites = {0};
  cfg.topology.region_roots = {0};
  cfg.requests = 3;
  cfg.vm_count = 6;
  const Instance inst = generate_instance(cfg, 1);
  std::mt19937_64 rng(1);
  const auto plan = rand_s(inst, rates_only(inst, 0), rng);
  REQUIRE(plan.has_value());
  for (int r = 0; r < 3; ++r) {
    CHECK(plan->compute_node[r] == 0);
    CHECK(plan->storage_node[r] == 0);
  }
  // One request too many for the slots.
  cfg.requests = 4;
  const Instance full = generate_instance(cfg, 1);
  CHECK_FALSE(rand_s(full, rates_only(full, 0), rng).has_value());
}

TEST_CASE("RandS picks ECs uniformly") {
  WorkloadConfig cfg;
  cfg.requests = 1;
  const Instance inst = generate_instance(cfg, 1);
  std::map<int, int> compute, storage;
  const int draws = 1000;
  for (int seed = 0; seed < draws; ++seed) {
    std::mt19937_64 rng(seed);
    const auto plan = rand_s(inst, rates_only(inst, 0), rng);
    REQUIRE(plan.has_value());
    ++compute[plan->compute_node[0]];
    ++storage[plan->storage_node[0]];
  }
  for (const EcProfile& ec : inst.ecs) {
    // Shares within five points of 1/6 (about four standard errors).
    CHECK(std::abs(compute[ec.node] / double(draws) - 1.0 / 6) < 0.05);
    CHECK(std::abs(storage[ec.node] / double(draws) - 1.0 / 6) < 0.05);
  }
}
