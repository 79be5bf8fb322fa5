#include "medge/baselines.hpp"

#include <algorithm>

namespace medge {

namespace {

Plan shared_caching(const Instance& inst, const Plan& paired, const BaselineOptions& options) {
  Plan plan;
  plan.cached_models = paired.cached_models;
  plan.cached_aros = paired.cached_aros;
  plan.rate_index = paired.rate_index;
  if (options.max_rate) plan.rate_index.assign(inst.requests.size(), inst.rates.size() - 1);
  return plan;
}

}  // namespace

Plan cec(const Instance& inst, const Plan& paired, const BaselineOptions& options) {
  Plan plan = shared_caching(inst, paired, options);
  std::vector<int> free_slots;
  for (const EcProfile& ec : inst.ecs) free_slots.push_back(ec.vm_count);
  for (const Request& q : inst.requests) {
    std::vector<int> order(inst.ecs.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<int>(j);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const int ha = inst.topology.hops(q.origin, inst.ecs[a].node);
      const int hb = inst.topology.hops(q.origin, inst.ecs[b].node);
      return ha != hb ? ha < hb : inst.ecs[a].node < inst.ecs[b].node;
    });
    int pick = order[0];
    if (free_slots[pick] < 2 && order.size() > 1 && free_slots[order[1]] >= 2) pick = order[1];
    free_slots[pick] -= 2;
    plan.compute_node.push_back(inst.ecs[pick].node);
    plan.storage_node.push_back(inst.ecs[pick].node);
  }
  return plan;
}

std::optional<Plan> rand_s(const Instance& inst, const Plan& paired, std::mt19937_64& rng,
                           const BaselineOptions& options) {
  Plan plan = shared_caching(inst, paired, options);
  std::vector<int> free_slots;
  for (const EcProfile& ec : inst.ecs) free_slots.push_back(ec.vm_count);
  std::uniform_int_distribution<int> pick(0, inst.ec_count() - 1);
  for (std::size_t r = 0; r < inst.requests.size(); ++r) {
    bool placed = false;
    for (int attempt = 0; attempt < options.redraws && !placed; ++attempt) {
      const int c = pick(rng);
      const int s = pick(rng);
      const int need_c = c == s ? 2 : 1;
      if (free_slots[c] < need_c || free_slots[s] < 1) continue;
      --free_slots[c];
      --free_slots[s];
      plan.compute_node.push_back(inst.ecs[c].node);
      plan.storage_node.push_back(inst.ecs[s].node);
      placed = true;
    }
    if (!placed) return std::nullopt;
  }
  return plan;
}

}  // namespace medge
