#include "medge/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace medge {

namespace {
constexpr double kTol = 1e-9;

bool improves(double candidate, double current) {
  return candidate < current - 1e-12 * std::max(1.0, std::abs(current));
}
}  // namespace

// Cache decisions are flat: p at [s * J + j], h at [slot] where the slots of
// request r, model position m start at h_start[r][m].
struct Planner::State {
  std::vector<int> xk, yj, g;
  std::vector<char> p;
  std::vector<char> h;
};

namespace {

struct Layout {
  std::vector<std::vector<int>> h_start;  // [r][m]
  std::vector<int> slot_request, slot_model_pos, slot_aro;
  int slots = 0;
};

Layout layout_of(const Instance& inst) {
  Layout out;
  for (int r = 0; r < inst.request_count(); ++r) {
    const Request& q = inst.requests[r];
    std::vector<int> starts;
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
      starts.push_back(out.slots);
      for (int l : q.models[m].targets) {
        out.slot_request.push_back(r);
        out.slot_model_pos.push_back(m);
        out.slot_aro.push_back(l);
        ++out.slots;
      }
    }
    out.h_start.push_back(starts);
  }
  return out;
}

}  // namespace

Planner::Planner(const Instance& inst, const BuiltProgram& program, double q_bound)
    : inst_(inst), program_(program), cost_(program.index.count, 0.0) {
  for (const Term& t : program.lp.objective) cost_[t.var] += t.coef;
  if (inst.ec_count() > 32) throw std::invalid_argument("planner supports at most 32 ECs");
  int slot = 0;
  for (const Request& q : inst.requests) {
    first_slot_.push_back(slot);
    for (const RequestModel& m : q.models) slot += static_cast<int>(m.targets.size());
  }
  quality_target_ = q_bound * program.bounds.q_max;
}

std::vector<char> Planner::placed_models(const State& s) const {
  const int J = inst_.ec_count();
  std::vector<char> placed(inst_.models.size(), 0);
  for (std::size_t sm = 0; sm < placed.size(); ++sm) {
    for (int j = 0; j < J; ++j) placed[sm] = placed[sm] || s.p[sm * J + j];
  }
  return placed;
}

double Planner::request_term(const State& s, int r, const std::vector<char>& placed) const {
  const VariableIndex& idx = program_.index;
  const int J = inst_.ec_count();
  const Request& q = inst_.requests[r];
  const int k = s.xk[r];
  const int y = s.yj[r];
  const int g = s.g[r];
  double total = cost_[idx.x[r][k]] + cost_[idx.y[r][y]] + cost_[idx.e[r][g]] + cost_[idx.xi[r][k][y]];
  std::uint32_t hits = 0;  // bit j: some model of r is a full hit at EC j
  int slot = first_slot_[r];
  for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
    const int sm = q.models[m].model;
    const int T = static_cast<int>(q.models[m].targets.size());
    if (placed[sm]) total += cost_[idx.phi[r][m][g]];
    bool every = true;
    for (int t = 0; t < T; ++t) {
      if (s.h[slot + t]) total += cost_[idx.h[r][m][t]];
      else every = false;
    }
    for (int j = 0; j < J; ++j) {
      if (!s.p[sm * J + j]) continue;
      const bool alpha = j == y;
      if (alpha) total += cost_[idx.alpha[r][m][j]];
      for (int t = 0; t < T; ++t) {
        if (!s.h[slot + t]) continue;
        total += cost_[idx.beta[r][m][t][j]];
        if (alpha) total += cost_[idx.lambda[r][m][t][j]];
      }
      if (every) {
        total += cost_[idx.hit[r][m][j]];
        hits |= 1u << j;
      }
    }
    slot += T;
  }
  for (int j = 0; j < J; ++j) {
    const bool z = (hits >> j) & 1u;
    total += z ? cost_[idx.z[r][j]] : cost_[idx.q[r][j]];
    if (!z && j == y) total += cost_[idx.psi[r][j]];
  }
  return total;
}

double Planner::score(const State& s) const {
  const VariableIndex& idx = program_.index;
  const int J = inst_.ec_count();
  double total = program_.lp.objective_offset;
  for (int sm = 0; sm < static_cast<int>(inst_.models.size()); ++sm) {
    for (int j = 0; j < J; ++j) {
      if (s.p[sm * J + j]) total += cost_[idx.p[sm][j]];
    }
  }
  const std::vector<char> placed = placed_models(s);
  for (int r = 0; r < inst_.request_count(); ++r) total += request_term(s, r, placed);
  return total;
}

bool Planner::valid(const State& s) const {
  const int J = inst_.ec_count();
  const int S = static_cast<int>(inst_.models.size());
  std::vector<int> slots(J, 0);
  double quality = 0.0;
  for (int r = 0; r < inst_.request_count(); ++r) {
    const int node = program_.index.compute_nodes[r][s.xk[r]];
    const int c = inst_.ec_index(node);
    if (c >= 0) ++slots[c];
    ++slots[s.yj[r]];
    quality += inst_.requests[r].target_count() * inst_.rates.ssim[s.g[r]];
  }
  for (int j = 0; j < J; ++j) {
    if (slots[j] > inst_.ecs[j].vm_count) return false;
  }
  if (quality < quality_target_ - kTol * (1.0 + std::abs(quality_target_))) return false;

  std::vector<char> placed(S, 0);
  for (int sm = 0; sm < S; ++sm) {
    for (int j = 0; j < J; ++j) placed[sm] = placed[sm] || s.p[sm * J + j];
  }
  std::vector<int> holders(inst_.aros.size(), 0);
  std::vector<double> used_mb(J, 0.0);
  int slot = 0;
  for (int r = 0; r < inst_.request_count(); ++r) {
    const Request& q = inst_.requests[r];
    int mine = 0;
    for (const RequestModel& m : q.models) {
      for (int l : m.targets) {
        if (s.h[slot++]) {
          ++mine;
          if (++holders[l] > 1 || !placed[m.model]) return false;
          for (int j = 0; j < J; ++j) {
            if (s.p[m.model * J + j]) used_mb[j] += inst_.aros[l].size_bytes / 1e6;
          }
        }
      }
    }
    if (mine == 0) return false;
  }
  for (int j = 0; j < J; ++j) {
    const double cap = inst_.ecs[j].cache_bytes / 1e6;
    if (used_mb[j] > cap + kTol * (1.0 + std::abs(cap))) return false;
  }
  return true;
}

Planner::State Planner::to_state(const Plan& plan) const {
  const int J = inst_.ec_count();
  State s;
  const int R = inst_.request_count();
  s.xk.resize(R);
  s.yj.resize(R);
  s.g = plan.rate_index;
  for (int r = 0; r < R; ++r) {
    s.xk[r] = program_.index.compute_slot(r, plan.compute_node[r]);
    s.yj[r] = inst_.ec_index(plan.storage_node[r]);
  }
  s.p.assign(inst_.models.size() * J, 0);
  for (const auto& [sm, node] : plan.cached_models) s.p[sm * J + inst_.ec_index(node)] = 1;
  const Layout lay = layout_of(inst_);
  s.h.assign(lay.slots, 0);
  for (int f = 0; f < lay.slots; ++f) {
    const int r = lay.slot_request[f];
    const int sm = inst_.requests[r].models[lay.slot_model_pos[f]].model;
    s.h[f] = plan.has_aro(r, sm, lay.slot_aro[f]) ? 1 : 0;
  }
  return s;
}

Plan Planner::to_plan(const State& s) const {
  const int J = inst_.ec_count();
  Plan plan;
  for (int r = 0; r < inst_.request_count(); ++r) {
    plan.compute_node.push_back(program_.index.compute_nodes[r][s.xk[r]]);
    plan.storage_node.push_back(inst_.ecs[s.yj[r]].node);
  }
  plan.rate_index = s.g;
  for (int sm = 0; sm < static_cast<int>(inst_.models.size()); ++sm) {
    for (int j = 0; j < J; ++j) {
      if (s.p[sm * J + j]) plan.cached_models.emplace_back(sm, inst_.ecs[j].node);
    }
  }
  const Layout lay = layout_of(inst_);
  for (int f = 0; f < lay.slots; ++f) {
    if (!s.h[f]) continue;
    const int r = lay.slot_request[f];
    plan.cached_aros.push_back({r, inst_.requests[r].models[lay.slot_model_pos[f]].model, lay.slot_aro[f]});
  }
  plan.normalize();
  return plan;
}

double Planner::objective(const Plan& plan) const { return score(to_state(plan)); }

bool Planner::feasible(const Plan& plan) const {
  const int R = inst_.request_count();
  if (static_cast<int>(plan.compute_node.size()) != R || static_cast<int>(plan.storage_node.size()) != R ||
      static_cast<int>(plan.rate_index.size()) != R) {
    return false;
  }
  for (int r = 0; r < R; ++r) {
    if (program_.index.compute_slot(r, plan.compute_node[r]) < 0) return false;
    if (inst_.ec_index(plan.storage_node[r]) < 0) return false;
    if (plan.rate_index[r] < 0 || plan.rate_index[r] >= inst_.rates.size()) return false;
  }
  for (const auto& [sm, node] : plan.cached_models) {
    if (sm < 0 || sm >= static_cast<int>(inst_.models.size()) || inst_.ec_index(node) < 0) return false;
  }
  const State s = to_state(plan);
  // Entries of the plan that have no slot would be silently dropped.
  if (static_cast<std::size_t>(std::count(s.h.begin(), s.h.end(), 1)) != plan.cached_aros.size()) return false;
  return valid(s);
}

bool Planner::place_requests(State& s, bool eject) const {
  const int J = inst_.ec_count();
  const int R = inst_.request_count();
  const std::vector<char> placed = placed_models(s);
  std::vector<int> used(J, 0);
  auto ec_of = [&](int r, int k) { return inst_.ec_index(program_.index.compute_nodes[r][k]); };
  auto occupy = [&](int r, int k, int j, int delta) {
    const int c = ec_of(r, k);
    if (c >= 0) used[c] += delta;
    used[j] += delta;
  };
  auto fits = [&](int r, int k, int j) {
    const int c = ec_of(r, k);
    if (c >= 0 && used[c] + (c == j ? 2 : 1) > inst_.ecs[c].vm_count) return false;
    return c == j || used[j] + 1 <= inst_.ecs[j].vm_count;
  };
  for (int r = 0; r < R; ++r) occupy(r, s.xk[r], s.yj[r], 1);

  // Only the moved requests' terms change, and only VM slots can block.
  bool any = false;
  for (int r = 0; r < R; ++r) {
    const int K = static_cast<int>(program_.index.compute_nodes[r].size());
    const int k0 = s.xk[r], j0 = s.yj[r];
    const double base = request_term(s, r, placed);
    occupy(r, k0, j0, -1);
    double best_delta = 0.0;
    int best_k = k0, best_j = j0, best_other = -1, other_k = 0, other_j = 0;
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < J; ++j) {
        if (k == k0 && j == j0) continue;
        s.xk[r] = k;
        s.yj[r] = j;
        const double delta = request_term(s, r, placed) - base;
        if (fits(r, k, j)) {
          if (improves(base + delta, base + best_delta)) {
            best_delta = delta;
            best_k = k, best_j = j, best_other = -1;
          }
          continue;
        }
        if (!eject || delta >= best_delta) continue;
        // Move one request out of an EC this placement would overfill.
        occupy(r, k, j, 1);
        for (int o = 0; o < R; ++o) {
          if (o == r) continue;
          const int ko = s.xk[o], jo = s.yj[o];
          const int co = ec_of(o, ko);
          const bool blocking = (co >= 0 && used[co] > inst_.ecs[co].vm_count) || used[jo] > inst_.ecs[jo].vm_count;
          if (!blocking) continue;
          const double base_o = request_term(s, o, placed);
          occupy(o, ko, jo, -1);
          for (int k2 = 0; k2 < static_cast<int>(program_.index.compute_nodes[o].size()); ++k2) {
            for (int j2 = 0; j2 < J; ++j2) {
              if (!fits(o, k2, j2)) continue;
              occupy(o, k2, j2, 1);
              bool ok = true;
              for (int e = 0; e < J; ++e) ok = ok && used[e] <= inst_.ecs[e].vm_count;
              occupy(o, k2, j2, -1);
              if (!ok) continue;
              s.xk[o] = k2;
              s.yj[o] = j2;
              const double total = delta + request_term(s, o, placed) - base_o;
              if (improves(base + total, base + best_delta)) {
                best_delta = total;
                best_k = k, best_j = j, best_other = o, other_k = k2, other_j = j2;
              }
            }
          }
          s.xk[o] = ko;
          s.yj[o] = jo;
          occupy(o, ko, jo, 1);
        }
        occupy(r, k, j, -1);
      }
    }
    s.xk[r] = best_k;
    s.yj[r] = best_j;
    occupy(r, best_k, best_j, 1);
    if (best_other >= 0) {
      occupy(best_other, s.xk[best_other], s.yj[best_other], -1);
      s.xk[best_other] = other_k;
      s.yj[best_other] = other_j;
      occupy(best_other, other_k, other_j, 1);
    }
    any = any || best_k != k0 || best_j != j0;
  }
  return any;
}

bool Planner::choose_rates(State& s) const {
  // Rates couple requests only through the quality row. Price quality with
  // a multiplier, take the cheapest multiplier that meets the row, then
  // drop single rates while the row still holds.
  const int R = inst_.request_count();
  const int G = inst_.rates.size();
  const double before = score(s);
  std::vector<std::vector<double>> cost(R, std::vector<double>(G));
  State probe = s;
  for (int r = 0; r < R; ++r) {
    for (int g = 0; g < G; ++g) {
      probe.g[r] = g;
      cost[r][g] = score(probe);
    }
    probe.g[r] = s.g[r];
  }
  auto pick = [&](double lambda, std::vector<int>& out) {
    double quality = 0.0;
    for (int r = 0; r < R; ++r) {
      const double w = inst_.requests[r].target_count();
      int best = G - 1;
      for (int g = 0; g < G; ++g) {
        const double a = cost[r][g] - lambda * w * inst_.rates.ssim[g];
        const double b = cost[r][best] - lambda * w * inst_.rates.ssim[best];
        if (a < b) best = g;
      }
      out[r] = best;
      quality += w * inst_.rates.ssim[best];
    }
    return quality >= quality_target_ - kTol * (1.0 + std::abs(quality_target_));
  };
  std::vector<int> choice(R);
  double lo = 0.0, hi = 1.0;
  if (!pick(0.0, choice)) {
    while (!pick(hi, choice) && hi < 1e12) hi *= 2.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (pick(mid, choice)) hi = mid;
      else lo = mid;
    }
    pick(hi, choice);
  }
  State cand = s;
  cand.g = choice;
  if (!valid(cand)) return false;
  double value = score(cand);
  for (bool moved = true; moved;) {
    moved = false;
    for (int r = 0; r < R; ++r) {
      for (int g = 0; g < G; ++g) {
        if (g == cand.g[r]) continue;
        State next = cand;
        next.g[r] = g;
        if (!valid(next)) continue;
        const double v = score(next);
        if (improves(v, value)) {
          cand = std::move(next);
          value = v;
          moved = true;
        }
      }
    }
  }
  if (!improves(value, before)) return false;
  s = std::move(cand);
  return true;
}

bool Planner::toggle_models(State& s) const {
  const int J = inst_.ec_count();
  const int S = static_cast<int>(inst_.models.size());
  const Layout lay = layout_of(inst_);
  bool any = false;
  double current = score(s);
  auto drop_orphans = [&](State& c, int sm) {
    bool open = false;
    for (int j = 0; j < J; ++j) open = open || c.p[sm * J + j];
    if (open) return;
    for (int f = 0; f < lay.slots; ++f) {
      const int r = lay.slot_request[f];
      if (inst_.requests[r].models[lay.slot_model_pos[f]].model == sm) c.h[f] = 0;
    }
  };
  for (int sm = 0; sm < S; ++sm) {
    for (int j = 0; j < J; ++j) {
      // Flip one copy, or move it to another EC.
      std::vector<State> options;
      State flip = s;
      flip.p[sm * J + j] ^= 1;
      drop_orphans(flip, sm);
      options.push_back(flip);
      if (s.p[sm * J + j]) {
        for (int j2 = 0; j2 < J; ++j2) {
          if (s.p[sm * J + j2]) continue;
          State moved = s;
          moved.p[sm * J + j] = 0;
          moved.p[sm * J + j2] = 1;
          options.push_back(std::move(moved));
        }
      }
      for (State& c : options) {
        if (!valid(c)) continue;
        // Requests follow the copies before the move is judged.
        place_requests(c, false);
        const double v = score(c);
        if (improves(v, current)) {
          s = std::move(c);
          current = v;
          any = true;
          break;
        }
      }
    }
  }
  return any;
}

bool Planner::move_aros(State& s) const {
  const Layout lay = layout_of(inst_);
  bool any = false;
  double current = score(s);
  std::vector<int> owner_slot(inst_.aros.size(), -1);
  for (int f = 0; f < lay.slots; ++f) {
    if (s.h[f]) owner_slot[lay.slot_aro[f]] = f;
  }
  for (int f = 0; f < lay.slots; ++f) {
    State c = s;
    const int l = lay.slot_aro[f];
    if (c.h[f]) {
      c.h[f] = 0;
    } else {
      if (owner_slot[l] >= 0) c.h[owner_slot[l]] = 0;
      c.h[f] = 1;
    }
    if (!valid(c)) continue;
    const double v = score(c);
    if (improves(v, current)) {
      if (s.h[f]) {
        owner_slot[l] = -1;
      } else {
        owner_slot[l] = f;
      }
      s = std::move(c);
      current = v;
      any = true;
    }
  }
  return any;
}

bool Planner::chase_hits(State& s) const {
  const int J = inst_.ec_count();
  const Layout lay = layout_of(inst_);
  bool any = false;
  double current = score(s);
  for (int r = 0; r < inst_.request_count(); ++r) {
    const Request& q = inst_.requests[r];
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
      const int sm = q.models[m].model;
      for (int j = 0; j < J; ++j) {
        State c = s;
        c.p[sm * J + j] = 1;
        const int start = lay.h_start[r][m];
        for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
          const int l = q.models[m].targets[t];
          for (int f = 0; f < lay.slots; ++f) {
            if (lay.slot_aro[f] == l) c.h[f] = 0;
          }
          c.h[start + t] = 1;
        }
        c.yj[r] = j;
        // Best compute node for the new storage node.
        State best;
        double best_value = std::numeric_limits<double>::infinity();
        for (int k = 0; k < static_cast<int>(program_.index.compute_nodes[r].size()); ++k) {
          c.xk[r] = k;
          if (!valid(c)) continue;
          const double v = score(c);
          if (v < best_value) {
            best_value = v;
            best = c;
          }
        }
        if (std::isfinite(best_value) && improves(best_value, current)) {
          s = std::move(best);
          current = best_value;
          any = true;
        }
      }
    }
  }
  return any;
}

Plan Planner::improve(const Plan& start, int max_rounds) const {
  State s = to_state(start);
  for (int round = 0; round < max_rounds; ++round) {
    bool moved = false;
    moved = place_requests(s, true) || moved;
    moved = choose_rates(s) || moved;
    moved = toggle_models(s) || moved;
    moved = move_aros(s) || moved;
    moved = chase_hits(s) || moved;
    if (!moved) break;
  }
  return to_plan(s);
}

std::optional<Plan> Planner::construct() const {
  const VariableIndex& idx = program_.index;
  const int R = inst_.request_count();
  const int J = inst_.ec_count();
  const int S = static_cast<int>(inst_.models.size());
  const int G = inst_.rates.size();
  const Layout lay = layout_of(inst_);

  State s;
  s.g.assign(R, G - 1);
  s.p.assign(S * J, 0);
  s.h.assign(lay.slots, 0);
  // Closest EC for both functions while slots last.
  std::vector<int> free_slots;
  for (const EcProfile& ec : inst_.ecs) free_slots.push_back(ec.vm_count);
  for (int r = 0; r < R; ++r) {
    const int origin = inst_.requests[r].origin;
    int pick = -1;
    for (int j = 0; j < J; ++j) {
      if (free_slots[j] < 2) continue;
      if (pick < 0 || inst_.topology.hops(origin, inst_.ecs[j].node) <
                          inst_.topology.hops(origin, inst_.ecs[pick].node)) {
        pick = j;
      }
    }
    int storage = pick;
    int compute_ec = pick;
    if (pick < 0) {
      // Split the functions over two ECs with one free slot each.
      for (int j = 0; j < J && (storage < 0 || compute_ec < 0); ++j) {
        if (free_slots[j] < 1) continue;
        if (storage < 0) storage = j;
        else compute_ec = j;
      }
      if (storage < 0) return std::nullopt;
    }
    --free_slots[storage];
    if (compute_ec >= 0) {
      --free_slots[compute_ec];
      s.yj.push_back(storage);
      s.xk.push_back(idx.compute_slot(r, inst_.ecs[compute_ec].node));
    } else {
      // No second slot anywhere: compute at the terminal if allowed.
      const int k = idx.compute_slot(r, inst_.requests[r].terminal);
      if (k < 0) return std::nullopt;
      s.yj.push_back(storage);
      s.xk.push_back(k);
    }
  }

  // Cheapest models first until every request holds one exclusive ARO.
  std::vector<double> open_cost(S, std::numeric_limits<double>::infinity());
  std::vector<int> open_at(S, -1);
  for (int sm = 0; sm < S; ++sm) {
    for (int j = 0; j < J; ++j) {
      if (cost_[idx.p[sm][j]] < open_cost[sm]) {
        open_cost[sm] = cost_[idx.p[sm][j]];
        open_at[sm] = j;
      }
    }
    for (int r = 0; r < R; ++r) {
      const Request& q = inst_.requests[r];
      for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
        if (q.models[m].model == sm) open_cost[sm] += cost_[idx.phi[r][m][G - 1]];
      }
    }
  }
  std::vector<int> order(S);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return open_cost[a] < open_cost[b]; });

  std::vector<char> open(S, 0);
  std::vector<int> slot_of_aro(inst_.aros.size(), -1);  // matched slot
  std::vector<int> matched(R, -1);                      // slot per request
  auto augment = [&](int r, std::vector<char>& seen, auto&& self) -> bool {
    for (int f = 0; f < lay.slots; ++f) {
      if (lay.slot_request[f] != r) continue;
      const int l = lay.slot_aro[f];
      if (!open[inst_.aros[l].model] || seen[l]) continue;
      seen[l] = 1;
      const int holder = slot_of_aro[l];
      if (holder < 0 || self(lay.slot_request[holder], seen, self)) {
        slot_of_aro[l] = f;
        matched[r] = f;
        return true;
      }
    }
    return false;
  };
  int covered = 0;
  for (int sm : order) {
    if (covered == R) break;
    open[sm] = 1;
    for (int r = 0; r < R; ++r) {
      if (matched[r] >= 0) continue;
      std::vector<char> seen(inst_.aros.size(), 0);
      if (augment(r, seen, augment)) ++covered;
    }
  }
  if (covered < R) return std::nullopt;
  for (int r = 0; r < R; ++r) s.h[matched[r]] = 1;

  // One copy per open model at the cheapest EC with room.
  std::vector<double> used_mb(J, 0.0);
  for (int sm : order) {
    if (!open[sm]) continue;
    double need = 0.0;
    for (int r = 0; r < R; ++r) {
      const int l = lay.slot_aro[matched[r]];
      if (inst_.aros[l].model == sm) need += inst_.aros[l].size_bytes / 1e6;
    }
    int best = -1;
    for (int j = 0; j < J; ++j) {
      if (used_mb[j] + need > inst_.ecs[j].cache_bytes / 1e6) continue;
      if (best < 0 || cost_[idx.p[sm][j]] < cost_[idx.p[sm][best]]) best = j;
    }
    if (best < 0) return std::nullopt;
    used_mb[best] += need;
    s.p[sm * J + best] = 1;
  }
  if (!valid(s)) {
    choose_rates(s);
    if (!valid(s)) return std::nullopt;
  }
  return to_plan(s);
}

OptimResult solve_optim(const Instance& inst, const OptimOptions& options, const std::vector<Plan>& hints) {
  const BuiltProgram program = build_program(inst, {options.mu, options.mode, options.q_bound});
  return solve_optim(inst, program, options, hints);
}

OptimResult solve_optim(const Instance& inst, const BuiltProgram& program, const OptimOptions& options,
                        const std::vector<Plan>& hints) {
  OptimResult out;
  const Planner planner(inst, program, options.q_bound);

  std::optional<Plan> best;
  double best_value = std::numeric_limits<double>::infinity();
  auto offer = [&](const Plan& plan) {
    const double v = planner.objective(plan);
    if (!best || improves(v, best_value)) {
      best = plan;
      best_value = v;
    }
  };
  if (auto start = planner.construct()) offer(planner.improve(*start));
  for (const Plan& hint : hints) {
    if (planner.feasible(hint)) offer(planner.improve(hint));
  }
  out.warm_objective = best_value;

  if (!options.heuristic_only) {
    SolveOptions solver = options.solver;
    if (best) solver.warm_start = expand_plan(inst, program.index, *best);
    out.solution = solve(program.lp, solver);
    if (out.solution.has_assignment()) {
      offer(planner.improve(extract_plan(inst, program.index, out.solution.assignment)));
    }
  } else {
    out.solution.status = best ? SolveStatus::BoundReached : SolveStatus::Infeasible;
  }
  out.plan = best;
  out.objective = best_value;
  return out;
}

}  // namespace medge
