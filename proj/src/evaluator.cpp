#include "medge/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace medge {

void Plan::normalize() {
  std::sort(cached_models.begin(), cached_models.end());
  cached_models.erase(std::unique(cached_models.begin(), cached_models.end()), cached_models.end());
  std::sort(cached_aros.begin(), cached_aros.end());
  cached_aros.erase(std::unique(cached_aros.begin(), cached_aros.end()), cached_aros.end());
}

bool Plan::has_model(int model, int node) const {
  return std::find(cached_models.begin(), cached_models.end(), std::make_pair(model, node)) !=
         cached_models.end();
}

bool Plan::has_aro(int request, int model, int aro) const {
  return std::find(cached_aros.begin(), cached_aros.end(), CachedAro{request, model, aro}) !=
         cached_aros.end();
}

namespace {

void require_shape(const Instance& inst, const Plan& plan) {
  const std::size_t R = inst.requests.size();
  if (plan.compute_node.size() != R || plan.storage_node.size() != R || plan.rate_index.size() != R) {
    throw std::invalid_argument("plan must give a compute node, a storage node and a rate for every request");
  }
  for (std::size_t r = 0; r < R; ++r) {
    const int c = plan.compute_node[r];
    if (inst.ec_index(c) < 0 && c != inst.requests[r].terminal) {
      throw std::invalid_argument("request " + std::to_string(r) + ": compute node " + std::to_string(c) +
                                  " is neither an active EC nor the request's terminal");
    }
    if (inst.ec_index(plan.storage_node[r]) < 0) {
      throw std::invalid_argument("request " + std::to_string(r) + ": storage node " +
                                  std::to_string(plan.storage_node[r]) + " is not an active EC");
    }
    if (plan.rate_index[r] < 0 || plan.rate_index[r] >= inst.rates.size()) {
      throw std::invalid_argument("request " + std::to_string(r) + ": rate index out of range");
    }
  }
  for (const auto& [s, node] : plan.cached_models) {
    if (s < 0 || s >= static_cast<int>(inst.models.size()) || inst.ec_index(node) < 0) {
      throw std::invalid_argument("cached model entry (" + std::to_string(s) + ", " + std::to_string(node) +
                                  ") is out of range");
    }
  }
  for (const CachedAro& c : plan.cached_aros) {
    if (c.request < 0 || c.request >= static_cast<int>(R)) {
      throw std::invalid_argument("cached ARO names an unknown request");
    }
    bool known = false;
    for (const RequestModel& m : inst.requests[c.request].models) {
      if (m.model != c.model) continue;
      known = std::find(m.targets.begin(), m.targets.end(), c.aro) != m.targets.end();
    }
    if (!known) {
      throw std::invalid_argument("cached ARO " + std::to_string(c.aro) + " is not a target of request " +
                                  std::to_string(c.request) + " in model " + std::to_string(c.model));
    }
  }
}

bool model_placed(const Plan& plan, int model) {
  return std::any_of(plan.cached_models.begin(), plan.cached_models.end(),
                     [&](const auto& e) { return e.first == model; });
}

/// Result-frame bits delivered to r for model s.
double frame_bits(const Instance& inst, int r, const RequestModel& m) {
  if (!inst.params.shared_region_frames) return m.result_bits;
  const int region = inst.topology.region_of(inst.requests[r].origin);
  double bits = 0.0;
  for (const Request& t : inst.requests) {
    if (inst.topology.region_of(t.origin) != region) continue;
    for (const RequestModel& tm : t.models) bits += tm.model == m.model ? tm.result_bits : 0.0;
  }
  return bits;
}

/// Bits matched by the storage function: pointer, background of the models
/// rendered at the storage node and the request's ARO cached there.
double storage_bits(const Instance& inst, const Plan& plan, int r) {
  const Request& q = inst.requests[r];
  const int node = plan.storage_node[r];
  double bits = q.pointer_bits;
  for (const RequestModel& m : q.models) {
    if (!plan.has_model(m.model, node)) continue;
    bits += m.background_bits;
    for (int l : m.targets) {
      if (plan.has_aro(r, m.model, l)) bits += 8.0 * inst.aros[l].size_bytes * inst.params.content_bit_scale;
    }
  }
  return bits;
}

double compute_hz(const Instance& inst, int r, int node) {
  const Request& q = inst.requests[r];
  if (node == q.terminal) return q.terminal_cpu_hz * q.terminal_portion;
  return inst.ecs[inst.ec_index(node)].vm_cpu_hz;
}

std::vector<bool> overloaded_requests(const Instance& inst, const Plan& plan) {
  std::vector<int> used(inst.ecs.size(), 0);
  std::vector<bool> out(inst.requests.size(), false);
  for (std::size_t r = 0; r < inst.requests.size(); ++r) {
    std::vector<int> need(inst.ecs.size(), 0);
    const int c = inst.ec_index(plan.compute_node[r]);
    if (c >= 0) ++need[c];
    ++need[inst.ec_index(plan.storage_node[r])];
    bool fits = true;
    for (std::size_t j = 0; j < need.size(); ++j) fits = fits && used[j] + need[j] <= inst.ecs[j].vm_count;
    if (!fits) {
      out[r] = true;
      continue;
    }
    for (std::size_t j = 0; j < need.size(); ++j) used[j] += need[j];
  }
  return out;
}

}  // namespace

bool cache_hit(const Instance& inst, const Plan& plan, int request, int node) {
  for (const RequestModel& m : inst.requests[request].models) {
    if (!plan.has_model(m.model, node)) continue;
    const bool all = std::all_of(m.targets.begin(), m.targets.end(),
                                 [&](int l) { return plan.has_aro(request, m.model, l); });
    if (all) return true;
  }
  return false;
}

LatencyParts evaluate_latency(const Instance& inst, const Plan& plan) {
  require_shape(inst, plan);
  LatencyParts out;
  const std::vector<bool> overloaded = overloaded_requests(inst, plan);
  for (int r = 0; r < inst.request_count(); ++r) {
    const Request& q = inst.requests[r];
    const int c = plan.compute_node[r];
    const int st = plan.storage_node[r];
    const double rate = inst.rates.rates_bps[plan.rate_index[r]];

    double air_bits = q.foreground_bits;
    for (const RequestModel& m : q.models) {
      if (model_placed(plan, m.model)) air_bits += frame_bits(inst, r, m);
    }
    const double air_ms = 1000.0 * air_bits / rate;
    out.wireless_ms += air_ms;

    // Initial location: access to compute, compute to storage, region link
    // and every rendered copy of the request's models to its region.
    const int home_server = inst.region_server_of(q.origin);
    out.wired_ms += inst.wired_ms(q.origin, c) + inst.wired_ms(c, st) + inst.wired_ms(home_server, q.origin);
    for (const RequestModel& m : q.models) {
      for (const auto& [s, node] : plan.cached_models) {
        if (s == m.model) out.wired_ms += inst.wired_ms(node, home_server);
      }
    }

    const double fore_cycles = inst.params.omega_fore * q.foreground_bits;
    out.processing_ms += 1000.0 * fore_cycles / compute_hz(inst, r, c);
    out.processing_ms +=
        1000.0 * inst.params.omega_back * storage_bits(inst, plan, r) / inst.ecs[inst.ec_index(st)].vm_cpu_hz;

    if (cache_hit(inst, plan, r, st)) ++out.cache_hits;
    else out.penalty_ms += inst.params.penalty_ms;
    if (overloaded[r]) {
      ++out.overloaded;
      out.penalty_ms += inst.params.penalty_ms;
    }

    for (const auto& [k, u] : q.mobility.destinations) {
      const int server = inst.region_server_of(k);
      double leg = air_ms + inst.wired_ms(server, k) + inst.wired_ms(k, c);
      for (const RequestModel& m : q.models) {
        for (const auto& [s, node] : plan.cached_models) {
          if (s == m.model) leg += inst.wired_ms(node, server);
        }
      }
      out.mobility_ms += u * leg;
    }
  }
  return out;
}

EnergyParts evaluate_energy(const Instance& inst, const Plan& plan) {
  require_shape(inst, plan);
  EnergyParts out;
  for (int r = 0; r < inst.request_count(); ++r) {
    const Request& q = inst.requests[r];
    const int c = plan.compute_node[r];
    const EcProfile& store = inst.ecs[inst.ec_index(plan.storage_node[r])];
    const double rate = inst.rates.rates_bps[plan.rate_index[r]];

    const double uplink_s = (q.foreground_bits + q.pointer_bits) / rate;
    out.server_j += transmit_power(q.link, rate) * uplink_s;

    const double fore_cycles = inst.params.omega_fore * q.foreground_bits;
    if (c == q.terminal) {
      const double f = q.terminal_cpu_hz;
      out.terminal_j += inst.params.chip_coefficient * f * f * (fore_cycles / (f * q.terminal_portion));
    } else {
      const EcProfile& ec = inst.ecs[inst.ec_index(c)];
      out.server_j += ec.chip_coefficient * ec.vm_cpu_hz * ec.vm_cpu_hz * (fore_cycles / ec.vm_cpu_hz);
    }
    const double match_s = inst.params.omega_back * storage_bits(inst, plan, r) / store.vm_cpu_hz;
    out.server_j += store.chip_coefficient * store.vm_cpu_hz * store.vm_cpu_hz * match_s;
  }
  return out;
}

std::pair<double, double> evaluate_quality(const Instance& inst, const Plan& plan) {
  if (plan.rate_index.size() != inst.requests.size()) {
    throw std::invalid_argument("plan must give a rate for every request");
  }
  double q = 0.0, q_max = 0.0;
  const double best = *std::max_element(inst.rates.ssim.begin(), inst.rates.ssim.end());
  for (int r = 0; r < inst.request_count(); ++r) {
    const int g = plan.rate_index[r];
    if (g < 0 || g >= inst.rates.size()) throw std::invalid_argument("rate index out of range");
    q += inst.requests[r].target_count() * inst.rates.ssim[g];
    q_max += inst.requests[r].target_count() * best;
  }
  return {q, q_max > 0.0 ? q / q_max : 1.0};
}

MetricBreakdown evaluate(const Instance& inst, const Plan& plan) {
  const LatencyParts l = evaluate_latency(inst, plan);
  const EnergyParts e = evaluate_energy(inst, plan);
  const auto [q, qn] = evaluate_quality(inst, plan);
  MetricBreakdown m;
  m.wireless_ms = l.wireless_ms;
  m.wired_ms = l.wired_ms;
  m.processing_ms = l.processing_ms;
  m.penalty_ms = l.penalty_ms;
  m.mobility_ms = l.mobility_ms;
  m.latency_ms = l.total();
  m.server_energy_j = e.server_j;
  m.terminal_energy_j = e.terminal_j;
  m.energy_j = e.total();
  m.quality = q;
  m.quality_norm = qn;
  m.cache_hits = l.cache_hits;
  m.overloaded = l.overloaded;
  for (int r = 0; r < inst.request_count(); ++r) {
    const double rate = inst.rates.rates_bps[plan.rate_index[r]];
    if (transmit_power(inst.requests[r].link, rate) > 1.0) ++m.high_power_links;
  }
  return m;
}

double scalarized_objective(const Instance& inst, const Plan& plan, double mu) {
  const NormalizationBounds b = normalization_bounds(inst);
  return mu * evaluate_latency(inst, plan).total() / b.l_max +
         (1.0 - mu) * evaluate_energy(inst, plan).total() / b.e_max;
}

std::string MetricBreakdown::csv_header() {
  return "wireless_ms,wired_ms,processing_ms,penalty_ms,mobility_ms,latency_ms,server_energy_j,"
         "terminal_energy_j,energy_j,quality,quality_norm,cache_hits,overloaded,high_power_links";
}

std::string MetricBreakdown::csv_row() const {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%d,%d", wireless_ms,
                wired_ms, processing_ms, penalty_ms, mobility_ms, latency_ms, server_energy_j, terminal_energy_j,
                energy_j, quality, quality_norm, cache_hits, overloaded, high_power_links);
  return buf;
}

std::vector<Violation> check_feasibility(const Instance& inst, const Plan& plan, double q_bound,
                                         bool allow_terminal) {
  std::vector<Violation> out;
  try {
    require_shape(inst, plan);
  } catch (const std::invalid_argument& e) {
    out.push_back({"shape", e.what()});
    return out;
  }
  const int R = inst.request_count();
  const auto tag = [](const char* name, int v) { return std::string(name) + "=" + std::to_string(v); };

  std::vector<int> slots(inst.ecs.size(), 0);
  for (int r = 0; r < R; ++r) {
    const int c = plan.compute_node[r];
    if (c == inst.requests[r].terminal) {
      if (!allow_terminal) out.push_back({"compute_at_terminal", tag("request", r)});
    } else {
      ++slots[inst.ec_index(c)];
    }
    ++slots[inst.ec_index(plan.storage_node[r])];
  }
  for (int j = 0; j < inst.ec_count(); ++j) {
    if (slots[j] > inst.ecs[j].vm_count) {
      out.push_back({"vm_capacity", tag("ec", inst.ecs[j].node) + " used=" + std::to_string(slots[j]) +
                                        " capacity=" + std::to_string(inst.ecs[j].vm_count)});
    }
  }

  std::map<int, int> holders;
  std::vector<int> cached_per_request(R, 0);
  for (const CachedAro& c : plan.cached_aros) {
    ++holders[c.aro];
    ++cached_per_request[c.request];
    if (!model_placed(plan, c.model)) {
      out.push_back({"cache_needs_model", tag("request", c.request) + " " + tag("model", c.model) + " " +
                                              tag("aro", c.aro)});
    }
  }
  for (const auto& [l, count] : holders) {
    if (count > 1) out.push_back({"cache_once", tag("aro", l) + " holders=" + std::to_string(count)});
  }
  for (int r = 0; r < R; ++r) {
    if (cached_per_request[r] == 0) out.push_back({"cache_some", tag("request", r)});
  }
  for (int j = 0; j < inst.ec_count(); ++j) {
    const int node = inst.ecs[j].node;
    double mb = 0.0;
    for (const CachedAro& c : plan.cached_aros) {
      if (plan.has_model(c.model, node)) mb += inst.aros[c.aro].size_bytes / 1e6;
    }
    if (mb > inst.ecs[j].cache_bytes / 1e6 + 1e-9) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "ec=%d used_mb=%.6g capacity_mb=%.6g", node, mb, inst.ecs[j].cache_bytes / 1e6);
      out.push_back({"cache_capacity", buf});
    }
  }

  const auto [q, qn] = evaluate_quality(inst, plan);
  const NormalizationBounds b = normalization_bounds(inst);
  if (q < q_bound * b.q_max - 1e-9 * std::max(1.0, b.q_max)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "normalized=%.9g bound=%.9g", qn, q_bound);
    out.push_back({"quality", buf});
  }
  return out;
}

Assignment expand_plan(const Instance& inst, const VariableIndex& idx, const Plan& plan) {
  require_shape(inst, plan);
  Assignment a(idx.count, 0);
  const int R = inst.request_count();
  const int J = inst.ec_count();
  for (const auto& [s, node] : plan.cached_models) a[idx.p[s][inst.ec_index(node)]] = 1;
  for (int r = 0; r < R; ++r) {
    const Request& q = inst.requests[r];
    const int k = idx.compute_slot(r, plan.compute_node[r]);
    if (k < 0) throw std::invalid_argument("compute node of request " + std::to_string(r) + " is not in the index");
    a[idx.x[r][k]] = 1;
    const int ys = inst.ec_index(plan.storage_node[r]);
    a[idx.y[r][ys]] = 1;
    a[idx.e[r][plan.rate_index[r]]] = 1;
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
      const int s = q.models[m].model;
      for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
        a[idx.h[r][m][t]] = plan.has_aro(r, s, q.models[m].targets[t]) ? 1 : 0;
      }
    }
  }
  for (int r = 0; r < R; ++r) {
    const Request& q = inst.requests[r];
    for (int j = 0; j < J; ++j) {
      bool any = false;
      for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
        const int s = q.models[m].model;
        const bool p = a[idx.p[s][j]];
        a[idx.alpha[r][m][j]] = p && a[idx.y[r][j]];
        bool all = true;
        for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
          const bool beta = p && a[idx.h[r][m][t]];
          a[idx.beta[r][m][t][j]] = beta;
          a[idx.lambda[r][m][t][j]] = a[idx.alpha[r][m][j]] && beta;
          all = all && beta;
        }
        a[idx.hit[r][m][j]] = all;
        any = any || all;
      }
      a[idx.z[r][j]] = any;
      a[idx.q[r][j]] = !any;
      a[idx.psi[r][j]] = !any && a[idx.y[r][j]];
    }
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
      bool placed = false;
      for (int j = 0; j < J; ++j) placed = placed || a[idx.p[q.models[m].model][j]];
      for (int g = 0; g < inst.rates.size(); ++g) a[idx.phi[r][m][g]] = placed && a[idx.e[r][g]];
    }
    for (int k = 0; k < static_cast<int>(idx.compute_nodes[r].size()); ++k) {
      for (int j = 0; j < J; ++j) a[idx.xi[r][k][j]] = a[idx.x[r][k]] && a[idx.y[r][j]];
    }
  }
  return a;
}

Plan extract_plan(const Instance& inst, const VariableIndex& idx, const Assignment& a) {
  if (static_cast<int>(a.size()) != idx.count) throw std::invalid_argument("assignment size does not match index");
  const int R = inst.request_count();
  Plan plan;
  plan.compute_node.assign(R, -1);
  plan.storage_node.assign(R, -1);
  plan.rate_index.assign(R, -1);
  for (int r = 0; r < R; ++r) {
    for (int k = 0; k < static_cast<int>(idx.x[r].size()); ++k) {
      if (a[idx.x[r][k]]) plan.compute_node[r] = idx.compute_nodes[r][k];
    }
    for (int j = 0; j < inst.ec_count(); ++j) {
      if (a[idx.y[r][j]]) plan.storage_node[r] = inst.ecs[j].node;
    }
    for (int g = 0; g < inst.rates.size(); ++g) {
      if (a[idx.e[r][g]]) plan.rate_index[r] = g;
    }
    const Request& q = inst.requests[r];
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
      for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
        if (a[idx.h[r][m][t]]) plan.cached_aros.push_back({r, q.models[m].model, q.models[m].targets[t]});
      }
    }
  }
  for (int s = 0; s < static_cast<int>(idx.p.size()); ++s) {
    for (int j = 0; j < inst.ec_count(); ++j) {
      if (a[idx.p[s][j]]) plan.cached_models.emplace_back(s, inst.ecs[j].node);
    }
  }
  plan.normalize();
  return plan;
}

std::string plan_to_json(const Plan& plan) {
  nlohmann::json j;
  j["schema"] = "medge-plan";
  j["version"] = 1;
  j["compute_node"] = plan.compute_node;
  j["storage_node"] = plan.storage_node;
  j["rate_index"] = plan.rate_index;
  j["cached_models"] = nlohmann::json::array();
  for (const auto& [s, node] : plan.cached_models) j["cached_models"].push_back({s, node});
  j["cached_aros"] = nlohmann::json::array();
  for (const CachedAro& c : plan.cached_aros) j["cached_aros"].push_back({c.request, c.model, c.aro});
  return j.dump(1);
}

Plan plan_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("schema") != "medge-plan" || j.at("version") != 1) {
      throw std::invalid_argument("not a medge-plan version 1 document");
    }
    Plan plan;
    plan.compute_node = j.at("compute_node").get<std::vector<int>>();
    plan.storage_node = j.at("storage_node").get<std::vector<int>>();
    plan.rate_index = j.at("rate_index").get<std::vector<int>>();
    for (const auto& e : j.at("cached_models")) plan.cached_models.emplace_back(e.at(0), e.at(1));
    for (const auto& e : j.at("cached_aros")) plan.cached_aros.push_back({e.at(0), e.at(1), e.at(2)});
    plan.normalize();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad plan document: ") + e.what());
  }
}

}  // namespace medge
