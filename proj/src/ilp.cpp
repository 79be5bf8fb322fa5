#include "medge/ilp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace medge {

std::string to_string(Mode mode) { return mode == Mode::OptimT ? "OptimT" : "OptimNT"; }

int VariableIndex::compute_slot(int r, int node) const {
  const auto& nodes = compute_nodes[r];
  for (int k = 0; k < static_cast<int>(nodes.size()); ++k) {
    if (nodes[k] == node) return k;
  }
  return -1;
}

VariableIndex build_index(const Instance& inst, Mode mode) {
  VariableIndex idx;
  idx.mode = mode;
  const int R = inst.request_count();
  const int J = inst.ec_count();
  const int G = inst.rates.size();
  const int S = static_cast<int>(inst.models.size());
  auto add = [&](std::string name, bool aux) {
    idx.names.push_back(std::move(name));
    idx.auxiliary.push_back(aux ? 1 : 0);
    return idx.count++;
  };
  auto n = [](int v) { return std::to_string(v); };

  idx.compute_nodes.resize(R);
  idx.x.resize(R);
  for (int r = 0; r < R; ++r) {
    for (const EcProfile& ec : inst.ecs) idx.compute_nodes[r].push_back(ec.node);
    if (mode == Mode::OptimT) idx.compute_nodes[r].push_back(inst.requests[r].terminal);
    for (int node : idx.compute_nodes[r]) idx.x[r].push_back(add("x_r" + n(r) + "_n" + n(node), false));
  }
  idx.y.assign(R, std::vector<int>(J));
  for (int r = 0; r < R; ++r) {
    for (int j = 0; j < J; ++j) idx.y[r][j] = add("y_r" + n(r) + "_n" + n(inst.ecs[j].node), false);
  }
  idx.p.assign(S, std::vector<int>(J));
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j < J; ++j) idx.p[s][j] = add("p_s" + n(s) + "_n" + n(inst.ecs[j].node), false);
  }
  idx.h.resize(R);
  for (int r = 0; r < R; ++r) {
    for (const RequestModel& m : inst.requests[r].models) {
      std::vector<int> row;
      for (int l : m.targets) row.push_back(add("h_r" + n(r) + "_s" + n(m.model) + "_l" + n(l), false));
      idx.h[r].push_back(row);
    }
  }
  idx.e.assign(R, std::vector<int>(G));
  for (int r = 0; r < R; ++r) {
    for (int g = 0; g < G; ++g) idx.e[r][g] = add("e_r" + n(r) + "_g" + n(g), false);
  }
  idx.z.assign(R, std::vector<int>(J));
  for (int r = 0; r < R; ++r) {
    for (int j = 0; j < J; ++j) idx.z[r][j] = add("z_r" + n(r) + "_n" + n(inst.ecs[j].node), true);
  }
  idx.q.assign(R, std::vector<int>(J));
  for (int r = 0; r < R; ++r) {
    for (int j = 0; j < J; ++j) idx.q[r][j] = add("q_r" + n(r) + "_n" + n(inst.ecs[j].node), true);
  }
  auto per_model_ec = [&](const std::string& prefix) {
    std::vector<std::vector<std::vector<int>>> out(R);
    for (int r = 0; r < R; ++r) {
      for (const RequestModel& m : inst.requests[r].models) {
        std::vector<int> row(J);
        for (int j = 0; j < J; ++j) {
          row[j] = add(prefix + "_r" + n(r) + "_s" + n(m.model) + "_n" + n(inst.ecs[j].node), true);
        }
        out[r].push_back(row);
      }
    }
    return out;
  };
  idx.hit = per_model_ec("hit");
  idx.alpha = per_model_ec("a");
  auto per_target_ec = [&](const std::string& prefix) {
    std::vector<std::vector<std::vector<std::vector<int>>>> out(R);
    for (int r = 0; r < R; ++r) {
      for (const RequestModel& m : inst.requests[r].models) {
        std::vector<std::vector<int>> block;
        for (int l : m.targets) {
          std::vector<int> row(J);
          for (int j = 0; j < J; ++j) {
            row[j] = add(prefix + "_r" + n(r) + "_s" + n(m.model) + "_l" + n(l) + "_n" +
                             n(inst.ecs[j].node),
                         true);
          }
          block.push_back(row);
        }
        out[r].push_back(block);
      }
    }
    return out;
  };
  idx.beta = per_target_ec("b");
  idx.lambda = per_target_ec("lam");
  idx.phi.resize(R);
  for (int r = 0; r < R; ++r) {
    for (const RequestModel& m : inst.requests[r].models) {
      std::vector<int> row(G);
      for (int g = 0; g < G; ++g) row[g] = add("phi_r" + n(r) + "_s" + n(m.model) + "_g" + n(g), true);
      idx.phi[r].push_back(row);
    }
  }
  idx.psi.assign(R, std::vector<int>(J));
  for (int r = 0; r < R; ++r) {
    for (int j = 0; j < J; ++j) idx.psi[r][j] = add("psi_r" + n(r) + "_n" + n(inst.ecs[j].node), true);
  }
  idx.xi.resize(R);
  for (int r = 0; r < R; ++r) {
    for (int node : idx.compute_nodes[r]) {
      std::vector<int> row(J);
      for (int j = 0; j < J; ++j) {
        row[j] = add("xi_r" + n(r) + "_n" + n(node) + "_n" + n(inst.ecs[j].node), true);
      }
      idx.xi[r].push_back(row);
    }
  }
  return idx;
}

double LinearExpression::evaluate(const Assignment& a) const {
  double v = constant;
  for (const Term& t : terms) v += a[t.var] ? t.coef : 0.0;
  return v;
}

CacheConstants cache_constants(const Instance& inst) {
  std::size_t max_models = 0;
  for (const Request& q : inst.requests) max_models = std::max(max_models, q.models.size());
  CacheConstants c;
  c.big_u = static_cast<double>(inst.aros.size() * max_models) + 1.0;
  return c;
}

namespace {

std::string n(int v) { return std::to_string(v); }

Constraint row(std::string name, std::vector<Term> terms, RowSense sense, double rhs) {
  return {std::move(name), std::move(terms), sense, rhs};
}

double mobility_total(const Request& q) { return q.mobility.total_probability(); }

/// Result-frame bits charged to request r for its m-th model.
double region_result_bits(const Instance& inst, int r, int m) {
  const Request& q = inst.requests[r];
  const int s = q.models[m].model;
  if (!inst.params.shared_region_frames) return q.models[m].result_bits;
  const int region = inst.topology.region_of(q.origin);
  double bits = 0.0;
  for (const Request& t : inst.requests) {
    if (inst.topology.region_of(t.origin) != region) continue;
    for (const RequestModel& tm : t.models) {
      if (tm.model == s) bits += tm.result_bits;
    }
  }
  return bits;
}

/// Wired delay from the request's access site and from each destination,
/// mobility weighted, to a compute node.
double compute_wired_ms(const Instance& inst, int r, int node) {
  const Request& q = inst.requests[r];
  double v = inst.wired_ms(q.origin, node);
  for (const auto& [k, u] : q.mobility.destinations) v += u * inst.wired_ms(k, node);
  return v;
}

double compute_seconds(const Instance& inst, int r, int node) {
  const Request& q = inst.requests[r];
  const double cycles = inst.params.omega_fore * q.foreground_bits;
  if (node == q.terminal) return cycles / (q.terminal_cpu_hz * q.terminal_portion);
  return cycles / inst.ecs[inst.ec_index(node)].vm_cpu_hz;
}

double compute_joules(const Instance& inst, int r, int node) {
  const Request& q = inst.requests[r];
  const double f = node == q.terminal ? q.terminal_cpu_hz : inst.ecs[inst.ec_index(node)].vm_cpu_hz;
  const double k0 = node == q.terminal ? inst.params.chip_coefficient : inst.ecs[inst.ec_index(node)].chip_coefficient;
  return k0 * f * f * compute_seconds(inst, r, node);
}

double aro_bits(const Instance& inst, int l) {
  return 8.0 * inst.aros[l].size_bytes * inst.params.content_bit_scale;
}

/// Region-side wired cost of hosting a model copy at EC j for request r.
double model_wired_ms(const Instance& inst, int r, int j) {
  const Request& q = inst.requests[r];
  const int node = inst.ecs[j].node;
  double v = inst.wired_ms(node, inst.region_server_of(q.origin));
  for (const auto& [k, u] : q.mobility.destinations) v += u * inst.wired_ms(node, inst.region_server_of(k));
  return v;
}

double fixed_wired_ms(const Instance& inst, int r) {
  const Request& q = inst.requests[r];
  double v = inst.wired_ms(inst.region_server_of(q.origin), q.origin);
  for (const auto& [k, u] : q.mobility.destinations) v += u * inst.wired_ms(inst.region_server_of(k), k);
  return v;
}

double transmission_joules(const Instance& inst, int r, int g) {
  const Request& q = inst.requests[r];
  const double rate = inst.rates.rates_bps[g];
  return transmit_power(q.link, rate) * (q.foreground_bits + q.pointer_bits) / rate;
}

class Accumulator {
 public:
  explicit Accumulator(int n) : coef_(n, 0.0) {}
  void add(int var, double c) { coef_[var] += c; }
  [[nodiscard]] std::vector<Term> terms() const {
    std::vector<Term> out;
    for (int v = 0; v < static_cast<int>(coef_.size()); ++v) {
      if (coef_[v] != 0.0) out.push_back({v, coef_[v]});
    }
    return out;
  }

 private:
  std::vector<double> coef_;
};

}  // namespace

std::vector<Constraint> build_caching_constraints(const Instance& inst, const VariableIndex& idx) {
  std::vector<Constraint> out;
  const int R = inst.request_count();
  // Each ARO of a model is pre-cached for at most one request.
  std::vector<std::vector<Term>> once(inst.aros.size());
  for (int r = 0; r < R; ++r) {
    const Request& q = inst.requests[r];
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
      for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
        once[q.models[m].targets[t]].push_back({idx.h[r][m][t], 1.0});
      }
    }
  }
  for (std::size_t l = 0; l < once.size(); ++l) {
    if (once[l].empty()) continue;
    out.push_back(row("cache_once_s" + n(inst.aros[l].model) + "_l" + n(static_cast<int>(l)), once[l],
                      RowSense::LessEqual, 1.0));
  }
  for (int r = 0; r < R; ++r) {
    std::vector<Term> any;
    for (const auto& block : idx.h[r]) {
      for (int v : block) any.push_back({v, 1.0});
    }
    out.push_back(row("cache_some_r" + n(r), any, RowSense::GreaterEqual, 1.0));
  }
  for (int r = 0; r < R; ++r) {
    const Request& q = inst.requests[r];
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
      const int s = q.models[m].model;
      for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
        const std::string tag = "_r" + n(r) + "_s" + n(s) + "_l" + n(q.models[m].targets[t]);
        std::vector<Term> with_model;
        for (int v : idx.p[s]) with_model.push_back({v, 1.0});
        with_model.push_back({idx.h[r][m][t], -1.0});
        out.push_back(row("cache_needs_model" + tag, with_model, RowSense::GreaterEqual, 0.0));
        std::vector<Term> placed{{idx.h[r][m][t], 1.0}};
        for (int v : idx.beta[r][m][t]) placed.push_back({v, -1.0});
        out.push_back(row("cache_placed" + tag, placed, RowSense::LessEqual, 0.0));
      }
    }
  }
  return out;
}

std::vector<Constraint> build_cache_capacity_and_hit(const Instance& inst, const VariableIndex& idx) {
  std::vector<Constraint> out;
  const int R = inst.request_count();
  const int J = inst.ec_count();
  const CacheConstants cc = cache_constants(inst);
  for (int j = 0; j < J; ++j) {
    std::vector<Term> used;
    for (int r = 0; r < R; ++r) {
      const Request& q = inst.requests[r];
      for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
        for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
          used.push_back({idx.beta[r][m][t][j], inst.aros[q.models[m].targets[t]].size_bytes / 1e6});
        }
      }
    }
    if (!used.empty()) {
      out.push_back(row("cache_capacity_n" + n(inst.ecs[j].node), used, RowSense::LessEqual,
                        inst.ecs[j].cache_bytes / 1e6));
    }
  }
  for (int r = 0; r < R; ++r) {
    const Request& q = inst.requests[r];
    for (int j = 0; j < J; ++j) {
      const std::string tag = "_r" + n(r) + "_n" + n(inst.ecs[j].node);
      out.push_back(row("hit_complement" + tag, {{idx.z[r][j], 1.0}, {idx.q[r][j], 1.0}}, RowSense::Equal, 1.0));
      std::vector<Term> any_model{{idx.z[r][j], 1.0}};
      for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
        const std::string mtag = tag + "_s" + n(q.models[m].model);
        const int size = static_cast<int>(q.models[m].targets.size());
        // Either some target of the model is missing or the request hits.
        std::vector<Term> either;
        for (int t = 0; t < size; ++t) either.push_back({idx.beta[r][m][t][j], 1.0});
        either.push_back({idx.q[r][j], cc.big_u});
        out.push_back(row("hit_either" + mtag, either, RowSense::LessEqual, size - cc.epsilon + cc.big_u));
        // hit_rsj is the AND of the model's targets being cached at j.
        std::vector<Term> all{{idx.hit[r][m][j], 1.0}};
        for (int t = 0; t < size; ++t) {
          out.push_back(row("hit_needs" + mtag + "_l" + n(q.models[m].targets[t]),
                            {{idx.hit[r][m][j], 1.0}, {idx.beta[r][m][t][j], -1.0}}, RowSense::LessEqual, 0.0));
          all.push_back({idx.beta[r][m][t][j], -1.0});
        }
        out.push_back(row("hit_all" + mtag, all, RowSense::GreaterEqual, 1.0 - size));
        out.push_back(row("hit_implies" + mtag, {{idx.z[r][j], 1.0}, {idx.hit[r][m][j], -1.0}},
                          RowSense::GreaterEqual, 0.0));
        any_model.push_back({idx.hit[r][m][j], -1.0});
      }
      out.push_back(row("hit_any" + tag, any_model, RowSense::LessEqual, 0.0));
    }
  }
  return out;
}

namespace {

void product_rows(std::vector<Constraint>& out, const std::string& name, int w, int a, int b) {
  out.push_back(row(name + "_le1", {{w, 1.0}, {a, -1.0}}, RowSense::LessEqual, 0.0));
  out.push_back(row(name + "_le2", {{w, 1.0}, {b, -1.0}}, RowSense::LessEqual, 0.0));
  out.push_back(row(name + "_ge", {{w, 1.0}, {a, -1.0}, {b, -1.0}}, RowSense::GreaterEqual, -1.0));
}

}  // namespace

std::vector<Constraint> build_linearization_constraints(const Instance& inst, const VariableIndex& idx) {
  std::vector<Constraint> out;
  const int R = inst.request_count();
  const int J = inst.ec_count();
  const int G = inst.rates.size();
  for (int r = 0; r < R; ++r) {
    const Request& q = inst.requests[r];
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
      const int s = q.models[m].model;
      for (int j = 0; j < J; ++j) {
        const std::string tag = "_r" + n(r) + "_s" + n(s) + "_n" + n(inst.ecs[j].node);
        product_rows(out, "alpha" + tag, idx.alpha[r][m][j], idx.p[s][j], idx.y[r][j]);
        for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
          const std::string ttag = tag + "_l" + n(q.models[m].targets[t]);
          product_rows(out, "beta" + ttag, idx.beta[r][m][t][j], idx.p[s][j], idx.h[r][m][t]);
          product_rows(out, "lambda" + ttag, idx.lambda[r][m][t][j], idx.alpha[r][m][j], idx.beta[r][m][t][j]);
        }
      }
      for (int g = 0; g < G; ++g) {
        const std::string tag = "phi_r" + n(r) + "_s" + n(s) + "_g" + n(g);
        const int f = idx.phi[r][m][g];
        out.push_back(row(tag + "_le1", {{f, 1.0}, {idx.e[r][g], -1.0}}, RowSense::LessEqual, 0.0));
        std::vector<Term> some{{f, 1.0}};
        for (int j = 0; j < J; ++j) some.push_back({idx.p[s][j], -1.0});
        out.push_back(row(tag + "_le2", some, RowSense::LessEqual, 0.0));
        for (int j = 0; j < J; ++j) {
          out.push_back(row(tag + "_ge_n" + n(inst.ecs[j].node), {{f, 1.0}, {idx.e[r][g], -1.0}, {idx.p[s][j], -1.0}},
                            RowSense::GreaterEqual, -1.0));
        }
      }
    }
    for (int j = 0; j < J; ++j) {
      product_rows(out, "psi_r" + n(r) + "_n" + n(inst.ecs[j].node), idx.psi[r][j], idx.q[r][j], idx.y[r][j]);
    }
    for (int k = 0; k < static_cast<int>(idx.compute_nodes[r].size()); ++k) {
      const int node = idx.compute_nodes[r][k];
      std::vector<Term> over_storage{{idx.x[r][k], -1.0}};
      for (int j = 0; j < J; ++j) {
        product_rows(out, "xi_r" + n(r) + "_n" + n(node) + "_n" + n(inst.ecs[j].node), idx.xi[r][k][j],
                     idx.x[r][k], idx.y[r][j]);
        over_storage.push_back({idx.xi[r][k][j], 1.0});
      }
      // Exactly one storage node, so the products over j add up to x.
      out.push_back(row("xi_sum_r" + n(r) + "_n" + n(node), over_storage, RowSense::Equal, 0.0));
    }
    for (int j = 0; j < J; ++j) {
      std::vector<Term> over_compute{{idx.y[r][j], -1.0}};
      for (int k = 0; k < static_cast<int>(idx.compute_nodes[r].size()); ++k) {
        over_compute.push_back({idx.xi[r][k][j], 1.0});
      }
      out.push_back(row("xi_sum_r" + n(r) + "_store_n" + n(inst.ecs[j].node), over_compute, RowSense::Equal, 0.0));
    }
  }
  return out;
}

std::vector<Constraint> build_assignment_constraints(const Instance& inst, const VariableIndex& idx) {
  std::vector<Constraint> out;
  const int R = inst.request_count();
  const int J = inst.ec_count();
  for (int j = 0; j < J; ++j) {
    std::vector<Term> used;
    for (int r = 0; r < R; ++r) {
      const int k = idx.compute_slot(r, inst.ecs[j].node);
      if (k >= 0) used.push_back({idx.x[r][k], 1.0});
      used.push_back({idx.y[r][j], 1.0});
    }
    out.push_back(row("vm_capacity_n" + n(inst.ecs[j].node), used, RowSense::LessEqual, inst.ecs[j].vm_count));
  }
  for (int r = 0; r < R; ++r) {
    std::vector<Term> compute, storage, rate;
    for (int v : idx.x[r]) compute.push_back({v, 1.0});
    for (int v : idx.y[r]) storage.push_back({v, 1.0});
    for (int v : idx.e[r]) rate.push_back({v, 1.0});
    out.push_back(row("compute_once_r" + n(r), compute, RowSense::Equal, 1.0));
    out.push_back(row("storage_once_r" + n(r), storage, RowSense::Equal, 1.0));
    out.push_back(row("rate_once_r" + n(r), rate, RowSense::Equal, 1.0));
  }
  return out;
}

Constraint build_quality_constraint(const Instance& inst, const VariableIndex& idx, double q_bound) {
  std::vector<Term> terms;
  for (int r = 0; r < inst.request_count(); ++r) {
    const double targets = inst.requests[r].target_count();
    for (int g = 0; g < inst.rates.size(); ++g) terms.push_back({idx.e[r][g], targets * inst.rates.ssim[g]});
  }
  return row("quality", terms, RowSense::GreaterEqual, q_bound * normalization_bounds(inst).q_max);
}

std::vector<Constraint> build_strengthening_cuts(const Instance& inst, const VariableIndex& idx) {
  std::vector<Constraint> out;
  const int R = inst.request_count();
  const int J = inst.ec_count();
  std::vector<std::vector<Term>> holders(inst.aros.size());
  for (int r = 0; r < R; ++r) {
    const Request& q = inst.requests[r];
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
      for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
        holders[q.models[m].targets[t]].push_back({idx.h[r][m][t], 1.0});
      }
    }
  }
  for (std::size_t l = 0; l < holders.size(); ++l) {
    if (holders[l].empty()) continue;
    const int s = inst.aros[l].model;
    std::vector<Term> terms = holders[l];
    for (int v : idx.p[s]) terms.push_back({v, -1.0});
    out.push_back(row("cut_cached_under_model_s" + n(s) + "_l" + n(static_cast<int>(l)), terms,
                      RowSense::LessEqual, 0.0));
  }
  for (int r = 0; r < R; ++r) {
    const Request& q = inst.requests[r];
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
      const int s = q.models[m].model;
      std::vector<Term> frames;
      for (int v : idx.phi[r][m]) frames.push_back({v, 1.0});
      for (int j = 0; j < J; ++j) {
        std::vector<Term> terms = frames;
        terms.push_back({idx.p[s][j], -1.0});
        out.push_back(row("cut_frames_r" + n(r) + "_s" + n(s) + "_n" + n(inst.ecs[j].node), terms,
                          RowSense::GreaterEqual, 0.0));
      }
      for (int l : inst.models[s].aros) {
        if (holders[l].empty()) continue;
        std::vector<Term> terms = frames;
        for (const Term& h : holders[l]) terms.push_back({h.var, -1.0});
        out.push_back(row("cut_frames_r" + n(r) + "_s" + n(s) + "_l" + n(l), terms, RowSense::GreaterEqual, 0.0));
      }
    }
  }
  return out;
}

LinearExpression build_latency_objective(const Instance& inst, const VariableIndex& idx) {
  Accumulator acc(idx.count);
  LinearExpression out;
  const int J = inst.ec_count();
  const ModelParameters& prm = inst.params;
  for (int r = 0; r < inst.request_count(); ++r) {
    const Request& q = inst.requests[r];
    const double air = 1.0 + mobility_total(q);
    for (int g = 0; g < inst.rates.size(); ++g) {
      const double per_bit_ms = air * 1000.0 / inst.rates.rates_bps[g];
      acc.add(idx.e[r][g], per_bit_ms * q.foreground_bits);
      for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
        acc.add(idx.phi[r][m][g], per_bit_ms * region_result_bits(inst, r, m));
      }
    }
    for (int k = 0; k < static_cast<int>(idx.compute_nodes[r].size()); ++k) {
      const int node = idx.compute_nodes[r][k];
      acc.add(idx.x[r][k], compute_wired_ms(inst, r, node) + 1000.0 * compute_seconds(inst, r, node));
      for (int j = 0; j < J; ++j) acc.add(idx.xi[r][k][j], inst.wired_ms(node, inst.ecs[j].node));
    }
    for (int j = 0; j < J; ++j) {
      const double ms_per_bit = 1000.0 * prm.omega_back / inst.ecs[j].vm_cpu_hz;
      acc.add(idx.y[r][j], ms_per_bit * q.pointer_bits);
      acc.add(idx.psi[r][j], prm.penalty_ms);
      for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
        acc.add(idx.alpha[r][m][j], ms_per_bit * q.models[m].background_bits);
        for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
          acc.add(idx.lambda[r][m][t][j], ms_per_bit * aro_bits(inst, q.models[m].targets[t]));
        }
        acc.add(idx.p[q.models[m].model][j], model_wired_ms(inst, r, j));
      }
    }
    out.constant += fixed_wired_ms(inst, r);
  }
  out.terms = acc.terms();
  return out;
}

LinearExpression build_energy_objective(const Instance& inst, const VariableIndex& idx) {
  Accumulator acc(idx.count);
  LinearExpression out;
  const int J = inst.ec_count();
  for (int r = 0; r < inst.request_count(); ++r) {
    const Request& q = inst.requests[r];
    for (int g = 0; g < inst.rates.size(); ++g) acc.add(idx.e[r][g], transmission_joules(inst, r, g));
    for (int k = 0; k < static_cast<int>(idx.compute_nodes[r].size()); ++k) {
      acc.add(idx.x[r][k], compute_joules(inst, r, idx.compute_nodes[r][k]));
    }
    for (int j = 0; j < J; ++j) {
      const EcProfile& ec = inst.ecs[j];
      const double joules_per_bit = ec.chip_coefficient * ec.vm_cpu_hz * inst.params.omega_back;
      acc.add(idx.y[r][j], joules_per_bit * q.pointer_bits);
      for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
        acc.add(idx.alpha[r][m][j], joules_per_bit * q.models[m].background_bits);
        for (int t = 0; t < static_cast<int>(q.models[m].targets.size()); ++t) {
          acc.add(idx.lambda[r][m][t][j], joules_per_bit * aro_bits(inst, q.models[m].targets[t]));
        }
      }
    }
  }
  out.terms = acc.terms();
  return out;
}

NormalizationBounds normalization_bounds(const Instance& inst) {
  NormalizationBounds b;
  const double g_min = inst.rates.rates_bps.front();
  const double ssim_max = inst.rates.ssim.back();
  double wireless = 0, compute = 0, storage = 0, link = 0, penalty = 0, fixed = 0, models = 0;
  double e_tran = 0, e_compute = 0, e_storage = 0;
  for (int r = 0; r < inst.request_count(); ++r) {
    const Request& q = inst.requests[r];
    b.q_max += q.target_count() * ssim_max;

    double frames = q.foreground_bits;
    for (int m = 0; m < static_cast<int>(q.models.size()); ++m) frames += region_result_bits(inst, r, m);
    wireless += (1.0 + mobility_total(q)) * 1000.0 * frames / g_min;

    std::vector<int> hosts;
    for (const EcProfile& ec : inst.ecs) hosts.push_back(ec.node);
    hosts.push_back(q.terminal);
    double worst_compute = 0, worst_compute_j = 0, worst_link = 0;
    for (int node : hosts) {
      worst_compute = std::max(worst_compute, compute_wired_ms(inst, r, node) + 1000.0 * compute_seconds(inst, r, node));
      worst_compute_j = std::max(worst_compute_j, compute_joules(inst, r, node));
      for (const EcProfile& ec : inst.ecs) worst_link = std::max(worst_link, inst.wired_ms(node, ec.node));
    }
    compute += worst_compute;
    e_compute += worst_compute_j;
    link += worst_link;

    double worst_storage = 0, worst_storage_j = 0;
    for (int j = 0; j < inst.ec_count(); ++j) {
      const EcProfile& ec = inst.ecs[j];
      double bits = q.pointer_bits;
      for (const RequestModel& m : q.models) {
        bits += m.background_bits;
        for (int l : m.targets) bits += aro_bits(inst, l);
      }
      worst_storage = std::max(worst_storage, 1000.0 * inst.params.omega_back * bits / ec.vm_cpu_hz);
      worst_storage_j = std::max(worst_storage_j, ec.chip_coefficient * ec.vm_cpu_hz * inst.params.omega_back * bits);
      models += q.models.size() * model_wired_ms(inst, r, j);
    }
    storage += worst_storage;
    e_storage += worst_storage_j;
    penalty += inst.params.penalty_ms;
    fixed += fixed_wired_ms(inst, r);

    double worst_tran = 0;
    for (int g = 0; g < inst.rates.size(); ++g) worst_tran = std::max(worst_tran, transmission_joules(inst, r, g));
    e_tran += worst_tran;
  }
  b.l_max = wireless + compute + storage + link + penalty + fixed + models;
  b.e_max = e_tran + e_compute + e_storage;
  std::ostringstream d;
  d.precision(17);
  d << "l_wireless_ms=" << wireless << "\nl_compute_ms=" << compute << "\nl_storage_ms=" << storage
    << "\nl_compute_to_storage_ms=" << link << "\nl_penalty_ms=" << penalty << "\nl_region_access_ms=" << fixed
    << "\nl_model_region_ms=" << models << "\nl_max_ms=" << b.l_max << "\ne_transmission_j=" << e_tran
    << "\ne_compute_j=" << e_compute << "\ne_storage_j=" << e_storage << "\ne_max_j=" << b.e_max
    << "\nq_max=" << b.q_max << '\n';
  b.derivation = d.str();
  return b;
}

BuiltProgram build_program(const Instance& inst, const ProgramOptions& options) {
  if (!(options.mu >= 0.0 && options.mu <= 1.0)) throw std::invalid_argument("mu must lie in [0,1]");
  if (!(options.q_bound >= 0.0 && options.q_bound <= 1.0)) throw std::invalid_argument("q_bound must lie in [0,1]");
  BuiltProgram out;
  out.index = build_index(inst, options.mode);
  out.bounds = normalization_bounds(inst);
  out.latency = build_latency_objective(inst, out.index);
  out.energy = build_energy_objective(inst, out.index);

  LinearProgram& lp = out.lp;
  lp.variable_names = out.index.names;
  lp.auxiliary = out.index.auxiliary;
  auto append = [&](std::vector<Constraint> rows) {
    for (Constraint& c : rows) lp.constraints.push_back(std::move(c));
  };
  append(build_assignment_constraints(inst, out.index));
  append(build_caching_constraints(inst, out.index));
  append(build_cache_capacity_and_hit(inst, out.index));
  append(build_linearization_constraints(inst, out.index));
  lp.constraints.push_back(build_quality_constraint(inst, out.index, options.q_bound));
  if (options.strengthen) append(build_strengthening_cuts(inst, out.index));

  const double wl = options.mu / out.bounds.l_max;
  const double we = (1.0 - options.mu) / out.bounds.e_max;
  Accumulator acc(out.index.count);
  if (wl != 0.0) {
    for (const Term& t : out.latency.terms) acc.add(t.var, wl * t.coef);
  }
  if (we != 0.0) {
    for (const Term& t : out.energy.terms) acc.add(t.var, we * t.coef);
  }
  lp.objective = acc.terms();
  lp.objective_offset = wl * out.latency.constant + we * out.energy.constant;
  return out;
}

}  // namespace medge
