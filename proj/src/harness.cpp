#include "medge/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "json.hpp"

namespace medge {

using nlohmann::json;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::OptimT: return "OptimT";
    case Scheme::OptimNT: return "OptimNT";
    case Scheme::CEC: return "CEC";
    case Scheme::RandS: return "RandS";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  for (Scheme s : {Scheme::OptimT, Scheme::OptimNT, Scheme::CEC, Scheme::RandS}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme '" + name + "' (expected OptimT, OptimNT, CEC or RandS)");
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (seeds < 1) fail("seeds: must be at least 1");
  if (mu.empty()) fail("mu: sweep is empty");
  for (double m : mu) {
    if (!(m >= 0.0 && m <= 1.0)) fail("mu: values must lie in [0,1]");
  }
  if (schemes.empty()) fail("schemes: list is empty");
  for (int r : requests) {
    if (r < 1) fail("requests: counts must be positive");
  }
  if (foreground_scales.empty()) fail("foreground_scales: sweep is empty");
  if (background_scales.empty()) fail("background_scales: sweep is empty");
  for (double s : foreground_scales) {
    if (!(s > 0.0)) fail("foreground_scales: multipliers must be positive");
  }
  for (double s : background_scales) {
    if (!(s > 0.0)) fail("background_scales: multipliers must be positive");
  }
  if (!(q_bound >= 0.0 && q_bound <= 1.0)) fail("q_bound: must lie in [0,1]");
  if (!(solver.time_limit_s > 0.0)) fail("solver.time_limit_s: must be positive");
  if (solver.iteration_limit < 0) fail("solver.iteration_limit: must not be negative");
  if (solver.node_limit < 0) fail("solver.node_limit: must not be negative");
  if (!(solver.relative_gap >= 0.0)) fail("solver.relative_gap: must not be negative");
  if (baseline.redraws < 1) fail("baseline.redraws: must be at least 1");
  try {
    workload.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("workload.") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Config document

namespace {

/// Reads the keys of one JSON object and complains about any it did not use.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw std::invalid_argument(where("") + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    if (!obj_.contains(key)) return;
    used_.insert(key);
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument(where(key) + " has the wrong type");
    }
  }

  /// Calls `read` on a nested object when present.
  template <class F>
  void nested(const char* key, F&& read) {
    if (!obj_.contains(key)) return;
    used_.insert(key);
    ObjectReader inner(obj_.at(key), where(key));
    read(inner);
    inner.finish();
  }

  [[nodiscard]] const json* raw(const char* key) {
    if (!obj_.contains(key)) return nullptr;
    used_.insert(key);
    return &obj_.at(key);
  }

  [[nodiscard]] std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) throw std::invalid_argument("unknown key " + where(it.key()));
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

void read_topology(ObjectReader& in, TopologySpec& t) {
  in.get("site_count", t.site_count);
  in.get("branching", t.branching);
  in.get("edges", t.edges);
  in.get("active_sites", t.active_sites);
  in.get("per_hop_ms", t.per_hop_ms);
  in.get("region_roots", t.region_roots);
  in.get("region_server_hops", t.region_server_hops);
}

void read_workload(ObjectReader& in, WorkloadConfig& w) {
  in.nested("topology", [&](ObjectReader& t) { read_topology(t, w.topology); });
  in.get("requests", w.requests);
  in.get("model_count", w.model_count);
  in.get("models_per_request", w.models_per_request);
  in.get("aros_per_model", w.aros_per_model);
  in.get("min_targets_per_model", w.min_targets_per_model);
  in.get("max_targets_per_model", w.max_targets_per_model);
  in.get("max_aro_mb", w.max_aro_mb);
  in.get("min_background_mb", w.min_background_mb);
  in.get("max_background_mb", w.max_background_mb);
  in.get("frame_width", w.frame_width);
  in.get("frame_height", w.frame_height);
  in.get("bits_per_pixel", w.bits_per_pixel);
  in.get("foreground_scale", w.foreground_scale);
  in.get("background_scale", w.background_scale);
  in.get("result_factor", w.result_factor);
  in.get("pointer_bits", w.pointer_bits);
  in.get("vm_count", w.vm_count);
  in.get("min_ec_cpu_hz", w.min_ec_cpu_hz);
  in.get("max_ec_cpu_hz", w.max_ec_cpu_hz);
  in.get("vm_core_portion", w.vm_core_portion);
  in.get("min_ec_cache_mb", w.min_ec_cache_mb);
  in.get("max_ec_cache_mb", w.max_ec_cache_mb);
  in.get("terminal_cpu_hz", w.terminal_cpu_hz);
  in.get("min_terminal_portion", w.min_terminal_portion);
  in.get("max_terminal_portion", w.max_terminal_portion);
  in.get("max_terminal_cache_mb", w.max_terminal_cache_mb);
  in.get("mobility_total", w.mobility_total);
  in.get("cell_radius_m", w.cell_radius_m);
  in.get("min_user_distance_m", w.min_user_distance_m);
  in.get("bandwidth_hz", w.bandwidth_hz);
  in.get("noise_w", w.noise_w);
  in.get("path_loss_exponent", w.path_loss_exponent);
  in.get("bs_power_dbm", w.bs_power_dbm);
  in.get("interferer_spacing_m", w.interferer_spacing_m);
  in.nested("rates", [&](ObjectReader& r) {
    r.get("rates_bps", w.rates.rates_bps);
    r.get("ssim", w.rates.ssim);
  });
  in.nested("params", [&](ObjectReader& p) {
    p.get("omega_fore", w.params.omega_fore);
    p.get("omega_back", w.params.omega_back);
    p.get("penalty_ms", w.params.penalty_ms);
    p.get("chip_coefficient", w.params.chip_coefficient);
    p.get("content_bit_scale", w.params.content_bit_scale);
    p.get("shared_region_frames", w.params.shared_region_frames);
  });
}

json workload_json(const WorkloadConfig& w) {
  const TopologySpec& t = w.topology;
  return {
      {"topology",
       {{"site_count", t.site_count},
        {"branching", t.branching},
        {"edges", t.edges},
        {"active_sites", t.active_sites},
        {"per_hop_ms", t.per_hop_ms},
        {"region_roots", t.region_roots},
        {"region_server_hops", t.region_server_hops}}},
      {"requests", w.requests},
      {"model_count", w.model_count},
      {"models_per_request", w.models_per_request},
      {"aros_per_model", w.aros_per_model},
      {"min_targets_per_model", w.min_targets_per_model},
      {"max_targets_per_model", w.max_targets_per_model},
      {"max_aro_mb", w.max_aro_mb},
      {"min_background_mb", w.min_background_mb},
      {"max_background_mb", w.max_background_mb},
      {"frame_width", w.frame_width},
      {"frame_height", w.frame_height},
      {"bits_per_pixel", w.bits_per_pixel},
      {"foreground_scale", w.foreground_scale},
      {"background_scale", w.background_scale},
      {"result_factor", w.result_factor},
      {"pointer_bits", w.pointer_bits},
      {"vm_count", w.vm_count},
      {"min_ec_cpu_hz", w.min_ec_cpu_hz},
      {"max_ec_cpu_hz", w.max_ec_cpu_hz},
      {"vm_core_portion", w.vm_core_portion},
      {"min_ec_cache_mb", w.min_ec_cache_mb},
      {"max_ec_cache_mb", w.max_ec_cache_mb},
      {"terminal_cpu_hz", w.terminal_cpu_hz},
      {"min_terminal_portion", w.min_terminal_portion},
      {"max_terminal_portion", w.max_terminal_portion},
      {"max_terminal_cache_mb", w.max_terminal_cache_mb},
      {"mobility_total", w.mobility_total},
      {"cell_radius_m", w.cell_radius_m},
      {"min_user_distance_m", w.min_user_distance_m},
      {"bandwidth_hz", w.bandwidth_hz},
      {"noise_w", w.noise_w},
      {"path_loss_exponent", w.path_loss_exponent},
      {"bs_power_dbm", w.bs_power_dbm},
      {"interferer_spacing_m", w.interferer_spacing_m},
      {"rates", {{"rates_bps", w.rates.rates_bps}, {"ssim", w.rates.ssim}}},
      {"params",
       {{"omega_fore", w.params.omega_fore},
        {"omega_back", w.params.omega_back},
        {"penalty_ms", w.params.penalty_ms},
        {"chip_coefficient", w.params.chip_coefficient},
        {"content_bit_scale", w.params.content_bit_scale},
        {"shared_region_frames", w.params.shared_region_frames}}},
  };
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig cfg;
  ObjectReader in(doc, "");
  in.get("seed", cfg.seed);
  in.get("seeds", cfg.seeds);
  if (const json* m = in.raw("mu")) {
    if (m->is_number()) cfg.mu = {m->get<double>()};
    else in.get("mu", cfg.mu);
  }
  std::vector<std::string> schemes;
  in.get("schemes", schemes);
  if (in.raw("schemes")) {
    cfg.schemes.clear();
    for (const std::string& s : schemes) cfg.schemes.push_back(scheme_from_string(s));
  }
  if (const json* r = in.raw("requests")) {
    if (r->is_number_integer()) cfg.requests = {r->get<int>()};
    else in.get("requests", cfg.requests);
  }
  in.get("foreground_scales", cfg.foreground_scales);
  in.get("background_scales", cfg.background_scales);
  in.get("q_bound", cfg.q_bound);
  in.get("timing", cfg.timing);
  in.nested("solver", [&](ObjectReader& s) {
    s.get("time_limit_s", cfg.solver.time_limit_s);
    s.get("iteration_limit", cfg.solver.iteration_limit);
    s.get("node_limit", cfg.solver.node_limit);
    s.get("relative_gap", cfg.solver.relative_gap);
    s.get("heuristic_only", cfg.solver.heuristic_only);
  });
  in.nested("baseline", [&](ObjectReader& b) {
    b.get("max_rate", cfg.baseline.max_rate);
    b.get("redraws", cfg.baseline.redraws);
  });
  in.nested("workload", [&](ObjectReader& w) { read_workload(w, cfg.workload); });
  in.finish();
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ScenarioConfig& cfg) {
  std::vector<std::string> schemes;
  for (Scheme s : cfg.schemes) schemes.push_back(to_string(s));
  const json doc = {
      {"seed", cfg.seed},
      {"seeds", cfg.seeds},
      {"mu", cfg.mu},
      {"schemes", schemes},
      {"requests", cfg.requests},
      {"foreground_scales", cfg.foreground_scales},
      {"background_scales", cfg.background_scales},
      {"q_bound", cfg.q_bound},
      {"timing", cfg.timing},
      {"solver",
       {{"time_limit_s", cfg.solver.time_limit_s},
        {"iteration_limit", cfg.solver.iteration_limit},
        {"node_limit", cfg.solver.node_limit},
        {"relative_gap", cfg.solver.relative_gap},
        {"heuristic_only", cfg.solver.heuristic_only}}},
      {"baseline", {{"max_rate", cfg.baseline.max_rate}, {"redraws", cfg.baseline.redraws}}},
      {"workload", workload_json(cfg.workload)},
  };
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Runs

double utilization(int requests, int ec_count, int vm_count) {
  if (ec_count <= 0 || vm_count <= 0) throw std::invalid_argument("utilization needs ECs with VM slots");
  return 2.0 * requests / (static_cast<double>(ec_count) * vm_count);
}

std::vector<SweepPoint> sweep_points(const ScenarioConfig& cfg) {
  std::vector<int> counts = cfg.requests;
  if (counts.empty()) counts = {cfg.workload.requests};
  std::vector<SweepPoint> out;
  for (int r : counts) {
    for (double fg : cfg.foreground_scales) {
      for (double bg : cfg.background_scales) {
        for (int k = 0; k < cfg.seeds; ++k) out.push_back({r, fg, bg, cfg.seed + static_cast<std::uint64_t>(k)});
      }
    }
  }
  return out;
}

Instance instance_for(const ScenarioConfig& cfg, const SweepPoint& point) {
  WorkloadConfig w = cfg.workload;
  w.requests = point.requests;
  w.foreground_scale = point.foreground_scale;
  w.background_scale = point.background_scale;
  return generate_instance(w, point.seed);
}

namespace {

struct PoolEntry {
  Plan plan;
  bool ec_only = false;
  double latency = 0.0;
  double energy = 0.0;
};

struct Target {
  Mode mode;
  double mu;
  BuiltProgram program;
  Solution solution;
  bool searched = false;  // branch-and-bound ran
  double wall = 0.0;
  int chosen = -1;  // pool entry
};

bool ec_only(const Instance& inst, const Plan& plan) {
  return std::all_of(plan.compute_node.begin(), plan.compute_node.end(),
                     [&](int node) { return inst.ec_index(node) >= 0; });
}

std::mt19937_64 rand_s_rng(const SweepPoint& point, double mu) {
  auto micro = [](double v) { return static_cast<std::uint32_t>(std::llround(v * 1e6)); };
  std::seed_seq seq{static_cast<std::uint32_t>(point.seed), static_cast<std::uint32_t>(point.seed >> 32),
                    static_cast<std::uint32_t>(point.requests), micro(point.foreground_scale),
                    micro(point.background_scale), micro(mu)};
  return std::mt19937_64(seq);
}

}  // namespace

std::vector<SweepRow> run_scenario(const ScenarioConfig& cfg, const SweepPoint& point) {
  const Instance inst = instance_for(cfg, point);
  const NormalizationBounds bounds = normalization_bounds(inst);
  const double util = utilization(point.requests, inst.ec_count(), cfg.workload.vm_count);
  auto wants = [&](Scheme s) { return std::find(cfg.schemes.begin(), cfg.schemes.end(), s) != cfg.schemes.end(); };
  const bool baselines = wants(Scheme::CEC) || wants(Scheme::RandS);

  // The baselines borrow OptimNT's caching, so it runs whenever they do.
  std::vector<Mode> modes;
  if (wants(Scheme::OptimNT) || (baselines && !wants(Scheme::OptimT))) modes.push_back(Mode::OptimNT);
  if (wants(Scheme::OptimT)) modes.push_back(Mode::OptimT);
  const Mode paired_mode = wants(Scheme::OptimNT) || !wants(Scheme::OptimT) ? Mode::OptimNT : Mode::OptimT;

  std::vector<PoolEntry> pool;
  auto add = [&](const Plan& plan) {
    for (const PoolEntry& e : pool) {
      if (e.plan == plan) return;
    }
    pool.push_back({plan, ec_only(inst, plan), evaluate_latency(inst, plan).total(),
                    evaluate_energy(inst, plan).total()});
  };
  auto hints_for = [&](Mode mode) {
    std::vector<Plan> out;
    for (const PoolEntry& e : pool) {
      if (mode == Mode::OptimT || e.ec_only) out.push_back(e.plan);
    }
    return out;
  };

  std::vector<Target> targets;
  for (double mu : cfg.mu) {
    for (Mode mode : modes) {
      targets.push_back({mode, mu, build_program(inst, {mu, mode, cfg.q_bound}), {}, false, 0.0, -1});
    }
  }
  for (Target& t : targets) {
    OptimOptions opts;
    opts.mu = t.mu;
    opts.mode = t.mode;
    opts.q_bound = cfg.q_bound;
    opts.heuristic_only = cfg.solver.heuristic_only;
    opts.solver.time_limit_s = cfg.solver.time_limit_s;
    opts.solver.iteration_limit = cfg.solver.iteration_limit;
    opts.solver.node_limit = cfg.solver.node_limit;
    opts.solver.relative_gap = cfg.solver.relative_gap;
    const auto start = std::chrono::steady_clock::now();
    OptimResult r = solve_optim(inst, t.program, opts, hints_for(t.mode));
    t.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    t.searched = !cfg.solver.heuristic_only;
    t.solution = std::move(r.solution);
    if (r.plan) add(*r.plan);
  }

  // Every target takes the best plan of the shared pool, so a larger
  // feasible set never loses and the weight trade-off stays monotone. The
  // chosen plan is polished for its own target and the choice repeated
  // until nothing moves.
  auto value = [&](const PoolEntry& e, double mu) {
    return mu * e.latency / bounds.l_max + (1.0 - mu) * e.energy / bounds.e_max;
  };
  auto choose = [&](const Target& t) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
      const PoolEntry& e = pool[i];
      if (t.mode == Mode::OptimNT && !e.ec_only) continue;
      if (best < 0) {
        best = i;
        continue;
      }
      const PoolEntry& b = pool[best];
      const auto key = [&](const PoolEntry& p) { return std::make_tuple(value(p, t.mu), p.latency, p.energy); };
      if (key(e) < key(b)) best = i;
    }
    return best;
  };
  for (int round = 0; round < 50; ++round) {
    const std::size_t before = pool.size();
    for (Target& t : targets) {
      const int c = choose(t);
      if (c < 0) continue;
      const Planner planner(inst, t.program, cfg.q_bound);
      add(planner.improve(pool[c].plan));
      if (baselines && t.mode == paired_mode) {
        // A feasible closest-EC plan is a legitimate candidate too.
        const Plan near = cec(inst, pool[c].plan, cfg.baseline);
        if (planner.feasible(near)) add(planner.improve(near));
      }
    }
    if (pool.size() == before) break;
  }
  for (Target& t : targets) t.chosen = choose(t);

  std::vector<SweepRow> rows;
  auto base_row = [&](double mu, Scheme scheme) {
    SweepRow row;
    row.point = point;
    row.utilization = util;
    row.mu = mu;
    row.scheme = scheme;
    row.objective = kNaN;
    row.gap = kNaN;
    return row;
  };
  for (double mu : cfg.mu) {
    const Target* paired = nullptr;
    for (const Target& t : targets) {
      if (t.mu != mu) continue;
      const Scheme scheme = t.mode == Mode::OptimT ? Scheme::OptimT : Scheme::OptimNT;
      if (t.mode == paired_mode) paired = &t;
      if (!wants(scheme)) continue;
      SweepRow row = base_row(mu, scheme);
      row.wall_time_s = t.wall;
      if (t.chosen < 0) {
        row.status = "infeasible";
      } else {
        row.has_plan = true;
        row.plan = pool[t.chosen].plan;
        row.metrics = evaluate(inst, row.plan);
        row.objective = value(pool[t.chosen], mu);
        if (!t.searched) {
          row.status = "heuristic";
        } else {
          const bool proven = t.solution.status == SolveStatus::Optimal;
          row.status = proven ? "optimal" : "incumbent";
          const double bound = t.solution.best_bound;
          if (proven) row.gap = 0.0;
          else if (std::isfinite(bound)) row.gap = std::max(0.0, row.objective - bound) / std::max(std::abs(row.objective), 1e-12);
        }
      }
      rows.push_back(std::move(row));
    }
    const bool have_pair = paired != nullptr && paired->chosen >= 0;
    for (Scheme scheme : {Scheme::CEC, Scheme::RandS}) {
      if (!wants(scheme)) continue;
      SweepRow row = base_row(mu, scheme);
      if (!have_pair) {
        row.status = "infeasible";
        rows.push_back(std::move(row));
        continue;
      }
      const Plan& caching = pool[paired->chosen].plan;
      std::optional<Plan> plan;
      if (scheme == Scheme::CEC) {
        plan = cec(inst, caching, cfg.baseline);
      } else {
        std::mt19937_64 rng = rand_s_rng(point, mu);
        plan = rand_s(inst, caching, rng, cfg.baseline);
      }
      if (!plan) {
        row.status = "infeasible";
      } else {
        row.has_plan = true;
        row.plan = *plan;
        row.metrics = evaluate(inst, row.plan);
        row.objective = mu * row.metrics.latency_ms / bounds.l_max + (1.0 - mu) * row.metrics.energy_j / bounds.e_max;
        row.status = row.metrics.overloaded > 0 ? "overloaded" : "feasible";
      }
      rows.push_back(std::move(row));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.mu, a.scheme) < std::tie(b.mu, b.scheme);
  });
  return rows;
}

SweepOutcome run_sweep(const ScenarioConfig& cfg, int parallel) {
  cfg.validate();
  const std::vector<SweepPoint> points = sweep_points(cfg);
  std::vector<std::vector<SweepRow>> results(points.size());
  std::vector<std::string> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = run_scenario(cfg, points[i]);
      } catch (const std::exception& e) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "requests=%d fg=%g bg=%g seed=%llu: ", points[i].requests,
                      points[i].foreground_scale, points[i].background_scale,
                      static_cast<unsigned long long>(points[i].seed));
        errors[i] = buf + std::string(e.what());
      }
    }
  };
  const int threads = std::clamp(parallel, 1, static_cast<int>(std::max<std::size_t>(points.size(), 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  SweepOutcome out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (SweepRow& r : results[i]) out.rows.push_back(std::move(r));
    if (!errors[i].empty()) out.failures.push_back(errors[i]);
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.point, a.mu, a.scheme) < std::tie(b.point, b.mu, b.scheme);
  });
  return out;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool timing) {
  out << "requests,utilization,foreground_scale,background_scale,mu,seed,scheme,delay_ms,energy_j,quality_norm,"
         "objective,status,gap,cache_hits,overloaded,high_power_links,wireless_ms,wired_ms,processing_ms,penalty_ms,mobility_ms";
  if (timing) out << ",wall_time_s";
  out << '\n';
  for (const SweepRow& r : rows) {
    const double n = r.point.requests;
    const MetricBreakdown& m = r.metrics;
    const auto metric = [&](double v) { return r.has_plan ? num(v / n) : std::string("nan"); };
    out << r.point.requests << ',' << num(r.utilization) << ',' << num(r.point.foreground_scale) << ','
        << num(r.point.background_scale) << ',' << num(r.mu) << ',' << r.point.seed << ',' << to_string(r.scheme)
        << ',' << metric(m.latency_ms) << ',' << metric(m.energy_j) << ','
        << (r.has_plan ? num(m.quality_norm) : "nan") << ',' << num(r.objective) << ',' << r.status << ','
        << num(r.gap) << ',' << (r.has_plan ? m.cache_hits : 0) << ',' << (r.has_plan ? m.overloaded : 0) << ','
        << (r.has_plan ? m.high_power_links : 0) << ','
        << metric(m.wireless_ms) << ',' << metric(m.wired_ms) << ',' << metric(m.processing_ms) << ','
        << metric(m.penalty_ms) << ',' << metric(m.mobility_ms);
    if (timing) out << ',' << num(r.wall_time_s);
    out << '\n';
  }
}

std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows) {
  using Key = std::tuple<int, double, double, double, Scheme>;
  struct Acc {
    SummaryRow row;
    std::vector<double> delay, energy, objective;
  };
  std::map<Key, Acc> groups;
  for (const SweepRow& r : rows) {
    const Key key{r.point.requests, r.point.foreground_scale, r.point.background_scale, r.mu, r.scheme};
    Acc& acc = groups[key];
    acc.row.requests = r.point.requests;
    acc.row.utilization = r.utilization;
    acc.row.foreground_scale = r.point.foreground_scale;
    acc.row.background_scale = r.point.background_scale;
    acc.row.mu = r.mu;
    acc.row.scheme = r.scheme;
    if (!r.has_plan) continue;
    const double n = r.point.requests;
    acc.delay.push_back(r.metrics.latency_ms / n);
    acc.energy.push_back(r.metrics.energy_j / n);
    acc.objective.push_back(r.objective);
    acc.row.quality_min = acc.delay.size() == 1 ? r.metrics.quality_norm : std::min(acc.row.quality_min, r.metrics.quality_norm);
    acc.row.overloaded += r.metrics.overloaded > 0 ? 1 : 0;
  }
  auto mean_se = [](const std::vector<double>& v) {
    if (v.empty()) return std::pair{kNaN, kNaN};
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / v.size();
    if (v.size() < 2) return std::pair{mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / (v.size() - 1) / v.size())};
  };
  std::vector<SummaryRow> out;
  for (auto& [key, acc] : groups) {
    acc.row.samples = static_cast<int>(acc.delay.size());
    std::tie(acc.row.delay_mean, acc.row.delay_se) = mean_se(acc.delay);
    std::tie(acc.row.energy_mean, acc.row.energy_se) = mean_se(acc.energy);
    acc.row.objective_mean = mean_se(acc.objective).first;
    if (acc.delay.empty()) acc.row.quality_min = kNaN;
    out.push_back(acc.row);
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "requests,utilization,foreground_scale,background_scale,mu,scheme,samples,delay_ms,delay_se,energy_j,"
         "energy_se,objective,quality_min,overloaded_runs\n";
  for (const SummaryRow& r : rows) {
    out << r.requests << ',' << num(r.utilization) << ',' << num(r.foreground_scale) << ','
        << num(r.background_scale) << ',' << num(r.mu) << ',' << to_string(r.scheme) << ',' << r.samples << ','
        << num(r.delay_mean) << ',' << num(r.delay_se) << ',' << num(r.energy_mean) << ',' << num(r.energy_se)
        << ',' << num(r.objective_mean) << ',' << num(r.quality_min) << ',' << r.overloaded << '\n';
  }
}

}  // namespace medge
