// Acceptance run: one PASS/FAIL line per criterion, with the numbers behind it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "medge/harness.hpp"
#include "medge/solver.hpp"
#include "support.hpp"

namespace {

using namespace medge;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

struct Stat {
  std::vector<double> values;

  [[nodiscard]] double mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return values.empty() ? std::nan("") : s / static_cast<double>(values.size());
  }
  [[nodiscard]] double se() const {
    if (values.size() < 2) return 0.0;
    const double m = mean();
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
};

// Per-request delay and energy grouped by (sweep value, mu, scheme).
struct Table {
  std::map<std::tuple<double, double, Scheme>, Stat> delay, energy, objective;
  std::map<std::tuple<double, double, Scheme>, int> overloaded;

  void add(double x, const SweepRow& row) {
    if (!row.has_plan) return;
    const auto key = std::make_tuple(x, row.mu, row.scheme);
    delay[key].values.push_back(row.metrics.latency_ms / row.point.requests);
    energy[key].values.push_back(row.metrics.energy_j / row.point.requests);
    objective[key].values.push_back(row.objective);
    overloaded[key] += row.metrics.overloaded > 0;
  }
  double d(double x, double mu, Scheme s) const { return delay.at({x, mu, s}).mean(); }
  double e(double x, double mu, Scheme s) const { return energy.at({x, mu, s}).mean(); }
};

struct Context {
  int seeds = 20;
  int parallel = 1;
  double desk_seconds = 300.0;
  // Every Optim row produced by the sweeps, for the quality check.
  std::vector<SweepRow> optim_rows;
  std::vector<Instance> optim_instances;
  std::map<std::string, std::vector<SweepRow>> cache;
};

ScenarioConfig sweep_config(const Context& ctx) {
  ScenarioConfig cfg;
  cfg.seeds = ctx.seeds;
  cfg.solver.heuristic_only = true;
  return cfg;
}

const std::vector<SweepRow>& run(Context& ctx, const std::string& name, const ScenarioConfig& cfg) {
  auto it = ctx.cache.find(name);
  if (it != ctx.cache.end()) return it->second;
  const auto start = std::chrono::steady_clock::now();
  SweepOutcome out = run_sweep(cfg, ctx.parallel);
  for (const std::string& f : out.failures) std::printf("  sweep %s failed: %s\n", name.c_str(), f.c_str());
  std::printf("  [%s: %zu rows in %.0f s]\n", name.c_str(), out.rows.size(),
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  std::fflush(stdout);
  for (const SweepRow& r : out.rows) {
    if (r.has_plan && (r.scheme == Scheme::OptimT || r.scheme == Scheme::OptimNT)) {
      ctx.optim_rows.push_back(r);
      ctx.optim_instances.push_back(instance_for(cfg, r.point));
    }
  }
  return ctx.cache.emplace(name, std::move(out.rows)).first->second;
}

// Tiny instances for the exact criteria: the seeds whose programs are feasible.
std::vector<std::uint64_t> tiny_seeds(int wanted) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t seed = 1; static_cast<int>(out.size()) < wanted && seed < 1000; ++seed) {
    const Instance inst = generate_instance(testing::tiny_config(seed), seed);
    const BuiltProgram p = build_program(inst, {0.5, Mode::OptimNT, 0.0, true});
    if (enumerate_optimal(p.lp).status == SolveStatus::Optimal) out.push_back(seed);
  }
  return out;
}

double q_bound_for(std::uint64_t seed) { return 0.9 + 0.01 * static_cast<double>(seed % 10); }

Verdict oracle_equivalence(Context&) {
  int instances = 0, programs = 0, agree = 0, evaluator_ok = 0, feasible = 0;
  double worst = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed : tiny_seeds(60)) {
    const Instance inst = generate_instance(testing::tiny_config(seed), seed);
    ++instances;
    for (Mode mode : {Mode::OptimT, Mode::OptimNT}) {
      const double mu = 0.25 * static_cast<double>(seed % 5);
      const BuiltProgram p = build_program(inst, {mu, mode, q_bound_for(seed), true});
      const Solution oracle = enumerate_optimal(p.lp);
      const Solution bnb = solve(p.lp);
      ++programs;
      if (oracle.status != bnb.status) continue;
      if (oracle.status != SolveStatus::Optimal) {
        ++agree;
        ++evaluator_ok;
        continue;
      }
      ++feasible;
      if (close_rel(bnb.objective_value, oracle.objective_value, 1e-9)) ++agree;
      const double direct = scalarized_objective(inst, extract_plan(inst, p.index, bnb.assignment), mu);
      const double rel = std::abs(direct - bnb.objective_value) / std::max(1e-300, std::abs(bnb.objective_value));
      worst = std::max(worst, rel);
      if (rel <= 1e-9) ++evaluator_ok;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {instances >= 50 && agree == programs && evaluator_ok == programs && secs < 60.0,
          fmt("%d instances, %d programs (%d feasible): B&B = enumeration on %d, evaluator within 1e-9 on %d "
              "(worst %.1e), %.1f s",
              instances, programs, feasible, agree, evaluator_ok, worst, secs)};
}

// Calls visit(inst, program, assignment) on every feasible point of every tiny program.
long for_each_tiny_point(const std::function<void(const Instance&, const BuiltProgram&, const Assignment&)>& visit) {
  long points = 0;
  for (std::uint64_t seed : tiny_seeds(60)) {
    const Instance inst = generate_instance(testing::tiny_config(seed), seed);
    for (Mode mode : {Mode::OptimT, Mode::OptimNT}) {
      const BuiltProgram p = build_program(inst, {0.5, mode, 0.0, true});
      points += for_each_feasible(p.lp, [&](const Assignment& a) { visit(inst, p, a); });
    }
  }
  return points;
}

Verdict linearization(Context&) {
  std::map<std::string, long> wrong;
  long checked = 0;
  const long points = for_each_tiny_point([&](const Instance& inst, const BuiltProgram& p, const Assignment& a) {
    const VariableIndex& ix = p.index;
    auto expect = [&](const char* name, int var, bool value) {
      ++checked;
      if ((a[var] != 0) != value) ++wrong[name];
    };
    for (int r = 0; r < inst.request_count(); ++r) {
      const Request& q = inst.requests[r];
      for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
        const int s = q.models[m].model;
        bool anywhere = false;
        for (int j = 0; j < inst.ec_count(); ++j) anywhere = anywhere || a[ix.p[s][j]];
        for (int j = 0; j < inst.ec_count(); ++j) {
          expect("alpha", ix.alpha[r][m][j], a[ix.p[s][j]] && a[ix.y[r][j]]);
          for (std::size_t t = 0; t < q.models[m].targets.size(); ++t) {
            const bool beta = a[ix.p[s][j]] && a[ix.h[r][m][t]];
            expect("beta", ix.beta[r][m][t][j], beta);
            expect("lambda", ix.lambda[r][m][t][j], a[ix.p[s][j]] && a[ix.y[r][j]] && beta);
          }
        }
        for (int g = 0; g < inst.rates.size(); ++g) expect("phi", ix.phi[r][m][g], a[ix.e[r][g]] && anywhere);
      }
      for (int j = 0; j < inst.ec_count(); ++j) {
        expect("psi", ix.psi[r][j], a[ix.q[r][j]] && a[ix.y[r][j]]);
        for (std::size_t k = 0; k < ix.compute_nodes[r].size(); ++k) {
          expect("xi", ix.xi[r][k][j], a[ix.x[r][k]] && a[ix.y[r][j]]);
        }
      }
    }
  });
  long bad = 0;
  std::string which;
  for (const auto& [name, n] : wrong) {
    bad += n;
    which += fmt(" %s=%ld", name.c_str(), n);
  }
  return {points > 0 && bad == 0,
          fmt("%ld feasible points, %ld product values checked, %ld wrong%s", points, checked, bad, which.c_str())};
}

Verdict big_m(Context&) {
  long checked = 0, wrong = 0, hits = 0;
  const long points = for_each_tiny_point([&](const Instance& inst, const BuiltProgram& p, const Assignment& a) {
    const VariableIndex& ix = p.index;
    for (int r = 0; r < inst.request_count(); ++r) {
      const Request& q = inst.requests[r];
      for (int j = 0; j < inst.ec_count(); ++j) {
        // Hit iff some required model sits at j with every target ARO cached there.
        bool hit = false;
        for (int m = 0; m < static_cast<int>(q.models.size()); ++m) {
          bool all = a[ix.p[q.models[m].model][j]] != 0;
          for (std::size_t t = 0; t < q.models[m].targets.size(); ++t) all = all && a[ix.h[r][m][t]];
          hit = hit || all;
          ++checked;
          if ((a[ix.hit[r][m][j]] != 0) != all) ++wrong;
        }
        checked += 2;
        if ((a[ix.z[r][j]] != 0) != hit) ++wrong;
        if ((a[ix.q[r][j]] != 0) == hit) ++wrong;
        hits += hit;
      }
    }
  });
  return {points > 0 && wrong == 0 && hits > 0,
          fmt("%ld feasible points, %ld indicators checked (%ld hits), %ld wrong", points, checked, hits, wrong)};
}

Verdict weight_trend(Context& ctx) {
  const ScenarioConfig cfg = sweep_config(ctx);
  Table tab;
  for (const SweepRow& r : run(ctx, "weights", cfg)) tab.add(0.0, r);
  const std::vector<double>& mus = cfg.mu;
  bool monotone = true;
  std::string curve;
  for (std::size_t i = 0; i < mus.size(); ++i) {
    const double d = tab.d(0, mus[i], Scheme::OptimT), e = tab.e(0, mus[i], Scheme::OptimT);
    curve += fmt(" mu=%.2f:%.2fms/%.4fJ", mus[i], d, e);
    if (i > 0) {
      monotone = monotone && d <= tab.d(0, mus[i - 1], Scheme::OptimT) + 1e-12;
      monotone = monotone && e >= tab.e(0, mus[i - 1], Scheme::OptimT) - 1e-15;
    }
  }
  // Endpoint drops measured against one standard error of the paired differences.
  Stat dd, de;
  const auto& d0 = tab.delay.at({0.0, 0.0, Scheme::OptimT}).values;
  const auto& d1 = tab.delay.at({0.0, 1.0, Scheme::OptimT}).values;
  const auto& e0 = tab.energy.at({0.0, 0.0, Scheme::OptimT}).values;
  const auto& e1 = tab.energy.at({0.0, 1.0, Scheme::OptimT}).values;
  for (std::size_t i = 0; i < d0.size() && i < d1.size(); ++i) dd.values.push_back(d0[i] - d1[i]);
  for (std::size_t i = 0; i < e0.size() && i < e1.size(); ++i) de.values.push_back(e1[i] - e0[i]);
  const bool strict = dd.mean() > dd.se() && de.mean() > de.se();

  bool delay_sign = true, energy_sign = true;
  std::string signs;
  for (double mu : mus) {
    if (mu < 0.5) continue;
    const double dt = tab.d(0, mu, Scheme::OptimT), dn = tab.d(0, mu, Scheme::OptimNT);
    const double et = tab.e(0, mu, Scheme::OptimT), en = tab.e(0, mu, Scheme::OptimNT);
    delay_sign = delay_sign && dt <= dn + 1e-12;
    energy_sign = energy_sign && et >= en - 1e-15;
    signs += fmt(" mu=%.2f: T/NT delay %+.1f%% energy %+.1f%%", mu, 100 * (dt / dn - 1), 100 * (et / en - 1));
  }
  return {monotone && strict && delay_sign && energy_sign,
          fmt("OptimT%s; monotone=%s, endpoint drops %.2f ms (se %.2f) and %.4f J (se %.4f); "
              "T<=NT delay=%s, T>=NT energy=%s;%s",
              curve.c_str(), monotone ? "yes" : "no", dd.mean(), dd.se(), de.mean(), de.se(),
              delay_sign ? "yes" : "no", energy_sign ? "yes" : "no", signs.c_str())};
}

Verdict mode_dominance(Context& ctx) {
  const ScenarioConfig cfg = sweep_config(ctx);
  const std::vector<SweepRow>& rows = run(ctx, "weights", cfg);
  std::map<std::pair<SweepPoint, double>, std::pair<double, double>> objective;
  for (const SweepRow& r : rows) {
    if (!r.has_plan) continue;
    if (r.scheme == Scheme::OptimT) objective[{r.point, r.mu}].first = r.objective;
    if (r.scheme == Scheme::OptimNT) objective[{r.point, r.mu}].second = r.objective;
  }
  int pairs = 0, violations = 0;
  double t0 = 0.0, nt0 = 0.0;
  for (const auto& [key, v] : objective) {
    ++pairs;
    if (v.first > v.second + 1e-12) ++violations;
    if (key.second == 0.0) {
      t0 += v.first;
      nt0 += v.second;
    }
  }
  const double spread = std::abs(t0 - nt0) / nt0;
  return {pairs == ctx.seeds * static_cast<int>(cfg.mu.size()) && violations == 0 && spread <= 0.01,
          fmt("%d (seed, mu) pairs, %d with OptimT above OptimNT; mean objectives at mu=0 differ by %.3f%%", pairs,
              violations, 100 * spread)};
}

Verdict no_mobility(Context& ctx) {
  ScenarioConfig cfg = sweep_config(ctx);
  cfg.mu = {1.0};
  cfg.workload.mobility_total = 0.0;
  Table tab;
  for (const SweepRow& r : run(ctx, "no-mobility", cfg)) tab.add(0.0, r);
  const double t = tab.d(0, 1, Scheme::OptimT), nt = tab.d(0, 1, Scheme::OptimNT);
  const double c = tab.d(0, 1, Scheme::CEC), rs = tab.d(0, 1, Scheme::RandS);
  const bool order = t <= nt && nt <= c && c <= rs;
  const bool margin = rs >= 1.2 * c;
  return {order && margin, fmt("mean delay %.1f / %.1f / %.1f / %.1f ms (OptimT/OptimNT/CEC/RandS); order=%s, "
                               "RandS/CEC=%.3f (needs >= 1.200); CEC overloaded on %d of %d seeds",
                               t, nt, c, rs, order ? "yes" : "no", rs / c, tab.overloaded.at({0.0, 1.0, Scheme::CEC}),
                               ctx.seeds)};
}

Verdict load_trends(Context& ctx) {
  ScenarioConfig fg = sweep_config(ctx);
  fg.mu = {0.5};
  fg.foreground_scales = {0.5, 1.0, 2.0, 4.0, 8.0};
  Table ft;
  for (const SweepRow& r : run(ctx, "foreground", fg)) ft.add(r.point.foreground_scale, r);
  bool pointwise = true;
  std::string cec_curve;
  for (double x : fg.foreground_scales) {
    const double t = ft.d(x, 0.5, Scheme::OptimT), nt = ft.d(x, 0.5, Scheme::OptimNT), c = ft.d(x, 0.5, Scheme::CEC);
    pointwise = pointwise && t <= nt && nt <= c;
    cec_curve += fmt(" %.1f:%.1f/%.1f/%.1f", x, t, nt, c);
  }
  // Superlinear: the slope per unit of size over the last step beats the first step by 10%.
  const auto& xs = fg.foreground_scales;
  const double first = (ft.d(xs[1], 0.5, Scheme::CEC) - ft.d(xs[0], 0.5, Scheme::CEC)) / (xs[1] - xs[0]);
  const double last = (ft.d(xs[4], 0.5, Scheme::CEC) - ft.d(xs[3], 0.5, Scheme::CEC)) / (xs[4] - xs[3]);
  const bool superlinear = last > 1.1 * first;

  ScenarioConfig ut = sweep_config(ctx);
  ut.mu = {0.5};
  ut.requests = {30, 32, 34, 36, 38, 40};
  Table utab;
  for (const SweepRow& r : run(ctx, "utilization", ut)) utab.add(r.point.requests, r);
  bool rising = true;
  std::string broken;
  for (Scheme s : {Scheme::OptimT, Scheme::OptimNT, Scheme::CEC, Scheme::RandS}) {
    for (std::size_t i = 1; i < ut.requests.size(); ++i) {
      const double a = ut.requests[i - 1], b = ut.requests[i];
      const bool d_ok = utab.d(b, 0.5, s) >= utab.d(a, 0.5, s);
      const bool e_ok = utab.e(b, 0.5, s) >= utab.e(a, 0.5, s);
      if (!d_ok) broken += fmt(" %s delay %g->%g", to_string(s).c_str(), a, b);
      if (!e_ok) broken += fmt(" %s energy %g->%g", to_string(s).c_str(), a, b);
      rising = rising && d_ok && e_ok;
    }
  }
  return {pointwise && superlinear && rising,
          fmt("foreground sweep T/NT/CEC ms:%s; pointwise order=%s; CEC slope first %.2f last %.2f ms per unit "
              "(superlinear=%s); utilization sweep non-decreasing=%s%s",
              cec_curve.c_str(), pointwise ? "yes" : "no", first, last, superlinear ? "yes" : "no",
              rising ? "yes" : "no", broken.empty() ? "" : (" (breaks:" + broken + ")").c_str())};
}

Verdict quality_floor(Context& ctx) {
  if (ctx.optim_rows.empty()) run(ctx, "weights", sweep_config(ctx));
  int rows = 0, below = 0, infeasible = 0;
  double worst = 1.0;
  for (std::size_t i = 0; i < ctx.optim_rows.size(); ++i) {
    const SweepRow& r = ctx.optim_rows[i];
    ++rows;
    worst = std::min(worst, r.metrics.quality_norm);
    if (r.metrics.quality_norm < 0.97 - 1e-12) ++below;
    if (!check_feasibility(ctx.optim_instances[i], r.plan, 0.97, r.scheme == Scheme::OptimT).empty()) ++infeasible;
  }
  return {rows > 0 && below == 0 && infeasible == 0,
          fmt("%d Optim plans from the sweeps, lowest Q/Qmax %.5f, %d below 0.97, %d infeasible", rows, worst,
              below, infeasible)};
}

Verdict determinism(Context& ctx) {
  ScenarioConfig cfg = sweep_config(ctx);
  cfg.seeds = 2;
  cfg.requests = {10, 20};
  cfg.mu = {0.0, 1.0};
  auto csv = [&](int parallel) {
    std::ostringstream out;
    write_csv(out, run_sweep(cfg, parallel).rows);
    return out.str();
  };
  const std::string a = csv(1), b = csv(1), c = csv(3);
  // A branch-and-bound run bounded by iterations rather than time.
  ScenarioConfig exact = cfg;
  exact.requests = {6};
  exact.seeds = 1;
  exact.solver.heuristic_only = false;
  exact.solver.iteration_limit = 2000;
  exact.solver.time_limit_s = 1e6;
  auto exact_csv = [&] {
    std::ostringstream out;
    write_csv(out, run_sweep(exact, 1).rows);
    return out.str();
  };
  const std::string x = exact_csv(), y = exact_csv();
  return {a == b && a == c && x == y,
          fmt("heuristic sweep %zu bytes: repeat identical=%s, 3 threads identical=%s; iteration-bounded "
              "branch-and-bound sweep identical=%s",
              a.size(), a == b ? "yes" : "no", a == c ? "yes" : "no", x == y ? "yes" : "no")};
}

Verdict desk_scale(Context& ctx) {
  ScenarioConfig cfg;
  cfg.seeds = 1;
  cfg.schemes = {Scheme::OptimT, Scheme::OptimNT};
  cfg.solver.time_limit_s = ctx.desk_seconds;
  const std::vector<SweepRow> rows = run_sweep(cfg, 1).rows;
  int closed = 0, reported = 0;
  double worst_gap = 0.0, worst_wall = 0.0;
  std::string detail;
  for (const SweepRow& r : rows) {
    const bool ok = r.status == "optimal" || (std::isfinite(r.gap) && r.gap <= 0.01);
    closed += ok;
    reported += r.has_plan && (ok || r.status == "incumbent");
    if (std::isfinite(r.gap)) worst_gap = std::max(worst_gap, r.gap);
    worst_wall = std::max(worst_wall, r.wall_time_s);
    detail += fmt(" %s/mu=%.2f:%s gap=%.1f%% %.0fs", to_string(r.scheme).c_str(), r.mu, r.status.c_str(),
                  100 * r.gap, r.wall_time_s);
  }
  const int n = static_cast<int>(rows.size());
  // The clause's fallback: a timed-out point still counts when its incumbent is reported.
  const bool within = worst_wall <= ctx.desk_seconds * 1.05 + 30.0;
  const bool pass = n == 10 && reported == n && within;
  return {pass, fmt("%d of %d points optimal or within 1%% gap, %d incumbents reported, time limit %.0f s, slowest "
                    "%.0f s, widest gap %.1f%%%s;%s",
                    closed, n, reported, ctx.desk_seconds, worst_wall, 100 * worst_gap,
                    closed == n ? "" : " (fallback: criteria 4-7 use incumbents)", detail.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Context ctx;
  bool report_only = false;
  std::vector<int> only;
  ctx.parallel = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--seeds", ctx.seeds, "Seeds for the sweep criteria")->check(CLI::PositiveNumber);
  app.add_option("--parallel", ctx.parallel, "Points solved concurrently")->check(CLI::PositiveNumber);
  app.add_option("--desk-seconds", ctx.desk_seconds, "Branch-and-bound limit per point for the desk-scale run");
  app.add_option("--only", only, "Criteria to run (default: all)");
  app.add_flag("--report-only", report_only, "Exit 0 even when a criterion fails");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, Verdict (*)(Context&)>> criteria = {
      {"oracle equivalence", oracle_equivalence}, {"linearization truth tables", linearization},
      {"big-M cache hits", big_m},                {"weight trend", weight_trend},
      {"mode dominance", mode_dominance},         {"no-mobility ordering", no_mobility},
      {"load trends", load_trends},               {"quality floor", quality_floor},
      {"determinism", determinism},               {"desk scale", desk_scale},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %2d %-28s %s  %s\n", id, criteria[i].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return report_only || failed == 0 ? 0 : 1;
}
