#include "medge/workload.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace medge {

using nlohmann::json;

double foreground_bits(double width, double height, double bits_per_pixel) {
  return width * height * bits_per_pixel * (5.0 / 9.0) * 1e-3;
}

int Request::target_count() const {
  int n = 0;
  for (const RequestModel& m : models) n += static_cast<int>(m.targets.size());
  return n;
}

int Instance::ec_index(int node) const {
  for (int k = 0; k < ec_count(); ++k) {
    if (ecs[k].node == node) return k;
  }
  return -1;
}

double Instance::wired_ms(int a, int b) const {
  const auto place = [&](int v) {
    return topology.role(v) == NodeRole::Terminal ? topology.access_site(v) : v;
  };
  return topology.hop_delay(place(a), place(b));
}

int Instance::region_server_of(int node) const {
  return topology.region_server(topology.region_of(node));
}

bool Instance::operator==(const Instance& other) const {
  return topology_spec == other.topology_spec && ecs == other.ecs && models == other.models &&
         aros == other.aros && requests == other.requests && rates == other.rates &&
         params == other.params;
}

namespace {

[[noreturn]] void reject(const std::string& what) { throw std::invalid_argument(what); }

}  // namespace

void Instance::finalize() {
  std::vector<int> origins;
  origins.reserve(requests.size());
  for (const Request& r : requests) origins.push_back(r.origin);
  topology = build_topology(topology_spec, origins);
  for (std::size_t r = 0; r < requests.size(); ++r) requests[r].terminal = topology.terminals()[r];

  rates.validate();
  if (requests.empty()) reject("instance has no requests");
  if (ecs.size() != topology.active_ecs().size()) reject("one EC profile per active EC is required");
  for (std::size_t k = 0; k < ecs.size(); ++k) {
    const EcProfile& ec = ecs[k];
    if (ec.node != topology.active_ecs()[k]) reject("EC profiles out of order");
    if (ec.vm_count < 0) reject("negative VM count");
    if (!(ec.cpu_hz > 0.0) || !(ec.vm_cpu_hz > 0.0)) reject("EC CPU frequency must be positive");
    if (ec.cache_bytes < 0.0) reject("negative EC cache");
    if (!(ec.chip_coefficient > 0.0)) reject("chip coefficient must be positive");
  }
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (models[m].id != static_cast<int>(m)) reject("model ids must be dense");
    if (!(models[m].background_bits > 0.0)) reject("background size must be positive");
    for (int l : models[m].aros) {
      if (l < 0 || l >= static_cast<int>(aros.size()) || aros[l].model != models[m].id) {
        reject("model lists a foreign ARO");
      }
    }
  }
  for (std::size_t l = 0; l < aros.size(); ++l) {
    if (aros[l].id != static_cast<int>(l)) reject("ARO ids must be dense");
    if (!(aros[l].size_bytes > 0.0) || aros[l].size_bytes > 10e6) reject("ARO size outside (0,10] MB");
  }
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const Request& q = requests[r];
    if (q.id != static_cast<int>(r)) reject("request ids must be dense");
    if (!(q.foreground_bits > 0.0) || q.pointer_bits < 0.0) reject("bad request sizes");
    if (q.models.empty() || q.models.size() > 4) reject("a request needs 1..4 models");
    if (q.terminal_portion < 0.30 - 1e-12 || q.terminal_portion > 0.50 + 1e-12) {
      reject("terminal portion outside [0.30, 0.50]");
    }
    if (!(q.terminal_cpu_hz > 0.0)) reject("terminal CPU frequency must be positive");
    if (q.mobility.origin != q.origin) reject("mobility origin differs from request origin");
    double total = 0.0;
    const std::vector<int> adjacent = topology.neighbor_sites(q.origin);
    for (const auto& [k, u] : q.mobility.destinations) {
      if (u < 0.0 || u > 1.0) reject("mobility probability outside [0,1]");
      if (std::find(adjacent.begin(), adjacent.end(), k) == adjacent.end()) {
        reject("mobility destination is not adjacent to the origin");
      }
      total += u;
    }
    if (total > 1.0 + 1e-12) reject("mobility probabilities sum above 1");
    std::vector<int> seen;
    for (const RequestModel& m : q.models) {
      if (m.model < 0 || m.model >= static_cast<int>(models.size())) reject("unknown model");
      if (std::find(seen.begin(), seen.end(), m.model) != seen.end()) reject("duplicate model in request");
      seen.push_back(m.model);
      if (m.targets.empty()) reject("model without target AROs");
      for (int l : m.targets) {
        if (l < 0 || l >= static_cast<int>(aros.size()) || aros[l].model != m.model) {
          reject("target ARO does not belong to its model");
        }
      }
      if (!(m.background_bits > 0.0) || m.result_bits < 0.0) reject("bad model sizes");
    }
    (void)inverse_channel_quality(q.link);
  }
}

void WorkloadConfig::validate() const {
  if (requests < 1) reject("requests must be >= 1");
  if (model_count < 1) reject("model_count must be >= 1");
  if (models_per_request < 1 || models_per_request > model_count || models_per_request > 4) {
    reject("models_per_request must lie in [1, min(4, model_count)]");
  }
  if (min_targets_per_model < 1 || max_targets_per_model < min_targets_per_model ||
      max_targets_per_model > aros_per_model) {
    reject("targets per model must satisfy 1 <= min <= max <= aros_per_model");
  }
  if (!(max_aro_mb > 0.0) || max_aro_mb > 10.0) reject("max_aro_mb must lie in (0,10]");
  if (!(min_background_mb > 0.0) || max_background_mb < min_background_mb) reject("bad background range");
  if (!(foreground_scale > 0.0) || !(background_scale > 0.0)) reject("size scales must be positive");
  if (result_factor < 0.0 || pointer_bits < 0.0) reject("result_factor and pointer_bits must be >= 0");
  if (vm_count < 0) reject("vm_count must be >= 0");
  if (!(min_ec_cpu_hz > 0.0) || max_ec_cpu_hz < min_ec_cpu_hz) reject("bad EC CPU range");
  if (!(vm_core_portion > 0.0) || vm_core_portion > 1.0) reject("vm_core_portion must lie in (0,1]");
  if (min_ec_cache_mb < 0.0 || max_ec_cache_mb < min_ec_cache_mb) reject("bad EC cache range");
  if (min_terminal_portion < 0.30 || max_terminal_portion > 0.50 ||
      max_terminal_portion < min_terminal_portion) {
    reject("terminal portion range must lie inside [0.30, 0.50]");
  }
  if (mobility_total < 0.0 || mobility_total > 1.0) reject("mobility_total must lie in [0,1]");
  if (!(bandwidth_hz > 0.0) || !(noise_w > 0.0) || !(path_loss_exponent > 0.0)) reject("bad radio parameters");
  if (!(min_user_distance_m > 0.0) || cell_radius_m < min_user_distance_m) reject("bad cell radius");
  rates.validate();
}

Instance generate_instance(const WorkloadConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  Instance inst;
  inst.topology_spec = config.topology;
  inst.rates = config.rates;
  inst.params = config.params;
  // Sites only, to draw origins before terminals exist.
  const NetworkTopology sites = build_topology(config.topology, {});

  for (int node : sites.active_ecs()) {
    EcProfile ec;
    ec.node = node;
    ec.vm_count = config.vm_count;
    ec.cpu_hz = uniform(config.min_ec_cpu_hz, config.max_ec_cpu_hz);
    ec.vm_cpu_hz = ec.cpu_hz * config.vm_core_portion;
    ec.cache_bytes = uniform(config.min_ec_cache_mb, config.max_ec_cache_mb) * 1e6;
    ec.chip_coefficient = config.params.chip_coefficient;
    inst.ecs.push_back(ec);
  }

  for (int s = 0; s < config.model_count; ++s) {
    ModelInfo model;
    model.id = s;
    model.background_bits = uniform(config.min_background_mb, config.max_background_mb) * 8e6 *
                            config.params.content_bit_scale * config.background_scale;
    for (int k = 0; k < config.aros_per_model; ++k) {
      AroInfo aro;
      aro.id = static_cast<int>(inst.aros.size());
      aro.model = s;
      // Sizes in (0, max]: reflect the half-open draw.
      aro.size_bytes = (config.max_aro_mb - uniform(0.0, config.max_aro_mb)) * 1e6;
      model.aros.push_back(aro.id);
      inst.aros.push_back(aro);
    }
    inst.models.push_back(model);
  }

  const double fore = foreground_bits(config.frame_width, config.frame_height, config.bits_per_pixel) *
                      config.foreground_scale;
  const double bs_power_w = std::pow(10.0, config.bs_power_dbm / 10.0) * 1e-3;
  for (int r = 0; r < config.requests; ++r) {
    Request q;
    q.id = r;
    q.origin = pick(0, sites.site_count() - 1);
    q.foreground_bits = fore;
    q.pointer_bits = config.pointer_bits;
    q.mobility = uniform_mobility(sites, q.origin, config.mobility_total);
    q.terminal_cpu_hz = config.terminal_cpu_hz;
    q.terminal_portion = uniform(config.min_terminal_portion, config.max_terminal_portion);
    q.terminal_cache_bytes = uniform(0.0, config.max_terminal_cache_mb) * 1e6;

    std::vector<int> all_models(config.model_count);
    for (int s = 0; s < config.model_count; ++s) all_models[s] = s;
    std::shuffle(all_models.begin(), all_models.end(), rng);
    all_models.resize(config.models_per_request);
    std::sort(all_models.begin(), all_models.end());
    for (int s : all_models) {
      RequestModel m;
      m.model = s;
      std::vector<int> pool = inst.models[s].aros;
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(pick(config.min_targets_per_model, config.max_targets_per_model));
      std::sort(pool.begin(), pool.end());
      m.targets = pool;
      m.background_bits = inst.models[s].background_bits;
      m.result_bits = fore * config.result_factor;
      q.models.push_back(m);
    }

    // Disc-uniform user position inside the serving cell.
    const double radius = std::max(config.min_user_distance_m, config.cell_radius_m * std::sqrt(uniform(0.0, 1.0)));
    q.link.bandwidth_hz = config.bandwidth_hz;
    q.link.noise_w = config.noise_w;
    q.link.path_loss_exponent = config.path_loss_exponent;
    q.link.distance_m = radius;
    do {
      q.link.gain_sq = sample_gain(rng);
    } while (!(q.link.gain_sq > 0.0));
    for (int node : sites.active_ecs()) {
      if (node == q.origin) continue;
      Interferer i;
      i.power_w = bs_power_w;
      i.gain_sq = sample_gain(rng);
      i.distance_m = sites.hops(q.origin, node) * config.interferer_spacing_m;
      q.link.interferers.push_back(i);
    }
    inst.requests.push_back(q);
  }
  inst.finalize();
  return inst;
}

namespace {

constexpr const char* kSchema = "medge-instance";
constexpr int kVersion = 1;

json link_json(const RadioLink& l) {
  json interferers = json::array();
  for (const Interferer& i : l.interferers) {
    interferers.push_back({{"power_w", i.power_w}, {"gain_sq", i.gain_sq}, {"distance_m", i.distance_m}});
  }
  return {{"bandwidth_hz", l.bandwidth_hz}, {"noise_w", l.noise_w},
          {"path_loss_exponent", l.path_loss_exponent}, {"distance_m", l.distance_m},
          {"gain_sq", l.gain_sq}, {"interferers", interferers}};
}

RadioLink link_from(const json& j) {
  RadioLink l;
  l.bandwidth_hz = j.at("bandwidth_hz").get<double>();
  l.noise_w = j.at("noise_w").get<double>();
  l.path_loss_exponent = j.at("path_loss_exponent").get<double>();
  l.distance_m = j.at("distance_m").get<double>();
  l.gain_sq = j.at("gain_sq").get<double>();
  for (const json& i : j.at("interferers")) {
    l.interferers.push_back(
        {i.at("power_w").get<double>(), i.at("gain_sq").get<double>(), i.at("distance_m").get<double>()});
  }
  return l;
}

}  // namespace

std::string instance_to_json(const Instance& inst) {
  json topo = {{"site_count", inst.topology_spec.site_count},
               {"branching", inst.topology_spec.branching},
               {"edges", inst.topology_spec.edges},
               {"active_sites", inst.topology_spec.active_sites},
               {"per_hop_ms", inst.topology_spec.per_hop_ms},
               {"region_roots", inst.topology_spec.region_roots},
               {"region_server_hops", inst.topology_spec.region_server_hops}};
  json ecs = json::array();
  for (const EcProfile& e : inst.ecs) {
    ecs.push_back({{"node", e.node}, {"vm_count", e.vm_count}, {"cpu_hz", e.cpu_hz},
                   {"vm_cpu_hz", e.vm_cpu_hz}, {"cache_bytes", e.cache_bytes},
                   {"chip_coefficient", e.chip_coefficient}});
  }
  json models = json::array();
  for (const ModelInfo& m : inst.models) {
    models.push_back({{"id", m.id}, {"background_bits", m.background_bits}, {"aros", m.aros}});
  }
  json aros = json::array();
  for (const AroInfo& a : inst.aros) {
    aros.push_back({{"id", a.id}, {"model", a.model}, {"size_bytes", a.size_bytes}});
  }
  json requests = json::array();
  for (const Request& q : inst.requests) {
    json rm = json::array();
    for (const RequestModel& m : q.models) {
      rm.push_back({{"model", m.model}, {"targets", m.targets}, {"background_bits", m.background_bits},
                    {"result_bits", m.result_bits}});
    }
    json dest = json::array();
    for (const auto& [k, u] : q.mobility.destinations) dest.push_back({{"node", k}, {"probability", u}});
    requests.push_back({{"id", q.id}, {"origin", q.origin}, {"foreground_bits", q.foreground_bits},
                        {"pointer_bits", q.pointer_bits}, {"mobility", dest}, {"models", rm},
                        {"terminal_cpu_hz", q.terminal_cpu_hz}, {"terminal_portion", q.terminal_portion},
                        {"terminal_cache_bytes", q.terminal_cache_bytes}, {"link", link_json(q.link)}});
  }
  const ModelParameters& p = inst.params;
  json doc = {{"schema", kSchema},
              {"version", kVersion},
              {"topology", topo},
              {"ecs", ecs},
              {"models", models},
              {"aros", aros},
              {"requests", requests},
              {"rates", {{"rates_bps", inst.rates.rates_bps}, {"ssim", inst.rates.ssim}}},
              {"parameters",
               {{"omega_fore", p.omega_fore},
                {"omega_back", p.omega_back},
                {"penalty_ms", p.penalty_ms},
                {"chip_coefficient", p.chip_coefficient},
                {"content_bit_scale", p.content_bit_scale},
                {"shared_region_frames", p.shared_region_frames}}}};
  return doc.dump(1) + "\n";
}

Instance instance_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("instance file is not valid JSON: ") + e.what());
  }
  if (doc.value("schema", std::string()) != kSchema) reject("not a medge instance file");
  if (doc.value("version", 0) != kVersion) {
    reject("unsupported instance version " + std::to_string(doc.value("version", 0)));
  }
  try {
    Instance inst;
    const json& topo = doc.at("topology");
    inst.topology_spec.site_count = topo.at("site_count").get<int>();
    inst.topology_spec.branching = topo.at("branching").get<int>();
    inst.topology_spec.edges = topo.at("edges").get<std::vector<std::pair<int, int>>>();
    inst.topology_spec.active_sites = topo.at("active_sites").get<std::vector<int>>();
    inst.topology_spec.per_hop_ms = topo.at("per_hop_ms").get<double>();
    inst.topology_spec.region_roots = topo.at("region_roots").get<std::vector<int>>();
    inst.topology_spec.region_server_hops = topo.at("region_server_hops").get<int>();
    for (const json& e : doc.at("ecs")) {
      inst.ecs.push_back({e.at("node").get<int>(), e.at("vm_count").get<int>(), e.at("cpu_hz").get<double>(),
                          e.at("vm_cpu_hz").get<double>(), e.at("cache_bytes").get<double>(),
                          e.at("chip_coefficient").get<double>()});
    }
    for (const json& m : doc.at("models")) {
      inst.models.push_back(
          {m.at("id").get<int>(), m.at("background_bits").get<double>(), m.at("aros").get<std::vector<int>>()});
    }
    for (const json& a : doc.at("aros")) {
      inst.aros.push_back({a.at("id").get<int>(), a.at("model").get<int>(), a.at("size_bytes").get<double>()});
    }
    for (const json& j : doc.at("requests")) {
      Request q;
      q.id = j.at("id").get<int>();
      q.origin = j.at("origin").get<int>();
      q.foreground_bits = j.at("foreground_bits").get<double>();
      q.pointer_bits = j.at("pointer_bits").get<double>();
      q.mobility.origin = q.origin;
      for (const json& d : j.at("mobility")) {
        q.mobility.destinations.emplace_back(d.at("node").get<int>(), d.at("probability").get<double>());
      }
      for (const json& m : j.at("models")) {
        q.models.push_back({m.at("model").get<int>(), m.at("targets").get<std::vector<int>>(),
                            m.at("background_bits").get<double>(), m.at("result_bits").get<double>()});
      }
      q.terminal_cpu_hz = j.at("terminal_cpu_hz").get<double>();
      q.terminal_portion = j.at("terminal_portion").get<double>();
      q.terminal_cache_bytes = j.at("terminal_cache_bytes").get<double>();
      q.link = link_from(j.at("link"));
      inst.requests.push_back(q);
    }
    inst.rates.rates_bps = doc.at("rates").at("rates_bps").get<std::vector<double>>();
    inst.rates.ssim = doc.at("rates").at("ssim").get<std::vector<double>>();
    const json& p = doc.at("parameters");
    inst.params.omega_fore = p.at("omega_fore").get<double>();
    inst.params.omega_back = p.at("omega_back").get<double>();
    inst.params.penalty_ms = p.at("penalty_ms").get<double>();
    inst.params.chip_coefficient = p.at("chip_coefficient").get<double>();
    inst.params.content_bit_scale = p.at("content_bit_scale").get<double>();
    inst.params.shared_region_frames = p.at("shared_region_frames").get<bool>();
    inst.finalize();
    return inst;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed instance file: ") + e.what());
  }
}

}  // namespace medge
