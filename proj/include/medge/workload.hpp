#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "medge/radio.hpp"
#include "medge/topology.hpp"

namespace medge {

/// Bits of a decoded foreground frame after compression.
double foreground_bits(double width, double height, double bits_per_pixel);

struct AroInfo {
  int id = 0;
  int model = 0;
  double size_bytes = 0.0;

  bool operator==(const AroInfo&) const = default;
};

struct ModelInfo {
  int id = 0;
  double background_bits = 0.0;
  std::vector<int> aros;  // ids into Instance::aros

  bool operator==(const ModelInfo&) const = default;
};

/// One model of S_r with the request's target AROs inside it.
struct RequestModel {
  int model = 0;
  std::vector<int> targets;  // ARO ids, each belonging to `model`
  double background_bits = 0.0;
  double result_bits = 0.0;

  bool operator==(const RequestModel&) const = default;
};

struct Request {
  int id = 0;
  int origin = 0;    // access site f(r)
  int terminal = 0;  // node j_r
  double foreground_bits = 0.0;
  double pointer_bits = 0.0;
  MobilityProfile mobility;
  std::vector<RequestModel> models;
  double terminal_cpu_hz = 0.0;
  double terminal_portion = 0.0;
  double terminal_cache_bytes = 0.0;
  RadioLink link;

  [[nodiscard]] int target_count() const;

  bool operator==(const Request&) const = default;
};

struct EcProfile {
  int node = 0;
  int vm_count = 0;
  double cpu_hz = 0.0;
  /// Per-VM share used by the processing-delay and power terms.
  double vm_cpu_hz = 0.0;
  double cache_bytes = 0.0;
  double chip_coefficient = 0.0;

  bool operator==(const EcProfile&) const = default;
};

struct ModelParameters {
  double omega_fore = 4.0;       // cycles/bit
  double omega_back = 10.0;      // cycles/bit
  double penalty_ms = 25.0;
  double chip_coefficient = 1e-18;
  /// Converts stored ARO bytes into the bit count processed by matching.
  double content_bit_scale = 1e-3;
  /// Charge co-region result frames of every user (true) or only the
  /// request's own frames (false).
  bool shared_region_frames = true;

  bool operator==(const ModelParameters&) const = default;
};

/// Immutable problem data. Build through generate_instance or
/// instance_from_json, or fill the fields and call finalize().
struct Instance {
  TopologySpec topology_spec;
  NetworkTopology topology;
  std::vector<EcProfile> ecs;  // one per active EC, same order as topology.active_ecs()
  std::vector<ModelInfo> models;
  std::vector<AroInfo> aros;
  std::vector<Request> requests;
  RateTable rates;
  ModelParameters params;

  /// Rebuilds the topology (terminals attached to each request's origin),
  /// fills request terminal ids and checks every invariant.
  void finalize();

  [[nodiscard]] int request_count() const { return static_cast<int>(requests.size()); }
  [[nodiscard]] int ec_count() const { return static_cast<int>(ecs.size()); }
  /// Position of an active EC node in `ecs`, or -1.
  [[nodiscard]] int ec_index(int node) const;
  /// Wired delay where a terminal sits at its access site (the air link is
  /// accounted for separately).
  [[nodiscard]] double wired_ms(int a, int b) const;
  /// Region server serving the area of `node`.
  [[nodiscard]] int region_server_of(int node) const;

  bool operator==(const Instance& other) const;
};

struct WorkloadConfig {
  TopologySpec topology;
  int requests = 30;
  int model_count = 4;
  int models_per_request = 4;
  int aros_per_model = 12;
  int min_targets_per_model = 1;
  int max_targets_per_model = 2;
  double max_aro_mb = 10.0;
  double min_background_mb = 10.0;
  double max_background_mb = 50.0;
  double frame_width = 1280.0;
  double frame_height = 720.0;
  double bits_per_pixel = 8.0;
  double foreground_scale = 1.0;
  double background_scale = 1.0;
  double result_factor = 1.0;
  double pointer_bits = 0.0;
  int vm_count = 14;
  double min_ec_cpu_hz = 4e9;
  double max_ec_cpu_hz = 8e9;
  double vm_core_portion = 0.5;
  double min_ec_cache_mb = 100.0;
  double max_ec_cache_mb = 400.0;
  double terminal_cpu_hz = 1e9;
  double min_terminal_portion = 0.30;
  double max_terminal_portion = 0.50;
  double max_terminal_cache_mb = 100.0;
  double mobility_total = 1.0;
  double cell_radius_m = 250.0;
  double min_user_distance_m = 10.0;
  double bandwidth_hz = 2e6;
  double noise_w = 1e-11;
  double path_loss_exponent = 4.0;
  double bs_power_dbm = 20.0;
  double interferer_spacing_m = 500.0;
  RateTable rates = default_rate_table();
  ModelParameters params;

  /// Throws std::invalid_argument with the offending key.
  void validate() const;
};

Instance generate_instance(const WorkloadConfig& config, std::uint64_t seed);

/// Self-describing JSON with a schema name and version.
std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);

}  // namespace medge
