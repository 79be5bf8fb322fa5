#pragma once

#include <random>
#include <vector>

namespace medge {

struct Interferer {
  double power_w = 0.0;
  double gain_sq = 0.0;
  double distance_m = 0.0;

  bool operator==(const Interferer&) const = default;
};

struct RadioLink {
  double bandwidth_hz = 0.0;
  double noise_w = 0.0;
  double path_loss_exponent = 0.0;
  double distance_m = 0.0;
  double gain_sq = 0.0;
  std::vector<Interferer> interferers;

  bool operator==(const RadioLink&) const = default;
};

struct RateTable {
  std::vector<double> rates_bps;
  std::vector<double> ssim;

  /// Throws std::invalid_argument unless both lists are strictly increasing
  /// and of equal length, with SSIM in (0, 1].
  void validate() const;
  [[nodiscard]] int size() const { return static_cast<int>(rates_bps.size()); }
  /// Index of `rate`; throws std::invalid_argument when absent.
  [[nodiscard]] int index_of(double rate) const;

  bool operator==(const RateTable&) const = default;
};

/// 2..8 Mbps in 1 Mbps steps with their SSIM scores.
RateTable default_rate_table();

/// |H|^2 for H = sqrt(1/2)(t + jt').
double gain_from_normals(double t, double t_prime);
double sample_gain(std::mt19937_64& rng);

/// Interference plus noise over the useful path gain.
double inverse_channel_quality(const RadioLink& link);

/// Transmit power needed to carry `rate_bps` on one resource block.
/// Throws std::domain_error for a zero gain or zero distance.
double transmit_power(const RadioLink& link, double rate_bps);

/// SSIM paired with `rate_bps`; throws std::invalid_argument when absent.
double ssim_of_rate(const RateTable& table, double rate_bps);

}  // namespace medge
