#include "medge/radio.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace medge {

void RateTable::validate() const {
  if (rates_bps.empty() || rates_bps.size() != ssim.size()) {
    throw std::invalid_argument("rate table needs equal, non-empty rate and SSIM lists");
  }
  for (std::size_t k = 0; k < rates_bps.size(); ++k) {
    if (!(rates_bps[k] > 0.0)) throw std::invalid_argument("rates must be positive");
    if (!(ssim[k] > 0.0 && ssim[k] <= 1.0)) throw std::invalid_argument("SSIM must lie in (0,1]");
    if (k > 0 && !(rates_bps[k] > rates_bps[k - 1] && ssim[k] > ssim[k - 1])) {
      throw std::invalid_argument("rates and SSIM values must be strictly increasing");
    }
  }
}

int RateTable::index_of(double rate) const {
  for (int k = 0; k < size(); ++k) {
    if (rates_bps[k] == rate) return k;
  }
  throw std::invalid_argument("rate " + std::to_string(rate) + " bps is not in the table");
}

RateTable default_rate_table() {
  return {{2e6, 3e6, 4e6, 5e6, 6e6, 7e6, 8e6}, {0.955, 0.968, 0.977, 0.983, 0.987, 0.990, 0.991}};
}

double gain_from_normals(double t, double t_prime) { return 0.5 * (t * t + t_prime * t_prime); }

double sample_gain(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double t = normal(rng);
  const double t_prime = normal(rng);
  return gain_from_normals(t, t_prime);
}

double inverse_channel_quality(const RadioLink& link) {
  if (!(link.gain_sq > 0.0) || !(link.distance_m > 0.0)) {
    throw std::domain_error("singular link: zero gain or zero distance");
  }
  double interference = link.noise_w;
  for (const Interferer& i : link.interferers) {
    interference += i.power_w * i.gain_sq * std::pow(i.distance_m, -link.path_loss_exponent);
  }
  return interference / (link.gain_sq * std::pow(link.distance_m, -link.path_loss_exponent));
}

double transmit_power(const RadioLink& link, double rate_bps) {
  const double scale = inverse_channel_quality(link);
  return scale * (std::exp2(rate_bps / link.bandwidth_hz) - 1.0);
}

double ssim_of_rate(const RateTable& table, double rate_bps) {
  return table.ssim[table.index_of(rate_bps)];
}

}  // namespace medge
