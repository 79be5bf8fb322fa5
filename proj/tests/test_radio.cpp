#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "medge/radio.hpp"

using namespace medge;

TEST_CASE("gain from fixed normals") {
  CHECK(gain_from_normals(0.0, 0.0) == 0.0);
  CHECK(gain_from_normals(1.0, 1.0) == 1.0);
  CHECK(gain_from_normals(2.0, 0.0) == 2.0);
}

TEST_CASE("Rayleigh power gain has unit mean") {
  std::mt19937_64 rng(42);
  double sum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) sum += sample_gain(rng);
  CHECK(std::abs(sum / n - 1.0) < 0.01);
}

TEST_CASE("transmit power on a unit link") {
  RadioLink l{1.0, 1.0, 2.0, 1.0, 1.0, {}};
  CHECK(transmit_power(l, 1.0) == doctest::Approx(1.0));
  CHECK(transmit_power(l, 0.0) == 0.0);
  CHECK(transmit_power(l, 2.0) == doctest::Approx(3.0));
}

TEST_CASE("transmit power with one interferer") {
  RadioLink l;
  l.bandwidth_hz = 180e3;
  l.noise_w = 1e-11;
  l.path_loss_exponent = 4.0;
  l.distance_m = 100.0;
  l.gain_sq = 0.5;
  l.interferers = {{0.1, 0.3, 300.0}};
  // (1e-11 + 0.1*0.3/300^4) / (0.5/100^4) * (2^(2e6/180e3) - 1)
  const double interference = 1e-11 + 0.1 * 0.3 / 8.1e9;
  const double useful = 0.5 / 1e8;
  const double expected = interference / useful * (std::pow(2.0, 2e6 / 180e3) - 1.0);
  CHECK(expected == doctest::Approx(6.0596746).epsilon(1e-7));
  CHECK(transmit_power(l, 2e6) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("transmit power grows with rate and rejects dead links") {
  RadioLink l{2e6, 1e-11, 4.0, 120.0, 0.7, {{0.1, 1.2, 500.0}}};
  const RateTable table = default_rate_table();
  double last = 0.0;
  for (double g : table.rates_bps) {
    const double p = transmit_power(l, g);
    CHECK(p > last);
    last = p;
  }
  RadioLink dead = l;
  dead.gain_sq = 0.0;
  CHECK_THROWS_AS(transmit_power(dead, 2e6), std::domain_error);
  RadioLink here = l;
  here.distance_m = 0.0;
  CHECK_THROWS_AS(transmit_power(here, 2e6), std::domain_error);
}

TEST_CASE("exponential linearization over a binary rate choice") {
  const RateTable table = default_rate_table();
  const double b = 2e6;
  for (double g : table.rates_bps) {
    for (int e : {0, 1}) {
      CHECK(std::pow(2.0, g * e / b) == doctest::Approx((1 - e) + e * std::pow(2.0, g / b)));
    }
  }
}

TEST_CASE("rate to SSIM lookup") {
  const RateTable table = default_rate_table();
  CHECK(ssim_of_rate(table, 2e6) == 0.955);
  CHECK(ssim_of_rate(table, 8e6) == 0.991);
  for (double g : table.rates_bps) {
    const double s = ssim_of_rate(table, g);
    CHECK(s > 0.0);
    CHECK(s <= 1.0);
  }
  CHECK_THROWS_AS(ssim_of_rate(table, 2.5e6), std::invalid_argument);
  RateTable bad = table;
  bad.ssim[3] = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
