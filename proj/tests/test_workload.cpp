#include <algorithm>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "medge/workload.hpp"

using namespace medge;

TEST_CASE("foreground size of a 720p frame") {
  // 1280 * 720 * 8 bits, scaled by 5/9 and the 1e-3 content scale.
  CHECK(foreground_bits(1280, 720, 8) == doctest::Approx(4096.0));
  CHECK(foreground_bits(640, 360, 8) == doctest::Approx(1024.0));
}

TEST_CASE("generation is a pure function of config and seed") {
  WorkloadConfig cfg;
  cfg.requests = 12;
  const Instance a = generate_instance(cfg, 42);
  const Instance b = generate_instance(cfg, 42);
  const Instance c = generate_instance(cfg, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("generated values stay inside their configured ranges") {
  WorkloadConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance inst = generate_instance(cfg, seed);
    REQUIRE(inst.request_count() == 30);
    REQUIRE(inst.ec_count() == 6);
    REQUIRE(inst.aros.size() == 48u);
    for (const EcProfile& ec : inst.ecs) {
      CHECK(ec.cpu_hz >= 4e9);
      CHECK(ec.cpu_hz <= 8e9);
      CHECK(ec.vm_cpu_hz == doctest::Approx(ec.cpu_hz * 0.5));
      CHECK(ec.cache_bytes >= 100e6);
      CHECK(ec.cache_bytes <= 400e6);
      CHECK(ec.vm_count == 14);
    }
    for (const ModelInfo& m : inst.models) {
      // 10..50 MB, in bits, times the content scale.
      CHECK(m.background_bits >= 10 * 8e6 * 1e-3);
      CHECK(m.background_bits <= 50 * 8e6 * 1e-3);
    }
    for (const AroInfo& a : inst.aros) {
      CHECK(a.size_bytes > 0.0);
      CHECK(a.size_bytes <= 10e6);
    }
    for (const Request& r : inst.requests) {
      CHECK(r.terminal_portion >= 0.30);
      CHECK(r.terminal_portion <= 0.50);
      CHECK(r.foreground_bits == doctest::Approx(4096.0));
      REQUIRE(r.models.size() == 4u);
      std::set<int> distinct;
      for (const RequestModel& m : r.models) {
        distinct.insert(m.model);
        CHECK(m.targets.size() >= 1u);
        CHECK(m.targets.size() <= 2u);
        for (int l : m.targets) CHECK(inst.aros[l].model == m.model);
        CHECK(m.result_bits == doctest::Approx(r.foreground_bits));
      }
      CHECK(distinct.size() == 4u);
      CHECK(r.mobility.total_probability() == doctest::Approx(1.0));
      CHECK(inst.topology.access_site(r.terminal) == r.origin);
      // Every active EC other than the serving site interferes.
      const auto& active = inst.topology.active_ecs();
      const bool serving = std::find(active.begin(), active.end(), r.origin) != active.end();
      CHECK(r.link.interferers.size() == active.size() - (serving ? 1 : 0));
    }
  }
}

TEST_CASE("ARO sizes average half the maximum") {
  WorkloadConfig cfg;
  cfg.requests = 1;
  double sum = 0.0;
  int n = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    for (const AroInfo& a : generate_instance(cfg, seed).aros) {
      sum += a.size_bytes;
      ++n;
    }
  }
  // 4800 draws of U(0,10] MB: standard error is about 0.04 MB.
  CHECK(sum / n == doctest::Approx(5e6).epsilon(0.04));
}

TEST_CASE("size scales multiply the generated sizes") {
  WorkloadConfig base;
  base.requests = 3;
  WorkloadConfig scaled = base;
  scaled.foreground_scale = 3.0;
  scaled.background_scale = 0.5;
  const Instance a = generate_instance(base, 7);
  const Instance b = generate_instance(scaled, 7);
  for (int r = 0; r < 3; ++r) {
    CHECK(b.requests[r].foreground_bits == doctest::Approx(3.0 * a.requests[r].foreground_bits));
    CHECK(b.requests[r].models[0].background_bits == doctest::Approx(0.5 * a.requests[r].models[0].background_bits));
  }
}

TEST_CASE("no mobility leaves empty profiles") {
  WorkloadConfig cfg;
  cfg.requests = 5;
  cfg.mobility_total = 0.0;
  for (const Request& r : generate_instance(cfg, 3).requests) {
    CHECK(r.mobility.total_probability() == doctest::Approx(0.0));
  }
}

TEST_CASE("instances survive a JSON round trip") {
  WorkloadConfig cfg;
  cfg.requests = 8;
  const Instance a = generate_instance(cfg, 11);
  const Instance b = instance_from_json(instance_to_json(a));
  CHECK(a == b);
  CHECK(instance_to_json(b) == instance_to_json(a));
  CHECK_THROWS_AS(instance_from_json(R"({"schema":"other"})"), std::invalid_argument);
}

TEST_CASE("bad workload configs are rejected") {
  auto bad = [](auto edit) {
    WorkloadConfig c;
    edit(c);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };
  bad([](WorkloadConfig& c) { c.requests = 0; });
  bad([](WorkloadConfig& c) { c.models_per_request = 5; });
  bad([](WorkloadConfig& c) { c.max_aro_mb = 11.0; });
  bad([](WorkloadConfig& c) { c.max_targets_per_model = 13; });
  bad([](WorkloadConfig& c) { c.min_terminal_portion = 0.2; });
  bad([](WorkloadConfig& c) { c.mobility_total = 1.5; });
  bad([](WorkloadConfig& c) { c.foreground_scale = 0.0; });
  bad([](WorkloadConfig& c) { c.min_ec_cpu_hz = 9e9; });
  WorkloadConfig ok;
  CHECK_NOTHROW(ok.validate());
}
