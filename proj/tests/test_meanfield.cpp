#include "doctest.h"
#include "ssc/closed_forms.hpp"
#include "ssc/meanfield.hpp"

#include <cmath>
#include <numeric>

using namespace ssc;

TEST_CASE("single vertex never gets an edge") {
  Rng rng(200);
  MfState s(1, 2.0);
  MfOptions o;
  o.horizon = 50.0;
  o.snapshot_times = {10.0, 50.0};
  const auto run = mf_run(s, rng, o);
  CHECK(s.edge_count() == 0);
  CHECK(run.proposals == 0);
  CHECK(run.burns > 0);
  REQUIRE(run.snapshots.size() == 2);
  for (const auto& snap : run.snapshots) {
    REQUIRE(snap.v.size() == 1);
    CHECK(snap.v[0] == 1.0);
  }
  CHECK_THROWS(MfState(0));
  CHECK_THROWS(MfState(5, -1.0));
}

TEST_CASE("empirical size distribution of simple states") {
  MfState s(10);
  auto v = empirical_size_distribution(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == 1.0);
  CHECK(sup_distance_to_w(s) == doctest::Approx(0.5));
  for (std::uint32_t i = 0; i + 1 < 10; ++i) CHECK(s.add_edge(i, i + 1));
  CHECK_FALSE(s.add_edge(3, 4));
  CHECK_FALSE(s.add_edge(4, 4));
  v = empirical_size_distribution(s);
  REQUIRE(v.size() == 10);
  CHECK(v[9] == 1.0);
  CHECK(std::accumulate(v.begin(), v.end(), 0.0) == 1.0);
  CHECK(s.valid());
  CHECK(sup_distance_to_w(s) == doctest::Approx(1.0 - cluster_size_pmf_real(10)));
  CHECK(s.burn(7) == 10);
  CHECK(s.edge_count() == 0);
  CHECK(s.valid());
  CHECK(s.size_counts()[1] == 10);
}

TEST_CASE("partition stays consistent with the edges") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto n = static_cast<std::uint32_t>(2 + rng.below(40));
    const double lambda = rng.uniform() * 0.5;
    MfOptions o;
    o.horizon = 20.0 * rng.uniform();
    o.record_events = true;
    const auto run = mf_run(n, lambda, rng, o);
    MfState replay(n, lambda);
    for (const auto& e : run.events) {
      replay.apply(e);
      REQUIRE(replay.valid());
      const auto v = empirical_size_distribution(replay);
      CHECK(std::accumulate(v.begin(), v.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("burn-free edge count follows the dynamical random graph") {
  Rng rng(201);
  const std::uint32_t n = 100;
  const double t = 60.0;
  const double pairs = n * (n - 1) / 2.0;
  const double p = -std::expm1(-t / n);
  double sum = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    MfState s(n);
    MfOptions o;
    o.horizon = t;
    mf_run(s, rng, o);
    sum += static_cast<double>(s.edge_count());
  }
  const double sd = std::sqrt(pairs * p * (1 - p) / reps);
  CHECK(std::fabs(sum / reps - pairs * p) < 4.0 * sd);
}

TEST_CASE("identical seeds give identical event streams") {
  MfOptions o;
  o.horizon = 5.0;
  o.record_events = true;
  Rng a(9), b(9);
  const auto ra = mf_run(300, 0.05, a, o), rb = mf_run(300, 0.05, b, o);
  REQUIRE(ra.events.size() == rb.events.size());
  for (std::size_t i = 0; i < ra.events.size(); ++i) {
    CHECK(ra.events[i].time == rb.events[i].time);
    CHECK(ra.events[i].a == rb.events[i].a);
    CHECK(ra.events[i].b == rb.events[i].b);
  }
}

TEST_CASE("snapshots and tagged traces") {
  Rng rng(202);
  const std::uint32_t n = 2000;
  MfOptions o;
  o.horizon = 10.0;
  o.record_events = true;
  o.snapshot_times = {0.0, 2.5, 5.0, 10.0};
  MfState s(n, 1.0 / std::sqrt(double(n)));
  const auto run = mf_run(s, rng, o);
  REQUIRE(run.snapshots.size() == 4);
  CHECK(run.snapshots[0].v == std::vector<double>{1.0});
  CHECK(run.snapshots.back().sup_distance == doctest::Approx(sup_distance_to_w(s)));
  for (std::uint32_t vertex : {0u, 17u, 1999u}) {
    const auto tr = tagged_trace(run.events, n, vertex, 0.0, 10.0);
    CHECK(tr.valid());
    CHECK(*tr.size_at(10.0) == s.component_size(vertex));
    for (double x : tr.explosions) CHECK(*tr.size_at(x) == 1);
  }
  CHECK_THROWS(tagged_trace(run.events, n, n, 0.0, 1.0));
}
