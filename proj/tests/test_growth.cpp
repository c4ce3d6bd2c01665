#include "doctest.h"
#include "ssc/closed_forms.hpp"
#include "ssc/exact_enum.hpp"
#include "ssc/growth.hpp"
#include "ssc/samplers.hpp"
#include "ssc/special.hpp"
#include "ssc/stattest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

using namespace ssc;

namespace {

std::vector<std::uint64_t> bucket(const std::vector<std::uint64_t>& xs, std::uint64_t kmax) {
  std::vector<std::uint64_t> c(kmax + 1, 0);
  for (auto x : xs) ++c[std::min<std::uint64_t>(x, kmax + 1) - 1];
  return c;
}

std::vector<double> w_probs(std::uint64_t kmax) {
  std::vector<double> p;
  for (std::uint64_t k = 1; k <= kmax; ++k) p.push_back(cluster_size_pmf_real(k));
  return p;
}

double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sd(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

}  // namespace

TEST_CASE("run_growth: explosion time, first holding time, jump sizes") {
  Rng rng(100);
  GrowthOptions o;
  o.size_cap = 10000;
  std::vector<double> te, first;
  std::vector<std::uint64_t> jumps;
  for (int r = 0; r < 20000; ++r) {
    const auto tr = run_growth(rng, o);
    REQUIRE(tr.valid());
    REQUIRE(tr.explosions.size() == 1);
    CHECK(tr.events.back().kind == EventKind::explosion);
    CHECK(tr.t_end == tr.explosions.front());
    te.push_back(tr.explosions.front());
    first.push_back(tr.holding_times().front());
    for (const auto& e : tr.events)
      if (e.kind == EventKind::jump && jumps.size() < 100000) jumps.push_back(e.jump_size);
  }
  CHECK(ks_test(te, t_inf_cdf).pass);
  CHECK(std::fabs(mean(te) - 2.0) < 4.0 * sd(te) / std::sqrt(te.size()));
  // the first holding time is Exp(1) unless the cap tail starts immediately
  CHECK(ks_test(first, [](double x) { return -std::expm1(-x); }).pass);
  CHECK(chi_square_test(bucket(jumps, 20), w_probs(20)).pass);
}

TEST_CASE("run_growth: stop rules") {
  Rng rng(101);
  GrowthOptions capped;
  capped.stop = StopRule::size_cap;
  capped.size_cap = 50;
  for (int r = 0; r < 200; ++r) {
    const auto tr = run_growth(rng, capped);
    CHECK(tr.capped);
    CHECK(tr.explosions.empty());
    CHECK(tr.events.back().size_after >= 50);
  }
  GrowthOptions hz;
  hz.stop = StopRule::horizon;
  hz.horizon = 30.0;
  hz.size_cap = 1000;
  std::size_t explosions = 0;
  for (int r = 0; r < 200; ++r) {
    const auto tr = run_growth(rng, hz);
    CHECK(tr.valid());
    CHECK(tr.t_end == 30.0);
    explosions += tr.explosions.size();
    for (double x : tr.explosions) CHECK(tr.size_at(x) == std::optional<std::uint64_t>(1));
  }
  // renewal with mean interarrival 2 over 30 time units
  CHECK(explosions > 200 * 12);
  CHECK(explosions < 200 * 17);
  GrowthOptions big;
  big.init_size = 1000;
  big.size_cap = 1'000'000;
  std::vector<double> te;
  for (int r = 0; r < 3000; ++r) te.push_back(run_growth(rng, big).explosions.front());
  CHECK(ks_test(te, [](double x) { return explosion_cdf(1000, x); }).pass);
  CHECK_THROWS(run_growth(rng, GrowthOptions{0}));
}

TEST_CASE("size-biased t_inf") {
  Rng rng(102);
  std::vector<double> x(30000);
  for (auto& v : x) v = sample_size_biased_t_inf(rng);
  CHECK(ks_test(x, size_biased_t_inf_cdf).pass);
}

TEST_CASE("run_stationary: one-time marginals") {
  Rng rng(103);
  StationaryOptions o;
  o.window = 3.0;
  o.size_cap = 10000;
  const int reps = 40000;
  std::vector<std::uint64_t> sizes, since;
  std::vector<double> ages, theta;
  std::vector<double> weighted[3];
  const double grid[3] = {0.5, 1.0, 2.0};
  for (int r = 0; r < reps; ++r) {
    const auto tr = run_stationary(rng, o);
    REQUIRE(tr.valid());
    CHECK(tr.t_begin <= 0.0);
    const auto s0 = tr.size_at(0.0);
    sizes.push_back(s0 ? *s0 : o.size_cap);
    since.push_back(tr.jumps_since_reset(0.0));
    ages.push_back(0.0 - tr.last_reset(0.0));
    const auto th = tr.next_explosion(0.0);
    const double theta1 = th ? *th : 1e300;
    if (theta1 <= o.window) theta.push_back(theta1);
    for (int g = 0; g < 3; ++g)
      weighted[g].push_back(theta1 > grid[g] && s0 ? static_cast<double>(*s0) : 0.0);
  }
  CHECK(chi_square_test(bucket(sizes, 20), w_probs(20)).pass);
  CHECK(ks_test(ages, theta1_cdf).pass);
  // theta1 is observed only inside the window
  const double seen = theta1_cdf(o.window);
  CHECK(std::fabs(double(theta.size()) / reps - seen) < 4.0 * std::sqrt(seen * (1 - seen) / reps));
  CHECK(ks_test(theta, [&](double x) { return std::min(1.0, theta1_cdf(x) / seen); }).pass);
  std::vector<double> ys;
  for (std::uint64_t n = 0; n < 30; ++n) ys.push_back(to_double(jump_count_pmf(n)));
  std::vector<std::uint64_t> yc(31, 0);
  for (auto n : since) ++yc[std::min<std::uint64_t>(n, 30)];
  CHECK(chi_square_test(yc, ys).pass);
  for (int g = 0; g < 3; ++g) {
    const double expect = 1.0 / std::sinh(grid[g]);
    CHECK(std::fabs(mean(weighted[g]) - expect) < 4.0 * sd(weighted[g]) / std::sqrt(double(reps)));
  }
}

TEST_CASE("run_stationary: structural snapshot matches exact masses") {
  Rng rng(104);
  StationaryOptions o;
  o.window = 0.5;
  o.size_cap = 1000;
  o.structural = true;
  o.structure_cap = 5;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<double> p;
  for (std::size_t k = 1; k <= 4; ++k)
    for (const auto& c : tree_classes(k)) {
      index[c.code] = p.size();
      p.push_back(to_double(c.mass));
    }
  std::vector<std::uint64_t> counts(p.size() + 1, 0);
  for (int r = 0; r < 40000; ++r) {
    const auto tr = run_stationary(rng, o);
    if (!tr.snapshot || tr.snapshot->size() > 4) {
      ++counts.back();
      continue;
    }
    CHECK(tr.snapshot->size() == *tr.size_at(0.0));
    ++counts[index.at(canonical_code(*tr.snapshot))];
  }
  CHECK(chi_square_test(counts, p).pass);
}

TEST_CASE("run_growth: structural mode tracks the size") {
  Rng rng(105);
  GrowthOptions o;
  o.structural = true;
  o.stop = StopRule::horizon;
  o.horizon = 1.5;
  o.size_cap = 200;
  o.structure_cap = 100000;
  o.snapshot_time = 1.5;
  for (int r = 0; r < 200; ++r) {
    const auto tr = run_growth(rng, o);
    const auto s = tr.size_at(1.5);
    if (!s) {
      CHECK(tr.structure_aborted);
      continue;
    }
    REQUIRE(tr.snapshot.has_value());
    CHECK(tr.snapshot->size() == *s);
    CHECK(tr.snapshot->valid());
  }
  // identical size path in both modes
  Rng a(7), b(7);
  GrowthOptions plain;
  plain.size_cap = 300;
  GrowthOptions st = plain;
  st.structural = true;
  st.snapshot_time = 0.1;
  const auto ta = run_growth(a, plain), tb = run_growth(b, st);
  REQUIRE(ta.events.size() == tb.events.size());
  for (std::size_t i = 0; i < ta.events.size(); ++i) CHECK(ta.events[i].time == tb.events[i].time);
}

TEST_CASE("run_conditioned: size pmf and mean against closed forms") {
  Rng rng(106);
  for (auto mode : {ConditionMode::explode_at, ConditionMode::survive_past}) {
    for (bool stationary : {false, true}) {
      ConditionalKernel kern{0.5, 1.0, mode, stationary};
      const auto table = conditioned_size_pmf_table(kern);
      std::vector<double> p(table.pmf.begin(), table.pmf.begin() + 25);
      std::vector<std::uint64_t> sizes;
      std::vector<double> sz;
      for (int r = 0; r < 30000; ++r) {
        const auto tr = run_conditioned(rng, kern);
        REQUIRE(tr.valid());
        CHECK(tr.explosions.empty());
        const auto s = *tr.size_at(0.5);
        sizes.push_back(s);
        sz.push_back(static_cast<double>(s));
      }
      CHECK(chi_square_test(bucket(sizes, 25), p).pass);
      const double m = conditional_expected_size(kern);
      CHECK(std::fabs(mean(sz) - m) < 4.0 * sd(sz) / std::sqrt(double(sz.size())));
    }
  }
}

TEST_CASE("run_conditioned: initial law and terminal behaviour") {
  Rng rng(107);
  for (auto mode : {ConditionMode::explode_at, ConditionMode::survive_past}) {
    for (double t : {0.3, 4.0}) {
      ConditionalKernel kern{0.0, t, mode, true};
      const auto table = conditioned_size_pmf_table(kern);
      std::vector<double> p(table.pmf.begin(), table.pmf.begin() + 15);
      std::vector<std::uint64_t> ks;
      for (int r = 0; r < 20000; ++r) ks.push_back(sample_conditioned_initial_size(kern, rng));
      CHECK(chi_square_test(bucket(ks, 15), p).pass);
    }
  }
  ConditionalKernel kern{0.0, 1.0, ConditionMode::explode_at, false};
  ConditionedOptions o;
  o.until = 1.0;
  o.size_cap = 10000;
  for (int r = 0; r < 200; ++r) {
    const auto tr = run_conditioned(rng, kern, o);
    REQUIRE(tr.explosions.size() == 1);
    CHECK(tr.explosions.front() == 1.0);
  }
  // size at s close to t is large with high probability
  ConditionedOptions late;
  late.until = 0.999;
  std::size_t big = 0;
  for (int r = 0; r < 500; ++r) {
    const auto tr = run_conditioned(rng, kern, late);
    const auto s = tr.size_at(0.999);
    big += !s || *s > 1000;
  }
  CHECK(big > 400);
  // survive_past continues with free dynamics after t
  ConditionalKernel sk{0.0, 0.5, ConditionMode::survive_past, false};
  ConditionedOptions past;
  past.until = 40.0;
  past.size_cap = 1000;
  std::size_t with_explosion = 0;
  for (int r = 0; r < 100; ++r) {
    const auto tr = run_conditioned(rng, sk, past);
    CHECK(tr.valid());
    if (!tr.explosions.empty()) {
      ++with_explosion;
      CHECK(tr.explosions.front() > 0.5);
    }
  }
  CHECK(with_explosion > 90);
}

TEST_CASE("sample_jump_sum matches summed draws") {
  Rng rng(108);
  for (std::uint64_t n : {1ull, 3ull, 40ull}) {
    std::vector<double> a(20000), b(20000);
    for (auto& v : a) v = static_cast<double>(sample_jump_sum(n, rng));
    for (auto& v : b) {
      std::uint64_t s = 0;
      for (std::uint64_t i = 0; i < n; ++i) s += sample_cluster_size(rng);
      v = static_cast<double>(s);
    }
    // compare on a log scale through a fixed set of quantile bins
    std::vector<double> edges;
    std::vector<double> sorted = b;
    std::sort(sorted.begin(), sorted.end());
    for (int q = 1; q < 10; ++q) edges.push_back(sorted[sorted.size() * q / 10]);
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<std::uint64_t> ca(edges.size() + 1, 0), cb(edges.size() + 1, 0);
    for (double v : a) ++ca[std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()];
    for (double v : b) ++cb[std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()];
    CHECK(chi_square_homogeneity(ca, cb).pass);
  }
  CHECK(sample_jump_sum(0, rng) == 0);
}

TEST_CASE("jumps to exceed n") {
  Rng rng(109);
  for (int r = 0; r < 100; ++r) CHECK(sample_jumps_to_exceed(1, rng) == 1);
  // independent oracle: dynamic programming over sizes <= n
  const std::uint64_t n = 30;
  std::vector<double> w(n + 1);
  for (std::uint64_t k = 1; k <= n; ++k) w[k] = cluster_size_pmf_real(k);
  std::vector<double> f(n + 1, 0.0);  // P(size = s, not yet exceeded)
  f[1] = 1.0;
  for (std::uint64_t m = 1; m <= n; ++m) {
    std::vector<double> g(n + 1, 0.0);
    for (std::uint64_t s = 1; s <= n; ++s)
      for (std::uint64_t j = 1; s + j <= n; ++j) g[s + j] += f[s] * w[j];
    f = g;
    const double alive = std::accumulate(f.begin(), f.end(), 0.0);
    CHECK(jumps_to_exceed_cdf(n, m) == doctest::Approx(1.0 - alive).epsilon(1e-10));
  }
  CHECK(jumps_to_exceed_cdf(5, 0) == 0.0);
  const auto j = jumps_to_exceed(400, rng, 20000);
  for (std::uint64_t m : {5ull, 15ull, 30ull}) {
    const double emp =
        static_cast<double>(std::count_if(j.begin(), j.end(), [m](auto x) { return x <= m; })) /
        static_cast<double>(j.size());
    const double p = jumps_to_exceed_cdf(400, m);
    CHECK(std::fabs(emp - p) < 4.0 * std::sqrt(p * (1 - p) / 20000.0) + 1e-9);
  }
  // the finite-n value approaches erf(alpha/2)
  CHECK(jumps_to_exceed_cdf(1'000'000, 1000) == doctest::Approx(special::erf(0.5)).epsilon(2e-3));
}

TEST_CASE("explosion scaling statistics") {
  Rng rng(110);
  const std::vector<double> cps{0.5, 2.0};
  std::vector<double> from_trace, exact, leap;
  GrowthOptions o;
  o.size_cap = 1'000'000;
  std::size_t doubling_runs = 0;
  for (int r = 0; r < 4000; ++r) {
    const auto tr = run_growth(rng, o);
    const auto st = explosion_scaling_stats(tr, cps);
    if (st.statistic[1]) from_trace.push_back(*st.statistic[1]);
    doubling_runs += st.doublings > 0;
    CHECK(st.path.front().first == 0.0);
  }
  CHECK(doubling_runs > 3000);
  for (int r = 0; r < 4000; ++r) exact.push_back(sample_scaling_statistics(rng, cps)[1]);
  CHECK(ks_two_sample(from_trace, exact).pass);
  // leaping against exact jump-by-jump at a checkpoint deep enough to leap;
  // the exact sampler's cost is heavy tailed in tau, so tau stays moderate
  const std::vector<double> deep{4.0};
  ScalingOptions lo;
  lo.leap_tolerance = 0.1;
  exact.clear();
  for (int r = 0; r < 3000; ++r) exact.push_back(sample_scaling_statistics(rng, deep)[0]);
  for (int r = 0; r < 3000; ++r) leap.push_back(sample_scaling_statistics(rng, deep, lo)[0]);
  CHECK(ks_two_sample(exact, leap).pass);
  // at tau = 0 the statistic is t_inf itself
  std::vector<double> zero;
  for (int r = 0; r < 5000; ++r) zero.push_back(sample_scaling_statistics(rng, std::vector<double>{0.0})[0]);
  CHECK(ks_test(zero, t_inf_cdf).pass);
}

TEST_CASE("finite-k rescaled explosion time") {
  Rng rng(111);
  const std::uint64_t k = 200;
  std::vector<double> x(20000);
  for (auto& v : x) {
    const double th = sample_explosion_time(k, rng);
    v = 0.25 * th * th * static_cast<double>(k);
  }
  auto finite = [&](double y) {
    return y <= 0 ? 0.0 : 1.0 - std::pow(1.0 / std::cosh(std::sqrt(y / double(k))), 2.0 * double(k));
  };
  CHECK(ks_test(x, finite).pass);
  double bound = 0.0;
  for (double y = 0.0; y < 20.0; y += 0.01) bound = std::max(bound, std::fabs(finite(y) + std::expm1(-y)));
  CHECK(bound < 0.01);
  CHECK(ks_test(x, [](double y) { return y <= 0 ? 0.0 : -std::expm1(-y); }, 1e-3).statistic <
        bound + 1.95 / std::sqrt(double(x.size())));
}

TEST_CASE("reverse logging") {
  Rng rng(112);
  MgwOptions o;
  o.cap = 200;
  for (int r = 0; r < 200; ++r) {
    const auto t = sample_mgw(rng, o);
    if (!t) continue;
    const auto same = reverse_logging(*t, 0.0);
    CHECK(same.size() == t->size());
    CHECK(same.legal());
    CHECK(canonical_code(same.tree) == canonical_code(t->tree));
    if (t->size() < 2) continue;
    double youngest = 1e300;
    for (std::size_t v = 1; v < t->size(); ++v) youngest = std::min(youngest, t->edge_age[v]);
    const auto cut = reverse_logging(*t, std::nextafter(youngest, 1e300));
    CHECK(cut.size() < t->size());
    CHECK(cut.legal());
    // exactly one subtree is split off: the remaining vertices form the root side
  }
  CHECK_THROWS(reverse_logging(AgedTree{}, 1.0));
  // rewinding the spinal tree for x1 with root age t by s gives the spinal
  // tree for x1 + s with root age t - s
  const double t = 2.0, x1 = 0.1, sh = 0.4;
  SpinalOptions a;
  a.root_age = t;
  a.max_spine = 4000;
  a.cap = 100000;
  SpinalOptions b;
  b.root_age = t - sh;
  b.cap = 100000;
  std::vector<std::uint64_t> ca(9, 0), cb(9, 0), da(6, 0), db(6, 0);
  std::size_t truncated = 0;
  for (int r = 0; r < 8000; ++r) {
    const auto h = sample_spinal(x1, rng, a);
    truncated += h.truncated;
    const auto rw = reverse_logging(h, sh);
    const auto direct = sample_spinal(x1 + sh, rng, b);
    ++ca[std::min<std::size_t>(rw.aged.size(), 9) - 1];
    ++cb[std::min<std::size_t>(direct.aged.size(), 9) - 1];
    ++da[std::min<std::size_t>(degree(rw.aged.tree, 0), 5)];
    ++db[std::min<std::size_t>(degree(direct.aged.tree, 0), 5)];
  }
  CHECK(truncated == 0);
  CHECK(chi_square_homogeneity(ca, cb).pass);
  CHECK(chi_square_homogeneity(da, db).pass);
}
