#include "doctest.h"
#include "ssc/rng.hpp"
#include "ssc/stattest.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace ssc;

TEST_CASE("chi-square: exact proportions give zero statistic") {
  const std::vector<std::uint64_t> obs{50, 30, 20};
  const std::vector<double> p{0.5, 0.3, 0.2};
  const auto r = chi_square_test(obs, p);
  CHECK(r.statistic == doctest::Approx(0.0));
  CHECK(r.pass);
  CHECK(r.dof == 2);
}

TEST_CASE("chi-square: tail bucket and pooling") {
  const std::vector<std::uint64_t> obs{500, 250, 1, 249};
  const std::vector<double> p{0.5, 0.25, 0.001};
  const auto r = chi_square_test(obs, p);
  CHECK(r.pass);
  CHECK(r.dof == 2);  // the 0.001 cell is pooled into the tail
  const std::vector<std::uint64_t> bad{5};
  const std::vector<double> one{1.0};
  CHECK_THROWS(chi_square_test(bad, one));
  const std::vector<std::uint64_t> mismatch{1, 2};
  CHECK_THROWS(chi_square_test(mismatch, p));
}

TEST_CASE("chi-square: exact small-tree class layout passes") {
  // masses for sizes 1, 2, 3, 3 plus the tail
  const std::vector<double> p{1.0 / 2, 1.0 / 8, 1.0 / 48, 1.0 / 24};
  const std::uint64_t n = 480000;
  std::vector<std::uint64_t> obs;
  double used = 0;
  for (double q : p) {
    obs.push_back(static_cast<std::uint64_t>(q * n));
    used += q;
  }
  obs.push_back(static_cast<std::uint64_t>((1.0 - used) * n + 0.5));
  CHECK(chi_square_test(obs, p).pass);
}

TEST_CASE("chi-square: power and thresholds") {
  const std::vector<std::uint64_t> obs{600, 400};
  const std::vector<double> p{0.5, 0.5};
  CHECK_FALSE(chi_square_test(obs, p).pass);
  CHECK(chi_square_test(std::vector<std::uint64_t>{5, 5}, p, 0.05).threshold == doctest::Approx(3.841).epsilon(1e-3));
}

TEST_CASE("homogeneity") {
  const std::vector<std::uint64_t> a{100, 200, 300}, b{210, 390, 600}, c{300, 200, 100};
  CHECK(chi_square_homogeneity(a, b).pass);
  CHECK_FALSE(chi_square_homogeneity(a, c).pass);
}

TEST_CASE("KS one-sample") {
  Rng rng(1);
  std::vector<double> x(100000);
  for (auto& v : x) v = rng.exponential(1.0);
  auto exp1 = [](double t) { return t <= 0 ? 0.0 : -std::expm1(-t); };
  auto exp2 = [](double t) { return t <= 0 ? 0.0 : -std::expm1(-2.0 * t); };
  CHECK(ks_test(x, exp1).pass);
  CHECK_FALSE(ks_test(x, exp2).pass);
  // empirical cdf of the sample itself
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  auto ecdf = [&](double t) {
    const auto k = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    return (static_cast<double>(k) - 0.5) / static_cast<double>(sorted.size());
  };
  const auto self = ks_test(x, ecdf);
  CHECK(self.statistic == doctest::Approx(0.5 / x.size()));
  CHECK(self.pass);
  auto bad = [](double t) { return std::fmod(t, 1.0); };
  CHECK_THROWS(ks_test(x, bad));
  CHECK_THROWS(ks_test(std::vector<double>(5, 1.0), exp1));
}

TEST_CASE("KS two-sample") {
  Rng rng(2);
  std::vector<double> a(20000), b(20000), c(20000);
  for (auto& v : a) v = rng.exponential(1.0);
  for (auto& v : b) v = rng.exponential(1.0);
  for (auto& v : c) v = rng.exponential(1.3);
  CHECK(ks_two_sample(a, b).pass);
  CHECK_FALSE(ks_two_sample(a, c).pass);
}

namespace {

// unit-intensity PRM on [0,4)^2 split into unit squares, R replicates
void simulate_field(double rate, std::size_t reps, Rng& rng, std::vector<std::vector<double>>& means,
                    std::vector<std::vector<std::uint64_t>>& counts, double claimed) {
  std::vector<Rect> rects;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rects.push_back({double(i), i + 1.0, double(j), j + 1.0});
  for (std::size_t r = 0; r < reps; ++r) {
    const auto n = std::poisson_distribution<int>(16.0 * rate)(rng);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(4.0 * rng.uniform(), 4.0 * rng.uniform());
    counts.push_back(count_in_rects(pts, rects));
    means.emplace_back(rects.size(), claimed);
  }
}

}  // namespace

TEST_CASE("Poisson field test") {
  Rng rng(3);
  {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<std::uint64_t>> c;
    simulate_field(1.0, 200, rng, m, c, 1.0);
    CHECK(poisson_field_test(m, c).pass);
  }
  {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<std::uint64_t>> c;
    simulate_field(2.0, 200, rng, m, c, 1.0);
    CHECK_FALSE(poisson_field_test(m, c).pass);
  }
  {
    std::vector<std::vector<double>> m{{0.0, 0.0}};
    std::vector<std::vector<std::uint64_t>> c{{0, 0}};
    CHECK(poisson_field_test(m, c).pass);
    c[0][1] = 1;
    CHECK_FALSE(poisson_field_test(m, c).pass);
  }
  {
    // perfectly correlated cells
    std::vector<std::vector<double>> m;
    std::vector<std::vector<std::uint64_t>> c;
    for (int r = 0; r < 400; ++r) {
      const auto k = std::poisson_distribution<int>(3.0)(rng);
      c.push_back({std::uint64_t(k), std::uint64_t(k)});
      m.push_back({3.0, 3.0});
    }
    CHECK_FALSE(poisson_field_test(m, c).pass);
  }
  std::vector<std::vector<double>> empty_m{{}};
  std::vector<std::vector<std::uint64_t>> empty_c{{}};
  CHECK_THROWS(poisson_field_test(empty_m, empty_c));
}

TEST_CASE("two-seed rule and reports") {
  int calls = 0;
  auto gate = [&](std::uint64_t seed) {
    ++calls;
    TestReport r;
    r.name = "g";
    r.pass = seed == 2;
    return r;
  };
  const auto r = with_second_seed(gate, 1, 2);
  CHECK(r.pass);
  CHECK(r.seed == 2);
  CHECK(calls == 2);
  CHECK(to_json_line(r).find("\"pass\":true") != std::string::npos);
  std::ostringstream md;
  write_markdown(md, std::vector<TestReport>{r});
  CHECK(md.str().find("PASS") != std::string::npos);
}
