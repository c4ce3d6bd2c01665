#include "doctest.h"
#include "ssc/closed_forms.hpp"
#include "ssc/exact_enum.hpp"
#include "ssc/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

using namespace ssc;

namespace {

RootedTree path_rooted_at(std::size_t n, Vertex root) {
  RootedTree t;
  t.parent.assign(n, kNoParent);
  for (std::size_t v = 1; v < n; ++v) t.parent[v] = static_cast<Vertex>(v - 1);
  return reroot(t, root);
}

RootedTree star_rooted_at(std::size_t leaves, bool at_center) {
  RootedTree t;
  t.parent.assign(leaves + 1, 0);
  t.parent[0] = kNoParent;
  return at_center ? t : reroot(t, 1);
}

}  // namespace

TEST_CASE("class counts") {
  const std::size_t expected[] = {0, 1, 1, 2, 4, 9, 20, 48, 115, 286, 719, 1842, 4766};
  for (std::size_t n = 1; n <= kMaxEnumSize; ++n) CHECK(tree_classes(n).size() == expected[n]);
  CHECK_THROWS(tree_classes(13));
  CHECK_THROWS(tree_classes(0));
  const auto& c5 = tree_classes(5);
  CHECK(std::is_sorted(c5.begin(), c5.end(), [](auto& a, auto& b) { return a.code < b.code; }));
}

TEST_CASE("small masses") {
  CHECK(fixed_point_mass(RootedTree::singleton()) == Rational(1, 2));
  CHECK(fixed_point_mass(path_rooted_at(2, 0)) == Rational(1, 8));
  CHECK(fixed_point_mass(path_rooted_at(3, 1)) == Rational(1, 48));
  CHECK(fixed_point_mass(path_rooted_at(3, 0)) == Rational(1, 24));
  CHECK(fixed_point_mass(path_rooted_at(4, 0)) == Rational(11, 768));
  CHECK(fixed_point_mass(path_rooted_at(4, 1)) == Rational(11, 768));
  CHECK(fixed_point_mass(star_rooted_at(3, false)) == Rational(1, 128));
  CHECK(fixed_point_mass(star_rooted_at(3, true)) == Rational(1, 384));
}

TEST_CASE("mass sums equal w_k") {
  for (std::size_t n = 1; n <= kMaxEnumSize; ++n) {
    Rational sum = 0;
    for (const auto& c : tree_classes(n)) sum += c.mass;
    CHECK(sum == cluster_size_pmf(n));
  }
}

TEST_CASE("stationary balance") {
  CHECK(stationary_balance_residual(path_rooted_at(2, 0)) == 0);
  for (std::size_t n = 2; n <= 6; ++n)
    for (const auto& c : tree_classes(n)) CHECK(stationary_balance_residual(c.tree) == 0);
  const auto target = canonical_code(path_rooted_at(3, 0));
  MassFunction perturbed = [&](const std::string& code) {
    Rational m = fixed_point_mass(code);
    if (code == target) m += Rational(1, 1000);
    return m;
  };
  CHECK(stationary_balance_residual(path_rooted_at(3, 0), perturbed) != 0);
  CHECK_THROWS(stationary_balance_residual(RootedTree::singleton()));
}

TEST_CASE("re-root invariance: masses proportional to rooting orbits") {
  for (std::size_t n = 2; n <= 6; ++n) {
    for (const auto& c : tree_classes(n)) {
      const auto orbits = rooting_orbits(c.tree);
      const Rational per_vertex = fixed_point_mass(orbits.front().first) / orbits.front().second;
      for (const auto& [code, count] : orbits) CHECK(fixed_point_mass(code) == per_vertex * count);
    }
  }
  // 4-star centre : leaf = 1 : 3
  CHECK(fixed_point_mass(star_rooted_at(3, true)) * 3 == fixed_point_mass(star_rooted_at(3, false)));
}

TEST_CASE("class table csv") {
  std::ostringstream out;
  write_class_table(out, 3);
  CHECK(out.str() == "n,canonical_code,mass_num,mass_den\n1,80,1,2\n2,c0,1,8\n3,e0,1,24\n3,d0,1,48\n");
}

TEST_CASE("aged tree densities") {
  AgedTree single;
  single.vertex_age = {0.7};
  CHECK(aged_tree_density(single) == doctest::Approx(0.5 * std::exp(-0.7)));
  AgedTree pair;
  pair.tree.parent = {kNoParent, 0};
  pair.vertex_age = {1.2, 0.8};
  pair.edge_age = {0.0, 0.3};
  CHECK(aged_tree_density(pair) == doctest::Approx(0.25 * std::exp(-2.0)));
  pair.edge_age[1] = 0.9;
  CHECK(aged_tree_density(pair) == 0.0);
  const std::vector<double> va{1.2, 0.8};
  CHECK(vertex_age_density(pair.tree, va) == doctest::Approx(0.8 * std::exp(-2.0) / 4.0));
}

TEST_CASE("edge and vertex marginals agree with numerical integration") {
  // 3-path rooted at the middle
  RootedTree t;
  t.parent = {kNoParent, 0, 0};
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const std::vector<double> va{1.1, 0.6, 2.0};
  // integrate the joint density over the two edge ages
  auto inner = [&](double e1) {
    return GK::integrate(
        [&](double e2) {
          AgedTree at{t, va, {0.0, e1, e2}};
          return aged_tree_density(at);
        },
        0.0, std::min(va[0], va[2]), 0, 1e-13);
  };
  const double vm = GK::integrate(inner, 0.0, std::min(va[0], va[1]), 0, 1e-13);
  CHECK(vm == doctest::Approx(vertex_age_density(t, va)).epsilon(1e-10));
  // integrate the joint density over the three vertex ages given edge ages
  const std::vector<double> ea{0.0, 0.4, 0.9};
  auto tail = [](double lo) { return 0.5 * std::exp(-lo); };  // int_lo^inf e^{-a}/2
  const double em = tail(std::max(ea[1], ea[2])) * tail(ea[1]) * tail(ea[2]);
  CHECK(edge_age_density(t, ea) == doctest::Approx(em).epsilon(1e-12));
}

TEST_CASE("age product formula versus matrix-tree and enumeration") {
  {
    const std::vector<double> a{0.5, 1.3};
    CHECK(age_polynomial(a) == doctest::Approx(2 * 0.5));
  }
  {
    const std::vector<double> a{0.5, 1.3, 2.0};
    CHECK(age_polynomial(a) == doctest::Approx(3 * 0.5 * (0.5 + 2 * 1.3)));
  }
  Rng rng(2024);
  for (std::size_t k = 1; k <= 6; ++k) {
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> a(k);
      for (auto& x : a) x = rng.exponential(0.5);
      std::sort(a.begin(), a.end());
      const double poly = age_polynomial(a);
      const double det = static_cast<double>(k) * kirchhoff_total_weight(a);
      const double brute = static_cast<double>(k) * spanning_tree_sum_bruteforce(a);
      CHECK(std::fabs(det - poly) <= 1e-10 * poly);
      CHECK(std::fabs(brute - poly) <= 1e-10 * poly);
    }
  }
  std::vector<Rational> q{Rational(1, 3), Rational(1, 2), Rational(2), Rational(7, 2)};
  CHECK(kirchhoff_total_weight(q) * 4 == age_polynomial(q));
  const std::vector<double> unsorted{1.0, 0.5};
  CHECK_THROWS(age_vector_density(unsorted));
  const std::vector<double> dup{0.5, 0.5};
  CHECK_THROWS(age_vector_density(dup));
}

TEST_CASE("chamber mass equals w_k") {
  for (std::size_t k = 1; k <= 8; ++k) CHECK(chamber_mass(k) == cluster_size_pmf(k));
}

TEST_CASE("chamber integral of the density, k = 2, by quadrature") {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto inner = [](double a1) {
    return GK::integrate(
        [a1](double a2) {
          const double v[] = {a1, a2};
          return a2 > a1 ? age_vector_density(v) : 0.0;
        },
        a1, a1 + 60.0, 0, 1e-13);
  };
  CHECK(GK::integrate(inner, 0.0, 60.0, 0, 1e-13) == doctest::Approx(1.0 / 8).epsilon(1e-9));
}
