#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ssc/rational.hpp"
#include "ssc/tree.hpp"

namespace ssc {

inline constexpr std::size_t kMaxEnumSize = 12;

struct TreeClass {
  RootedTree tree;
  std::string code;   // canonical code, also the sort key
  Rational mass;      // W_0 of the class
};

// One representative per isomorphism class of rooted trees on n vertices,
// sorted by canonical code. Built once for all n <= kMaxEnumSize.
const std::vector<TreeClass>& tree_classes(std::size_t n);
std::vector<RootedTree> enumerate_rooted_trees(std::size_t n);

Rational fixed_point_mass(const RootedTree& t);
Rational fixed_point_mass(const std::string& code);

using MassFunction = std::function<Rational(const std::string& code)>;

// |T| W(T) minus the rate of entry into T; zero for the true masses.
Rational stationary_balance_residual(const RootedTree& t);
Rational stationary_balance_residual(const RootedTree& t, const MassFunction& mass);

// Automorphism-orbit multiplicities of rooting: for each rooted class of the
// unrooted tree underlying t, the number of vertices that root it that way.
std::vector<std::pair<std::string, std::size_t>> rooting_orbits(const RootedTree& t);

void write_class_table(std::ostream& out, std::size_t max_n);

// ---- age densities ---------------------------------------------------------

double aged_tree_density(const AgedTree& at);
// edge ages integrated out
double vertex_age_density(const RootedTree& t, std::span<const double> vertex_age);
// vertex ages integrated out
double edge_age_density(const RootedTree& t, std::span<const double> edge_age);

// Product formula for the density of the sorted vertex ages of H (sorted,
// strictly increasing input; throws otherwise).
double age_vector_density(std::span<const double> ages);
// The polynomial factor prod_j ((k-j+1) a_j + sum_{m<j} a_m).
double age_polynomial(std::span<const double> ages);
Rational age_polynomial(std::span<const Rational> ages);

// Sum over labelled spanning trees of K_k of prod_{ij} min(a_i, a_j).
double kirchhoff_total_weight(std::span<const double> ages);
Rational kirchhoff_total_weight(std::span<const Rational> ages);
double spanning_tree_sum_bruteforce(std::span<const double> ages);  // k <= 8

// Integral of age_vector_density over the chamber 0 < a_1 < ... < a_k, via
// the substitution to partial sums u_i.
Rational chamber_mass(std::size_t k);

}  // namespace ssc
