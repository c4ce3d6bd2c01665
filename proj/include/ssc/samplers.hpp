#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ssc/rng.hpp"
#include "ssc/tree.hpp"

namespace ssc {

inline constexpr std::size_t kDefaultSizeCap = 10'000'000;
// Sizes drawn from w beyond this are reported as this value.
inline constexpr std::uint64_t kSizeSaturation = std::uint64_t{1} << 62;

// ---- scalar laws -----------------------------------------------------------

// X ~ w by inversion of the hitting probabilities: X = max{n : p_n >= U}.
std::uint64_t sample_cluster_size(Rng& rng);
// root age ~ pi, density (1/2) sech^2(x/2)
double sample_stationary_age(Rng& rng);
// Y with P(Y > y) = (1 - tanh((x+y)/2)) / (1 - tanh(x/2))
double sample_hx_root_age(double x, Rng& rng);
// t_inf from a singleton: cdf tanh^2(x/2)
double sample_t_inf(Rng& rng);
// residual time to explosion from size k: cdf 1 - sech^{2k}(x/2)
double sample_explosion_time(std::uint64_t k, Rng& rng);

// ---- offspring intensities -------------------------------------------------

// lambda_b^{(x)}(da) = min(b, a) (1/2) sech^2((a+x)/2) da
struct OffspringIntensity {
  double parent_age = 0.0;  // b
  double shift = 0.0;       // x

  double total_mass() const;
  double cumulative(double a) const;   // mass of (0, a]
  double sample_age(Rng& rng) const;   // one point of the normalised measure
};

// Spinal child law: density proportional to min(b,a) sech^2((a+x)/2) tanh((a+x)/2).
struct SpinalChildLaw {
  double parent_age = 0.0;
  double shift = 0.0;

  double total_mass() const;
  double cumulative(double a) const;
  double presence_probability() const;  // 1 - tanh(x/2)/tanh((b+x)/2)
  double sample_age(Rng& rng) const;
};

double sample_spinal_root_age(double x, Rng& rng);

// ---- genealogy and RDE -----------------------------------------------------

// Plane binary tree with nodes in preorder (node 0 is the root). The cluster
// lives on the leaves: leaf_map[g] is the cluster vertex of leaf g, -1 for
// internal nodes; internal node g created the cluster edge edge_of[g], stored
// as the child vertex in the cluster's parent array.
struct GenealogyPair {
  std::vector<std::int32_t> left, right, up;
  std::vector<double> spent_time;
  std::vector<std::uint32_t> leaves_above;
  std::vector<Vertex> leaf_map;
  std::vector<std::pair<Vertex, Vertex>> edge_of;  // endpoints (left leaf, right leaf)
  AgedTree cluster;

  std::size_t node_count() const { return left.size(); }
  std::size_t leaf_count() const { return cluster.size(); }
};

std::optional<GenealogyPair> sample_genealogy_pair(Rng& rng, std::size_t cap = kDefaultSizeCap);
std::optional<RootedTree> sample_rde(Rng& rng, std::size_t cap = kDefaultSizeCap);

// Uniform plane binary tree with k leaves (Remy), decorated as in the genealogy.
GenealogyPair sample_genealogy_given_size(std::size_t k, Rng& rng);
AgedTree sample_cluster_given_size(std::size_t k, Rng& rng);

std::vector<double> sample_age_vector_given_size(std::size_t k, Rng& rng);

// Spanning tree of K_k with probability proportional to prod min(a_i, a_j)
// over its edges (Wilson), rooted at a uniform vertex. Vertex i has age ages[i].
RootedTree sample_weighted_spanning_tree(std::span<const double> ages, Rng& rng);

// ---- multitype Galton-Watson trees ------------------------------------------

struct MgwOptions {
  std::optional<double> root_age;
  std::size_t cap = kDefaultSizeCap;
  std::optional<std::size_t> max_depth;  // vertices at this depth get no offspring
  bool edge_ages = true;
};

// H^{(x)}; x = 0 is H. Vertices are in BFS order.
std::optional<AgedTree> sample_hx(double x, Rng& rng, const MgwOptions& opts = {});
std::optional<AgedTree> sample_mgw(Rng& rng, const MgwOptions& opts = {});

std::vector<std::size_t> generation_sizes(const RootedTree& t);

struct SpinalTree {
  AgedTree aged;
  std::vector<Vertex> spine;  // spine[0] is the root
  bool truncated = false;
};

struct SpinalOptions {
  std::optional<double> root_age;
  std::size_t max_spine = 1000;
  std::size_t cap = kDefaultSizeCap;
  bool edge_ages = true;
};

SpinalTree sample_spinal(double x, Rng& rng, const SpinalOptions& opts = {});

}  // namespace ssc
