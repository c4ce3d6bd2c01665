#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssc/rng.hpp"
#include "ssc/stattest.hpp"
#include "ssc/tree.hpp"

namespace ssc {

// A potential ignition at absolute time t with mark y. It ignites the leaf iff
// y < t - (time of the leaf's last burn before t).
struct IgnitionPoint {
  double t = 0.0;
  double y = 0.0;
};

struct FfhVertex {
  std::vector<std::int64_t> path;   // integer string; empty for the root
  std::int32_t parent = -1;         // index into FfhState::vertices
  double alpha = 0.0;               // arrival time of the edge to the parent (minus its age at 0)
  bool edge_burned = false;         // edge to the parent
  double initial_age = 0.0;         // a_0(v)
  double last_burn = 0.0;           // -a_0(v) until the first burn
  std::vector<std::int32_t> children;  // increasing child index
  std::vector<IgnitionPoint> ignitions;  // height-h vertices only, increasing t

  std::size_t depth() const { return path.size(); }
};

// Truncated infinite forest fire on strings of length <= h, materialised for
// every vertex that can join the root's component by time `horizon`.
struct FfhState {
  std::size_t h = 0;
  double horizon = 0.0;
  double clock = 0.0;
  std::uint64_t seed = 0;
  std::vector<FfhVertex> vertices;  // index 0 is the root

  double vertex_age(std::int32_t v) const { return clock - vertices[v].last_burn; }
  bool edge_live(std::int32_t v, double t) const;  // edge from v to its parent
  // Live component of v at the current clock, v first.
  std::vector<std::int32_t> live_component(std::int32_t v) const;
  // Live cluster of the root as a rooted tree (root 0).
  RootedTree root_cluster() const;
  std::size_t max_live_degree() const;
  std::string label(std::int32_t v) const;  // "1.-2.0", "" for the root
};

// Live_0 from independent H samples glued along strings (children by
// increasing edge age at -1, -2, ...), future children at 0, 1, ... from unit
// rate arrivals, ignition points for the height-h vertices. Every random
// ingredient comes from a per-vertex substream, so a larger horizon extends
// the same realisation.
FfhState ffh_init(std::size_t h, std::uint64_t seed, double horizon);

struct FireEvent {
  double time = 0.0;
  std::int32_t leaf = 0;
  std::size_t size = 0;       // vertices in the burned component
  std::size_t min_depth = 0;  // smallest height in the component
  bool root_burned = false;
};

// Processes all ignitions in (clock, T] and leaves the clock at T.
std::vector<FireEvent> ffh_run(FfhState& state, double T);

// First two burn times of the root, rebuilding the same realisation with a
// doubled horizon until both are observed.
std::pair<double, double> ffh_first_root_burns(std::size_t h, std::uint64_t seed, double horizon = 4.0);

// First ignition time t >= alpha of a height-h vertex, judged valid against
// the vertex's own burns before alpha only; +inf if none within the horizon.
double a_priori_burning_time(const FfhVertex& leaf, double alpha);

struct FfhProjection {
  FfhState state;  // height h - 1; leaves carry the projected points
  // (alpha, Theta) for every edge to height h that is future at time 0
  std::vector<std::pair<double, double>> future_edges;
};

// Height h - 1 restriction of a state at clock 0 whose leaves get the points
// (Theta(e), Theta(e) - alpha(e)) of their edges to height h.
FfhProjection ffh_project(const FfhState& state);

// Mean number of points of the projected process in r for a vertex of age a0:
// integral over r of 1(y < a0 + t) (1/2) sech^2(y/2).
double ignition_rect_mean(double a0, const Rect& r);

}  // namespace ssc
