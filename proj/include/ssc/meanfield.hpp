#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "ssc/growth.hpp"
#include "ssc/rng.hpp"

namespace ssc {

enum class MfEventKind : std::uint8_t { edge, burn };

struct MfEvent {
  double time = 0.0;
  MfEventKind kind = MfEventKind::edge;
  std::uint32_t a = 0;  // edge endpoint, or the struck vertex
  std::uint32_t b = 0;  // other edge endpoint; unused for burns
};

// Mean-field forest fire on n vertices: every absent edge appears at rate 1/n,
// every vertex is struck at rate lambda and a strike removes all edges of its
// component.
class MfState {
 public:
  explicit MfState(std::uint32_t n, double lambda = 0.0);

  std::uint32_t n() const { return n_; }
  double lambda() const { return lambda_; }
  double clock() const { return clock_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::uint32_t component_size(std::uint32_t v) const;
  const std::vector<std::uint32_t>& component_members(std::uint32_t v) const;
  bool has_edge(std::uint32_t u, std::uint32_t v) const;
  double vertex_age(std::uint32_t v) const { return clock_ - last_burn_[v]; }
  // number of components of each size, index = size
  const std::vector<std::uint32_t>& size_counts() const { return counts_; }
  std::uint32_t largest_component() const;

  // Returns false (and changes nothing) if the edge is present or u == v.
  bool add_edge(std::uint32_t u, std::uint32_t v);
  // Removes every edge of v's component; returns the burned size.
  std::uint32_t burn(std::uint32_t v);
  void set_clock(double t) { clock_ = t; }
  void apply(const MfEvent& e);

  // Full recomputation of the partition from the edge set.
  bool valid() const;

 private:
  static std::uint64_t key(std::uint32_t u, std::uint32_t v);
  void resize_count(std::uint32_t size, int delta);

  std::uint32_t n_;
  double lambda_;
  double clock_ = 0.0;
  std::vector<std::vector<std::uint32_t>> adj_;
  std::unordered_set<std::uint64_t> edges_;
  std::vector<std::uint32_t> comp_;
  std::vector<std::vector<std::uint32_t>> members_;
  std::vector<std::uint32_t> free_ids_;
  std::vector<double> last_burn_;
  std::vector<std::uint32_t> counts_;
};

// v_k = (vertices in components of size k) / n, index k - 1, up to the largest size.
std::vector<double> empirical_size_distribution(const MfState& s);
// sup over all k >= 1 of |v_k - w_k|.
double sup_distance_to_w(const MfState& s);

struct MfSnapshot {
  double time = 0.0;
  std::vector<double> v;
  double sup_distance = 0.0;
  std::size_t edges = 0;
  std::uint32_t largest = 0;
};

struct MfOptions {
  double horizon = 1.0;
  std::vector<double> snapshot_times;  // sorted, within [start clock, horizon]
  bool record_events = false;
};

struct MfRun {
  std::vector<MfEvent> events;
  std::vector<MfSnapshot> snapshots;
  std::size_t proposals = 0;
  std::size_t rejected = 0;
  std::size_t burns = 0;
};

// Event-exact simulation from `state` (advanced in place) until opts.horizon.
MfRun mf_run(MfState& state, Rng& rng, const MfOptions& opts);
// Same, from the empty graph at time 0.
MfRun mf_run(std::uint32_t n, double lambda, Rng& rng, const MfOptions& opts);

// Component-size trace of `vertex` obtained by replaying `events` from the
// empty graph on n vertices at time t_begin; burns of its component are
// explosions.
EventTrace tagged_trace(std::span<const MfEvent> events, std::uint32_t n, std::uint32_t vertex,
                        double t_begin, double t_end);

}  // namespace ssc
