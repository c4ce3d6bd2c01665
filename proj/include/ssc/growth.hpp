#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssc/closed_forms.hpp"
#include "ssc/rng.hpp"
#include "ssc/samplers.hpp"
#include "ssc/tree.hpp"

namespace ssc {

inline constexpr std::uint64_t kDefaultGrowthCap = 1'000'000;

enum class EventKind : std::uint8_t { jump, explosion };

struct GrowthEvent {
  double time = 0.0;
  EventKind kind = EventKind::jump;
  std::uint64_t jump_size = 0;   // 0 for explosions
  std::uint64_t size_after = 1;
};

// Size trajectory of a tagged cluster. Between a cap hit and the following
// explosion the path is not materialised; the explosion time itself is exact
// (drawn from the residual law at the cap state). Those intervals are listed
// in tail_segments and size queries inside them return nullopt.
struct EventTrace {
  std::vector<GrowthEvent> events;
  std::vector<double> explosions;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::uint64_t initial_size = 1;
  std::vector<std::pair<double, double>> tail_segments;
  bool capped = false;
  double truncation_residual = 0.0;  // Doob rate truncation; the sampler is exact
  std::optional<RootedTree> snapshot;
  bool structure_aborted = false;

  std::optional<std::uint64_t> size_at(double time) const;
  // time of the last explosion at or before `time`, or t_begin
  double last_reset(double time) const;
  std::optional<double> next_explosion(double time) const;
  std::size_t jumps_since_reset(double time) const;
  std::vector<double> holding_times() const;
  bool valid() const;
};

enum class StopRule { explosion, horizon, size_cap };

struct GrowthOptions {
  std::uint64_t init_size = 1;
  StopRule stop = StopRule::explosion;
  double horizon = std::numeric_limits<double>::infinity();
  std::uint64_t size_cap = kDefaultGrowthCap;
  // Structural mode: every jump of size j attaches a copy of C given |C| = j
  // at a uniform vertex, and the tree at snapshot_time is kept.
  bool structural = false;
  std::size_t structure_cap = 100'000;
  std::optional<double> snapshot_time;
};

EventTrace run_growth(Rng& rng, const GrowthOptions& opts = {});

// Size-biased t_inf: cdf tanh(x/2) - (x/2) sech^2(x/2).
double sample_size_biased_t_inf(Rng& rng);

struct StationaryOptions {
  double window = 1.0;  // trace covers [start of the cycle straddling 0, window]
  std::uint64_t size_cap = kDefaultGrowthCap;
  bool structural = false;
  std::size_t structure_cap = 100'000;
  double snapshot_time = 0.0;
};

EventTrace run_stationary(Rng& rng, const StationaryOptions& opts = {});

struct ConditionedOptions {
  std::uint64_t init_size = 1;    // ignored for stationary kernels
  std::optional<double> until;    // default: kern.s
  std::uint64_t size_cap = kDefaultGrowthCap;
};

// Doob-conditioned size dynamics on [0, until]. survive_past: rates
// k w_j sech^{2j}((t-u)/2) before t, free dynamics after. explode_at: rates
// (k+j) w_j sech^{2j}((t-u)/2), explosion exactly at t.
EventTrace run_conditioned(Rng& rng, const ConditionalKernel& kern,
                           const ConditionedOptions& opts = {});

// Initial size of a stationary run conditioned as in kern, at time 0.
std::uint64_t sample_conditioned_initial_size(const ConditionalKernel& kern, Rng& rng);

// Sum of n i.i.d. w-distributed jumps: n + Poisson(G^2 / (2 Z^2)), G ~ Gamma(n).
std::uint64_t sample_jump_sum(std::uint64_t n, Rng& rng);

// ---- explosion scaling -------------------------------------------------------

struct ScalingStats {
  std::vector<double> checkpoints;               // tau values
  std::vector<std::optional<double>> statistic;  // sqrt(|C|) (t_inf - t(tau))
  std::vector<std::uint64_t> size;               // |C| at each reached checkpoint
  std::vector<std::pair<double, double>> path;   // (tau, log size) after each jump
  std::size_t doublings = 0;                     // jumps with size > 2 * previous size
  std::vector<std::string> skipped;
};

// Works on a single-cycle trace from run_growth (explosion stop).
ScalingStats explosion_scaling_stats(const EventTrace& trace, std::span<const double> checkpoints);

struct ScalingOptions {
  // Relative tolerance of the leaping clock; 0 simulates every jump.
  double leap_tolerance = 0.0;
};

// Checkpoint statistics of one trajectory from a singleton, without storing the
// path. With leap_tolerance = eps > 0, once eps * sqrt(size) >= 2 jumps are
// taken in blocks of floor(eps * sqrt(size)) whose sum is drawn exactly; the
// block's holding times are all charged at the block's starting size.
std::vector<double> sample_scaling_statistics(Rng& rng, std::span<const double> checkpoints,
                                              const ScalingOptions& opts = {});

// ---- jump counts ---------------------------------------------------------------

// J_n: number of w-jumps from size 1 until the size strictly exceeds n.
std::uint64_t sample_jumps_to_exceed(std::uint64_t n, Rng& rng);
std::vector<std::uint64_t> jumps_to_exceed(std::uint64_t n, Rng& rng, std::size_t replicas);
// P(J_n <= m) exactly, from P(J_n > m) = 2 P(Bin(N, 1/2) <= (N - m)/2), N = 2n - m - 1.
double jumps_to_exceed_cdf(std::uint64_t n, std::uint64_t m);

// ---- reverse logging -----------------------------------------------------------

// Deletes edges of age < s, keeps the root component, subtracts s from all ages.
AgedTree reverse_logging(const AgedTree& t, double s);
// Same for a spinal tree; the spine keeps its surviving prefix and the result
// counts as truncated only if the input was and the whole spine survived.
SpinalTree reverse_logging(const SpinalTree& t, double s);

}  // namespace ssc
