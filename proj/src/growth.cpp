#include "ssc/growth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ssc/samplers.hpp"

namespace ssc {

namespace {

double sech2(double y) {
  const double c = std::cosh(y);
  return 1.0 / (c * c);
}

// log sech^2(y) = -2 log cosh(y), stable for large |y|
double log_sech2(double y) {
  y = std::fabs(y);
  return -2.0 * (y + std::log1p(std::exp(-2.0 * y)) - M_LN2);
}

double log_cosh(double y) {
  y = std::fabs(y);
  return y + std::log1p(std::exp(-2.0 * y)) - M_LN2;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return (a >= kSizeSaturation || b >= kSizeSaturation - a) ? kSizeSaturation : a + b;
}

// Poisson draw for means up to the size saturation; above 1e15 the normal
// approximation is used (relative error of order 1e-7.5 in the count).
std::uint64_t poisson_count(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  if (mean >= static_cast<double>(kSizeSaturation)) return kSizeSaturation;
  if (mean < 1e15) {
    return static_cast<std::uint64_t>(std::poisson_distribution<std::int64_t>(mean)(rng));
  }
  const double x = std::round(mean + std::sqrt(mean) * std::normal_distribution<double>()(rng));
  return x >= static_cast<double>(kSizeSaturation) ? kSizeSaturation
                                                   : static_cast<std::uint64_t>(std::max(x, 0.0));
}

// 1 + NegBin(1/2, rho) as a gamma-Poisson mixture; rho = sech^2(v/2), so
// rho / (1 - rho) = 1 / sinh^2(v/2).
std::uint64_t sample_size_biased_jump(double v, Rng& rng) {
  const double sh = std::sinh(0.5 * v);
  const double lambda = std::gamma_distribution<double>(0.5, 1.0)(rng) / (sh * sh);
  return saturating_add(1, poisson_count(lambda, rng));
}

// Residual explosion time from size k given it exceeds v.
double sample_explosion_time_beyond(std::uint64_t k, double v, Rng& rng) {
  const double lc = log_cosh(0.5 * v) - std::log(rng.uniform()) / (2.0 * static_cast<double>(k));
  // acosh(e^lc) = lc + log(1 + sqrt(1 - e^{-2 lc}))
  return 2.0 * (lc + std::log1p(std::sqrt(-std::expm1(-2.0 * lc))));
}

class Simulator {
 public:
  Simulator(EventTrace& tr, Rng& rng, bool structural, std::size_t structure_cap,
            std::optional<double> snapshot_time)
      : tr_(tr), rng_(rng), structure_rng_(rng.fork()), structural_(structural),
        structure_cap_(structure_cap), snapshot_time_(snapshot_time) {}

  void begin(double t0, std::uint64_t k0) {
    now_ = t0;
    size_ = k0;
    tr_.t_begin = t0;
    tr_.initial_size = k0;
    if (structural_) {
      if (k0 == 1) tree_ = RootedTree::singleton();
      else if (k0 <= structure_cap_) tree_ = sample_cluster_given_size(k0, structure_rng_).tree;
      else tree_valid_ = false;
    }
  }

  std::uint64_t size() const { return size_; }
  double now() const { return now_; }

  void finish(double t_end) {
    advance(t_end);
    tr_.t_end = t_end;
  }

  // Unconditioned dynamics until t_stop. With tail_at_cap the explosion time
  // from the cap state is drawn exactly and the cycle ends there; otherwise the
  // run stops at the cap. Returns true if an explosion was recorded.
  bool free_segment(double t_stop, std::uint64_t cap, bool tail_at_cap) {
    for (;;) {
      if (size_ >= cap) {
        tr_.capped = true;
        if (!tail_at_cap) return false;
        const double te = now_ + sample_explosion_time(size_, rng_);
        return tail_then_explode(te, t_stop);
      }
      const double t = now_ + rng_.exponential(static_cast<double>(size_));
      if (t > t_stop) {
        advance(t_stop);
        return false;
      }
      jump(t, sample_cluster_size(rng_));
    }
  }

  // Doob dynamics towards the conditioning time tc.
  bool doob_segment(double tc, ConditionMode mode, double t_stop, std::uint64_t cap) {
    const bool explode = mode == ConditionMode::explode_at;
    for (;;) {
      if (now_ >= tc) {
        if (explode) return explode_now(tc);
        return free_segment(t_stop, cap, true);
      }
      if (size_ >= cap) {
        tr_.capped = true;
        if (explode) return tail_then_explode(tc, t_stop);
        const double te = now_ + sample_explosion_time_beyond(size_, tc - now_, rng_);
        return tail_then_explode(te, t_stop);
      }
      const double v = tc - now_;
      const double a = now_ + rng_.exponential(static_cast<double>(size_));
      double b = std::numeric_limits<double>::infinity();
      if (explode) {
        const double th = std::tanh(0.5 * v) * std::exp(-rng_.exponential(1.0));
        b = tc - 2.0 * std::atanh(th);
      }
      if (!explode && a >= tc) {
        // no accepted proposal before tc; the clocks restart memorylessly there
        if (tc > t_stop) {
          advance(t_stop);
          return false;
        }
        advance(tc);
        continue;
      }
      const double next = std::min(a, b);
      if (next > t_stop) {
        advance(t_stop);
        return false;
      }
      if (a <= b) {
        const std::uint64_t j = sample_cluster_size(rng_);
        const double log_accept = static_cast<double>(j) * log_sech2(0.5 * (tc - a));
        if (std::log(rng_.uniform()) < log_accept) jump(a, j);
        else advance(a);
      } else {
        jump(b, sample_size_biased_jump(tc - b, rng_));
      }
    }
  }

 private:
  bool tail_then_explode(double te, double t_stop) {
    if (te > t_stop) {
      tr_.tail_segments.emplace_back(now_, t_stop);
      lose_structure(t_stop);
      now_ = t_stop;
      return false;
    }
    tr_.tail_segments.emplace_back(now_, te);
    lose_structure(te);
    return explode_now(te);
  }

  bool explode_now(double t) {
    snapshot_before(t);
    now_ = t;
    size_ = 1;
    tr_.events.push_back({t, EventKind::explosion, 0, 1});
    tr_.explosions.push_back(t);
    if (structural_) {
      tree_ = RootedTree::singleton();
      tree_valid_ = true;
    }
    return true;
  }

  void jump(double t, std::uint64_t j) {
    snapshot_before(t);
    now_ = t;
    size_ = saturating_add(size_, j);
    tr_.events.push_back({t, EventKind::jump, j, size_});
    if (structural_ && tree_valid_ && !snapshot_taken_) {
      if (size_ > structure_cap_) {
        tree_valid_ = false;
      } else {
        const auto b = sample_cluster_given_size(static_cast<std::size_t>(j), structure_rng_).tree;
        const auto v = static_cast<Vertex>(structure_rng_.below(tree_.size()));
        const auto offset = static_cast<Vertex>(tree_.size());
        for (Vertex p : b.parent) tree_.parent.push_back(p == kNoParent ? v : p + offset);
      }
    }
  }

  // Moves the clock to t with no change of state.
  void advance(double t) {
    snapshot_before(t, true);
    now_ = t;
  }

  bool snapshot_due(double from, double to, bool inclusive) const {
    if (!structural_ || snapshot_taken_ || !snapshot_time_) return false;
    const double s = *snapshot_time_;
    return s >= from && (inclusive ? s <= to : s < to);
  }

  // The state is about to change at time t; take the snapshot if due in [now, t).
  void snapshot_before(double t, bool inclusive = false) {
    if (!snapshot_due(now_, t, inclusive)) return;
    snapshot_taken_ = true;
    if (tree_valid_) tr_.snapshot = tree_;
    else tr_.structure_aborted = true;
  }

  // The path is not materialised on [now, until).
  void lose_structure(double until) {
    if (snapshot_due(now_, until, false)) {
      snapshot_taken_ = true;
      tr_.structure_aborted = true;
    }
    tree_valid_ = false;
  }

  EventTrace& tr_;
  Rng& rng_;
  Rng structure_rng_;
  bool structural_;
  std::size_t structure_cap_;
  std::optional<double> snapshot_time_;
  bool snapshot_taken_ = false;
  RootedTree tree_;
  bool tree_valid_ = true;
  double now_ = 0.0;
  std::uint64_t size_ = 1;
};

}  // namespace

// ---- EventTrace ----------------------------------------------------------------

std::optional<std::uint64_t> EventTrace::size_at(double time) const {
  if (time < t_begin || time > t_end) return std::nullopt;
  for (const auto& [a, b] : tail_segments) {
    if (time > a && time < b) return std::nullopt;
    // a tail cut off by the end of the run leaves the end state unknown
    if (time == b && !std::binary_search(explosions.begin(), explosions.end(), b)) return std::nullopt;
  }
  std::uint64_t s = initial_size;
  for (const auto& e : events) {
    if (e.time > time) break;
    s = e.size_after;
  }
  return s;
}

double EventTrace::last_reset(double time) const {
  double r = t_begin;
  for (double x : explosions) {
    if (x > time) break;
    r = x;
  }
  return r;
}

std::optional<double> EventTrace::next_explosion(double time) const {
  for (double x : explosions)
    if (x > time) return x;
  return std::nullopt;
}

std::size_t EventTrace::jumps_since_reset(double time) const {
  std::size_t n = 0;
  for (const auto& e : events) {
    if (e.time > time) break;
    if (e.kind == EventKind::explosion) n = 0;
    else ++n;
  }
  return n;
}

std::vector<double> EventTrace::holding_times() const {
  std::vector<double> h;
  h.reserve(events.size());
  double prev = t_begin;
  for (const auto& e : events) {
    h.push_back(e.time - prev);
    prev = e.time;
  }
  return h;
}

bool EventTrace::valid() const {
  double prev = t_begin;
  std::uint64_t s = initial_size;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (i > 0 && !(e.time > prev)) return false;
    if (e.time < t_begin || e.time > t_end) return false;
    if (e.kind == EventKind::explosion) {
      if (e.size_after != 1) return false;
    } else if (e.size_after < s || e.jump_size == 0) {
      return false;
    }
    prev = e.time;
    s = e.size_after;
  }
  return true;
}

// ---- free growth ---------------------------------------------------------------

EventTrace run_growth(Rng& rng, const GrowthOptions& opts) {
  if (opts.init_size < 1) throw std::invalid_argument("run_growth: init_size >= 1");
  if (opts.stop == StopRule::horizon && !std::isfinite(opts.horizon))
    throw std::invalid_argument("run_growth: horizon stop needs a finite horizon");
  EventTrace tr;
  std::optional<double> snap = opts.snapshot_time;
  Simulator sim(tr, rng, opts.structural, opts.structure_cap, snap);
  sim.begin(0.0, opts.init_size);
  switch (opts.stop) {
    case StopRule::explosion:
      sim.free_segment(opts.horizon, opts.size_cap, true);
      break;
    case StopRule::horizon:
      while (sim.now() < opts.horizon) sim.free_segment(opts.horizon, opts.size_cap, true);
      break;
    case StopRule::size_cap:
      sim.free_segment(opts.horizon, opts.size_cap, false);
      break;
  }
  sim.finish(sim.now());
  return tr;
}

double sample_size_biased_t_inf(Rng& rng) {
  const double u = rng.uniform();
  // Newton on F(x) = tanh(x/2) - (x/2) sech^2(x/2), F'(x) = (x/2) sech^2(x/2) tanh(x/2),
  // bracketed by bisection.
  double lo = 0.0, hi = 1.0;
  while (size_biased_t_inf_cdf(hi) < u) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = size_biased_t_inf_cdf(x) - u;
    if (f > 0) hi = x;
    else lo = x;
    const double d = 0.5 * x * sech2(0.5 * x) * std::tanh(0.5 * x);
    double nx = d > 0 ? x - f / d : 0.5 * (lo + hi);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::fabs(nx - x) <= 1e-15 * std::max(1.0, x) || hi - lo <= 1e-15 * hi) return nx;
    x = nx;
  }
  return x;
}

EventTrace run_stationary(Rng& rng, const StationaryOptions& opts) {
  if (!(opts.window > 0.0)) throw std::invalid_argument("run_stationary: window > 0");
  EventTrace tr;
  Simulator sim(tr, rng, opts.structural, opts.structure_cap, opts.snapshot_time);
  const double length = sample_size_biased_t_inf(rng);
  const double start = -rng.uniform() * length;
  const double tc = start + length;
  sim.begin(start, 1);
  const bool exploded =
      sim.doob_segment(tc, ConditionMode::explode_at, std::min(tc, opts.window), opts.size_cap);
  if (exploded)
    while (sim.now() < opts.window) sim.free_segment(opts.window, opts.size_cap, true);
  sim.finish(opts.window);
  return tr;
}

std::uint64_t sample_conditioned_initial_size(const ConditionalKernel& kern, Rng& rng) {
  validate(kern);
  if (!kern.stationary) return 1;
  const double t = kern.t;
  if (kern.mode == ConditionMode::explode_at) return sample_size_biased_jump(t, rng);
  // P(k) proportional to w_k rho^k, rho = sech^2(t/2), normaliser W(rho) = 1 - tanh(t/2)
  const double norm = 1.0 - std::tanh(0.5 * t);
  const double log_rho = log_sech2(0.5 * t);
  if (norm >= 0.25) {
    for (;;) {
      const std::uint64_t k = sample_cluster_size(rng);
      if (std::log(rng.uniform()) < static_cast<double>(k) * log_rho) return k;
    }
  }
  const double rho = std::exp(log_rho);
  double u = rng.uniform() * norm;
  double p = 0.5 * rho;  // w_1 rho
  for (std::uint64_t k = 1;; ++k) {
    if (u <= p || p == 0.0) return k;
    u -= p;
    const double kd = static_cast<double>(k);
    p *= rho * (2.0 * kd - 1.0) / (2.0 * (kd + 1.0));
  }
}

EventTrace run_conditioned(Rng& rng, const ConditionalKernel& kern, const ConditionedOptions& opts) {
  validate(kern);
  const double until = opts.until.value_or(kern.s);
  if (until < 0.0) throw std::invalid_argument("run_conditioned: until >= 0");
  if (kern.mode == ConditionMode::explode_at && until > kern.t)
    throw std::invalid_argument("run_conditioned: explode_at runs end at t");
  if (opts.init_size < 1) throw std::invalid_argument("run_conditioned: init_size >= 1");
  EventTrace tr;
  Simulator sim(tr, rng, false, 0, std::nullopt);
  const std::uint64_t k0 =
      kern.stationary ? sample_conditioned_initial_size(kern, rng) : opts.init_size;
  sim.begin(0.0, k0);
  sim.doob_segment(kern.t, kern.mode, until, opts.size_cap);
  sim.finish(until);
  return tr;
}

std::uint64_t sample_jump_sum(std::uint64_t n, Rng& rng) {
  if (n == 0) return 0;
  const double g = std::gamma_distribution<double>(static_cast<double>(n), 1.0)(rng);
  const double z = std::normal_distribution<double>()(rng);
  return saturating_add(n, poisson_count(g * g / (2.0 * z * z), rng));
}

// ---- explosion scaling -----------------------------------------------------------

ScalingStats explosion_scaling_stats(const EventTrace& trace, std::span<const double> checkpoints) {
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw std::invalid_argument("explosion_scaling_stats: checkpoints must be sorted");
  if (trace.explosions.size() != 1 || trace.t_begin != 0.0)
    throw std::invalid_argument("explosion_scaling_stats: needs a single cycle from time 0");
  ScalingStats st;
  st.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  st.statistic.assign(checkpoints.size(), std::nullopt);
  st.size.assign(checkpoints.size(), 0);
  const double t_inf = trace.explosions.front();
  double tau = 0.0, t = trace.t_begin;
  std::uint64_t k = trace.initial_size;
  std::size_t next = 0;
  st.path.emplace_back(0.0, std::log(static_cast<double>(k)));
  auto cross = [&](double t_event) {
    const double sk = std::sqrt(static_cast<double>(k));
    const double tau_next = tau + sk * (t_event - t);
    while (next < checkpoints.size() && checkpoints[next] < tau_next) {
      const double tc = t + (checkpoints[next] - tau) / sk;
      st.statistic[next] = sk * (t_inf - tc);
      st.size[next] = k;
      ++next;
    }
    tau = tau_next;
    t = t_event;
  };
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::explosion) break;
    // a cap tail starts at the last materialised state
    bool in_tail = false;
    for (const auto& seg : trace.tail_segments)
      if (seg.first < e.time && e.time <= seg.second) in_tail = true;
    if (in_tail) break;
    cross(e.time);
    if (e.size_after > 2 * k) ++st.doublings;
    k = e.size_after;
    st.path.emplace_back(tau, std::log(static_cast<double>(k)));
  }
  if (trace.tail_segments.empty()) {
    cross(t_inf);
  }
  for (std::size_t i = next; i < checkpoints.size(); ++i)
    st.skipped.push_back("tau=" + std::to_string(checkpoints[i]) +
                         " not reached before the size cap");
  return st;
}

std::vector<double> sample_scaling_statistics(Rng& rng, std::span<const double> checkpoints,
                                              const ScalingOptions& opts) {
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw std::invalid_argument("sample_scaling_statistics: checkpoints must be sorted");
  if (opts.leap_tolerance < 0.0) throw std::invalid_argument("leap_tolerance >= 0");
  std::vector<double> times(checkpoints.size());
  std::vector<std::uint64_t> sizes(checkpoints.size());
  double tau = 0.0, t = 0.0;
  std::uint64_t k = 1;
  std::size_t next = 0;
  while (next < checkpoints.size()) {
    const double kd = static_cast<double>(k);
    const double sk = std::sqrt(kd);
    std::uint64_t block = 1;
    if (opts.leap_tolerance > 0.0) {
      const double b = std::floor(opts.leap_tolerance * sk);
      if (b >= 2.0) block = static_cast<std::uint64_t>(b);
    }
    const double hold = block == 1
                            ? rng.exponential(1.0)
                            : std::gamma_distribution<double>(static_cast<double>(block), 1.0)(rng);
    const double tau_next = tau + hold / sk;
    while (next < checkpoints.size() && checkpoints[next] < tau_next) {
      times[next] = t + (checkpoints[next] - tau) / sk;
      sizes[next] = k;
      ++next;
    }
    if (next == checkpoints.size()) break;
    tau = tau_next;
    t += hold / kd;
    k = block == 1 ? saturating_add(k, sample_cluster_size(rng))
                   : saturating_add(k, sample_jump_sum(block, rng));
  }
  std::vector<double> out(checkpoints.size());
  if (checkpoints.empty()) return out;
  const double t_inf = times.back() + sample_explosion_time(sizes.back(), rng);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::sqrt(static_cast<double>(sizes[i])) * (t_inf - times[i]);
  return out;
}

// ---- jump counts -------------------------------------------------------------------

std::uint64_t sample_jumps_to_exceed(std::uint64_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("jumps_to_exceed: n >= 1");
  std::uint64_t k = 1, jumps = 0;
  while (k <= n) {
    k = saturating_add(k, sample_cluster_size(rng));
    ++jumps;
  }
  return jumps;
}

std::vector<std::uint64_t> jumps_to_exceed(std::uint64_t n, Rng& rng, std::size_t replicas) {
  std::vector<std::uint64_t> out(replicas);
  for (auto& j : out) j = sample_jumps_to_exceed(n, rng);
  return out;
}

double jumps_to_exceed_cdf(std::uint64_t n, std::uint64_t m) {
  if (n < 1) throw std::invalid_argument("jumps_to_exceed_cdf: n >= 1");
  if (m == 0) return 0.0;
  if (m >= n) return 1.0;
  const std::int64_t big_n = 2 * static_cast<std::int64_t>(n) - static_cast<std::int64_t>(m) - 1;
  const std::int64_t top = big_n - static_cast<std::int64_t>(m);
  if (top < 0) return 1.0;
  const std::int64_t imax = top / 2;
  // P(Bin(N, 1/2) <= imax), summed from the largest term down
  const double nd = static_cast<double>(big_n);
  const double log_half_n = -nd * M_LN2;
  auto log_term = [&](std::int64_t i) {
    const double id = static_cast<double>(i);
    return std::lgamma(nd + 1.0) - std::lgamma(id + 1.0) - std::lgamma(nd - id + 1.0) + log_half_n;
  };
  double sum = 0.0;
  const double lead = log_term(imax);
  for (std::int64_t i = imax; i >= 0; --i) {
    const double term = std::exp(log_term(i) - lead);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  const double tail = 2.0 * std::exp(lead) * sum;
  return std::clamp(1.0 - tail, 0.0, 1.0);
}

// ---- reverse logging -----------------------------------------------------------------

namespace {

// Returns the kept vertices in BFS order from the root, plus old -> new index.
std::pair<std::vector<Vertex>, std::vector<Vertex>> logging_keep(const AgedTree& t, double s) {
  if (s < 0.0) throw std::invalid_argument("reverse_logging: s >= 0");
  const auto root = static_cast<std::size_t>(t.tree.root);
  if (s > t.vertex_age[root]) throw std::invalid_argument("reverse_logging: s exceeds root age");
  const auto kids = t.tree.children();
  std::vector<Vertex> order{t.tree.root};
  std::vector<Vertex> index(t.size(), -1);
  index[root] = 0;
  for (std::size_t q = 0; q < order.size(); ++q) {
    for (Vertex c : kids[static_cast<std::size_t>(order[q])]) {
      if (t.edge_age[static_cast<std::size_t>(c)] < s) continue;
      index[static_cast<std::size_t>(c)] = static_cast<Vertex>(order.size());
      order.push_back(c);
    }
  }
  return {order, index};
}

AgedTree logging_apply(const AgedTree& t, double s, const std::vector<Vertex>& order,
                       const std::vector<Vertex>& index) {
  AgedTree out;
  out.tree.parent.assign(order.size(), kNoParent);
  out.vertex_age.assign(order.size(), 0.0);
  out.edge_age.assign(order.size(), 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto v = static_cast<std::size_t>(order[i]);
    out.vertex_age[i] = t.vertex_age[v] - s;
    if (i > 0) {
      out.tree.parent[i] = index[static_cast<std::size_t>(t.tree.parent[v])];
      out.edge_age[i] = t.edge_age[v] - s;
    }
  }
  return out;
}

}  // namespace

AgedTree reverse_logging(const AgedTree& t, double s) {
  const auto [order, index] = logging_keep(t, s);
  return logging_apply(t, s, order, index);
}

SpinalTree reverse_logging(const SpinalTree& t, double s) {
  const auto [order, index] = logging_keep(t.aged, s);
  SpinalTree out;
  out.aged = logging_apply(t.aged, s, order, index);
  for (Vertex v : t.spine) {
    const Vertex i = index[static_cast<std::size_t>(v)];
    if (i < 0) break;
    out.spine.push_back(i);
  }
  out.truncated = t.truncated && out.spine.size() == t.spine.size();
  return out;
}

}  // namespace ssc
