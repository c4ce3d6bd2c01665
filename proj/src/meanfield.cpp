#include "ssc/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ssc {

MfState::MfState(std::uint32_t n, double lambda)
    : n_(n), lambda_(lambda), adj_(n), comp_(n), members_(n), last_burn_(n, 0.0), counts_(n + 1, 0) {
  if (n < 1) throw std::invalid_argument("MfState: n >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("MfState: lambda >= 0");
  for (std::uint32_t v = 0; v < n; ++v) {
    comp_[v] = v;
    members_[v] = {v};
  }
  counts_[1] = n;
}

std::uint64_t MfState::key(std::uint32_t u, std::uint32_t v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

std::uint32_t MfState::component_size(std::uint32_t v) const {
  return static_cast<std::uint32_t>(members_[comp_.at(v)].size());
}

const std::vector<std::uint32_t>& MfState::component_members(std::uint32_t v) const {
  return members_[comp_.at(v)];
}

bool MfState::has_edge(std::uint32_t u, std::uint32_t v) const { return edges_.contains(key(u, v)); }

std::uint32_t MfState::largest_component() const {
  for (std::size_t k = counts_.size(); k-- > 1;)
    if (counts_[k] > 0) return static_cast<std::uint32_t>(k);
  return 0;
}

void MfState::resize_count(std::uint32_t size, int delta) {
  counts_[size] = static_cast<std::uint32_t>(static_cast<int>(counts_[size]) + delta);
}

bool MfState::add_edge(std::uint32_t u, std::uint32_t v) {
  if (u >= n_ || v >= n_) throw std::out_of_range("MfState::add_edge");
  if (u == v || !edges_.insert(key(u, v)).second) return false;
  adj_[u].push_back(v);
  adj_[v].push_back(u);
  std::uint32_t cu = comp_[u], cv = comp_[v];
  if (cu == cv) return true;
  if (members_[cu].size() < members_[cv].size()) std::swap(cu, cv);
  auto& big = members_[cu];
  auto& small = members_[cv];
  resize_count(static_cast<std::uint32_t>(big.size()), -1);
  resize_count(static_cast<std::uint32_t>(small.size()), -1);
  for (auto x : small) comp_[x] = cu;
  big.insert(big.end(), small.begin(), small.end());
  small.clear();
  small.shrink_to_fit();
  free_ids_.push_back(cv);
  resize_count(static_cast<std::uint32_t>(big.size()), +1);
  return true;
}

std::uint32_t MfState::burn(std::uint32_t v) {
  if (v >= n_) throw std::out_of_range("MfState::burn");
  const std::uint32_t c = comp_[v];
  std::vector<std::uint32_t> burned = std::move(members_[c]);
  members_[c].clear();
  const auto size = static_cast<std::uint32_t>(burned.size());
  resize_count(size, -1);
  free_ids_.push_back(c);
  for (auto x : burned) {
    for (auto y : adj_[x])
      if (x < y) edges_.erase(key(x, y));
    adj_[x].clear();
    last_burn_[x] = clock_;
  }
  for (auto x : burned) {
    const std::uint32_t id = free_ids_.back();
    free_ids_.pop_back();
    comp_[x] = id;
    members_[id] = {x};
  }
  resize_count(1, static_cast<int>(size));
  return size;
}

void MfState::apply(const MfEvent& e) {
  clock_ = e.time;
  if (e.kind == MfEventKind::edge) add_edge(e.a, e.b);
  else burn(e.a);
}

bool MfState::valid() const {
  // recompute components by BFS over the adjacency lists
  std::vector<std::uint32_t> label(n_, UINT32_MAX);
  std::vector<std::uint32_t> counts(n_ + 1, 0);
  std::size_t adj_total = 0;
  for (std::uint32_t v = 0; v < n_; ++v) {
    adj_total += adj_[v].size();
    for (auto y : adj_[v])
      if (!edges_.contains(key(v, y))) return false;
    if (label[v] != UINT32_MAX) continue;
    std::vector<std::uint32_t> stack{v};
    label[v] = v;
    std::uint32_t size = 0;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      ++size;
      if (comp_[x] != comp_[v]) return false;
      for (auto y : adj_[x])
        if (label[y] == UINT32_MAX) {
          label[y] = v;
          stack.push_back(y);
        }
    }
    if (members_[comp_[v]].size() != size) return false;
    ++counts[size];
  }
  if (adj_total != 2 * edges_.size()) return false;
  std::uint64_t total = 0;
  for (std::size_t k = 1; k < counts_.size(); ++k) total += k * counts_[k];
  return counts == counts_ && total == n_;
}

std::vector<double> empirical_size_distribution(const MfState& s) {
  const auto& c = s.size_counts();
  std::vector<double> v(s.largest_component(), 0.0);
  for (std::size_t k = 1; k <= v.size(); ++k)
    v[k - 1] = static_cast<double>(k * c[k]) / static_cast<double>(s.n());
  return v;
}

double sup_distance_to_w(const MfState& s) {
  const auto& c = s.size_counts();
  const double n = static_cast<double>(s.n());
  double w = 0.5, sup = 0.0;
  for (std::uint32_t k = 1; k <= s.n(); ++k) {
    const double v = static_cast<double>(k) * c[k] / n;
    sup = std::max(sup, std::fabs(v - w));
    const double kd = k;
    w *= (2.0 * kd - 1.0) / (2.0 * (kd + 1.0));
  }
  // v_k = 0 beyond n and w_k is decreasing
  return std::max(sup, w);
}

namespace {

MfSnapshot snapshot(const MfState& s, double t) {
  return {t, empirical_size_distribution(s), sup_distance_to_w(s), s.edge_count(), s.largest_component()};
}

}  // namespace

MfRun mf_run(MfState& state, Rng& rng, const MfOptions& opts) {
  if (!(opts.horizon >= state.clock())) throw std::invalid_argument("mf_run: horizon before the state clock");
  if (!std::is_sorted(opts.snapshot_times.begin(), opts.snapshot_times.end()))
    throw std::invalid_argument("mf_run: snapshot times must be sorted");
  MfRun run;
  const double n = state.n();
  const double edge_rate = 0.5 * (n - 1.0);  // C(n,2) / n
  const double burn_rate = n * state.lambda();
  const double total = edge_rate + burn_rate;
  std::size_t next_snap = 0;
  while (next_snap < opts.snapshot_times.size() && opts.snapshot_times[next_snap] < state.clock()) ++next_snap;
  auto snap_until = [&](double t, bool inclusive) {
    while (next_snap < opts.snapshot_times.size() &&
           (inclusive ? opts.snapshot_times[next_snap] <= t : opts.snapshot_times[next_snap] < t)) {
      run.snapshots.push_back(snapshot(state, opts.snapshot_times[next_snap]));
      ++next_snap;
    }
  };
  for (;;) {
    const double t = total > 0.0 ? state.clock() + rng.exponential(total)
                                 : std::numeric_limits<double>::infinity();
    if (t > opts.horizon) break;
    snap_until(t, false);
    state.set_clock(t);
    MfEvent e{t, MfEventKind::edge, 0, 0};
    if (rng.uniform() * total < edge_rate) {
      ++run.proposals;
      const auto u = static_cast<std::uint32_t>(rng.below(state.n()));
      auto v = static_cast<std::uint32_t>(rng.below(state.n() - 1));
      if (v >= u) ++v;
      if (!state.add_edge(u, v)) {
        ++run.rejected;
        continue;
      }
      e.a = u;
      e.b = v;
    } else {
      e.kind = MfEventKind::burn;
      e.a = static_cast<std::uint32_t>(rng.below(state.n()));
      state.burn(e.a);
      ++run.burns;
    }
    if (opts.record_events) run.events.push_back(e);
  }
  snap_until(opts.horizon, true);
  state.set_clock(opts.horizon);
  return run;
}

MfRun mf_run(std::uint32_t n, double lambda, Rng& rng, const MfOptions& opts) {
  MfState state(n, lambda);
  return mf_run(state, rng, opts);
}

EventTrace tagged_trace(std::span<const MfEvent> events, std::uint32_t n, std::uint32_t vertex,
                        double t_begin, double t_end) {
  if (vertex >= n) throw std::out_of_range("tagged_trace: vertex < n");
  MfState s(n);
  s.set_clock(t_begin);
  EventTrace tr;
  tr.t_begin = t_begin;
  tr.t_end = t_end;
  tr.initial_size = 1;
  std::uint64_t size = 1;
  for (const auto& e : events) {
    if (e.time > t_end) break;
    s.apply(e);
    const std::uint64_t now = s.component_size(vertex);
    if (e.kind == MfEventKind::burn && s.vertex_age(vertex) == 0.0) {
      tr.events.push_back({e.time, EventKind::explosion, 0, 1});
      tr.explosions.push_back(e.time);
    } else if (now > size) {
      tr.events.push_back({e.time, EventKind::jump, now - size, now});
    }
    size = now;
  }
  return tr;
}

}  // namespace ssc
