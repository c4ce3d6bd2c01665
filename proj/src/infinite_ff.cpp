#include "ssc/infinite_ff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ssc/samplers.hpp"

namespace ssc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

class Builder {
 public:
  explicit Builder(FfhState& s) : s_(s) {}

  // Embeds an independent H sample rooted at `path`, then its future children.
  void add_h_root(std::int32_t parent, std::vector<std::int64_t> path, double alpha) {
    const std::size_t depth = path.size();
    Rng rng = Rng::stream(s_.seed, path, "H");
    MgwOptions o;
    o.max_depth = s_.h - depth;
    const auto t = sample_mgw(rng, o);
    if (!t) throw std::runtime_error("ffh_init: H sample exceeded its size cap");
    const auto kids = t->tree.children();
    std::vector<std::int32_t> index(t->size(), -1);
    std::vector<std::int32_t> embedded;
    // H vertices in BFS order, each child placed at -(rank by increasing edge age)
    std::vector<Vertex> queue{t->tree.root};
    index[t->tree.root] = push(parent, std::move(path), alpha, t->vertex_age[t->tree.root]);
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const Vertex x = queue[q];
      embedded.push_back(index[x]);
      auto cs = kids[x];
      std::sort(cs.begin(), cs.end(), [&](Vertex a, Vertex b) { return t->edge_age[a] < t->edge_age[b]; });
      for (std::size_t i = 0; i < cs.size(); ++i) {
        auto child_path = s_.vertices[index[x]].path;
        child_path.push_back(-static_cast<std::int64_t>(i + 1));
        index[cs[i]] = push(index[x], std::move(child_path), -t->edge_age[cs[i]], t->vertex_age[cs[i]]);
        queue.push_back(cs[i]);
      }
    }
    for (const auto v : embedded) {
      if (s_.vertices[v].depth() < s_.h) add_future_children(v);
      else add_ignitions(v);
    }
  }

 private:
  std::int32_t push(std::int32_t parent, std::vector<std::int64_t> path, double alpha, double age) {
    FfhVertex v;
    v.path = std::move(path);
    v.parent = parent;
    v.alpha = alpha;
    v.initial_age = age;
    v.last_burn = -age;
    const auto id = static_cast<std::int32_t>(s_.vertices.size());
    s_.vertices.push_back(std::move(v));
    if (parent >= 0) s_.vertices[parent].children.push_back(id);
    return id;
  }

  void add_future_children(std::int32_t v) {
    const auto path = s_.vertices[v].path;
    Rng rng = Rng::stream(s_.seed, path, "future");
    double t = 0.0;
    for (std::int64_t n = 0;; ++n) {
      t += rng.exponential(1.0);
      if (t > s_.horizon) break;
      auto child = path;
      child.push_back(n);
      add_h_root(v, std::move(child), t);
    }
  }

  void add_ignitions(std::int32_t v) {
    auto& leaf = s_.vertices[v];
    Rng rng = Rng::stream(s_.seed, leaf.path, "ignite");
    const double a0 = leaf.initial_age;
    double t = 0.0;
    for (;;) {
      t += rng.exponential(1.0);
      const double accept = rng.uniform(), mark = rng.uniform();
      if (t > s_.horizon) break;
      const double th = std::tanh(0.5 * (t + a0));
      if (accept < th) leaf.ignitions.push_back({t, 2.0 * std::atanh(mark * th)});
    }
  }

  FfhState& s_;
};

}  // namespace

bool FfhState::edge_live(std::int32_t v, double t) const {
  const auto& x = vertices[v];
  return x.parent >= 0 && !x.edge_burned && x.alpha <= t;
}

std::vector<std::int32_t> FfhState::live_component(std::int32_t v) const {
  std::vector<std::int32_t> comp{v};
  std::vector<std::int32_t> from{-1};
  for (std::size_t i = 0; i < comp.size(); ++i) {
    const auto x = comp[i];
    const auto& vx = vertices[x];
    if (edge_live(x, clock) && vx.parent != from[i]) {
      comp.push_back(vx.parent);
      from.push_back(x);
    }
    for (const auto c : vx.children)
      if (c != from[i] && edge_live(c, clock)) {
        comp.push_back(c);
        from.push_back(x);
      }
  }
  return comp;
}

RootedTree FfhState::root_cluster() const {
  RootedTree t;
  std::vector<std::int32_t> order{0};
  for (std::size_t i = 0; i < order.size(); ++i)
    for (const auto c : vertices[order[i]].children)
      if (edge_live(c, clock)) {
        order.push_back(c);
        t.parent.push_back(static_cast<Vertex>(i));
      }
  return t;
}

std::size_t FfhState::max_live_degree() const {
  std::size_t best = 0;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    std::size_t d = edge_live(static_cast<std::int32_t>(v), clock) ? 1 : 0;
    for (const auto c : vertices[v].children) d += edge_live(c, clock);
    best = std::max(best, d);
  }
  return best;
}

std::string FfhState::label(std::int32_t v) const {
  std::string out;
  for (const auto n : vertices.at(v).path) {
    if (!out.empty()) out += '.';
    out += std::to_string(n);
  }
  return out;
}

FfhState ffh_init(std::size_t h, std::uint64_t seed, double horizon) {
  if (!(horizon >= 0.0)) throw std::invalid_argument("ffh_init: horizon >= 0");
  FfhState s;
  s.h = h;
  s.horizon = horizon;
  s.seed = seed;
  Builder(s).add_h_root(-1, {}, -kInf);
  for (auto& v : s.vertices)
    std::sort(v.children.begin(), v.children.end(),
              [&](std::int32_t a, std::int32_t b) { return s.vertices[a].path.back() < s.vertices[b].path.back(); });
  return s;
}

std::vector<FireEvent> ffh_run(FfhState& state, double T) {
  if (T < state.clock) throw std::invalid_argument("ffh_run: T before the clock");
  if (T > state.horizon) throw std::invalid_argument("ffh_run: T beyond the materialisation horizon");
  struct Candidate {
    double t;
    std::int32_t leaf;
    double y;
  };
  std::vector<Candidate> cands;
  for (std::size_t v = 0; v < state.vertices.size(); ++v)
    for (const auto& p : state.vertices[v].ignitions)
      if (p.t > state.clock && p.t <= T) cands.push_back({p.t, static_cast<std::int32_t>(v), p.y});
  // ties have probability zero; lexicographic vertex order if they occur
  std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.t != b.t) return a.t < b.t;
    return state.vertices[a.leaf].path < state.vertices[b.leaf].path;
  });
  std::vector<FireEvent> fires;
  for (const auto& c : cands) {
    auto& leaf = state.vertices[c.leaf];
    if (!(c.y < c.t - leaf.last_burn)) continue;
    state.clock = c.t;
    const auto comp = state.live_component(c.leaf);
    FireEvent f{c.t, c.leaf, comp.size(), state.h, false};
    for (const auto x : comp) {
      auto& vx = state.vertices[x];
      if (state.edge_live(x, c.t)) vx.edge_burned = true;
      f.min_depth = std::min(f.min_depth, vx.depth());
      f.root_burned |= x == 0;
    }
    for (const auto x : comp) state.vertices[x].last_burn = c.t;
    fires.push_back(f);
  }
  state.clock = T;
  return fires;
}

std::pair<double, double> ffh_first_root_burns(std::size_t h, std::uint64_t seed, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("ffh_first_root_burns: horizon > 0");
  for (;; horizon *= 2.0) {
    auto s = ffh_init(h, seed, horizon);
    std::vector<double> burns;
    for (const auto& f : ffh_run(s, horizon))
      if (f.root_burned) burns.push_back(f.time);
    if (burns.size() >= 2) return {burns[0], burns[1]};
  }
}

double a_priori_burning_time(const FfhVertex& leaf, double alpha) {
  double last = -leaf.initial_age;
  for (const auto& p : leaf.ignitions) {
    const bool valid = p.y < p.t - last;
    if (p.t < alpha) {
      if (valid) last = p.t;
    } else if (valid) {
      return p.t;
    }
  }
  return kInf;
}

FfhProjection ffh_project(const FfhState& state) {
  if (state.h < 1) throw std::invalid_argument("ffh_project: h >= 1");
  if (state.clock != 0.0) throw std::invalid_argument("ffh_project: state must be at time 0");
  FfhProjection out;
  auto& s = out.state;
  s.h = state.h - 1;
  s.horizon = state.horizon;
  s.seed = state.seed;
  std::vector<std::int32_t> map(state.vertices.size(), -1);
  for (std::size_t v = 0; v < state.vertices.size(); ++v) {
    const auto& x = state.vertices[v];
    if (x.depth() > s.h) continue;
    FfhVertex y = x;
    y.children.clear();
    y.ignitions.clear();
    y.parent = x.parent >= 0 ? map[x.parent] : -1;
    map[v] = static_cast<std::int32_t>(s.vertices.size());
    s.vertices.push_back(std::move(y));
  }
  for (std::size_t v = 0; v < state.vertices.size(); ++v) {
    const auto& x = state.vertices[v];
    if (map[v] < 0) continue;
    auto& y = s.vertices[map[v]];
    for (const auto c : x.children)
      if (map[c] >= 0) y.children.push_back(map[c]);
    if (x.depth() != s.h) continue;
    for (const auto c : x.children) {
      const auto& leaf = state.vertices[c];
      const double theta = a_priori_burning_time(leaf, leaf.alpha);
      if (leaf.alpha > 0.0) out.future_edges.emplace_back(leaf.alpha, theta);
      if (theta <= s.horizon) y.ignitions.push_back({theta, theta - leaf.alpha});
    }
    std::sort(y.ignitions.begin(), y.ignitions.end(),
              [](const IgnitionPoint& a, const IgnitionPoint& b) { return a.t < b.t; });
  }
  return out;
}

double ignition_rect_mean(double a0, const Rect& r) {
  if (!(r.x1 >= r.x0) || !(r.y1 >= r.y0) || r.x0 < 0.0 || r.y0 < 0.0)
    throw std::invalid_argument("ignition_rect_mean: bad rectangle");
  // integrate g(s) over s = a0 + t in [s0, s1], g = tanh(min(s, y1)/2) - tanh(y0/2) for s > y0
  const double s0 = a0 + r.x0, s1 = a0 + r.x1;
  const double ty0 = std::tanh(0.5 * r.y0), ty1 = std::tanh(0.5 * r.y1);
  double total = 0.0;
  const double m0 = std::max(s0, r.y0), m1 = std::min(s1, r.y1);
  if (m1 > m0) total += 2.0 * (log_cosh(0.5 * m1) - log_cosh(0.5 * m0)) - (m1 - m0) * ty0;
  const double c0 = std::max(s0, r.y1);
  if (s1 > c0) total += (s1 - c0) * (ty1 - ty0);
  return total;
}

}  // namespace ssc
