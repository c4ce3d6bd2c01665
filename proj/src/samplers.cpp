#include "ssc/samplers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ssc {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr std::size_t kHitTable = 4096;

double sech2(double y) {
  const double c = std::cosh(y);
  return 1.0 / (c * c);
}

double log_cosh(double y) {
  const double a = std::fabs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - kLn2;
}

// log p_n, p_n = Gamma(n - 1/2) / (sqrt(pi) Gamma(n)), Stirling form for large n.
double log_hitting_prob(double n) {
  const double h = n - 0.5;
  return -0.5 * std::log(std::numbers::pi * n) + (n - 1.0) * std::log1p(-0.5 / n) + 0.5 +
         1.0 / (12.0 * h) - 1.0 / (12.0 * n) - (1.0 / (h * h * h) - 1.0 / (n * n * n)) / 360.0;
}

const std::array<double, kHitTable + 2>& hitting_table() {
  static const auto table = [] {
    std::array<double, kHitTable + 2> p{};
    p[1] = 1.0;
    for (std::size_t n = 1; n <= kHitTable; ++n)
      p[n + 1] = p[n] * (2.0 * static_cast<double>(n) - 1.0) / (2.0 * static_cast<double>(n));
    return p;
  }();
  return table;
}

std::uint64_t poisson_small(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  if (mean > 30.0) return std::poisson_distribution<std::uint64_t>(mean)(rng);
  double p = std::exp(-mean);
  double cdf = p;
  const double u = rng.uniform();
  std::uint64_t n = 0;
  while (u > cdf) {
    ++n;
    p *= mean / static_cast<double>(n);
    const double next = cdf + p;
    if (next == cdf) break;
    cdf = next;
  }
  return n;
}

// Root of an increasing F on [lo, hi] with derivative dF: Newton with
// bisection fallback.
template <class F, class DF>
double solve_increasing(F f, DF df, double target, double lo, double hi, double guess) {
  double a = std::clamp(guess, lo, hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double val = f(a) - target;
    if (val > 0.0) hi = a;
    else lo = a;
    const double d = df(a);
    double next = d > 0.0 ? a - val / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - a) <= 1e-15 * std::max(a, 1e-300) || hi - lo <= 1e-15 * hi) return next;
    a = next;
  }
  return a;
}

double sinh_minus_x(double a) {
  if (a < 0.1) {
    const double a2 = a * a;
    return a * a2 / 6.0 * (1.0 + a2 / 20.0 * (1.0 + a2 / 42.0 * (1.0 + a2 / 72.0)));
  }
  return std::sinh(a) - a;
}

}  // namespace

// ---- scalar laws -----------------------------------------------------------

std::uint64_t sample_cluster_size(Rng& rng) {
  const double u = rng.uniform();
  const auto& p = hitting_table();
  if (u > p[kHitTable]) {
    // largest n <= kHitTable with p_n >= u; p is decreasing
    std::size_t lo = 1, hi = kHitTable;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (p[mid] >= u) lo = mid;
      else hi = mid - 1;
    }
    return lo;
  }
  const double guess = 1.0 / (std::numbers::pi * u * u);
  if (guess > 1e15) return guess >= static_cast<double>(kSizeSaturation) ? kSizeSaturation
                                                                          : static_cast<std::uint64_t>(guess);
  const double log_u = std::log(u);
  auto n = std::max<std::uint64_t>(kHitTable, static_cast<std::uint64_t>(guess));
  while (n > kHitTable && log_hitting_prob(static_cast<double>(n)) < log_u) --n;
  while (log_hitting_prob(static_cast<double>(n + 1)) >= log_u) ++n;
  return n;
}

double sample_stationary_age(Rng& rng) {
  const double u = rng.uniform();
  return std::log1p(1.0 - u) - std::log(u);
}

double sample_hx_root_age(double x, Rng& rng) {
  if (x < 0.0) throw std::domain_error("sample_hx_root_age: x < 0");
  const double u = rng.uniform();
  return std::log1p(std::exp(-x) * (1.0 - u)) - std::log(u);
}

double sample_explosion_time(std::uint64_t k, Rng& rng) {
  if (k == 0) throw std::invalid_argument("sample_explosion_time: k >= 1");
  const double u = rng.uniform();
  const double delta = std::expm1(-std::log(u) / (2.0 * static_cast<double>(k)));
  return 2.0 * std::log1p(delta + std::sqrt(delta * (2.0 + delta)));
}

double sample_t_inf(Rng& rng) { return sample_explosion_time(1, rng); }

double sample_spinal_root_age(double x, Rng& rng) {
  if (x < 0.0) throw std::domain_error("sample_spinal_root_age: x < 0");
  const double u = rng.uniform();
  if (x < 40.0) return 2.0 * std::acosh(std::cosh(0.5 * x) / std::sqrt(u)) - x;
  const double log_w = log_cosh(0.5 * x) - 0.5 * std::log(u);
  const double inv_w2 = std::exp(-2.0 * log_w);
  return 2.0 * (log_w + std::log1p(std::sqrt(1.0 - inv_w2))) - x;
}

// ---- offspring intensities -------------------------------------------------

namespace {

// mass of (0, a] for a <= b
double lower_cumulative(double a, double x) {
  if (a <= 0.0) return 0.0;
  if (a < 1e-3) {
    const double s = sech2(0.5 * x), t = std::tanh(0.5 * x);
    const double f0 = 0.5 * s, f1 = -0.5 * s * t, f2 = 0.5 * s * t * t - 0.25 * s * s;
    return a * a * (f0 / 2.0 + a * (f1 / 3.0 + a * f2 / 8.0));
  }
  const double z = 0.5 * (a + x);
  const double sa4 = std::sinh(0.25 * a);
  return a * std::tanh(z) - 2.0 * std::log1p(2.0 * sa4 * sa4 + std::tanh(0.5 * x) * std::sinh(0.5 * a));
}

}  // namespace

double OffspringIntensity::total_mass() const {
  const double b = parent_age, x = shift;
  if (b <= 0.0) return 0.0;
  return b - 2.0 * (log_cosh(0.5 * (b + x)) - log_cosh(0.5 * x));
}

double OffspringIntensity::cumulative(double a) const {
  const double b = parent_age, x = shift;
  if (a <= b) return lower_cumulative(a, x);
  return lower_cumulative(b, x) + b * (std::tanh(0.5 * (a + x)) - std::tanh(0.5 * (b + x)));
}

double OffspringIntensity::sample_age(Rng& rng) const {
  const double b = parent_age, x = shift;
  const double total = total_mass();
  const double u = rng.uniform();
  const double tail = (1.0 - u) * total;  // mass above the returned age
  // mass above b: b (1 - tanh((b+x)/2)) = 2b / (1 + e^{b+x})
  const double upper = 2.0 * b / (1.0 + std::exp(b + x));
  if (tail <= upper) {
    const double eps = tail / b;  // 1 - tanh((a+x)/2)
    return std::max(b, std::log((2.0 - eps) / eps) - x);
  }
  const double target = u * total;
  auto f = [x](double a) { return lower_cumulative(a, x); };
  auto df = [x](double a) { return a * 0.5 * sech2(0.5 * (a + x)); };
  const double guess = std::sqrt(4.0 * target / sech2(0.5 * x));
  return solve_increasing(f, df, target, 0.0, b, guess);
}

namespace {

// spinal law: mass of (0, a] for a <= b, unnormalised density min(b,a) sech^2 tanh
double spinal_lower(double a, double x) {
  if (a <= 0.0) return 0.0;
  const double sh = std::sinh(0.5 * a);
  return (sinh_minus_x(a) + 2.0 * std::tanh(0.5 * x) * sh * sh) * sech2(0.5 * (a + x));
}

}  // namespace

double SpinalChildLaw::total_mass() const {
  return 2.0 * (std::tanh(0.5 * (parent_age + shift)) - std::tanh(0.5 * shift));
}

double SpinalChildLaw::cumulative(double a) const {
  const double b = parent_age, x = shift;
  if (a <= b) return spinal_lower(a, x);
  return spinal_lower(b, x) + b * (sech2(0.5 * (b + x)) - sech2(0.5 * (a + x)));
}

double SpinalChildLaw::presence_probability() const {
  if (shift == 0.0) return parent_age > 0.0 ? 1.0 : 0.0;
  return 1.0 - std::tanh(0.5 * shift) / std::tanh(0.5 * (parent_age + shift));
}

double SpinalChildLaw::sample_age(Rng& rng) const {
  const double b = parent_age, x = shift;
  const double total = total_mass();
  const double u = rng.uniform();
  const double tail = (1.0 - u) * total;
  const double upper = b * sech2(0.5 * (b + x));
  if (tail <= upper) {
    const double eps = tail / b;  // sech^2((a+x)/2)
    return std::max(b, 2.0 * std::acosh(1.0 / std::sqrt(eps)) - x);
  }
  const double target = u * total;
  auto f = [x](double a) { return spinal_lower(a, x); };
  auto df = [x](double a) {
    const double z = 0.5 * (a + x);
    return a * sech2(z) * std::tanh(z);
  };
  return solve_increasing(f, df, target, 0.0, b, 0.5 * b);
}

// ---- genealogy and RDE -----------------------------------------------------

namespace {

struct Shape {
  std::vector<std::int32_t> left, right, up;  // preorder ids, -1 for none
};

// Critical binary GW in preorder; nullopt iff the leaf count exceeds cap.
std::optional<Shape> sample_gw_shape(Rng& rng, std::size_t cap) {
  Shape s;
  struct Slot {
    std::int32_t parent;
    bool is_right;
  };
  std::vector<Slot> stack{{-1, false}};
  std::size_t leaves = 0;
  while (!stack.empty()) {
    const Slot slot = stack.back();
    stack.pop_back();
    const auto id = static_cast<std::int32_t>(s.left.size());
    s.left.push_back(-1);
    s.right.push_back(-1);
    s.up.push_back(slot.parent);
    if (slot.parent >= 0) (slot.is_right ? s.right : s.left)[static_cast<std::size_t>(slot.parent)] = id;
    if (rng.coin()) {
      stack.push_back({id, true});
      stack.push_back({id, false});
    } else {
      ++leaves;
    }
    if (leaves + stack.size() > cap) return std::nullopt;
  }
  return s;
}

// Leaf ranges in DFS order; valid because ids are preorder.
void leaf_ranges(const Shape& s, std::vector<std::uint32_t>& lo, std::vector<std::uint32_t>& hi) {
  const std::size_t n = s.left.size();
  lo.assign(n, 0);
  hi.assign(n, 0);
  std::uint32_t next = 0;
  for (std::size_t g = 0; g < n; ++g)
    if (s.left[g] < 0) lo[g] = next++;
  for (std::size_t g = n; g-- > 0;) {
    if (s.left[g] < 0) {
      hi[g] = lo[g] + 1;
    } else {
      lo[g] = lo[static_cast<std::size_t>(s.left[g])];
      hi[g] = hi[static_cast<std::size_t>(s.right[g])];
    }
  }
}

GenealogyPair decorate(Shape&& s, Rng& rng) {
  GenealogyPair gp;
  const std::size_t n = s.left.size();
  std::vector<std::uint32_t> lo, hi;
  leaf_ranges(s, lo, hi);
  const std::size_t k = hi[0];
  gp.spent_time.resize(n);
  gp.leaves_above.resize(n);
  gp.leaf_map.assign(n, -1);
  gp.edge_of.assign(n, {-1, -1});
  std::vector<double> cum(n, 0.0);
  std::vector<double> vertex_age(k, 0.0);
  std::vector<std::pair<Vertex, Vertex>> edges;
  std::vector<double> edge_age_list;
  edges.reserve(k ? k - 1 : 0);
  for (std::size_t g = 0; g < n; ++g) {
    const std::uint32_t m = hi[g] - lo[g];
    gp.leaves_above[g] = m;
    gp.spent_time[g] = rng.exponential(static_cast<double>(m));
    cum[g] = gp.spent_time[g] + (s.up[g] >= 0 ? cum[static_cast<std::size_t>(s.up[g])] : 0.0);
    if (s.left[g] < 0) {
      gp.leaf_map[g] = static_cast<Vertex>(lo[g]);
      vertex_age[lo[g]] = cum[g];
    } else {
      const auto l = static_cast<std::size_t>(s.left[g]);
      const auto r = static_cast<std::size_t>(s.right[g]);
      const auto a = static_cast<Vertex>(lo[l] + rng.below(hi[l] - lo[l]));
      const auto b = static_cast<Vertex>(lo[r] + rng.below(hi[r] - lo[r]));
      gp.edge_of[g] = {a, b};
      edges.emplace_back(a, b);
      edge_age_list.push_back(cum[g]);
    }
  }
  const auto root = static_cast<Vertex>(rng.below(k));
  gp.cluster.tree = RootedTree::from_edges(k, edges, root);
  gp.cluster.vertex_age = std::move(vertex_age);
  gp.cluster.edge_age.assign(k, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    const Vertex child = gp.cluster.tree.parent[static_cast<std::size_t>(a)] == b ? a : b;
    gp.cluster.edge_age[static_cast<std::size_t>(child)] = edge_age_list[e];
  }
  gp.left = std::move(s.left);
  gp.right = std::move(s.right);
  gp.up = std::move(s.up);
  return gp;
}

}  // namespace

std::optional<GenealogyPair> sample_genealogy_pair(Rng& rng, std::size_t cap) {
  auto shape = sample_gw_shape(rng, cap);
  if (!shape) return std::nullopt;
  return decorate(std::move(*shape), rng);
}

std::optional<RootedTree> sample_rde(Rng& rng, std::size_t cap) {
  auto shape = sample_gw_shape(rng, cap);
  if (!shape) return std::nullopt;
  const Shape& s = *shape;
  std::vector<std::uint32_t> lo, hi;
  leaf_ranges(s, lo, hi);
  const std::size_t n = s.left.size();
  std::vector<Vertex> root(n);
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t g = n; g-- > 0;) {
    if (s.left[g] < 0) {
      root[g] = static_cast<Vertex>(lo[g]);
      continue;
    }
    edges.emplace_back(root[static_cast<std::size_t>(s.left[g])], root[static_cast<std::size_t>(s.right[g])]);
    root[g] = static_cast<Vertex>(lo[g] + rng.below(hi[g] - lo[g]));
  }
  return RootedTree::from_edges(hi[0], edges, root[0]);
}

GenealogyPair sample_genealogy_given_size(std::size_t k, Rng& rng) {
  if (k == 0) throw std::invalid_argument("sample_genealogy_given_size: k >= 1");
  // Remy's insertion on arbitrary ids, then renumbered in preorder.
  std::vector<std::int32_t> left{-1}, right{-1}, up{-1};
  std::int32_t top = 0;
  left.reserve(2 * k);
  for (std::size_t i = 1; i < k; ++i) {
    const auto x = static_cast<std::int32_t>(rng.below(left.size()));
    const auto u = static_cast<std::int32_t>(left.size());
    const auto leaf = u + 1;
    left.push_back(-1), right.push_back(-1), up.push_back(up[static_cast<std::size_t>(x)]);
    left.push_back(-1), right.push_back(-1), up.push_back(u);
    const std::int32_t p = up[static_cast<std::size_t>(x)];
    if (p < 0) top = u;
    else if (left[static_cast<std::size_t>(p)] == x) left[static_cast<std::size_t>(p)] = u;
    else right[static_cast<std::size_t>(p)] = u;
    up[static_cast<std::size_t>(x)] = u;
    if (rng.coin()) {
      left[static_cast<std::size_t>(u)] = x;
      right[static_cast<std::size_t>(u)] = leaf;
    } else {
      left[static_cast<std::size_t>(u)] = leaf;
      right[static_cast<std::size_t>(u)] = x;
    }
  }
  Shape s;
  const std::size_t n = left.size();
  s.left.assign(n, -1);
  s.right.assign(n, -1);
  s.up.assign(n, -1);
  std::vector<std::int32_t> id(n, -1);
  std::vector<std::int32_t> stack{top};
  std::int32_t next = 0;
  while (!stack.empty()) {
    const auto g = static_cast<std::size_t>(stack.back());
    stack.pop_back();
    id[g] = next++;
    if (left[g] >= 0) {
      stack.push_back(right[g]);
      stack.push_back(left[g]);
    }
  }
  for (std::size_t g = 0; g < n; ++g) {
    const auto ng = static_cast<std::size_t>(id[g]);
    s.up[ng] = up[g] < 0 ? -1 : id[static_cast<std::size_t>(up[g])];
    if (left[g] >= 0) {
      s.left[ng] = id[static_cast<std::size_t>(left[g])];
      s.right[ng] = id[static_cast<std::size_t>(right[g])];
    }
  }
  return decorate(std::move(s), rng);
}

AgedTree sample_cluster_given_size(std::size_t k, Rng& rng) {
  return std::move(sample_genealogy_given_size(k, rng).cluster);
}

std::vector<double> sample_age_vector_given_size(std::size_t k, Rng& rng) {
  if (k == 0) throw std::invalid_argument("sample_age_vector_given_size: k >= 1");
  const double uk = std::gamma_distribution<double>(2.0 * static_cast<double>(k) - 1.0, 1.0)(rng);
  std::vector<double> u(k);
  for (std::size_t i = 0; i + 1 < k; ++i) u[i] = uk * std::sqrt(rng.uniform());
  std::sort(u.begin(), u.end() - 1);
  u[k - 1] = uk;
  std::vector<double> a(k);
  double prev_u = 0.0, prev_a = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = u[i] - prev_u;
    prev_a += e / static_cast<double>(k - i);
    a[i] = prev_a;
    prev_u = u[i];
  }
  return a;
}

RootedTree sample_weighted_spanning_tree(std::span<const double> ages, Rng& rng) {
  const std::size_t k = ages.size();
  if (k == 0) throw std::invalid_argument("sample_weighted_spanning_tree: empty age vector");
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return ages[i] < ages[j]; });
  std::vector<double> a(k), prefix(k + 1, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    a[r] = ages[order[r]];
    prefix[r + 1] = prefix[r] + a[r];
  }
  // from rank u, weight a_j to every lower rank j and a_u to every higher rank
  auto step = [&](std::size_t u) -> std::size_t {
    const double below_mass = prefix[u];
    const double total = below_mass + static_cast<double>(k - 1 - u) * a[u];
    const double t = rng.uniform() * total;
    if (t < below_mass) {
      auto it = std::upper_bound(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(u) + 1, t);
      return static_cast<std::size_t>(it - prefix.begin()) - 1;
    }
    return u + 1 + rng.below(k - 1 - u);
  };
  std::vector<char> in_tree(k, 0);
  std::vector<std::size_t> next(k, 0);
  in_tree[k - 1] = 1;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t u = i;
    while (!in_tree[u]) {
      next[u] = step(u);
      u = next[u];
    }
    u = i;
    while (!in_tree[u]) {
      in_tree[u] = 1;
      u = next[u];
    }
  }
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t r = 0; r + 1 < k; ++r)
    edges.emplace_back(static_cast<Vertex>(order[r]), static_cast<Vertex>(order[next[r]]));
  return RootedTree::from_edges(k, edges, static_cast<Vertex>(rng.below(k)));
}

// ---- multitype Galton-Watson trees ------------------------------------------

namespace {

void assign_edge_ages(AgedTree& t, Rng& edge_rng) {
  t.edge_age.assign(t.size(), 0.0);
  for (std::size_t v = 0; v < t.size(); ++v) {
    const Vertex p = t.tree.parent[v];
    if (p == kNoParent) continue;
    t.edge_age[v] = edge_rng.uniform() * std::min(t.vertex_age[v], t.vertex_age[static_cast<std::size_t>(p)]);
  }
}

}  // namespace

std::optional<AgedTree> sample_hx(double x, Rng& rng, const MgwOptions& opts) {
  if (x < 0.0) throw std::domain_error("sample_hx: x < 0");
  Rng edge_rng = rng.fork();
  AgedTree t;
  t.vertex_age = {opts.root_age ? *opts.root_age : sample_hx_root_age(x, rng)};
  if (t.vertex_age[0] < 0.0) throw std::domain_error("sample_hx: negative root age");
  std::vector<std::size_t> depth{0};
  for (std::size_t v = 0; v < t.size(); ++v) {
    if (opts.max_depth && depth[v] >= *opts.max_depth) continue;
    const OffspringIntensity intensity{t.vertex_age[v], x};
    const std::uint64_t c = poisson_small(intensity.total_mass(), rng);
    if (t.size() + c > opts.cap) return std::nullopt;
    for (std::uint64_t i = 0; i < c; ++i) {
      t.tree.parent.push_back(static_cast<Vertex>(v));
      t.vertex_age.push_back(intensity.sample_age(rng));
      depth.push_back(depth[v] + 1);
    }
  }
  if (opts.edge_ages) assign_edge_ages(t, edge_rng);
  else t.edge_age.assign(t.size(), 0.0);
  return t;
}

std::optional<AgedTree> sample_mgw(Rng& rng, const MgwOptions& opts) { return sample_hx(0.0, rng, opts); }

std::vector<std::size_t> generation_sizes(const RootedTree& t) {
  const auto d = t.depth();
  std::vector<std::size_t> out;
  for (Vertex v : d) {
    const auto i = static_cast<std::size_t>(v);
    if (out.size() <= i) out.resize(i + 1, 0);
    ++out[i];
  }
  return out;
}

SpinalTree sample_spinal(double x, Rng& rng, const SpinalOptions& opts) {
  if (x < 0.0) throw std::domain_error("sample_spinal: x < 0");
  Rng edge_rng = rng.fork();
  SpinalTree st;
  AgedTree& t = st.aged;
  t.vertex_age = {opts.root_age ? *opts.root_age : sample_spinal_root_age(x, rng)};
  st.spine = {0};
  std::vector<char> spinal{1};
  for (std::size_t v = 0; v < t.size(); ++v) {
    const double b = t.vertex_age[v];
    const OffspringIntensity intensity{b, x};
    std::uint64_t c = poisson_small(intensity.total_mass(), rng);
    if (t.size() + c > opts.cap) {
      st.truncated = true;
      c = opts.cap - t.size();
    }
    for (std::uint64_t i = 0; i < c; ++i) {
      t.tree.parent.push_back(static_cast<Vertex>(v));
      t.vertex_age.push_back(intensity.sample_age(rng));
      spinal.push_back(0);
    }
    if (!spinal[v]) continue;
    const SpinalChildLaw law{b, x};
    if (!(rng.uniform() < law.presence_probability())) continue;
    if (st.spine.size() >= opts.max_spine || t.size() >= opts.cap) {
      st.truncated = true;
      continue;
    }
    const auto child = static_cast<Vertex>(t.size());
    t.tree.parent.push_back(static_cast<Vertex>(v));
    t.vertex_age.push_back(law.sample_age(rng));
    spinal.push_back(1);
    st.spine.push_back(child);
  }
  if (opts.edge_ages) assign_edge_ages(t, edge_rng);
  else t.edge_age.assign(t.size(), 0.0);
  return st;
}

}  // namespace ssc
