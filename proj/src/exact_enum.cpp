#include "ssc/exact_enum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace ssc {
namespace {

struct ClassTables {
  std::vector<std::vector<TreeClass>> by_size;  // index n, n = 1..kMaxEnumSize
  std::unordered_map<std::string, std::size_t> size_of;
  std::unordered_map<std::string, Rational> mass_of;
};

ClassTables build_tables() {
  ClassTables tables;
  tables.by_size.resize(kMaxEnumSize + 1);

  // Masses by forward accumulation over all (A, v, B).
  std::vector<std::map<std::string, Rational>> acc(kMaxEnumSize + 1);
  acc[1][canonical_code(RootedTree::singleton())] = Rational(1, 2);

  auto finalize = [&](std::size_t n) {
    auto& classes = tables.by_size[n];
    for (auto& [code, m] : acc[n]) {
      Rational mass = m;
      if (n > 1) mass /= static_cast<unsigned long>(n);
      mass.canonicalize();
      classes.push_back(TreeClass{tree_from_code(code), code, mass});
      tables.size_of.emplace(code, n);
      tables.mass_of.emplace(code, mass);
    }
  };
  finalize(1);

  for (std::size_t k = 2; k <= kMaxEnumSize; ++k) {
    auto& target = acc[k];
    for (std::size_t i = 1; i < k; ++i) {
      for (const auto& a : tables.by_size[i]) {
        for (const auto& b : tables.by_size[k - i]) {
          const Rational weight = a.mass * b.mass;
          for (Vertex v = 0; v < static_cast<Vertex>(i); ++v)
            target[canonical_code(join(a.tree, v, b.tree))] += weight;
        }
      }
    }
    finalize(k);
  }
  return tables;
}

const ClassTables& tables() {
  static const ClassTables t = build_tables();
  return t;
}

}  // namespace

const std::vector<TreeClass>& tree_classes(std::size_t n) {
  if (n == 0 || n > kMaxEnumSize)
    throw std::invalid_argument("tree_classes: n must be in [1, " + std::to_string(kMaxEnumSize) + "]");
  return tables().by_size[n];
}

std::vector<RootedTree> enumerate_rooted_trees(std::size_t n) {
  std::vector<RootedTree> out;
  for (const auto& c : tree_classes(n)) out.push_back(c.tree);
  return out;
}

Rational fixed_point_mass(const std::string& code) {
  const auto& m = tables().mass_of;
  auto it = m.find(code);
  if (it == m.end()) throw std::invalid_argument("fixed_point_mass: tree larger than enumeration cap");
  return it->second;
}

Rational fixed_point_mass(const RootedTree& t) { return fixed_point_mass(canonical_code(t)); }

Rational stationary_balance_residual(const RootedTree& t) {
  return stationary_balance_residual(t, [](const std::string& c) { return fixed_point_mass(c); });
}

Rational stationary_balance_residual(const RootedTree& t, const MassFunction& mass) {
  const std::size_t k = t.size();
  if (k < 2) throw std::invalid_argument("stationary_balance_residual: need |T| >= 2");
  const std::string target = canonical_code(t);
  Rational entry = 0;
  for (std::size_t i = 1; i < k; ++i) {
    for (const auto& a : tree_classes(i)) {
      for (const auto& b : tree_classes(k - i)) {
        long hits = 0;
        for (Vertex v = 0; v < static_cast<Vertex>(i); ++v)
          hits += canonical_code(join(a.tree, v, b.tree)) == target;
        if (hits) entry += mass(a.code) * mass(b.code) * hits;
      }
    }
  }
  Rational r = mass(target) * static_cast<unsigned long>(k) - entry;
  r.canonicalize();
  return r;
}

std::vector<std::pair<std::string, std::size_t>> rooting_orbits(const RootedTree& t) {
  std::map<std::string, std::size_t> counts;
  for (Vertex v = 0; v < static_cast<Vertex>(t.size()); ++v) ++counts[canonical_code(reroot(t, v))];
  return {counts.begin(), counts.end()};
}

void write_class_table(std::ostream& out, std::size_t max_n) {
  out << "n,canonical_code,mass_num,mass_den\n";
  for (std::size_t n = 1; n <= max_n; ++n)
    for (const auto& c : tree_classes(n))
      out << n << ',' << code_to_hex(c.code) << ',' << c.mass.get_num().get_str() << ','
          << c.mass.get_den().get_str() << '\n';
}

// ---- age densities ---------------------------------------------------------

double aged_tree_density(const AgedTree& at) {
  if (!at.legal()) return 0.0;
  std::vector<double> sorted = at.vertex_age;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return 0.0;
  double log_density = 0.0;
  for (double a : at.vertex_age) log_density += -a - std::log(2.0);
  return std::exp(log_density);
}

double vertex_age_density(const RootedTree& t, std::span<const double> vertex_age) {
  if (vertex_age.size() != t.size()) throw std::invalid_argument("vertex_age_density: size mismatch");
  double d = 1.0;
  for (std::size_t v = 0; v < t.size(); ++v) {
    const double a = vertex_age[v];
    if (!(a > 0.0)) return 0.0;
    d *= 0.5 * std::exp(-a);
    const Vertex p = t.parent[v];
    if (p != kNoParent) d *= std::min(a, vertex_age[static_cast<std::size_t>(p)]);
  }
  return d;
}

double edge_age_density(const RootedTree& t, std::span<const double> edge_age) {
  if (edge_age.size() != t.size()) throw std::invalid_argument("edge_age_density: size mismatch");
  std::vector<double> max_incident(t.size(), 0.0);
  for (std::size_t v = 0; v < t.size(); ++v) {
    const Vertex p = t.parent[v];
    if (p == kNoParent) continue;
    const double e = edge_age[v];
    if (!(e >= 0.0)) return 0.0;
    max_incident[v] = std::max(max_incident[v], e);
    auto& mp = max_incident[static_cast<std::size_t>(p)];
    mp = std::max(mp, e);
  }
  double s = 0.0;
  for (double m : max_incident) s += m;
  return std::exp(-s) * std::pow(0.5, static_cast<double>(t.size()));
}

namespace {

template <class T>
void check_sorted(std::span<const T> a) {
  if (a.empty()) throw std::invalid_argument("age vector must be non-empty");
  if (!(a[0] > 0)) throw std::invalid_argument("ages must be positive");
  for (std::size_t i = 1; i < a.size(); ++i)
    if (!(a[i - 1] < a[i])) throw std::invalid_argument("ages must be strictly increasing");
}

template <class T>
T age_polynomial_impl(std::span<const T> a) {
  check_sorted(a);
  const std::size_t k = a.size();
  T prod = 1;
  T prefix = 0;
  for (std::size_t j = 1; j < k; ++j) {
    const T coeff = static_cast<long>(k - j + 1);
    prod *= coeff * a[j - 1] + prefix;
    prefix += a[j - 1];
  }
  return prod;
}

}  // namespace

double age_polynomial(std::span<const double> ages) { return age_polynomial_impl(ages); }
Rational age_polynomial(std::span<const Rational> ages) { return age_polynomial_impl(ages); }

double age_vector_density(std::span<const double> ages) {
  const double poly = age_polynomial(ages);
  double sum = 0.0;
  for (double a : ages) sum += a;
  return poly * std::exp(-sum - static_cast<double>(ages.size()) * std::log(2.0));
}

double kirchhoff_total_weight(std::span<const double> a) {
  const std::size_t k = a.size();
  if (k <= 1) return 1.0;
  const std::size_t m = k - 1;
  std::vector<double> lap(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double diag = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double w = std::min(a[i], a[j]);
      diag += w;
      if (j < m) lap[i * m + j] = -w;
    }
    lap[i * m + i] = diag;
  }
  double det = 1.0;
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::abs(lap[r * m + c]) > std::abs(lap[piv * m + c])) piv = r;
    if (lap[piv * m + c] == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t j = 0; j < m; ++j) std::swap(lap[c * m + j], lap[piv * m + j]);
      det = -det;
    }
    const double p = lap[c * m + c];
    det *= p;
    for (std::size_t r = c + 1; r < m; ++r) {
      const double f = lap[r * m + c] / p;
      if (f == 0.0) continue;
      for (std::size_t j = c; j < m; ++j) lap[r * m + j] -= f * lap[c * m + j];
    }
  }
  return det;
}

Rational kirchhoff_total_weight(std::span<const Rational> a) {
  const std::size_t k = a.size();
  if (k <= 1) return 1;
  const std::size_t m = k - 1;
  std::vector<Rational> lap(m * m, Rational(0));
  for (std::size_t i = 0; i < m; ++i) {
    Rational diag = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const Rational w = std::min(a[i], a[j]);
      diag += w;
      if (j < m) lap[i * m + j] = -w;
    }
    lap[i * m + i] = diag;
  }
  Rational det = 1;
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    while (piv < m && lap[piv * m + c] == 0) ++piv;
    if (piv == m) return 0;
    if (piv != c) {
      for (std::size_t j = 0; j < m; ++j) std::swap(lap[c * m + j], lap[piv * m + j]);
      det = -det;
    }
    const Rational p = lap[c * m + c];
    det *= p;
    for (std::size_t r = c + 1; r < m; ++r) {
      if (lap[r * m + c] == 0) continue;
      const Rational f = lap[r * m + c] / p;
      for (std::size_t j = c; j < m; ++j) lap[r * m + j] -= f * lap[c * m + j];
    }
  }
  det.canonicalize();
  return det;
}

double spanning_tree_sum_bruteforce(std::span<const double> a) {
  const std::size_t k = a.size();
  if (k > 8) throw std::invalid_argument("spanning_tree_sum_bruteforce: k <= 8");
  if (k <= 1) return 1.0;
  if (k == 2) return std::min(a[0], a[1]);
  // Pruefer sequences of length k-2
  std::vector<std::size_t> seq(k - 2, 0);
  std::vector<std::size_t> deg(k);
  double total = 0.0;
  while (true) {
    std::fill(deg.begin(), deg.end(), 1);
    for (auto s : seq) ++deg[s];
    double w = 1.0;
    for (auto s : seq) {
      std::size_t leaf = 0;
      while (deg[leaf] != 1) ++leaf;
      w *= std::min(a[leaf], a[s]);
      --deg[leaf];
      --deg[s];
    }
    std::size_t u = 0;
    while (deg[u] != 1) ++u;
    std::size_t v = u + 1;
    while (deg[v] != 1) ++v;
    w *= std::min(a[u], a[v]);
    total += w;

    std::size_t pos = 0;
    while (pos < seq.size() && ++seq[pos] == k) seq[pos++] = 0;
    if (pos == seq.size()) break;
  }
  return total;
}

Rational chamber_mass(std::size_t k) {
  if (k == 0) throw std::invalid_argument("chamber_mass: k >= 1");
  // integral of e^{-u} u^{2k-2} / (2^k k! (k-1)! 2^{k-1}) over u > 0
  BigInt fact_2k2, fact_k, fact_k1;
  mpz_fac_ui(fact_2k2.get_mpz_t(), 2 * k - 2);
  mpz_fac_ui(fact_k.get_mpz_t(), k);
  mpz_fac_ui(fact_k1.get_mpz_t(), k - 1);
  Rational r(fact_2k2, fact_k * fact_k1);
  r *= pow2(-static_cast<long>(2 * k - 1));
  r.canonicalize();
  return r;
}

}  // namespace ssc
