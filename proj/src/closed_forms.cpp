#include "ssc/closed_forms.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ssc/special.hpp"

namespace ssc {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(std::uint64_t k, const char* what) {
  if (k == 0) throw std::invalid_argument(std::string(what) + ": argument must be >= 1");
}

// log cosh(y) without overflow.
double log_cosh(double y) {
  const double a = std::fabs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double sech2(double y) {
  const double c = std::cosh(y);
  return 1.0 / (c * c);
}

// w_j for j = 1..n in binary64, by the ratio w_{j+1}/w_j = (2j-1)/(2j+2).
std::vector<double> size_pmf_vector(std::size_t n) {
  std::vector<double> w(n + 1, 0.0);
  if (n >= 1) w[1] = 0.5;
  for (std::size_t j = 1; j < n; ++j)
    w[j + 1] = w[j] * (2.0 * j - 1.0) / (2.0 * j + 2.0);
  return w;
}

}  // namespace

// ---- size law ---------------------------------------------------------------

Rational cluster_size_pmf(std::uint64_t k) {
  require_positive(k, "cluster_size_pmf");
  Rational q(binomial(2 * k - 2, k - 1) * 2);
  q /= Rational(BigInt(k));
  q *= pow2(-2 * static_cast<long>(k));
  q.canonicalize();
  return q;
}

double cluster_size_pmf_real(std::uint64_t k) {
  require_positive(k, "cluster_size_pmf_real");
  const double kd = static_cast<double>(k);
  if (k < 64) return to_double(cluster_size_pmf(k));
  const double lg = std::lgamma(2 * kd - 1) - 2 * std::lgamma(kd) - std::log(kd) + std::log(2.0) -
                    kd * std::log(4.0);
  return std::exp(lg);
}

double size_gf(double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("size_gf: z outside [0,1]");
  return z / (1.0 + std::sqrt(1.0 - z));
}

Rational hitting_prob(std::uint64_t r) {
  require_positive(r, "hitting_prob");
  Rational q(binomial(2 * r - 2, r - 1));
  q *= pow2(2 - 2 * static_cast<long>(r));
  q.canonicalize();
  return q;
}

double hitting_prob_real(std::uint64_t r) {
  require_positive(r, "hitting_prob_real");
  if (r < 64) return to_double(hitting_prob(r));
  const double rd = static_cast<double>(r);
  return std::exp(std::lgamma(2 * rd - 1) - 2 * std::lgamma(rd) + (1 - rd) * std::log(4.0));
}

// ---- explosion times ----------------------------------------------------------

double explosion_survival(std::uint64_t k, double x) {
  require_positive(k, "explosion_survival");
  if (x < 0.0) throw std::domain_error("explosion_survival: x < 0");
  return std::exp(-2.0 * static_cast<double>(k) * log_cosh(0.5 * x));
}

double explosion_cdf(std::uint64_t k, double x) {
  require_positive(k, "explosion_cdf");
  if (x < 0.0) throw std::domain_error("explosion_cdf: x < 0");
  return -std::expm1(-2.0 * static_cast<double>(k) * log_cosh(0.5 * x));
}

double t_inf_cdf(double x) {
  if (x <= 0.0) return 0.0;
  const double t = std::tanh(0.5 * x);
  return t * t;
}

double theta1_cdf(double x) { return x <= 0.0 ? 0.0 : std::tanh(0.5 * x); }

double age_density(double x) { return x < 0.0 ? 0.0 : 0.5 * sech2(0.5 * x); }

double size_biased_t_inf_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1e-3) {
    // tanh(y) - y sech^2(y) = (2/3) y^3 - (8/15) y^5 + ..., y = x/2
    const double y = 0.5 * x;
    return (2.0 / 3.0) * y * y * y - (8.0 / 15.0) * std::pow(y, 5);
  }
  return std::tanh(0.5 * x) - 0.5 * x * sech2(0.5 * x);
}

double expected_time_to_explosion(std::uint64_t k) {
  require_positive(k, "expected_time_to_explosion");
  if (k <= 4096) {
    double e = 2.0;
    for (std::uint64_t j = 1; j < k; ++j) e *= (2.0 * j) / (2.0 * j + 1.0);
    return e;
  }
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(4.0) - std::log(kd) - std::lgamma(2 * kd + 1) +
                  2 * std::lgamma(kd + 1));
}

// ---- conditioning -------------------------------------------------------------

void validate(const ConditionalKernel& kern) {
  if (!(kern.s >= 0.0)) throw std::invalid_argument("conditional kernel: s must be >= 0");
  if (!(kern.t > kern.s)) throw std::invalid_argument("conditional kernel: need s < t");
}

double conditional_expected_size(const ConditionalKernel& kern) {
  validate(kern);
  const double s = kern.s, t = kern.t, u = t - s;
  const double coth_half_u = 1.0 / std::tanh(0.5 * u);
  if (kern.mode == ConditionMode::survive_past) {
    if (kern.stationary) return coth_half_u / (1.0 + std::exp(-t));
    return std::tanh(0.5 * t) * coth_half_u;
  }
  const double coth_u = 1.0 / std::tanh(u);
  if (kern.stationary) return -1.0 + coth_half_u * (coth_u + std::tanh(0.5 * t));
  return -1.0 + coth_half_u * (coth_u + 2.0 * std::tanh(0.5 * t) - 1.0 / std::tanh(t));
}

double survival_size_gf(double z, double t, bool stationary) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("survival_size_gf: z outside [0,1]");
  if (t < 0.0) throw std::domain_error("survival_size_gf: t < 0");
  const double r = std::sqrt(1.0 - z);
  const double d = 1.0 + std::tanh(0.5 * t) * r;
  if (stationary) return (1.0 - r) / d;
  return z / (d * d);
}

double survival_size_gf_unnormalized(double z, double t) {
  return sech2(0.5 * t) * survival_size_gf(z, t, false);
}

SizePmfTable conditioned_size_pmf_table(const ConditionalKernel& kern, double tolerance,
                                        std::size_t max_terms) {
  validate(kern);
  const double s = kern.s, t = kern.t, u = t - s;
  const double T = std::tanh(0.5 * s);
  const double log_rho = -2.0 * log_cosh(0.5 * u);
  const bool explode = kern.mode == ConditionMode::explode_at;

  SizePmfTable out;
  if (s == 0.0 && !kern.stationary) {
    out.pmf = {1.0};
    out.converged = true;
    return out;
  }

  // 1/(1 + T sqrt(1-z)) = 1/((1+T) - T W(z)) as a power series; all terms are
  // non-negative so the recurrences do not cancel.
  const auto w = size_pmf_vector(max_terms + 1);
  std::vector<double> recip;
  std::vector<double> square;
  recip.reserve(max_terms + 1);
  square.reserve(max_terms + 1);
  const double q = T / (1.0 + T);
  recip.push_back(1.0 / (1.0 + T));
  square.push_back(recip[0] * recip[0]);

  const double norm_survive =
      kern.stationary ? (1.0 - std::tanh(0.5 * t)) : sech2(0.5 * t);
  const double explode_factor =
      kern.stationary ? std::tanh(0.5 * u) * (1.0 + std::exp(-t))
                      : std::tanh(0.5 * u) / std::tanh(0.5 * t);

  double total = 0.0;
  for (std::size_t k = 1; k <= max_terms; ++k) {
    // extend recip and square up to index k (needed: square[k-1], recip up to k)
    while (recip.size() <= k) {
      const std::size_t n = recip.size();
      double acc = 0.0;
      for (std::size_t j = 1; j <= n; ++j) acc += w[j] * recip[n - j];
      recip.push_back(q * acc);
      double sq = 0.0;
      for (std::size_t j = 0; j <= n; ++j) sq += recip[j] * recip[n - j];
      square.push_back(sq);
    }
    double joint;  // P(survive to s, size k) (or stationary analogue) times rho^k
    if (kern.stationary) {
      // [z^k] (1-T) W(z) / (1 + T sqrt(1-z))
      double acc = 0.0;
      for (std::size_t j = 1; j <= k; ++j) acc += w[j] * recip[k - j];
      joint = (1.0 - T) * acc;
    } else {
      joint = sech2(0.5 * s) * square[k - 1];
    }
    const double kd = static_cast<double>(k);
    double p = joint * std::exp(kd * log_rho) / norm_survive;
    if (explode) p *= kd * explode_factor;
    out.pmf.push_back(p);
    total += p;
    const double remaining = 1.0 - total;
    if (remaining < tolerance && p < tolerance) {
      out.converged = true;
      break;
    }
  }
  out.achieved_tolerance = std::fabs(1.0 - total);
  if (!out.converged) out.converged = out.achieved_tolerance < tolerance;
  return out;
}

double conditioned_size_pmf(std::uint64_t k, const ConditionalKernel& kern) {
  require_positive(k, "conditioned_size_pmf");
  const auto table = conditioned_size_pmf_table(kern, 0.0, static_cast<std::size_t>(k));
  return k <= table.pmf.size() ? table.pmf[k - 1] : 0.0;
}

double conditioned_size_tail_asymptotic(std::uint64_t k, const ConditionalKernel& kern) {
  validate(kern);
  require_positive(k, "conditioned_size_tail_asymptotic");
  const double s = kern.s, t = kern.t, u = t - s;
  const double kd = static_cast<double>(k);
  const double T = std::tanh(0.5 * s);
  // [z^k] F(z, s) ~ sech^2(s/2) tanh(s/2) / (sqrt(pi) k^{3/2})
  double joint;
  if (kern.stationary) {
    // (1-T)(1 - r)/(1 + T r) = (1-T)(1 - (1+T) r + O(r^2)), r = sqrt(1-z)
    joint = sech2(0.5 * s) / (2.0 * std::sqrt(kPi) * std::pow(kd, 1.5));
  } else {
    joint = sech2(0.5 * s) * T / (std::sqrt(kPi) * std::pow(kd, 1.5));
  }
  const double norm = kern.stationary ? (1.0 - std::tanh(0.5 * t)) : sech2(0.5 * t);
  double p = joint * std::exp(-2.0 * kd * log_cosh(0.5 * u)) / norm;
  if (kern.mode == ConditionMode::explode_at) {
    p *= kd * (kern.stationary ? std::tanh(0.5 * u) * (1.0 + std::exp(-t))
                               : std::tanh(0.5 * u) / std::tanh(0.5 * t));
  }
  return p;
}

// ---- jump counts --------------------------------------------------------------

Rational jump_count_pmf(std::uint64_t n) {
  Rational q(BigInt(1), BigInt(n + 1) * BigInt(n + 2));
  q.canonicalize();
  return q;
}

double jump_joint_gf(double z, double x) {
  if (!(z >= 0.0 && z <= 1.0) || !(x >= 0.0 && x < 1.0))
    throw std::domain_error("jump_joint_gf: need z in [0,1], x in [0,1)");
  const double W = size_gf(z);
  if (x < 1e-3) {
    // sum_n x^n (W^{n+1}/(n+1) - W^{n+2}/(n+2))
    double sum = 0.0, xn = 1.0, Wn1 = W;
    for (int n = 0; n < 12; ++n) {
      sum += xn * (Wn1 / (n + 1) - Wn1 * W / (n + 2));
      xn *= x;
      Wn1 *= W;
    }
    return sum;
  }
  return (W + (1.0 - x) / x * std::log1p(-x * W)) / x;
}

double expected_jumps_given_size(std::uint64_t k) {
  require_positive(k, "expected_jumps_given_size");
  return 1.0 / (2.0 * static_cast<double>(k) * cluster_size_pmf_real(k)) - 1.0;
}

// ---- degrees ------------------------------------------------------------------

double degree_joint_gf(double z, double s, std::optional<double> root_age) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("degree_joint_gf: z outside [0,1]");
  if (!(s >= 0.0)) throw std::domain_error("degree_joint_gf: s < 0");
  const double r = std::sqrt(1.0 - z);
  if (root_age) {
    const double x = *root_age;
    if (x < 0.0) throw std::domain_error("degree_joint_gf: negative root age");
    const double th = std::tanh(0.5 * x);
    const double base = 1.0 + th * r;
    return z * std::pow(base, -2.0 * s) * std::pow(1.0 + th, 2.0 * (s - 1.0));
  }
  // (2/(2s-1)) (q^{2-2s} - q), q = (1 + sqrt(1-z))/2, with the s = 1/2 limit
  const double q = 0.5 * (1.0 + r);
  const double eps = 2.0 * s - 1.0;
  const double y = -eps * std::log(q);
  const double ratio = std::fabs(y) < 1e-8 ? 1.0 + 0.5 * y : std::expm1(y) / y;
  // q^{-eps} - 1 = expm1(y) = y * ratio; divide by eps: -log(q) * ratio
  return 2.0 * q * (-std::log(q)) * ratio;
}

double root_degree_pmf(unsigned degree) {
  // mixture over U of Poisson(2 log(1+U)): 2^i P(i+1, log 2)
  return std::ldexp(special::gamma_p(degree + 1.0, std::numbers::ln2), static_cast<int>(degree));
}

double spinal_root_degree_pmf(unsigned degree) {
  if (degree == 0) return 0.0;
  const unsigned i = degree - 1;
  const double a = i + 1.0;
  const double l2 = std::numbers::ln2;
  const double first = std::exp(a * std::log(l2) - std::lgamma(a + 1.0));
  return std::ldexp(first - special::gamma_p(a, l2), static_cast<int>(i + 1));
}

std::vector<std::vector<double>> size_degree_joint_pmf(std::size_t kmax) {
  // k P(k, i) = sum_j P(j, i) w_{k-j} (j-1) + sum_j P(j, i-1) w_{k-j}
  const auto w = size_pmf_vector(kmax + 1);
  std::vector<std::vector<double>> joint(kmax, std::vector<double>(kmax, 0.0));
  if (kmax == 0) return joint;
  joint[0][0] = 0.5;
  for (std::size_t k = 2; k <= kmax; ++k) {
    for (std::size_t i = 1; i < k; ++i) {
      double acc = 0.0;
      for (std::size_t j = 1; j < k; ++j) {
        acc += joint[j - 1][i] * w[k - j] * static_cast<double>(j - 1);
        acc += joint[j - 1][i - 1] * w[k - j];
      }
      joint[k - 1][i] = acc / static_cast<double>(k);
    }
  }
  return joint;
}

// ---- Levy subordinator --------------------------------------------------------

double levy_jump_density(double s) {
  if (!(s > 0.0)) throw std::domain_error("levy_jump_density: s must be > 0");
  // e^s / (e^s - 1)^{3/2} = e^{-s/2} / (1 - e^{-s})^{3/2}
  const double one_minus = -std::expm1(-s);
  return std::exp(-0.5 * s) / (2.0 * std::sqrt(kPi) * one_minus * std::sqrt(one_minus));
}

double levy_tail(double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("levy_tail: alpha must be > 0");
  return 1.0 / (std::sqrt(kPi) * std::sqrt(std::expm1(alpha)));
}

double levy_small_jump_mean(double alpha) {
  if (!(alpha > 0.0)) return 0.0;
  const double v = std::expm1(alpha);
  const double sv = std::sqrt(v);
  return (4.0 * std::atan(sv) - 2.0 * std::log1p(v) / sv) / (2.0 * std::sqrt(kPi));
}

double laplace_exponent(double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("laplace_exponent: lambda must be > 0");
  return std::exp(std::lgamma(lambda + 0.5) - std::lgamma(lambda));
}

// ---- transfer operator --------------------------------------------------------

double legendre(unsigned n, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (unsigned m = 1; m < n; ++m) {
    const double p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double transfer_apply(const std::function<double(double)>& f, double s, double tolerance) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("transfer_apply: s outside [0,1]");
  boost::math::quadrature::tanh_sinh<double> integrator;
  double lower = 0.0;
  if (s > 0.0) {
    double err = 0.0, l1 = 0.0;
    // The kernel 2 artanh(t) has a log singularity at t = 1 when s = 1; the
    // complement argument gives 1 - t to full precision near the endpoint.
    auto g = [&](double t, double tc) {
      double at;
      if (s == 1.0 && tc > 0.0 && tc < 0.5) {
        at = 0.5 * std::log((2.0 - tc) / tc);
      } else {
        at = std::atanh(t);
      }
      return 2.0 * at * f(t);
    };
    lower = integrator.integrate(g, 0.0, s, tolerance, &err, &l1);
    if (err > 100 * tolerance * std::max(1.0, l1))
      throw std::runtime_error("transfer_apply: quadrature did not converge");
  }
  double upper = 0.0;
  if (s < 1.0) {
    double err = 0.0, l1 = 0.0;
    const double mass = integrator.integrate([&](double t) { return f(t); }, s, 1.0, tolerance,
                                             &err, &l1);
    if (err > 100 * tolerance * std::max(1.0, l1))
      throw std::runtime_error("transfer_apply: quadrature did not converge");
    upper = 2.0 * std::atanh(s) * mass;
  }
  return lower + upper;
}

Rational transfer_eigenvalue(std::uint64_t n) {
  require_positive(n, "transfer_eigenvalue");
  Rational q(BigInt(1), BigInt(n) * BigInt(2 * n - 1));
  q.canonicalize();
  return q;
}

double expected_generation_size(unsigned k) {
  if (k == 0) return 1.0;
  // Tail bound for i > K: w_i i^{3/2} is decreasing, so
  // sum_{i>K} (4i-1) w_i^2 / (i(2i-1))^k <= 4 w_K^2 K^{2-2k} / (1+2k).
  double sum = 0.0;
  double w = 0.5;
  const double kd = static_cast<double>(k);
  for (std::uint64_t i = 1;; ++i) {
    const double id = static_cast<double>(i);
    sum += (4.0 * id - 1.0) * w * w / std::pow(id * (2.0 * id - 1.0), kd);
    const double bound = 4.0 * w * w * std::pow(id, 2.0 - 2.0 * kd) / (1.0 + 2.0 * kd);
    if (bound < 1e-12) break;
    w *= (2.0 * id - 1.0) / (2.0 * id + 2.0);
  }
  return sum;
}

}  // namespace ssc
