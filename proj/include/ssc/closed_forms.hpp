#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ssc/rational.hpp"

namespace ssc {

// ---- size law -------------------------------------------------------------

Rational cluster_size_pmf(std::uint64_t k);
double cluster_size_pmf_real(std::uint64_t k);   // valid for any k, via log-gamma
double size_gf(double z);
Rational hitting_prob(std::uint64_t r);
double hitting_prob_real(std::uint64_t r);       // P(jump >= r) for a w-distributed jump

// ---- explosion times -------------------------------------------------------

double explosion_cdf(std::uint64_t k, double x);
double explosion_survival(std::uint64_t k, double x);
double t_inf_cdf(double x);        // tanh^2(x/2)
double theta1_cdf(double x);       // tanh(x/2), also the cdf of the stationary age law
double age_density(double x);      // (1/2) sech^2(x/2)
double size_biased_t_inf_cdf(double x);
double expected_time_to_explosion(std::uint64_t k);

// ---- conditioning on the next explosion ------------------------------------

enum class ConditionMode { survive_past, explode_at };

struct ConditionalKernel {
  double s = 0.0;
  double t = 1.0;
  ConditionMode mode = ConditionMode::survive_past;
  bool stationary = false;  // false: process started from a singleton at time 0
};

void validate(const ConditionalKernel& kern);

double conditional_expected_size(const ConditionalKernel& kern);
double survival_size_gf(double z, double t, bool stationary);
double survival_size_gf_unnormalized(double z, double t);

struct SizePmfTable {
  std::vector<double> pmf;       // pmf[k-1] = P(size = k)
  double achieved_tolerance = 0; // |1 - sum(pmf)|
  bool converged = false;
};

SizePmfTable conditioned_size_pmf_table(const ConditionalKernel& kern, double tolerance = 1e-12,
                                        std::size_t max_terms = 1u << 14);
double conditioned_size_pmf(std::uint64_t k, const ConditionalKernel& kern);
double conditioned_size_tail_asymptotic(std::uint64_t k, const ConditionalKernel& kern);

// ---- jump counts -----------------------------------------------------------

Rational jump_count_pmf(std::uint64_t n);
double jump_joint_gf(double z, double x);
double expected_jumps_given_size(std::uint64_t k);

// ---- degrees ---------------------------------------------------------------

double degree_joint_gf(double z, double s, std::optional<double> root_age = std::nullopt);
double root_degree_pmf(unsigned degree);
// joint[k-1][i] = P(|H| = k, deg(root) = i) for k <= kmax
std::vector<std::vector<double>> size_degree_joint_pmf(std::size_t kmax);
// P(deg = d) for the root of the spine-rooted limit tree (one spinal edge plus
// a Poisson number of others whose mean depends on a t_inf-distributed age).
double spinal_root_degree_pmf(unsigned degree);

// ---- Levy subordinator -----------------------------------------------------

double levy_jump_density(double s);
double levy_tail(double alpha);              // Pi((alpha, infinity))
double levy_small_jump_mean(double alpha);   // int_0^alpha s Pi(ds)
double laplace_exponent(double lambda);

// ---- transfer operator -----------------------------------------------------

double legendre(unsigned n, double x);
double transfer_apply(const std::function<double(double)>& f, double s, double tolerance = 1e-10);
Rational transfer_eigenvalue(std::uint64_t n);
double expected_generation_size(unsigned k);

}  // namespace ssc
