#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ssc {

inline constexpr double kGateAlpha = 1e-3;

struct TestReport {
  std::string name;
  std::string oracle;
  double statistic = 0.0;
  double threshold = 0.0;  // pass iff statistic < threshold (<= for chi-square)
  double p_value = 1.0;
  std::uint64_t sample_size = 0;
  std::size_t dof = 0;
  double alpha = kGateAlpha;
  std::uint64_t seed = 0;
  bool pass = false;
  std::string detail;
};

// Pearson goodness of fit. `expected` are cell probabilities; if they sum to
// less than one, `observed` must carry one extra trailing tail-bucket count
// with probability 1 - sum(expected). Adjacent cells are pooled left to right
// until each expected count is at least `min_expected`.
TestReport chi_square_test(std::span<const std::uint64_t> observed, std::span<const double> expected,
                           double alpha = kGateAlpha, double min_expected = 5.0);

// Two-sample chi-square homogeneity on aligned count vectors.
TestReport chi_square_homogeneity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                  double alpha = kGateAlpha, double min_expected = 5.0);

// One-sample KS against a cdf; pass iff D_n < c(alpha)/sqrt(n).
TestReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                   double alpha = kGateAlpha);
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha = kGateAlpha);

struct Rect {
  double x0, x1, y0, y1;
  bool contains(double x, double y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

// Counts per replicate and cell, with the Poisson mean of every (replicate, cell).
// Sub-tests, each at alpha/3: pooled chi-square per cell, an exact Poisson test
// on the grand total, and (with >= 30 replicates) Bonferroni-corrected pairwise
// correlations of the standardised counts.
TestReport poisson_field_test(const std::vector<std::vector<double>>& means,
                              const std::vector<std::vector<std::uint64_t>>& counts, double alpha = kGateAlpha);

std::vector<std::uint64_t> count_in_rects(std::span<const std::pair<double, double>> points,
                                          std::span<const Rect> rects);

// Two-seed rule: a failed gate is re-run once on a second fixed seed.
TestReport with_second_seed(const std::function<TestReport(std::uint64_t)>& gate, std::uint64_t first_seed,
                            std::uint64_t second_seed);

std::string to_json_line(const TestReport& r);
void write_markdown(std::ostream& out, std::span<const TestReport> reports);

}  // namespace ssc
