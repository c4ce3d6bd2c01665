#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ssc::cli {

struct Common {
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = ".";
  std::size_t workers = 1;
};

struct ExactMassesConfig {
  std::size_t n = 1;
  bool cumulative = false;  // all sizes 1..n
};

struct SampleConfig {
  std::string law = "rde";
  std::size_t replicas = 1000;
  std::size_t cap = 1'000'000;
  double x = 0.0;           // shift for hx and spinal
  std::size_t k = 5;        // size for given-size
  std::size_t max_spine = 1000;
};

struct GrowthConfig {
  std::string mode = "singleton";  // singleton | stationary
  std::size_t replicas = 1000;
  std::uint64_t cap = 1'000'000;
  std::uint64_t init_size = 1;
  std::optional<double> horizon;   // singleton: stop at the horizon instead of the first explosion
  double window = 1.0;             // stationary
  std::vector<double> tau;         // scaling checkpoints; switches to scaling statistics
  double leap = 0.0;
};

struct ConditionedConfig {
  double s = 0.5;
  double t = 1.0;
  std::string mode = "explode_at";  // explode_at | survive_past
  bool stationary = false;
  std::size_t replicas = 1000;
  std::uint64_t cap = 1'000'000;
};

struct MeanfieldConfig {
  std::uint32_t n = 1000;
  std::optional<double> lambda;  // default n^(-1/2)
  double horizon = 20.0;
  std::vector<double> snapshots;  // default: the horizon
  std::size_t replicas = 1;
};

struct FfhConfig {
  std::size_t h = 1;
  double horizon = 4.0;
  std::size_t replicas = 1;
};

struct VerifyConfig {
  std::string suite = "all";
};

// Each returns the process exit status and writes its artifacts plus
// manifest.json into common.output_dir.
int exact_masses(const Common& c, const ExactMassesConfig& cfg);
int sample(const Common& c, const SampleConfig& cfg);
int growth(const Common& c, const GrowthConfig& cfg);
int conditioned(const Common& c, const ConditionedConfig& cfg);
int meanfield(const Common& c, const MeanfieldConfig& cfg);
int ffh(const Common& c, const FfhConfig& cfg);
int verify(const Common& c, const VerifyConfig& cfg);

}  // namespace ssc::cli
