#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "revlang/interpreter.hpp"

namespace revlang {

struct ExampleInfo {
  std::string name;   // catalog key
  std::string file;   // asset file under stdlib/
  std::string entry;  // function to call
};

const std::vector<ExampleInfo>& example_catalog();
/// Throws UnknownExample.
const ExampleInfo& example_info(const std::string& name);
/// Raw `.rnl` text of a shipped asset, by catalog name.
std::string example_source(const std::string& name);
/// Parsed and validated program. Throws UnknownExample, or SyntaxError if
/// the asset fails validation.
Program load_example(const std::string& name);

/// Random valid arguments for the entry function. Real inputs are Float;
/// counters and sizes are Int.
std::vector<Value> sample_inputs(const std::string& name, std::mt19937_64& rng);

struct Body {
  double mass = 1.0;
  std::array<double, 3> x{};
  std::array<double, 3> v{};
};

struct SolarSystemConfig {
  double G = 1.0;
  std::vector<Body> bodies;
  double dt = 0.01;
  std::int64_t steps = 10'000;

  /// Masses 1 and 1e-3 on a circular orbit of separation 100 about their
  /// centre of mass, G = 1, period 2 pi sqrt(1e6 / 1.001) ~ 6280, starting
  /// at phase 0.7 rad; dt = 0.01.
  static SolarSystemConfig two_body();
  /// Throws InvalidArgument unless masses > 0, dt > 0 and steps >= 0.
  void validate() const;
};

/// Dirty-check tolerance for the clean variant in binary32.
inline constexpr double kBinary32AncillaTolerance = 1e-2;

enum class LeapfrogVariant { Clean, Cumulative };
enum class Precision { Binary32, Binary64 };

struct LeapfrogResult {
  Value x;  // 3 x N positions after the forward run
  Value v;  // 3 x N half-step velocities after the forward run
  double reversal_error = 0.0;   // max |x_initial - x_recovered|
  double reference_error = 0.0;  // max |x - x_ref|, x_ref in long double
};

/// Half-kicks v to v_{1/2}, runs `steps` leapfrog steps through the shipped
/// program, then uncalls it. The clean variant keeps its dirty-checks on.
LeapfrogResult leapfrog_simulate(const SolarSystemConfig& cfg, LeapfrogVariant variant, Precision precision,
                                 const ExecOptions& base = {});

struct RoundoffRow {
  std::int64_t steps = 0;
  double error_clean = 0.0;
  double error_cumulative = 0.0;
  int precision = 64;
};

/// Reversal errors at `points` evenly spaced horizons up to `steps`.
std::vector<RoundoffRow> roundoff_experiment(const SolarSystemConfig& cfg, std::int64_t steps, Precision precision,
                                             int points = 10);
std::string roundoff_csv(const std::vector<RoundoffRow>& rows);

}  // namespace revlang
