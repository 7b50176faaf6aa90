#pragma once

// Run configuration and the validate / solve / sweep commands.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ricciwarp/general_solver.hpp"
#include "ricciwarp/hamilton_solver.hpp"
#include "ricciwarp/tensor.hpp"

namespace ricciwarp {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int validation_failed = 1;
inline constexpr int no_convergence = 2;
inline constexpr int regularity_failed = 3;
inline constexpr int usage = 64;
}  // namespace exit_code

struct TensorSpec {
  std::string builtin = "round_product";  // round_product, perturbed_family
  double kappa = 0.0;
  std::filesystem::path csv;              // replaces the builtin when set
  int d1 = 2;
  int d2 = 2;
  std::optional<double> alpha;            // builtins default to d2 - 1
  double beta = 0.0;
};

struct SweepSpec {
  std::string parameter;  // kappa, a or d1
  std::vector<double> values;
};

struct RunConfig {
  TensorSpec tensor;
  double a = 1.0;
  std::optional<double> S;
  std::optional<double> f1_mid;  // defaults to a^(-1/2)
  double f2_value = 1.0;
  std::string method = "auto";   // auto, hamilton, general
  IntegrationControls integration;
  double bisection_tol = 1e-13;
  double c1_step_tol = 1e-10;
  double inner_tol = 1e-10;
  int max_newton_iters = 50;
  double endgame_rtol = 1e-12;
  double endgame_atol = 1e-14;
  RegularityTolerances regularity;
  double residual_tol = 1e-6;
  int validation_grid = 2048;
  std::optional<SweepSpec> sweep;
};

/// Throws Error(ConfigError) on syntax errors, unknown keys and out-of-range values.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

PrescribedTensor build_tensor(const RunConfig& cfg);

/// Dispatches on T2: constant within 1e-12 relative goes to the Hamilton path.
ScalingSolution solve_config(const RunConfig& cfg, const PrescribedTensor& T);

int cmd_validate(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir, int workers);

/// Loads the config and runs `command`; config and usage errors map to exit 64.
int run_command(const std::string& command, const std::filesystem::path& config,
                const std::filesystem::path& out_dir, int workers);

}  // namespace ricciwarp
