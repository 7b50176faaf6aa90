#include "ricciwarp/cli.hpp"

#include <toml.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "ricciwarp/error.hpp"
#include "ricciwarp/report_io.hpp"

namespace ricciwarp {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

class Section {
 public:
  Section(const toml::table& root, std::string name, std::set<std::string> allowed)
      : name_(std::move(name)) {
    const auto* node = root.get(name_);
    if (!node) return;
    table_ = node->as_table();
    if (!table_) config_error("[" + name_ + "] must be a table");
    for (auto&& [k, v] : *table_)
      if (!allowed.count(std::string(k.str())))
        config_error("unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
  }

  std::optional<double> real(const std::string& key) const {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    if (auto v = n->as_floating_point()) return v->get();
    if (auto v = n->as_integer()) return static_cast<double>(v->get());
    config_error(where(key) + " must be a number");
  }

  std::optional<long long> integer(const std::string& key) const {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    if (auto v = n->as_integer()) return v->get();
    config_error(where(key) + " must be an integer");
  }

  std::optional<std::string> text(const std::string& key) const {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    if (auto v = n->as_string()) return v->get();
    config_error(where(key) + " must be a string");
  }

  std::optional<std::vector<double>> reals(const std::string& key) const {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    const auto* arr = n->as_array();
    if (!arr) config_error(where(key) + " must be an array");
    std::vector<double> out;
    for (const auto& e : *arr) {
      if (auto v = e.as_floating_point()) out.push_back(v->get());
      else if (auto i = e.as_integer()) out.push_back(static_cast<double>(i->get()));
      else config_error(where(key) + " must hold numbers");
    }
    return out;
  }

  std::string where(const std::string& key) const { return name_ + "." + key; }

 private:
  const toml::node* find(const std::string& key) const { return table_ ? table_->get(key) : nullptr; }
  std::string name_;
  const toml::table* table_ = nullptr;
};

void positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) config_error(what + " must be positive");
}

void set_real(const Section& s, const std::string& key, double& dst) {
  if (auto v = s.real(key)) {
    positive(*v, s.where(key));
    dst = *v;
  }
}

void set_int(const Section& s, const std::string& key, int& dst, long long lo) {
  if (auto v = s.integer(key)) {
    if (*v < lo) config_error(s.where(key) + " must be at least " + std::to_string(lo));
    dst = static_cast<int>(*v);
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax: " << e.description() << " at line " << e.source().begin.line;
    config_error(msg.str());
  }
  const std::set<std::string> sections{"tensor", "scales", "solver", "report", "sweep"};
  for (auto&& [k, v] : root)
    if (!sections.count(std::string(k.str())))
      config_error("unknown section [" + std::string(k.str()) + "]");

  RunConfig cfg;
  const Section tensor(root, "tensor", {"builtin", "kappa", "csv", "d1", "d2", "alpha", "beta"});
  if (auto b = tensor.text("builtin")) cfg.tensor.builtin = *b;
  if (cfg.tensor.builtin != "round_product" && cfg.tensor.builtin != "perturbed_family")
    config_error("tensor.builtin must be round_product or perturbed_family");
  if (auto k = tensor.real("kappa")) {
    if (!(*k >= 0.0)) config_error("tensor.kappa must be non-negative");
    cfg.tensor.kappa = *k;
  }
  if (auto c = tensor.text("csv")) {
    std::filesystem::path p(*c);
    cfg.tensor.csv = p.is_absolute() ? p : base_dir / p;
  }
  set_int(tensor, "d1", cfg.tensor.d1, 2);
  set_int(tensor, "d2", cfg.tensor.d2, 2);
  if (auto a = tensor.real("alpha")) cfg.tensor.alpha = *a;
  if (auto b = tensor.real("beta")) {
    if (*b < 0.0) config_error("tensor.beta must be non-negative");
    cfg.tensor.beta = *b;
  }
  if (!cfg.tensor.csv.empty() && !cfg.tensor.alpha) config_error("tensor.alpha is required with csv");

  const Section scales(root, "scales", {"a", "S", "f1_mid", "f2_value"});
  set_real(scales, "a", cfg.a);
  if (auto s = scales.real("S")) {
    positive(*s, "scales.S");
    cfg.S = *s;
  }
  if (auto f = scales.real("f1_mid")) {
    positive(*f, "scales.f1_mid");
    if (scales.real("a") && std::fabs(1.0 / (*f * *f) - cfg.a) > 1e-12 * cfg.a)
      config_error("scales.a and scales.f1_mid disagree (a = f1_mid^-2)");
    cfg.f1_mid = *f;
    cfg.a = 1.0 / (*f * *f);
  }
  set_real(scales, "f2_value", cfg.f2_value);

  const Section solver(root, "solver",
                       {"method", "rtol", "atol", "grid_n", "blowup_threshold", "h_max",
                        "bisection_tol", "c1_step_tol", "inner_tol", "max_newton_iters",
                        "endgame_rtol", "endgame_atol"});
  if (auto m = solver.text("method")) cfg.method = *m;
  if (cfg.method != "auto" && cfg.method != "hamilton" && cfg.method != "general")
    config_error("solver.method must be auto, hamilton or general");
  set_real(solver, "rtol", cfg.integration.rtol);
  set_real(solver, "atol", cfg.integration.atol);
  set_int(solver, "grid_n", cfg.integration.grid_n, 64);
  if (cfg.integration.grid_n % 2 != 0) config_error("solver.grid_n must be even");
  set_real(solver, "blowup_threshold", cfg.integration.blowup_threshold);
  set_real(solver, "h_max", cfg.integration.h_max);
  set_real(solver, "bisection_tol", cfg.bisection_tol);
  set_real(solver, "c1_step_tol", cfg.c1_step_tol);
  set_real(solver, "inner_tol", cfg.inner_tol);
  set_int(solver, "max_newton_iters", cfg.max_newton_iters, 1);
  set_real(solver, "endgame_rtol", cfg.endgame_rtol);
  set_real(solver, "endgame_atol", cfg.endgame_atol);

  const Section report(root, "report",
                       {"residual_tol", "slope_tol", "curvature_tol", "fit_tol", "value_tol",
                        "validation_grid"});
  set_real(report, "residual_tol", cfg.residual_tol);
  set_real(report, "slope_tol", cfg.regularity.slope);
  set_real(report, "curvature_tol", cfg.regularity.curvature);
  set_real(report, "fit_tol", cfg.regularity.fit);
  set_real(report, "value_tol", cfg.regularity.value);
  set_int(report, "validation_grid", cfg.validation_grid, 16);

  if (root.contains("sweep")) {
    const Section sweep(root, "sweep", {"parameter", "values"});
    SweepSpec s;
    s.parameter = sweep.text("parameter").value_or("");
    if (s.parameter != "kappa" && s.parameter != "a" && s.parameter != "d1")
      config_error("sweep.parameter must be kappa, a or d1");
    s.values = sweep.reals("values").value_or(std::vector<double>{});
    for (double v : s.values) {
      if (s.parameter == "a") positive(v, "sweep.values");
      if (s.parameter == "kappa" && !(v >= 0.0)) config_error("sweep.values must be non-negative");
      if (s.parameter == "d1" && (v != std::floor(v) || v < 2.0))
        config_error("sweep.values for d1 must be integers >= 2");
    }
    cfg.sweep = std::move(s);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

PrescribedTensor build_tensor(const RunConfig& cfg) {
  const auto& t = cfg.tensor;
  if (!t.csv.empty())
    return ingest_spline_csv(t.csv.string(), t.d1, t.d2, *t.alpha, t.beta);
  auto base = t.builtin == "round_product" ? builtin_round_product(t.d1, t.d2)
                                           : builtin_perturbed_family(t.d1, t.d2, t.kappa);
  if (!t.alpha && t.beta == 0.0) return base;
  // Same component functions with the stated constants.
  return PrescribedTensor(t.d1, t.d2, t.alpha.value_or(base.alpha()), t.beta,
                          [base](double x) { return base.t1(x); },
                          [base](double x) { return base.t2(x); }, base.name(), true);
}

ScalingSolution solve_config(const RunConfig& cfg, const PrescribedTensor& T) {
  AssemblyOptions assembly;
  assembly.regularity = cfg.regularity;
  assembly.residual_tol = cfg.residual_tol;
  EndgameControls endgame;
  endgame.rtol = cfg.endgame_rtol;
  endgame.atol = cfg.endgame_atol;

  const bool constant = t2_is_constant(T, cfg.validation_grid, 1e-12);
  const bool hamilton = cfg.method == "hamilton" || (cfg.method == "auto" && constant);
  if (hamilton) {
    ConstantT2Options o;
    o.f1_mid = cfg.f1_mid.value_or(1.0 / std::sqrt(cfg.a));
    o.f2_value = cfg.f2_value;
    o.controls.integration = cfg.integration;
    o.controls.tol_c1 = cfg.bisection_tol;
    o.endgame = endgame;
    o.assembly = assembly;
    return solve_constant_T2(T, o);
  }
  GeneralOptions o;
  o.a = cfg.a;
  if (cfg.S) o.S = *cfg.S;
  o.continuation.step_tol = cfg.c1_step_tol;
  o.continuation.inner.shoot.integration = cfg.integration;
  o.continuation.inner.newton.f_tol = cfg.inner_tol;
  o.continuation.inner.newton.max_iters = cfg.max_newton_iters;
  o.endgame = endgame;
  o.assembly = assembly;
  return solve_general(T, o);
}

int cmd_validate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const auto T = build_tensor(cfg);
  const auto report = validate(T, cfg.validation_grid);
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / "validation.json", validation_json(T, report));
  if (!report.pass) {
    for (const auto& c : report.conditions)
      if (!c.pass) std::cerr << "validation failed: " << c.name << "\n";
    return exit_code::validation_failed;
  }
  return exit_code::ok;
}

namespace {

struct SolveOutcome {
  int code = exit_code::no_convergence;
  std::optional<ScalingSolution> solution;
};

SolveOutcome solve_and_write(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const auto T = build_tensor(cfg);
  std::filesystem::create_directories(out_dir);
  const auto report = validate(T, cfg.validation_grid);
  write_file_atomic(out_dir / "validation.json", validation_json(T, report));
  if (!report.pass) {
    std::cerr << "validation failed: " << report.first_failure()->name << "\n";
    return {exit_code::validation_failed, std::nullopt};
  }
  SolveOutcome out;
  try {
    out.solution = solve_config(cfg, T);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    std::cerr << "solver failed: " << e.what() << "\n";
    return out;
  }
  const ScalingSolution& sol = *out.solution;
  write_file_atomic(out_dir / "profile.csv", profile_csv(sol.profile));
  write_file_atomic(out_dir / "solution.json", solution_json(sol, T));
  write_file_atomic(out_dir / "regularity.json", regularity_json(sol.regularity));
  write_file_atomic(out_dir / "trajectory.csv", trajectory_csv(sol.trajectory));
  write_file_atomic(out_dir / "profile.svg", profile_svg(sol));
  if (!sol.continuation.empty())
    write_file_atomic(out_dir / "continuation.csv", continuation_csv(sol.continuation));
  out.code = exit_code::ok;
  if (!sol.pass()) {
    if (const auto* f = sol.regularity.first_failure())
      std::cerr << "regularity failed: " << f->name << "\n";
    if (!sol.residuals_pass) std::cerr << "oracle residuals above tolerance\n";
    out.code = exit_code::regularity_failed;
  }
  return out;
}

}  // namespace

int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  return solve_and_write(cfg, out_dir).code;
}

int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir, int workers) {
  if (!cfg.sweep) config_error("sweep requires a [sweep] section");
  const auto& sw = *cfg.sweep;
  if (sw.values.empty()) config_error("sweep.values is empty");
  if (sw.parameter == "kappa" && !cfg.tensor.csv.empty())
    config_error("a kappa sweep needs the builtin family, not a csv tensor");
  std::filesystem::create_directories(out_dir);

  struct Row {
    int code = exit_code::no_convergence;
    std::string status;
    double c1 = NAN, c2 = NAN, r0 = NAN, r1 = NAN, r2 = NAN;
    bool regularity = false;
  };
  std::vector<Row> rows(sw.values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < sw.values.size();) {
      RunConfig point = cfg;
      point.sweep.reset();
      const double v = sw.values[i];
      if (sw.parameter == "kappa") {
        point.tensor.builtin = "perturbed_family";
        point.tensor.kappa = v;
      } else if (sw.parameter == "a") {
        point.a = v;
        point.f1_mid.reset();
      } else {
        point.tensor.d1 = static_cast<int>(v);
      }
      const auto dir = out_dir / ("point_" + std::to_string(i));
      Row& row = rows[i];
      try {
        const auto outcome = solve_and_write(point, dir);
        row.code = outcome.code;
        if (outcome.solution) {
          const auto& sol = *outcome.solution;
          row.c1 = sol.c1;
          row.c2 = sol.c2;
          row.r0 = sol.residuals.sup_r0;
          row.r1 = sol.residuals.sup_r1;
          row.r2 = sol.residuals.sup_r2;
          row.regularity = sol.regularity.pass;
        }
        row.status = row.code == exit_code::ok                  ? "ok"
                     : row.code == exit_code::validation_failed ? "validation_failed"
                     : row.code == exit_code::regularity_failed ? "regularity_failed"
                                                                : "no_convergence";
      } catch (const std::exception& e) {
        row.code = exit_code::usage;
        row.status = "error";
        std::cerr << "sweep point " << i << ": " << e.what() << "\n";
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(sw.values.size())));
  std::vector<std::thread> pool;
  for (int k = 0; k < n; ++k) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  std::string csv = "parameter,value,status,exit_code,c1,c2,sup_r0,sup_r1,sup_r2,regularity_pass\n";
  bool any_ok = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    any_ok = any_ok || r.code == exit_code::ok;
    csv += sw.parameter + "," + format_number(sw.values[i]) + "," + r.status + "," +
           std::to_string(r.code) + "," + format_number(r.c1) + "," + format_number(r.c2) + "," +
           format_number(r.r0) + "," + format_number(r.r1) + "," + format_number(r.r2) + "," +
           (r.regularity ? "true" : "false") + "\n";
  }
  write_file_atomic(out_dir / "sweep.csv", csv);
  return any_ok ? exit_code::ok : exit_code::no_convergence;
}

int run_command(const std::string& command, const std::filesystem::path& config,
                const std::filesystem::path& out_dir, int workers) {
  try {
    if (command != "validate" && command != "solve" && command != "sweep") {
      std::cerr << "unknown command '" << command << "'\n";
      return exit_code::usage;
    }
    if (workers < 1) config_error("--workers must be at least 1");
    const RunConfig cfg = load_config(config);
    if (command == "validate") return cmd_validate(cfg, out_dir);
    if (command == "solve") return cmd_solve(cfg, out_dir);
    return cmd_sweep(cfg, out_dir, workers);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code::usage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return exit_code::usage;
  }
}

}  // namespace ricciwarp
