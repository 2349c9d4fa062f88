#include "mmc/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "mmc/errors.hpp"
#include "mmc/sensitivity.hpp"

namespace mmc {

namespace {

constexpr int kConvergenceWindow = 3;
constexpr double kTaperFloor = 0.05;

// Move-limit multiplier for the update that follows iteration k.
double taper_factor(const RunConfig& config, int k) {
  const double start = config.taper_start * config.max_iterations;
  const double end = config.max_iterations - 1;
  if (k <= start || end <= start) return 1.0;
  const double s = std::min(1.0, (k - start) / (end - start));
  return 1.0 - (1.0 - kTaperFloor) * s;
}

ProblemSpec spec_for(const RunConfig& config) {
  switch (config.problem) {
    case ProblemKind::ShortBeamA: return short_beam_problem(ShortBeamLoad::A);
    case ProblemKind::ShortBeamB: return short_beam_problem(ShortBeamLoad::B);
    case ProblemKind::Mbb: return mbb_problem();
    case ProblemKind::Custom: {
      ProblemSpec spec = config.custom;
      spec.name = "custom";
      return spec;
    }
  }
  return short_beam_problem(ShortBeamLoad::A);
}

ResolvedProblem resolve_spec(const RunConfig& config, ProblemSpec spec) {
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem '") + spec.name + "': " + e.what());
  }
  const Mesh mesh = mesh_for(spec);
  ResolvedProblem p{spec, mesh, boundary_conditions_for(spec, mesh), {}, {}, {}, 0, 0};
  p.material = {config.youngs_modulus, config.poisson_ratio};
  p.volume_reg = {config.n_exp, config.epsilon_factor * mesh.h(), config.alpha};
  p.stiffness_reg = p.volume_reg;
  if (config.void_scale > 0.0) p.stiffness_reg.alpha = config.void_scale;
  try {
    p.material.validate();
    p.volume_reg.validate();
    p.stiffness_reg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const bool mbb = config.problem == ProblemKind::Mbb;
  p.cells_x = config.cells_x > 0 ? config.cells_x : (mbb ? 6 : 4);
  p.cells_y = config.cells_y > 0 ? config.cells_y : 2;
  return p;
}

double max_normalized_change(std::span<const double> a, std::span<const double> b, const MmaBounds& bounds) {
  double change = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    change = std::max(change, std::abs(a[j] - b[j]) / (bounds.upper[j] - bounds.lower[j]));
  }
  return change;
}

}  // namespace

ResolvedProblem resolve_problem(const RunConfig& config) { return resolve_spec(config, spec_for(config)); }

Evaluation evaluate_design(std::span<const Component> comps, const ResolvedProblem& problem, bool with_gradients) {
  Evaluation ev;
  ev.densities = element_densities(comps, problem.mesh, problem.stiffness_reg);
  ev.solution = assemble_and_solve(problem.mesh, ev.densities, problem.bc, problem.material);
  ev.compliance = ev.solution.compliance;
  const bool same_floor = problem.volume_reg.alpha == problem.stiffness_reg.alpha;
  ev.volume = same_floor ? volume(ev.densities, problem.mesh)
                         : volume(element_densities(comps, problem.mesh, problem.volume_reg), problem.mesh);
  if (with_gradients) {
    ev.d_compliance = compliance_gradient(comps, problem.mesh, problem.stiffness_reg, ev.solution);
    ev.d_volume = volume_gradient(comps, problem.mesh, problem.volume_reg);
  }
  return ev;
}

RunResult run_optimization(const RunConfig& config, bool write_outputs, const IterationCallback& on_iteration,
                           std::optional<std::vector<Component>> initial_design) {
  config.validate();
  const ResolvedProblem problem = resolve_problem(config);

  RunResult result;
  if (initial_design) {
    result.initial_design = *initial_design;
  } else {
    try {
      result.initial_design = grid_initial_design(problem.cells_x, problem.cells_y, problem.spec, config.angle_p,
                                                  problem.volume_reg, std::nullopt, config.volume_target,
                                                  config.length_scale);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("initial design: ") + e.what());
    }
  }
  if (result.initial_design.empty()) throw ConfigError("initial design has no components");

  const std::size_t nc = result.initial_design.size();
  result.design_variable_count = kVarsPerComponent * nc;
  const MmaBounds bounds = design_bounds(problem.spec, nc, config.move_limit_fraction);

  std::vector<double> design = flatten(result.initial_design);
  for (std::size_t j = 0; j < design.size(); ++j) design[j] = std::clamp(design[j], bounds.lower[j], bounds.upper[j]);
  std::vector<double> previous = design;

  const double budget = problem.spec.volume_budget();
  const double area = problem.spec.area();
  MmaState state;
  double objective_scale = 0.0;
  int quiet_streak = 0;

  if (write_outputs) std::filesystem::create_directories(config.output_dir);

  for (int k = 1; k <= config.max_iterations; ++k) {
    const std::vector<Component> comps = unflatten(design);
    Evaluation ev;
    try {
      ev = evaluate_design(comps, problem);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(k) + ": " + e.what());
    }

    IterationRecord rec;
    rec.iteration = k;
    rec.compliance = ev.compliance;
    rec.volume = ev.volume;
    rec.volume_fraction = ev.volume / area;
    rec.constraint_value = ev.volume / budget - 1.0;
    rec.max_design_change = k == 1 ? 0.0 : max_normalized_change(design, previous, bounds);
    result.history.push_back(rec);
    if (on_iteration) on_iteration(rec);

    if (write_outputs && config.snapshot_interval > 0 && k % config.snapshot_interval == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "contour_%04d.svg", k);
      export_contour_svg(comps, problem.mesh, problem.volume_reg, std::filesystem::path(config.output_dir) / name);
    }

    if (k > 1) quiet_streak = rec.max_design_change < config.convergence_tol ? quiet_streak + 1 : 0;
    if (quiet_streak >= kConvergenceWindow) {
      result.converged = true;
      break;
    }
    if (k == config.max_iterations) break;

    if (k == 1) objective_scale = ev.compliance > 0.0 ? 1.0 / ev.compliance : 1.0;
    std::vector<double> df(ev.d_compliance.size());
    for (std::size_t j = 0; j < df.size(); ++j) df[j] = ev.d_compliance[j] * objective_scale;
    std::vector<double> dg(ev.d_volume.size());
    for (std::size_t j = 0; j < dg.size(); ++j) dg[j] = ev.d_volume[j] / budget;
    const std::vector<double> g{rec.constraint_value};

    MmaBounds step_bounds = bounds;
    const double taper = taper_factor(config, k);
    for (double& m : step_bounds.move_limit) m *= taper;

    MmaStep step;
    try {
      try {
        step = mma_update(design, ev.compliance * objective_scale, df, g, {dg}, step_bounds, state);
      } catch (const NumericalError&) {
        // The taper can leave too little room to restore feasibility.
        if (taper == 1.0) throw;
        step = mma_update(design, ev.compliance * objective_scale, df, g, {dg}, bounds, state);
      }
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(k) + ": " + e.what());
    }
    previous = design;
    design = std::move(step.x);
    state = std::move(step.state);
  }

  result.final_design = unflatten(design);
  if (write_outputs) write_artifacts(config, problem, result);
  return result;
}

void write_artifacts(const RunConfig& config, const ResolvedProblem& problem, const RunResult& result) {
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  if (config.write_history && !result.history.empty()) export_history_csv(result.history, dir / "history.csv");
  if (config.write_components) export_component_table(result.final_design, dir / "components.csv");
  if (config.write_contour) export_contour_svg(result.final_design, problem.mesh, problem.volume_reg, dir / "contour.svg");
  if (config.write_cad) {
    export_cad_svg(result.final_design, config.cad_threshold, dir / "cad.svg",
                   Domain{problem.spec.width, problem.spec.height});
  }
}

double relative_error(double analytic, double reference, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(reference), floor});
  return std::abs(analytic - reference) / scale;
}

std::vector<Component> random_gradcheck_design(const ResolvedProblem& problem, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const double w = problem.spec.width;
  const double hgt = problem.spec.height;

  // Three roughly horizontal bars anchored on the left edge. The middle one
  // spans the domain and carries the load at mid-height on the right; the
  // outer two stop short. A disconnected random layout hangs on the void
  // floor, and its compliance is too nonlinear for a central difference.
  auto draw = [&] {
    std::vector<Component> comps;
    const double outer_len = uniform(0.5, 1.2) * w;
    comps.push_back({0.5 * outer_len - uniform(0.05, 0.15), uniform(0.12, 0.22) * hgt, outer_len,
                     uniform(0.1, 0.16) * hgt, uniform(-0.08, 0.08)});
    comps.push_back({uniform(0.48, 0.52) * w, uniform(0.47, 0.53) * hgt, uniform(1.05, 1.1) * w,
                     uniform(0.24, 0.32) * hgt, uniform(-0.02, 0.02)});
    const double upper_len = uniform(0.5, 1.2) * w;
    comps.push_back({0.5 * upper_len - uniform(0.05, 0.15), uniform(0.78, 0.88) * hgt, upper_len,
                     uniform(0.1, 0.16) * hgt, uniform(-0.08, 0.08)});
    return comps;
  };

  const Regularization& reg = problem.stiffness_reg;
  // A little wider than the band so finite-difference steps cannot cross into it.
  Regularization wide = reg;
  wide.epsilon *= 1.05;

  auto bands_cross = [&](const std::vector<Component>& comps) {
    for (std::size_t e = 0; e < problem.mesh.element_count(); ++e) {
      for (const Point& gp : problem.mesh.gauss_points(e)) {
        const FieldSample s = structure_tdf(comps, gp, reg.exponent);
        if (smoothed_delta(s.phi_structure, wide) == 0.0) continue;
        for (std::size_t i = 0; i < comps.size(); ++i) {
          if (i != s.argmax_component && smoothed_delta(s.phi_per_component[i], wide) > 0.0) return true;
        }
      }
    }
    return false;
  };

  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<Component> comps = draw();
    if (!bands_cross(comps)) return comps;
  }
  throw NumericalError("random_gradcheck_design: no admissible design found");
}

GradientCheckReport gradient_check(const RunConfig& config, std::uint64_t seed) {
  ProblemSpec spec = short_beam_problem(ShortBeamLoad::A);
  spec.name = "gradcheck";
  spec.nx = 20;
  spec.ny = 10;
  const ResolvedProblem problem = resolve_spec(config, spec);

  GradientCheckReport report;
  report.design = random_gradcheck_design(problem, seed);
  const Evaluation ev = evaluate_design(report.design, problem);
  report.analytic_compliance = ev.d_compliance;
  report.analytic_volume = ev.d_volume;

  const MmaBounds bounds = design_bounds(spec, report.design.size(), 0.0);
  std::vector<double> steps(bounds.lower.size());
  for (std::size_t j = 0; j < steps.size(); ++j) steps[j] = 1e-5 * (bounds.upper[j] - bounds.lower[j]);
  const std::vector<double> d = flatten(report.design);

  report.fd_compliance = finite_difference_oracle(
      [&](std::span<const double> x) { return evaluate_design(unflatten(x), problem, false).compliance; }, d, steps);
  report.fd_volume = finite_difference_oracle(
      [&](std::span<const double> x) { return evaluate_design(unflatten(x), problem, false).volume; }, d, steps);

  for (std::size_t j = 0; j < d.size(); ++j) {
    report.max_rel_error_compliance = std::max(
        report.max_rel_error_compliance, relative_error(report.analytic_compliance[j], report.fd_compliance[j]));
    report.max_rel_error_volume =
        std::max(report.max_rel_error_volume, relative_error(report.analytic_volume[j], report.fd_volume[j]));
  }
  return report;
}

}  // namespace mmc
