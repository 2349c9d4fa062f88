// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// Usage: mmc_acceptance [scratch-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mmc/driver.hpp"
#include "mmc/errors.hpp"
#include "mmc/mma.hpp"
#include "oracles.hpp"

using namespace mmc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

struct Benchmark {
  ProblemKind kind;
  const char* name;
  double reference;
  double volume_limit;
};

struct BenchmarkOutcome {
  RunResult result;
  double seconds = 0.0;
};

BenchmarkOutcome run_benchmark(const Benchmark& b, const fs::path& dir) {
  RunConfig config;
  config.problem = b.kind;
  config.output_dir = (dir / b.name).string();
  const auto t0 = Clock::now();
  BenchmarkOutcome out;
  out.result = run_optimization(config);
  out.seconds = seconds_since(t0);
  return out;
}

void check_benchmark(int id, const Benchmark& b, const BenchmarkOutcome& o) {
  const auto& last = o.result.history.back();
  const double rel = (last.compliance - b.reference) / b.reference;
  const bool ok = std::abs(rel) <= 0.15 && last.volume_fraction <= b.volume_limit + 1e-3 &&
                  o.result.history.size() <= 200 && o.seconds <= 600.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%s: compliance %.3f vs %.2f (%+.1f%%), volume fraction %.5f (limit %.1f), %zu iterations, %.1f s",
                b.name, last.compliance, b.reference, 100 * rel, last.volume_fraction, b.volume_limit,
                o.result.history.size(), o.seconds);
  report(id, ok, buf);
}

void criterion_gradcheck() {
  const auto t0 = Clock::now();
  const auto r = gradient_check(RunConfig{}, 0);
  const double secs = seconds_since(t0);
  const double worst = std::max(r.max_rel_error_compliance, r.max_rel_error_volume);
  char buf[200];
  std::snprintf(buf, sizeof buf, "gradcheck seed 0: max rel error compliance %.3e, volume %.3e, %.1f s",
                r.max_rel_error_compliance, r.max_rel_error_volume, secs);
  report(4, worst <= 1e-3 && secs <= 30.0, buf);
}

void criterion_tdf() {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int checked = 0;
  while (checked < 1000) {
    const Component c{2 * u(rng), u(rng), 0.1 + 1.5 * u(rng), 0.05 + 0.45 * u(rng), 1.8 * u(rng) - 0.9};
    const double r = 0.5 * std::max(c.length, c.thickness);
    const Point x{c.x0 + r * (2.4 * u(rng) - 1.2), c.y0 + r * (2.4 * u(rng) - 1.2)};
    const double phi = oracle::tdf(c.x0, c.y0, c.length, c.thickness, c.sin_angle, 6, x.x, x.y);
    if (phi > 0.5 || phi < -5.0) continue;
    const auto g = component_tdf_gradient(c, x);
    const auto fd = oracle::tdf_gradient_fd(c.x0, c.y0, c.length, c.thickness, c.sin_angle, 6, x.x, x.y);
    for (std::size_t k = 0; k < 5; ++k) worst = std::max(worst, rel_err(g[k], fd[k]));
    ++checked;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "1000 TDF (component, point) pairs, |p| <= 0.9: max rel error %.3e", worst);
  report(5, worst <= 1e-5, buf);
}

void criterion_hiding() {
  RunConfig config;
  config.problem = ProblemKind::Custom;
  config.custom = short_beam_problem(ShortBeamLoad::A);
  config.custom.nx = 50;
  config.custom.ny = 25;
  const auto problem = resolve_problem(config);
  const std::vector<Component> base{{1.0, 0.5, 2.3, 0.5, 0.0}, {0.6, 0.8, 1.0, 0.12, 0.5}};
  auto with_hidden = base;
  with_hidden.push_back({1.2, 0.5, 0.5, 0.12, 0.3});
  const auto ev0 = evaluate_design(base, problem);
  const auto ev1 = evaluate_design(with_hidden, problem);
  const double dc = std::abs(ev1.compliance - ev0.compliance) / ev0.compliance;
  double cmax = 0.0, vmax = 0.0, hidden_c = 0.0, hidden_v = 0.0;
  for (std::size_t k = 0; k < ev1.d_compliance.size(); ++k) {
    cmax = std::max(cmax, std::abs(ev1.d_compliance[k]));
    vmax = std::max(vmax, std::abs(ev1.d_volume[k]));
    if (k >= 10) {
      hidden_c = std::max(hidden_c, std::abs(ev1.d_compliance[k]));
      hidden_v = std::max(hidden_v, std::abs(ev1.d_volume[k]));
    }
  }
  const double rc = hidden_c / cmax, rv = hidden_v / vmax;
  char buf[200];
  std::snprintf(buf, sizeof buf, "hidden component: compliance change %.2e, gradient ratio compliance %.2e volume %.2e",
                dc, rc, rv);
  report(6, dc <= 1e-8 && rc <= 1e-6 && rv <= 1e-6, buf);
}

BoundaryConditions clamped_left(const Mesh& m, Point load) {
  BoundaryConditions bc;
  for (int j = 0; j <= m.ny(); ++j) {
    bc.fixed_dofs.push_back(2 * m.node_index(0, j));
    bc.fixed_dofs.push_back(2 * m.node_index(0, j) + 1);
  }
  bc.point_loads.push_back({m.nearest_node(load), 0.0, -1.0});
  return bc;
}

void criterion_fem() {
  const ElementMatrix K = element_stiffness(Material{}, 0.02);
  Eigen::SelfAdjointEigenSolver<ElementMatrix> es(K);
  int zeros = 0;
  for (int k = 0; k < 8; ++k) zeros += std::abs(es.eigenvalues()(k)) <= 1e-10 * K.trace();

  const Mesh m = build_mesh(2, 1, 40, 20);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-3, 1.0);
  std::vector<double> rho(m.element_count());
  for (double& r : rho) r = u(rng);
  const auto sol = assemble_and_solve(m, rho, clamped_left(m, {2, 0.5}), Material{});
  const auto Ke = oracle::q4_stiffness_4x4(1.0, 0.3, m.h());
  double energy = 0.0;
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    Eigen::Matrix<double, 8, 1> ue;
    const auto dofs = m.element_dofs(e);
    for (int k = 0; k < 8; ++k) ue(k) = sol.displacements(static_cast<Eigen::Index>(dofs[k]));
    energy += rho[e] * ue.dot(Ke * ue);
  }
  const double identity = std::abs(sol.compliance - energy) / sol.compliance;

  auto solid = [](int nx, int ny) {
    const Mesh mesh = build_mesh(2, 1, nx, ny);
    return assemble_and_solve(mesh, std::vector<double>(mesh.element_count(), 1.0), clamped_left(mesh, {2, 0.5}),
                              Material{})
        .compliance;
  };
  const double coarse = solid(50, 25), fine = solid(100, 50);
  const double refine = std::abs(fine - coarse) / fine;
  char buf[220];
  std::snprintf(buf, sizeof buf,
                "element zero eigenvalues %d, energy identity rel %.2e, solid cantilever 50x25 %.4f vs 100x50 %.4f (%.2f%%)",
                zeros, identity, coarse, fine, 100 * refine);
  report(7, zeros == 3 && identity <= 1e-9 && refine < 0.02, buf);
}

void criterion_mma() {
  // (x - 1)^2 on [0, 2]
  std::vector<double> x{0.2};
  MmaState state;
  int quad_updates = 0;
  const MmaBounds b1{{0.0}, {2.0}, {2.0}};
  while (quad_updates < 30 && std::abs(x[0] - 1.0) > 1e-3) {
    const auto step = mma_update(x, (x[0] - 1) * (x[0] - 1), std::vector<double>{2 * (x[0] - 1)},
                                 std::vector<double>{-1.0}, {{0.0}}, b1, state);
    x = step.x;
    state = step.state;
    ++quad_updates;
  }
  const double quad_err = std::abs(x[0] - 1.0);

  // x1 + x2 subject to x1 x2 >= 1 on [0.1, 5]^2
  std::vector<double> y{3.0, 2.0};
  state = {};
  const MmaBounds b2{{0.1, 0.1}, {5.0, 5.0}, {4.9, 4.9}};
  for (int k = 0; k < 30; ++k) {
    const auto step = mma_update(y, y[0] + y[1], std::vector<double>{1.0, 1.0}, std::vector<double>{1 - y[0] * y[1]},
                                 {{-y[1], -y[0]}}, b2, state);
    y = step.x;
    state = step.state;
  }
  const double hyp_err = std::max(std::abs(y[0] - 1.0), std::abs(y[1] - 1.0));
  char buf[200];
  std::snprintf(buf, sizeof buf, "quadratic |x-1| %.1e after %d updates; hyperbola max|x-1| %.1e after 30 updates",
                quad_err, quad_updates, hyp_err);
  report(8, quad_err <= 1e-3 && quad_updates <= 30 && hyp_err <= 1e-2, buf);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "mmc_acceptance";
  fs::remove_all(scratch);
  const fs::path first = scratch / "first";
  const fs::path second = scratch / "second";

  const std::vector<Benchmark> benchmarks{{ProblemKind::ShortBeamA, "short_beam_a", 69.44, 0.5},
                                          {ProblemKind::ShortBeamB, "short_beam_b", 78.54, 0.5},
                                          {ProblemKind::Mbb, "mbb", 234.10, 0.4}};
  std::vector<BenchmarkOutcome> outcomes;
  try {
    for (std::size_t i = 0; i < benchmarks.size(); ++i) {
      outcomes.push_back(run_benchmark(benchmarks[i], first));
      check_benchmark(static_cast<int>(i) + 1, benchmarks[i], outcomes.back());
    }
    criterion_gradcheck();
    criterion_tdf();
    criterion_hiding();
    criterion_fem();
    criterion_mma();

    bool identical = true;
    std::string detail;
    for (const auto& b : benchmarks) {
      run_benchmark(b, second);
      for (const char* file : {"history.csv", "components.csv"}) {
        const auto a = slurp(first / b.name / file);
        const bool same = !a.empty() && a == slurp(second / b.name / file);
        identical = identical && same;
        if (!same) detail += std::string(" ") + b.name + "/" + file + " differs;";
      }
    }
    report(9, identical, identical ? "history.csv and components.csv byte-identical across two runs of each benchmark"
                                   : detail);

    const auto sa = outcomes[0].result.design_variable_count;
    const auto mb = outcomes[2].result.design_variable_count;
    report(10, sa == 80 && mb == 120,
           "design variables: short beam " + std::to_string(sa) + ", MBB " + std::to_string(mb));
  } catch (const std::exception& e) {
    std::printf("acceptance run aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
