#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "mmc/problems.hpp"

namespace mmc {

enum class ProblemKind { ShortBeamA, ShortBeamB, Mbb, Custom };

std::string_view to_string(ProblemKind kind);

/// Everything a run needs. Text form is flat `key = value` lines with `#`
/// comments and dotted section prefixes, e.g.
///
///     problem = short_beam_a
///     optimizer.max_iterations = 120
///     custom.supports = left xy; point 3 0 y
///     custom.loads = 2 0.5 0 -1
struct RunConfig {
  ProblemKind problem = ProblemKind::ShortBeamA;
  /// Only read when problem == Custom.
  ProblemSpec custom = short_beam_problem(ShortBeamLoad::A);

  int n_exp = kDefaultExponent;
  /// Heaviside half-bandwidth in element sizes.
  double epsilon_factor = 4.0;
  double alpha = 1e-3;

  double youngs_modulus = 1.0;
  double poisson_ratio = 0.3;
  /// Floor of the stiffness Heaviside; 0 means "same as alpha". 1e-6 gives
  /// the classic weak-material ratio.
  double void_scale = 0.0;

  int max_iterations = 150;
  double move_limit_fraction = 0.02;
  double convergence_tol = 1e-3;
  /// Move limits shrink linearly from this fraction of max_iterations down to
  /// 5% of their size at the last update; 1 disables the taper.
  double taper_start = 0.7;

  /// 0 selects the problem default (4x2 for the short beam, 6x2 for MBB).
  int cells_x = 0;
  int cells_y = 0;
  double angle_p = 0.70710678118654757;
  double volume_target = 1.0;
  double length_scale = 1.0;

  std::string output_dir = "out";
  bool write_history = true;
  bool write_components = true;
  bool write_contour = true;
  bool write_cad = true;
  double cad_threshold = 0.0;
  /// Write contour snapshots every k iterations; 0 disables.
  int snapshot_interval = 0;

  /// Reserved; only gradcheck draws random numbers.
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Throws ConfigError on malformed lines, unknown keys and out-of-range values;
/// the message carries the key and the 1-based line number.
RunConfig parse_config(std::string_view text);

/// Every key, in a stable order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Default config text for a named problem (short_beam_a, short_beam_b, mbb).
std::string default_config_text(std::string_view problem_name);

}  // namespace mmc
