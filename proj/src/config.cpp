#include "mmc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "mmc/errors.hpp"
#include "mmc/export.hpp"

namespace mmc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto end = pos == std::string_view::npos ? s.size() : pos;
    const auto piece = trim(s.substr(start, end - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

// Raised by value parsers; parse_config adds key and line context.
struct BadValue {
  std::string reason;
};

double to_double(std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) throw BadValue{"expected a number, got '" + std::string(v) + "'"};
  return out;
}

long long to_integer(std::string_view v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw BadValue{"expected an integer, got '" + std::string(v) + "'"};
  return out;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw BadValue{"expected true or false, got '" + std::string(v) + "'"};
}

void require(bool ok, const char* what) {
  if (!ok) throw BadValue{what};
}

std::string fmt(double v) { return format_shortest(v); }
std::string fmt(long long v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

ProblemKind to_problem(std::string_view v) {
  if (v == "short_beam_a") return ProblemKind::ShortBeamA;
  if (v == "short_beam_b") return ProblemKind::ShortBeamB;
  if (v == "mbb") return ProblemKind::Mbb;
  if (v == "custom") return ProblemKind::Custom;
  throw BadValue{"unknown problem '" + std::string(v) + "'"};
}

std::string_view restraint_name(Restraint r) {
  switch (r) {
    case Restraint::X: return "x";
    case Restraint::Y: return "y";
    case Restraint::XY: return "xy";
  }
  return "xy";
}

Restraint to_restraint(std::string_view v) {
  if (v == "x") return Restraint::X;
  if (v == "y") return Restraint::Y;
  if (v == "xy") return Restraint::XY;
  throw BadValue{"unknown restraint '" + std::string(v) + "' (x, y or xy)"};
}

std::string_view edge_name(Edge e) {
  switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
  }
  return "left";
}

std::vector<Support> to_supports(std::string_view v) {
  std::vector<Support> out;
  for (auto entry : split(v, ';')) {
    const auto w = words(entry);
    Support s;
    if (w.size() == 2) {
      if (w[0] == "left") s.edge = Edge::Left;
      else if (w[0] == "right") s.edge = Edge::Right;
      else if (w[0] == "bottom") s.edge = Edge::Bottom;
      else if (w[0] == "top") s.edge = Edge::Top;
      else throw BadValue{"unknown support edge '" + std::string(w[0]) + "'"};
      s.restraint = to_restraint(w[1]);
    } else if (w.size() == 4 && w[0] == "point") {
      s.point = {to_double(w[1]), to_double(w[2])};
      s.restraint = to_restraint(w[3]);
    } else {
      throw BadValue{"support entries look like 'left xy' or 'point X Y y'"};
    }
    out.push_back(s);
  }
  require(!out.empty(), "at least one support is required");
  return out;
}

std::string supports_text(const std::vector<Support>& supports) {
  std::string out;
  for (const auto& s : supports) {
    if (!out.empty()) out += "; ";
    if (s.edge) {
      out += std::string(edge_name(*s.edge)) + " " + std::string(restraint_name(s.restraint));
    } else {
      out += "point " + fmt(s.point.x) + " " + fmt(s.point.y) + " " + std::string(restraint_name(s.restraint));
    }
  }
  return out;
}

std::vector<LoadSpec> to_loads(std::string_view v) {
  std::vector<LoadSpec> out;
  for (auto entry : split(v, ';')) {
    const auto w = words(entry);
    if (w.size() != 4) throw BadValue{"load entries look like 'X Y FX FY'"};
    out.push_back({{to_double(w[0]), to_double(w[1])}, to_double(w[2]), to_double(w[3])});
  }
  return out;
}

std::string loads_text(const std::vector<LoadSpec>& loads) {
  std::string out;
  for (const auto& l : loads) {
    if (!out.empty()) out += "; ";
    out += fmt(l.at.x) + " " + fmt(l.at.y) + " " + fmt(l.fx) + " " + fmt(l.fy);
  }
  return out;
}

MirrorAxis to_mirror(std::string_view v) {
  if (v == "none") return MirrorAxis::None;
  if (v == "vertical") return MirrorAxis::Vertical;
  if (v == "horizontal") return MirrorAxis::Horizontal;
  throw BadValue{"symmetry must be none, vertical or horizontal"};
}

std::string_view mirror_name(MirrorAxis m) {
  switch (m) {
    case MirrorAxis::None: return "none";
    case MirrorAxis::Vertical: return "vertical";
    case MirrorAxis::Horizontal: return "horizontal";
  }
  return "none";
}

struct Key {
  std::string_view name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"problem", [](RunConfig& c, std::string_view v) { c.problem = to_problem(v); },
       [](const RunConfig& c) { return std::string(to_string(c.problem)); }},

      {"custom.name",
       [](RunConfig& c, std::string_view v) {
         require(!v.empty(), "must not be empty");
         c.custom.name = std::string(v);
       },
       [](const RunConfig& c) { return c.custom.name; }},
      {"custom.width",
       [](RunConfig& c, std::string_view v) {
         c.custom.width = to_double(v);
         require(c.custom.width > 0.0, "must be positive");
       },
       [](const RunConfig& c) { return fmt(c.custom.width); }},
      {"custom.height",
       [](RunConfig& c, std::string_view v) {
         c.custom.height = to_double(v);
         require(c.custom.height > 0.0, "must be positive");
       },
       [](const RunConfig& c) { return fmt(c.custom.height); }},
      {"custom.nx",
       [](RunConfig& c, std::string_view v) {
         const auto n = to_integer(v);
         require(n >= 1 && n <= 100000, "must lie in [1, 100000]");
         c.custom.nx = static_cast<int>(n);
       },
       [](const RunConfig& c) { return fmt(static_cast<long long>(c.custom.nx)); }},
      {"custom.ny",
       [](RunConfig& c, std::string_view v) {
         const auto n = to_integer(v);
         require(n >= 1 && n <= 100000, "must lie in [1, 100000]");
         c.custom.ny = static_cast<int>(n);
       },
       [](const RunConfig& c) { return fmt(static_cast<long long>(c.custom.ny)); }},
      {"custom.volume_fraction",
       [](RunConfig& c, std::string_view v) {
         c.custom.volume_fraction_max = to_double(v);
         require(c.custom.volume_fraction_max > 0.0 && c.custom.volume_fraction_max < 1.0, "must lie in (0, 1)");
       },
       [](const RunConfig& c) { return fmt(c.custom.volume_fraction_max); }},
      {"custom.supports", [](RunConfig& c, std::string_view v) { c.custom.supports = to_supports(v); },
       [](const RunConfig& c) { return supports_text(c.custom.supports); }},
      {"custom.loads", [](RunConfig& c, std::string_view v) { c.custom.loads = to_loads(v); },
       [](const RunConfig& c) { return loads_text(c.custom.loads); }},
      {"custom.symmetry", [](RunConfig& c, std::string_view v) { c.custom.symmetry = to_mirror(v); },
       [](const RunConfig& c) { return std::string(mirror_name(c.custom.symmetry)); }},

      {"regularization.n_exp",
       [](RunConfig& c, std::string_view v) {
         const auto n = to_integer(v);
         require(n >= 2 && n <= 64 && n % 2 == 0, "must be an even integer in [2, 64]");
         c.n_exp = static_cast<int>(n);
       },
       [](const RunConfig& c) { return fmt(static_cast<long long>(c.n_exp)); }},
      {"regularization.epsilon_factor",
       [](RunConfig& c, std::string_view v) {
         c.epsilon_factor = to_double(v);
         require(c.epsilon_factor > 0.0, "must be positive");
       },
       [](const RunConfig& c) { return fmt(c.epsilon_factor); }},
      {"regularization.alpha",
       [](RunConfig& c, std::string_view v) {
         c.alpha = to_double(v);
         require(c.alpha > 0.0 && c.alpha <= 0.01, "must lie in (0, 0.01]");
       },
       [](const RunConfig& c) { return fmt(c.alpha); }},

      {"material.E",
       [](RunConfig& c, std::string_view v) {
         c.youngs_modulus = to_double(v);
         require(c.youngs_modulus > 0.0, "must be positive");
       },
       [](const RunConfig& c) { return fmt(c.youngs_modulus); }},
      {"material.nu",
       [](RunConfig& c, std::string_view v) {
         c.poisson_ratio = to_double(v);
         require(c.poisson_ratio > -1.0 && c.poisson_ratio < 0.5, "must lie in (-1, 0.5)");
       },
       [](const RunConfig& c) { return fmt(c.poisson_ratio); }},
      {"material.void_scale",
       [](RunConfig& c, std::string_view v) {
         c.void_scale = to_double(v);
         require(c.void_scale == 0.0 || (c.void_scale > 0.0 && c.void_scale <= 0.01), "must be 0 or lie in (0, 0.01]");
       },
       [](const RunConfig& c) { return fmt(c.void_scale); }},

      {"optimizer.max_iterations",
       [](RunConfig& c, std::string_view v) {
         const auto n = to_integer(v);
         require(n >= 1 && n <= 1000000, "must lie in [1, 1000000]");
         c.max_iterations = static_cast<int>(n);
       },
       [](const RunConfig& c) { return fmt(static_cast<long long>(c.max_iterations)); }},
      {"optimizer.move_limit_fraction",
       [](RunConfig& c, std::string_view v) {
         c.move_limit_fraction = to_double(v);
         require(c.move_limit_fraction >= 0.0 && c.move_limit_fraction <= 1.0, "must lie in [0, 1]");
       },
       [](const RunConfig& c) { return fmt(c.move_limit_fraction); }},
      {"optimizer.convergence_tol",
       [](RunConfig& c, std::string_view v) {
         c.convergence_tol = to_double(v);
         require(c.convergence_tol > 0.0, "must be positive");
       },
       [](const RunConfig& c) { return fmt(c.convergence_tol); }},
      {"optimizer.taper_start",
       [](RunConfig& c, std::string_view v) {
         c.taper_start = to_double(v);
         require(c.taper_start >= 0.0 && c.taper_start <= 1.0, "must lie in [0, 1]");
       },
       [](const RunConfig& c) { return fmt(c.taper_start); }},

      {"initial.cells_x",
       [](RunConfig& c, std::string_view v) {
         const auto n = to_integer(v);
         require(n >= 0 && n <= 1000, "must lie in [0, 1000] (0 = problem default)");
         c.cells_x = static_cast<int>(n);
       },
       [](const RunConfig& c) { return fmt(static_cast<long long>(c.cells_x)); }},
      {"initial.cells_y",
       [](RunConfig& c, std::string_view v) {
         const auto n = to_integer(v);
         require(n >= 0 && n <= 1000, "must lie in [0, 1000] (0 = problem default)");
         c.cells_y = static_cast<int>(n);
       },
       [](const RunConfig& c) { return fmt(static_cast<long long>(c.cells_y)); }},
      {"initial.angle_p",
       [](RunConfig& c, std::string_view v) {
         c.angle_p = to_double(v);
         require(std::abs(c.angle_p) <= kMaxSinAngle, "must satisfy |angle_p| <= 0.995");
       },
       [](const RunConfig& c) { return fmt(c.angle_p); }},
      {"initial.volume_target",
       [](RunConfig& c, std::string_view v) {
         c.volume_target = to_double(v);
         require(c.volume_target >= 0.8 && c.volume_target <= 1.2, "must lie in [0.8, 1.2]");
       },
       [](const RunConfig& c) { return fmt(c.volume_target); }},
      {"initial.length_scale",
       [](RunConfig& c, std::string_view v) {
         c.length_scale = to_double(v);
         require(c.length_scale > 0.0 && c.length_scale <= 2.0, "must lie in (0, 2]");
       },
       [](const RunConfig& c) { return fmt(c.length_scale); }},

      {"output.directory",
       [](RunConfig& c, std::string_view v) {
         require(!v.empty(), "must not be empty");
         c.output_dir = std::string(v);
       },
       [](const RunConfig& c) { return c.output_dir; }},
      {"output.history", [](RunConfig& c, std::string_view v) { c.write_history = to_bool(v); },
       [](const RunConfig& c) { return fmt(c.write_history); }},
      {"output.components", [](RunConfig& c, std::string_view v) { c.write_components = to_bool(v); },
       [](const RunConfig& c) { return fmt(c.write_components); }},
      {"output.contour", [](RunConfig& c, std::string_view v) { c.write_contour = to_bool(v); },
       [](const RunConfig& c) { return fmt(c.write_contour); }},
      {"output.cad", [](RunConfig& c, std::string_view v) { c.write_cad = to_bool(v); },
       [](const RunConfig& c) { return fmt(c.write_cad); }},
      {"output.cad_threshold",
       [](RunConfig& c, std::string_view v) {
         c.cad_threshold = to_double(v);
         require(c.cad_threshold >= 0.0, "must be >= 0");
       },
       [](const RunConfig& c) { return fmt(c.cad_threshold); }},
      {"output.snapshot_interval",
       [](RunConfig& c, std::string_view v) {
         const auto n = to_integer(v);
         require(n >= 0 && n <= 1000000, "must be >= 0");
         c.snapshot_interval = static_cast<int>(n);
       },
       [](const RunConfig& c) { return fmt(static_cast<long long>(c.snapshot_interval)); }},

      {"seed",
       [](RunConfig& c, std::string_view v) {
         const auto n = to_integer(v);
         require(n >= 0, "must be >= 0");
         c.seed = static_cast<std::uint64_t>(n);
       },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
  };
  return table;
}

}  // namespace

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::ShortBeamA: return "short_beam_a";
    case ProblemKind::ShortBeamB: return "short_beam_b";
    case ProblemKind::Mbb: return "mbb";
    case ProblemKind::Custom: return "custom";
  }
  return "custom";
}

void RunConfig::validate() const {
  // Round through the text form so the same per-key checks apply.
  parse_config(serialize_config(*this));
  if (problem == ProblemKind::Custom) {
    try {
      custom.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("custom problem: ") + e.what());
    }
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::vector<std::string_view> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 'key = value'";
      throw ConfigError(os.str());
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) {
      std::ostringstream os;
      os << "line " << line_no << ": unknown key '" << key << "'";
      throw ConfigError(os.str());
    }
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      std::ostringstream os;
      os << "line " << line_no << ": key '" << key << "' given twice";
      throw ConfigError(os.str());
    }
    seen.push_back(it->name);
    try {
      it->set(config, value);
    } catch (const BadValue& bad) {
      std::ostringstream os;
      os << "line " << line_no << ": key '" << key << "': " << bad.reason;
      throw ConfigError(os.str());
    }
  }
  return config;
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : keys()) {
    out += k.name;
    out += " = ";
    out += k.get(config);
    out += '\n';
  }
  return out;
}

std::string default_config_text(std::string_view problem_name) {
  RunConfig config;
  try {
    config.problem = to_problem(problem_name);
  } catch (const BadValue& bad) {
    throw ConfigError(bad.reason);
  }
  std::ostringstream os;
  os << "# Topology optimization with moving deformable components.\n"
     << "# Flat 'key = value' lines; '#' starts a comment.\n";
  os << serialize_config(config);
  return os.str();
}

}  // namespace mmc
