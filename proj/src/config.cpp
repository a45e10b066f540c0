#include "hgl/config.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hgl/integer_base.hpp"

namespace hgl {

std::string mode_name(RunMode m) {
  switch (m) {
    case RunMode::solve: return "solve";
    case RunMode::refine: return "refine";
    case RunMode::analyze: return "analyze";
    case RunMode::sequence: return "sequence";
    case RunMode::gamma: return "gamma";
    case RunMode::verify: return "verify";
  }
  return "?";
}

CellSpec RunConfig::make_cell() const {
  if (!omega_is_rational)
    throw std::runtime_error("config: this mode needs an exact rational omega");
  CellSpec cell;
  cell.base = build_integer_base(omega);
  cell.p = cell_p;
  cell.M = cell_M;
  cell.L = cell_L;
  cell.delta = cell_delta;
  return cell;
}

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) fail(line, "malformed number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(line, "malformed number '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) fail(line, "malformed integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(line, "malformed integer '" + s + "'");
  }
}

Rational parse_rational(const std::string& s, int line) {
  const std::size_t slash = s.find('/');
  if (slash == std::string::npos) return Rational(parse_int(s, line));
  return Rational(parse_int(s.substr(0, slash), line),
                  parse_int(s.substr(slash + 1), line));
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, "empty key");
    if (value.empty()) fail(lineno, "empty value for '" + key + "'");
    auto [it, inserted] = entries.emplace(key, Entry{value, lineno});
    if (!inserted)
      fail(lineno, "duplicate key '" + key + "' (first on line " +
                       std::to_string(it->second.line) + ")");
  }

  RunConfig cfg;
  bool have_n = false, have_omega = false, have_kind = false, have_d = false;
  std::string omega_raw;
  int omega_line = 0;

  auto take = [&entries](const std::string& key) -> const Entry* {
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    return &it->second;
  };

  static const std::vector<std::string> known = {
      "n", "omega", "mode",
      "potential.kind", "potential.d", "potential.ell",
      "potential.modulation.mean", "potential.modulation.amplitude",
      "potential.modulation.frequency",
      "cell.M", "cell.L", "cell.p", "cell.delta",
      "grid.resolutions",
      "solver.tol", "solver.max_iters", "solver.seed", "solver.eta0", "solver.d0_mode",
      "analysis.theta", "analysis.theta0", "analysis.radii", "analysis.epsilons",
      "analysis.kmax", "analysis.r0", "analysis.M0_bound", "analysis.a_window",
      "sequence.denominators",
      "gamma.scales", "gamma.alpha_mean", "gamma.alpha_amplitude",
      "io.field"};
  for (const auto& [key, entry] : entries) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) fail(entry.line, "unknown key '" + key + "'");
  }

  if (const Entry* e = take("n")) {
    cfg.n = static_cast<int>(parse_int(e->value, e->line));
    if (cfg.n < 1 || cfg.n > 3) fail(e->line, "n must lie in [1,3]");
    have_n = true;
  }
  if (const Entry* e = take("omega")) {
    omega_raw = e->value;
    omega_line = e->line;
    have_omega = true;
  }
  if (const Entry* e = take("mode")) {
    const std::string& v = e->value;
    if (v == "solve") cfg.mode = RunMode::solve;
    else if (v == "refine") cfg.mode = RunMode::refine;
    else if (v == "analyze") cfg.mode = RunMode::analyze;
    else if (v == "sequence") cfg.mode = RunMode::sequence;
    else if (v == "gamma") cfg.mode = RunMode::gamma;
    else if (v == "verify") cfg.mode = RunMode::verify;
    else fail(e->line, "mode must be one of solve|refine|analyze|sequence|gamma|verify");
  }

  if (const Entry* e = take("potential.kind")) {
    const std::string& v = e->value;
    if (v == "quartic") { cfg.potential.kind = PotentialKind::quartic; cfg.potential.d = 2.0; }
    else if (v == "power_d") { cfg.potential.kind = PotentialKind::power_d; cfg.potential.d = 1.0; }
    else if (v == "indicator") { cfg.potential.kind = PotentialKind::indicator; cfg.potential.d = 0.0; }
    else fail(e->line, "potential.kind must be quartic|power_d|indicator");
    have_kind = true;
  }
  if (const Entry* e = take("potential.d")) {
    cfg.potential.d = parse_double(e->value, e->line);
    if (cfg.potential.d < 0 || cfg.potential.d > 2) fail(e->line, "d must lie in [0,2]");
    have_d = true;
  }
  if (const Entry* e = take("potential.ell")) {
    cfg.potential.ell = parse_double(e->value, e->line);
    if (!(cfg.potential.ell > 0 && cfg.potential.ell < 1))
      fail(e->line, "ell must lie in (0,1)");
  }
  if (const Entry* e = take("potential.modulation.mean"))
    cfg.potential.modulation.mean = parse_double(e->value, e->line);
  if (const Entry* e = take("potential.modulation.amplitude")) {
    cfg.potential.modulation.amplitude = parse_double(e->value, e->line);
    if (cfg.potential.modulation.amplitude < 0) fail(e->line, "amplitude must be >= 0");
  }
  if (const Entry* e = take("potential.modulation.frequency")) {
    auto ts = tokens(e->value);
    cfg.potential.modulation.frequency.resize(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::int64_t f = parse_int(ts[i], e->line);
      if (f < 1) fail(e->line, "frequencies must be positive integers");
      cfg.potential.modulation.frequency[static_cast<int>(i)] = static_cast<int>(f);
    }
  }

  if (const Entry* e = take("cell.M")) {
    cfg.cell_M = parse_double(e->value, e->line);
    if (!(cfg.cell_M >= 10.0)) fail(e->line, "M must be >= 10");
  }
  if (const Entry* e = take("cell.L")) cfg.cell_L = parse_double(e->value, e->line);
  if (const Entry* e = take("cell.p")) {
    cfg.cell_p = static_cast<int>(parse_int(e->value, e->line));
    if (cfg.cell_p < 1) fail(e->line, "p must be a positive integer");
  }
  if (const Entry* e = take("cell.delta")) {
    cfg.cell_delta = parse_double(e->value, e->line);
    if (!(cfg.cell_delta > 0 && cfg.cell_delta < 0.5))
      fail(e->line, "delta must lie in (0, 1/2)");
  }

  if (const Entry* e = take("grid.resolutions")) {
    auto ts = tokens(e->value);
    const std::size_t nt = 2 * static_cast<std::size_t>(cfg.n) - 1;
    if (ts.size() != nt + 2)
      fail(e->line, "grid.resolutions needs " + std::to_string(nt + 2) +
                        " entries for n=" + std::to_string(cfg.n));
    cfg.resolutions.transverse.clear();
    for (std::size_t i = 0; i < nt; ++i) {
      const std::int64_t v = parse_int(ts[i], e->line);
      if (v < 8) fail(e->line, "resolutions must be >= 8 per axis");
      cfg.resolutions.transverse.push_back(static_cast<int>(v));
    }
    cfg.resolutions.along = static_cast<int>(parse_int(ts[nt], e->line));
    cfg.resolutions.vertical = static_cast<int>(parse_int(ts[nt + 1], e->line));
    if (cfg.resolutions.along < 8 || cfg.resolutions.vertical < 8)
      fail(e->line, "resolutions must be >= 8 per axis");
    cfg.resolutions_given = true;
  }

  if (const Entry* e = take("solver.tol")) {
    cfg.solver.tol = parse_double(e->value, e->line);
    if (!(cfg.solver.tol > 0)) fail(e->line, "tol must be positive");
  }
  if (const Entry* e = take("solver.max_iters")) {
    cfg.solver.max_iters = static_cast<int>(parse_int(e->value, e->line));
    if (cfg.solver.max_iters < 1) fail(e->line, "max_iters must be >= 1");
  }
  if (const Entry* e = take("solver.seed"))
    cfg.solver.seed = static_cast<std::uint64_t>(parse_int(e->value, e->line));
  if (const Entry* e = take("solver.eta0")) {
    cfg.solver.eta0 = parse_double(e->value, e->line);
    if (!(cfg.solver.eta0 > 0)) fail(e->line, "eta0 must be positive");
  }
  if (const Entry* e = take("solver.d0_mode")) {
    if (e->value == "true") cfg.solver.d0_mode = true;
    else if (e->value == "false") cfg.solver.d0_mode = false;
    else fail(e->line, "d0_mode must be true or false");
  }

  if (const Entry* e = take("analysis.theta")) {
    cfg.theta = parse_double(e->value, e->line);
    if (!(cfg.theta > 0 && cfg.theta < 1)) fail(e->line, "theta must lie in (0,1)");
  }
  if (const Entry* e = take("analysis.theta0")) {
    cfg.theta0 = parse_double(e->value, e->line);
    if (!(cfg.theta0 > 0 && cfg.theta0 < 1)) fail(e->line, "theta0 must lie in (0,1)");
  }
  if (const Entry* e = take("analysis.radii")) {
    for (const auto& t : tokens(e->value)) {
      const double r = parse_double(t, e->line);
      if (!(r > 0)) fail(e->line, "radii must be positive");
      cfg.radii.push_back(r);
    }
  }
  if (const Entry* e = take("analysis.epsilons")) {
    cfg.epsilons.clear();
    for (const auto& t : tokens(e->value)) {
      const double v = parse_double(t, e->line);
      if (!(v > 0 && v <= 1)) fail(e->line, "epsilons must lie in (0,1]");
      cfg.epsilons.push_back(v);
    }
  }
  if (const Entry* e = take("analysis.kmax")) {
    cfg.kmax = static_cast<int>(parse_int(e->value, e->line));
    if (cfg.kmax < 1) fail(e->line, "kmax must be >= 1");
  }
  if (const Entry* e = take("analysis.r0")) {
    cfg.r0 = parse_double(e->value, e->line);
    if (!(cfg.r0 > 0)) fail(e->line, "r0 must be positive");
  }
  if (const Entry* e = take("analysis.M0_bound")) {
    cfg.M0_bound = parse_double(e->value, e->line);
    if (!(cfg.M0_bound > 0)) fail(e->line, "M0_bound must be positive");
  }
  if (const Entry* e = take("analysis.a_window")) {
    cfg.a_window = parse_double(e->value, e->line);
    if (!(cfg.a_window > 0)) fail(e->line, "a_window must be positive");
  }

  if (const Entry* e = take("sequence.denominators")) {
    cfg.denominators.clear();
    for (const auto& t : tokens(e->value)) {
      const std::int64_t q = parse_int(t, e->line);
      if (q < 1) fail(e->line, "denominators must be positive");
      cfg.denominators.push_back(q);
    }
  }
  if (const Entry* e = take("gamma.scales")) {
    cfg.gamma_scales.clear();
    for (const auto& t : tokens(e->value)) {
      const std::int64_t v = parse_int(t, e->line);
      if (v < 1) fail(e->line, "scales must be positive integers");
      cfg.gamma_scales.push_back(static_cast<int>(v));
    }
  }
  if (const Entry* e = take("gamma.alpha_mean"))
    cfg.alpha_mean = parse_double(e->value, e->line);
  if (const Entry* e = take("gamma.alpha_amplitude")) {
    cfg.alpha_amplitude = parse_double(e->value, e->line);
    if (cfg.alpha_amplitude < 0) fail(e->line, "alpha_amplitude must be >= 0");
  }
  if (const Entry* e = take("io.field")) cfg.field_path = e->value;

  if (!have_n) throw std::runtime_error("config: missing required key 'n'");
  if (!have_omega) throw std::runtime_error("config: missing required key 'omega'");
  if (!have_kind) throw std::runtime_error("config: missing required key 'potential.kind'");
  if (cfg.potential.kind == PotentialKind::power_d && !have_d)
    throw std::runtime_error("config: potential.kind=power_d requires potential.d");

  // Direction vector: fractions stay exact, decimals mark a sequence target.
  {
    auto ts = tokens(omega_raw);
    if (ts.size() != 2 * static_cast<std::size_t>(cfg.n))
      fail(omega_line, "omega needs " + std::to_string(2 * cfg.n) + " entries");
    bool any_decimal = false;
    for (const auto& t : ts) any_decimal = any_decimal || t.find('.') != std::string::npos;
    cfg.omega_real.resize(static_cast<int>(ts.size()));
    cfg.omega.resize(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (any_decimal) {
        cfg.omega_real[static_cast<int>(i)] = parse_double(ts[i], omega_line);
      } else {
        cfg.omega[i] = parse_rational(ts[i], omega_line);
        cfg.omega_real[static_cast<int>(i)] = cfg.omega[i].to_double();
      }
    }
    cfg.omega_is_rational = !any_decimal;
    if (cfg.omega_real.norm() == 0) fail(omega_line, "omega must be nonzero");
    if (!cfg.omega_is_rational && cfg.mode != RunMode::sequence)
      fail(omega_line, "decimal omega is only valid in sequence mode");
  }

  if (!(cfg.cell_L > cfg.cell_M))
    throw std::runtime_error("config: cell.L must exceed cell.M");
  if (!cfg.resolutions_given) {
    cfg.resolutions.transverse.assign(2 * static_cast<std::size_t>(cfg.n) - 1, 8);
    cfg.resolutions.along = 128;
    cfg.resolutions.vertical = 8;
  }
  if (cfg.potential.modulation.frequency.size() == 0) {
    cfg.potential.modulation.frequency =
        Eigen::VectorXi::Ones(2 * cfg.n);
  }
  cfg.potential.validate(2 * cfg.n);
  if (cfg.a_window == 0.0) cfg.a_window = cfg.cell_M / 2.0;
  return cfg;
}

}  // namespace hgl
