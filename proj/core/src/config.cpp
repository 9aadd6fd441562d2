#include "bsch/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bsch {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + " " + what);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) fail(key, "is not a number: '" + v + "'");
    return x;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(key, "is not a number: '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) fail(key, "is not an integer: '" + v + "'");
    return x;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(key, "is not an integer: '" + v + "'");
  }
}

}  // namespace

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;

  std::map<std::string, std::function<void(const std::string&, const std::string&)>> handlers;
  auto dbl = [&](double& target) {
    return [&target](const std::string& key, const std::string& v) { target = to_double(key, v); };
  };
  auto integer = [&](int& target) {
    return [&target](const std::string& key, const std::string& v) {
      target = static_cast<int>(to_long(key, v));
    };
  };
  auto text = [&](std::string& target) {
    return [&target](const std::string&, const std::string& v) { target = v; };
  };

  handlers["mesh.kind"] = text(cfg.mesh.kind);
  handlers["mesh.n"] = integer(cfg.mesh.n);
  handlers["mesh.length"] = dbl(cfg.mesh.length);
  handlers["mesh.nx"] = integer(cfg.mesh.nx);
  handlers["mesh.ny"] = integer(cfg.mesh.ny);
  handlers["mesh.lx"] = dbl(cfg.mesh.lx);
  handlers["mesh.ly"] = dbl(cfg.mesh.ly);
  handlers["params.sigma"] = dbl(cfg.params.sigma);
  handlers["params.chi"] = dbl(cfg.params.chi);
  handlers["params.kappa"] = dbl(cfg.params.kappa);
  handlers["params.viscous_eps"] = dbl(cfg.params.viscous_eps);
  handlers["params.yosida_eps"] = dbl(cfg.params.yosida_eps);
  handlers["params.m0"] = dbl(cfg.params.m0);
  handlers["step.dt"] = dbl(cfg.step.dt);
  handlers["step.t_end"] = dbl(cfg.step.t_end);
  handlers["step.newton_tol"] = dbl(cfg.step.newton_tol);
  handlers["step.newton_max_iter"] = integer(cfg.step.newton_max_iter);
  handlers["step.linesearch"] = text(cfg.step.linesearch);
  handlers["step.clamp_k"] = integer(cfg.step.clamp_k);
  handlers["step.dt_min"] = dbl(cfg.step.dt_min);
  handlers["step.dt_max"] = dbl(cfg.step.dt_max);
  handlers["init.profile"] = text(cfg.init.profile);
  handlers["init.seed"] = [&cfg](const std::string& key, const std::string& v) {
    cfg.init.seed = static_cast<std::uint64_t>(to_long(key, v));
  };
  handlers["init.amplitude"] = dbl(cfg.init.amplitude);
  handlers["init.tanh_center"] = dbl(cfg.init.tanh_center);
  handlers["init.tanh_width"] = dbl(cfg.init.tanh_width);
  handlers["init.xmod_amplitude"] = dbl(cfg.init.xmod_amplitude);
  handlers["init.file"] = text(cfg.init.file);
  handlers["output.every_steps"] = integer(cfg.output.every_steps);
  handlers["potential.kind"] = text(cfg.potential.kind);
  handlers["potential.c"] = dbl(cfg.potential.c);
  handlers["potential.gamma"] = dbl(cfg.potential.gamma);
  handlers["surface_potential.kind"] = [&cfg](const std::string&, const std::string& v) {
    cfg.surface_potential.kind = v;
    cfg.surface_potential_set = true;
  };
  handlers["surface_potential.c"] = [&cfg](const std::string& key, const std::string& v) {
    cfg.surface_potential.c = to_double(key, v);
    cfg.surface_potential_set = true;
  };
  handlers["surface_potential.gamma"] = [&cfg](const std::string& key, const std::string& v) {
    cfg.surface_potential.gamma = to_double(key, v);
    cfg.surface_potential_set = true;
  };
  handlers["steady.tol"] = dbl(cfg.steady.tol);
  handlers["steady.guess"] = text(cfg.steady.guess);
  handlers["steady.file"] = text(cfg.steady.file);
  handlers["steady.radius"] = dbl(cfg.steady.radius);
  handlers["steady.samples"] = integer(cfg.steady.samples);

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = handlers.find(key);
    if (it == handlers.end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    it->second(key, value);
  }

  // Range and cross-field validation, before anything is allocated.
  if (cfg.mesh.kind != "interval" && cfg.mesh.kind != "strip")
    fail("mesh.kind", "must be 'interval' or 'strip'");
  if (cfg.mesh.kind == "interval") {
    if (cfg.mesh.n < 4) fail("mesh.n", "must be >= 4");
    if (!(cfg.mesh.length > 0.0)) fail("mesh.length", "must be > 0");
  } else {
    if (cfg.mesh.nx < 4 || cfg.mesh.ny < 4) fail("mesh.nx/mesh.ny", "must be >= 4");
    if (!(cfg.mesh.lx > 0.0) || !(cfg.mesh.ly > 0.0)) fail("mesh.lx/mesh.ly", "must be > 0");
  }
  if (cfg.params.sigma < 0.0) fail("params.sigma", "must be >= 0");
  if (!(cfg.params.chi > 0.0)) fail("params.chi", "must be > 0");
  if (cfg.params.kappa < 0.0) fail("params.kappa", "must be >= 0");
  if (cfg.params.viscous_eps < 0.0) fail("params.viscous_eps", "must be >= 0");
  if (cfg.params.yosida_eps < 0.0) fail("params.yosida_eps", "must be >= 0");
  if (!(cfg.params.m0 > -1.0 && cfg.params.m0 < 1.0))
    fail("params.m0", "must lie in open interval (-1,1)");
  if (!(cfg.step.dt > 0.0)) fail("step.dt", "must be > 0");
  if (!(cfg.step.t_end >= 0.0)) fail("step.t_end", "must be >= 0");
  if (!(cfg.step.newton_tol > 0.0)) fail("step.newton_tol", "must be > 0");
  if (cfg.step.newton_max_iter < 1) fail("step.newton_max_iter", "must be >= 1");
  if (cfg.step.linesearch != "none" && cfg.step.linesearch != "backtracking")
    fail("step.linesearch", "must be 'none' or 'backtracking'");
  if (cfg.step.clamp_k < 2) fail("step.clamp_k", "must be >= 2");
  if (cfg.init.profile != "constant" && cfg.init.profile != "random" &&
      cfg.init.profile != "tanh" && cfg.init.profile != "file")
    fail("init.profile", "must be one of constant|random|tanh|file");
  if (!(cfg.init.amplitude >= 0.0)) fail("init.amplitude", "must be >= 0");
  if (cfg.init.profile == "file") {
    if (cfg.init.file.empty()) fail("init.file", "is required for init.profile = file");
    if (!std::filesystem::exists(cfg.init.file))
      fail("init.file", "does not exist: " + cfg.init.file);
  }
  if (cfg.output.every_steps < 1) fail("output.every_steps", "must be >= 1");
  if (cfg.potential.kind != "logarithmic" && cfg.potential.kind != "polynomial")
    fail("potential.kind", "must be 'logarithmic' or 'polynomial'");
  if (cfg.potential.kind == "logarithmic" && !(cfg.potential.c > 0.0))
    fail("potential.c", "must be > 0");
  if (cfg.surface_potential_set) {
    if (cfg.surface_potential.kind != "logarithmic" && cfg.surface_potential.kind != "polynomial")
      fail("surface_potential.kind", "must be 'logarithmic' or 'polynomial'");
  } else {
    cfg.surface_potential = cfg.potential;
  }
  if (!(cfg.steady.tol > 0.0)) fail("steady.tol", "must be > 0");
  if (!(cfg.steady.radius > 0.0)) fail("steady.radius", "must be > 0");
  if (cfg.steady.samples < 8) fail("steady.samples", "must be >= 8");
  if (cfg.steady.guess != "constant" && cfg.steady.guess != "from-file")
    fail("steady.guess", "must be 'constant' or 'from-file'");
  if (cfg.steady.guess == "from-file") {
    if (cfg.steady.file.empty()) fail("steady.file", "is required for steady.guess = from-file");
    if (!std::filesystem::exists(cfg.steady.file))
      fail("steady.file", "does not exist: " + cfg.steady.file);
  }
  return cfg;
}

std::vector<std::string> effective_config_lines(const RunConfig& cfg) {
  std::vector<std::string> out;
  char buf[160];
  auto add = [&](const std::string& key, const std::string& value) {
    out.push_back(key + " = " + value);
  };
  auto addf = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    add(key, buf);
  };
  auto addi = [&](const std::string& key, long v) { add(key, std::to_string(v)); };

  add("mesh.kind", cfg.mesh.kind);
  if (cfg.mesh.kind == "interval") {
    addi("mesh.n", cfg.mesh.n);
    addf("mesh.length", cfg.mesh.length);
  } else {
    addi("mesh.nx", cfg.mesh.nx);
    addi("mesh.ny", cfg.mesh.ny);
    addf("mesh.lx", cfg.mesh.lx);
    addf("mesh.ly", cfg.mesh.ly);
  }
  addf("params.sigma", cfg.params.sigma);
  addf("params.chi", cfg.params.chi);
  addf("params.kappa", cfg.params.kappa);
  addf("params.viscous_eps", cfg.params.viscous_eps);
  addf("params.yosida_eps", cfg.params.yosida_eps);
  addf("params.m0", cfg.params.m0);
  addf("step.dt", cfg.step.dt);
  addf("step.t_end", cfg.step.t_end);
  addf("step.newton_tol", cfg.step.newton_tol);
  addi("step.newton_max_iter", cfg.step.newton_max_iter);
  add("step.linesearch", cfg.step.linesearch);
  addi("step.clamp_k", cfg.step.clamp_k);
  addf("step.dt_min", cfg.step.dt_min);
  addf("step.dt_max", cfg.step.dt_max);
  add("init.profile", cfg.init.profile);
  addi("init.seed", static_cast<long>(cfg.init.seed));
  addf("init.amplitude", cfg.init.amplitude);
  addf("init.tanh_center", cfg.init.tanh_center);
  addf("init.tanh_width", cfg.init.tanh_width);
  addf("init.xmod_amplitude", cfg.init.xmod_amplitude);
  if (!cfg.init.file.empty()) add("init.file", cfg.init.file);
  addi("output.every_steps", cfg.output.every_steps);
  add("potential.kind", cfg.potential.kind);
  addf("potential.c", cfg.potential.c);
  addf("potential.gamma", cfg.potential.gamma);
  add("surface_potential.kind", cfg.surface_potential.kind);
  addf("surface_potential.c", cfg.surface_potential.c);
  addf("surface_potential.gamma", cfg.surface_potential.gamma);
  addf("steady.tol", cfg.steady.tol);
  add("steady.guess", cfg.steady.guess);
  if (!cfg.steady.file.empty()) add("steady.file", cfg.steady.file);
  addf("steady.radius", cfg.steady.radius);
  addi("steady.samples", cfg.steady.samples);
  std::sort(out.begin(), out.end());
  return out;
}

Mesh build_mesh(const RunConfig& cfg) {
  if (cfg.mesh.kind == "interval") return Mesh::interval(cfg.mesh.n, cfg.mesh.length);
  return Mesh::strip(cfg.mesh.nx, cfg.mesh.ny, cfg.mesh.lx, cfg.mesh.ly);
}

PotentialSpec build_potential(const RunConfig::PotentialCfg& pc) {
  if (pc.kind == "logarithmic") return PotentialSpec::logarithmic(pc.c);
  return PotentialSpec::polynomial(pc.gamma);
}

PotentialPair build_potential_pair(const RunConfig& cfg) {
  return make_potential_pair(build_potential(cfg.potential),
                             build_potential(cfg.surface_potential), cfg.params.yosida_eps);
}

InitialProfile build_profile(const RunConfig& cfg) {
  InitialProfile p;
  if (cfg.init.profile == "constant") p.kind = InitialProfile::Kind::constant;
  if (cfg.init.profile == "random") p.kind = InitialProfile::Kind::random;
  if (cfg.init.profile == "tanh") p.kind = InitialProfile::Kind::tanh;
  if (cfg.init.profile == "file") p.kind = InitialProfile::Kind::file;
  p.amplitude = cfg.init.amplitude;
  p.seed = cfg.init.seed;
  p.tanh_center = cfg.init.tanh_center;
  p.tanh_width = cfg.init.tanh_width;
  p.xmod_amplitude = cfg.init.xmod_amplitude;
  p.file = cfg.init.file;
  return p;
}

StepConfig build_step_config(const RunConfig& cfg) {
  StepConfig sc;
  sc.dt = cfg.step.dt;
  sc.newton_tol = cfg.step.newton_tol;
  sc.newton_max_iter = cfg.step.newton_max_iter;
  sc.linesearch = cfg.step.linesearch == "none" ? StepConfig::Linesearch::none
                                                : StepConfig::Linesearch::backtracking;
  sc.clamp_k = cfg.step.clamp_k;
  sc.dt_min = cfg.step.dt_min;
  sc.dt_max = cfg.step.dt_max;
  return sc;
}

}  // namespace bsch
