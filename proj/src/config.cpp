#include "moire/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "moire/error.hpp"

namespace moire {

namespace {

using Units = std::map<std::string, double>;

const std::map<std::string, Units>& unit_tables() {
  static const std::map<std::string, Units> tables = {
      {"length", {{"angstrom", 1.0}, {"A", 1.0}, {"nm", 10.0}}},
      {"angle", {{"deg", std::numbers::pi / 180.0}, {"rad", 1.0}}},
      {"energy", {{"meV/cell", 1.0}, {"eV/cell", 1000.0}}},
      {"gradient", {{"meV/angstrom", 1.0}, {"eV/angstrom", 1000.0}}},
  };
  return tables;
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

double parse_number(const std::string& s, const std::string& key) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(v))
    throw ConfigError(key, "expected a number, got '" + s + "'");
  return v;
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(path, "expected a mapping");
  for (const auto& kv : node) {
    const auto k = kv.first.as<std::string>();
    if (!allowed.count(k)) throw ConfigError(join(path, k), "unknown key");
  }
}

std::string scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key, "expected a scalar value");
  return n.Scalar();
}

double quantity(const YAML::Node& n, const std::string& kind, const std::string& key) {
  return parse_quantity(scalar(n, key), kind, key);
}

double number(const YAML::Node& n, const std::string& key) { return parse_number(scalar(n, key), key); }

int integer(const YAML::Node& n, const std::string& key) {
  const double v = number(n, key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key, "expected an integer");
  return static_cast<int>(v);
}

bool boolean(const YAML::Node& n, const std::string& key) {
  const std::string s = scalar(n, key);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError(key, "expected true or false");
}

double family_parameter(const YAML::Node& n, Family f, const std::string& key) {
  if (f == Family::Twist) return quantity(n, "angle", key);
  return number(n, key);
}

FamilyBlock parse_block(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"type", "parameter", "parameters", "grid"});
  FamilyBlock b;
  if (!node["type"]) throw ConfigError(join(path, "type"), "missing");
  try {
    b.family = parse_family(scalar(node["type"], join(path, "type")));
  } catch (const InvalidArgument& e) {
    throw ConfigError(join(path, "type"), e.what());
  }
  if (node["parameter"] && node["parameters"])
    throw ConfigError(path, "give either parameter or parameters, not both");
  if (node["parameter"]) {
    b.parameters.push_back(family_parameter(node["parameter"], b.family, join(path, "parameter")));
  } else if (node["parameters"]) {
    const auto list = node["parameters"];
    const std::string key = join(path, "parameters");
    if (!list.IsSequence()) throw ConfigError(key, "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i)
      b.parameters.push_back(family_parameter(list[i], b.family, key + "[" + std::to_string(i) + "]"));
    if (b.parameters.empty()) throw ConfigError(key, "parameter list is empty");
  } else {
    throw ConfigError(join(path, "parameter"), "missing");
  }
  if (node["grid"]) b.grid = integer(node["grid"], join(path, "grid"));
  if (b.grid < 0) throw ConfigError(join(path, "grid"), "must be positive");
  return b;
}

}  // namespace

double parse_quantity(const std::string& text, const std::string& kind, const std::string& key) {
  const auto& tables = unit_tables();
  const auto table = tables.find(kind);
  if (table == tables.end()) throw InvalidArgument("unknown quantity kind " + kind);
  std::istringstream in(text);
  std::string value, unit, extra;
  in >> value >> unit;
  if (unit.empty()) throw ConfigError(key, "missing unit in '" + text + "'");
  if (in >> extra) throw ConfigError(key, "trailing text in '" + text + "'");
  const auto u = table->second.find(unit);
  if (u == table->second.end()) throw ConfigError(key, "unit '" + unit + "' is not a " + kind + " unit");
  return parse_number(value, key) * u->second;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("", std::string("YAML syntax error: ") + e.what());
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  check_keys(root, "", {"material", "family", "sweep", "solver", "analysis", "wall", "output"});

  if (const auto m = root["material"]) {
    check_keys(m, "material", {"bond_length", "lambda", "mu", "lambda2", "mu2", "gsfe"});
    if (m["bond_length"]) cfg.bond_length = quantity(m["bond_length"], "length", "material.bond_length");
    if (m["lambda"]) cfg.moduli1.lambda = quantity(m["lambda"], "energy", "material.lambda");
    if (m["mu"]) cfg.moduli1.mu = quantity(m["mu"], "energy", "material.mu");
    cfg.moduli2 = cfg.moduli1;
    if (m["lambda2"]) cfg.moduli2.lambda = quantity(m["lambda2"], "energy", "material.lambda2");
    if (m["mu2"]) cfg.moduli2.mu = quantity(m["mu2"], "energy", "material.mu2");
    if (const auto g = m["gsfe"]) {
      check_keys(g, "material.gsfe", {"c0", "c1", "c2", "c3"});
      double* c[] = {&cfg.model.c0, &cfg.model.c1, &cfg.model.c2, &cfg.model.c3};
      for (int i = 0; i < 4; ++i) {
        const std::string k = "c" + std::to_string(i);
        if (g[k]) *c[i] = quantity(g[k], "energy", "material.gsfe." + k);
      }
    }
    if (!(cfg.bond_length > 0.0)) throw ConfigError("material.bond_length", "must be positive");
    try {
      cfg.moduli1.validate();
      cfg.moduli2.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError("material", e.what());
    }
  }

  if (root["family"] && root["sweep"]) throw ConfigError("sweep", "give either family or sweep, not both");
  if (const auto f = root["family"]) cfg.blocks.push_back(parse_block(f, "family"));
  if (const auto s = root["sweep"]) {
    if (!s.IsSequence()) throw ConfigError("sweep", "expected a list of family blocks");
    if (s.size() == 0) throw ConfigError("sweep", "sweep list is empty");
    for (std::size_t i = 0; i < s.size(); ++i)
      cfg.blocks.push_back(parse_block(s[i], "sweep[" + std::to_string(i) + "]"));
  }

  if (const auto s = root["solver"]) {
    check_keys(s, "solver", {"grid", "grad_tol", "max_iter", "memory", "warm_start", "precondition"});
    if (s["grid"]) {
      const std::string g = scalar(s["grid"], "solver.grid");
      cfg.solver.grid = g == "auto" ? 0 : integer(s["grid"], "solver.grid");
      if (cfg.solver.grid < 0 || (g != "auto" && cfg.solver.grid == 0))
        throw ConfigError("solver.grid", "must be a positive integer or auto");
    }
    if (s["grad_tol"]) cfg.solver.grad_tol = quantity(s["grad_tol"], "gradient", "solver.grad_tol");
    if (s["max_iter"]) cfg.solver.max_iter = integer(s["max_iter"], "solver.max_iter");
    if (s["memory"]) cfg.solver.memory = integer(s["memory"], "solver.memory");
    if (s["warm_start"]) cfg.solver.warm_start = boolean(s["warm_start"], "solver.warm_start");
    if (s["precondition"]) cfg.solver.precondition = boolean(s["precondition"], "solver.precondition");
    if (!(cfg.solver.grad_tol > 0.0)) throw ConfigError("solver.grad_tol", "must be positive");
    if (cfg.solver.max_iter < 1) throw ConfigError("solver.max_iter", "must be positive");
    if (cfg.solver.memory < 1) throw ConfigError("solver.memory", "must be positive");
  }

  if (const auto a = root["analysis"]) {
    check_keys(a, "analysis", {"map_resolution", "map_centering", "map_amplify", "projection",
                               "reference_fwhm", "field", "relaxed"});
    if (a["map_resolution"]) cfg.analysis.map_resolution = integer(a["map_resolution"], "analysis.map_resolution");
    if (cfg.analysis.map_resolution < 0) throw ConfigError("analysis.map_resolution", "must be positive");
    if (a["map_centering"]) {
      const std::string c = scalar(a["map_centering"], "analysis.map_centering");
      if (c == "origin")
        cfg.analysis.centering = MapCentering::Origin;
      else if (c == "aa")
        cfg.analysis.centering = MapCentering::AA;
      else
        throw ConfigError("analysis.map_centering", "expected origin or aa");
    }
    if (a["map_amplify"]) cfg.analysis.amplify = number(a["map_amplify"], "analysis.map_amplify");
    if (!(cfg.analysis.amplify > 0.0)) throw ConfigError("analysis.map_amplify", "must be positive");
    if (a["projection"]) {
      const std::string p = scalar(a["projection"], "analysis.projection");
      if (p == "burgers")
        cfg.analysis.projection = Projection::Burgers;
      else if (p == "fitted")
        cfg.analysis.projection = Projection::Fitted;
      else
        throw ConfigError("analysis.projection", "expected burgers or fitted");
    }
    if (a["reference_fwhm"])
      cfg.analysis.reference_fwhm = quantity(a["reference_fwhm"], "length", "analysis.reference_fwhm");
    if (a["field"]) cfg.analysis.field = scalar(a["field"], "analysis.field");
    if (a["relaxed"]) cfg.analysis.relaxed = boolean(a["relaxed"], "analysis.relaxed");
  }

  if (const auto w = root["wall"]) {
    check_keys(w, "wall", {"triplet", "rotation", "translation_angle", "half_length", "samples", "potential"});
    if (w["triplet"]) cfg.wall.triplet = integer(w["triplet"], "wall.triplet");
    if (cfg.wall.triplet < 1 || cfg.wall.triplet > 3) throw ConfigError("wall.triplet", "must be 1, 2 or 3");
    if (w["rotation"]) cfg.wall.rotation = quantity(w["rotation"], "angle", "wall.rotation");
    if (w["translation_angle"])
      cfg.wall.translation_angle = quantity(w["translation_angle"], "angle", "wall.translation_angle");
    if (w["half_length"]) cfg.wall.half_length = number(w["half_length"], "wall.half_length");
    if (!(cfg.wall.half_length > 0.0)) throw ConfigError("wall.half_length", "must be positive");
    if (w["samples"]) cfg.wall.samples = integer(w["samples"], "wall.samples");
    if (cfg.wall.samples < 5 || cfg.wall.samples % 2 == 0)
      throw ConfigError("wall.samples", "must be odd and at least 5");
    if (w["potential"]) {
      cfg.wall.potential = scalar(w["potential"], "wall.potential");
      if (cfg.wall.potential != "graphene" && cfg.wall.potential != "quartic" && cfg.wall.potential != "sine-gordon")
        throw ConfigError("wall.potential", "expected graphene, quartic or sine-gordon");
    }
  }

  if (const auto o = root["output"]) cfg.output_dir = scalar(o, "output");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

int auto_grid(const LayerPair& pair) {
  const MoireCell cell = moire_cell(pair, 1);
  const Mat2 g = cell.rank() == 2 ? cell.basis() : cell.grid_basis();
  const double length = cell.rank() == 2 ? std::max(g.col(0).norm(), g.col(1).norm()) : g.col(0).norm();
  if (length <= 400.0) return 128;
  if (length <= 800.0) return 256;
  return 512;
}

}  // namespace moire
