#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "moire/analysis.hpp"
#include "moire/gsfe.hpp"
#include "moire/lattice.hpp"

namespace moire {

/// One deformation family with one or more parameter values (radians or strain).
struct FamilyBlock {
  Family family = Family::Twist;
  std::vector<double> parameters;
  /// Grid size; 0 picks one from the moire length.
  int grid = 0;
};

struct SolverConfig {
  int grid = 0;  // 0: automatic
  double grad_tol = 1e-6;
  int max_iter = 5000;
  int memory = 10;
  bool warm_start = true;
  bool precondition = true;
};

struct AnalysisConfig {
  int map_resolution = 0;  // 0: no map
  MapCentering centering = MapCentering::Origin;
  double amplify = 1.0;
  Projection projection = Projection::Burgers;
  double reference_fwhm = 0.0;  // Angstrom; 0: taken from the sweep
  std::string field;            // gsfe-map input; empty: relax first
  bool relaxed = true;          // gsfe-map of the rigid bilayer when false
};

struct WallConfig {
  int triplet = 1;
  double rotation = 0.0;  // radians
  /// theta0 + phi relative to the wall normal; unset: shear wall.
  std::optional<double> translation_angle;
  double half_length = 12.0;
  int samples = 4801;
  std::string potential = "graphene";  // graphene | quartic | sine-gordon
};

/**
 * Run configuration. Physical quantities are written with units, e.g.
 * "1.42 angstrom", "0.1 deg", "37950 meV/cell", "1e-6 meV/angstrom".
 */
struct RunConfig {
  double bond_length = 1.42;
  ElasticModuli moduli1 = ElasticModuli::graphene();
  ElasticModuli moduli2 = ElasticModuli::graphene();
  GsfeModel model = GsfeModel::graphene();
  std::vector<FamilyBlock> blocks;
  SolverConfig solver;
  AnalysisConfig analysis;
  WallConfig wall;
  std::string output_dir = "out";

  Basis2 reference() const { return Basis2::graphene(bond_length); }
};

/// Throws ConfigError naming the offending key on any schema violation.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Parses "<number> <unit>" for a quantity of the given kind
/// ("length", "angle", "energy", "gradient") into Angstrom, radians, meV per
/// unit-cell area or meV/Angstrom. `key` is used in error messages.
double parse_quantity(const std::string& text, const std::string& kind, const std::string& key);

/// 128 nodes per side up to L_M = 400 A, 256 up to 800 A, 512 beyond.
int auto_grid(const LayerPair& pair);

}  // namespace moire
