#include "moire/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>

#include "moire/domainwall.hpp"
#include "moire/error.hpp"
#include "moire/io.hpp"
#include "moire/relax.hpp"

namespace moire {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

fs::path prepare(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

const FamilyBlock& first_block(const RunConfig& cfg) {
  if (cfg.blocks.empty()) throw ConfigError("family", "missing");
  return cfg.blocks.front();
}

int grid_for(const RunConfig& cfg, const FamilyBlock& block, const LayerPair& pair) {
  if (block.grid > 0) return block.grid;
  if (cfg.solver.grid > 0) return cfg.solver.grid;
  return auto_grid(pair);
}

RelaxOptions relax_options(const RunConfig& cfg, int grid) {
  RelaxOptions o;
  o.grid_n = grid;
  o.grad_tol = cfg.solver.grad_tol;
  o.max_iter = cfg.solver.max_iter;
  o.memory = cfg.solver.memory;
  o.precondition = cfg.solver.precondition;
  return o;
}

std::string parameter_label(Family f, double p) {
  return format_double(f == Family::Twist ? p * 180.0 / std::numbers::pi : p);
}

std::string status_label(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::Converged: return "converged";
    case LbfgsStatus::MaxIterations: return "max_iter";
    case LbfgsStatus::LineSearchStalled: return "stalled";
  }
  return "unknown";
}

void write_energy_csv(const fs::path& path, const RelaxResult& r) {
  auto out = open_out(path);
  CsvWriter csv(out);
  csv.header({"term", "rigid_meV_per_cell", "relaxed_meV_per_cell", "relaxed_meV_per_angstrom2"});
  auto row = [&](const char* name, double rigid, double relaxed) {
    csv.row(std::vector<std::string>{name, format_double(rigid), format_double(relaxed),
                                     format_double(r.energy.per_area(relaxed))});
  };
  row("intra1", r.initial_energy.intra1, r.energy.intra1);
  row("intra2", r.initial_energy.intra2, r.energy.intra2);
  row("inter", r.initial_energy.inter, r.energy.inter);
  row("total", r.initial_energy.total, r.energy.total);
}

void write_trace_csv(const fs::path& path, const RelaxResult& r) {
  auto out = open_out(path);
  CsvWriter csv(out);
  csv.header({"iteration", "energy_meV", "grad_inf_meV_per_angstrom"});
  for (const auto& t : r.trace) csv.row(std::vector<double>{double(t.iteration), t.energy, t.grad_inf});
}

}  // namespace

int cmd_relax(const RunConfig& cfg, const CommandContext& ctx) {
  const FamilyBlock& block = first_block(cfg);
  const StrainFamily family{block.family, block.parameters.front()};
  const LayerPair pair = layer_pair(family, cfg.reference());
  const int grid = grid_for(cfg, block, pair);
  const fs::path dir = prepare(cfg);
  if (ctx.log)
    *ctx.log << "relax " << to_string(family.family) << ' ' << parameter_label(family.family, family.parameter)
             << " on a " << grid << " grid\n";

  const RelaxResult r = relax(pair, cfg.model, cfg.moduli1, cfg.moduli2, relax_options(cfg, grid));
  write_field(dir / "field.bin", r.field);
  write_energy_csv(dir / "energy.csv", r);
  write_trace_csv(dir / "trace.csv", r);
  if (cfg.analysis.map_resolution > 0) {
    const GsfeMap map = gsfe_map(r.field, pair, cfg.model, cfg.analysis.map_resolution, cfg.analysis.centering);
    write_gsfe_map(dir / "gsfe_map", map, cfg.analysis.amplify);
  }
  if (ctx.out)
    *ctx.out << status_label(r.status) << " after " << r.iterations << " iterations, E = "
             << format_double(r.energy.total) << " meV/cell (rigid " << format_double(r.initial_energy.total)
             << "), |grad|_inf = " << format_double(r.grad_inf) << '\n';
  if (!r.converged() && ctx.log) *ctx.log << "warning: gradient tolerance not reached\n";
  return r.converged() ? kOk : kNotConverged;
}

int cmd_dwall(const RunConfig& cfg, const CommandContext& ctx) {
  const fs::path dir = prepare(cfg);
  const WallConfig& w = cfg.wall;
  auto kink_out = open_out(dir / "kink.csv");
  auto out = open_out(dir / "dwall.csv");
  CsvWriter csv(out);
  csv.header({"quantity", "value"});
  auto put = [&](const std::string& k, double v) {
    csv.row(std::vector<std::string>{k, format_double(v)});
    if (ctx.out) *ctx.out << k << " = " << format_double(v) << '\n';
  };

  if (w.potential != "graphene") {
    const bool quartic = w.potential == "quartic";
    const double pi = std::numbers::pi;
    const WallPotential pot =
        quartic ? WallPotential::normalized([](double p) { return (1 - p) * (1 + p) * (1 - p) * (1 + p) / 8.0; },
                                            [](double p) { return -p * (1 - p) * (1 + p) / 2.0; })
                : WallPotential::normalized(
                      [pi](double p) {
                        const double c = std::cos(pi * p / 2.0);
                        return 2.0 * c * c / (pi * pi);
                      },
                      [pi](double p) { return -std::sin(pi * p) / pi; });
    const KinkSolution sol = solve_kink(pot, w.half_length, w.samples);
    double err = 0.0;
    for (std::size_t j = 0; j < sol.size(); ++j) {
      const double t = sol.t[j];
      const double exact = quartic ? std::tanh(t / 2.0) : (4.0 * std::atan(std::exp(t)) - pi) / pi;
      err = std::max(err, std::abs(sol.psi[j] - exact));
    }
    write_kink_csv(kink_out, sol);
    put("sup_error", err);
    put("kappa", sol.kappa);
    put("kappa_exact", quartic ? 2.0 : 4.0 / pi);
    put("residual", sol.residual);
    return kOk;
  }

  const Basis2 ref = cfg.reference();
  const BurgersTriplet bt = burgers_triplet(w.triplet, ref.lattice_constant());
  const double target = w.translation_angle.value_or(std::numbers::pi / 2.0);
  const double normal = bt.theta0 + w.rotation - target;
  const WallSpec spec = make_wall_spec(ref, w.triplet, w.rotation, cfg.moduli1, cfg.model, normal);
  const KinkSolution sol = solve_kink(spec, w.half_length, w.samples);
  const AsymptoticFit fit = asymptotic_check(sol);
  const WallWidths widths = characteristic_width(spec);
  const WallEnergy energy = wall_energy_per_length(spec, sol);
  const double kink_fwhm = fwhm(sol.t, sol.psi).width;
  write_kink_csv(kink_out, sol);
  put("k_min_meV_per_cell", spec.potential->k_min());
  put("l_perp_angstrom", widths.l_perp);
  put("l_phi_angstrom", widths.l_phi);
  put("l_parallel_angstrom", widths.l_parallel);
  put("fwhm_angstrom", kink_fwhm * widths.l_phi);
  put("fwhm_tanh_reference_angstrom", 2.0 * std::log(3.0) * widths.l_phi);
  put("kappa", fit.kappa);
  put("asymptotic_defect", fit.max_defect);
  put("residual", sol.residual);
  put("wall_energy_meV_per_angstrom", energy.total());
  put("gradient_energy_meV_per_angstrom", energy.gradient);
  put("potential_energy_meV_per_angstrom", energy.potential);
  return kOk;
}

SweepResult run_sweep(const RunConfig& cfg, const CommandContext& ctx) {
  if (cfg.blocks.empty()) throw ConfigError("sweep", "missing");
  const Basis2 ref = cfg.reference();
  SweepResult res;
  std::vector<double> thetas;
  std::vector<DisplacementField> twist_fields;

  for (const FamilyBlock& block : cfg.blocks) {
    std::vector<double> params = block.parameters;
    std::stable_sort(params.begin(), params.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
    std::optional<DisplacementField> previous;
    for (double p : params) {
      SweepPointResult pt;
      pt.family = {block.family, p};
      const std::string label = std::string(to_string(block.family)) + " " + parameter_label(block.family, p);
      try {
        const LayerPair pair = layer_pair(pt.family, ref);
        pt.grid = grid_for(cfg, block, pair);
        RelaxOptions opt = relax_options(cfg, pt.grid);
        if (cfg.solver.warm_start && previous) opt.initial = previous;
        if (ctx.log) *ctx.log << "relax " << label << " on a " << pt.grid << " grid\n";
        pt.relax = relax(pair, cfg.model, cfg.moduli1, cfg.moduli2, opt);
        if (!pt.relax.converged()) res.exit_code = std::max<int>(res.exit_code, kNotConverged);
        previous = pt.relax.field;
        auto rows = table2_pipeline({{pt.family, pt.relax.field}}, ref, cfg.moduli1, cfg.model, 1.0,
                                    cfg.analysis.projection);
        for (auto& row : rows) {
          if (ctx.log) *ctx.log << "  " << row.wall << " wall, FWHM " << format_double(row.fwhm) << " A\n";
          res.rows.push_back(std::move(row));
        }
        if (block.family == Family::Twist) {
          thetas.push_back(p);
          twist_fields.push_back(pt.relax.field);
        }
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        pt.error = e.what();
        if (ctx.log) *ctx.log << "error: " << label << ": " << e.what() << '\n';
        res.exit_code = kRowFailed;
      }
      res.points.push_back(std::move(pt));
    }
  }
  assign_ratios(res.rows, cfg.analysis.reference_fwhm);
  res.scaling = scaling_diagnostic(thetas, twist_fields, ref.cell_area());
  return res;
}

int cmd_sweep(const RunConfig& cfg, const CommandContext& ctx) {
  const fs::path dir = prepare(cfg);
  const SweepResult res = run_sweep(cfg, ctx);
  {
    auto out = open_out(dir / "relax.csv");
    CsvWriter csv(out);
    csv.header({"family", "parameter", "grid", "status", "iterations", "rigid_meV_per_cell",
                "relaxed_meV_per_cell", "grad_inf"});
    for (const auto& pt : res.points) {
      const std::string fam(to_string(pt.family.family));
      const std::string par = parameter_label(pt.family.family, pt.family.parameter);
      if (!pt.error.empty()) {
        csv.row(std::vector<std::string>{fam, par, std::to_string(pt.grid), "failed", "", "", "", ""});
        continue;
      }
      const RelaxResult& r = pt.relax;
      csv.row(std::vector<std::string>{fam, par, std::to_string(pt.grid), status_label(r.status),
                                       std::to_string(r.iterations), format_double(r.initial_energy.total),
                                       format_double(r.energy.total), format_double(r.grad_inf)});
    }
  }
  for (const auto& row : res.rows) {
    auto out = open_out(dir / ("profile_" + std::string(to_string(row.family)) + "_" +
                               parameter_label(row.family, row.parameter) + "_t" + std::to_string(row.triplet) +
                               ".csv"));
    CsvWriter csv(out);
    csv.header({"y_angstrom", "u"});
    for (std::size_t j = 0; j < row.profile.y.size(); ++j)
      csv.row(std::vector<double>{row.profile.y[j], row.profile.u[j]});
  }
  {
    auto out = open_out(dir / "table2.csv");
    write_table2_csv(out, res.rows);
  }
  if (!res.scaling.empty()) {
    auto out = open_out(dir / "scaling.csv");
    CsvWriter csv(out);
    csv.header({"theta_deg", "sobolev_norm", "scaled"});
    for (const auto& s : res.scaling)
      csv.row(std::vector<double>{s.theta * 180.0 / std::numbers::pi, s.norm, s.scaled});
  }
  if (ctx.out) write_table2_csv(*ctx.out, res.rows);
  return res.exit_code;
}

int cmd_gsfe_map(const RunConfig& cfg, const CommandContext& ctx) {
  const FamilyBlock& block = first_block(cfg);
  const StrainFamily family{block.family, block.parameters.front()};
  const LayerPair pair = layer_pair(family, cfg.reference());
  const fs::path dir = prepare(cfg);
  const int resolution = cfg.analysis.map_resolution > 0 ? cfg.analysis.map_resolution : 256;
  DisplacementField field;
  int code = kOk;
  if (!cfg.analysis.field.empty()) {
    field = read_field(cfg.analysis.field);
  } else {
    const int grid = grid_for(cfg, block, pair);
    if (cfg.analysis.relaxed) {
      const RelaxResult r = relax(pair, cfg.model, cfg.moduli1, cfg.moduli2, relax_options(cfg, grid));
      field = r.field;
      if (!r.converged()) code = kNotConverged;
    } else {
      field = DisplacementField::zero(moire_cell(pair, grid));
    }
  }
  const GsfeMap map = gsfe_map(field, pair, cfg.model, resolution, cfg.analysis.centering);
  write_gsfe_map(dir / "gsfe_map", map, cfg.analysis.amplify);
  if (ctx.out)
    *ctx.out << "map " << map.width << 'x' << map.height << ", misfit density " << format_double(map.min) << " .. "
             << format_double(map.max) << " meV/cell\n";
  return code;
}

}  // namespace moire
