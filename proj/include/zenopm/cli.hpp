#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "zenopm/zenopm.hpp"

// Command-line frontend: one subcommand per quantity plus the sweep, figure,
// Monte Carlo, and inverse-design drivers. Exit codes: 0 success, 1 usage
// error, 2 numerical-domain error.

namespace zenopm::cli {

namespace detail {

// Accepts "a,b,c" lists and "first:last:step" ranges (inclusive endpoints).
inline std::vector<double> parse_real_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    try {
      if (c1 == std::string::npos) {
        out.push_back(std::stod(item));
        continue;
      }
      const auto c2 = item.find(':', c1 + 1);
      if (c2 == std::string::npos) throw SpecError("");
      const double first = std::stod(item.substr(0, c1));
      const double last = std::stod(item.substr(c1 + 1, c2 - c1 - 1));
      const double step = std::stod(item.substr(c2 + 1));
      if (!(step > 0.0) || last < first) throw SpecError("");
      for (double v = first; v <= last + 0.5 * step; v += step) {
        out.push_back(std::min(v, last));
      }
    } catch (const std::exception&) {
      throw SpecError("could not parse " + field + " entry '" + item +
                      "' (expected value, comma list, or first:last:step)");
    }
  }
  if (out.empty()) throw SpecError(field + ": empty list");
  return out;
}

inline std::vector<std::int64_t> parse_stage_list(const std::string& text,
                                                  const std::string& field) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    try {
      if (c1 == std::string::npos) {
        out.push_back(std::stoll(item));
        continue;
      }
      const auto c2 = item.find(':', c1 + 1);
      if (c2 == std::string::npos) throw SpecError("");
      const std::int64_t first = std::stoll(item.substr(0, c1));
      const std::int64_t last = std::stoll(item.substr(c1 + 1, c2 - c1 - 1));
      const std::int64_t step = std::stoll(item.substr(c2 + 1));
      if (step < 1 || last < first) throw SpecError("");
      for (std::int64_t v = first; v <= last; v += step) out.push_back(v);
    } catch (const std::exception&) {
      throw SpecError("could not parse " + field + " entry '" + item +
                      "' (expected value, comma list, or first:last:step)");
    }
  }
  if (out.empty()) throw SpecError(field + ": empty list");
  return out;
}

struct OutputOptions {
  std::string format = "csv";
  std::string path;  // empty = stdout
};

inline void write_text(const std::string& text, const OutputOptions& options) {
  if (options.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(options.path, std::ios::binary);
  if (!file) throw SpecError("cannot open output file '" + options.path + "'");
  file << text;
}

inline void emit_rows(const std::vector<SweepRow>& rows, const nlohmann::json& spec_echo,
                      const OutputOptions& options) {
  if (options.format == "json") {
    nlohmann::json j;
    j["version"] = kVersion;
    j["spec"] = spec_echo;
    j["rows"] = rows_to_json(rows);
    write_text(j.dump(2) + "\n", options);
  } else {
    std::ostringstream out;
    write_csv(rows, out);
    write_text(out.str(), options);
  }
}

inline void emit_density(const std::vector<DensityRow>& rows, const nlohmann::json& spec_echo,
                         const OutputOptions& options) {
  if (options.format == "json") {
    nlohmann::json j;
    j["version"] = kVersion;
    j["spec"] = spec_echo;
    j["rows"] = density_to_json(rows);
    write_text(j.dump(2) + "\n", options);
  } else {
    std::ostringstream out;
    write_density_csv(rows, out);
    write_text(out.str(), options);
  }
}

struct GridFlags {
  double min_q = 0.0;
  double max_q = 0.0;
  std::int64_t points = 0;

  void attach(CLI::App* cmd) {
    auto* a = cmd->add_option("--grid-min", min_q, "Grid lower bound");
    auto* b = cmd->add_option("--grid-max", max_q, "Grid upper bound");
    auto* c = cmd->add_option("--grid-points", points, "Number of grid points");
    a->needs(b)->needs(c);
    b->needs(a)->needs(c);
    c->needs(a)->needs(b);
    flag_min = a;
  }

  std::optional<GridSpec> spec() const {
    if (flag_min == nullptr || flag_min->count() == 0) return std::nullopt;
    return GridSpec{min_q, max_q, points};
  }

 private:
  CLI::Option* flag_min = nullptr;
};

inline std::string padded_stage_quantity(std::size_t stage, std::size_t n_stages) {
  int width = 1;
  for (std::size_t v = n_stages; v >= 10; v /= 10) ++width;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "mc_alive_%0*zu", width, stage);
  return buf;
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"Zeno protective measurement toolkit: closed-form pointer statistics,\n"
               "exact-moment oracles, and Monte Carlo ensemble simulation."};
  app.set_version_flag("--version", std::string("zenopm ") + kVersion);
  app.require_subcommand(1);

  // Shared option storage; CLI11 binds per-subcommand copies below.
  struct Shared {
    std::string r_list, stage_list, sigma_list;
    double r = 0.0, sigma = 0.0;
    std::int64_t stages = 0;
    std::int64_t photons = 0;
    std::uint64_t seed = 0;
    detail::OutputOptions output;
  };

  auto add_output = [](CLI::App* cmd, detail::OutputOptions& output) {
    cmd->add_option("--format", output.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", output.path, "Write output to a file instead of stdout");
  };

  int status = 0;

  // --- wavepacket: exact and approximate final densities on a grid
  {
    auto* cmd = app.add_subcommand(
        "wavepacket", "Tabulate the exact and approximate final pointer densities");
    auto shared = std::make_shared<Shared>();
    auto grid = std::make_shared<detail::GridFlags>();
    auto normalized = std::make_shared<bool>(false);
    auto allow_large = std::make_shared<bool>(false);
    cmd->add_option("--r", shared->r, "Weight of the |+> component")->required();
    cmd->add_option("--stages", shared->stages, "Number of Zeno stages")->required();
    cmd->add_option("--sigma", shared->sigma, "Initial pointer width")->required();
    grid->attach(cmd);
    cmd->add_flag("--normalized", *normalized,
                  "Rescale densities by their survival probabilities");
    cmd->add_flag("--allow-large-pairwise", *allow_large,
                  "Lift the N cap on pairwise overlap sums (used by --normalized)");
    add_output(cmd, shared->output);
    cmd->callback([shared, grid, normalized, allow_large] {
      const SystemState state(shared->r);
      const ZenoConfig config(shared->stages, shared->sigma);
      const GridSpec grid_spec = grid->spec().value_or(default_grid(config));
      const GridDensity exact = grid_density(state, config, grid_spec);
      const GaussianApprox approx = approx_final_packet(state, config);
      double exact_scale = 1.0;
      double approx_scale = 1.0;
      if (*normalized) {
        exact_scale = 1.0 / exact_survival(state, config, *allow_large);
        approx_scale = 1.0 / survival_probability(state, config);
      }
      std::vector<DensityRow> rows;
      rows.reserve(exact.q.size());
      for (std::size_t i = 0; i < exact.q.size(); ++i) {
        rows.push_back(DensityRow{exact.q[i], exact.density[i] * exact_scale,
                                  approx.density(exact.q[i]) * approx_scale, shared->r,
                                  shared->stages, shared->sigma});
      }
      nlohmann::json echo{{"command", "wavepacket"},
                          {"r", shared->r},
                          {"N", shared->stages},
                          {"sigma", shared->sigma},
                          {"normalized", *normalized},
                          {"grid_min", grid_spec.min_q},
                          {"grid_max", grid_spec.max_q},
                          {"grid_points", grid_spec.points}};
      detail::emit_density(rows, echo, shared->output);
    });
  }

  // --- quantity sweep subcommands sharing one implementation
  struct QuantityCommand {
    const char* name;
    const char* help;
    std::vector<Quantity> quantities;
  };
  for (const QuantityCommand& qc :
       {QuantityCommand{"survival", "Survival probability over an (r, N, sigma) grid",
                        {Quantity::survival}},
        QuantityCommand{"width", "Final pointer width and broadening ratio",
                        {Quantity::width, Quantity::width_ratio}},
        QuantityCommand{"performance", "Performance quantifier R = u_SM / u_PM",
                        {Quantity::performance}}}) {
    auto* cmd = app.add_subcommand(qc.name, qc.help);
    auto shared = std::make_shared<Shared>();
    auto quantities = std::make_shared<std::vector<Quantity>>(qc.quantities);
    auto exact = std::make_shared<bool>(false);
    auto largen = std::make_shared<bool>(false);
    auto allow_large = std::make_shared<bool>(false);
    cmd->add_option("--r", shared->r_list, "r values (list or first:last:step)")->required();
    cmd->add_option("--stages", shared->stage_list, "Stage counts (list or range)")->required();
    cmd->add_option("--sigma", shared->sigma_list, "Pointer widths (list or range)")->required();
    const bool is_survival = std::string(qc.name) == "survival";
    const bool is_performance = std::string(qc.name) == "performance";
    CLI::Option* photons_opt = nullptr;
    if (is_survival) {
      cmd->add_flag("--exact", *exact, "Also emit the exact (oracle) survival probability");
      cmd->add_flag("--allow-large-pairwise", *allow_large,
                    "Lift the N cap on pairwise overlap sums");
    }
    if (is_performance) {
      cmd->add_flag("--largen", *largen, "Also emit the large-N limit of R");
      photons_opt = cmd->add_option("--photons", shared->photons,
                                    "Also emit u_SM and u_PM for this photon budget");
    }
    add_output(cmd, shared->output);
    cmd->callback([shared, quantities, exact, largen, allow_large, photons_opt] {
      SweepSpec spec;
      spec.r_values = detail::parse_real_list(shared->r_list, "--r");
      spec.stage_values = detail::parse_stage_list(shared->stage_list, "--stages");
      spec.sigma_values = detail::parse_real_list(shared->sigma_list, "--sigma");
      spec.quantities = *quantities;
      spec.allow_large_pairwise = *allow_large;
      if (*exact) spec.quantities.push_back(Quantity::survival_exact);
      if (*largen) spec.quantities.push_back(Quantity::performance_limit);
      if (photons_opt != nullptr && photons_opt->count() > 0) {
        spec.photons = shared->photons;
        spec.quantities.push_back(Quantity::u_sm);
        spec.quantities.push_back(Quantity::u_pm);
      }
      const SweepResult result = run_sweep(spec);
      detail::emit_rows(result.rows, spec_to_json(result.spec), shared->output);
    });
  }

  // --- montecarlo: ensemble simulation of one parameter point
  {
    auto* cmd = app.add_subcommand("montecarlo",
                                   "Simulate photon ensembles through both schemes");
    auto shared = std::make_shared<Shared>();
    auto grid = std::make_shared<detail::GridFlags>();
    auto scheme = std::make_shared<std::string>("both");
    auto attrition = std::make_shared<bool>(false);
    cmd->add_option("--r", shared->r, "Weight of the |+> component")->required();
    cmd->add_option("--stages", shared->stages, "Number of Zeno stages")->required();
    cmd->add_option("--sigma", shared->sigma, "Initial pointer width")->required();
    cmd->add_option("--photons", shared->photons, "Ensemble size M")->required();
    cmd->add_option("--seed", shared->seed, "RNG seed")->required();
    cmd->add_option("--scheme", *scheme, "Which scheme(s) to simulate")
        ->check(CLI::IsMember({"both", "protective", "projective"}))
        ->capture_default_str();
    cmd->add_flag("--attrition", *attrition, "Emit per-stage survivor counts");
    grid->attach(cmd);
    add_output(cmd, shared->output);
    cmd->callback([shared, grid, scheme, attrition] {
      const SystemState state(shared->r);
      const double weakness = 1.0 / (shared->sigma * static_cast<double>(shared->stages));
      const std::string base_flags = weakness > 1.0 ? "strong-regime" : "";
      const auto grid_spec = grid->spec();
      const GridSpec* grid_ptr = grid_spec ? &*grid_spec : nullptr;

      std::vector<SweepRow> rows;
      const auto add_row = [&](const char* quantity, double value, bool degenerate = false) {
        SweepRow row{shared->r, shared->stages, shared->sigma, quantity, value, weakness,
                     base_flags};
        if (degenerate) {
          if (!row.flags.empty()) row.flags += ';';
          row.flags += "degenerate";
        }
        rows.push_back(std::move(row));
      };
      const auto add_protective = [&](const EnsembleStats& stats) {
        add_row("mc_survivors", static_cast<double>(stats.survivors));
        add_row("mc_survival",
                static_cast<double>(stats.survivors) / static_cast<double>(stats.photons_in));
        add_row("mc_mean", stats.mean_shift, stats.degenerate);
        add_row("mc_std", stats.sample_std, stats.degenerate);
        add_row("mc_sem", stats.mean_std_error, stats.degenerate);
        if (*attrition) {
          for (std::size_t k = 0; k < stats.stage_survivors.size(); ++k) {
            add_row(detail::padded_stage_quantity(k + 1, stats.stage_survivors.size()).c_str(),
                    static_cast<double>(stats.stage_survivors[k]));
          }
        }
      };
      const auto add_projective = [&](const EnsembleStats& stats) {
        add_row("mc_proj_mean", stats.mean_shift, stats.degenerate);
        add_row("mc_proj_std", stats.sample_std, stats.degenerate);
        add_row("mc_proj_sem", stats.mean_std_error, stats.degenerate);
      };

      const ZenoConfig config(shared->stages, shared->sigma);
      const RunSeed seed{shared->seed};
      if (*scheme == "both") {
        const PerformanceEstimate est =
            empirical_performance(state, config, shared->photons, seed, 0, grid_ptr);
        add_projective(est.projective);
        add_protective(est.protective);
        add_row("mc_performance", est.value, est.degenerate);
      } else if (*scheme == "protective") {
        add_protective(simulate_protective(state, config, shared->photons, seed, 0, grid_ptr));
      } else {
        add_projective(simulate_projective(state, shared->photons, seed));
      }
      nlohmann::json echo{{"command", "montecarlo"}, {"r", shared->r},
                          {"N", shared->stages},    {"sigma", shared->sigma},
                          {"photons", shared->photons}, {"seed", shared->seed},
                          {"scheme", *scheme}};
      detail::emit_rows(rows, echo, shared->output);
    });
  }

  // --- sweep: free-form grid over any quantity set
  {
    auto* cmd = app.add_subcommand("sweep", "Evaluate quantities over an (r, N, sigma) grid");
    auto shared = std::make_shared<Shared>();
    auto grid = std::make_shared<detail::GridFlags>();
    auto quantity_list = std::make_shared<std::string>();
    auto allow_large = std::make_shared<bool>(false);
    cmd->add_option("--r", shared->r_list, "r values (list or first:last:step)")->required();
    cmd->add_option("--stages", shared->stage_list, "Stage counts (list or range)")->required();
    cmd->add_option("--sigma", shared->sigma_list, "Pointer widths (list or range)")->required();
    cmd->add_option("--quantities", *quantity_list,
                    "Comma list: width,width_ratio,survival,survival_exact,R,R_largeN,"
                    "u_SM,u_PM,approx_error,mc_survival,mc_performance")
        ->required();
    auto* photons_opt = cmd->add_option("--photons", shared->photons,
                                        "Photon budget for u_SM/u_PM and mc_* quantities");
    auto* seed_opt = cmd->add_option("--seed", shared->seed, "RNG seed for mc_* quantities");
    cmd->add_flag("--allow-large-pairwise", *allow_large,
                  "Lift the N cap on pairwise overlap sums");
    grid->attach(cmd);
    add_output(cmd, shared->output);
    cmd->callback([shared, grid, quantity_list, allow_large, photons_opt, seed_opt] {
      SweepSpec spec;
      spec.r_values = detail::parse_real_list(shared->r_list, "--r");
      spec.stage_values = detail::parse_stage_list(shared->stage_list, "--stages");
      spec.sigma_values = detail::parse_real_list(shared->sigma_list, "--sigma");
      std::stringstream ss(*quantity_list);
      std::string name;
      while (std::getline(ss, name, ',')) {
        if (!name.empty()) spec.quantities.push_back(quantity_from_name(name));
      }
      if (photons_opt->count() > 0) spec.photons = shared->photons;
      if (seed_opt->count() > 0) spec.seed = RunSeed{shared->seed};
      spec.grid = grid->spec();
      spec.allow_large_pairwise = *allow_large;
      const SweepResult result = run_sweep(spec);
      detail::emit_rows(result.rows, spec_to_json(result.spec), shared->output);
    });
  }

  // --- figure: captioned parameter sets behind the standard plots
  {
    auto* cmd = app.add_subcommand("figure", "Emit the data behind a standard figure");
    auto shared = std::make_shared<Shared>();
    auto grid = std::make_shared<detail::GridFlags>();
    auto name = std::make_shared<std::string>();
    cmd->add_option("name", *name, "One of fig1..fig5")->required();
    cmd->add_option("--r", shared->r_list, "Override r values");
    cmd->add_option("--stages", shared->stage_list, "Override stage counts");
    cmd->add_option("--sigma", shared->sigma_list, "Override pointer widths");
    grid->attach(cmd);
    add_output(cmd, shared->output);
    cmd->callback([shared, grid, name] {
      const FigureId figure = figure_from_name(*name);
      FigureOverrides overrides;
      if (!shared->r_list.empty()) {
        overrides.r_values = detail::parse_real_list(shared->r_list, "--r");
      }
      if (!shared->stage_list.empty()) {
        overrides.stage_values = detail::parse_stage_list(shared->stage_list, "--stages");
      }
      if (!shared->sigma_list.empty()) {
        overrides.sigma_values = detail::parse_real_list(shared->sigma_list, "--sigma");
      }
      overrides.grid = grid->spec();
      const FigureData data = emit_figure_data(figure, overrides);
      nlohmann::json echo{{"command", "figure"}, {"figure", *name}};
      if (figure == FigureId::fig1) {
        detail::emit_density(data.density, echo, shared->output);
      } else {
        detail::emit_rows(data.rows, echo, shared->output);
      }
    });
  }

  // --- design: smallest N reaching a target R
  {
    auto* cmd = app.add_subcommand("design", "Smallest stage count reaching a target R");
    auto shared = std::make_shared<Shared>();
    auto target = std::make_shared<double>(0.0);
    cmd->add_option("--target-R", *target, "Target performance quantifier")->required();
    cmd->add_option("--r", shared->r, "Weight of the |+> component")->required();
    cmd->add_option("--sigma", shared->sigma, "Initial pointer width")->required();
    add_output(cmd, shared->output);
    cmd->callback([shared, target] {
      const DesignResult result = inverse_design(*target, SystemState(shared->r), shared->sigma);
      if (shared->output.format == "json") {
        nlohmann::json j{{"version", kVersion},
                         {"r", shared->r},
                         {"sigma", shared->sigma},
                         {"target_R", *target},
                         {"feasible", result.feasible},
                         {"N", result.stages},
                         {"achieved_R", round_value(result.achieved)}};
        detail::write_text(j.dump(2) + "\n", shared->output);
      } else {
        std::ostringstream out;
        out << "r,sigma,target_R,feasible,N,achieved_R\n";
        out << format_value(shared->r) << ',' << format_value(shared->sigma) << ','
            << format_value(*target) << ',' << (result.feasible ? 1 : 0) << ',' << result.stages
            << ',' << format_value(result.achieved) << '\n';
        detail::write_text(out.str(), shared->output);
      }
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const SpecError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  }
  return status;
}

/// Test-friendly entry point; args exclude the program name.
inline int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("zenopm");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace zenopm::cli
