#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "zenopm/analytic.hpp"
#include "zenopm/model.hpp"
#include "zenopm/montecarlo.hpp"
#include "zenopm/oracle.hpp"
#include "zenopm/parallel.hpp"
#include "zenopm/version.hpp"

// Parameter-sweep engine behind the CLI: evaluates requested quantities over
// an (r, N, sigma) grid, reproduces the standard figure parameter sets, and
// serializes rows as CSV or JSON.

namespace zenopm {

/// A malformed request (as opposed to a numerical domain violation).
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

enum class Quantity {
  width,
  width_ratio,
  survival,
  survival_exact,
  performance,        // R
  performance_limit,  // R_largeN
  u_sm,
  u_pm,
  approx_error,  // L1 distance between exact and approximate densities
  mc_survival,
  mc_performance,
};

inline const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::width: return "width";
    case Quantity::width_ratio: return "width_ratio";
    case Quantity::survival: return "survival";
    case Quantity::survival_exact: return "survival_exact";
    case Quantity::performance: return "R";
    case Quantity::performance_limit: return "R_largeN";
    case Quantity::u_sm: return "u_SM";
    case Quantity::u_pm: return "u_PM";
    case Quantity::approx_error: return "approx_error";
    case Quantity::mc_survival: return "mc_survival";
    case Quantity::mc_performance: return "mc_performance";
  }
  return "unknown";
}

inline Quantity quantity_from_name(const std::string& name) {
  for (Quantity q : {Quantity::width, Quantity::width_ratio, Quantity::survival,
                     Quantity::survival_exact, Quantity::performance, Quantity::performance_limit,
                     Quantity::u_sm, Quantity::u_pm, Quantity::approx_error, Quantity::mc_survival,
                     Quantity::mc_performance}) {
    if (name == quantity_name(q)) return q;
  }
  throw SpecError("unknown quantity '" + name + "'");
}

inline bool quantity_needs_photons(Quantity q) {
  return q == Quantity::u_sm || q == Quantity::u_pm || q == Quantity::mc_survival ||
         q == Quantity::mc_performance;
}

inline bool quantity_needs_seed(Quantity q) {
  return q == Quantity::mc_survival || q == Quantity::mc_performance;
}

struct SweepSpec {
  std::vector<double> r_values;
  std::vector<std::int64_t> stage_values;
  std::vector<double> sigma_values;
  std::vector<Quantity> quantities;
  std::optional<std::int64_t> photons;
  std::optional<RunSeed> seed;
  std::optional<GridSpec> grid;  // for approx_error; per-config default otherwise
  bool allow_large_pairwise = false;
};

struct SweepRow {
  double r = 0.0;
  std::int64_t stages = 0;
  double sigma = 0.0;
  std::string quantity;
  double value = 0.0;
  double weakness = 0.0;
  std::string flags;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRow> rows;
};

inline void validate_spec(const SweepSpec& spec) {
  if (spec.r_values.empty()) throw SpecError("sweep spec: r_values must be non-empty");
  if (spec.stage_values.empty()) throw SpecError("sweep spec: N_values must be non-empty");
  if (spec.sigma_values.empty()) throw SpecError("sweep spec: sigma_values must be non-empty");
  if (spec.quantities.empty()) throw SpecError("sweep spec: quantities must be non-empty");
  for (Quantity q : spec.quantities) {
    if (quantity_needs_photons(q) && !spec.photons) {
      throw SpecError(std::string("sweep spec: quantity '") + quantity_name(q) +
                      "' requires photons");
    }
    if (quantity_needs_seed(q) && !spec.seed) {
      throw SpecError(std::string("sweep spec: quantity '") + quantity_name(q) +
                      "' requires seed");
    }
  }
  if (spec.photons && *spec.photons < 1) throw SpecError("sweep spec: photons must be >= 1");
}

namespace detail {

inline void append_flag(std::string& flags, const char* flag) {
  if (!flags.empty()) flags += ';';
  flags += flag;
}

struct GridPoint {
  double r;
  std::int64_t stages;
  double sigma;
};

inline std::vector<SweepRow> evaluate_point(const SweepSpec& spec, const GridPoint& point,
                                            std::size_t point_index) {
  const SystemState state(point.r);
  const ZenoConfig config(point.stages, point.sigma);
  const double weakness = config.weakness();
  std::string base_flags;
  if (weakness > 1.0) append_flag(base_flags, "strong-regime");

  std::vector<SweepRow> rows;
  rows.reserve(spec.quantities.size());
  for (Quantity q : spec.quantities) {
    SweepRow row{point.r, point.stages, point.sigma, quantity_name(q),
                 0.0,     weakness,     base_flags};
    switch (q) {
      case Quantity::width:
        row.value = final_width(state, config);
        break;
      case Quantity::width_ratio:
        row.value = final_width(state, config) / config.sigma();
        break;
      case Quantity::survival:
        row.value = survival_probability(state, config);
        break;
      case Quantity::survival_exact:
        row.value = exact_survival(state, config, spec.allow_large_pairwise);
        break;
      case Quantity::performance:
        row.value = performance_ratio(state, config);
        break;
      case Quantity::performance_limit:
        row.value = performance_ratio_large_n(state, config.sigma());
        break;
      case Quantity::u_sm:
        row.value = strong_uncertainty(state, *spec.photons);
        break;
      case Quantity::u_pm:
        row.value = protective_uncertainty(state, config, *spec.photons);
        break;
      case Quantity::approx_error:
        row.value =
            approximation_error(state, config, spec.grid ? *spec.grid : default_grid(config))
                .l1_distance;
        break;
      case Quantity::mc_survival: {
        // Every grid point gets its own substream so points are independent.
        const RunSeed point_seed{
            substream_key(spec.seed->value, point_index, StreamPurpose::sweep_point)};
        const EnsembleStats stats =
            simulate_protective(state, config, *spec.photons, point_seed, 1);
        row.value = static_cast<double>(stats.survivors) / static_cast<double>(stats.photons_in);
        break;
      }
      case Quantity::mc_performance: {
        const RunSeed point_seed{
            substream_key(spec.seed->value, point_index, StreamPurpose::sweep_point)};
        const PerformanceEstimate est =
            empirical_performance(state, config, *spec.photons, point_seed, 1);
        row.value = est.value;
        if (est.degenerate) append_flag(row.flags, "degenerate");
        break;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Evaluates every requested quantity at every (r, N, sigma) grid point.
/// Rows are ordered lexicographically by (r, N, sigma, quantity).
inline SweepResult run_sweep(const SweepSpec& spec, int workers = 0) {
  validate_spec(spec);
  SweepResult result;
  result.spec = spec;
  std::sort(result.spec.quantities.begin(), result.spec.quantities.end(),
            [](Quantity a, Quantity b) {
              return std::string(quantity_name(a)) < quantity_name(b);
            });
  result.spec.quantities.erase(
      std::unique(result.spec.quantities.begin(), result.spec.quantities.end()),
      result.spec.quantities.end());

  std::vector<detail::GridPoint> points;
  points.reserve(spec.r_values.size() * spec.stage_values.size() * spec.sigma_values.size());
  for (double r : result.spec.r_values) {
    for (std::int64_t n : result.spec.stage_values) {
      for (double sigma : result.spec.sigma_values) {
        points.push_back({r, n, sigma});
      }
    }
  }

  std::vector<std::vector<SweepRow>> per_point(points.size());
  std::exception_ptr error;
  std::mutex error_mutex;
  parallel_chunks(points.size(), 8, workers,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      try {
                        per_point[i] = detail::evaluate_point(result.spec, points[i], i);
                      } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!error) error = std::current_exception();
                        return;
                      }
                    }
                  });
  if (error) std::rethrow_exception(error);

  for (auto& rows : per_point) {
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Figure data

enum class FigureId { fig1, fig2, fig3, fig4, fig5 };

inline FigureId figure_from_name(const std::string& name) {
  if (name == "fig1") return FigureId::fig1;
  if (name == "fig2") return FigureId::fig2;
  if (name == "fig3") return FigureId::fig3;
  if (name == "fig4") return FigureId::fig4;
  if (name == "fig5") return FigureId::fig5;
  throw SpecError("unknown figure '" + name + "' (expected fig1..fig5)");
}

struct FigureOverrides {
  std::optional<std::vector<double>> r_values;
  std::optional<std::vector<std::int64_t>> stage_values;
  std::optional<std::vector<double>> sigma_values;
  std::optional<GridSpec> grid;
};

/// One sample of the exact and approximate final densities.
struct DensityRow {
  double q;
  double exact_density;
  double approx_density;
  double r;
  std::int64_t stages;
  double sigma;
};

struct FigureData {
  std::vector<SweepRow> rows;         // figures 2-5
  std::vector<DensityRow> density;    // figure 1
};

namespace detail {

inline std::vector<double> linear_range(double first, double last, double step) {
  std::vector<double> out;
  for (double v = first; v <= last + 0.5 * step; v += step) {
    out.push_back(std::min(v, last));
  }
  return out;
}

inline std::vector<std::int64_t> stage_range(std::int64_t first, std::int64_t last,
                                             std::int64_t step) {
  std::vector<std::int64_t> out;
  for (std::int64_t v = first; v <= last; v += step) out.push_back(v);
  return out;
}

}  // namespace detail

/// Data behind the paper-style figures, with the captioned parameter ranges
/// as defaults. Figure 1 emits density tables; the rest emit sweep rows.
inline FigureData emit_figure_data(FigureId figure, const FigureOverrides& overrides = {},
                                   int workers = 0) {
  FigureData data;
  SweepSpec spec;
  switch (figure) {
    case FigureId::fig1: {
      // Exact vs approximate packet across the weak-to-strong boundary.
      const std::vector<double> r_values =
          overrides.r_values.value_or(std::vector<double>{0.7});
      const std::vector<double> sigmas =
          overrides.sigma_values.value_or(std::vector<double>{0.1, 0.2});
      const std::vector<std::int64_t> stages =
          overrides.stage_values.value_or(std::vector<std::int64_t>{2, 5, 10, 50});
      for (double sigma : sigmas) {
        for (std::int64_t n : stages) {
          for (double r : r_values) {
            const SystemState state(r);
            const ZenoConfig config(n, sigma);
            const GridSpec grid = overrides.grid.value_or(default_grid(config));
            const GridDensity exact = grid_density(state, config, grid);
            const GaussianApprox approx = approx_final_packet(state, config);
            for (std::size_t i = 0; i < exact.q.size(); ++i) {
              data.density.push_back(DensityRow{exact.q[i], exact.density[i],
                                                approx.density(exact.q[i]), r, n, sigma});
            }
          }
        }
      }
      return data;
    }
    case FigureId::fig2:
      spec.r_values = overrides.r_values.value_or(detail::linear_range(0.0, 1.0, 0.05));
      spec.stage_values = overrides.stage_values.value_or(detail::stage_range(5, 100, 5));
      spec.sigma_values =
          overrides.sigma_values.value_or(std::vector<double>{0.05, 0.1, 0.2});
      spec.quantities = {Quantity::width_ratio};
      break;
    case FigureId::fig3:
      spec.r_values = overrides.r_values.value_or(detail::linear_range(0.0, 1.0, 0.05));
      spec.stage_values = overrides.stage_values.value_or(detail::stage_range(5, 100, 5));
      spec.sigma_values =
          overrides.sigma_values.value_or(std::vector<double>{0.05, 0.1, 0.2});
      spec.quantities = {Quantity::survival};
      break;
    case FigureId::fig4:
      // Worst-case survival (r = 0.5) against the stage count.
      spec.r_values = overrides.r_values.value_or(std::vector<double>{0.5});
      spec.stage_values = overrides.stage_values.value_or(detail::stage_range(5, 100, 1));
      spec.sigma_values =
          overrides.sigma_values.value_or(std::vector<double>{0.05, 0.1, 0.2});
      spec.quantities = {Quantity::survival};
      break;
    case FigureId::fig5:
      // Symmetric about r = 0.5, so only the left half by default.
      spec.r_values = overrides.r_values.value_or(detail::linear_range(0.0, 0.5, 0.025));
      spec.stage_values = overrides.stage_values.value_or(detail::stage_range(5, 100, 5));
      spec.sigma_values =
          overrides.sigma_values.value_or(std::vector<double>{0.05, 0.1, 0.2, 0.3});
      spec.quantities = {Quantity::performance};
      break;
  }
  data.rows = run_sweep(spec, workers).rows;
  return data;
}

// ---------------------------------------------------------------------------
// Inverse design

struct DesignResult {
  bool feasible = false;
  std::int64_t stages = 0;     // smallest N reaching the target when feasible
  double achieved = 0.0;       // R at that N; the large-N limit when infeasible
};

/// Smallest stage count N with R >= target, found by doubling plus bisection
/// on the monotone R(N). Infeasible when the target is not below the large-N
/// limit sqrt(4 r (1-r)) / sigma (always the case for eigenstates).
inline DesignResult inverse_design(double target, const SystemState& state, double sigma) {
  if (!(target > 0.0)) throw std::domain_error("inverse_design: target must be positive");
  const double limit = performance_ratio_large_n(state, sigma);
  if (!(target < limit)) return DesignResult{false, 0, limit};

  const auto ratio_at = [&](std::int64_t n) {
    return performance_ratio(state, ZenoConfig(n, sigma));
  };
  std::int64_t hi = 1;
  while (ratio_at(hi) < target) {
    if (hi > (std::int64_t{1} << 50)) return DesignResult{false, 0, limit};
    hi *= 2;
  }
  std::int64_t lo = hi / 2;  // ratio_at(lo) < target (or lo == 0)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (ratio_at(mid) < target ? lo : hi) = mid;
  }
  return DesignResult{true, hi, ratio_at(hi)};
}

// ---------------------------------------------------------------------------
// Serialization: CSV and JSON with 9 significant digits.

inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

/// The 9-significant-digit value a serialized number deserializes back to.
inline double round_value(double v) {
  return std::strtod(format_value(v).c_str(), nullptr);
}

inline void write_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "r,N,sigma,quantity,value,weakness,flags\n";
  for (const SweepRow& row : rows) {
    out << format_value(row.r) << ',' << row.stages << ',' << format_value(row.sigma) << ','
        << row.quantity << ',' << format_value(row.value) << ',' << format_value(row.weakness)
        << ',' << row.flags << '\n';
  }
}

inline void write_density_csv(const std::vector<DensityRow>& rows, std::ostream& out) {
  out << "Q,exact_density,approx_density,r,N,sigma\n";
  for (const DensityRow& row : rows) {
    out << format_value(row.q) << ',' << format_value(row.exact_density) << ','
        << format_value(row.approx_density) << ',' << format_value(row.r) << ',' << row.stages
        << ',' << format_value(row.sigma) << '\n';
  }
}

inline nlohmann::json spec_to_json(const SweepSpec& spec) {
  nlohmann::json j;
  j["r_values"] = spec.r_values;
  j["N_values"] = spec.stage_values;
  j["sigma_values"] = spec.sigma_values;
  std::vector<std::string> names;
  names.reserve(spec.quantities.size());
  for (Quantity q : spec.quantities) names.emplace_back(quantity_name(q));
  j["quantities"] = names;
  j["photons"] = spec.photons ? nlohmann::json(*spec.photons) : nlohmann::json();
  j["seed"] = spec.seed ? nlohmann::json(spec.seed->value) : nlohmann::json();
  return j;
}

inline nlohmann::json rows_to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SweepRow& row : rows) {
    arr.push_back({{"r", round_value(row.r)},
                   {"N", row.stages},
                   {"sigma", round_value(row.sigma)},
                   {"quantity", row.quantity},
                   {"value", round_value(row.value)},
                   {"weakness", round_value(row.weakness)},
                   {"flags", row.flags}});
  }
  return arr;
}

inline nlohmann::json density_to_json(const std::vector<DensityRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const DensityRow& row : rows) {
    arr.push_back({{"Q", round_value(row.q)},
                   {"exact_density", round_value(row.exact_density)},
                   {"approx_density", round_value(row.approx_density)},
                   {"r", round_value(row.r)},
                   {"N", row.stages},
                   {"sigma", round_value(row.sigma)}});
  }
  return arr;
}

inline nlohmann::json result_to_json(const SweepResult& result) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["spec"] = spec_to_json(result.spec);
  j["rows"] = rows_to_json(result.rows);
  return j;
}

}  // namespace zenopm
