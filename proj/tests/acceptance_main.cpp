// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are fixed here, not tuned at runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "zenopm/cli.hpp"
#include "zenopm/zenopm.hpp"

namespace {

using namespace zenopm;

struct Check {
  std::string name;
  std::function<bool(std::string&)> run;
};

const std::vector<double> kRGrid = [] {
  std::vector<double> r;
  for (int i = 0; i <= 20; ++i) r.push_back(i * 0.05);
  return r;
}();
const std::vector<std::int64_t> kStageGrid = [] {
  std::vector<std::int64_t> n;
  for (std::int64_t v = 5; v <= 100; v += 5) n.push_back(v);
  return n;
}();
const std::vector<double> kSigmaGrid = {0.05, 0.1, 0.2, 0.3};

// 1. Survival probability at the quoted worst-case points.
bool survival_claims(std::string& detail) {
  const double p50 = survival_probability(SystemState(0.5), ZenoConfig(50, 0.1));
  const double p100 = survival_probability(SystemState(0.5), ZenoConfig(100, 0.1));
  std::ostringstream out;
  out << "p(N=50) = " << p50 << ", p(N=100) = " << p100;
  detail = out.str();
  return std::abs(p50 - 0.7071) <= 5e-4 && std::abs(p100 - 0.8165) <= 5e-4 &&
         std::round(p50 * 100) == 71 && std::round(p100 * 100) == 82;
}

// 2. p = sigma / sigma_{N,r} to 1e-14 over the 21 x 20 x 4 grid.
bool survival_width_identity(std::string& detail) {
  double worst = 0.0;
  for (double r : kRGrid) {
    for (std::int64_t n : kStageGrid) {
      for (double sigma : kSigmaGrid) {
        const SystemState state(r);
        const ZenoConfig config(n, sigma);
        const double diff =
            std::abs(survival_probability(state, config) - sigma / final_width(state, config));
        worst = std::max(worst, diff);
      }
    }
  }
  detail = "worst |p - sigma/sigma_Nr| = " + format_value(worst);
  return worst <= 1e-14;
}

// 3. Exact survival vs grid quadrature (1e-8) and vs the closed form (1%)
//    on the weak-regime band N sigma^2 >= 0.5, N >= 25.
bool oracle_consistency(std::string& detail) {
  struct Point {
    double r, sigma;
    std::int64_t n;
  };
  std::vector<Point> band;
  for (double r : kRGrid) {
    for (std::int64_t n : kStageGrid) {
      for (double sigma : kSigmaGrid) {
        if (n * sigma * sigma >= 0.5 && n >= 25) band.push_back({r, sigma, n});
      }
    }
  }
  std::vector<double> quad_err(band.size());
  std::vector<double> closed_err(band.size());
  parallel_chunks(band.size(), 8, 0, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const SystemState state(band[i].r);
      const ZenoConfig config(band[i].n, band[i].sigma);
      const double exact = exact_survival(state, config);
      const double margin = 8.0 * band[i].sigma;
      const GridDensity table =
          grid_density(state, config, GridSpec{-1.0 - margin, 1.0 + margin, 4096});
      quad_err[i] = std::abs(exact - trapezoid(table.q, table.density));
      closed_err[i] = std::abs(exact - survival_probability(state, config)) / exact;
    }
  });
  double worst_quad = 0.0, worst_closed = 0.0;
  for (std::size_t i = 0; i < band.size(); ++i) {
    worst_quad = std::max(worst_quad, quad_err[i]);
    worst_closed = std::max(worst_closed, closed_err[i]);
  }
  std::ostringstream out;
  out << band.size() << " band points; worst quadrature diff = " << format_value(worst_quad)
      << ", worst closed-form rel diff = " << format_value(worst_closed);
  detail = out.str();
  return worst_quad <= 1e-8 && worst_closed <= 0.01;
}

// 4. N applications of the stage recurrence reproduce the closed form.
bool unroll_equivalence(std::string& detail) {
  double worst = 0.0;
  for (std::int64_t n : {1, 2, 5, 10, 20}) {
    for (double r : {0.3, 0.5, 0.7}) {
      const ZenoConfig config(n, 0.1);
      auto rolled = initial_packet(config.sigma());
      for (std::int64_t k = 0; k < n; ++k) {
        rolled = stage_recurrence(rolled, config.per_stage_shift(), r);
      }
      const auto closed = exact_final_packet(SystemState(r), config);
      if (rolled.size() != closed.size()) {
        detail = "component count mismatch at N = " + std::to_string(n);
        return false;
      }
      for (std::size_t i = 0; i < rolled.size(); ++i) {
        worst = std::max(worst, std::abs(rolled.weights()[i] - closed.weights()[i]));
        worst = std::max(worst, std::abs(rolled.centers()[i] - closed.centers()[i]));
      }
    }
  }
  detail = "worst weight/center deviation = " + format_value(worst);
  return worst <= 1e-12;
}

// 5. The normal approximation is good exactly when the measurement is weak.
bool approximation_quality(std::string& detail) {
  const SystemState state(0.7);
  const ZenoConfig weak(100, 0.1);
  const ZenoConfig strong(2, 0.1);
  const double weak_l1 = approximation_error(state, weak, default_grid(weak)).l1_distance;
  const double strong_l1 = approximation_error(state, strong, default_grid(strong)).l1_distance;
  std::ostringstream out;
  out << "L1(N=100) = " << format_value(weak_l1) << ", L1(N=2) = " << format_value(strong_l1);
  detail = out.str();
  return weak_l1 < 0.05 && strong_l1 > 0.2;
}

// 6. Broadening bound: sigma_{N,r} >= sigma, equality only at eigenstates,
//    ratio maximal at r = 0.5.
bool broadening_bound(std::string& detail) {
  for (std::int64_t n : kStageGrid) {
    for (double sigma : kSigmaGrid) {
      double best_ratio = 0.0;
      double best_r = -1.0;
      for (double r : kRGrid) {
        const double width = final_width(SystemState(r), ZenoConfig(n, sigma));
        if (width < sigma) {
          detail = "width below sigma at r = " + format_value(r);
          return false;
        }
        const bool extremal = r == 0.0 || r == 1.0;
        if (extremal != (std::abs(width - sigma) <= 1e-12)) {
          detail = "equality pattern violated at r = " + format_value(r);
          return false;
        }
        if (width / sigma > best_ratio) {
          best_ratio = width / sigma;
          best_r = r;
        }
      }
      if (best_r != 0.5) {
        detail = "ratio not maximal at r = 0.5 for N = " + std::to_string(n);
        return false;
      }
    }
  }
  detail = "bound, equality pattern, and worst case all verified";
  return true;
}

// 7. Monte Carlo statistics at (r=0.5, N=50, sigma=0.1, M=1e5, fixed seed).
bool monte_carlo_suite(std::string& detail) {
  const SystemState state(0.5);
  const ZenoConfig config(50, 0.1);
  const std::int64_t photons = 100000;
  const RunSeed seed{0x5EEDF00Dull};

  const double p = exact_survival(state, config);
  const ExactMoments moments = exact_moments(state, config);
  const PerformanceEstimate est = empirical_performance(state, config, photons, seed);
  const double fraction =
      static_cast<double>(est.protective.survivors) / static_cast<double>(photons);
  const double fraction_band = 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(photons));
  const double exact_std = std::sqrt(moments.variance);
  const double ratio = performance_ratio(state, config);

  std::ostringstream out;
  out << "survivor fraction " << format_value(fraction) << " (exact " << format_value(p)
      << "), sample std " << format_value(est.protective.sample_std) << " (exact "
      << format_value(exact_std) << "), empirical R " << format_value(est.value) << " (closed "
      << format_value(ratio) << ")";
  detail = out.str();
  return std::abs(fraction - p) <= fraction_band &&
         std::abs(est.protective.sample_std - exact_std) <= 0.02 * exact_std &&
         !est.degenerate && std::abs(est.value - ratio) <= 0.05 * ratio;
}

// 8. Large-N limit of the performance quantifier.
bool large_n_limit(std::string& detail) {
  const SystemState state(0.5);
  const double at_1e9 = performance_ratio(state, ZenoConfig(1000000000, 0.1));
  const double limit = performance_ratio_large_n(state, 0.1);
  detail = "R(N=1e9) = " + format_value(at_1e9) + ", limit = " + format_value(limit);
  return std::abs(at_1e9 - limit) / limit <= 1e-3 && std::abs(limit - 10.0) <= 1e-12;
}

// 9. Advantage region: R > 1 across the central band, R < 1 near eigenstates.
bool advantage_region(std::string& detail) {
  for (double r : kRGrid) {
    if (r < 0.1 - 1e-12 || r > 0.9 + 1e-12) continue;
    for (std::int64_t n : kStageGrid) {
      for (double sigma : {0.05, 0.1, 0.2}) {
        if (performance_ratio(SystemState(r), ZenoConfig(n, sigma)) <= 1.0) {
          detail = "R <= 1 at r = " + format_value(r) + ", N = " + std::to_string(n) +
                   ", sigma = " + format_value(sigma);
          return false;
        }
      }
    }
  }
  const double extremal = performance_ratio(SystemState(0.001), ZenoConfig(5, 0.3));
  detail = "R > 1 on the band; R(r=0.001, N=5, sigma=0.3) = " + format_value(extremal);
  return extremal < 1.0;
}

// 10. Bit-identical CSV output for identical seeds under different
//     ZENOPM_THREADS settings, across the full MC surface of the CLI.
bool determinism(std::string& detail) {
  const std::string dir = "/tmp/";
  const auto run_suite = [&](const char* threads, const std::string& tag) {
    setenv("ZENOPM_THREADS", threads, 1);
    const std::string mc_path = dir + "zenopm_acceptance_mc_" + tag + ".csv";
    const std::string sweep_path = dir + "zenopm_acceptance_sweep_" + tag + ".csv";
    int code = cli::run({"montecarlo", "--r", "0.5", "--stages", "50", "--sigma", "0.1",
                         "--photons", "100000", "--seed", "314159", "--attrition", "--out",
                         mc_path});
    code += cli::run({"sweep", "--r", "0.3,0.5", "--stages", "25", "--sigma", "0.1",
                      "--quantities", "mc_survival,mc_performance,survival_exact", "--photons",
                      "20000", "--seed", "314159", "--out", sweep_path});
    unsetenv("ZENOPM_THREADS");
    std::ifstream mc(mc_path, std::ios::binary), sweep(sweep_path, std::ios::binary);
    std::ostringstream text;
    text << mc.rdbuf() << sweep.rdbuf();
    return code == 0 ? text.str() : std::string();
  };
  const std::string serial = run_suite("1", "t1");
  const std::string threaded = run_suite("7", "t7");
  std::ostringstream out;
  out << serial.size() << " bytes compared";
  detail = out.str();
  return !serial.empty() && serial == threaded;
}

}  // namespace

int main() {
  const std::vector<Check> checks = {
      {"survival claims p(50)=0.7071, p(100)=0.8165 (+/- 5e-4)", survival_claims},
      {"identity p = sigma/sigma_Nr to 1e-14 on 21x20x4 grid", survival_width_identity},
      {"oracle vs quadrature (1e-8) and closed form (1%) on weak band", oracle_consistency},
      {"stage recurrence unroll equals closed form to 1e-12", unroll_equivalence},
      {"approximation L1 < 0.05 weak / > 0.2 strong at r=0.7", approximation_quality},
      {"broadening bound with equality only at eigenstates", broadening_bound},
      {"Monte Carlo suite at (0.5, 50, 0.1, 1e5 photons)", monte_carlo_suite},
      {"large-N limit of R within 1e-3 relative at N=1e9", large_n_limit},
      {"advantage region R > 1 (and R < 1 near eigenstates)", advantage_region},
      {"bit-identical CSV across ZENOPM_THREADS settings", determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = checks[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2zu. %s (%.2fs)\n", ok ? "PASS" : "FAIL", i + 1,
                checks[i].name.c_str(), seconds);
    if (!detail.empty()) std::printf("        %s\n", detail.c_str());
    failures += ok ? 0 : 1;
  }
  std::printf("zenopm acceptance: %d/%zu criteria passed\n",
              static_cast<int>(checks.size()) - failures, checks.size());
  return failures;
}
