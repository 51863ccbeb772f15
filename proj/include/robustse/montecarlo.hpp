#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "robustse/dataset.hpp"
#include "robustse/regression.hpp"
#include "robustse/variance.hpp"

namespace robustse {

enum class DesignKind {
  Cjn,           // sparse binary controls, homoskedastic errors
  StockWatsonA,  // one-way panel, sigma_i^2 = lambda / (0.1 + x_i^2)
  StockWatsonB,  // one-way panel, sigma_i^2 = lambda (0.1 + x_i^2)
};

std::string_view to_string(DesignKind d);
std::optional<DesignKind> parse_design(std::string_view name);

/// Scale that gives the panel errors unit unconditional variance.
/// Design A: 1 / E[1 / (0.1 + x^2)] with x ~ N(0, 1); design B: 1 / 1.1.
double panel_variance_scale(DesignKind d);

struct SimConfig {
  DesignKind design = DesignKind::Cjn;
  Index n = 500;   // cjn
  Index q = 10;    // cjn
  Index units = 100;   // panel N
  Index periods = 2;   // panel T
  Index reps = 1000;
  std::uint64_t seed = 1;
  std::set<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  double level = 0.05;
  unsigned threads = 1;
  FitOptions fit;

  Index sample_size() const { return design == DesignKind::Cjn ? n : units * periods; }
  Index control_count() const { return design == DesignKind::Cjn ? q : units; }
  /// Throws InvalidConfig.
  void validate() const;
};

using Rng = std::mt19937_64;

/// Name of the generator stack, stamped into every report.
inline constexpr std::string_view kGeneratorName =
    "mt19937_64 seeded by seed_seq(seed, replication); std::normal_distribution";

/// Independent stream for replication `rep` of a study seeded with `seed`.
Rng replication_stream(std::uint64_t seed, std::uint64_t rep);

/// n observations, q binary controls b_ij = 1{w_ij > 2}, w ~ N(0,1); a ~ N(0,1),
/// alpha = 1, eta = 0, standard normal errors.
Dataset gen_cjn(Index n, Index q, Rng& rng);

/// N x T one-way panel (row g*T + t is unit g, period t), zero fixed effects,
/// x ~ N(0,1) with unit slope and heteroskedastic normal errors.
Dataset gen_sw(Index units, Index periods, DesignKind variant, Rng& rng);

Dataset generate(const SimConfig& config, Rng& rng);

struct MethodDraw {
  enum class Status { Ok, Nonexistent, Indefinite };
  Status status = Status::Ok;
  double omega = 0.0;  // focal variance estimate
  bool reject = false;
};

struct ReplicationRecord {
  bool completed = false;
  std::string failure;
  double alpha_hat = 0.0;
  double alpha_true = 0.0;
  double omega_true = 0.0;  // sandwich with the true sigma^2
  std::map<Method, MethodDraw> draws;  // Oracle holds the sandwich with realised eps^2
};

ReplicationRecord run_replication(const SimConfig& config, Index rep);

struct MethodSummary {
  Method method = Method::Oracle;
  bool missing = false;  // no replication where the estimator existed
  double relative_bias = 0.0;
  double relative_rmse = 0.0;
  double empirical_size = 0.0;
  Index completed = 0;
  Index nonexistent = 0;
  Index indefinite = 0;
};

struct SimulationReport {
  SimConfig config;
  std::string generator{kGeneratorName};
  Index reps_completed = 0;
  Index reps_failed = 0;
  std::vector<MethodSummary> rows;  // oracle first, then the requested methods
  std::vector<std::string> warnings;

  const MethodSummary* find(Method m) const;
};

/// Aggregates in replication order with compensated sums.
SimulationReport summarize(const std::vector<ReplicationRecord>& draws, const SimConfig& config);

SimulationReport run_study(const SimConfig& config);

/// Grid of configurations behind the three published tables (1, 2 or 3).
std::vector<SimConfig> table_preset(int table, const SimConfig& base);

}  // namespace robustse
