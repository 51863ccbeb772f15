#include "robustse/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "robustse/inference.hpp"

namespace robustse {

std::string_view to_string(DesignKind d) {
  switch (d) {
    case DesignKind::Cjn: return "cjn";
    case DesignKind::StockWatsonA: return "sw-a";
    case DesignKind::StockWatsonB: return "sw-b";
  }
  return "unknown";
}

std::optional<DesignKind> parse_design(std::string_view name) {
  if (name == "cjn") return DesignKind::Cjn;
  if (name == "sw-a" || name == "a" || name == "A") return DesignKind::StockWatsonA;
  if (name == "sw-b" || name == "b" || name == "B") return DesignKind::StockWatsonB;
  return std::nullopt;
}

double panel_variance_scale(DesignKind d) {
  switch (d) {
    case DesignKind::StockWatsonA:
      // 1 / E[1/(0.1 + x^2)], E = sqrt(pi/0.2) e^{0.05} erfc(sqrt(0.05)) = 3.1325218028522155
      return 0.31923161686839103;
    case DesignKind::StockWatsonB:
      return 1.0 / 1.1;
    case DesignKind::Cjn:
      break;
  }
  throw Error(ErrorKind::InvalidArgument, "variance scale is defined for the panel designs only");
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (reps < 1) fail("reps must be at least 1");
  if (!(level > 0.0 && level < 1.0)) fail("level must lie in (0, 1)");
  if (threads < 1) fail("threads must be at least 1");
  if (design == DesignKind::Cjn) {
    if (n < 2) fail("n must be at least 2");
    if (q < 0 || q >= n) fail("cjn design needs 0 <= q < n");
  } else {
    if (units < 1) fail("N must be at least 1");
    if (periods < 2) fail("panel designs need T >= 2");
  }
}

Rng replication_stream(std::uint64_t seed, std::uint64_t rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
  return Rng(seq);
}

Dataset gen_cjn(Index n, Index q, Rng& rng) {
  if (q < 0 || q >= n) throw Error(ErrorKind::InvalidArgument, "cjn design needs 0 <= q < n");
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  // Draw order: focal column, controls column by column, errors.
  d.A.resize(n, 1);
  for (Index i = 0; i < n; ++i) d.A(i, 0) = normal(rng);
  Matrix b(n, q);
  for (Index j = 0; j < q; ++j)
    for (Index i = 0; i < n; ++i) b(i, j) = normal(rng) > 2.0 ? 1.0 : 0.0;
  d.B = Controls::from_matrix(std::move(b));

  Truth truth;
  truth.errors.resize(n);
  for (Index i = 0; i < n; ++i) truth.errors(i) = normal(rng);
  truth.sigma2 = Vector::Ones(n);
  truth.beta = Vector::Zero(1 + q);
  truth.beta(0) = 1.0;
  d.y = d.A.col(0) + truth.errors;
  d.truth = std::move(truth);
  return d;
}

Dataset gen_sw(Index units, Index periods, DesignKind variant, Rng& rng) {
  if (periods < 2) throw Error(ErrorKind::InvalidArgument, "panel designs need T >= 2");
  if (variant == DesignKind::Cjn) throw Error(ErrorKind::InvalidArgument, "gen_sw needs a panel variant");
  const double lambda = panel_variance_scale(variant);
  const Index n = units * periods;
  std::normal_distribution<double> normal(0.0, 1.0);

  Dataset d;
  d.A.resize(n, 1);
  for (Index i = 0; i < n; ++i) d.A(i, 0) = normal(rng);
  std::vector<Index> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i / periods;
  d.B = Controls::from_groups(labels);

  Truth truth;
  truth.sigma2.resize(n);
  truth.errors.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double base = 0.1 + d.A(i, 0) * d.A(i, 0);
    truth.sigma2(i) = variant == DesignKind::StockWatsonA ? lambda / base : lambda * base;
  }
  for (Index i = 0; i < n; ++i) truth.errors(i) = std::sqrt(truth.sigma2(i)) * normal(rng);
  truth.beta = Vector::Zero(1 + units);
  truth.beta(0) = 1.0;
  d.y = d.A.col(0) + truth.errors;
  d.truth = std::move(truth);
  return d;
}

Dataset generate(const SimConfig& config, Rng& rng) {
  if (config.design == DesignKind::Cjn) return gen_cjn(config.n, config.q, rng);
  return gen_sw(config.units, config.periods, config.design, rng);
}

ReplicationRecord run_replication(const SimConfig& config, Index rep) {
  ReplicationRecord record;
  Rng rng = replication_stream(config.seed, static_cast<std::uint64_t>(rep));
  const Dataset data = generate(config, rng);
  const double critical = normal_critical_value(config.level);
  record.alpha_true = data.truth->beta(0);

  ModelFit fit;
  try {
    fit = fit_model(data, config.fit);
    record.omega_true = sandwich(fit.design, oracle_weights(data.truth->sigma2)).omega(0, 0);
  } catch (const Error& e) {
    record.failure = e.what();
    return record;
  }
  record.completed = true;
  record.alpha_hat = fit.alpha_hat(0);

  auto draw_from = [&](const CovarianceEstimate& est) {
    MethodDraw draw;
    draw.omega = est.omega(0, 0);
    if (est.indefinite || !(draw.omega > 0.0)) {
      draw.status = MethodDraw::Status::Indefinite;
      return draw;
    }
    draw.reject = std::abs(record.alpha_hat - record.alpha_true) / std::sqrt(draw.omega) > critical;
    return draw;
  };

  const Vector realised = data.truth->errors.array().square();
  record.draws[Method::Oracle] = draw_from(sandwich(fit.design, oracle_weights(realised)));

  std::set<Method> methods = config.methods;
  methods.erase(Method::Oracle);
  for (auto& [m, outcome] : estimate_methods(fit, methods, std::nullopt)) {
    if (outcome.ok()) {
      record.draws[m] = draw_from(*outcome.estimate);
    } else {
      MethodDraw draw;
      draw.status = MethodDraw::Status::Nonexistent;
      record.draws[m] = draw;
    }
  }
  return record;
}

const MethodSummary* SimulationReport::find(Method m) const {
  for (const auto& row : rows)
    if (row.method == m) return &row;
  return nullptr;
}

namespace {

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

SimulationReport summarize(const std::vector<ReplicationRecord>& draws, const SimConfig& config) {
  SimulationReport report;
  report.config = config;

  std::vector<Method> order{Method::Oracle};
  for (Method m : kAllMethods)
    if (m != Method::Oracle && config.methods.count(m)) order.push_back(m);

  for (const auto& r : draws) {
    if (r.completed)
      ++report.reps_completed;
    else
      ++report.reps_failed;
  }
  if (report.reps_failed > 0) {
    std::ostringstream os;
    os << report.reps_failed << " replication(s) could not be fitted and were skipped";
    report.warnings.push_back(os.str());
  }

  for (Method m : order) {
    MethodSummary row;
    row.method = m;
    KahanSum err, truth, sq_err, sq_oracle_err;
    Index rejections = 0;
    for (const auto& r : draws) {
      if (!r.completed) continue;
      const auto it = r.draws.find(m);
      if (it == r.draws.end()) continue;
      const MethodDraw& d = it->second;
      if (d.status == MethodDraw::Status::Nonexistent) {
        ++row.nonexistent;
        continue;
      }
      if (d.status == MethodDraw::Status::Indefinite) {
        ++row.indefinite;
        continue;
      }
      ++row.completed;
      const double oracle_err = r.draws.at(Method::Oracle).omega - r.omega_true;
      const double e = d.omega - r.omega_true;
      err.add(e);
      truth.add(r.omega_true);
      sq_err.add(e * e);
      sq_oracle_err.add(oracle_err * oracle_err);
      if (d.reject) ++rejections;
    }
    if (row.completed == 0) {
      row.missing = true;
    } else {
      row.relative_bias = err.sum / truth.sum;
      row.relative_rmse = std::sqrt(sq_err.sum) / std::sqrt(sq_oracle_err.sum);
      row.empirical_size = static_cast<double>(rejections) / static_cast<double>(row.completed);
    }
    if (row.indefinite > 0) {
      std::ostringstream os;
      os << to_string(m) << ": " << row.indefinite
         << " replication(s) with a nonpositive variance estimate excluded";
      report.warnings.push_back(os.str());
    }
    report.rows.push_back(row);
  }
  return report;
}

SimulationReport run_study(const SimConfig& config) {
  config.validate();
  const Index reps = config.reps;
  std::vector<ReplicationRecord> records(static_cast<std::size_t>(reps));

  const unsigned workers =
      static_cast<unsigned>(std::min<Index>(static_cast<Index>(config.threads), reps));
  if (workers <= 1) {
    for (Index r = 0; r < reps; ++r) records[static_cast<std::size_t>(r)] = run_replication(config, r);
  } else {
    std::atomic<Index> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (Index r = next++; r < reps; r = next++)
            records[static_cast<std::size_t>(r)] = run_replication(config, r);
        } catch (...) {
          errors[w] = std::current_exception();
          next = reps;
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return summarize(records, config);
}

std::vector<SimConfig> table_preset(int table, const SimConfig& base) {
  std::vector<SimConfig> out;
  if (table == 1) {
    for (Index q : {10, 100, 250, 400, 450}) {
      SimConfig c = base;
      c.design = DesignKind::Cjn;
      c.n = 500;
      c.q = q;
      out.push_back(c);
    }
  } else if (table == 2 || table == 3) {
    for (Index t : {2, 3, 4}) {
      for (Index units : {100, 250}) {
        SimConfig c = base;
        c.design = table == 2 ? DesignKind::StockWatsonA : DesignKind::StockWatsonB;
        c.units = units;
        c.periods = t;
        out.push_back(c);
      }
    }
  } else {
    throw Error(ErrorKind::InvalidConfig, "table preset must be 1, 2 or 3");
  }
  return out;
}

}  // namespace robustse
