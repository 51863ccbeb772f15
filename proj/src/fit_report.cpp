#include "robustse/fit_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "robustse/inference.hpp"

namespace robustse {

void FitRequest::validate() const {
  if (focal.empty()) throw Error(ErrorKind::InvalidArgument, "at least one focal column is required");
  if (outcome.empty()) throw Error(ErrorKind::InvalidArgument, "an outcome column is required");
  for (const auto* names : {&focal, &controls, &categorical})
    for (const auto& name : *names)
      if (name.empty()) throw Error(ErrorKind::InvalidArgument, "empty column name in the regressor list");
  auto contains = [&](const std::vector<std::string>& v) {
    return std::find(v.begin(), v.end(), outcome) != v.end();
  };
  if (contains(focal) || contains(controls) || contains(categorical))
    throw Error(ErrorKind::InvalidArgument, "outcome '" + outcome + "' cannot also be a regressor");
  if (methods.empty()) throw Error(ErrorKind::InvalidArgument, "no methods requested");
  if (format != "json" && format != "table")
    throw Error(ErrorKind::InvalidArgument, "format must be json or table");
}

Dataset build_dataset(const CsvTable& table, const FitRequest& request) {
  request.validate();
  const Index n = table.rows_count();
  Dataset d;
  d.y = numeric_column(table, request.outcome);
  d.A.resize(n, static_cast<Index>(request.focal.size()));
  for (std::size_t j = 0; j < request.focal.size(); ++j)
    d.A.col(static_cast<Index>(j)) = numeric_column(table, request.focal[j]);

  std::vector<Vector> dense;
  if (request.intercept && request.categorical.empty()) dense.push_back(Vector::Ones(n));
  for (const auto& name : request.controls) dense.push_back(numeric_column(table, name));

  std::vector<Index> groups;
  for (std::size_t c = 0; c < request.categorical.size(); ++c) {
    const auto labels = text_column(table, request.categorical[c]);
    std::map<std::string, Index> level;
    std::vector<Index> codes;
    codes.reserve(labels.size());
    for (const auto& l : labels) {
      auto [it, inserted] = level.emplace(l, static_cast<Index>(level.size()));
      codes.push_back(it->second);
    }
    if (c == 0) {
      groups = std::move(codes);
      continue;
    }
    for (Index k = 1; k < static_cast<Index>(level.size()); ++k) {
      Vector dummy = Vector::Zero(n);
      for (Index i = 0; i < n; ++i)
        if (codes[static_cast<std::size_t>(i)] == k) dummy(i) = 1.0;
      dense.push_back(std::move(dummy));
    }
  }

  Matrix b(n, static_cast<Index>(dense.size()));
  for (std::size_t j = 0; j < dense.size(); ++j) b.col(static_cast<Index>(j)) = dense[j];
  d.B = groups.empty() ? Controls::from_matrix(std::move(b)) : Controls::from_groups(groups, std::move(b));
  if (d.B.dense.rows() != n) d.B.dense.resize(n, 0);
  return d;
}

std::vector<Method> failed_methods(const EstimateSet& set) {
  std::vector<Method> out;
  for (const auto& [m, outcome] : set.outcomes)
    if (!outcome.ok()) out.push_back(m);
  return out;
}

namespace {

struct Row {
  std::string coefficient;
  double estimate = 0.0;
  Method method = Method::HC0;
  bool ok = false;
  double std_error = 0.0;
  double t = 0.0;
  double p = 0.0;
  std::string status = "ok";
  std::string message;
};

std::vector<Row> collect_rows(const EstimateSet& set, const FitLabels& labels) {
  std::vector<Row> rows;
  const Index p = set.fit.p();
  for (Index j = 0; j < p; ++j) {
    const std::string name = j < static_cast<Index>(labels.focal.size())
                                 ? labels.focal[static_cast<std::size_t>(j)]
                                 : "a" + std::to_string(j);
    for (const auto& [m, outcome] : set.outcomes) {
      Row row;
      row.coefficient = name;
      row.estimate = set.fit.alpha_hat(j);
      row.method = m;
      if (!outcome.ok()) {
        row.status = std::string(to_string(*outcome.error));
        row.message = outcome.message;
      } else {
        const double var = outcome.estimate->omega(j, j);
        try {
          const TestResult test = t_test(row.estimate, 0.0, var);
          row.ok = true;
          row.std_error = std::sqrt(var);
          row.t = test.statistic;
          row.p = test.p_value;
        } catch (const Error& e) {
          row.status = std::string(to_string(e.kind()));
          row.message = e.what();
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<std::string> all_warnings(const EstimateSet& set) {
  std::vector<std::string> out = set.warnings;
  for (const auto& [m, outcome] : set.outcomes) {
    if (!outcome.ok()) {
      out.push_back(std::string(to_string(m)) + " infeasible: " + outcome.message);
      continue;
    }
    for (const auto& w : outcome.estimate->warnings) out.push_back(std::string(to_string(m)) + ": " + w);
  }
  return out;
}

}  // namespace

nlohmann::json fit_json(const EstimateSet& set, const FitLabels& labels) {
  nlohmann::json config;
  config["outcome"] = labels.outcome;
  config["focal"] = labels.focal;
  config["controls"] = labels.controls;
  config["categorical"] = labels.categorical;
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& [m, outcome] : set.outcomes) methods.push_back(std::string(to_string(m)));
  config["methods"] = methods;
  config["n"] = set.fit.n();
  config["p"] = set.fit.p();
  config["rank"] = set.fit.rank;
  config["dropped"] = set.fit.dropped_count();
  config["min_m_diag"] = set.fit.min_m_diag();

  nlohmann::json results = nlohmann::json::array();
  for (const Row& row : collect_rows(set, labels)) {
    nlohmann::json r;
    r["coefficient"] = row.coefficient;
    r["method"] = std::string(to_string(row.method));
    r["estimate"] = row.estimate;
    r["status"] = row.status;
    if (row.ok) {
      r["std_error"] = row.std_error;
      r["t"] = row.t;
      r["p_value"] = row.p;
    } else {
      r["std_error"] = nullptr;
      r["t"] = nullptr;
      r["p_value"] = nullptr;
      r["message"] = row.message;
    }
    results.push_back(r);
  }

  nlohmann::json out;
  out["meta"] = {{"version", ROBUSTSE_VERSION}, {"config", config}};
  out["results"] = results;
  out["warnings"] = all_warnings(set);
  return out;
}

std::string fit_table(const EstimateSet& set, const FitLabels& labels) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-14s %14s %14s %10s %10s\n", "coefficient", "method",
                "estimate", "std.error", "t", "p");
  os << buf;
  for (const Row& row : collect_rows(set, labels)) {
    if (row.ok) {
      std::snprintf(buf, sizeof buf, "%-16s %-14s %14.6g %14.6g %10.4f %10.4g\n",
                    row.coefficient.c_str(), std::string(to_string(row.method)).c_str(),
                    row.estimate, row.std_error, row.t, row.p);
    } else {
      std::snprintf(buf, sizeof buf, "%-16s %-14s %14.6g %14s %10s %10s\n", row.coefficient.c_str(),
                    std::string(to_string(row.method)).c_str(), row.estimate, row.status.c_str(),
                    "---", "---");
    }
    os << buf;
  }
  const auto warnings = all_warnings(set);
  if (!warnings.empty()) {
    os << "\nwarnings:\n";
    for (const auto& w : warnings) os << "  " << w << "\n";
  }
  return os.str();
}

}  // namespace robustse
