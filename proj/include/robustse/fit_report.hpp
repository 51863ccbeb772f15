#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustse/csv.hpp"
#include "robustse/variance.hpp"

namespace robustse {

/// A regression specified by column names.
struct FitRequest {
  std::string data_path;
  std::string outcome;
  std::vector<std::string> focal;
  std::vector<std::string> controls;
  std::vector<std::string> categorical;  // expanded to dummies
  bool intercept = false;
  std::set<Method> methods{Method::HC0, Method::HC2, Method::HC3, Method::HRK, Method::CJN,
                           Method::LooCrossfit};
  std::string output;           // empty = stdout
  std::string format = "json";  // json | table
  bool strict = false;

  /// Throws InvalidArgument on an empty focal list or outcome reuse.
  void validate() const;
};

/// Builds the regression from a table. The first categorical column becomes
/// one-way fixed effects; further ones are dummy-coded without their first
/// level. An intercept is only added when requested and no fixed effects exist.
Dataset build_dataset(const CsvTable& table, const FitRequest& request);

/// Names for the focal coefficients, in column order.
struct FitLabels {
  std::string outcome;
  std::vector<std::string> focal;
  std::vector<std::string> controls;
  std::vector<std::string> categorical;
};

/// {meta: {version, config}, results: [...], warnings: [...]}, one result per
/// focal coefficient and method with estimate, std_error, t (against 0), p_value.
nlohmann::json fit_json(const EstimateSet& set, const FitLabels& labels);

std::string fit_table(const EstimateSet& set, const FitLabels& labels);

/// Methods that failed, for --strict handling and warnings.
std::vector<Method> failed_methods(const EstimateSet& set);

}  // namespace robustse
