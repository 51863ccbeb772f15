#include "robustse/sim_report.hpp"

#include <cstdio>
#include <sstream>

namespace robustse {

namespace {

nlohmann::json config_json(const SimConfig& c) {
  nlohmann::json j;
  j["design"] = std::string(to_string(c.design));
  if (c.design == DesignKind::Cjn) {
    j["n"] = c.n;
    j["q"] = c.q;
  } else {
    j["N"] = c.units;
    j["T"] = c.periods;
    j["n"] = c.sample_size();
    j["q"] = c.units;
  }
  j["reps"] = c.reps;
  j["seed"] = c.seed;
  j["level"] = c.level;
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : kAllMethods)
    if (c.methods.count(m)) methods.push_back(std::string(to_string(m)));
  j["methods"] = methods;
  return j;
}

nlohmann::json nullable(bool missing, double value) {
  return missing ? nlohmann::json(nullptr) : nlohmann::json(value);
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

nlohmann::json simulation_json(const std::vector<SimulationReport>& reports, std::optional<int> table) {
  nlohmann::json meta;
  meta["version"] = ROBUSTSE_VERSION;
  meta["generator"] = std::string(kGeneratorName);
  if (!reports.empty()) meta["seed"] = reports.front().config.seed;
  if (table) meta["table"] = *table;
  nlohmann::json configs = nlohmann::json::array();
  nlohmann::json results = nlohmann::json::array();
  nlohmann::json warnings = nlohmann::json::array();

  for (const auto& rep : reports) {
    const nlohmann::json cfg = config_json(rep.config);
    nlohmann::json cfg_entry = cfg;
    cfg_entry["reps_completed"] = rep.reps_completed;
    cfg_entry["reps_failed"] = rep.reps_failed;
    configs.push_back(cfg_entry);
    for (const auto& row : rep.rows) {
      nlohmann::json r;
      r["design"] = cfg["design"];
      if (rep.config.design == DesignKind::Cjn) {
        r["n"] = rep.config.n;
        r["q"] = rep.config.q;
      } else {
        r["N"] = rep.config.units;
        r["T"] = rep.config.periods;
      }
      r["method"] = std::string(to_string(row.method));
      r["missing"] = row.missing;
      r["relative_bias"] = nullable(row.missing, row.relative_bias);
      r["relative_rmse"] = nullable(row.missing, row.relative_rmse);
      r["empirical_size"] = nullable(row.missing, row.empirical_size);
      r["completed"] = row.completed;
      r["nonexistent"] = row.nonexistent;
      r["indefinite"] = row.indefinite;
      results.push_back(r);
    }
    for (const auto& w : rep.warnings) {
      std::ostringstream os;
      os << to_string(rep.config.design) << ' ';
      if (rep.config.design == DesignKind::Cjn)
        os << "q=" << rep.config.q;
      else
        os << "N=" << rep.config.units << " T=" << rep.config.periods;
      os << ": " << w;
      warnings.push_back(os.str());
    }
  }
  meta["configs"] = configs;

  nlohmann::json out;
  out["meta"] = meta;
  out["results"] = results;
  out["warnings"] = warnings;
  return out;
}

std::string simulation_table(const std::vector<SimulationReport>& reports) {
  std::ostringstream os;
  std::size_t start = 0;
  while (start < reports.size()) {
    // Consecutive reports of the same design share one table.
    std::size_t end = start + 1;
    while (end < reports.size() && reports[end].config.design == reports[start].config.design &&
           reports[end].rows.size() == reports[start].rows.size())
      ++end;

    const SimConfig& c0 = reports[start].config;
    const bool panel = c0.design != DesignKind::Cjn;
    os << "Design " << to_string(c0.design);
    if (!panel) os << " (n = " << c0.n << ")";
    os << ", " << c0.reps << " replications, seed " << c0.seed << "\n";

    constexpr std::size_t key_w = 6;
    constexpr std::size_t col_w = 13;
    std::string header = panel ? pad_left("N", key_w) + pad_left("T", key_w) : pad_left("q", key_w);
    for (const auto& row : reports[start].rows) header += pad_left(std::string(to_string(row.method)), col_w);
    os << header << "\n" << std::string(header.size(), '-') << "\n";

    char level_buf[32];
    std::snprintf(level_buf, sizeof level_buf, "%g%%", 100.0 * c0.level);
    const std::string panels[3] = {"Relative bias", "Relative RMSE",
                                   std::string("Empirical size (") + level_buf + " level)"};
    for (int panel_idx = 0; panel_idx < 3; ++panel_idx) {
      os << panels[panel_idx] << "\n";
      for (std::size_t k = start; k < end; ++k) {
        const SimConfig& c = reports[k].config;
        std::string line = panel ? pad_left(std::to_string(c.units), key_w) +
                                       pad_left(std::to_string(c.periods), key_w)
                                 : pad_left(std::to_string(c.q), key_w);
        for (const auto& row : reports[k].rows) {
          double v = panel_idx == 0 ? row.relative_bias
                                    : panel_idx == 1 ? row.relative_rmse : row.empirical_size;
          line += pad_left(row.missing ? std::string("---") : fixed3(v), col_w);
        }
        os << line << "\n";
      }
    }
    os << "\n";
    start = end;
  }
  return os.str();
}

}  // namespace robustse
