#ifndef XSTS_IO_HPP_
#define XSTS_IO_HPP_

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xsts/limitdist.hpp"
#include "xsts/mc_harness.hpp"

namespace xsts {

// Shortest representation that round-trips a double (17 significant digits).
std::string format_double(double v);

// Columns: t, nu, eta; the first row is the pre-sample value (no eta).
void write_factor_csv(const FactorPath& path, const std::string& file);

// Columns: i, t, y, x.
void write_panel_csv(const PanelData& panel, const std::string& file);

// Columns: probability, quantile.
void write_quantile_csv(const std::vector<std::pair<double, double>>& table,
                        const std::string& file);

FactorPath read_factor_csv(const std::string& file, Regime regime,
                           double param, double sigma_eta);
PanelData read_panel_csv(const std::string& file);

nlohmann::json study_config_json(const StudyConfig& config);
StudyConfig study_config_from_json(const nlohmann::json& j);

nlohmann::json study_summary_json(const StudyResult& result);
nlohmann::json confidence_region_json(const ConfidenceRegion& region);

// Directory layout: config.json, reps.csv, summary.json.
void write_study_archive(const StudyResult& result, const std::string& dir);

// Rejects keys outside `allowed`; used to enforce strict config schemas.
void reject_unknown_keys(const nlohmann::json& j,
                         const std::vector<std::string>& allowed,
                         const std::string& context);

}  // namespace xsts

#endif  // XSTS_IO_HPP_
