#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dwe/harvest.hpp"
#include "dwe/linmod.hpp"
#include "dwe/panel.hpp"
#include "dwe/rud.hpp"

// Stage runner behind the command-line tool.
namespace dwe::pipeline {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// In dependency order.
enum class Stage { harvest, clean, rud, normality, transform, regress, panel, lq };

[[nodiscard]] std::string_view stage_name(Stage s);
[[nodiscard]] Stage parse_stage(std::string_view name);
/// Comma-separated stage names, "all", or empty / "none" for no stages.
/// Returned in dependency order without duplicates.
[[nodiscard]] std::vector<Stage> parse_stage_list(std::string_view text);

struct RunConfig {
    std::string harvest_dir;
    harvest::JournalStyle harvest_style = harvest::JournalStyle::plos_like;
    int harvest_journal = 1;

    std::string corpus;
    std::string countries;
    std::string output_dir = ".";
    rud::ScopeMode scope = rud::ScopeMode::consolidated;
    std::vector<Stage> stages;

    std::string transform = "fit";  // fit, identity or a spec.cfg path
    std::string models = "M1..M9";
    linmod::Method method = linmod::Method::ols;
    bool fallback_ols = false;
    bool diagnostics = false;
    std::string windows = "default";

    panel::PanelOptions panel;
    panel::Weighting panel_weighting = panel::Weighting::none;

    std::string lq_select = "weekday in 2,3,4";
    int lq_classes = 5;
    std::string lq_geometry;  // optional GeoJSON FeatureCollection

    std::uint64_t seed = 1;

    /// Artifact name -> path, overriding output_dir/<default file name>. An
    /// empty path disables the artifact.
    std::map<std::string, std::string> output_paths;

    std::string hash;  // of the configuration text
};

/// key=value lines; '#' starts a comment. Unknown keys, malformed values and
/// missing referenced files throw ConfigError naming the key or path.
/// Relative paths are resolved against base_dir.
[[nodiscard]] RunConfig parse_run_config(std::string_view text, const std::string& base_dir = ".");
/// As parse_run_config; the DWE_OUTPUT_DIR environment variable overrides output_dir.
[[nodiscard]] RunConfig load_run_config(const std::string& path);

/// Throws ConfigError when a file the requested stages read is missing.
void validate_inputs(const RunConfig& cfg);

/// First line of every report: "dwe <version> config=<hash>".
[[nodiscard]] std::string report_tag(const RunConfig& cfg);

/// Path of an artifact: the override if present, else output_dir/<default>.
[[nodiscard]] std::string artifact_path(const RunConfig& cfg, const std::string& artifact);

struct StageResult {
    Stage stage = Stage::clean;
    bool ok = true;
    std::string message;
    std::vector<std::string> outputs;
};

struct PipelineResult {
    std::vector<StageResult> stages;
    int exit_code = 0;
};

inline constexpr std::string_view kFailedMarker = "FAILED";

/// Runs the requested stages in dependency order, computing unrequested
/// prerequisites in memory. The first failing stage stops the run, leaves the
/// outputs written so far and writes a FAILED marker into output_dir.
[[nodiscard]] PipelineResult run_pipeline(const RunConfig& cfg, std::ostream& log);

/// One row per scope: moments and JB of RUD, weekday chi-square over seven
/// days (df 6) and over Monday to Friday (df 4).
void write_normality_csv(std::ostream& os, std::span<const rud::RudObservation> obs);

inline const std::vector<std::string> kNormalityColumns = {
    "scope",       "n",           "mean",          "variance",   "skewness",
    "excess_kurtosis", "jb",      "jb_reject",     "chi2_week",  "chi2_week_reject",
    "chi2_workdays", "chi2_workdays_reject"};

/// Observations grouped by scope label, in scope order.
[[nodiscard]] std::vector<linmod::ScopeData> split_scopes(std::span<const rud::RudObservation> obs);

}  // namespace dwe::pipeline
