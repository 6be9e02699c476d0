#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwe/corpus.hpp"
#include "dwe/linmod.hpp"
#include "dwe/parallel.hpp"
#include "dwe/rud.hpp"

// Country x day panel with cross-section random effects.
namespace dwe::panel {

struct PanelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class TrendBase { log10, ln };

struct PanelCell {
    std::string country;
    int t = 1;  // day index, 1 = start date
    Date day;
    long long n_ct = 0;
    double y = 0.0;  // mean log10 RUD of the cell's articles
    double mean_log10_authors = 0.0;
    int weekday = 1;
    bool weekend = false;
    corpus::Season season = corpus::Season::winter;
    bool christmas = false;
    double log10_hdi = 0.0;
    std::optional<double> log10_lto;
    double trend = 0.0;
};

struct PanelOptions {
    int top_n = 11;
    Date start{2010, 1, 1};
    Date end{2016, 8, 31};
    TrendBase trend_base = TrendBase::log10;
};

/// Countries ranked by paper count inside the date range, ties by ISO code.
[[nodiscard]] std::vector<std::string> top_countries(std::span<const rud::RudObservation> obs, const PanelOptions& opt);

/// One cell per populated (country, day) among the top countries. Cells are
/// ordered by (country, t). Throws PanelError when fewer than top_n countries
/// have papers in the range.
[[nodiscard]] std::vector<PanelCell> build_panel(std::span<const rud::RudObservation> obs,
                                                 const corpus::CountryTable& countries, const PanelOptions& opt = {},
                                                 Execution ex = Execution::parallel);

enum class Weighting {
    none,
    multiply,  // y and continuous regressors of each cell times n_ct
    wls,       // every variable times sqrt(n_ct)
};

struct PanelFit {
    std::vector<linmod::Coefficient> coefficients;
    Eigen::VectorXd beta;
    std::vector<std::string> dropped_columns;
    double sigma2_u = 0.0;
    double sigma2_lambda = 0.0;
    double rho = 0.0;    // sigma2_u / (sigma2_u + sigma2_lambda)
    double ratio = 0.0;  // sigma2_u / sigma2_lambda
    bool sigma2_u_clamped = false;
    std::vector<std::string> countries;
    std::vector<double> theta;  // per country
    double adjusted_r2 = std::numeric_limits<double>::quiet_NaN();
    std::size_t cases = 0;
    std::size_t listwise_dropped = 0;
    Weighting weighting = Weighting::none;
    TrendBase trend_base = TrendBase::log10;
    std::string note;  // externally supplied stationarity test outcomes

    [[nodiscard]] const linmod::Coefficient* find(std::string_view label) const;
};

/// Regressor labels of the country-day model, in design order.
[[nodiscard]] const std::vector<std::string>& panel_columns();

/// Random-effects panel data: y, design with labelled columns, and group index per row.
struct PanelData {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> columns;
    std::vector<int> group;  // 0-based
    std::vector<std::string> group_labels;
    std::vector<std::string> dropped_columns;
    std::size_t listwise_dropped = 0;
};

[[nodiscard]] PanelData panel_design(std::span<const PanelCell> cells, Weighting w);

/// Two-step feasible GLS. sigma2_lambda comes from the within regression;
/// sigma2_u from the between quadratic form of pooled OLS residuals, corrected
/// by its exact expectation. Rows are quasi-demeaned by
/// theta_c = 1 - sqrt(s2_lambda / (s2_lambda + T_c s2_u)) and refitted by OLS.
[[nodiscard]] PanelFit re_egls(const PanelData& data);
[[nodiscard]] PanelFit re_egls_fit(std::span<const PanelCell> cells, Weighting w = Weighting::none);

/// Pooled OLS on the same design, for comparison.
[[nodiscard]] linmod::FitResult pooled_ols(const PanelData& data);

inline const std::vector<std::string> kPanelFitColumns = {"term", "estimate", "se", "t", "p", "stars"};

/// Coefficient table followed by "# key=value" summary lines.
void write_panel_fit_csv(std::ostream& os, const PanelFit& fit);

}  // namespace dwe::panel
