#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwe/diststat.hpp"
#include "dwe/parallel.hpp"
#include "dwe/rud.hpp"

namespace dwe::linmod {

struct LinmodError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Regressors of the article-level models. Friday, winter and Europe are the
/// reference categories and have no term.
enum class Term {
    intercept,
    mon,
    tue,
    wed,
    thu,
    weekend,
    spring,
    summer,
    fall,
    america,
    africa,
    asia,
    oceania,
    christmas,
    log10_authors,
    log10_hdi,
    log10_lto,
};

inline constexpr Term kAllTerms[] = {Term::intercept, Term::mon,     Term::tue,           Term::wed,
                                     Term::thu,       Term::weekend, Term::spring,        Term::summer,
                                     Term::fall,      Term::america, Term::africa,        Term::asia,
                                     Term::oceania,   Term::christmas, Term::log10_authors, Term::log10_hdi,
                                     Term::log10_lto};

[[nodiscard]] std::string term_label(Term t);
[[nodiscard]] Term parse_term(std::string_view label);

enum class Method { ols, rls };
[[nodiscard]] Method parse_method(std::string_view text);
[[nodiscard]] std::string_view method_name(Method m);

struct ModelSpec {
    std::string id;  // "M1".."M9" or a custom name
    std::vector<Term> terms;
    Method method = Method::ols;
};

/// M1 weekdays, M2 seasons, M3 continents, then M4..M9 adding seasons,
/// continents, CHRISTMAS, log10 AUTHORS, log10 HDI and log10 LTO in turn.
[[nodiscard]] ModelSpec model(int number, Method method = Method::ols);
/// "M1..M9", "M1,M4,M9" or "all".
[[nodiscard]] std::vector<ModelSpec> parse_model_list(std::string_view text, Method method = Method::ols);

struct DesignMatrix {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> columns;
    std::vector<std::string> dropped_columns;
    std::vector<long long> row_ids;
    std::size_t listwise_dropped = 0;  // rows removed for a missing covariate

    [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
    [[nodiscard]] std::size_t p() const { return static_cast<std::size_t>(X.cols()); }
    [[nodiscard]] bool has_intercept() const;
};

/// Value of one regressor for an observation; nullopt when the covariate is missing.
[[nodiscard]] std::optional<double> term_value(const rud::RudObservation& o, Term t);

/// Sets y* and y** on every observation. Errors name the offending observation.
void attach_transform(std::span<rud::RudObservation> obs, const diststat::TransformSpec& spec);

/// Dummy-encoded design with y**. Rows lacking a covariate the spec uses are
/// dropped listwise; constant and exactly collinear columns are dropped in
/// term order. Throws LinmodError when y** is unset or n <= p remains.
[[nodiscard]] DesignMatrix build_design(std::span<const rud::RudObservation> obs, const ModelSpec& spec);

/// Removes non-intercept columns that are constant or lie in the span of the
/// columns before them; their labels are appended to dropped_columns.
void drop_degenerate_columns(DesignMatrix& d, double rel_tol = 1e-9);

struct Coefficient {
    std::string label;
    double estimate = 0.0;
    double se = std::numeric_limits<double>::quiet_NaN();
    double t = std::numeric_limits<double>::quiet_NaN();
    double p_value = std::numeric_limits<double>::quiet_NaN();
    int stars = 0;

    [[nodiscard]] bool se_available() const { return std::isfinite(se); }
};

/// *** p <= 0.01, ** p <= 0.05, * p <= 0.10.
[[nodiscard]] int stars_for(double p_value);
[[nodiscard]] std::string star_text(int stars);

struct FitResult {
    Method method = Method::ols;
    std::vector<Coefficient> coefficients;
    Eigen::VectorXd beta;
    Eigen::MatrixXd covariance;  // NaN when not computable
    Eigen::VectorXd residuals;
    Eigen::VectorXd irls_weights;  // RLS only
    double r2 = std::numeric_limits<double>::quiet_NaN();
    double adjusted_r2 = std::numeric_limits<double>::quiet_NaN();
    double f_stat = std::numeric_limits<double>::quiet_NaN();
    double f_p_value = std::numeric_limits<double>::quiet_NaN();
    bool f_significant = false;  // p < 0.01
    double scale = std::numeric_limits<double>::quiet_NaN();  // residual sigma, or the final MAD scale
    std::size_t n = 0;
    std::size_t p = 0;
    int iterations = 0;
    bool converged = true;
    bool ols_fallback = false;
    std::vector<std::string> dropped_columns;
    std::size_t listwise_dropped = 0;

    [[nodiscard]] const Coefficient* find(std::string_view label) const;
};

/// Householder QR least squares with classical standard errors and Student t
/// p-values. n == p gives an exact fit with unavailable standard errors.
/// Throws LinmodError naming the dependent columns when X is rank deficient.
[[nodiscard]] FitResult ols_fit(const DesignMatrix& d);

struct RlsOptions {
    double tuning = 4.685;
    double tolerance = 1e-8;
    int max_iterations = 200;
    bool fallback_to_ols = false;  // replace a non-converged fit by OLS, flagged
};

/// Tukey bisquare weight for a scaled residual u.
[[nodiscard]] double bisquare_weight(double u, double c = 4.685);

/// IRLS M-estimate started from OLS, with MAD scale re-estimated every
/// iteration. Standard errors use the Huber sandwich correction and normal
/// p-values; R2 uses the final weights.
[[nodiscard]] FitResult rls_fit(const DesignMatrix& d, const RlsOptions& opt = {});

[[nodiscard]] FitResult fit(const DesignMatrix& d, Method m, const RlsOptions& opt = {});

/// 1 / (1 - R2_j) of each non-intercept column regressed on the others plus an
/// intercept. Perfect collinearity gives +infinity.
[[nodiscard]] std::vector<double> vif(const DesignMatrix& d);

struct HeteroskedasticityTests {
    diststat::TestResult breusch_pagan;
    diststat::TestResult white;
    std::size_t white_dropped = 0;  // duplicated auxiliary columns removed
};

/// n R2 of the squared residuals regressed on the design (df p - 1), and on the
/// design with squares and cross products (df = auxiliary regressors).
[[nodiscard]] HeteroskedasticityTests heteroskedasticity_tests(const FitResult& fit, const DesignMatrix& d,
                                                               double alpha = 0.05);
[[nodiscard]] diststat::TestResult breusch_pagan(const Eigen::VectorXd& residuals, const DesignMatrix& d,
                                                 double alpha = 0.05);

struct Diagnostics {
    std::vector<std::string> columns;  // non-intercept
    std::vector<double> vif;
    HeteroskedasticityTests heteroskedasticity;
    diststat::TestResult residual_jb;
};

[[nodiscard]] Diagnostics diagnose(const FitResult& fit, const DesignMatrix& d);

/// Breusch-Pagan rejection share over seeded replications of y = b0 + b1 x + e
/// with n observations. Heteroskedastic replications use var(e) proportional to x.
struct BpSimulation {
    std::size_t n = 1000;
    std::size_t replications = 1000;
    std::uint64_t seed = 1;
    bool heteroskedastic = false;
    double alpha = 0.05;
};
[[nodiscard]] double bp_rejection_rate(const BpSimulation& sim, Execution ex = Execution::parallel);

// ---------------------------------------------------------------------------
// roll windows

struct YearWindow {
    int from = 0;
    int to = 0;
    [[nodiscard]] std::string label() const;
    [[nodiscard]] bool contains(int year) const { return year >= from && year <= to; }
};

/// 2000-2004, 2005-2007, 2008-2010, 2011-2013, 2014-2016.
[[nodiscard]] std::vector<YearWindow> default_windows();
/// "default", "all" (one window spanning every year) or "2000-2004,2005-2007".
/// Overlapping windows throw LinmodError.
[[nodiscard]] std::vector<YearWindow> parse_windows(std::string_view text);

enum class CellKind { absent, dropped, estimate, no_se, failed };

struct ReportCell {
    CellKind kind = CellKind::absent;
    double value = 0.0;
    int stars = 0;

    friend bool operator==(const ReportCell&, const ReportCell&) = default;
};

struct ModelColumn {
    std::string model_id;
    std::size_t n = 0;
    std::string status;  // ols, rls, rls-nonconverged, ols-fallback, empty, failed
    ReportCell adjusted_r2;
    std::vector<ReportCell> cells;  // parallel to kAllTerms

    friend bool operator==(const ModelColumn&, const ModelColumn&) = default;
};

struct ReportBlock {
    std::string scope;
    YearWindow window;
    std::vector<ModelColumn> models;

    friend bool operator==(const ReportBlock& a, const ReportBlock& b) {
        return a.scope == b.scope && a.window.from == b.window.from && a.window.to == b.window.to &&
               a.models == b.models;
    }
};

struct RollReport {
    std::vector<ReportBlock> blocks;  // ordered by (scope, window)
    friend bool operator==(const RollReport&, const RollReport&) = default;
};

struct ScopeData {
    std::string label;
    std::vector<rud::RudObservation> observations;  // y** attached
};

[[nodiscard]] ModelColumn summarize(const FitResult& fit, const ModelSpec& spec);

/// Fits every spec on every (scope, window) subset. Jobs run in parallel; the
/// report order is fixed by scope, window and spec order.
[[nodiscard]] RollReport roll_window_run(std::span<const ScopeData> scopes, std::span<const YearWindow> windows,
                                         std::span<const ModelSpec> specs, const RlsOptions& opt = {},
                                         Execution ex = Execution::parallel);

/// One block per (scope, window): rows are terms, adjusted R2, n and status;
/// one column per model with stars appended to the estimate.
void write_report_csv(std::ostream& os, const RollReport& report);
[[nodiscard]] RollReport parse_report_csv(std::string_view text);

[[nodiscard]] std::string format_cell(const ReportCell& c);
[[nodiscard]] ReportCell parse_cell(std::string_view text);

}  // namespace dwe::linmod
