#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwe/parallel.hpp"

namespace dwe::diststat {

struct DiststatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// adjusted: bias-corrected G1 and the small-sample excess kurtosis estimator.
/// plain: moment ratios g1 = m3 / m2^1.5 and g2 = m4 / m2^2 - 3.
enum class Estimator { adjusted, plain };

struct MomentSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // S2 / (n - 1)
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

/// Throws DiststatError for n < 4, zero variance or non-finite input.
[[nodiscard]] MomentSummary moments(std::span<const double> sample, Estimator est = Estimator::adjusted);

struct TestResult {
    double statistic = 0.0;
    int df = 0;
    double critical_value = 0.0;
    bool reject_null = false;
    double alpha = 0.05;
    double p_value = std::numeric_limits<double>::quiet_NaN();
};

/// Upper-tail chi-square critical value. At alpha = 0.05 the tabulated
/// 5.99 (df 2), 9.49 (df 4) and 12.59 (df 6) are used as printed.
[[nodiscard]] double chi_square_critical(int df, double alpha);
[[nodiscard]] double chi_square_sf(double x, int df);

[[nodiscard]] TestResult jarque_bera(std::size_t n, double skewness, double excess_kurtosis, double alpha = 0.05);
[[nodiscard]] TestResult jarque_bera(const MomentSummary& m, double alpha = 0.05);

/// Goodness of fit against equal expected counts total / m, df = m - 1.
[[nodiscard]] TestResult chi_square_uniformity(std::span<const long long> counts, double alpha = 0.05);

// ---------------------------------------------------------------------------
// two-step transform

enum class Step1Kind { log10_shift, power };

struct TransformSpec {
    Step1Kind step1 = Step1Kind::power;
    double step1_param = 1.0;  // c for log10-shift, lambda1 for power
    double lambda2 = 1.0;

    friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

inline constexpr TransformSpec kIdentitySpec{Step1Kind::power, 1.0, 1.0};

/// y -> ((y + 1)^lambda - 1) / lambda, ln(y + 1) at lambda = 0. Requires y > -1.
[[nodiscard]] double power_step(double y, double lambda);
[[nodiscard]] double apply_step1(double rud, const TransformSpec& spec);
[[nodiscard]] double apply_step2(double y_star, const TransformSpec& spec);

/// The value is outside the transform's domain.
class TransformDomainError : public DiststatError {
public:
    TransformDomainError(std::size_t index, double value, const std::string& why)
        : DiststatError("observation " + std::to_string(index) + " (value " + std::to_string(value) + "): " + why),
          index_(index),
          reason_(why) {}
    [[nodiscard]] std::size_t index() const { return index_; }
    [[nodiscard]] const std::string& reason() const { return reason_; }

private:
    std::size_t index_;
    std::string reason_;
};

/// y** for one RUD value. Throws TransformDomainError (index 0) on domain violations.
[[nodiscard]] double apply_transform(double rud, const TransformSpec& spec);

struct Transformed {
    std::vector<double> y_star;
    std::vector<double> y_star_star;
};

/// Whole-sample transform; the error names the offending observation index.
[[nodiscard]] Transformed apply_transform(std::span<const double> rud, const TransformSpec& spec);

struct GridRange {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    [[nodiscard]] std::vector<double> values() const;
};

struct TransformGrid {
    GridRange shift{-0.2, 0.2, 0.01};
    GridRange lambda1{-8.0, 8.0, 0.05};
    GridRange lambda2{-2.0, 3.0, 0.005};
    Estimator estimator = Estimator::adjusted;
};

struct TransformFit {
    TransformSpec spec;
    double jb = 0.0;
    double raw_jb = 0.0;
    double step1_skewness = 0.0;
    MomentSummary final_moments;
};

/// Per family: step 1 minimises |skewness| of y* over the feasible grid (for
/// log10-shift the skewness does not depend on c, so c is searched with lambda2),
/// then lambda2 minimises JB. The lower-JB family wins; the identity spec is kept
/// unless strictly beaten. Ties: smaller |parameter|, then log10-shift first.
[[nodiscard]] TransformFit fit_transform_spec(std::span<const double> rud, const TransformGrid& grid = {},
                                              Execution ex = Execution::parallel);

/// JB of power_step(y, lambda) for every lambda, given L = ln(y + 1). NaN marks
/// grid points with degenerate moments.
[[nodiscard]] std::vector<double> jb_over_power_grid(std::span<const double> log1p_y, std::span<const double> lambdas,
                                                     Estimator est, Execution ex);

/// spec.cfg: "step1=log10-shift|power", "step1_param=", "lambda2=".
void write_spec_cfg(std::ostream& os, const TransformSpec& spec);
[[nodiscard]] TransformSpec parse_spec_cfg(std::string_view text);
[[nodiscard]] TransformSpec read_spec_file(const std::string& path);

[[nodiscard]] std::string describe(const TransformSpec& spec);

}  // namespace dwe::diststat
