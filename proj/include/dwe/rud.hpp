#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwe/corpus.hpp"

namespace dwe::rud {

struct RudError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ScopeMode { per_journal, consolidated };

[[nodiscard]] ScopeMode parse_scope_mode(std::string_view text);

/// Journal id, or kConsolidated for the pooled data set.
inline constexpr int kConsolidated = -1;

[[nodiscard]] std::string scope_label(int scope);

struct WeekGroup {
    int scope = kConsolidated;
    int year = 0;
    int week_number = 0;
    std::array<long long, 7> day_counts{};  // index k-1 for weekday k

    [[nodiscard]] long long total() const;
};

/// N / 7. Throws RudError on an empty group.
[[nodiscard]] double uniform_daily_rate(const WeekGroup& g);
/// n_k / UD = 7 n_k / N. Throws RudError when n_k = 0, since no article carries it.
[[nodiscard]] double rud_for_day(const WeekGroup& g, int weekday);

struct RudObservation {
    long long article_id = 0;
    int scope = kConsolidated;
    int year = 0;
    int week = 0;
    int weekday = 1;
    long long n_k = 0;
    long long N = 0;
    double rud = 0.0;
    double y_star = std::numeric_limits<double>::quiet_NaN();
    double y_star_star = std::numeric_limits<double>::quiet_NaN();

    // Covariate snapshot.
    int journal = 0;
    std::string country;
    Date received;
    corpus::DerivedFeatures features;
};

/// One observation per article, sorted by article id. Week groups are keyed by
/// (journal, year, week) or, consolidated, by (year, week).
[[nodiscard]] std::vector<RudObservation> build_rud_dataset(const corpus::Corpus& c, ScopeMode mode);

/// The week groups behind a data set, ordered by (scope, year, week).
[[nodiscard]] std::vector<WeekGroup> week_groups(const corpus::Corpus& c, ScopeMode mode);

inline const std::vector<std::string> kRudColumns = {"article_id", "scope", "year", "week",
                                                       "weekday",    "n_k",   "N",    "rud"};

void write_rud_csv(std::ostream& os, std::span<const RudObservation> obs);

/// Reads rud.csv back. Covariate fields are left default.
[[nodiscard]] std::vector<RudObservation> parse_rud_csv(std::string_view text);
[[nodiscard]] std::vector<RudObservation> read_rud_file(const std::string& path);

}  // namespace dwe::rud
