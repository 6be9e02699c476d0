#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dwe/corpus.hpp"
#include "dwe/parallel.hpp"

// Localization quotients, natural-breaks classes and map data export.
namespace dwe::geo {

struct GeoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Field { weekday, journal };

struct Atom {
    Field field = Field::weekday;
    std::vector<int> values;  // sorted, unique
};

/// Disjunction of conjunctions of membership atoms, e.g.
///   weekday in 2,3,4
///   [received_week_day] = 6 OR = 7 AND idj = 3
/// Fields: weekday (received_week_day, day) with 1 = Monday .. 7 = Sunday or
/// mon..sun, and journal (idj). A field may be omitted after the first atom to
/// reuse the previous one. AND binds tighter than OR; parentheses group.
class SelectionExpr {
public:
    [[nodiscard]] static SelectionExpr parse(std::string_view text);

    [[nodiscard]] bool matches(int weekday, int journal) const;
    [[nodiscard]] bool matches(const corpus::Article& a) const {
        return matches(a.features.weekday, a.record.journal);
    }
    /// Canonical text, parseable back to an equal expression.
    [[nodiscard]] std::string text() const;
    [[nodiscard]] const std::vector<std::vector<Atom>>& clauses() const { return clauses_; }

private:
    std::vector<std::vector<Atom>> clauses_;
};

struct LqEntry {
    std::string country;
    long long selected = 0;
    long long total = 0;
    double share = 0.0;  // selected / total * 100
    double lq = 0.0;     // share / world share * 100
};

struct LqResult {
    std::vector<LqEntry> entries;  // by ISO code; countries without papers are absent
    long long selected_world = 0;
    long long total_world = 0;
    double world_share = 0.0;
};

/// Throws GeoError when nothing in the corpus matches the selection.
[[nodiscard]] LqResult localization_quotient(std::span<const corpus::Article> articles, const SelectionExpr& sel,
                                             Execution ex = Execution::parallel);

struct ClassBreaks {
    int k = 1;
    std::vector<double> boundaries;  // k - 1 ascending upper values of classes 0..k-2

    /// Index of the first class whose upper value is >= v, else k - 1.
    [[nodiscard]] int classify(double v) const;
};

/// Fisher-Jenks optimal partition of the sorted values into k contiguous
/// classes minimizing the total within-class sum of squares. Equal values share
/// a class. Among optimal partitions the smallest boundary vector is returned.
[[nodiscard]] ClassBreaks jenks_breaks(std::span<const double> values, int k);

/// Total within-class sum of squared deviations of values under breaks.
[[nodiscard]] double within_class_ss(std::span<const double> values, const ClassBreaks& breaks);

struct ChoroplethRow {
    std::string country;
    std::optional<double> lq;
    std::optional<int> class_index;
    long long selected = 0;
    long long total = 0;
};

/// One row per country of lq and of the universe, sorted by ISO code.
/// Universe countries with no papers get an empty lq and class.
[[nodiscard]] std::vector<ChoroplethRow> choropleth_rows(const LqResult& lq, const ClassBreaks& breaks,
                                                         std::span<const std::string> universe = {});

inline const std::vector<std::string> kChoroplethColumns = {"country", "lq", "class_index", "selected", "total"};

void write_choropleth_csv(std::ostream& os, std::span<const ChoroplethRow> rows);

struct GeoJsonExport {
    std::string text;
    std::vector<std::string> skipped_countries;  // rows with no matching geometry feature
};

/// FeatureCollection with lq, class_index, selected and total properties.
/// Without geometry every row becomes a feature with null geometry. With a
/// geometry FeatureCollection, features are joined on properties iso, ISO2,
/// iso_a2 or ISO_A2; unmatched rows are listed in skipped_countries.
[[nodiscard]] GeoJsonExport choropleth_geojson(std::span<const ChoroplethRow> rows, const ClassBreaks& breaks,
                                               std::optional<std::string_view> geometry = std::nullopt);

}  // namespace dwe::geo
