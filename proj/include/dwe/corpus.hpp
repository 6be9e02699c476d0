#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dwe/date.hpp"

namespace dwe::corpus {

struct CorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Season { spring, summer, fall, winter };
enum class Continent { europe, america, africa, asia, oceania };

[[nodiscard]] std::string_view season_name(Season s);
[[nodiscard]] std::string_view continent_name(Continent c);
[[nodiscard]] Continent parse_continent(std::string_view name);

/// One line of corpus.csv. Optional fields are blank in the file.
struct CorpusRow {
    long long id = 0;
    int journal = 0;
    std::optional<Date> received;
    std::optional<Date> revised;
    std::optional<Date> online;
    int author_count = 0;
    int page_count = 0;
    std::string country;  // ISO code; empty when unresolved

    friend bool operator==(const CorpusRow&, const CorpusRow&) = default;
};

inline const std::vector<std::string> kCorpusColumns = {
    "id", "journal", "received", "revised", "online", "author_count", "page_count", "country"};

[[nodiscard]] std::vector<CorpusRow> parse_corpus_csv(std::string_view text);
[[nodiscard]] std::vector<CorpusRow> read_corpus_file(const std::string& path);
void write_corpus_csv(std::ostream& os, std::span<const CorpusRow> rows);

struct WeekendRule {
    Date effective_from;
    std::vector<int> days;  // weekday codes 1..7, sorted
};

struct CountryProfile {
    std::string iso;
    Continent continent = Continent::europe;
    double hdi = 1.0;
    std::optional<double> lto;
    bool special_weekend = false;  // SWC: default rest days are Friday and Saturday
    std::vector<WeekendRule> schedule;  // strictly increasing effective_from

    /// Rest days of the latest rule in force on `d`, else the default set.
    [[nodiscard]] const std::vector<int>& weekend_days_on(const Date& d) const;
};

inline const std::vector<int> kDefaultWeekend = {6, 7};
inline const std::vector<int> kSpecialWeekend = {5, 6};

class CountryTable {
public:
    void add(CountryProfile profile);
    [[nodiscard]] const CountryProfile* find(std::string_view iso) const;
    [[nodiscard]] bool contains(std::string_view iso) const { return find(iso) != nullptr; }
    [[nodiscard]] std::size_t size() const { return profiles_.size(); }
    [[nodiscard]] std::vector<std::string> codes() const;

private:
    std::map<std::string, CountryProfile, std::less<>> profiles_;
};

/// countries.cfg: one country per line, whitespace-separated key=value tokens:
///   iso=SA continent=asia hdi=0.847 lto=36 swc=yes from=1900-01-01 days=4,5 from=2013-06-29 days=5,6
/// `lto=` may be blank. '#' starts a comment.
[[nodiscard]] CountryTable parse_countries_cfg(std::string_view text);
[[nodiscard]] CountryTable load_countries_file(const std::string& path);

struct DerivedFeatures {
    int weekday = 1;      // 1 = Monday .. 7 = Sunday
    int week_number = 1;  // Sunday-started weeks, week 1 holds Jan 1
    int year = 1970;
    Season season = Season::winter;
    bool is_weekend = false;
    bool is_christmas = false;
    Continent continent = Continent::europe;
    double log10_authors = 0.0;
    double log10_hdi = 0.0;
    std::optional<double> log10_lto;

    friend bool operator==(const DerivedFeatures&, const DerivedFeatures&) = default;
};

struct ArticleRecord {
    long long id = 0;
    int journal = 0;
    Date received;
    std::optional<Date> revised;
    std::optional<Date> online;
    int author_count = 1;
    int page_count = 0;
    std::string country;

    friend bool operator==(const ArticleRecord&, const ArticleRecord&) = default;
};

struct Article {
    ArticleRecord record;
    DerivedFeatures features;
};

struct CleaningReport {
    std::size_t input = 0;
    std::size_t retained = 0;
    std::map<std::string, std::size_t> dropped;  // reason -> count
};

inline constexpr std::string_view kDropNoReception = "no-reception-date";
inline constexpr std::string_view kDropUnclearCountry = "unclear-country";
inline constexpr std::string_view kDropNoAuthors = "no-authors";

struct Corpus {
    std::vector<Article> records;  // sorted by id
    CountryTable countries;
    CleaningReport cleaning_report;
};

[[nodiscard]] int derive_weekday(const Date& d);
[[nodiscard]] int derive_week_number(const Date& d);
[[nodiscard]] bool classify_weekend(const Date& d, const CountryProfile& c);
[[nodiscard]] Season derive_season(const Date& d);
[[nodiscard]] bool in_christmas_window(const Date& d);

[[nodiscard]] DerivedFeatures derive_features(const ArticleRecord& r, const CountryProfile& c);

/// Drops rows without a received date, with no authors, or whose country is not
/// in the table; derives features for the rest. Duplicate ids throw CorpusError.
[[nodiscard]] Corpus clean_corpus(std::span<const CorpusRow> rows, const CountryTable& countries);

[[nodiscard]] std::vector<CorpusRow> to_rows(const Corpus& corpus);

}  // namespace dwe::corpus
