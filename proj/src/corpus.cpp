#include "dwe/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "dwe/csv.hpp"
#include "dwe/text.hpp"

namespace dwe::corpus {

std::string_view season_name(Season s) {
    switch (s) {
        case Season::spring: return "spring";
        case Season::summer: return "summer";
        case Season::fall: return "fall";
        case Season::winter: return "winter";
    }
    return "?";
}

std::string_view continent_name(Continent c) {
    switch (c) {
        case Continent::europe: return "europe";
        case Continent::america: return "america";
        case Continent::africa: return "africa";
        case Continent::asia: return "asia";
        case Continent::oceania: return "oceania";
    }
    return "?";
}

Continent parse_continent(std::string_view name) {
    const auto n = to_lower(trim(name));
    if (n == "europe") return Continent::europe;
    if (n == "america" || n == "americas" || n == "north-america" || n == "south-america")
        return Continent::america;
    if (n == "africa") return Continent::africa;
    if (n == "asia") return Continent::asia;
    if (n == "oceania") return Continent::oceania;
    throw CorpusError("unknown continent '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// corpus.csv

std::vector<CorpusRow> parse_corpus_csv(std::string_view text) {
    const auto table = csv::parse(text);
    csv::require_header(table, kCorpusColumns, "corpus.csv");
    std::vector<CorpusRow> rows;
    rows.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& f = table.rows[i];
        try {
            CorpusRow r;
            r.id = parse_int(f[0]);
            r.journal = static_cast<int>(parse_int(f[1]));
            r.received = parse_optional_iso_date(f[2]);
            r.revised = parse_optional_iso_date(f[3]);
            r.online = parse_optional_iso_date(f[4]);
            r.author_count = static_cast<int>(parse_int(f[5]));
            r.page_count = static_cast<int>(parse_int(f[6]));
            r.country = std::string(trim(f[7]));
            if (r.author_count < 0 || r.page_count < 0) throw CorpusError("negative count");
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw CorpusError("corpus.csv row " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return rows;
}

std::vector<CorpusRow> read_corpus_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_corpus_csv(ss.str());
}

namespace {

std::string opt_date(const std::optional<Date>& d) { return d ? d->iso() : std::string{}; }

}  // namespace

void write_corpus_csv(std::ostream& os, std::span<const CorpusRow> rows) {
    csv::write_row(os, kCorpusColumns);
    for (const auto& r : rows) {
        csv::write_row(os, {std::to_string(r.id), std::to_string(r.journal), opt_date(r.received),
                            opt_date(r.revised), opt_date(r.online), std::to_string(r.author_count),
                            std::to_string(r.page_count), r.country});
    }
}

// ---------------------------------------------------------------------------
// countries.cfg

const std::vector<int>& CountryProfile::weekend_days_on(const Date& d) const {
    const WeekendRule* active = nullptr;
    for (const auto& rule : schedule) {
        if (rule.effective_from <= d) active = &rule;
        else break;
    }
    if (active) return active->days;
    return special_weekend ? kSpecialWeekend : kDefaultWeekend;
}

void CountryTable::add(CountryProfile profile) {
    auto iso = profile.iso;
    if (!profiles_.emplace(iso, std::move(profile)).second)
        throw CorpusError("duplicate country '" + iso + "'");
}

const CountryProfile* CountryTable::find(std::string_view iso) const {
    auto it = profiles_.find(iso);
    return it == profiles_.end() ? nullptr : &it->second;
}

std::vector<std::string> CountryTable::codes() const {
    std::vector<std::string> out;
    out.reserve(profiles_.size());
    for (const auto& [k, v] : profiles_) out.push_back(k);
    return out;
}

namespace {

std::vector<int> parse_days(std::string_view v) {
    std::vector<int> days;
    for (const auto& part : split(v, ',')) {
        const auto d = static_cast<int>(parse_int(part));
        if (d < 1 || d > 7) throw CorpusError("weekday code out of range: " + part);
        days.push_back(d);
    }
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());
    return days;
}

CountryProfile parse_country_line(std::string_view line) {
    std::istringstream tokens{std::string(line)};
    std::string tok;
    CountryProfile p;
    bool have_continent = false, have_hdi = false;
    std::optional<Date> pending_from;
    while (tokens >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw CorpusError("expected key=value, got '" + tok + "'");
        const auto key = tok.substr(0, eq);
        const auto value = std::string_view(tok).substr(eq + 1);
        if (pending_from && key != "days") throw CorpusError("'from=' must be followed by 'days='");
        if (key == "iso") {
            p.iso = std::string(value);
        } else if (key == "continent") {
            p.continent = parse_continent(value);
            have_continent = true;
        } else if (key == "hdi") {
            p.hdi = parse_double(value);
            if (!(p.hdi > 0.0 && p.hdi <= 1.0)) throw CorpusError("hdi must lie in (0, 1]");
            have_hdi = true;
        } else if (key == "lto") {
            if (!value.empty()) {
                const double lto = parse_double(value);
                if (!(lto >= 0.0 && lto <= 100.0)) throw CorpusError("lto must lie in [0, 100]");
                p.lto = lto;
            }
        } else if (key == "swc") {
            const auto v = to_lower(value);
            if (v != "yes" && v != "no") throw CorpusError("swc must be yes or no");
            p.special_weekend = v == "yes";
        } else if (key == "from") {
            pending_from = parse_iso_date(value);
        } else if (key == "days") {
            if (!pending_from) throw CorpusError("'days=' without preceding 'from='");
            if (!p.schedule.empty() && !(p.schedule.back().effective_from < *pending_from))
                throw CorpusError("weekend schedule entries must have increasing 'from' dates");
            p.schedule.push_back({*pending_from, parse_days(value)});
            pending_from.reset();
        } else {
            throw CorpusError("unknown key '" + key + "'");
        }
    }
    if (pending_from) throw CorpusError("'from=' without 'days='");
    if (p.iso.empty()) throw CorpusError("missing iso=");
    if (!have_continent) throw CorpusError("missing continent= for " + p.iso);
    if (!have_hdi) throw CorpusError("missing hdi= for " + p.iso);
    return p;
}

}  // namespace

CountryTable parse_countries_cfg(std::string_view text) {
    CountryTable table;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        try {
            table.add(parse_country_line(line));
        } catch (const std::exception& e) {
            throw CorpusError("countries.cfg line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return table;
}

CountryTable load_countries_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError("cannot open countries file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_countries_cfg(ss.str());
}

// ---------------------------------------------------------------------------
// calendar features

int derive_weekday(const Date& d) { return d.iso_weekday(); }

int derive_week_number(const Date& d) {
    const Date jan1{d.year(), 1, 1};
    const int jan1_offset = jan1.iso_weekday() % 7;  // Sunday = 0
    return (d.day_of_year() - 1 + jan1_offset) / 7 + 1;
}

bool classify_weekend(const Date& d, const CountryProfile& c) {
    const auto& days = c.weekend_days_on(d);
    return std::find(days.begin(), days.end(), derive_weekday(d)) != days.end();
}

Season derive_season(const Date& d) {
    switch (d.month()) {
        case 3: case 4: case 5: return Season::spring;
        case 6: case 7: case 8: return Season::summer;
        case 9: case 10: case 11: return Season::fall;
        default: return Season::winter;
    }
}

bool in_christmas_window(const Date& d) {
    return (d.month() == 12 && d.day() >= 20) || (d.month() == 1 && d.day() <= 10);
}

DerivedFeatures derive_features(const ArticleRecord& r, const CountryProfile& c) {
    DerivedFeatures f;
    f.weekday = derive_weekday(r.received);
    f.week_number = derive_week_number(r.received);
    f.year = r.received.year();
    f.season = derive_season(r.received);
    f.is_weekend = classify_weekend(r.received, c);
    f.is_christmas = in_christmas_window(r.received);
    f.continent = c.continent;
    f.log10_authors = std::log10(static_cast<double>(r.author_count));
    f.log10_hdi = std::log10(c.hdi);
    // log10 undefined at LTO = 0; such countries are treated like missing LTO.
    if (c.lto && *c.lto > 0.0) f.log10_lto = std::log10(*c.lto);
    return f;
}

Corpus clean_corpus(std::span<const CorpusRow> rows, const CountryTable& countries) {
    Corpus out;
    out.countries = countries;
    out.cleaning_report.input = rows.size();

    std::set<long long> seen;
    for (const auto& row : rows) {
        if (!seen.insert(row.id).second)
            throw CorpusError("duplicate article id " + std::to_string(row.id));
    }

    for (const auto& row : rows) {
        if (!row.received) {
            ++out.cleaning_report.dropped[std::string(kDropNoReception)];
            continue;
        }
        const auto* profile = countries.find(row.country);
        if (row.country.empty() || !profile) {
            ++out.cleaning_report.dropped[std::string(kDropUnclearCountry)];
            continue;
        }
        if (row.author_count < 1) {
            ++out.cleaning_report.dropped[std::string(kDropNoAuthors)];
            continue;
        }
        ArticleRecord rec{row.id,         row.journal,    *row.received, row.revised,
                          row.online,     row.author_count, row.page_count, row.country};
        auto features = derive_features(rec, *profile);
        out.records.push_back({std::move(rec), features});
    }
    std::sort(out.records.begin(), out.records.end(),
              [](const Article& a, const Article& b) { return a.record.id < b.record.id; });
    out.cleaning_report.retained = out.records.size();
    return out;
}

std::vector<CorpusRow> to_rows(const Corpus& corpus) {
    std::vector<CorpusRow> rows;
    rows.reserve(corpus.records.size());
    for (const auto& a : corpus.records) {
        const auto& r = a.record;
        rows.push_back({r.id, r.journal, r.received, r.revised, r.online, r.author_count, r.page_count,
                        r.country});
    }
    return rows;
}

}  // namespace dwe::corpus
