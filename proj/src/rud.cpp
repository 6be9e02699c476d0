#include "dwe/rud.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "dwe/csv.hpp"
#include "dwe/text.hpp"

namespace dwe::rud {

ScopeMode parse_scope_mode(std::string_view text) {
    const auto t = to_lower(trim(text));
    if (t == "journal" || t == "per-journal") return ScopeMode::per_journal;
    if (t == "consolidated" || t == "all") return ScopeMode::consolidated;
    throw RudError("unknown scope '" + std::string(text) + "' (expected journal or consolidated)");
}

std::string scope_label(int scope) { return scope == kConsolidated ? "consolidated" : std::to_string(scope); }

long long WeekGroup::total() const {
    long long n = 0;
    for (auto c : day_counts) n += c;
    return n;
}

double uniform_daily_rate(const WeekGroup& g) {
    const auto n = g.total();
    if (n < 1) throw RudError("empty week group");
    return static_cast<double>(n) / 7.0;
}

double rud_for_day(const WeekGroup& g, int weekday) {
    if (weekday < 1 || weekday > 7) throw RudError("weekday out of range");
    const auto nk = g.day_counts[static_cast<std::size_t>(weekday - 1)];
    if (nk < 1) throw RudError("no articles on that day");
    // 7 n_k / N rather than n_k / (N / 7): exact for uniform weeks.
    return 7.0 * static_cast<double>(nk) / static_cast<double>(g.total());
}

namespace {

using Key = std::tuple<int, int, int>;  // scope, year, week

Key key_for(const corpus::Article& a, ScopeMode mode) {
    const int scope = mode == ScopeMode::consolidated ? kConsolidated : a.record.journal;
    return {scope, a.features.year, a.features.week_number};
}

std::map<Key, WeekGroup> group(const corpus::Corpus& c, ScopeMode mode) {
    std::map<Key, WeekGroup> groups;
    for (const auto& a : c.records) {
        const auto k = key_for(a, mode);
        auto& g = groups[k];
        g.scope = std::get<0>(k);
        g.year = std::get<1>(k);
        g.week_number = std::get<2>(k);
        ++g.day_counts[static_cast<std::size_t>(a.features.weekday - 1)];
    }
    return groups;
}

}  // namespace

std::vector<WeekGroup> week_groups(const corpus::Corpus& c, ScopeMode mode) {
    std::vector<WeekGroup> out;
    for (auto& [k, g] : group(c, mode)) out.push_back(g);
    return out;
}

std::vector<RudObservation> build_rud_dataset(const corpus::Corpus& c, ScopeMode mode) {
    const auto groups = group(c, mode);
    std::vector<RudObservation> out;
    out.reserve(c.records.size());
    for (const auto& a : c.records) {
        const auto& g = groups.at(key_for(a, mode));
        RudObservation o;
        o.article_id = a.record.id;
        o.scope = g.scope;
        o.year = g.year;
        o.week = g.week_number;
        o.weekday = a.features.weekday;
        o.n_k = g.day_counts[static_cast<std::size_t>(o.weekday - 1)];
        o.N = g.total();
        o.rud = rud_for_day(g, o.weekday);
        o.journal = a.record.journal;
        o.country = a.record.country;
        o.received = a.record.received;
        o.features = a.features;
        out.push_back(std::move(o));
    }
    std::sort(out.begin(), out.end(),
              [](const RudObservation& x, const RudObservation& y) { return x.article_id < y.article_id; });
    return out;
}

void write_rud_csv(std::ostream& os, std::span<const RudObservation> obs) {
    csv::write_row(os, kRudColumns);
    for (const auto& o : obs) {
        csv::write_row(os, {std::to_string(o.article_id), scope_label(o.scope), std::to_string(o.year),
                            std::to_string(o.week), std::to_string(o.weekday), std::to_string(o.n_k),
                            std::to_string(o.N), format_double(o.rud)});
    }
}

std::vector<RudObservation> parse_rud_csv(std::string_view text) {
    const auto t = csv::parse(text);
    csv::require_header(t, kRudColumns, "rud.csv");
    std::vector<RudObservation> out;
    out.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& f = t.rows[i];
        try {
            RudObservation o;
            o.article_id = parse_int(f[0]);
            o.scope = trim(f[1]) == "consolidated" ? kConsolidated : static_cast<int>(parse_int(f[1]));
            o.year = static_cast<int>(parse_int(f[2]));
            o.week = static_cast<int>(parse_int(f[3]));
            o.weekday = static_cast<int>(parse_int(f[4]));
            o.n_k = parse_int(f[5]);
            o.N = parse_int(f[6]);
            o.rud = parse_double(f[7]);
            if (!(o.rud > 0.0 && o.rud <= 7.0)) throw RudError("rud outside (0, 7]");
            o.journal = o.scope;
            o.features.weekday = o.weekday;
            o.features.week_number = o.week;
            o.features.year = o.year;
            out.push_back(std::move(o));
        } catch (const std::exception& e) {
            throw RudError("rud.csv row " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::vector<RudObservation> read_rud_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RudError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_rud_csv(ss.str());
}

}  // namespace dwe::rud
