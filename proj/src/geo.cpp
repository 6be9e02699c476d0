#include "dwe/geo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "json.hpp"

#include "dwe/csv.hpp"
#include "dwe/text.hpp"

namespace dwe::geo {

namespace {

using Dnf = std::vector<std::vector<Atom>>;

struct Token {
    enum Kind { word, symbol, end } kind = end;
    std::string text;
};

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char ch = s[i];
        if (std::isspace(static_cast<unsigned char>(ch))) {
            ++i;
        } else if (ch == '(' || ch == ')' || ch == ',' || ch == '=') {
            out.push_back({Token::symbol, std::string(1, ch)});
            ++i;
        } else if (ch == '[') {
            const auto close = s.find(']', i);
            if (close == std::string_view::npos) throw GeoError("unterminated '[' in selection");
            out.push_back({Token::word, to_lower(trim(s.substr(i + 1, close - i - 1)))});
            i = close + 1;
        } else if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Token::word, to_lower(s.substr(i, j - i))});
            i = j;
        } else {
            throw GeoError("unexpected character '" + std::string(1, ch) + "' in selection");
        }
    }
    out.push_back({Token::end, ""});
    return out;
}

std::optional<Field> field_of(const std::string& w) {
    if (w == "weekday" || w == "received_week_day" || w == "day") return Field::weekday;
    if (w == "journal" || w == "idj") return Field::journal;
    return std::nullopt;
}

std::string_view field_name(Field f) { return f == Field::weekday ? "weekday" : "journal"; }

constexpr std::string_view kDayNames[] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

    Dnf parse() {
        if (peek().kind == Token::end) throw GeoError("empty selection");
        Dnf d = expr();
        if (peek().kind != Token::end) throw GeoError("unexpected '" + peek().text + "' in selection");
        return d;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    Token next() { return toks_[pos_++]; }
    bool accept_symbol(char c) {
        if (peek().kind == Token::symbol && peek().text[0] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    bool accept_word(std::string_view w) {
        if (peek().kind == Token::word && peek().text == w) {
            ++pos_;
            return true;
        }
        return false;
    }

    Dnf expr() {
        Dnf d = term();
        while (accept_word("or")) {
            Dnf r = term();
            d.insert(d.end(), r.begin(), r.end());
        }
        return d;
    }

    Dnf term() {
        Dnf d = factor();
        while (accept_word("and")) {
            const Dnf r = factor();
            Dnf out;
            for (const auto& a : d)
                for (const auto& b : r) {
                    auto c = a;
                    c.insert(c.end(), b.begin(), b.end());
                    out.push_back(std::move(c));
                }
            d = std::move(out);
        }
        return d;
    }

    Dnf factor() {
        if (accept_symbol('(')) {
            Dnf d = expr();
            if (!accept_symbol(')')) throw GeoError("missing ')' in selection");
            return d;
        }
        return {{atom()}};
    }

    Atom atom() {
        Atom a;
        if (peek().kind == Token::word && field_of(peek().text)) {
            a.field = *field_of(next().text);
            last_ = a.field;
        } else if (last_) {
            a.field = *last_;
        } else {
            throw GeoError("selection atom needs a field (weekday or journal), got '" + peek().text + "'");
        }
        if (accept_symbol('=')) {
            a.values.push_back(value(a.field));
        } else if (accept_word("in")) {
            a.values.push_back(value(a.field));
            while (accept_symbol(',')) a.values.push_back(value(a.field));
        } else {
            throw GeoError("expected '=' or 'in' after " + std::string(field_name(a.field)));
        }
        std::sort(a.values.begin(), a.values.end());
        a.values.erase(std::unique(a.values.begin(), a.values.end()), a.values.end());
        return a;
    }

    int value(Field f) {
        const Token t = next();
        if (t.kind != Token::word) throw GeoError("expected a value in selection, got '" + t.text + "'");
        if (f == Field::weekday) {
            for (int k = 0; k < 7; ++k)
                if (t.text == kDayNames[k]) return k + 1;
        }
        long long v = 0;
        try {
            v = parse_int(t.text);
        } catch (const std::exception&) {
            throw GeoError("bad value '" + t.text + "' for " + std::string(field_name(f)));
        }
        if (f == Field::weekday && (v < 1 || v > 7))
            throw GeoError("weekday must be 1 (Monday) .. 7 (Sunday), got " + t.text);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            throw GeoError("value out of range: " + t.text);
        return static_cast<int>(v);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::optional<Field> last_;
};

}  // namespace

SelectionExpr SelectionExpr::parse(std::string_view text) {
    SelectionExpr e;
    e.clauses_ = Parser(text).parse();
    return e;
}

bool SelectionExpr::matches(int weekday, int journal) const {
    for (const auto& clause : clauses_) {
        bool all = true;
        for (const auto& a : clause) {
            const int v = a.field == Field::weekday ? weekday : journal;
            if (!std::binary_search(a.values.begin(), a.values.end(), v)) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

std::string SelectionExpr::text() const {
    std::string out;
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
        if (i) out += " or ";
        for (std::size_t j = 0; j < clauses_[i].size(); ++j) {
            const auto& a = clauses_[i][j];
            if (j) out += " and ";
            out += field_name(a.field);
            if (a.values.size() == 1) {
                out += " = " + std::to_string(a.values[0]);
            } else {
                out += " in ";
                for (std::size_t k = 0; k < a.values.size(); ++k) {
                    if (k) out += ",";
                    out += std::to_string(a.values[k]);
                }
            }
        }
    }
    return out;
}

LqResult localization_quotient(std::span<const corpus::Article> articles, const SelectionExpr& sel, Execution ex) {
    std::map<std::string, std::vector<std::size_t>> by_country;
    for (std::size_t i = 0; i < articles.size(); ++i) by_country[articles[i].record.country].push_back(i);
    LqResult r;
    r.entries.resize(by_country.size());
    std::vector<const std::vector<std::size_t>*> lists;
    std::size_t slot = 0;
    for (const auto& [iso, idx] : by_country) {
        r.entries[slot++].country = iso;
        lists.push_back(&idx);
    }
    for_each_index(lists.size(), ex, [&](std::size_t c) {
        auto& e = r.entries[c];
        for (std::size_t i : *lists[c]) {
            ++e.total;
            if (sel.matches(articles[i])) ++e.selected;
        }
    });
    for (const auto& e : r.entries) {
        r.selected_world += e.selected;
        r.total_world += e.total;
    }
    if (r.selected_world == 0) throw GeoError("no record matches the selection '" + sel.text() + "'");
    r.world_share = static_cast<double>(r.selected_world) / static_cast<double>(r.total_world) * 100.0;
    for (auto& e : r.entries) {
        e.share = e.selected == 0 ? 0.0 : static_cast<double>(e.selected) / static_cast<double>(e.total) * 100.0;
        e.lq = e.share / r.world_share * 100.0;
    }
    return r;
}

int ClassBreaks::classify(double v) const {
    for (std::size_t i = 0; i < boundaries.size(); ++i)
        if (v <= boundaries[i]) return static_cast<int>(i);
    return k - 1;
}

ClassBreaks jenks_breaks(std::span<const double> values, int k) {
    if (values.empty()) throw GeoError("natural breaks need at least one value");
    if (k < 1) throw GeoError("class count must be at least 1");
    for (double v : values)
        if (!std::isfinite(v)) throw GeoError("natural breaks need finite values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> v;     // distinct values
    std::vector<long double> w;  // multiplicities
    for (double x : sorted) {
        if (v.empty() || x != v.back()) {
            v.push_back(x);
            w.push_back(1.0L);
        } else {
            w.back() += 1.0L;
        }
    }
    const auto m = v.size();
    const auto K = static_cast<std::size_t>(k);
    if (K > m)
        throw GeoError(std::to_string(k) + " classes requested but only " + std::to_string(m) + " distinct values");

    // Weighted prefix sums around a shift for stability.
    const long double shift = v[m / 2];
    std::vector<long double> sw(m + 1, 0), s1(m + 1, 0), s2(m + 1, 0);
    for (std::size_t i = 0; i < m; ++i) {
        const long double d = v[i] - shift;
        sw[i + 1] = sw[i] + w[i];
        s1[i + 1] = s1[i] + w[i] * d;
        s2[i + 1] = s2[i] + w[i] * d * d;
    }
    auto cost = [&](std::size_t a, std::size_t b) {  // distinct values a..b inclusive
        const long double n = sw[b + 1] - sw[a];
        const long double s = s1[b + 1] - s1[a];
        const long double c = (s2[b + 1] - s2[a]) - s * s / n;
        return c > 0 ? c : 0.0L;
    };

    // best[r][i]: minimal cost of splitting values i..m-1 into r classes.
    const long double inf = std::numeric_limits<long double>::infinity();
    std::vector<std::vector<long double>> best(K + 1, std::vector<long double>(m + 1, inf));
    best[0][m] = 0;
    for (std::size_t r = 1; r <= K; ++r)
        for (std::size_t i = 0; i + r <= m; ++i) {
            long double b = inf;
            for (std::size_t e = i; e + r <= m; ++e) {
                const long double rest = best[r - 1][e + 1];
                if (rest == inf) continue;
                b = std::min(b, cost(i, e) + rest);
            }
            best[r][i] = b;
        }

    ClassBreaks out;
    out.k = k;
    const long double scale = std::max<long double>(1.0L, best[1][0]);
    std::size_t i = 0;
    for (std::size_t r = K; r > 1; --r) {
        const long double target = best[r][i];
        std::size_t chosen = m;
        for (std::size_t e = i; e + r <= m; ++e) {
            const long double rest = best[r - 1][e + 1];
            if (rest == inf) continue;
            if (cost(i, e) + rest <= target + 1e-12L * scale) {
                chosen = e;
                break;
            }
        }
        out.boundaries.push_back(v[chosen]);
        i = chosen + 1;
    }
    return out;
}

double within_class_ss(std::span<const double> values, const ClassBreaks& breaks) {
    std::vector<long double> sum(static_cast<std::size_t>(breaks.k), 0), sq(sum), n(sum);
    for (double x : values) {
        const auto c = static_cast<std::size_t>(breaks.classify(x));
        sum[c] += x;
        sq[c] += static_cast<long double>(x) * x;
        n[c] += 1;
    }
    long double total = 0;
    for (std::size_t c = 0; c < sum.size(); ++c)
        if (n[c] > 0) total += sq[c] - sum[c] * sum[c] / n[c];
    return static_cast<double>(std::max<long double>(total, 0));
}

std::vector<ChoroplethRow> choropleth_rows(const LqResult& lq, const ClassBreaks& breaks,
                                           std::span<const std::string> universe) {
    std::map<std::string, ChoroplethRow> rows;
    for (const auto& iso : universe) rows[iso].country = iso;
    for (const auto& e : lq.entries) {
        auto& r = rows[e.country];
        r.country = e.country;
        r.lq = e.lq;
        r.class_index = breaks.classify(e.lq);
        r.selected = e.selected;
        r.total = e.total;
    }
    std::vector<ChoroplethRow> out;
    for (auto& [iso, r] : rows) out.push_back(std::move(r));
    return out;
}

void write_choropleth_csv(std::ostream& os, std::span<const ChoroplethRow> rows) {
    csv::write_row(os, kChoroplethColumns);
    for (const auto& r : rows)
        csv::write_row(os, {r.country, r.lq ? format_double(*r.lq) : "",
                            r.class_index ? std::to_string(*r.class_index) : "", std::to_string(r.selected),
                            std::to_string(r.total)});
}

namespace {

nlohmann::ordered_json row_properties(const ChoroplethRow& r) {
    nlohmann::ordered_json p;
    p["iso"] = r.country;
    p["lq"] = r.lq ? nlohmann::ordered_json(*r.lq) : nlohmann::ordered_json(nullptr);
    p["class_index"] = r.class_index ? nlohmann::ordered_json(*r.class_index) : nlohmann::ordered_json(nullptr);
    p["selected"] = r.selected;
    p["total"] = r.total;
    return p;
}

std::optional<std::string> feature_iso(const nlohmann::ordered_json& feature) {
    if (!feature.contains("properties") || !feature["properties"].is_object()) return std::nullopt;
    const auto& props = feature["properties"];
    for (const char* key : {"iso", "ISO2", "iso_a2", "ISO_A2"})
        if (props.contains(key) && props[key].is_string()) return props[key].get<std::string>();
    return std::nullopt;
}

}  // namespace

GeoJsonExport choropleth_geojson(std::span<const ChoroplethRow> rows, const ClassBreaks& breaks,
                                 std::optional<std::string_view> geometry) {
    nlohmann::ordered_json fc;
    fc["type"] = "FeatureCollection";
    fc["breaks"] = breaks.boundaries;
    fc["features"] = nlohmann::ordered_json::array();
    GeoJsonExport out;
    if (!geometry) {
        for (const auto& r : rows) {
            nlohmann::ordered_json f;
            f["type"] = "Feature";
            f["geometry"] = nullptr;
            f["properties"] = row_properties(r);
            fc["features"].push_back(std::move(f));
        }
    } else {
        nlohmann::ordered_json g;
        try {
            g = nlohmann::ordered_json::parse(*geometry);
        } catch (const nlohmann::json::exception& e) {
            throw GeoError(std::string("geometry is not valid JSON: ") + e.what());
        }
        if (!g.is_object() || g.value("type", "") != "FeatureCollection" || !g.contains("features") ||
            !g["features"].is_array())
            throw GeoError("geometry must be a GeoJSON FeatureCollection");
        std::map<std::string, const ChoroplethRow*> by_iso;
        for (const auto& r : rows) by_iso[r.country] = &r;
        std::set<std::string> joined;
        for (auto f : g["features"]) {
            const auto iso = feature_iso(f);
            ChoroplethRow blank;
            const ChoroplethRow* r = nullptr;
            if (iso) {
                auto it = by_iso.find(*iso);
                if (it != by_iso.end()) {
                    r = it->second;
                    joined.insert(*iso);
                }
            }
            if (!r) {
                blank.country = iso.value_or("");
                r = &blank;
            }
            auto props = f.contains("properties") && f["properties"].is_object() ? f["properties"]
                                                                                  : nlohmann::ordered_json::object();
            const auto joined_props = row_properties(*r);
            for (const auto& [key, val] : joined_props.items())
                if (key != "iso" || !props.contains("iso")) props[key] = val;
            f["properties"] = std::move(props);
            fc["features"].push_back(std::move(f));
        }
        for (const auto& r : rows)
            if (!joined.contains(r.country)) out.skipped_countries.push_back(r.country);
    }
    fc["skipped_countries"] = out.skipped_countries;
    out.text = fc.dump(1) + "\n";
    return out;
}

}  // namespace dwe::geo
