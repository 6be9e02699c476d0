#include "dwe/harvest.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dwe/text.hpp"
#include "dwe/xml.hpp"

namespace dwe::harvest {

JournalStyle parse_style(std::string_view name) {
    const auto n = to_lower(trim(name));
    if (n == "plos-like" || n == "plos") return JournalStyle::plos_like;
    if (n == "physica-like" || n == "physica") return JournalStyle::physica_like;
    if (n == "nature-like" || n == "nature") return JournalStyle::nature_like;
    throw HarvestError("unknown journal style '" + std::string(name) + "'");
}

std::string_view style_name(JournalStyle style) {
    switch (style) {
        case JournalStyle::plos_like: return "plos-like";
        case JournalStyle::physica_like: return "physica-like";
        case JournalStyle::nature_like: return "nature-like";
    }
    return "?";
}

std::string country_from_address(std::string_view address) {
    const auto comma = address.rfind(',');
    const auto last = comma == std::string_view::npos ? address : address.substr(comma + 1);
    return std::string(trim(last));
}

// ---------------------------------------------------------------------------
// JATS

namespace {

std::string collapse_ws(std::string_view s) {
    std::string out;
    bool pending = false;
    for (char c : trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending = true;
            continue;
        }
        if (pending && !out.empty()) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

std::string child_text(const xml::Element& e, std::string_view tag) {
    const auto* c = e.first(tag);
    return c ? std::string(trim(c->text_content())) : std::string{};
}

Date jats_date(const xml::Element& e, std::string_view what) {
    const auto day = child_text(e, "day");
    const auto month = child_text(e, "month");
    const auto year = child_text(e, "year");
    if (day.empty() || month.empty() || year.empty())
        throw HarvestError(std::string(what) + " date lacks day, month or year");
    try {
        return Date(static_cast<int>(parse_int(year)), static_cast<unsigned>(parse_int(month)),
                    static_cast<unsigned>(parse_int(day)));
    } catch (const std::exception& ex) {
        throw HarvestError(std::string(what) + " date: " + ex.what());
    }
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace

RawArticleMetadata parse_jats_article(std::string_view xml_text) {
    // Anything before the XML declaration is transport debris.
    std::size_t skipped = 0;
    if (const auto decl = xml_text.find("<?xml"); decl != std::string_view::npos && decl > 0) {
        skipped = decl;
        xml_text.remove_prefix(decl);
    }
    const auto root = xml::parse(xml_text, skipped);

    if (const auto* subject = root.first("subject")) {
        const auto s = collapse_ws(subject->text_content());
        if (to_lower(s) != "research article") throw RejectedRecord(s);
    }

    RawArticleMetadata meta;
    if (const auto* t = root.first("article-title")) meta.title = collapse_ws(t->text_content());

    for (const auto* d : root.descendants("date")) {
        const auto type = d->attribute("date-type");
        if (type == "received") meta.received = jats_date(*d, "received");
        else if (type == "accepted") meta.accepted = jats_date(*d, "accepted");
    }
    for (const auto* d : root.descendants("pub-date")) {
        if (d->attribute("pub-type") == "epub" || d->attribute("publication-format") == "electronic")
            meta.published = jats_date(*d, "published");
    }
    for (const auto* id : root.descendants("article-id")) {
        if (id->attribute("pub-id-type") == "doi") meta.doi = std::string(trim(id->text_content()));
    }
    if (const auto* pc = root.first("page-count")) {
        try {
            meta.page_count = static_cast<int>(std::max(0LL, parse_int(pc->attribute("count"))));
        } catch (const std::invalid_argument&) {
            meta.page_count = 0;
        }
    }

    std::vector<std::pair<std::string, RawAffiliation>> affs;
    for (const auto* a : root.descendants("aff")) {
        RawAffiliation aff;
        aff.id = a->attribute("id");
        aff.order = child_text(*a, "label");
        if (const auto* line = a->first("addr-line")) {
            aff.address = collapse_ws(line->text_content());
            aff.country_raw = country_from_address(aff.address);
        } else if (const auto* country = a->first("country")) {
            aff.country_raw = collapse_ws(country->text_content());
            aff.address = collapse_ws(a->text_content());
        }
        affs.emplace_back(aff.id, std::move(aff));
    }
    std::vector<std::pair<std::string, std::string>> emails;
    for (const auto* c : root.descendants("corresp")) emails.emplace_back(c->attribute("id"), child_text(*c, "email"));

    auto lookup_aff = [&](std::string_view rid) -> const RawAffiliation* {
        for (const auto& [id, aff] : affs)
            if (id == rid) return &aff;
        return nullptr;
    };
    auto lookup_email = [&](std::string_view rid) -> const std::string* {
        for (const auto& [id, email] : emails)
            if (id == rid) return &email;
        return nullptr;
    };

    for (const auto* c : root.descendants("contrib")) {
        if (c->attribute("contrib-type") != "author") continue;
        const auto* surname = c->first("surname");
        if (!surname) continue;
        RawAuthor author;
        author.surname = collapse_ws(surname->text_content());
        author.given_names = collapse_ws(child_text(*c, "given-names"));
        author.email = child_text(*c, "email");
        for (const auto* x : c->descendants("xref")) {
            for (const auto& rid : split_ws(x->attribute("rid"))) {
                if (const auto* aff = lookup_aff(rid)) author.affiliations.push_back(*aff);
                if (const auto* email = lookup_email(rid); email && author.email.empty()) author.email = *email;
            }
        }
        meta.authors.push_back(std::move(author));
    }

    if (meta.received && meta.accepted && *meta.accepted < *meta.received)
        throw HarvestError("accepted date " + meta.accepted->iso() + " precedes received date " +
                           meta.received->iso());
    return meta;
}

// ---------------------------------------------------------------------------
// history strings

namespace {

enum class Slot { received, revised, online };

struct Keyword {
    std::string_view text;
    Slot slot;
    int rank;  // lower wins when two keywords fill the same slot
};

// Longest first so that "received in revised form" is not read as "received".
constexpr Keyword kKeywords[] = {
    {"received in revised form", Slot::revised, 0},
    {"available online", Slot::online, 0},
    {"published online", Slot::online, 0},
    {"received", Slot::received, 0},
    {"revised", Slot::revised, 0},
    {"accepted", Slot::revised, 1},
    {"published", Slot::online, 1},
    {"online", Slot::online, 0},
};

bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u >= 0x80;
}

struct Hit {
    std::size_t begin;
    std::size_t end;
    const Keyword* kw;
};

std::vector<Hit> find_keywords(const std::string& lower) {
    std::vector<Hit> hits;
    std::size_t i = 0;
    while (i < lower.size()) {
        const bool boundary_before = i == 0 || !is_word_char(lower[i - 1]);
        const Keyword* found = nullptr;
        if (boundary_before) {
            for (const auto& kw : kKeywords) {
                if (lower.compare(i, kw.text.size(), kw.text) != 0) continue;
                const auto after = i + kw.text.size();
                if (after < lower.size() && is_word_char(lower[after])) continue;
                found = &kw;
                break;
            }
        }
        if (found) {
            hits.push_back({i, i + found->text.size(), found});
            i += found->text.size();
        } else {
            ++i;
        }
    }
    return hits;
}

// Word / number tokens; punctuation other than '-' separates.
struct Token {
    std::string text;
    bool numeric;
};

std::vector<Token> date_tokens(std::string_view s) {
    std::vector<Token> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        const bool num = std::all_of(cur.begin(), cur.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        out.push_back({cur, num});
        cur.clear();
    };
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') cur.push_back(c);
        else flush();
    }
    flush();
    return out;
}

std::optional<Date> make_date(long long y, long long m, long long d) {
    if (y < 1000 || y > 9999 || m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    if (!is_valid_date(static_cast<int>(y), static_cast<unsigned>(m), static_cast<unsigned>(d))) return std::nullopt;
    return Date(static_cast<int>(y), static_cast<unsigned>(m), static_cast<unsigned>(d));
}

long long to_num(const Token& t) { return t.numeric && t.text.size() <= 9 ? std::stoll(t.text) : -1; }

// "August 7, 2006"
std::optional<Date> month_day_year(const std::vector<Token>& t) {
    if (t.size() < 3 || t[0].numeric || !t[1].numeric || !t[2].numeric) return std::nullopt;
    const auto m = month_from_name(t[0].text);
    if (m == 0) return std::nullopt;
    return make_date(to_num(t[2]), m, to_num(t[1]));
}

// "9 December 2005"
std::optional<Date> day_month_year(const std::vector<Token>& t) {
    if (t.size() < 3 || !t[0].numeric || t[1].numeric || !t[2].numeric) return std::nullopt;
    const auto m = month_from_name(t[1].text);
    if (m == 0) return std::nullopt;
    return make_date(to_num(t[2]), m, to_num(t[0]));
}

// "2015-03-12"
std::optional<Date> year_month_day(const std::vector<Token>& t) {
    if (t.empty()) return std::nullopt;
    const auto parts = split(t[0].text, '-');
    if (parts.size() != 3 || parts[0].size() != 4) return std::nullopt;
    try {
        return make_date(parse_int(parts[0]), parse_int(parts[1]), parse_int(parts[2]));
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

std::optional<Date> read_date(std::string_view segment, JournalStyle style) {
    const auto tokens = date_tokens(segment);
    using Reader = std::optional<Date> (*)(const std::vector<Token>&);
    Reader order[3];
    switch (style) {
        case JournalStyle::plos_like: order[0] = month_day_year; order[1] = day_month_year; order[2] = year_month_day; break;
        case JournalStyle::physica_like: order[0] = day_month_year; order[1] = month_day_year; order[2] = year_month_day; break;
        case JournalStyle::nature_like: order[0] = year_month_day; order[1] = day_month_year; order[2] = month_day_year; break;
    }
    for (auto* r : order)
        if (auto d = r(tokens)) return d;
    return std::nullopt;
}

}  // namespace

HistoryDates parse_history_string(std::string_view text, JournalStyle style) {
    HistoryDates out;
    const auto lower = to_lower(text);
    const auto hits = find_keywords(lower);
    int rank[3] = {99, 99, 99};
    for (std::size_t h = 0; h < hits.size(); ++h) {
        const auto begin = hits[h].end;
        const auto end = h + 1 < hits.size() ? hits[h + 1].begin : text.size();
        const auto segment = text.substr(begin, end - begin);
        const auto* kw = hits[h].kw;
        const auto slot = static_cast<int>(kw->slot);
        auto date = read_date(segment, style);
        if (!date)
            throw HistoryFieldError(std::string(kw->text), "unreadable date text '" + std::string(trim(segment)) + "'");
        if (kw->rank >= rank[slot]) continue;
        rank[slot] = kw->rank;
        switch (kw->slot) {
            case Slot::received: out.received = date; break;
            case Slot::revised: out.revised = date; break;
            case Slot::online: out.online = date; break;
        }
    }
    return out;
}

PageRange extract_pages(std::string_view pages_text) {
    auto lower = to_lower(pages_text);
    if (lower.find("pages") == std::string::npos) return {};
    std::string rest;
    for (std::size_t i = 0; i < lower.size();) {
        if (lower.compare(i, 5, "pages") == 0) {
            i += 5;
        } else {
            rest.push_back(lower[i++]);
        }
    }
    const auto parts = split(trim(rest), '-');
    if (parts.size() != 2) return {};
    try {
        const auto a = parse_int(parts[0]);
        const auto b = parse_int(parts[1]);
        if (a < 0 || b < 0 || a > 1'000'000'000 || b > 1'000'000'000) return {};
        return {static_cast<int>(a), static_cast<int>(b)};
    } catch (const std::invalid_argument&) {
        return {};
    }
}

// ---------------------------------------------------------------------------
// country names

CountryNameTable::CountryNameTable(std::vector<std::pair<std::string, std::string>> names) {
    for (auto& [name, iso] : names) entries_.push_back({to_lower(trim(name)), std::move(iso)});
    sort_entries();
}

void CountryNameTable::add(std::string name, std::string iso) {
    entries_.push_back({to_lower(trim(name)), std::move(iso)});
    sort_entries();
}

void CountryNameTable::sort_entries() {
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        if (a.name_lower.size() != b.name_lower.size()) return a.name_lower.size() > b.name_lower.size();
        if (a.name_lower != b.name_lower) return a.name_lower < b.name_lower;
        return a.iso < b.iso;
    });
    entries_.erase(std::unique(entries_.begin(), entries_.end(),
                               [](const Entry& a, const Entry& b) {
                                   return a.name_lower == b.name_lower && a.iso == b.iso;
                               }),
                   entries_.end());
}

std::optional<std::string> CountryNameTable::match(std::string_view text) const {
    auto hay = to_lower(text);
    std::set<std::string> certain;
    std::vector<std::set<std::string>> ambiguous;

    std::size_t i = 0;
    while (i < entries_.size()) {
        // Names listed under several codes (e.g. Georgia) form one group.
        std::size_t j = i;
        std::set<std::string> codes;
        while (j < entries_.size() && entries_[j].name_lower == entries_[i].name_lower) codes.insert(entries_[j++].iso);
        const auto& name = entries_[i].name_lower;
        i = j;
        if (name.empty()) continue;
        for (auto pos = hay.find(name); pos != std::string::npos; pos = hay.find(name, pos + 1)) {
            const auto end = pos + name.size();
            const bool before_ok = pos == 0 || !is_word_char(hay[pos - 1]) || !is_word_char(name.front());
            const bool after_ok = end >= hay.size() || !is_word_char(hay[end]) || !is_word_char(name.back());
            if (!before_ok || !after_ok) continue;
            if (codes.size() == 1) certain.insert(*codes.begin());
            else ambiguous.push_back(codes);
            std::fill(hay.begin() + static_cast<std::ptrdiff_t>(pos), hay.begin() + static_cast<std::ptrdiff_t>(end), '|');
        }
    }
    if (certain.size() != 1) return std::nullopt;
    const auto& iso = *certain.begin();
    for (const auto& group : ambiguous)
        if (!group.contains(iso)) return std::nullopt;
    return iso;
}

std::optional<std::string> normalize_country(std::string_view country_raw, const CountryNameTable& lookup) {
    return lookup.match(country_raw);
}

// ---------------------------------------------------------------------------
// saved pages and projection

RawArticleMetadata parse_saved_page(std::string_view text, JournalStyle style) {
    RawArticleMetadata meta;
    bool have_history = false;
    for (const auto& raw : split(text, '\n')) {
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        const auto key = to_lower(trim(line.substr(0, colon)));
        const auto value = trim(line.substr(colon + 1));
        if (key == "title") {
            meta.title = std::string(value);
        } else if (key == "doi") {
            meta.doi = std::string(value);
        } else if (key == "history") {
            if (have_history) throw HarvestError("more than one history line");
            have_history = true;
            const auto h = parse_history_string(value, style);
            meta.received = h.received;
            meta.accepted = h.revised;
            meta.published = h.online;
        } else if (key == "pages") {
            meta.page_count = extract_pages(value).length();
        } else if (key == "author") {
            const auto f = split(value, '|');
            if (f.size() != 4) throw HarvestError("author line needs 4 '|'-separated fields");
            RawAuthor a;
            a.surname = std::string(trim(f[0]));
            a.given_names = std::string(trim(f[1]));
            a.email = std::string(trim(f[2]));
            RawAffiliation aff;
            aff.id = "aff" + std::to_string(meta.authors.size() + 1);
            aff.address = std::string(trim(f[3]));
            aff.country_raw = country_from_address(aff.address);
            if (!aff.address.empty()) a.affiliations.push_back(std::move(aff));
            meta.authors.push_back(std::move(a));
        }
    }
    if (meta.received && meta.accepted && *meta.accepted < *meta.received)
        throw HarvestError("accepted date precedes received date");
    return meta;
}

std::string resolve_article_country(const RawArticleMetadata& meta, const CountryNameTable& lookup) {
    auto unique_code = [&](bool corresponding_only) -> std::optional<std::string> {
        std::set<std::string> codes;
        for (const auto& a : meta.authors) {
            if (corresponding_only && !a.is_corresponding()) continue;
            for (const auto& aff : a.affiliations)
                if (auto iso = normalize_country(aff.country_raw, lookup)) codes.insert(*iso);
        }
        if (codes.size() == 1) return *codes.begin();
        return std::nullopt;
    };
    bool has_corresponding = false;
    for (const auto& a : meta.authors) has_corresponding = has_corresponding || (a.is_corresponding() && !a.affiliations.empty());
    if (has_corresponding) return unique_code(true).value_or("");
    return unique_code(false).value_or("");
}

corpus::CorpusRow to_corpus_row(const RawArticleMetadata& meta, long long id, int journal,
                                const CountryNameTable& lookup) {
    corpus::CorpusRow row;
    row.id = id;
    row.journal = journal;
    row.received = meta.received;
    row.revised = meta.accepted;
    row.online = meta.published;
    row.author_count = static_cast<int>(meta.authors.size());
    row.page_count = meta.page_count;
    row.country = resolve_article_country(meta, lookup);
    return row;
}

HarvestReport harvest_directory(const std::string& dir, JournalStyle style, int journal,
                                const CountryNameTable& lookup) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw HarvestError("not a directory: '" + dir + "'");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = to_lower(entry.path().extension().string());
        if (ext == ".xml" || ext == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    HarvestReport report;
    long long next_id = 1;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        const auto name = path.filename().string();
        try {
            const auto meta = to_lower(path.extension().string()) == ".xml" ? parse_jats_article(ss.str())
                                                                            : parse_saved_page(ss.str(), style);
            report.rows.push_back(to_corpus_row(meta, next_id++, journal, lookup));
        } catch (const std::exception& e) {
            report.rejected.emplace_back(name, e.what());
        }
    }
    return report;
}

}  // namespace dwe::harvest
