#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dwe/corpus.hpp"
#include "dwe/date.hpp"

// Offline parsers turning saved journal metadata into raw article records.
namespace dwe::harvest {

enum class JournalStyle { plos_like, physica_like, nature_like };

[[nodiscard]] JournalStyle parse_style(std::string_view name);
[[nodiscard]] std::string_view style_name(JournalStyle style);

struct RawAffiliation {
    std::string id;
    std::string address;
    std::string country_raw;
    std::string order;

    friend bool operator==(const RawAffiliation&, const RawAffiliation&) = default;
};

struct RawAuthor {
    std::string surname;
    std::string given_names;
    std::string email;
    std::vector<RawAffiliation> affiliations;

    [[nodiscard]] bool is_corresponding() const { return !email.empty(); }

    friend bool operator==(const RawAuthor&, const RawAuthor&) = default;
};

struct RawArticleMetadata {
    std::string title;
    std::string doi;
    std::optional<Date> received;
    std::optional<Date> accepted;
    std::optional<Date> published;
    int page_count = 0;  // 0 = unavailable
    std::vector<RawAuthor> authors;

    friend bool operator==(const RawArticleMetadata&, const RawArticleMetadata&) = default;
};

struct HarvestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The document is not a research article (editorial, erratum, ...).
class RejectedRecord : public HarvestError {
public:
    explicit RejectedRecord(std::string subject)
        : HarvestError("not a research article (subject '" + subject + "')"), subject_(std::move(subject)) {}
    [[nodiscard]] const std::string& subject() const { return subject_; }

private:
    std::string subject_;
};

/// A history keyword was found but the date following it could not be read.
class HistoryFieldError : public HarvestError {
public:
    HistoryFieldError(std::string keyword, const std::string& detail)
        : HarvestError("cannot read date after '" + keyword + "': " + detail), keyword_(std::move(keyword)) {}
    [[nodiscard]] const std::string& keyword() const { return keyword_; }

private:
    std::string keyword_;
};

/// Parses a JATS article. Bytes before the XML declaration are discarded first.
/// Throws xml::XmlError (with byte offset), RejectedRecord or HarvestError.
[[nodiscard]] RawArticleMetadata parse_jats_article(std::string_view xml_text);

/// Last comma-separated segment of an address line, trimmed.
[[nodiscard]] std::string country_from_address(std::string_view address);

struct HistoryDates {
    std::optional<Date> received;
    std::optional<Date> revised;
    std::optional<Date> online;

    friend bool operator==(const HistoryDates&, const HistoryDates&) = default;
};

/// Reads the received / revised-or-accepted / online-or-published dates from a
/// free-text history line. Missing keywords give absent dates; a keyword whose
/// date cannot be read throws HistoryFieldError. Never fails otherwise.
[[nodiscard]] HistoryDates parse_history_string(std::string_view text, JournalStyle style);

struct PageRange {
    int start = 0;
    int end = 0;

    /// end - start + 1 when positive, else 0.
    [[nodiscard]] int length() const { return end >= start && start > 0 ? end - start + 1 : 0; }

    friend bool operator==(const PageRange&, const PageRange&) = default;
};

/// "Pages a-b" (case-insensitive); anything unreadable yields (0, 0).
[[nodiscard]] PageRange extract_pages(std::string_view pages_text);

/// Country display names (and US states) mapped to ISO 3166 alpha-2 codes.
class CountryNameTable {
public:
    CountryNameTable() = default;
    explicit CountryNameTable(std::vector<std::pair<std::string, std::string>> names);

    void add(std::string name, std::string iso);
    [[nodiscard]] std::size_t size() const { return entries_.size(); }

    /// Case-insensitive, word-bounded containment; longest names claim text first.
    /// Returns nullopt when nothing matches or distinct codes remain.
    [[nodiscard]] std::optional<std::string> match(std::string_view text) const;

private:
    struct Entry {
        std::string name_lower;
        std::string iso;
    };
    void sort_entries();

    std::vector<Entry> entries_;
};

/// Built-in English country names, common aliases and US state names.
[[nodiscard]] const CountryNameTable& default_country_names();

[[nodiscard]] std::optional<std::string> normalize_country(std::string_view country_raw,
                                                           const CountryNameTable& lookup);

/// Saved archive page: "key: value" lines (title, doi, history, pages, author).
/// An author line is "surname | given names | email | address".
[[nodiscard]] RawArticleMetadata parse_saved_page(std::string_view text, JournalStyle style);

/// Country of the record: the single ISO code among corresponding authors'
/// affiliations, else among all affiliations; empty when none or several.
[[nodiscard]] std::string resolve_article_country(const RawArticleMetadata& meta,
                                                  const CountryNameTable& lookup);

/// Projection onto the corpus CSV schema.
[[nodiscard]] corpus::CorpusRow to_corpus_row(const RawArticleMetadata& meta, long long id, int journal,
                                              const CountryNameTable& lookup);

struct HarvestReport {
    std::vector<corpus::CorpusRow> rows;
    std::vector<std::pair<std::string, std::string>> rejected;  // file, reason
};

/// Parses every .xml (JATS) and .txt (saved page) file in a directory, sorted by name.
[[nodiscard]] HarvestReport harvest_directory(const std::string& dir, JournalStyle style, int journal,
                                              const CountryNameTable& lookup);

}  // namespace dwe::harvest
