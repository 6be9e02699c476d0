#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dwe::csv {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Header plus rows of raw fields. Lines starting with '#' are report metadata and skipped.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws CsvError if missing.
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

[[nodiscard]] Table parse(std::string_view text);
[[nodiscard]] Table read_file(const std::string& path);

/// Quotes a field only when it contains a separator, quote or newline.
[[nodiscard]] std::string escape(std::string_view field);
void write_row(std::ostream& os, const std::vector<std::string>& fields);

/// Exact header match, in order.
void require_header(const Table& t, const std::vector<std::string>& expected, std::string_view what);

}  // namespace dwe::csv
