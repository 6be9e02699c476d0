#include "dwe/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace dwe::csv {

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw CsvError("missing CSV column '" + std::string(name) + "'");
}

Table parse(std::string_view text) {
    Table table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool at_line_start = true;
    bool skipping_comment = false;
    bool have_row = false;
    std::size_t line = 1;

    auto finish_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        if (table.header.empty())
            table.header = std::move(row);
        else
            table.rows.push_back(std::move(row));
        row.clear();
        have_row = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (skipping_comment) {
            if (c == '\n') {
                skipping_comment = false;
                at_line_start = true;
                ++line;
            }
            continue;
        }
        if (at_line_start && !in_quotes) {
            if (c == '\r') continue;
            if (c == '\n') {
                ++line;  // blank line
                continue;
            }
            at_line_start = false;
            if (c == '#') {
                skipping_comment = true;
                continue;
            }
        }
        have_row = true;
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty())
                    throw CsvError("stray quote in CSV field at line " + std::to_string(line));
                in_quotes = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                break;
            case '\r':
                break;
            case '\n':
                finish_row();
                at_line_start = true;
                ++line;
                break;
            default:
                field.push_back(c);
        }
    }
    if (in_quotes) throw CsvError("unterminated quoted CSV field");
    if (have_row) finish_row();

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != table.header.size())
            throw CsvError("CSV row " + std::to_string(r + 1) + " has " +
                           std::to_string(table.rows[r].size()) + " fields, header has " +
                           std::to_string(table.header.size()));
    }
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos &&
        !(field.size() > 0 && field.front() == '#'))
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << escape(fields[i]);
    }
    os << '\n';
}

void require_header(const Table& t, const std::vector<std::string>& expected, std::string_view what) {
    if (t.header != expected) {
        std::string want;
        for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
        throw CsvError(std::string(what) + ": expected header '" + want + "'");
    }
}

}  // namespace dwe::csv
