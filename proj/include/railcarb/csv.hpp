#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace railcarb::csv {

struct Row {
    std::size_t line = 0; // 1-based line number in the source file
    std::vector<std::string> fields;
};

// Comma-delimited table with a header line. Blank lines and lines whose first
// non-space character is '#' are skipped. Double-quoted fields may contain
// commas and "" escapes.
class Table {
public:
    static Table read(std::istream& in, const std::string& source_name);
    static Table read_file(const std::string& path);

    const std::string& source() const { return source_; }
    const std::vector<std::string>& header() const { return header_; }
    const std::vector<Row>& rows() const { return rows_; }

    std::optional<std::size_t> column(std::string_view name) const;
    // Throws DataError naming the file when the column is missing.
    std::size_t require_column(std::string_view name) const;

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<Row> rows_;
};

std::vector<std::string> split_line(std::string_view line);

// Numeric field parsing with a DataError that names the row and column.
double parse_double(const Row& row, std::size_t col, std::string_view col_name, const std::string& source);
bool parse_bool(const Row& row, std::size_t col, std::string_view col_name, const std::string& source);
const std::string& field(const Row& row, std::size_t col, std::string_view col_name, const std::string& source);

// Quotes a value if it contains a delimiter, quote, or newline.
std::string escape(std::string_view value);

} // namespace railcarb::csv
