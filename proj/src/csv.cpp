#include "railcarb/csv.hpp"

#include "railcarb/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

namespace railcarb::csv {

namespace {

std::string trim(std::string_view s)
{
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string where(const Row& row, std::string_view col_name, const std::string& source)
{
    return source + " line " + std::to_string(row.line) + ", column '" + std::string(col_name) + "'";
}

} // namespace

std::vector<std::string> split_line(std::string_view line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            out.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(was_quoted ? cur : trim(cur));
    return out;
}

Table Table::read(std::istream& in, const std::string& source_name)
{
    Table t;
    t.source_ = source_name;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        auto fields = split_line(line);
        if (!have_header) {
            t.header_ = std::move(fields);
            have_header = true;
            continue;
        }
        t.rows_.push_back(Row{lineno, std::move(fields)});
    }
    if (!have_header) throw DataError(source_name + ": missing header line");
    return t;
}

Table Table::read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read(in, path);
}

std::optional<std::size_t> Table::column(std::string_view name) const
{
    auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header_.begin());
}

std::size_t Table::require_column(std::string_view name) const
{
    if (auto c = column(name)) return *c;
    throw DataError(source_ + ": missing column '" + std::string(name) + "'");
}

const std::string& field(const Row& row, std::size_t col, std::string_view col_name, const std::string& source)
{
    if (col >= row.fields.size()) throw DataError(where(row, col_name, source) + ": field missing");
    return row.fields[col];
}

double parse_double(const Row& row, std::size_t col, std::string_view col_name, const std::string& source)
{
    const std::string& s = field(row, col, col_name, source);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw DataError(where(row, col_name, source) + ": not a number: '" + s + "'");
    return v;
}

bool parse_bool(const Row& row, std::size_t col, std::string_view col_name, const std::string& source)
{
    std::string s = field(row, col, col_name, source);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "1" || s == "true" || s == "yes" || s == "y") return true;
    if (s == "0" || s == "false" || s == "no" || s == "n" || s.empty()) return false;
    throw DataError(where(row, col_name, source) + ": not a boolean: '" + s + "'");
}

std::string escape(std::string_view value)
{
    if (value.find_first_of(",\"\n") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

} // namespace railcarb::csv
