#pragma once

// Locale-independent number parsing and formatting. Everything the library
// reads or writes goes through these so a comma-decimal locale never leaks in.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reefmap::text {

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);

// Shortest representation that parses back to the identical double.
std::string shortest(double v);
// printf("%.{digits}g") equivalent.
std::string significant(double v, int digits);
// printf("%.{decimals}f") equivalent.
std::string fixed(double v, int decimals = 6);

std::string_view trim(std::string_view s);
// Splits on runs of spaces/tabs.
std::vector<std::string_view> split_ws(std::string_view s);
// Splits on a single delimiter, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char delim);

// Iterates lines, stripping a trailing '\r'. Line numbers are 1-based.
class LineReader {
public:
    explicit LineReader(std::string_view content) : rest_(content) {}
    bool next(std::string_view& line);
    std::size_t line_number() const { return line_no_; }
    std::size_t offset() const { return offset_; }

private:
    std::string_view rest_;
    std::size_t line_no_ = 0;
    std::size_t offset_ = 0;
};

}  // namespace reefmap::text
