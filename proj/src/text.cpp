#include "reefmap/text.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace reefmap::text {

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

std::optional<long long> parse_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    long long v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
    s = trim(s);
    if (s.empty() || s.front() == '-') return std::nullopt;
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

namespace {

std::string non_finite(double v) {
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string shortest(double v) {
    if (!std::isfinite(v)) return non_finite(v);
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), ptr};
}

std::string significant(double v, int digits) {
    if (!std::isfinite(v)) return non_finite(v);
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, digits);
    return {buf.data(), ptr};
}

std::string fixed(double v, int decimals) {
    if (!std::isfinite(v)) return non_finite(v);
    std::array<char, 512> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, decimals);
    std::string out(buf.data(), ptr);
    // "-0.000000" reads badly in reports and breaks digest stability.
    if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto start = s.find_first_not_of(" \t\r", pos);
        if (start == std::string_view::npos) break;
        auto stop = s.find_first_of(" \t\r", start);
        if (stop == std::string_view::npos) stop = s.size();
        out.push_back(s.substr(start, stop - start));
        pos = stop;
    }
    return out;
}

std::vector<std::string_view> split(std::string_view s, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto stop = s.find(delim, start);
        if (stop == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, stop - start));
        start = stop + 1;
    }
}

bool LineReader::next(std::string_view& line) {
    if (rest_.empty()) return false;
    const auto nl = rest_.find('\n');
    const std::size_t consumed = nl == std::string_view::npos ? rest_.size() : nl + 1;
    line = rest_.substr(0, nl == std::string_view::npos ? rest_.size() : nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    rest_.remove_prefix(consumed);
    offset_ += consumed;
    ++line_no_;
    return true;
}

}  // namespace reefmap::text
