#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <clocale>
#include <cstring>
#include <limits>
#include <random>

#include "reefmap/text.hpp"

using namespace reefmap;

TEST_CASE("parse_double accepts plain, signed and exponent forms") {
    CHECK(text::parse_double("1.5") == 1.5);
    CHECK(text::parse_double("+2") == 2.0);
    CHECK(text::parse_double("-3e-2") == -0.03);
    CHECK(text::parse_double(" 4 ") == 4.0);
    CHECK(text::parse_double("1,5") == std::nullopt);
    CHECK(text::parse_double("") == std::nullopt);
    CHECK(text::parse_double("1.0x") == std::nullopt);
}

TEST_CASE("parse_int and parse_uint reject junk") {
    CHECK(text::parse_int("-12") == -12);
    CHECK(text::parse_uint("12") == 12u);
    CHECK(text::parse_uint("-1") == std::nullopt);
    CHECK(text::parse_uint("1.0") == std::nullopt);
}

TEST_CASE("shortest round-trips random doubles") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 5000; ++k) {
        std::uint64_t bits = rng();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        if (!std::isfinite(v)) continue;
        CHECK(text::parse_double(text::shortest(v)) == v);
    }
    CHECK(text::shortest(0.1) == "0.1");
    CHECK(text::shortest(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("fixed formats six decimals without negative zero") {
    CHECK(text::fixed(1.0) == "1.000000");
    CHECK(text::fixed(2.0 / 3.0) == "0.666667");
    CHECK(text::fixed(-1e-9) == "0.000000");
    CHECK(text::fixed(1.5, 2) == "1.50");
}

TEST_CASE("formatting ignores a comma-decimal locale") {
    const char* prev = std::setlocale(LC_ALL, nullptr);
    const std::string saved = prev ? prev : "C";
    if (std::setlocale(LC_ALL, "de_DE.UTF-8") != nullptr) {
        CHECK(text::fixed(0.5) == "0.500000");
        CHECK(text::parse_double("0.5") == 0.5);
    }
    std::setlocale(LC_ALL, saved.c_str());
}

TEST_CASE("split helpers") {
    const auto ws = text::split_ws("  a \tb   c ");
    REQUIRE(ws.size() == 3);
    CHECK(ws[2] == "c");
    const auto f = text::split("a,,b", ',');
    REQUIRE(f.size() == 3);
    CHECK(f[1].empty());
}

TEST_CASE("LineReader strips CR and counts lines") {
    text::LineReader r("a\r\nb\n\nc");
    std::string_view line;
    std::vector<std::string> got;
    while (r.next(line)) got.emplace_back(line);
    CHECK(got == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(r.line_number() == 4);
}
