#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "crtbench/csv.hpp"
#include "crtbench/rng.hpp"

using namespace crtbench;

TEST_CASE("minimal header plus one row") {
    const auto t = parse_table("a,b\n1,2\n");
    REQUIRE(t.n_rows() == 1);
    REQUIRE(t.n_cols() == 2);
    CHECK(t.column_names == std::vector<std::string>{"a", "b"});
    CHECK(t.cells[0] == std::vector<std::string>{"1", "2"});
}

TEST_CASE("missing trailing newline still yields the last row") {
    const auto t = parse_table("a,b\n1,2");
    REQUIRE(t.n_rows() == 1);
    CHECK(t.cells[0][1] == "2");
}

TEST_CASE("quoted fields: commas, escaped quotes, embedded newlines") {
    const auto t = parse_table("name,notes\nx,\"a,b\"\ny,\"she said \"\"hi\"\"\"\nz,\"two\nlines\"\n");
    REQUIRE(t.n_rows() == 3);
    CHECK(t.cells[0][1] == "a,b");
    CHECK(t.cells[1][1] == "she said \"hi\"");
    CHECK(t.cells[2][1] == "two\nlines");
}

TEST_CASE("line break flavors all terminate records") {
    const auto lf = parse_table("a,b\n1,2\n3,4\n");
    const auto crlf = parse_table("a,b\r\n1,2\r\n3,4\r\n");
    const auto cr = parse_table("a,b\r1,2\r3,4\r");
    CHECK(lf.cells == crlf.cells);
    CHECK(lf.cells == cr.cells);
}

TEST_CASE("blank lines are skipped") {
    const auto t = parse_table("a,b\n\n1,2\n\n\n3,4\n\n");
    REQUIRE(t.n_rows() == 2);
    CHECK(t.cells[1][0] == "3");
}

TEST_CASE("empty fields survive") {
    const auto t = parse_table("a,b,c\n,,\nx,,z\n");
    REQUIRE(t.n_rows() == 2);
    CHECK(t.cells[0] == std::vector<std::string>{"", "", ""});
    CHECK(t.cells[1] == std::vector<std::string>{"x", "", "z"});
}

TEST_CASE("ragged row reports its line number") {
    try {
        parse_table("a,b\n1,2\n1,2,3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(std::string(e.what()).find("3 fields") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_table("a,b\n1\n"), ParseError);
}

TEST_CASE("duplicate header name is rejected") {
    CHECK_THROWS_AS(parse_table("a,a\n1,2\n"), SchemaError);
}

TEST_CASE("malformed quoting is rejected") {
    CHECK_THROWS_AS(parse_table("a,b\n\"open,2\n"), ParseError);
    CHECK_THROWS_AS(parse_table("a,b\n\"x\"y,2\n"), ParseError);
}

TEST_CASE("empty input is rejected") {
    CHECK_THROWS_AS(parse_table(""), ParseError);
    CHECK_THROWS_AS(parse_table("\n\n"), ParseError);
}

TEST_CASE("header-only table has zero rows") {
    const auto t = parse_table("a,b\n");
    CHECK(t.n_rows() == 0);
    CHECK(t.n_cols() == 2);
}

TEST_CASE("write/parse round trip preserves awkward tokens") {
    Rng rng(404);
    const std::string alphabet = "ab,\"\n\r 'x;|%3.-";
    for (int instance = 0; instance < 50; ++instance) {
        RawTable t;
        const std::size_t cols = 2 + rng.below(4);
        const std::size_t rows = rng.below(6);
        for (std::size_t c = 0; c < cols; ++c)
            t.column_names.push_back("col" + std::to_string(c));
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<std::string> row;
            for (std::size_t c = 0; c < cols; ++c) {
                std::string cell;
                const std::size_t len = rng.below(8);
                for (std::size_t i = 0; i < len; ++i)
                    cell += alphabet[rng.below(alphabet.size())];
                row.push_back(cell);
            }
            t.cells.push_back(row);
        }
        const auto back = parse_table(write_table(t));
        REQUIRE(back.column_names == t.column_names);
        REQUIRE(back.cells == t.cells);
    }
}

TEST_CASE("large table parses with the right shape") {
    std::string text;
    for (std::size_t c = 0; c < 80; ++c) text += (c ? "," : "") + ("c" + std::to_string(c));
    text += '\n';
    for (std::size_t r = 0; r < 1045; ++r) {
        for (std::size_t c = 0; c < 80; ++c) text += (c ? "," : "") + std::to_string(r + c);
        text += '\n';
    }
    const auto t = parse_table(text);
    CHECK(t.n_rows() == 1045);
    CHECK(t.n_cols() == 80);
}

TEST_CASE("fmt_double round-trips exactly") {
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        double v;
        switch (i % 4) {
            case 0: v = rng.normal() * 1e6; break;
            case 1: v = rng.uniform(-1, 1); break;
            case 2: v = rng.normal() * 1e-8; break;
            default: v = double(rng.below(1000)); break;
        }
        const auto parsed = parse_double(fmt_double(v));
        REQUIRE(parsed.has_value());
        REQUIRE(*parsed == v);
    }
    CHECK(fmt_double(0.5) == "0.5");
    CHECK(fmt_double(-2.0) == "-2");
}

TEST_CASE("parse_double accepts full numeric tokens only") {
    CHECK(parse_double("1.5").value() == 1.5);
    CHECK(parse_double("-2e3").value() == -2000.0);
    CHECK(parse_double("  42 ").value() == 42.0); // surrounding blanks are fine
    CHECK_FALSE(parse_double("").has_value());
    CHECK_FALSE(parse_double("1.5x").has_value());
    CHECK_FALSE(parse_double("x1.5").has_value());
    CHECK_FALSE(parse_double("nan").has_value());
    CHECK_FALSE(parse_double("inf").has_value());
    CHECK_FALSE(parse_double("1 2").has_value());
    CHECK_FALSE(parse_double("--3").has_value());
}
