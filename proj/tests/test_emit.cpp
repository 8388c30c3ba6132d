#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "crtbench/hierarchical.hpp"
#include "crtbench/json_io.hpp"
#include "crtbench/svg.hpp"

using namespace crtbench;
using Catch::Matchers::ContainsSubstring;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

} // namespace

TEST_CASE("line chart: structure, legend, determinism") {
    std::vector<ChartSeries> series{{"train", {{1, 0.5}, {2, 0.7}, {3, 0.8}}},
                                    {"test", {{1, 0.4}, {2, 0.6}, {3, 0.65}}}};
    const auto svg = svg_line_chart("accuracy by size", "size", "accuracy", series);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK_THAT(svg, ContainsSubstring("</svg>"));
    CHECK_THAT(svg, ContainsSubstring("accuracy by size"));
    CHECK_THAT(svg, ContainsSubstring(">train</text>"));
    CHECK_THAT(svg, ContainsSubstring(">test</text>"));
    CHECK_THAT(svg, ContainsSubstring("<path d=\"M"));
    CHECK_THAT(svg, ContainsSubstring(" L"));
    CHECK_THAT(svg, ContainsSubstring("<circle"));
    CHECK(svg == svg_line_chart("accuracy by size", "size", "accuracy", series));
}

TEST_CASE("line chart: markup-hostile names are escaped") {
    std::vector<ChartSeries> series{{"a<b & \"c\">", {{0, 1}, {1, 2}}}};
    const auto svg = svg_line_chart("t", "x", "y", series);
    CHECK_THAT(svg, ContainsSubstring("a&lt;b &amp; &quot;c&quot;&gt;"));
    CHECK(svg.find("a<b") == std::string::npos);
}

TEST_CASE("line chart rejects empty input") {
    CHECK_THROWS_WITH(svg_line_chart("t", "x", "y", {}), ContainsSubstring("no series"));
    std::vector<ChartSeries> with_empty{{"fine", {{0, 1}}}, {"hollow", {}}};
    CHECK_THROWS_WITH(svg_line_chart("t", "x", "y", with_empty),
                      ContainsSubstring("empty series 'hollow'"));
}

TEST_CASE("grouped bars: structure and validation") {
    const std::vector<std::string> names{"sensitivity", "specificity", "accuracy"};
    const std::vector<BarGroup> groups{{"clustering", {0.6, 0.55, 0.58}},
                                       {"tree", {0.87, 0.84, 0.86}},
                                       {"network", {0.95, 0.93, 0.94}}};
    const auto svg = svg_grouped_bars("methods", "score", names, groups);
    CHECK_THAT(svg, ContainsSubstring("clustering"));
    CHECK_THAT(svg, ContainsSubstring("network"));
    CHECK_THAT(svg, ContainsSubstring("sensitivity"));
    CHECK_THAT(svg, ContainsSubstring("<rect"));
    CHECK(svg == svg_grouped_bars("methods", "score", names, groups));

    CHECK_THROWS_AS(svg_grouped_bars("t", "y", {}, groups), EmissionError);
    CHECK_THROWS_AS(svg_grouped_bars("t", "y", names, {}), EmissionError);
    CHECK_THROWS_WITH(svg_grouped_bars("t", "y", names, {{"bad", {0.5}}}),
                      ContainsSubstring("'bad' has 1 values for 3 series"));
    CHECK_THROWS_WITH(svg_grouped_bars("t", "y", names, {{"neg", {0.5, -0.1, 0.2}}}),
                      ContainsSubstring("negative"));
}

TEST_CASE("dendrogram drawing annotates combined sample counts") {
    const auto data = from_rows({{0}, {1}, {10}, {11}});
    const auto dend = agglomerative(data, DistanceMetric::euclidean, Linkage::average);

    const auto full = truncate_dendrogram(dend, 10);
    const auto svg_full = svg_dendrogram("all leaves", full);
    CHECK_THAT(svg_full, ContainsSubstring("n=1"));
    CHECK_THAT(svg_full, ContainsSubstring("#333333")); // neutral tint without shares

    const auto squashed = truncate_dendrogram(dend, 2);
    const auto svg_squashed = svg_dendrogram("two leaves", squashed, {1.0, 0.0});
    CHECK_THAT(svg_squashed, ContainsSubstring("n=2"));
    CHECK_THAT(svg_squashed, ContainsSubstring("#cc3333")); // class-1 heavy leaf
    CHECK_THAT(svg_squashed, ContainsSubstring("#2e8b57")); // class-0 heavy leaf
    CHECK(svg_squashed == svg_dendrogram("two leaves", squashed, {1.0, 0.0}));
}

TEST_CASE("dendrogram drawing input validation") {
    TruncatedDendrogram empty;
    empty.n_display_leaves = 2;
    empty.n_total_leaves = 2;
    CHECK_THROWS_WITH(svg_dendrogram("t", empty), ContainsSubstring("no merges"));

    const auto data = from_rows({{0}, {1}, {10}});
    const auto t = truncate_dendrogram(
        agglomerative(data, DistanceMetric::euclidean, Linkage::average), 3);
    CHECK_THROWS_AS(svg_dendrogram("t", t, {0.5}), EmissionError); // 1 share, 3 leaves
}

TEST_CASE("config hash: canonical, stable, sensitive") {
    Json a;
    a["beta"] = 2;
    a["alpha"] = 1;
    Json b;
    b["alpha"] = 1;
    b["beta"] = 2;
    CHECK(config_hash(a) == config_hash(b)); // insertion order is erased
    CHECK(config_hash(a).size() == 16);
    for (const char c : config_hash(a)) CHECK(std::string("0123456789abcdef").find(c) != std::string::npos);

    Json c = a;
    c["beta"] = 3;
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("text file round trip and diagnostics") {
    const auto dir = std::filesystem::temp_directory_path() / "crtbench_emit_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "echo.txt").string();
    const std::string payload = "line one\nline two\n\xc3\xa9 binary-ish \x01 bytes\n";
    write_text_file(path, payload);
    CHECK(read_text_file(path) == payload);

    CHECK_THROWS_WITH(read_text_file((dir / "absent.txt").string()),
                      ContainsSubstring("file not found"));
    CHECK_THROWS_AS(write_text_file((dir / "no" / "such" / "dir.txt").string(), "x"),
                    EmissionError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("json parsing failures name their source") {
    CHECK_THROWS_WITH(parse_json("{not json", "the config file"),
                      ContainsSubstring("the config file"));
    CHECK(parse_json("{\"k\": [1, 2]}", "ok")["k"][1] == 2);
}

TEST_CASE("column specs survive a json round trip") {
    std::vector<ColumnSpec> specs{{"age", ColumnRole::input, {}},
                                  {"note", ColumnRole::commentary, {"-", "?"}},
                                  {"response", ColumnRole::output, {}}};
    const auto back = column_specs_from_json(column_specs_to_json(specs));
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].name == specs[i].name);
        CHECK(back[i].role == specs[i].role);
        CHECK(back[i].illegitimate_tokens == specs[i].illegitimate_tokens);
    }
}

TEST_CASE("column spec schema violations") {
    CHECK_THROWS_AS(column_specs_from_json(Json::object()), SchemaError);
    CHECK_THROWS_AS(column_specs_from_json(Json::array()), SchemaError); // empty
    CHECK_THROWS_AS(column_specs_from_json(Json::array({Json("x")})), SchemaError);
    CHECK_THROWS_AS(column_specs_from_json(Json::parse(R"([{"role":"input"}])")),
                    SchemaError); // no name
    CHECK_THROWS_AS(column_specs_from_json(Json::parse(R"([{"name":"a"}])")),
                    SchemaError); // no role
    CHECK_THROWS_AS(column_specs_from_json(Json::parse(R"([{"name":"a","role":"boss"}])")),
                    SchemaError); // unknown role
    CHECK_THROWS_AS(
        column_specs_from_json(Json::parse(R"([{"name":"a","role":"input","extra":1}])")),
        SchemaError);
    CHECK_THROWS_AS(
        column_specs_from_json(
            Json::parse(R"([{"name":"a","role":"input","illegitimate_tokens":"NA"}])")),
        SchemaError); // tokens not an array
    CHECK_THROWS_AS(
        column_specs_from_json(
            Json::parse(R"([{"name":"a","role":"input","illegitimate_tokens":[1]}])")),
        SchemaError); // tokens not strings
}

TEST_CASE("result serializers expose every field") {
    ConfusionMatrix cm;
    cm.tp = 3;
    cm.fn = 1;
    cm.tn = 4;
    cm.fp = 2;
    const auto jcm = to_json(cm);
    CHECK(jcm["true_positive"] == 3);
    CHECK(jcm["false_negative"] == 1);
    CHECK(jcm["true_negative"] == 4);
    CHECK(jcm["false_positive"] == 2);

    EvalResult er;
    er.counts = cm;
    er.sensitivity = 0.75;
    er.specificity = 2.0 / 3.0;
    er.accuracy = 0.7;
    const auto jer = to_json(er);
    CHECK(jer["sensitivity"] == 0.75);
    CHECK(jer["accuracy"] == 0.7);
    CHECK(jer["counts"]["true_positive"] == 3);
}

TEST_CASE("report envelope carries the audit fields") {
    Json config;
    config["protocol"]["master_seed"] = 7;
    const auto env = report_envelope("tree", config, 7);
    CHECK(env["schema_version"] == 1);
    CHECK(env["kind"] == "tree");
    CHECK(env["master_seed"] == 7);
    CHECK(env["config_hash"] == config_hash(config));
}
