#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "crtbench/preprocess.hpp"

using namespace crtbench;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<ColumnSpec> all_input_plus_output(const RawTable& t, const std::string& output) {
    std::vector<ColumnSpec> specs;
    for (const auto& n : t.column_names)
        specs.push_back({n, n == output ? ColumnRole::output : ColumnRole::input, {}});
    return specs;
}

} // namespace

TEST_CASE("token legitimacy: default set, trimming, case") {
    ColumnSpec numeric{"x", ColumnRole::input, {}};
    CHECK(is_illegitimate_token("", numeric));
    CHECK(is_illegitimate_token("  ", numeric));
    CHECK(is_illegitimate_token("NA", numeric));
    CHECK(is_illegitimate_token(" na ", numeric));
    CHECK(is_illegitimate_token("NaN", numeric));
    CHECK(is_illegitimate_token("nAn", numeric));
    CHECK_FALSE(is_illegitimate_token("0", numeric));
    CHECK_FALSE(is_illegitimate_token(" -3.5 ", numeric));
    // non-numeric text can never feed a numeric column
    CHECK(is_illegitimate_token("yes", numeric));
}

TEST_CASE("token legitimacy: custom tokens replace the default set") {
    ColumnSpec custom{"x", ColumnRole::input, {"-9", "?"}};
    CHECK(is_illegitimate_token("-9", custom));
    CHECK(is_illegitimate_token(" -9", custom));
    CHECK(is_illegitimate_token("?", custom));
    CHECK(is_illegitimate_token("", custom)); // empty stays illegitimate
    CHECK_FALSE(is_illegitimate_token("7", custom));

    // on a commentary column the numeric check is off, so "na" is now a value
    ColumnSpec note{"note", ColumnRole::commentary, {"-9"}};
    CHECK_FALSE(is_illegitimate_token("na", note));
    CHECK(is_illegitimate_token("-9", note));
}

TEST_CASE("spec alignment errors") {
    const auto t = parse_table("a,b\n1,2\n");
    CHECK_THROWS_AS(align_specs(t, {{"a", ColumnRole::input, {}}}), SchemaError);
    CHECK_THROWS_AS(align_specs(t, {{"a", ColumnRole::input, {}},
                                    {"a", ColumnRole::input, {}},
                                    {"b", ColumnRole::output, {}}}),
                    SchemaError);
    CHECK_THROWS_AS(align_specs(t, {{"a", ColumnRole::input, {}},
                                    {"b", ColumnRole::input, {}}}),
                    SchemaError); // no output column
    CHECK_THROWS_AS(align_specs(t, {{"a", ColumnRole::output, {}},
                                    {"b", ColumnRole::output, {}}}),
                    SchemaError); // two output columns
    // spec order need not match table order
    const auto aligned = align_specs(t, {{"b", ColumnRole::output, {}},
                                         {"a", ColumnRole::input, {}}});
    CHECK(aligned[0].name == "a");
    CHECK(aligned[1].role == ColumnRole::output);
}

TEST_CASE("row filter drops rows strictly above the threshold") {
    const auto t = parse_table(
        "a,b,c,d,y\n"
        "1,2,3,4,0\n"     // 0 bad
        "NA,NA,3,4,1\n"   // 2 bad -> kept at threshold 2
        "NA,NA,NA,4,0\n"  // 3 bad -> dropped
        ",,,,1\n"         // 4 bad -> dropped
        "5,6,7,8,1\n");
    const auto specs = all_input_plus_output(t, "y");
    const auto r = filter_incomplete_rows(t, specs, 2);
    CHECK(r.dropped_rows == std::vector<std::size_t>{2, 3});
    REQUIRE(r.table.n_rows() == 3);
    CHECK(r.table.cells[2][0] == "5");
}

TEST_CASE("commentary columns are removed wholesale") {
    const auto t = parse_table("note,a,remark,y\nhello,1,x,0\nworld,2,y,1\n");
    std::vector<ColumnSpec> specs{{"note", ColumnRole::commentary, {}},
                                  {"a", ColumnRole::input, {}},
                                  {"remark", ColumnRole::commentary, {}},
                                  {"y", ColumnRole::output, {}}};
    const auto r = drop_commentary_columns(t, specs);
    CHECK(r.dropped_names == std::vector<std::string>{"note", "remark"});
    CHECK(r.table.column_names == std::vector<std::string>{"a", "y"});
    REQUIRE(r.specs.size() == 2);
    CHECK(r.specs[1].role == ColumnRole::output);
    CHECK(r.table.cells[1] == std::vector<std::string>{"2", "1"});
}

TEST_CASE("numeric projection records which cells were usable") {
    const auto t = parse_table("a,y\n1.5,0\nNA,1\n");
    const auto nt = to_numeric(t, all_input_plus_output(t, "y"));
    CHECK(nt.values(0, 0) == 1.5);
    CHECK(nt.legit[0][0]);
    CHECK_FALSE(nt.legit[1][0]);
    CHECK(nt.roles[1] == ColumnRole::output);
}

TEST_CASE("constant columns: observed values decide") {
    const auto t = parse_table(
        "flat,live,hole,y\n"
        "5,1,NA,0\n"
        "5,2,NA,1\n"
        "5.0,3,NA,0\n");
    const auto nt = to_numeric(t, all_input_plus_output(t, "y"));
    const auto r = drop_constant_columns(nt);
    CHECK(r.dropped_names == std::vector<std::string>{"flat"});
    // the all-missing column survives here; impute_mean owns that diagnostic
    CHECK(r.table.names == std::vector<std::string>{"live", "hole", "y"});
}

TEST_CASE("constant output column is never dropped") {
    const auto t = parse_table("a,y\n1,0\n2,0\n");
    const auto r = drop_constant_columns(to_numeric(t, all_input_plus_output(t, "y")));
    CHECK(r.dropped_names.empty());
}

TEST_CASE("pearson on complete pairs only") {
    // rows where either side is missing must not contribute
    const auto t = parse_table(
        "a,b,y\n"
        "1,2,0\n"
        "2,4,0\n"
        "NA,100,1\n"
        "3,6,1\n"
        "4,NA,0\n");
    const auto nt = to_numeric(t, all_input_plus_output(t, "y"));
    const auto r = pairwise_pearson(nt, 0, 1);
    REQUIRE(r.has_value());
    CHECK_THAT(*r, WithinAbs(1.0, 1e-12)); // b = 2a on the complete pairs

    // hand value on an imperfect pair: a={1,2,3}, b={2,1,4} -> r = 2/sqrt(2*14/3)... compute directly
    const auto t2 = parse_table("a,b,y\n1,2,0\n2,1,0\n3,4,1\n");
    const auto nt2 = to_numeric(t2, all_input_plus_output(t2, "y"));
    // means 2 and 7/3; sxy = (−1)(−1/3)+0(−4/3)+1(5/3) = 2; sxx = 2; syy = 14/3
    const double expect = 2.0 / std::sqrt(2.0 * 14.0 / 3.0);
    CHECK_THAT(pairwise_pearson(nt2, 0, 1).value(), WithinAbs(expect, 1e-12));
}

TEST_CASE("pearson degenerate cases yield nullopt") {
    const auto t = parse_table("a,b,c,y\n1,5,NA,0\n2,5,2,0\nNA,5,3,1\n");
    const auto nt = to_numeric(t, all_input_plus_output(t, "y"));
    CHECK_FALSE(pairwise_pearson(nt, 0, 1).has_value()); // b constant
    CHECK_FALSE(pairwise_pearson(nt, 0, 2).has_value()); // single complete pair
}

TEST_CASE("duplicate drop: +1 only, lower index wins, chains collapse") {
    const auto t = parse_table(
        "a,twin,neg,chain,y\n"
        "1,5,-1,3,0\n"
        "2,7,-2,5,1\n"
        "3,9,-3,7,0\n"
        "4,11,-4,9,1\n");
    // twin = 2a+3, chain = 2a+1 -> both correlate +1 with a (and each other)
    const auto nt = to_numeric(t, all_input_plus_output(t, "y"));
    const auto r = drop_duplicate_columns(nt);
    CHECK(r.dropped_names == std::vector<std::string>{"twin", "chain"});
    CHECK(r.table.names == std::vector<std::string>{"a", "neg", "y"});
}

TEST_CASE("mean imputation fills holes and counts them") {
    const auto t = parse_table("a,b,y\n1,10,0\n2,NA,1\nNA,NA,0\n3,20,1\n");
    const auto nt = to_numeric(t, all_input_plus_output(t, "y"));
    const auto r = impute_mean(nt);
    CHECK(r.imputed_cells == 3);
    CHECK(r.table.values(2, 0) == 2.0);  // mean of 1,2,3
    CHECK(r.table.values(1, 1) == 15.0); // mean of 10,20
    CHECK(r.table.values(2, 1) == 15.0);
    for (const auto& row : r.table.legit)
        for (const auto cell : row) CHECK(cell);
}

TEST_CASE("imputation refuses hopeless columns") {
    const auto t = parse_table("a,b,y\n1,NA,0\n2,NA,1\n");
    const auto nt = to_numeric(t, all_input_plus_output(t, "y"));
    CHECK_THROWS_WITH(impute_mean(nt), Catch::Matchers::ContainsSubstring("no usable values"));
}

TEST_CASE("imputation refuses missing output cells") {
    const auto t = parse_table("a,y\n1,0\n2,NA\n");
    const auto nt = to_numeric(t, all_input_plus_output(t, "y"));
    CHECK_THROWS_AS(impute_mean(nt), PreprocessError);
}

TEST_CASE("min-max normalization maps the fit range onto [0,1]") {
    Matrix m(3, 1);
    m(0, 0) = 0;
    m(1, 0) = 5;
    m(2, 0) = 10;
    const std::vector<std::size_t> rows{0, 1, 2};
    const auto p = fit_normalization(m, rows, NormMode::min_max, true);
    const auto out = apply_normalization(m, p);
    CHECK(out(0, 0) == 0.0);
    CHECK(out(1, 0) == 0.5);
    CHECK(out(2, 0) == 1.0);
}

TEST_CASE("z-score normalization uses the population deviation") {
    Matrix m(2, 1);
    m(0, 0) = 4;
    m(1, 0) = 6;
    const std::vector<std::size_t> rows{0, 1};
    const auto p = fit_normalization(m, rows, NormMode::z_score, true);
    const auto out = apply_normalization(m, p);
    CHECK_THAT(out(0, 0), WithinAbs(-1.0, 1e-12)); // sd = 1, not sqrt(2)
    CHECK_THAT(out(1, 0), WithinAbs(1.0, 1e-12));
}

TEST_CASE("normalization fitted on a subset extrapolates outside it") {
    Matrix m(4, 1);
    m(0, 0) = 0;
    m(1, 0) = 2;
    m(2, 0) = 4;  // not a fit row
    m(3, 0) = -1; // not a fit row
    const std::vector<std::size_t> fit{0, 1};
    const auto out = apply_normalization(m, fit_normalization(m, fit, NormMode::min_max, true));
    CHECK(out(2, 0) == 2.0);
    CHECK(out(3, 0) == -0.5);
}

TEST_CASE("degenerate columns: strict throws, lenient maps to zero with a warning") {
    Matrix m(2, 2);
    m(0, 0) = 1;
    m(1, 0) = 2;
    m(0, 1) = 7;
    m(1, 1) = 7;
    const std::vector<std::size_t> rows{0, 1};
    const std::vector<std::string> names{"good", "flat"};
    CHECK_THROWS_AS(fit_normalization(m, rows, NormMode::min_max, true, nullptr, &names),
                    PreprocessError);
    CHECK_THROWS_AS(fit_normalization(m, rows, NormMode::z_score, true, nullptr, &names),
                    PreprocessError);
    std::vector<std::string> warnings;
    const auto p = fit_normalization(m, rows, NormMode::min_max, false, &warnings, &names);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("flat") != std::string::npos);
    const auto out = apply_normalization(m, p);
    CHECK(out(0, 1) == 0.0);
    CHECK(out(1, 1) == 0.0);
    CHECK(out(0, 0) == 0.0);
    CHECK(out(1, 0) == 1.0);
}

TEST_CASE("apply_normalization rejects mismatched shapes") {
    Matrix m(1, 2);
    NormParams p;
    p.cols.resize(3);
    CHECK_THROWS_AS(apply_normalization(m, p), ContractError);
    CHECK_THROWS_AS(fit_normalization(m, {}, NormMode::min_max, true), ContractError);
}

TEST_CASE("full pipeline on a hand-checked table") {
    const auto t = parse_table(
        "note,a,flat,twin,y\n"
        "r0,0,5,3,0\n"
        "r1,1,5,5,1\n"
        "r2,2,5,7,0\n"
        "r3,3,5,9,1\n"
        "r4,NA,5,NA,1\n");
    std::vector<ColumnSpec> specs{{"note", ColumnRole::commentary, {}},
                                  {"a", ColumnRole::input, {}},
                                  {"flat", ColumnRole::input, {}},
                                  {"twin", ColumnRole::input, {}},
                                  {"y", ColumnRole::output, {}}};
    const auto out = preprocess(t, specs);

    CHECK(out.report.rows_in == 5);
    CHECK(out.report.rows_dropped_missing == 0);
    CHECK(out.report.rows_out == 5);
    CHECK(out.report.cols_in == 5);
    CHECK(out.report.cols_commentary == 1);
    CHECK(out.report.cols_constant == 1);
    CHECK(out.report.cols_duplicate == 1);
    CHECK(out.report.cols_out == 2);
    CHECK(out.report.imputed_cells == 1);
    CHECK(out.report.dropped_constant_columns == std::vector<std::string>{"flat"});
    CHECK(out.report.dropped_duplicate_columns == std::vector<std::string>{"twin"});
    CHECK(out.report.normalization == "min_max");
    CHECK(out.report.fit_on == "train_only");

    REQUIRE(out.cohort.n_rows() == 5);
    REQUIRE(out.cohort.n_features() == 1);
    CHECK(out.cohort.feature_names == std::vector<std::string>{"a"});
    CHECK(out.cohort.labels == std::vector<int>{0, 1, 0, 1, 1});
    // a = {0,1,2,3, imputed 1.5}, min-max over 0..3
    CHECK(out.cohort.features(0, 0) == 0.0);
    CHECK_THAT(out.cohort.features(1, 0), WithinAbs(1.0 / 3.0, 1e-12));
    CHECK(out.cohort.features(3, 0) == 1.0);
    CHECK(out.cohort.features(4, 0) == 0.5);
}

TEST_CASE("pipeline rejects a non-binary output") {
    const auto t = parse_table("a,y\n1,0\n2,1\n3,2\n4,1\n");
    CHECK_THROWS_WITH(preprocess(t, all_input_plus_output(t, "y")),
                      Catch::Matchers::ContainsSubstring("non-binary"));
}

TEST_CASE("pipeline drops rows before anything else") {
    // row 1 has 3 bad cells; with threshold 2 it must not influence imputation
    const auto t = parse_table("a,b,c,y\n1,4,7,0\nNA,NA,NA,1\n3,6,9,1\n2,5,8,0\n");
    PreprocessOptions opt;
    opt.missing_threshold = 2;
    const auto out = preprocess(t, all_input_plus_output(t, "y"), opt);
    CHECK(out.report.rows_dropped_missing == 1);
    CHECK(out.report.dropped_rows == std::vector<std::size_t>{1});
    CHECK(out.report.rows_out == 3);
    CHECK(out.report.imputed_cells == 0);
    CHECK(out.cohort.labels == std::vector<int>{0, 1, 0});
}

TEST_CASE("stratified split: floor per class, disjoint, ordered") {
    std::vector<int> labels;
    for (int i = 0; i < 7; ++i) labels.push_back(1);
    for (int i = 0; i < 5; ++i) labels.push_back(0);
    const auto idx = stratified_split_indices(labels, 0.70, 99);
    // floor(0.7*7)=4 ones, floor(0.7*5)=3 zeros
    CHECK(idx.train.size() == 7);
    CHECK(idx.test.size() == 5);
    std::size_t train_ones = 0;
    for (const auto i : idx.train) train_ones += labels[i] == 1;
    CHECK(train_ones == 4);
    CHECK(std::is_sorted(idx.train.begin(), idx.train.end()));
    CHECK(std::is_sorted(idx.test.begin(), idx.test.end()));
    std::vector<std::size_t> all = idx.train;
    all.insert(all.end(), idx.test.begin(), idx.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(labels.size());
    for (std::size_t i = 0; i < expect.size(); ++i) expect[i] = i;
    CHECK(all == expect);
}

TEST_CASE("stratified split: seed determinism") {
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(i % 2);
    const auto a = stratified_split_indices(labels, 0.5, 7);
    const auto b = stratified_split_indices(labels, 0.5, 7);
    const auto c = stratified_split_indices(labels, 0.5, 8);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.train != c.train);
}

TEST_CASE("stratified split: contract violations") {
    std::vector<int> ok{0, 0, 1, 1};
    CHECK_THROWS_AS(stratified_split_indices(ok, 0.0, 1), ContractError);
    CHECK_THROWS_AS(stratified_split_indices(ok, 1.0, 1), ContractError);
    std::vector<int> bad{0, 0, 2, 1};
    CHECK_THROWS_AS(stratified_split_indices(bad, 0.5, 1), ContractError);
    std::vector<int> thin{0, 1, 1, 1};
    CHECK_THROWS_AS(stratified_split_indices(thin, 0.5, 1), SplitError);
}

TEST_CASE("cohort split carries rows and labels together") {
    Cohort c;
    c.features = Matrix(6, 1);
    for (std::size_t r = 0; r < 6; ++r) c.features(r, 0) = double(r) * 10;
    c.labels = {0, 1, 0, 1, 0, 1};
    c.feature_names = {"x"};
    const auto [train, test] = stratified_split(c, 2.0 / 3.0, 3);
    CHECK(train.n_rows() == 4);
    CHECK(test.n_rows() == 2);
    CHECK(train.feature_names == c.feature_names);
    // every row keeps its own label: feature value encodes the original index
    for (std::size_t r = 0; r < train.n_rows(); ++r) {
        const auto orig = static_cast<std::size_t>(train.features(r, 0) / 10.0);
        CHECK(train.labels[r] == c.labels[orig]);
    }
}
