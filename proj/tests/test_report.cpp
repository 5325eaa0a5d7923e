#include <catch2/catch_amalgamated.hpp>

#include "semcons/pipeline.hpp"
#include "semcons/report.hpp"
#include "support/helpers.hpp"

using namespace semcons;
using semcons::test::TempDir;

namespace {

CategoryScore cat_score(const std::string& category, const std::string& strategy, Rational mean) {
    CategoryScore s;
    s.category = category;
    s.strategy = strategy;
    s.mean_exact = mean;
    s.mean = mean.to_double();
    return s;
}

ComparisonReport small_report(const std::string& variant, const std::vector<Rational>& base_means,
                              const std::vector<Rational>& variant_means) {
    std::vector<CategoryScore> base;
    std::vector<CategoryScore> vari;
    for (std::size_t i = 0; i < base_means.size(); ++i) {
        base.push_back(cat_score("cat" + std::to_string(i), "plain", base_means[i]));
        vari.push_back(cat_score("cat" + std::to_string(i), variant, variant_means[i]));
    }
    return compare_strategies(base, vari);
}

} // namespace

TEST_CASE("table1 renders counts per variant and round-trips through csv") {
    auto rag = small_report("rag", {Rational(1, 4), Rational(1, 2), Rational(3, 4)},
                            {Rational(1, 2), Rational(3, 4), Rational(1, 4)});
    auto cot = small_report("cot", {Rational(1, 4), Rational(1, 2), Rational(3, 4)},
                            {Rational(1, 4), Rational(3, 4), Rational(3, 4)});
    auto table = emit_table1({rag, cot});

    auto rows = parse_csv(table.csv);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"semantic_consistency", "rag", "cot"});
    CHECK(rows[1] == std::vector<std::string>{"increase", std::to_string(rag.increased),
                                              std::to_string(cot.increased)});
    CHECK(rows[2] == std::vector<std::string>{"decrease", std::to_string(rag.decreased),
                                              std::to_string(cot.decreased)});
    CHECK(rows[3] == std::vector<std::string>{"unchanged", std::to_string(rag.unchanged),
                                              std::to_string(cot.unchanged)});
    CHECK(table.text.find("increase") != std::string::npos);

    // identity comparison: everything lands in unchanged
    auto same = small_report("rag", {Rational(1, 2), Rational(1, 4)},
                             {Rational(1, 2), Rational(1, 4)});
    auto identity = emit_table1({same});
    auto identity_rows = parse_csv(identity.csv);
    CHECK(identity_rows[3] == std::vector<std::string>{"unchanged", "2"});
}

TEST_CASE("table1 with no variants is header-only") {
    auto table = emit_table1({});
    auto rows = parse_csv(table.csv);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"semantic_consistency"});
    CHECK(rows[1] == std::vector<std::string>{"increase"});
}

TEST_CASE("table2 renders bins with column sums") {
    StrategyBins a;
    a.strategy = "plain";
    a.counts = {1, 17, 18, 1};
    StrategyBins b;
    b.strategy = "rag";
    b.counts = {0, 4, 18, 15};
    auto table = emit_table2({a, b});

    auto rows = parse_csv(table.csv);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == std::vector<std::string>{"bin", "plain", "rag"});
    CHECK(rows[1] == std::vector<std::string>{"(0,0.25]", "1", "0"});
    CHECK(rows[4] == std::vector<std::string>{"(0.75,1]", "1", "15"});
    CHECK(rows[5] == std::vector<std::string>{"total", "37", "37"});

    SECTION("single strategy column") {
        auto single = emit_table2({a});
        CHECK(parse_csv(single.csv)[0] == std::vector<std::string>{"bin", "plain"});
    }
    SECTION("all categories in one bin") {
        StrategyBins lone;
        lone.strategy = "plain";
        lone.counts = {9, 0, 0, 0};
        auto rendered = parse_csv(emit_table2({lone}).csv);
        CHECK(rendered[1] == std::vector<std::string>{"(0,0.25]", "9"});
        CHECK(rendered[5] == std::vector<std::string>{"total", "9"});
    }
    SECTION("mismatched boundaries are rejected") {
        StrategyBins odd = b;
        odd.boundaries = {Rational(1, 10), Rational(1, 2), Rational(3, 4), Rational(1, 1)};
        CHECK_THROWS_AS(emit_table2({a, odd}), BinMismatchError);
    }
}

TEST_CASE("delta plot csv carries per-category deltas and mean-improvement footers") {
    auto rag = small_report("rag", {Rational(1, 4), Rational(1, 2)},
                            {Rational(1, 2), Rational(2, 5)});
    auto cot = small_report("cot", {Rational(1, 4), Rational(1, 2)},
                            {Rational(1, 4), Rational(1, 2)});
    std::string csv = emit_delta_plot_data({rag, cot});
    auto rows = parse_csv(csv);
    REQUIRE(rows.size() == 7); // header + 4 data rows + 2 footers

    CHECK(rows[0] == std::vector<std::string>{"category", "variant", "delta", "delta_fraction"});
    // sorted by category, then variant
    CHECK(rows[1][0] == "cat0");
    CHECK(rows[1][1] == "cot");
    CHECK(rows[2][1] == "rag");
    CHECK(rows[2][2] == "0.250000");
    CHECK(rows[2][3] == "1/4");
    // zero delta is rendered as plain zero
    CHECK(rows[1][2] == "0.000000");
    CHECK(rows[3][2] == "0.000000");

    CHECK(rows[5] == std::vector<std::string>{"mean_improvement", "rag", "0.075000", "3/40"});
    CHECK(rows[6][1] == "cot");
    CHECK(rows[6][3] == "0/1");

    // every delta re-parses to the exact source value
    for (std::size_t r = 1; r <= 4; ++r) {
        const auto& report = rows[r][1] == "rag" ? rag : cot;
        for (const auto& d : report.per_category) {
            if (d.category == rows[r][0]) CHECK(Rational::parse(rows[r][3]) == d.delta);
        }
    }
}

TEST_CASE("manifest checksums every artifact and flags missing ones") {
    TempDir dir("manifest");
    const auto run_dir = dir.path();

    // Minimal populated run directory: one strategy, one question.
    std::vector<QuestionRecord> records;
    for (int i = 0; i < 2; ++i) {
        records.push_back({"law/" + std::to_string(i), "Law", "Q" + std::to_string(i), "", {}, {}, {}});
    }
    auto dataset = sample_questions(records, 2, 2, 9);
    write_json_file_atomic(run_dir / "sampled_dataset.json", json(dataset));

    for (const auto& record : dataset.categories.at("Law")) {
        ResponseSet set;
        set.question_id = record.id;
        set.strategy = "plain";
        set.question = record.question;
        set.n = 2;
        for (int i = 0; i < 2; ++i) {
            set.responses.push_back({i, "ans", std::nullopt, "fp", "m", false, "t", std::nullopt});
        }
        write_json_file_atomic(run_dir / "responses" / "plain" / (record.id + ".json"), json(set));
        Clustering clustering{record.id, "plain", 2, {{0, 1}}, "exact-match:v1"};
        write_json_file_atomic(run_dir / "clusters" / "plain" / (record.id + ".json"),
                               json(clustering));
    }
    test::write_file(run_dir / "scores" / "plain.csv", "question_id,category,n,cluster_sizes,value,value_fraction\n");

    SECTION("complete run produces a manifest listing every artifact") {
        auto manifest = write_manifest(run_dir);
        CHECK(std::filesystem::exists(run_dir / "report" / "manifest.json"));
        CHECK(manifest.judge_id == "exact-match:v1");
        CHECK(manifest.artifact_checksums.count("sampled_dataset.json") == 1);
        CHECK(manifest.artifact_checksums.count("scores/plain.csv") == 1);
        CHECK(manifest.artifact_checksums.count("responses/plain/law/0.json") == 1);
        CHECK(manifest.artifact_checksums.count("clusters/plain/law/1.json") == 1);
        // the manifest itself is not checksummed
        CHECK(manifest.artifact_checksums.count("report/manifest.json") == 0);
    }
    SECTION("artifact deleted after scoring is reported by name") {
        std::filesystem::remove(run_dir / "clusters" / "plain" / "law" / "1.json");
        try {
            write_manifest(run_dir);
            FAIL("expected MissingArtifactError");
        } catch (const MissingArtifactError& e) {
            CHECK(e.path() == "clusters/plain/law/1.json");
        }
    }
    SECTION("two identical runs produce identical checksum sets") {
        auto first = write_manifest(run_dir);
        auto second = write_manifest(run_dir);
        CHECK(first.artifact_checksums == second.artifact_checksums);

        json a = read_json_file(run_dir / "report" / "manifest.json");
        a.erase("created_at");
        json b = first;
        b.erase("created_at");
        CHECK(a == b);
    }
    SECTION("missing dataset aborts the manifest") {
        std::filesystem::remove(run_dir / "sampled_dataset.json");
        CHECK_THROWS_AS(write_manifest(run_dir), MissingArtifactError);
    }
}
