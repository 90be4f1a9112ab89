#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "chshnet/bell.hpp"
#include "chshnet/error.hpp"
#include "chshnet/ingest.hpp"

using namespace chshnet;
using namespace chshnet::ingest;

namespace {

// Builds a log whose per-context mean products hit the requested
// correlations exactly: with rows_per_context rows, k = rows*(1+c)/2 of
// them get product +1 (both heads correct) and the rest product -1
// (alice correct, bob wrong). Requires rows*(1+c)/2 to be an integer;
// 20000 rows accommodate any 4-decimal correlation.
OutcomeLog log_with_correlations(const std::array<double, 4>& cs, long rows_per_context) {
    static const int order[4][2] = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
    OutcomeLog log;
    for (int ctx = 0; ctx < 4; ++ctx) {
        const double k_exact = rows_per_context * (1.0 + cs[ctx]) / 2.0;
        const long k = std::lround(k_exact);
        REQUIRE(std::abs(k_exact - k) < 1e-6);  // construction must be exact
        for (long r = 0; r < rows_per_context; ++r) {
            LogRow row;
            row.i = order[ctx][0];
            row.j = order[ctx][1];
            row.sample_id = "s" + std::to_string(r);
            row.alice_correct = 1;
            row.bob_correct = r < k ? 1 : 0;
            log.rows.push_back(row);
        }
    }
    return log;
}

std::string tiny_csv() {
    return "context_i,context_j,sample_id,alice_correct,bob_correct\n"
           "1,1,a,1,1\n"
           "1,1,b,1,0\n"
           "1,2,a,1,1\n"
           "1,2,b,0,0\n"
           "2,1,a,1,1\n"
           "2,1,b,1,1\n"
           "2,2,a,0,1\n"
           "2,2,b,1,1\n";
}

}  // namespace

TEST_CASE("parse_log CSV: row count and field values") {
    std::istringstream in(tiny_csv());
    const auto log = parse_log(in, LogFormat::Csv);
    REQUIRE(log.rows.size() == 8);
    CHECK(log.rows[3].i == 1);
    CHECK(log.rows[3].j == 2);
    CHECK(log.rows[3].sample_id == "b");
    CHECK(log.rows[3].alice_correct == 0);
}

TEST_CASE("parse_log rejects duplicates, bad contexts, malformed rows") {
    std::istringstream dup(
        "context_i,context_j,sample_id,alice_correct,bob_correct\n"
        "1,1,a,1,1\n1,2,a,1,1\n2,1,a,1,1\n2,2,a,1,1\n"
        "1,1,a,0,0\n");
    CHECK_THROWS_WITH_AS(parse_log(dup, LogFormat::Csv),
                         "duplicate row for context (1,1) sample 'a'", DataError);

    std::istringstream range(
        "context_i,context_j,sample_id,alice_correct,bob_correct\n"
        "3,1,a,1,1\n");
    CHECK_THROWS_WITH_AS(parse_log(range, LogFormat::Csv),
                         "line 2: context (3,1) out of range (indices must be 1 or 2)",
                         DataError);

    std::istringstream malformed(
        "context_i,context_j,sample_id,alice_correct,bob_correct\n"
        "1,1,a,1\n");
    try {
        parse_log(malformed, LogFormat::Csv);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    std::istringstream missing(
        "context_i,context_j,sample_id,alice_correct,bob_correct\n"
        "1,1,a,1,1\n2,1,a,1,1\n");
    try {
        parse_log(missing, LogFormat::Csv);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("missing contexts") != std::string::npos);
        CHECK(what.find("(1,2)") != std::string::npos);
        CHECK(what.find("(2,2)") != std::string::npos);
    }
}

TEST_CASE("parse_log JSONL mirrors the CSV schema") {
    std::ostringstream lines;
    for (const char* ctx : {"1,1", "1,2", "2,1", "2,2"}) {
        lines << "{\"context_i\": " << ctx[0] << ", \"context_j\": " << ctx[2]
              << ", \"sample_id\": \"a\", \"alice_correct\": 1, \"bob_correct\": 1}\n";
    }
    std::istringstream in(lines.str());
    const auto log = parse_log(in, LogFormat::Jsonl);
    CHECK(log.rows.size() == 4);

    std::istringstream bad("{\"context_i\": 1}\n");
    try {
        parse_log(bad, LogFormat::Jsonl);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}

TEST_CASE("report: all-correct log gives unit accuracy, c=1, s=2") {
    OutcomeLog log;
    for (int i = 1; i <= 2; ++i) {
        for (int j = 1; j <= 2; ++j) {
            for (int r = 0; r < 5; ++r) {
                log.rows.push_back(
                    {i, j, "s" + std::to_string(r), 1, 1});
            }
        }
    }
    const auto rep = report(log);
    for (const auto& cr : rep.contexts) {
        CHECK(cr.acc_alice == 1.0);
        CHECK(cr.acc_bob == 1.0);
        CHECK(cr.c == 1.0);
        CHECK(cr.rows == 5);
    }
    CHECK(rep.s == 2.0);
    CHECK(rep.regime == "S ≈ 2: converged");
    CHECK(rep.total_rows == 20);
}

TEST_CASE("report reproduces the reference S values from engineered logs") {
    // 20000 rows per context so every 4-decimal correlation is exactly
    // representable as a count
    const auto low = report(log_with_correlations({0.9899, 0.5144, 0.6197, 0.2219}, 20000));
    CHECK(low.contexts[0].c == doctest::Approx(0.9899).epsilon(1e-12));
    CHECK(std::abs(low.s - 1.902) <= 5e-4);
    CHECK(low.regime == "S ≈ 2: converged");

    const auto mid = report(log_with_correlations({0.9976, 0.8670, 0.9299, 0.6038}, 20000));
    CHECK(std::abs(mid.s - 2.191) <= 5e-4);
    CHECK(mid.regime == "S ≫ 2: critical regime");

    const auto high = report(log_with_correlations({0.9995, 0.9887, 0.9971, 0.9839}, 20000));
    CHECK(std::abs(high.s - 2.001) <= 5e-4);
    CHECK(high.regime == "S ≈ 2: converged");
}

TEST_CASE("report: regime thresholds are configurable and labels documented") {
    const auto log = log_with_correlations({0.5, 0.5, 0.5, 0.5}, 8);  // s = 1.0
    CHECK(report(log).regime == "S ≪ 2: underfitting");
    const auto wide = report(log, RegimeThresholds{0.5, 3.0});
    CHECK(wide.regime == "S ≈ 2: converged");
    CHECK(wide.thresholds.low == 0.5);
}

TEST_CASE("report round-trips through CSV serialization") {
    const auto log = log_with_correlations({0.75, 0.5, 0.25, 0.0}, 16);
    std::ostringstream out;
    write_csv(out, log);
    std::istringstream in(out.str());
    const auto back = parse_log(in, LogFormat::Csv);
    REQUIRE(back.rows.size() == log.rows.size());

    const auto a = report(log);
    const auto b = report(back);
    CHECK(a.s == b.s);
    for (int c = 0; c < 4; ++c) {
        CHECK(a.contexts[c].c == b.contexts[c].c);
        CHECK(a.contexts[c].acc_alice == b.contexts[c].acc_alice);
        CHECK(a.contexts[c].acc_bob == b.contexts[c].acc_bob);
    }
}

TEST_CASE("report invariants: accuracy identity and s recomputability") {
    const auto log = log_with_correlations({0.9899, 0.5144, 0.6197, 0.2219}, 20000);
    const auto rep = report(log);

    // mean(+/-1 outcomes) = 2*acc - 1 per side per context
    static const int order[4][2] = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
    for (int ctx = 0; ctx < 4; ++ctx) {
        double mean_a = 0.0, mean_b = 0.0;
        long rows = 0;
        for (const auto& row : log.rows) {
            if (row.i != order[ctx][0] || row.j != order[ctx][1]) continue;
            mean_a += row.alice_correct ? 1.0 : -1.0;
            mean_b += row.bob_correct ? 1.0 : -1.0;
            ++rows;
        }
        mean_a /= rows;
        mean_b /= rows;
        CHECK(mean_a == doctest::Approx(2.0 * rep.contexts[ctx].acc_alice - 1.0).epsilon(1e-12));
        CHECK(mean_b == doctest::Approx(2.0 * rep.contexts[ctx].acc_bob - 1.0).epsilon(1e-12));
    }

    // s equals chsh_s applied to the report's own c values, exactly
    CHECK(rep.s == bell::chsh_s({rep.contexts[0].c, rep.contexts[1].c, rep.contexts[2].c,
                                 rep.contexts[3].c}));
}

TEST_CASE("report_json mirrors the table row structure") {
    const auto rep = report(log_with_correlations({1.0, 1.0, 1.0, 1.0}, 4));
    const auto j = report_json(rep);
    REQUIRE(j.at("contexts").size() == 4);
    CHECK(j.at("contexts")[0].at("pair") == "A1B1");
    CHECK(j.at("contexts")[3].at("pair") == "A2B2");
    CHECK(j.at("contexts")[1].contains("acc_alice"));
    CHECK(j.at("contexts")[1].contains("acc_bob"));
    CHECK(j.at("contexts")[1].contains("c"));
    CHECK(j.at("s") == 2.0);
    CHECK(j.contains("regime"));
    CHECK(j.at("regime_thresholds").at("low") == 1.9);
}

TEST_CASE("report rejects a log missing a context") {
    OutcomeLog log;
    log.rows.push_back({1, 1, "a", 1, 1});
    CHECK_THROWS_AS(report(log), DataError);
}
