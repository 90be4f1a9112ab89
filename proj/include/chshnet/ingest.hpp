#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace chshnet::ingest {

// One logged evaluation sample: which task pair was measured and whether
// each head's prediction was correct. Model-agnostic by design; only
// correctness bits are ingested, never raw predictions.
struct LogRow {
    int i = 0;  // Alice task index, 1 or 2
    int j = 0;  // Bob task index, 1 or 2
    std::string sample_id;
    uint8_t alice_correct = 0;
    uint8_t bob_correct = 0;
};

struct OutcomeLog {
    std::vector<LogRow> rows;
};

enum class LogFormat { Csv, Jsonl };

inline constexpr const char* kLogCsvHeader =
    "context_i,context_j,sample_id,alice_correct,bob_correct";

// Parses and validates a prediction log. Rejects malformed rows (with the
// line number), out-of-range context indices, duplicate
// (context, sample_id) pairs, and logs that do not cover all four
// contexts (listing the absent ones). Contexts may have different row
// counts.
OutcomeLog parse_log(std::istream& in, LogFormat format);

// CSV serialization of a log; sample ids must be free of commas/newlines.
void write_csv(std::ostream& out, const OutcomeLog& log);

struct ContextReport {
    int i = 0, j = 0;
    long rows = 0;
    double acc_alice = 0.0;
    double acc_bob = 0.0;
    double c = 0.0;  // mean product of the +/-1 outcome indicators
};

// S-regime annotation thresholds; the regime markers are
// qualitative, so these are configurable and always reported alongside
// the result.
struct RegimeThresholds {
    double low = 1.9;
    double high = 2.1;
};

struct IngestReport {
    std::array<ContextReport, 4> contexts{};  // order (1,1),(1,2),(2,1),(2,2)
    double s = 0.0;
    std::string regime;
    RegimeThresholds thresholds;
    long total_rows = 0;
};

// Per context: accuracy per side, correlation via the +/-1 mapping, then
// S across the four contexts and a regime annotation.
IngestReport report(const OutcomeLog& log, RegimeThresholds thresholds = {});

nlohmann::json report_json(const IngestReport& report);

}  // namespace chshnet::ingest
