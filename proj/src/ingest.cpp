#include "chshnet/ingest.hpp"

#include <set>
#include <tuple>

#include "chshnet/bell.hpp"
#include "chshnet/error.hpp"
#include "chshnet/textio.hpp"

namespace chshnet::ingest {

namespace {

std::string context_name(int i, int j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

LogRow validate_row(int i, int j, std::string sample_id, long long alice_bit,
                    long long bob_bit, int lineno) {
    if (i < 1 || i > 2 || j < 1 || j > 2) {
        throw DataError("line " + std::to_string(lineno) + ": context " +
                        context_name(i, j) + " out of range (indices must be 1 or 2)");
    }
    if ((alice_bit != 0 && alice_bit != 1) || (bob_bit != 0 && bob_bit != 1)) {
        throw DataError("line " + std::to_string(lineno) +
                        ": correctness values must be 0 or 1");
    }
    LogRow row;
    row.i = i;
    row.j = j;
    row.sample_id = std::move(sample_id);
    row.alice_correct = static_cast<uint8_t>(alice_bit);
    row.bob_correct = static_cast<uint8_t>(bob_bit);
    return row;
}

void finish_validation(const OutcomeLog& log) {
    std::set<std::tuple<int, int, std::string>> seen;
    bool present[2][2] = {};
    for (const auto& row : log.rows) {
        if (!seen.emplace(row.i, row.j, row.sample_id).second) {
            throw DataError("duplicate row for context " + context_name(row.i, row.j) +
                            " sample '" + row.sample_id + "'");
        }
        present[row.i - 1][row.j - 1] = true;
    }
    std::string missing;
    for (int i = 1; i <= 2; ++i) {
        for (int j = 1; j <= 2; ++j) {
            if (!present[i - 1][j - 1]) {
                if (!missing.empty()) missing += ", ";
                missing += context_name(i, j);
            }
        }
    }
    if (!missing.empty()) {
        throw DataError("missing contexts: " + missing);
    }
}

OutcomeLog parse_csv(std::istream& in) {
    OutcomeLog log;
    std::string line;
    int lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != kLogCsvHeader) {
                throw DataError("line " + std::to_string(lineno) +
                                ": expected header '" + kLogCsvHeader + "'");
            }
            saw_header = true;
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 5) {
            throw DataError("line " + std::to_string(lineno) + ": expected 5 fields, got " +
                            std::to_string(fields.size()));
        }
        try {
            log.rows.push_back(validate_row(static_cast<int>(parse_int(fields[0])),
                                            static_cast<int>(parse_int(fields[1])),
                                            fields[2], parse_int(fields[3]),
                                            parse_int(fields[4]), lineno));
        } catch (const DataError& e) {
            std::string what = e.what();
            if (what.rfind("line ", 0) == 0) throw;
            throw DataError("line " + std::to_string(lineno) + ": " + what);
        }
    }
    if (!saw_header) throw DataError("empty log: missing CSV header");
    return log;
}

OutcomeLog parse_jsonl(std::istream& in) {
    OutcomeLog log;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        try {
            log.rows.push_back(validate_row(j.at("context_i").get<int>(),
                                            j.at("context_j").get<int>(),
                                            j.at("sample_id").get<std::string>(),
                                            j.at("alice_correct").get<long long>(),
                                            j.at("bob_correct").get<long long>(), lineno));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (log.rows.empty()) throw DataError("empty log");
    return log;
}

}  // namespace

OutcomeLog parse_log(std::istream& in, LogFormat format) {
    OutcomeLog log = format == LogFormat::Csv ? parse_csv(in) : parse_jsonl(in);
    finish_validation(log);
    return log;
}

void write_csv(std::ostream& out, const OutcomeLog& log) {
    out << kLogCsvHeader << '\n';
    for (const auto& row : log.rows) {
        if (row.sample_id.find_first_of(",\n\r") != std::string::npos) {
            throw DataError("sample id '" + row.sample_id +
                            "' contains a comma or newline; not representable in CSV");
        }
        out << row.i << ',' << row.j << ',' << row.sample_id << ','
            << static_cast<int>(row.alice_correct) << ','
            << static_cast<int>(row.bob_correct) << '\n';
    }
}

IngestReport report(const OutcomeLog& log, RegimeThresholds thresholds) {
    finish_validation(log);

    IngestReport rep;
    rep.thresholds = thresholds;
    static const int order[4][2] = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
    bell::CorrelationQuad quad;
    double* cs[4] = {&quad.c11, &quad.c12, &quad.c21, &quad.c22};
    for (int ctx = 0; ctx < 4; ++ctx) {
        const int i = order[ctx][0], j = order[ctx][1];
        long rows = 0;
        long alice_ok = 0, bob_ok = 0;
        double product_sum = 0.0;
        for (const auto& row : log.rows) {
            if (row.i != i || row.j != j) continue;
            ++rows;
            alice_ok += row.alice_correct;
            bob_ok += row.bob_correct;
            const int a = row.alice_correct ? 1 : -1;
            const int b = row.bob_correct ? 1 : -1;
            product_sum += a * b;
        }
        ContextReport& cr = rep.contexts[ctx];
        cr.i = i;
        cr.j = j;
        cr.rows = rows;
        cr.acc_alice = static_cast<double>(alice_ok) / static_cast<double>(rows);
        cr.acc_bob = static_cast<double>(bob_ok) / static_cast<double>(rows);
        cr.c = product_sum / static_cast<double>(rows);
        *cs[ctx] = cr.c;
        rep.total_rows += rows;
    }
    rep.s = bell::chsh_s(quad);
    if (rep.s < thresholds.low) {
        rep.regime = "S ≪ 2: underfitting";
    } else if (rep.s <= thresholds.high) {
        rep.regime = "S ≈ 2: converged";
    } else {
        rep.regime = "S ≫ 2: critical regime";
    }
    return rep;
}

nlohmann::json report_json(const IngestReport& report) {
    nlohmann::json contexts = nlohmann::json::array();
    for (const auto& cr : report.contexts) {
        contexts.push_back({
            {"pair", "A" + std::to_string(cr.i) + "B" + std::to_string(cr.j)},
            {"rows", cr.rows},
            {"acc_alice", cr.acc_alice},
            {"acc_bob", cr.acc_bob},
            {"c", cr.c},
        });
    }
    return nlohmann::json{
        {"contexts", contexts},
        {"s", report.s},
        {"regime", report.regime},
        {"regime_thresholds",
         {{"low", report.thresholds.low}, {"high", report.thresholds.high}}},
        {"total_rows", report.total_rows},
    };
}

}  // namespace chshnet::ingest
