#include "chshnet/bell.hpp"

#include <cmath>

#include "chshnet/error.hpp"
#include "chshnet/textio.hpp"

namespace chshnet::bell {

OutcomeVector outcomes(std::span<const uint8_t> predictions,
                       std::span<const uint8_t> labels) {
    if (predictions.size() != labels.size()) {
        throw DataError("outcomes: prediction/label length mismatch");
    }
    if (predictions.empty()) {
        throw DataError("outcomes: empty input");
    }
    OutcomeVector v;
    v.values.reserve(predictions.size());
    for (size_t k = 0; k < predictions.size(); ++k) {
        v.values.push_back(predictions[k] == labels[k] ? 1 : -1);
    }
    return v;
}

double correlation(const OutcomeVector& a, const OutcomeVector& b) {
    if (a.values.size() != b.values.size()) {
        throw DataError("correlation: length mismatch");
    }
    if (a.values.empty()) {
        throw DataError("correlation: empty input");
    }
    double sum = 0.0;
    for (size_t k = 0; k < a.values.size(); ++k) {
        sum += static_cast<double>(a.values[k]) * static_cast<double>(b.values[k]);
    }
    return sum / static_cast<double>(a.values.size());
}

double pearson(const OutcomeVector& a, const OutcomeVector& b) {
    if (a.values.size() != b.values.size()) {
        throw DataError("pearson: length mismatch");
    }
    const size_t n = a.values.size();
    if (n == 0) throw DataError("pearson: empty input");

    double mean_a = 0.0, mean_b = 0.0;
    for (size_t k = 0; k < n; ++k) {
        mean_a += a.values[k];
        mean_b += b.values[k];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double da = a.values[k] - mean_a;
        const double db = b.values[k] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) {
        throw DataError("degenerate outcome vector");
    }
    return cov / std::sqrt(var_a * var_b);
}

double chsh_s(const CorrelationQuad& quad) {
    return quad.c11 + quad.c12 + quad.c21 - quad.c22;
}

double tsirelson_bound() {
    return 2.0 * std::sqrt(2.0);
}

LhvTable lhv_enumerate() {
    LhvTable table;
    table.strategies.reserve(16);
    static const int signs[2] = {-1, +1};
    for (int a1 : signs) {
        for (int a2 : signs) {
            for (int b1 : signs) {
                for (int b2 : signs) {
                    LhvStrategy st{a1, a2, b1, b2, 0.0};
                    st.s = static_cast<double>(a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2);
                    table.strategies.push_back(st);
                }
            }
        }
    }
    table.max_s = table.strategies.front().s;
    for (const auto& st : table.strategies) {
        if (st.s > table.max_s) table.max_s = st.s;
    }
    for (const auto& st : table.strategies) {
        if (st.s == table.max_s) table.maximizers.push_back(st);
    }
    table.note =
        "every deterministic strategy has |S| = 2; convex mixtures of the 16 "
        "vertices cannot exceed the vertex maximum";
    return table;
}

void write_lhv_csv(std::ostream& out, const LhvTable& table) {
    out << "a1,a2,b1,b2,S\n";
    for (const auto& st : table.strategies) {
        out << st.a1 << ',' << st.a2 << ',' << st.b1 << ',' << st.b2 << ','
            << format_double(st.s) << '\n';
    }
}

}  // namespace chshnet::bell
