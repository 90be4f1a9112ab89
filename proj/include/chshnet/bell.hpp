#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace chshnet::bell {

enum class Side { Alice, Bob };

// Per-sample +/-1 correctness indicators for one head in one context.
struct OutcomeVector {
    std::vector<int> values;  // each entry +1 or -1
    int context = 0;          // task index i or j (1-based), 0 if unset
    Side side = Side::Alice;
};

// Elementwise correctness: +1 where prediction equals label, -1 otherwise.
// Throws DataError on length mismatch or empty input.
OutcomeVector outcomes(std::span<const uint8_t> predictions,
                       std::span<const uint8_t> labels);

// Mean of elementwise products, the raw <A*B> estimator. This, not the
// Pearson coefficient, is the canonical correlation here: it stays
// defined when one side is always correct (zero variance).
double correlation(const OutcomeVector& a, const OutcomeVector& b);

// Pearson coefficient; throws DataError("degenerate outcome vector")
// when either side has zero empirical variance. Coincides with
// correlation() exactly when both empirical means are zero.
double pearson(const OutcomeVector& a, const OutcomeVector& b);

struct CorrelationQuad {
    double c11 = 0.0, c12 = 0.0, c21 = 0.0, c22 = 0.0;
};

// S = c11 + c12 + c21 - c22
double chsh_s(const CorrelationQuad& quad);

// 2*sqrt(2), reported as a reference line only.
double tsirelson_bound();

struct ContextAccuracy {
    double alice = 0.0;
    double bob = 0.0;
};

// Result of one trained four-context experiment.
struct ChshResult {
    CorrelationQuad quad;
    double s = 0.0;
    std::array<ContextAccuracy, 4> accuracy{};   // contexts (1,1),(1,2),(2,1),(2,2)
    int hidden_size = 0;
    uint64_t master_seed = 0;
    std::array<uint64_t, 4> context_seeds{};
    std::string config_hash;
};

// Deterministic assignment of all four observables; there are 16.
struct LhvStrategy {
    int a1 = 1, a2 = 1, b1 = 1, b2 = 1;  // each +1 or -1
    double s = 0.0;                      // a1*b1 + a1*b2 + a2*b1 - a2*b2
};

struct LhvTable {
    std::vector<LhvStrategy> strategies;  // all 16, fixed enumeration order
    double max_s = 0.0;
    std::vector<LhvStrategy> maximizers;
    std::string note;
};

// Enumerates all 16 deterministic strategies. The polytope of classical
// behaviors is their convex hull, so no probabilistic mixture can exceed
// the vertex maximum returned here.
LhvTable lhv_enumerate();

// CSV with header a1,a2,b1,b2,S and one row per strategy.
void write_lhv_csv(std::ostream& out, const LhvTable& table);

}  // namespace chshnet::bell
