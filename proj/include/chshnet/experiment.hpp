#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chshnet/bell.hpp"
#include "chshnet/net.hpp"
#include "chshnet/tasks.hpp"

namespace chshnet::experiment {

struct ExperimentConfig {
    nn::TrainConfig train;
    uint64_t master_seed = 0;
    int repeats = 50;
    std::vector<int> hidden_sizes;
    int trace_every = 0;  // epoch stride for S traces; 0 = final-only
    int workers = 1;
};

// Fingerprint of everything that determines the numbers: architecture,
// optimizer, learning rate, epochs, loss/init conventions.
std::string config_fingerprint(int hidden_size, const nn::TrainConfig& cfg);

struct ContextsRun {
    bell::ChshResult result;
    std::array<double, 4> final_losses{};
    std::array<nn::Network, 4> nets;
};

// Trains the four canonical contexts as fully independent networks
// (per-context seed = derive_seed(master_seed, context index)), evaluates
// on all 16 samples, and assembles the correlation quad and S. The
// training order is irrelevant to the outcome; `order` exists so tests
// can demonstrate that structurally.
ContextsRun run_contexts_full(int hidden_size, uint64_t master_seed,
                              const nn::TrainConfig& cfg,
                              const std::array<int, 4>& order = {0, 1, 2, 3});
bell::ChshResult run_contexts(int hidden_size, uint64_t master_seed,
                              const nn::TrainConfig& cfg);

struct SweepRecord {
    int n = 0;
    int repeat = 0;
    uint64_t seed = 0;  // trial seed = derive_seed(derive_seed(master, n), repeat)
    bell::ChshResult result;
    std::array<double, 4> final_losses{};
    double wall_time_s = 0.0;
    std::string status = "ok";  // "ok" or the trial's error message
};

struct NAggregate {
    double mean_s = 0.0;
    double median_s = 0.0;
    double frac_gt2 = 0.0;
    bell::CorrelationQuad mean_quad;
    int trials = 0;
    int failed = 0;
};

struct SweepResult {
    std::vector<SweepRecord> records;      // ordered by (hidden_sizes order, repeat)
    std::map<int, NAggregate> aggregates;  // keyed by n, failed trials excluded
};

// repeats x |hidden_sizes| independent trials. Trial seeds are pure
// functions of (master_seed, n, repeat), so results do not depend on
// worker count or execution order. Individual trial failures are
// recorded in-row and the sweep continues.
SweepResult sweep(const ExperimentConfig& cfg);

struct TracePoint {
    int epoch = 0;  // number of completed epochs
    double s = 0.0;
    std::array<double, 4> losses{};  // per-context total loss after this epoch
};

struct EpochTrace {
    std::vector<TracePoint> points;
};

// Trains the four context models in lockstep (one epoch each per round,
// fixed order) and records S every `stride` epochs; the final epoch is
// always recorded. Seeds match run_contexts, so the final S coincides.
EpochTrace epoch_trace(int hidden_size, uint64_t master_seed,
                       const nn::TrainConfig& cfg, int stride);

struct SlopeSummary {
    double mu_grad_s = 0.0;   // mean of per-interval slopes inside the window
    double telescoped = 0.0;  // (S_end - S_start) / (epoch_end - epoch_start)
    int window_start = 0;
    int window_end = 0;
    int points_used = 0;
};

// Mean of instantaneous slopes dS/depoch between consecutive trace points
// with window_start <= epoch <= window_end. Equals the telescoped slope
// when points are uniformly spaced. Throws DataError if the window holds
// fewer than two points.
SlopeSummary mean_slope(const EpochTrace& trace, int window_start, int window_end);

// Per hidden unit: cosine similarity between the Alice-head and Bob-head
// gradient contributions to that unit's incoming weights and bias.
// nullopt when either contribution's norm is below 1e-12.
std::vector<std::optional<double>> gradient_conflict(const nn::Network& net,
                                                     const tasks::LabeledDataset& ds);

// Share of hidden units whose conflict cosine is defined and negative.
double sign_conflict_fraction(const std::vector<std::optional<double>>& cosines);

struct ConflictEpoch {
    int epoch = 0;
    std::vector<std::optional<double>> unit_cosine;
    double conflict_fraction = 0.0;
};

struct ConflictTrace {
    std::vector<ConflictEpoch> epochs;
};

// Trains a single network on `pair` while recording, each epoch, the
// per-unit conflict cosines of the gradient that drives that update.
ConflictTrace conflict_trace(int hidden_size, uint64_t seed,
                             const nn::TrainConfig& cfg,
                             const tasks::ContextPair& pair);

// Mean conflict fraction over trace entries with from <= epoch <= to.
double mean_conflict_fraction(const ConflictTrace& trace, int from_epoch, int to_epoch);

// Mean absolute successive loss difference after `warmup`, normalized by
// the mean loss over the same window; 0 for an identically zero window.
double loss_oscillation(std::span<const double> loss_trace, int warmup);

// --- file formats ------------------------------------------------------

inline constexpr const char* kSweepCsvHeader =
    "n,repeat,seed,c11,c12,c21,c22,s,"
    "acc_a1b1_alice,acc_a1b1_bob,acc_a1b2_alice,acc_a1b2_bob,"
    "acc_a2b1_alice,acc_a2b1_bob,acc_a2b2_alice,acc_a2b2_bob,status";

inline constexpr const char* kTraceCsvHeader =
    "epoch,s,loss_a1b1,loss_a1b2,loss_a2b1,loss_a2b2";

void write_sweep_csv(std::ostream& out, const SweepResult& result,
                     const std::string& manifest_hash);
void write_trace_csv(std::ostream& out, const EpochTrace& trace,
                     const std::string& manifest_hash);
nlohmann::json aggregates_json(const SweepResult& result, const std::string& manifest_hash);
nlohmann::json chsh_result_json(const bell::ChshResult& result);

struct SweepCsvRow {
    int n = 0;
    int repeat = 0;
    double s = 0.0;
    std::string status;
};

// Reads back the data rows of a sweep CSV (used by the plot command).
// Throws DataError on a malformed header or row.
std::vector<SweepCsvRow> read_sweep_csv(std::istream& in);

}  // namespace chshnet::experiment
