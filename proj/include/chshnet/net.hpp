#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chshnet/tasks.hpp"

namespace chshnet::nn {

// Dense 1-hidden-layer network: ReLU hidden activation, sigmoid outputs.
// Output 0 is the Alice head, output 1 the Bob head.
struct ArchConfig {
    int input_dim = 4;
    int hidden_size = 3;
    int output_dim = 2;

    bool operator==(const ArchConfig&) const = default;
};

enum class OptimizerKind { Sgd, Adam };

std::string optimizer_name(OptimizerKind kind);
OptimizerKind optimizer_from_name(const std::string& name);  // throws DataError

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::Adam;
    double learning_rate = 0.02;
    int epochs = 2000;
    uint64_t seed = 0;  // weight-init seed; training itself draws no randomness
};

// The documented reference configuration: Adam(lr 0.02), 2000 epochs,
// full batch, uniform Xavier weights with hidden biases at
// kHiddenBiasInit, summed per-head mean BCE loss.
TrainConfig reference_config();

struct Network {
    ArchConfig arch;
    uint64_t init_seed = 0;
    std::vector<double> w1;  // hidden_size x input_dim, row-major
    std::vector<double> b1;  // hidden_size
    std::vector<double> w2;  // output_dim x hidden_size, row-major
    std::vector<double> b2;  // output_dim

    size_t param_count() const;
    bool all_finite() const;
    bool operator==(const Network&) const = default;
};

// Gradients of the total loss, plus the hidden-layer contributions of
// each head's loss term taken separately. dw1/db1 are formed as the
// elementwise sum of the two per-head accumulators, so the
// decomposition identity is exact.
struct GradientSet {
    std::vector<double> dw1, db1, dw2, db2;
    std::vector<double> dw1_alice, dw1_bob;  // hidden_size x input_dim
    std::vector<double> db1_alice, db1_bob;  // hidden_size

    bool all_finite() const;
};

// Hidden biases start at +0.75. With 0/1 inputs a zero-bias hidden unit
// whose weights all go negative is dead on every sample and, since its
// entire gradient path is gated, frozen for the rest of training; a
// positive initial bias keeps every unit trainable. The value is part
// of the documented init convention and of config fingerprints.
inline constexpr double kHiddenBiasInit = 0.75;

// Weights drawn per layer from uniform [-a, +a), a = sqrt(6/(fan_in+fan_out));
// hidden biases kHiddenBiasInit, output biases zero. PRNG: std::mt19937_64
// seeded with `seed`; each draw maps the next 64-bit output to [0,1) via
// (x >> 11) * 2^-53. Draw order: W1 row-major, then W2 row-major.
Network init_network(const ArchConfig& arch, uint64_t seed);

struct Forward {
    double alice_prob = 0.0;
    double bob_prob = 0.0;
    std::vector<double> hidden;
};

// hidden = ReLU(W1 x + b1), probs = sigmoid(W2 hidden + b2).
// Throws NumericError("numerical overflow") on non-finite intermediates.
Forward forward(const Network& net, const tasks::BitSample& sample);

inline constexpr double kBceEps = 1e-7;  // probability clamp in the BCE loss

struct LossParts {
    double alice = 0.0;
    double bob = 0.0;
    double total() const { return alice + bob; }
};

// Per-head mean binary cross-entropy over all rows, probabilities clamped
// to [kBceEps, 1-kBceEps]. Total loss is the sum of the two head means.
LossParts loss_parts(const Network& net, const tasks::LabeledDataset& ds);
double loss(const Network& net, const tasks::LabeledDataset& ds);

// Exact gradients of loss() wrt all parameters (the clamp is part of the
// loss, so clamped probabilities contribute zero gradient). Fixed
// summation order: ascending row index. Throws NumericError if any
// gradient is non-finite.
GradientSet backward(const Network& net, const tasks::LabeledDataset& ds);

// Full-batch optimizer; owns Adam moment state. Updates parameters in the
// fixed block order w1, b1, w2, b2 so results are bitwise reproducible.
class Optimizer {
  public:
    Optimizer(OptimizerKind kind, double learning_rate, const ArchConfig& arch);
    void step(Network& net, const GradientSet& grads);

  private:
    OptimizerKind kind_;
    double lr_;
    long t_ = 0;
    std::vector<double> m_, v_;  // Adam first/second moments, flat layout
};

struct TrainResult {
    Network net;
    std::vector<double> loss_trace;  // one entry per epoch, measured after the update
};

// Full-batch training for cfg.epochs epochs. Deterministic given
// (net, cfg). Throws NumericError annotated with the epoch index if the
// loss or any weight becomes non-finite.
TrainResult train(Network net, const tasks::LabeledDataset& ds, const TrainConfig& cfg);

// Correctness under the pessimistic tie-break: predictions at exactly
// p == 0.5 count as incorrect regardless of label.
bool correct_prediction(double prob, int label);

// Versioned JSON document {format_version, arch, seed, W1, b1, W2, b2};
// weights are decimal strings that round-trip the exact binary64 values.
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);

}  // namespace chshnet::nn
