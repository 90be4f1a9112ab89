#include "chshnet/net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "chshnet/error.hpp"
#include "chshnet/textio.hpp"

namespace chshnet::nn {

namespace {

bool finite_vec(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double sigmoid(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

double clamp_prob(double p) {
    if (p < kBceEps) return kBceEps;
    if (p > 1.0 - kBceEps) return 1.0 - kBceEps;
    return p;
}

// Sample inputs as 0.0/1.0 reals, no centering.
void sample_inputs(const tasks::BitSample& s, double x[4]) {
    x[0] = s.x1;
    x[1] = s.x2;
    x[2] = s.x3;
    x[3] = s.x4;
}

// The hidden width is generic; inputs are bound to the 4-bit samples and
// outputs to the two heads.
void require_canonical_io(const ArchConfig& arch) {
    if (arch.input_dim != 4 || arch.output_dim != 2) {
        throw std::invalid_argument("network must have input_dim=4 and output_dim=2");
    }
}

}  // namespace

std::string optimizer_name(OptimizerKind kind) {
    return kind == OptimizerKind::Sgd ? "sgd" : "adam";
}

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "adam") return OptimizerKind::Adam;
    throw DataError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

TrainConfig reference_config() {
    return TrainConfig{};
}

size_t Network::param_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
}

bool Network::all_finite() const {
    return finite_vec(w1) && finite_vec(b1) && finite_vec(w2) && finite_vec(b2);
}

bool GradientSet::all_finite() const {
    return finite_vec(dw1) && finite_vec(db1) && finite_vec(dw2) && finite_vec(db2);
}

Network init_network(const ArchConfig& arch, uint64_t seed) {
    if (arch.input_dim < 1 || arch.hidden_size < 1 || arch.output_dim < 1) {
        throw std::invalid_argument("network dimensions must be >= 1");
    }
    Network net;
    net.arch = arch;
    net.init_seed = seed;
    net.w1.resize(static_cast<size_t>(arch.hidden_size) * arch.input_dim);
    net.b1.assign(arch.hidden_size, kHiddenBiasInit);
    net.w2.resize(static_cast<size_t>(arch.output_dim) * arch.hidden_size);
    net.b2.assign(arch.output_dim, 0.0);

    std::mt19937_64 rng(seed);
    auto unit = [&rng]() {
        // top 53 bits -> [0, 1)
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    const double a1 = std::sqrt(6.0 / (arch.input_dim + arch.hidden_size));
    for (double& w : net.w1) w = a1 * (2.0 * unit() - 1.0);
    const double a2 = std::sqrt(6.0 / (arch.hidden_size + arch.output_dim));
    for (double& w : net.w2) w = a2 * (2.0 * unit() - 1.0);
    return net;
}

Forward forward(const Network& net, const tasks::BitSample& sample) {
    require_canonical_io(net.arch);
    const int in = net.arch.input_dim;
    const int n = net.arch.hidden_size;
    double x[4];
    sample_inputs(sample, x);

    Forward out;
    out.hidden.resize(n);
    for (int h = 0; h < n; ++h) {
        double z = net.b1[h];
        for (int k = 0; k < in; ++k) z += net.w1[h * in + k] * x[k];
        if (!std::isfinite(z)) throw NumericError("numerical overflow");
        out.hidden[h] = z > 0.0 ? z : 0.0;
    }
    double z2[2] = {net.b2[0], net.b2[1]};
    for (int o = 0; o < 2; ++o) {
        for (int h = 0; h < n; ++h) z2[o] += net.w2[o * n + h] * out.hidden[h];
        if (!std::isfinite(z2[o])) throw NumericError("numerical overflow");
    }
    out.alice_prob = sigmoid(z2[0]);
    out.bob_prob = sigmoid(z2[1]);
    return out;
}

LossParts loss_parts(const Network& net, const tasks::LabeledDataset& ds) {
    const double count = static_cast<double>(ds.rows.size());
    double sum_alice = 0.0, sum_bob = 0.0;
    for (const auto& row : ds.rows) {
        const Forward f = forward(net, row.sample);
        const double pa = clamp_prob(f.alice_prob);
        const double pb = clamp_prob(f.bob_prob);
        sum_alice -= row.alice_label ? std::log(pa) : std::log(1.0 - pa);
        sum_bob -= row.bob_label ? std::log(pb) : std::log(1.0 - pb);
    }
    return LossParts{sum_alice / count, sum_bob / count};
}

double loss(const Network& net, const tasks::LabeledDataset& ds) {
    return loss_parts(net, ds).total();
}

GradientSet backward(const Network& net, const tasks::LabeledDataset& ds) {
    require_canonical_io(net.arch);
    const int in = net.arch.input_dim;
    const int n = net.arch.hidden_size;
    const double inv_count = 1.0 / static_cast<double>(ds.rows.size());

    GradientSet g;
    g.dw1_alice.assign(static_cast<size_t>(n) * in, 0.0);
    g.dw1_bob.assign(static_cast<size_t>(n) * in, 0.0);
    g.db1_alice.assign(n, 0.0);
    g.db1_bob.assign(n, 0.0);
    g.dw2.assign(static_cast<size_t>(2) * n, 0.0);
    g.db2.assign(2, 0.0);

    double x[4];
    for (const auto& row : ds.rows) {
        sample_inputs(row.sample, x);

        std::vector<double> z1(n);
        std::vector<double> hidden(n);
        for (int h = 0; h < n; ++h) {
            double z = net.b1[h];
            for (int k = 0; k < in; ++k) z += net.w1[h * in + k] * x[k];
            z1[h] = z;
            hidden[h] = z > 0.0 ? z : 0.0;
        }
        double z2[2] = {net.b2[0], net.b2[1]};
        for (int o = 0; o < 2; ++o) {
            for (int h = 0; h < n; ++h) z2[o] += net.w2[o * n + h] * hidden[h];
        }
        const double prob[2] = {sigmoid(z2[0]), sigmoid(z2[1])};
        const double label[2] = {static_cast<double>(row.alice_label),
                                 static_cast<double>(row.bob_label)};

        // d(per-head mean BCE)/dz2; zero where the clamp flattens the loss.
        double gz2[2];
        for (int o = 0; o < 2; ++o) {
            const bool active = prob[o] > kBceEps && prob[o] < 1.0 - kBceEps;
            gz2[o] = active ? (prob[o] - label[o]) * inv_count : 0.0;
        }

        for (int o = 0; o < 2; ++o) {
            for (int h = 0; h < n; ++h) g.dw2[o * n + h] += gz2[o] * hidden[h];
            g.db2[o] += gz2[o];
        }
        for (int h = 0; h < n; ++h) {
            if (z1[h] <= 0.0) continue;  // ReLU gate (derivative 0 at the kink)
            const double ga = gz2[0] * net.w2[0 * n + h];
            const double gb = gz2[1] * net.w2[1 * n + h];
            for (int k = 0; k < in; ++k) {
                g.dw1_alice[h * in + k] += ga * x[k];
                g.dw1_bob[h * in + k] += gb * x[k];
            }
            g.db1_alice[h] += ga;
            g.db1_bob[h] += gb;
        }
    }

    g.dw1.resize(g.dw1_alice.size());
    for (size_t i = 0; i < g.dw1.size(); ++i) g.dw1[i] = g.dw1_alice[i] + g.dw1_bob[i];
    g.db1.resize(g.db1_alice.size());
    for (size_t i = 0; i < g.db1.size(); ++i) g.db1[i] = g.db1_alice[i] + g.db1_bob[i];

    if (!g.all_finite()) throw NumericError("non-finite gradient");
    return g;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, const ArchConfig& arch)
    : kind_(kind), lr_(learning_rate) {
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
    if (kind_ == OptimizerKind::Adam) {
        const size_t total = static_cast<size_t>(arch.hidden_size) * arch.input_dim +
                             arch.hidden_size +
                             static_cast<size_t>(arch.output_dim) * arch.hidden_size +
                             arch.output_dim;
        m_.assign(total, 0.0);
        v_.assign(total, 0.0);
    }
}

void Optimizer::step(Network& net, const GradientSet& grads) {
    std::vector<double>* params[4] = {&net.w1, &net.b1, &net.w2, &net.b2};
    const std::vector<double>* gs[4] = {&grads.dw1, &grads.db1, &grads.dw2, &grads.db2};

    if (kind_ == OptimizerKind::Sgd) {
        for (int blk = 0; blk < 4; ++blk) {
            auto& p = *params[blk];
            const auto& g = *gs[blk];
            for (size_t i = 0; i < p.size(); ++i) p[i] -= lr_ * g[i];
        }
        return;
    }

    // Adam, beta1=0.9 beta2=0.999 eps=1e-8, bias-corrected.
    ++t_;
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    size_t off = 0;
    for (int blk = 0; blk < 4; ++blk) {
        auto& p = *params[blk];
        const auto& g = *gs[blk];
        for (size_t i = 0; i < p.size(); ++i, ++off) {
            m_[off] = beta1 * m_[off] + (1.0 - beta1) * g[i];
            v_[off] = beta2 * v_[off] + (1.0 - beta2) * g[i] * g[i];
            const double mhat = m_[off] / bc1;
            const double vhat = v_[off] / bc2;
            p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

TrainResult train(Network net, const tasks::LabeledDataset& ds, const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");

    Optimizer opt(cfg.optimizer, cfg.learning_rate, net.arch);
    TrainResult out;
    out.loss_trace.reserve(cfg.epochs);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        try {
            const GradientSet g = backward(net, ds);
            opt.step(net, g);
            if (!net.all_finite()) throw NumericError("non-finite weights");
            const double l = loss(net, ds);
            if (!std::isfinite(l)) throw NumericError("non-finite loss");
            out.loss_trace.push_back(l);
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch));
        }
    }
    out.net = std::move(net);
    return out;
}

bool correct_prediction(double prob, int label) {
    if (prob > 0.5) return label == 1;
    if (prob < 0.5) return label == 0;
    return false;  // exact tie counts as incorrect
}

std::string network_to_json(const Network& net) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["arch"] = {{"input_dim", net.arch.input_dim},
                 {"hidden_size", net.arch.hidden_size},
                 {"output_dim", net.arch.output_dim}};
    j["seed"] = net.init_seed;
    auto dump = [](const std::vector<double>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (double x : v) arr.push_back(format_double(x));
        return arr;
    };
    j["W1"] = dump(net.w1);
    j["b1"] = dump(net.b1);
    j["W2"] = dump(net.w2);
    j["b2"] = dump(net.b2);
    return j.dump(2);
}

Network network_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("network JSON parse error: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != 1) {
            throw DataError("unsupported network format_version");
        }
        Network net;
        net.arch.input_dim = j.at("arch").at("input_dim").get<int>();
        net.arch.hidden_size = j.at("arch").at("hidden_size").get<int>();
        net.arch.output_dim = j.at("arch").at("output_dim").get<int>();
        net.init_seed = j.at("seed").get<uint64_t>();
        auto load = [](const nlohmann::json& arr, size_t expect) {
            if (!arr.is_array() || arr.size() != expect) {
                throw DataError("network JSON: wrong weight array size");
            }
            std::vector<double> v;
            v.reserve(expect);
            for (const auto& s : arr) v.push_back(parse_double(s.get<std::string>()));
            return v;
        };
        const size_t n = static_cast<size_t>(net.arch.hidden_size);
        net.w1 = load(j.at("W1"), n * net.arch.input_dim);
        net.b1 = load(j.at("b1"), n);
        net.w2 = load(j.at("W2"), static_cast<size_t>(net.arch.output_dim) * n);
        net.b2 = load(j.at("b2"), static_cast<size_t>(net.arch.output_dim));
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("network JSON: ") + e.what());
    }
}

}  // namespace chshnet::nn
