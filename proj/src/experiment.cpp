#include "chshnet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "chshnet/error.hpp"
#include "chshnet/seeding.hpp"
#include "chshnet/textio.hpp"

namespace chshnet::experiment {

namespace {

struct ContextEval {
    bell::OutcomeVector alice;
    bell::OutcomeVector bob;
    double acc_alice = 0.0;
    double acc_bob = 0.0;
};

ContextEval evaluate_context(const nn::Network& net, const tasks::LabeledDataset& ds,
                             const tasks::ContextPair& pair) {
    ContextEval ev;
    ev.alice.context = pair.i;
    ev.alice.side = bell::Side::Alice;
    ev.bob.context = pair.j;
    ev.bob.side = bell::Side::Bob;
    int correct_a = 0, correct_b = 0;
    for (const auto& row : ds.rows) {
        const nn::Forward f = nn::forward(net, row.sample);
        const bool ca = nn::correct_prediction(f.alice_prob, row.alice_label);
        const bool cb = nn::correct_prediction(f.bob_prob, row.bob_label);
        ev.alice.values.push_back(ca ? 1 : -1);
        ev.bob.values.push_back(cb ? 1 : -1);
        correct_a += ca;
        correct_b += cb;
    }
    const double count = static_cast<double>(ds.rows.size());
    ev.acc_alice = correct_a / count;
    ev.acc_bob = correct_b / count;
    return ev;
}

bell::CorrelationQuad quad_from(const std::array<ContextEval, 4>& evals) {
    bell::CorrelationQuad q;
    q.c11 = bell::correlation(evals[0].alice, evals[0].bob);
    q.c12 = bell::correlation(evals[1].alice, evals[1].bob);
    q.c21 = bell::correlation(evals[2].alice, evals[2].bob);
    q.c22 = bell::correlation(evals[3].alice, evals[3].bob);
    return q;
}

}  // namespace

std::string config_fingerprint(int hidden_size, const nn::TrainConfig& cfg) {
    std::string canon = "arch=4-" + std::to_string(hidden_size) +
                        "-2;act=relu-sigmoid;loss=bce-sum-per-head-mean;eps=" +
                        format_double(nn::kBceEps) + ";init=uniform-xavier-w,hidden-bias+" +
                        format_double(nn::kHiddenBiasInit) + ";optimizer=" +
                        nn::optimizer_name(cfg.optimizer) +
                        ";lr=" + format_double(cfg.learning_rate) +
                        ";epochs=" + std::to_string(cfg.epochs) +
                        ";dataset=exhaustive16-fullbatch";
    return hex64(fnv1a64(canon));
}

ContextsRun run_contexts_full(int hidden_size, uint64_t master_seed,
                              const nn::TrainConfig& cfg,
                              const std::array<int, 4>& order) {
    if (hidden_size < 1) throw std::invalid_argument("hidden size must be >= 1");
    const auto& pairs = tasks::canonical_pairs();

    ContextsRun run;
    std::array<ContextEval, 4> evals;
    for (int slot = 0; slot < 4; ++slot) {
        const int c = order[slot];
        const auto& pair = pairs[c];
        const uint64_t seed = derive_seed(master_seed, static_cast<uint64_t>(c));
        const auto ds = tasks::enumerate_dataset(pair);
        nn::Network net = nn::init_network({4, hidden_size, 2}, seed);
        try {
            nn::TrainResult tr = nn::train(std::move(net), ds, cfg);
            run.final_losses[c] = tr.loss_trace.back();
            run.nets[c] = std::move(tr.net);
        } catch (const NumericError& e) {
            throw NumericError("context " + pair.name() + ": " + e.what());
        }
        evals[c] = evaluate_context(run.nets[c], ds, pair);
        run.result.context_seeds[c] = seed;
        run.result.accuracy[c] = {evals[c].acc_alice, evals[c].acc_bob};
    }

    run.result.quad = quad_from(evals);
    run.result.s = bell::chsh_s(run.result.quad);
    run.result.hidden_size = hidden_size;
    run.result.master_seed = master_seed;
    run.result.config_hash = config_fingerprint(hidden_size, cfg);
    return run;
}

bell::ChshResult run_contexts(int hidden_size, uint64_t master_seed,
                              const nn::TrainConfig& cfg) {
    return run_contexts_full(hidden_size, master_seed, cfg).result;
}

SweepResult sweep(const ExperimentConfig& cfg) {
    if (cfg.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (cfg.hidden_sizes.empty()) throw std::invalid_argument("hidden_sizes must be nonempty");
    for (int n : cfg.hidden_sizes) {
        if (n < 1) throw std::invalid_argument("hidden sizes must be >= 1");
    }

    struct Task {
        int n;
        int repeat;
    };
    std::vector<Task> tasks_list;
    tasks_list.reserve(cfg.hidden_sizes.size() * static_cast<size_t>(cfg.repeats));
    for (int n : cfg.hidden_sizes) {
        for (int r = 0; r < cfg.repeats; ++r) tasks_list.push_back({n, r});
    }

    SweepResult result;
    result.records.resize(tasks_list.size());

    auto run_one = [&](size_t idx) {
        const Task t = tasks_list[idx];
        SweepRecord rec;
        rec.n = t.n;
        rec.repeat = t.repeat;
        rec.seed = derive_seed(derive_seed(cfg.master_seed, static_cast<uint64_t>(t.n)),
                               static_cast<uint64_t>(t.repeat));
        const auto start = std::chrono::steady_clock::now();
        try {
            ContextsRun run = run_contexts_full(t.n, rec.seed, cfg.train);
            rec.result = std::move(run.result);
            rec.final_losses = run.final_losses;
        } catch (const std::exception& e) {
            rec.status = e.what();
            rec.result.hidden_size = t.n;
            rec.result.master_seed = rec.seed;
        }
        rec.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.records[idx] = std::move(rec);
    };

    const int workers = std::max(1, cfg.workers);
    if (workers == 1 || tasks_list.size() <= 1) {
        for (size_t i = 0; i < tasks_list.size(); ++i) run_one(i);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const size_t i = next.fetch_add(1);
                if (i >= tasks_list.size()) break;
                run_one(i);
            }
        };
        std::vector<std::thread> pool;
        const size_t count = std::min<size_t>(workers, tasks_list.size());
        pool.reserve(count);
        for (size_t w = 0; w < count; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Per-n aggregates over successful trials, in record order.
    std::map<int, std::vector<const SweepRecord*>> by_n;
    for (const auto& rec : result.records) by_n[rec.n].push_back(&rec);
    for (const auto& [n, recs] : by_n) {
        NAggregate agg;
        std::vector<double> svals;
        for (const auto* rec : recs) {
            if (rec->status != "ok") {
                ++agg.failed;
                continue;
            }
            ++agg.trials;
            svals.push_back(rec->result.s);
            agg.mean_s += rec->result.s;
            agg.mean_quad.c11 += rec->result.quad.c11;
            agg.mean_quad.c12 += rec->result.quad.c12;
            agg.mean_quad.c21 += rec->result.quad.c21;
            agg.mean_quad.c22 += rec->result.quad.c22;
            if (rec->result.s > 2.0) agg.frac_gt2 += 1.0;
        }
        if (agg.trials > 0) {
            const double count = agg.trials;
            agg.mean_s /= count;
            agg.mean_quad.c11 /= count;
            agg.mean_quad.c12 /= count;
            agg.mean_quad.c21 /= count;
            agg.mean_quad.c22 /= count;
            agg.frac_gt2 /= count;
            std::sort(svals.begin(), svals.end());
            const size_t mid = svals.size() / 2;
            agg.median_s = svals.size() % 2 == 1 ? svals[mid]
                                                 : 0.5 * (svals[mid - 1] + svals[mid]);
        }
        result.aggregates[n] = agg;
    }
    return result;
}

EpochTrace epoch_trace(int hidden_size, uint64_t master_seed,
                       const nn::TrainConfig& cfg, int stride) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (hidden_size < 1) throw std::invalid_argument("hidden size must be >= 1");

    const auto& pairs = tasks::canonical_pairs();
    std::array<tasks::LabeledDataset, 4> ds;
    std::array<nn::Network, 4> nets;
    std::vector<nn::Optimizer> opts;
    opts.reserve(4);
    for (int c = 0; c < 4; ++c) {
        ds[c] = tasks::enumerate_dataset(pairs[c]);
        nets[c] = nn::init_network({4, hidden_size, 2},
                                   derive_seed(master_seed, static_cast<uint64_t>(c)));
        opts.emplace_back(cfg.optimizer, cfg.learning_rate, nets[c].arch);
    }

    EpochTrace trace;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (int c = 0; c < 4; ++c) {
            try {
                const nn::GradientSet g = nn::backward(nets[c], ds[c]);
                opts[c].step(nets[c], g);
                if (!nets[c].all_finite()) throw NumericError("non-finite weights");
            } catch (const NumericError& e) {
                throw NumericError("context " + pairs[c].name() + ": " + e.what() +
                                   " at epoch " + std::to_string(epoch));
            }
        }
        if (epoch % stride == 0 || epoch == cfg.epochs) {
            TracePoint pt;
            pt.epoch = epoch;
            std::array<ContextEval, 4> evals;
            for (int c = 0; c < 4; ++c) {
                try {
                    evals[c] = evaluate_context(nets[c], ds[c], pairs[c]);
                    pt.losses[c] = nn::loss(nets[c], ds[c]);
                    if (!std::isfinite(pt.losses[c])) throw NumericError("non-finite loss");
                } catch (const NumericError& e) {
                    throw NumericError("context " + pairs[c].name() + ": " + e.what() +
                                       " at epoch " + std::to_string(epoch));
                }
            }
            pt.s = bell::chsh_s(quad_from(evals));
            trace.points.push_back(std::move(pt));
        }
    }
    return trace;
}

SlopeSummary mean_slope(const EpochTrace& trace, int window_start, int window_end) {
    SlopeSummary out;
    out.window_start = window_start;
    out.window_end = window_end;

    std::vector<const TracePoint*> pts;
    for (const auto& pt : trace.points) {
        if (pt.epoch >= window_start && pt.epoch <= window_end) pts.push_back(&pt);
    }
    out.points_used = static_cast<int>(pts.size());
    if (pts.size() < 2) {
        throw DataError("slope window contains fewer than 2 trace points");
    }
    double sum = 0.0;
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
        const double de = pts[k + 1]->epoch - pts[k]->epoch;
        sum += (pts[k + 1]->s - pts[k]->s) / de;
    }
    out.mu_grad_s = sum / static_cast<double>(pts.size() - 1);
    out.telescoped = (pts.back()->s - pts.front()->s) /
                     static_cast<double>(pts.back()->epoch - pts.front()->epoch);
    return out;
}

std::vector<std::optional<double>> gradient_conflict(const nn::Network& net,
                                                     const tasks::LabeledDataset& ds) {
    const nn::GradientSet g = nn::backward(net, ds);
    const int in = net.arch.input_dim;
    const int n = net.arch.hidden_size;
    constexpr double kNormFloor = 1e-12;

    std::vector<std::optional<double>> cosines(n);
    for (int h = 0; h < n; ++h) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (int k = 0; k < in; ++k) {
            const double a = g.dw1_alice[h * in + k];
            const double b = g.dw1_bob[h * in + k];
            dot += a * b;
            na += a * a;
            nb += b * b;
        }
        dot += g.db1_alice[h] * g.db1_bob[h];
        na += g.db1_alice[h] * g.db1_alice[h];
        nb += g.db1_bob[h] * g.db1_bob[h];
        na = std::sqrt(na);
        nb = std::sqrt(nb);
        if (na < kNormFloor || nb < kNormFloor) {
            cosines[h] = std::nullopt;
        } else {
            cosines[h] = std::clamp(dot / (na * nb), -1.0, 1.0);
        }
    }
    return cosines;
}

double sign_conflict_fraction(const std::vector<std::optional<double>>& cosines) {
    if (cosines.empty()) return 0.0;
    int negative = 0;
    for (const auto& c : cosines) {
        if (c.has_value() && *c < 0.0) ++negative;
    }
    return static_cast<double>(negative) / static_cast<double>(cosines.size());
}

ConflictTrace conflict_trace(int hidden_size, uint64_t seed,
                             const nn::TrainConfig& cfg,
                             const tasks::ContextPair& pair) {
    if (hidden_size < 1) throw std::invalid_argument("hidden size must be >= 1");
    const auto ds = tasks::enumerate_dataset(pair);
    nn::Network net = nn::init_network({4, hidden_size, 2}, seed);
    nn::Optimizer opt(cfg.optimizer, cfg.learning_rate, net.arch);

    ConflictTrace trace;
    trace.epochs.reserve(cfg.epochs);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        try {
            ConflictEpoch entry;
            entry.epoch = epoch;
            entry.unit_cosine = gradient_conflict(net, ds);  // gradient driving this update
            entry.conflict_fraction = sign_conflict_fraction(entry.unit_cosine);
            trace.epochs.push_back(std::move(entry));

            const nn::GradientSet g = nn::backward(net, ds);
            opt.step(net, g);
            if (!net.all_finite()) throw NumericError("non-finite weights");
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch));
        }
    }
    return trace;
}

double mean_conflict_fraction(const ConflictTrace& trace, int from_epoch, int to_epoch) {
    double sum = 0.0;
    int count = 0;
    for (const auto& e : trace.epochs) {
        if (e.epoch >= from_epoch && e.epoch <= to_epoch) {
            sum += e.conflict_fraction;
            ++count;
        }
    }
    if (count == 0) throw DataError("conflict window contains no epochs");
    return sum / count;
}

double loss_oscillation(std::span<const double> loss_trace, int warmup) {
    if (warmup < 0) throw std::invalid_argument("warmup must be >= 0");
    const size_t len = loss_trace.size();
    if (len <= static_cast<size_t>(warmup) + 1) {
        throw DataError("loss trace too short for oscillation window");
    }
    double diff_sum = 0.0;
    for (size_t i = warmup; i + 1 < len; ++i) {
        diff_sum += std::abs(loss_trace[i + 1] - loss_trace[i]);
    }
    double loss_sum = 0.0;
    for (size_t i = warmup; i < len; ++i) loss_sum += loss_trace[i];

    const double mean_diff = diff_sum / static_cast<double>(len - 1 - warmup);
    const double mean_loss = loss_sum / static_cast<double>(len - warmup);
    if (mean_loss == 0.0) return 0.0;
    return mean_diff / mean_loss;
}

namespace {

std::string sanitize_status(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& result,
                     const std::string& manifest_hash) {
    out << "# manifest " << manifest_hash << '\n';
    out << kSweepCsvHeader << '\n';
    for (const auto& rec : result.records) {
        const auto& r = rec.result;
        out << rec.n << ',' << rec.repeat << ',' << rec.seed << ','
            << format_double(r.quad.c11) << ',' << format_double(r.quad.c12) << ','
            << format_double(r.quad.c21) << ',' << format_double(r.quad.c22) << ','
            << format_double(r.s);
        for (int c = 0; c < 4; ++c) {
            out << ',' << format_double(r.accuracy[c].alice) << ','
                << format_double(r.accuracy[c].bob);
        }
        out << ',' << sanitize_status(rec.status) << '\n';
    }
}

void write_trace_csv(std::ostream& out, const EpochTrace& trace,
                     const std::string& manifest_hash) {
    out << "# manifest " << manifest_hash << '\n';
    out << kTraceCsvHeader << '\n';
    for (const auto& pt : trace.points) {
        out << pt.epoch << ',' << format_double(pt.s);
        for (double l : pt.losses) out << ',' << format_double(l);
        out << '\n';
    }
}

nlohmann::json aggregates_json(const SweepResult& result, const std::string& manifest_hash) {
    nlohmann::json per_n = nlohmann::json::object();
    for (const auto& [n, agg] : result.aggregates) {
        per_n[std::to_string(n)] = {
            {"mean_s", agg.mean_s},
            {"median_s", agg.median_s},
            {"frac_gt2", agg.frac_gt2},
            {"mean_quad",
             {{"c11", agg.mean_quad.c11},
              {"c12", agg.mean_quad.c12},
              {"c21", agg.mean_quad.c21},
              {"c22", agg.mean_quad.c22}}},
            {"trials", agg.trials},
            {"failed", agg.failed},
        };
    }
    return nlohmann::json{{"manifest_hash", manifest_hash}, {"per_n", per_n}};
}

nlohmann::json chsh_result_json(const bell::ChshResult& r) {
    nlohmann::json accuracy = nlohmann::json::object();
    static const char* names[4] = {"a1b1", "a1b2", "a2b1", "a2b2"};
    for (int c = 0; c < 4; ++c) {
        accuracy[names[c]] = {{"alice", r.accuracy[c].alice}, {"bob", r.accuracy[c].bob}};
    }
    return nlohmann::json{{"n", r.hidden_size},
                          {"master_seed", r.master_seed},
                          {"context_seeds", r.context_seeds},
                          {"quad",
                           {{"c11", r.quad.c11},
                            {"c12", r.quad.c12},
                            {"c21", r.quad.c21},
                            {"c22", r.quad.c22}}},
                          {"s", r.s},
                          {"accuracy", accuracy},
                          {"config_hash", r.config_hash}};
}

std::vector<SweepCsvRow> read_sweep_csv(std::istream& in) {
    std::vector<SweepCsvRow> rows;
    std::string line;
    int lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != kSweepCsvHeader) {
                throw DataError("sweep CSV line " + std::to_string(lineno) +
                                ": unexpected header");
            }
            saw_header = true;
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 17) {
            throw DataError("sweep CSV line " + std::to_string(lineno) +
                            ": expected 17 fields, got " + std::to_string(fields.size()));
        }
        SweepCsvRow row;
        try {
            row.n = static_cast<int>(parse_int(fields[0]));
            row.repeat = static_cast<int>(parse_int(fields[1]));
            row.s = parse_double(fields[7]);
        } catch (const DataError& e) {
            throw DataError("sweep CSV line " + std::to_string(lineno) + ": " + e.what());
        }
        row.status = fields[16];
        rows.push_back(std::move(row));
    }
    if (!saw_header) throw DataError("sweep CSV: missing header");
    return rows;
}

}  // namespace chshnet::experiment
