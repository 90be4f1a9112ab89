// chshnet command line tool: train the four-context experiment, sweep
// capacities, trace S over epochs, enumerate the classical bound, ingest
// external prediction logs, and plot sweep results.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chshnet/bell.hpp"
#include "chshnet/error.hpp"
#include "chshnet/experiment.hpp"
#include "chshnet/ingest.hpp"
#include "chshnet/net.hpp"
#include "chshnet/svgplot.hpp"
#include "chshnet/textio.hpp"
#include "chshnet/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fingerprint of the result-determining configuration. Worker count,
// output paths and timestamps are deliberately excluded: they cannot
// change the numbers.
std::string manifest_hash(const json& resolved_config) {
    return chshnet::hex64(chshnet::fnv1a64(resolved_config.dump()));
}

json train_config_json(const chshnet::nn::TrainConfig& cfg) {
    return json{{"optimizer", chshnet::nn::optimizer_name(cfg.optimizer)},
                {"learning_rate", cfg.learning_rate},
                {"epochs", cfg.epochs},
                {"loss", "bce-sum-per-head-mean"},
                {"init", "uniform-xavier weights, hidden biases +" +
                             chshnet::format_double(chshnet::nn::kHiddenBiasInit)},
                {"dataset", "exhaustive 16-sample enumeration, full batch"}};
}

json manifest_json(const json& resolved_config, const std::string& hash,
                   const std::vector<std::string>& outputs) {
    return json{{"tool", "chshnet"},
                {"version", CHSHNET_VERSION},
                {"timestamp", chshnet::utc_timestamp()},
                {"config", resolved_config},
                {"outputs", outputs},
                {"manifest_hash", hash}};
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw chshnet::DataError("cannot open '" + path.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out.good()) throw chshnet::DataError("failed writing '" + path.string() + "'");
}

int default_workers() {
    if (const char* env = std::getenv("CHSHNET_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<int>(v);
        } catch (...) {
        }
        std::cerr << "warning: ignoring invalid CHSHNET_WORKERS='" << env << "'\n";
    }
    return 1;
}

int cmd_run(int n, uint64_t seed, const chshnet::nn::TrainConfig& train) {
    json config = train_config_json(train);
    config["subcommand"] = "run";
    config["n"] = n;
    config["master_seed"] = seed;
    const std::string hash = manifest_hash(config);

    const auto result = chshnet::experiment::run_contexts(n, seed, train);
    json out = chshnet::experiment::chsh_result_json(result);
    out["config"] = config;
    out["manifest_hash"] = hash;
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_sweep(const chshnet::experiment::ExperimentConfig& cfg, const std::string& out_dir) {
    json config = train_config_json(cfg.train);
    config["subcommand"] = "sweep";
    config["ns"] = cfg.hidden_sizes;
    config["repeats"] = cfg.repeats;
    config["master_seed"] = cfg.master_seed;
    const std::string hash = manifest_hash(config);

    const auto result = chshnet::experiment::sweep(cfg);

    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw chshnet::DataError("cannot create output directory '" + out_dir + "'");

    std::ostringstream csv;
    chshnet::experiment::write_sweep_csv(csv, result, hash);
    write_file(dir / "sweep.csv", csv.str());
    write_file(dir / "aggregates.json",
               chshnet::experiment::aggregates_json(result, hash).dump(2) + "\n");
    write_file(dir / "manifest.json",
               manifest_json(config, hash,
                             {(dir / "sweep.csv").string(),
                              (dir / "aggregates.json").string()})
                       .dump(2) +
                   "\n");

    std::cout << "n      trials  failed  mean_s     median_s   frac_gt2\n";
    for (const auto& [n, agg] : result.aggregates) {
        std::printf("%-6d %-7d %-7d %-10.4f %-10.4f %-8.2f\n", n, agg.trials, agg.failed,
                    agg.mean_s, agg.median_s, agg.frac_gt2);
    }
    std::cout << "wrote " << (dir / "sweep.csv").string() << '\n';
    return 0;
}

int cmd_lhv(const std::string& csv_path) {
    const auto table = chshnet::bell::lhv_enumerate();
    std::cout << "deterministic strategies: " << table.strategies.size() << '\n';
    std::cout << "max S = " << chshnet::format_double(table.max_s) << '\n';
    std::cout << "maximizers (S = +" << chshnet::format_double(table.max_s)
              << "): " << table.maximizers.size() << '\n';
    for (const auto& st : table.maximizers) {
        std::printf("  a1=%+d a2=%+d b1=%+d b2=%+d  S=%+g\n", st.a1, st.a2, st.b1, st.b2,
                    st.s);
    }
    std::cout << "note: " << table.note << '\n';
    if (!csv_path.empty()) {
        json config{{"subcommand", "lhv"}, {"version", CHSHNET_VERSION}};
        std::ostringstream csv;
        csv << "# manifest " << manifest_hash(config) << '\n';
        chshnet::bell::write_lhv_csv(csv, table);
        write_file(csv_path, csv.str());
        std::cout << "wrote " << csv_path << '\n';
    }
    return 0;
}

int cmd_trace(int n, uint64_t seed, int stride, const std::vector<int>& window,
              const chshnet::nn::TrainConfig& train, const std::string& out_path) {
    json config = train_config_json(train);
    config["subcommand"] = "trace";
    config["n"] = n;
    config["master_seed"] = seed;
    config["stride"] = stride;
    const std::string hash = manifest_hash(config);

    const auto trace = chshnet::experiment::epoch_trace(n, seed, train, stride);
    std::ostringstream csv;
    chshnet::experiment::write_trace_csv(csv, trace, hash);
    write_file(out_path, csv.str());

    const auto slope = chshnet::experiment::mean_slope(trace, window[0], window[1]);
    double s_final = trace.points.back().s;
    double s_max = trace.points.front().s;
    for (const auto& pt : trace.points) s_max = std::max(s_max, pt.s);

    std::cout << "mu_grad_s = " << chshnet::format_double(slope.mu_grad_s) << " (window "
              << slope.window_start << ".." << slope.window_end << ", points "
              << slope.points_used
              << ", telescoped = " << chshnet::format_double(slope.telescoped) << ")\n";
    std::cout << "final S = " << chshnet::format_double(s_final)
              << ", max S over trace = " << chshnet::format_double(s_max) << '\n';
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

int cmd_ingest(const std::string& in_path, const std::string& format, double regime_low,
               double regime_high) {
    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw chshnet::DataError("cannot open '" + in_path + "'");
    const auto fmt = format == "csv" ? chshnet::ingest::LogFormat::Csv
                                     : chshnet::ingest::LogFormat::Jsonl;
    const auto log = chshnet::ingest::parse_log(in, fmt);
    const auto rep =
        chshnet::ingest::report(log, chshnet::ingest::RegimeThresholds{regime_low, regime_high});

    json config{{"subcommand", "ingest"},
                {"format", format},
                {"regime_thresholds", {{"low", regime_low}, {"high", regime_high}}}};
    json out = chshnet::ingest::report_json(rep);
    out["manifest_hash"] = manifest_hash(config);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_plot(const std::string& sweep_path, const std::string& out_path) {
    std::ifstream in(sweep_path, std::ios::binary);
    if (!in) throw chshnet::DataError("cannot open '" + sweep_path + "'");
    const auto rows = chshnet::experiment::read_sweep_csv(in);

    std::vector<chshnet::svgplot::ScatterPoint> points;
    for (const auto& row : rows) {
        if (row.status != "ok") continue;
        points.push_back({row.n, row.repeat, row.s});
    }
    json config{{"subcommand", "plot"}, {"sweep", sweep_path}, {"out", out_path}};
    std::ostringstream svg;
    chshnet::svgplot::write_scatter(svg, points, manifest_hash(config));
    write_file(out_path, svg.str());
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CHSH statistics for two-head networks trained under four task contexts"};
    app.set_version_flag("--version", CHSHNET_VERSION);
    app.set_config("--config", "", "read option defaults from an INI key=value file");
    app.require_subcommand(1);

    // shared training options
    struct TrainFlags {
        int epochs = 2000;
        double lr = 0.02;
        std::string optimizer = "adam";
    };
    auto add_train_flags = [](CLI::App* cmd, TrainFlags& tf) {
        cmd->add_option("--epochs", tf.epochs, "training epochs")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--lr", tf.lr, "learning rate")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--optimizer", tf.optimizer, "optimizer")
            ->check(CLI::IsMember({"adam", "sgd"}))
            ->capture_default_str();
    };
    auto to_train_config = [](const TrainFlags& tf) {
        chshnet::nn::TrainConfig cfg;
        cfg.optimizer = chshnet::nn::optimizer_from_name(tf.optimizer);
        cfg.learning_rate = tf.lr;
        cfg.epochs = tf.epochs;
        return cfg;
    };

    // run
    auto* run = app.add_subcommand("run", "train the four contexts once, print JSON result");
    int run_n = 3;
    uint64_t run_seed = 0;
    TrainFlags run_tf;
    run->add_option("--n", run_n, "hidden layer size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    run->add_option("--seed", run_seed, "master seed")->capture_default_str();
    add_train_flags(run, run_tf);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "repeat the experiment over hidden sizes");
    std::vector<int> sweep_ns{2, 3, 4};
    int sweep_repeats = 50;
    uint64_t sweep_seed = 0;
    std::string sweep_out = "sweep_out";
    int sweep_workers = default_workers();
    TrainFlags sweep_tf;
    sweep->add_option("--ns", sweep_ns, "comma-separated hidden sizes")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep->add_option("--repeats", sweep_repeats, "repeats per hidden size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep->add_option("--seed", sweep_seed, "master seed")->capture_default_str();
    sweep->add_option("--out", sweep_out, "output directory")->capture_default_str();
    sweep->add_option("--workers", sweep_workers, "worker threads (env CHSHNET_WORKERS)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_train_flags(sweep, sweep_tf);

    // lhv
    auto* lhv = app.add_subcommand("lhv", "enumerate deterministic classical strategies");
    std::string lhv_csv;
    lhv->add_option("--csv", lhv_csv, "also write the strategy table as CSV");

    // trace
    auto* trace = app.add_subcommand("trace", "record S across training epochs");
    int trace_n = 3;
    uint64_t trace_seed = 0;
    int trace_stride = 10;
    std::vector<int> trace_window;
    std::string trace_out = "trace.csv";
    TrainFlags trace_tf;
    trace->add_option("--n", trace_n, "hidden layer size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    trace->add_option("--seed", trace_seed, "master seed")->capture_default_str();
    trace->add_option("--stride", trace_stride, "record every this many epochs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    trace->add_option("--window", trace_window, "slope window as start,end")
        ->delimiter(',');
    trace->add_option("--out", trace_out, "trace CSV path")->capture_default_str();
    add_train_flags(trace, trace_tf);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "compute the report from a prediction log");
    std::string ingest_in;
    std::string ingest_format = "csv";
    double regime_low = 1.9, regime_high = 2.1;
    ingest->add_option("--in", ingest_in, "log file path")->required();
    ingest->add_option("--format", ingest_format, "log format")
        ->check(CLI::IsMember({"csv", "jsonl"}))
        ->capture_default_str();
    ingest->add_option("--regime-low", regime_low, "S threshold below which to annotate underfitting")
        ->capture_default_str();
    ingest->add_option("--regime-high", regime_high, "S threshold above which to annotate the critical regime")
        ->capture_default_str();

    // plot
    auto* plot = app.add_subcommand("plot", "emit an SVG scatter of S versus hidden size");
    std::string plot_sweep, plot_out = "sweep.svg";
    plot->add_option("--sweep", plot_sweep, "sweep CSV path")->required();
    plot->add_option("--out", plot_out, "output SVG path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) {
            return cmd_run(run_n, run_seed, to_train_config(run_tf));
        }
        if (sweep->parsed()) {
            chshnet::experiment::ExperimentConfig cfg;
            cfg.train = to_train_config(sweep_tf);
            cfg.master_seed = sweep_seed;
            cfg.repeats = sweep_repeats;
            cfg.hidden_sizes = sweep_ns;
            cfg.workers = sweep_workers;
            return cmd_sweep(cfg, sweep_out);
        }
        if (lhv->parsed()) {
            return cmd_lhv(lhv_csv);
        }
        if (trace->parsed()) {
            if (trace_window.empty()) trace_window = {0, trace_tf.epochs};
            if (trace_window.size() != 2 || trace_window[0] >= trace_window[1]) {
                std::cerr << "error: --window expects start,end with start < end\n";
                return 2;
            }
            return cmd_trace(trace_n, trace_seed, trace_stride, trace_window,
                             to_train_config(trace_tf), trace_out);
        }
        if (ingest->parsed()) {
            return cmd_ingest(ingest_in, ingest_format, regime_low, regime_high);
        }
        if (plot->parsed()) {
            return cmd_plot(plot_sweep, plot_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
