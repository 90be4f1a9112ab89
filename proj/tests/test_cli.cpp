#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& contents) {
    std::ofstream out(p, std::ios::binary);
    out << contents;
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        std::string tmpl = (fs::temp_directory_path() / "chshnet_cli_XXXXXX").string();
        char* res = mkdtemp(tmpl.data());
        REQUIRE(res != nullptr);
        return fs::path(res);
    }();
    return dir;
}

CmdResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = scratch_dir() / ("stdout_" + std::to_string(counter));
    const fs::path err = scratch_dir() / ("stderr_" + std::to_string(counter));
    ++counter;
    const std::string cmd = std::string(CHSHNET_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int rc = std::system(cmd.c_str());
    CmdResult result;
    result.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    result.out = read_file(out);
    result.err = read_file(err);
    return result;
}

size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    size_t count = 0, pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

TEST_CASE("version and usage errors") {
    CHECK(run_cli("--version").exit_code == 0);
    CHECK(run_cli("").exit_code == 2);             // missing subcommand
    CHECK(run_cli("run --bogus 1").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
}

TEST_CASE("run: deterministic JSON output with recomputable s") {
    const auto a = run_cli("run --n 3 --seed 7 --epochs 120");
    const auto b = run_cli("run --n 3 --seed 7 --epochs 120");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);

    const auto j = nlohmann::json::parse(a.out);
    const double s = j.at("s").get<double>();
    const auto& q = j.at("quad");
    CHECK(s == q.at("c11").get<double>() + q.at("c12").get<double>() +
                   q.at("c21").get<double>() - q.at("c22").get<double>());
    CHECK(s >= -4.0);
    CHECK(s <= 4.0);
    CHECK(j.at("n") == 3);
    CHECK(j.contains("manifest_hash"));
    CHECK(j.at("accuracy").contains("a2b2"));
}

TEST_CASE("run: invalid hidden size is a usage error") {
    CHECK(run_cli("run --n 0").exit_code == 2);
    CHECK(run_cli("run --n -3").exit_code == 2);
}

TEST_CASE("run at ample capacity under the reference config") {
    const auto res = run_cli("run --n 8 --seed 1");
    CHECK(res.exit_code == 0);
    const auto j = nlohmann::json::parse(res.out);
    const double s = j.at("s").get<double>();
    CHECK(s >= 0.0);
    CHECK(s <= 4.0);
    const auto& q = j.at("quad");
    CHECK(s == q.at("c11").get<double>() + q.at("c12").get<double>() +
                   q.at("c21").get<double>() - q.at("c22").get<double>());
}

TEST_CASE("lhv: prints the bound and maximizers, writes CSV") {
    const fs::path csv = scratch_dir() / "lhv.csv";
    const auto res = run_cli("lhv --csv " + csv.string());
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("max S = 2") != std::string::npos);
    CHECK(count_occurrences(res.out, "S=+2") == 8);

    std::istringstream in(read_file(csv));
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("# manifest ", 0) == 0);
    REQUIRE(std::getline(in, line));
    CHECK(line == "a1,a2,b1,b2,S");
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 16);
}

TEST_CASE("trace: CSV written, slope printed, bad window fails with exit 1") {
    const fs::path csv = scratch_dir() / "trace.csv";
    const auto res = run_cli("trace --n 2 --seed 3 --epochs 30 --stride 5 --window 0,30 --out " +
                             csv.string());
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("mu_grad_s = ") != std::string::npos);
    CHECK(res.out.find("max S over trace") != std::string::npos);
    const std::string contents = read_file(csv);
    CHECK(contents.find("epoch,s,loss_a1b1,loss_a1b2,loss_a2b1,loss_a2b2") !=
          std::string::npos);

    const auto outside = run_cli(
        "trace --n 2 --seed 3 --epochs 30 --stride 5 --window 40,50 --out " + csv.string());
    CHECK(outside.exit_code == 1);

    const auto malformed = run_cli(
        "trace --n 2 --seed 3 --epochs 30 --stride 5 --window 9 --out " + csv.string());
    CHECK(malformed.exit_code == 2);
}

TEST_CASE("sweep: outputs, summary, worker-count independence") {
    const fs::path dir1 = scratch_dir() / "sweep_w1";
    const fs::path dir4 = scratch_dir() / "sweep_w4";
    const std::string common = "sweep --ns 2,3 --repeats 2 --seed 42 --epochs 40 ";
    const auto r1 = run_cli(common + "--workers 1 --out " + dir1.string());
    const auto r4 = run_cli(common + "--workers 4 --out " + dir4.string());
    CHECK(r1.exit_code == 0);
    CHECK(r4.exit_code == 0);
    CHECK(r1.out.find("mean_s") != std::string::npos);

    const std::string csv1 = read_file(dir1 / "sweep.csv");
    const std::string csv4 = read_file(dir4 / "sweep.csv");
    CHECK(csv1 == csv4);
    CHECK(read_file(dir1 / "aggregates.json") == read_file(dir4 / "aggregates.json"));
    CHECK(fs::exists(dir1 / "manifest.json"));

    const auto manifest = nlohmann::json::parse(read_file(dir1 / "manifest.json"));
    CHECK(manifest.at("manifest_hash").get<std::string>().size() == 16);
    const std::string hash_line = "# manifest " + manifest.at("manifest_hash").get<std::string>();
    CHECK(csv1.find(hash_line) == 0);
}

TEST_CASE("sweep: single repeat yields one data row") {
    const fs::path dir = scratch_dir() / "sweep_single";
    const auto res =
        run_cli("sweep --ns 2 --repeats 1 --seed 1 --epochs 30 --out " + dir.string());
    CHECK(res.exit_code == 0);
    std::istringstream in(read_file(dir / "sweep.csv"));
    std::string line;
    int data_rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("n,", 0) == 0) continue;
        ++data_rows;
    }
    CHECK(data_rows == 1);
}

TEST_CASE("sweep: unwritable output directory fails with exit 1") {
    const fs::path blocker = scratch_dir() / "blocker";
    write_file(blocker, "file, not a directory");
    const auto res = run_cli("sweep --ns 2 --repeats 1 --seed 1 --epochs 10 --out " +
                             (blocker / "sub").string());
    CHECK(res.exit_code == 1);
}

TEST_CASE("ingest: report JSON on success, exit 1 with line info on bad input") {
    const fs::path good = scratch_dir() / "log.csv";
    write_file(good,
               "context_i,context_j,sample_id,alice_correct,bob_correct\n"
               "1,1,a,1,1\n1,2,a,1,1\n2,1,a,1,1\n2,2,a,1,1\n");
    const auto res = run_cli("ingest --in " + good.string() + " --format csv");
    CHECK(res.exit_code == 0);
    const auto j = nlohmann::json::parse(res.out);
    CHECK(j.at("s") == 2.0);
    CHECK(j.at("contexts").size() == 4);

    const fs::path dup = scratch_dir() / "dup.csv";
    write_file(dup,
               "context_i,context_j,sample_id,alice_correct,bob_correct\n"
               "1,1,a,1,1\n1,1,a,1,1\n1,2,a,1,1\n2,1,a,1,1\n2,2,a,1,1\n");
    const auto bad = run_cli("ingest --in " + dup.string() + " --format csv");
    CHECK(bad.exit_code == 1);
    CHECK(bad.err.find("duplicate") != std::string::npos);

    const fs::path broken = scratch_dir() / "broken.csv";
    write_file(broken,
               "context_i,context_j,sample_id,alice_correct,bob_correct\n"
               "1,1,a,1,7\n");
    const auto num = run_cli("ingest --in " + broken.string() + " --format csv");
    CHECK(num.exit_code == 1);
    CHECK(num.err.find("line 2") != std::string::npos);

    CHECK(run_cli("ingest --in /nonexistent/log.csv --format csv").exit_code == 1);
}

TEST_CASE("plot: SVG with exactly two reference lines; bad input fails") {
    const fs::path dir = scratch_dir() / "sweep_plot";
    REQUIRE(run_cli("sweep --ns 2,3 --repeats 2 --seed 9 --epochs 30 --out " + dir.string())
                .exit_code == 0);

    const fs::path svg = scratch_dir() / "plot.svg";
    const auto res =
        run_cli("plot --sweep " + (dir / "sweep.csv").string() + " --out " + svg.string());
    CHECK(res.exit_code == 0);
    const std::string contents = read_file(svg);
    CHECK(count_occurrences(contents, "class=\"refline\"") == 2);
    CHECK(contents.find("<svg") != std::string::npos);
    CHECK(count_occurrences(contents, "class=\"pt\"") == 4);  // 2 ns x 2 repeats

    const fs::path malformed = scratch_dir() / "bad.csv";
    write_file(malformed, "not,a,sweep\n1,2,3\n");
    CHECK(run_cli("plot --sweep " + malformed.string() + " --out " + svg.string())
              .exit_code == 1);

    const fs::path empty = scratch_dir() / "empty.csv";
    std::string header_only = read_file(dir / "sweep.csv");
    header_only = header_only.substr(0, header_only.find('\n', header_only.find('\n') + 1) + 1);
    write_file(empty, header_only);
    CHECK(run_cli("plot --sweep " + empty.string() + " --out " + svg.string()).exit_code ==
          1);
}

TEST_CASE("CHSHNET_WORKERS env var sets the default worker count") {
    const fs::path denv = scratch_dir() / "sweep_env";
    const fs::path done = scratch_dir() / "sweep_one";
    const std::string tail = "sweep --ns 2 --repeats 2 --seed 6 --epochs 30 --out ";
    static int counter = 900;
    const fs::path out = scratch_dir() / ("stdout_env_" + std::to_string(counter++));
    const std::string cmd = std::string("CHSHNET_WORKERS=3 ") + CHSHNET_CLI_PATH + " " +
                            tail + denv.string() + " > " + out.string() + " 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    REQUIRE(run_cli(tail + done.string() + " --workers 1").exit_code == 0);
    CHECK(read_file(denv / "sweep.csv") == read_file(done / "sweep.csv"));
}

TEST_CASE("config file supplies defaults, flags override") {
    const fs::path conf = scratch_dir() / "conf.ini";
    write_file(conf, "[run]\nn=2\nepochs=25\n");
    const auto from_conf = run_cli("--config " + conf.string() + " run --seed 1");
    CHECK(from_conf.exit_code == 0);
    CHECK(nlohmann::json::parse(from_conf.out).at("n") == 2);

    const auto overridden = run_cli("--config " + conf.string() + " run --seed 1 --n 4");
    CHECK(overridden.exit_code == 0);
    CHECK(nlohmann::json::parse(overridden.out).at("n") == 4);
}
