#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

// End-to-end tests of the installed command-line surface: exit codes, file
// outputs and byte-identical determinism. The binary path and the bundled
// data root come in through compile definitions.

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const fs::path& workdir) {
    fs::path out_file = workdir / "stdout.txt";
    fs::path err_file = workdir / "stderr.txt";
    std::string command = std::string("GLR_DATA_DIR='") + GLR_DATA_ROOT + "' '" + GLR_CLI_PATH +
                          "' " + args + " > '" + out_file.string() + "' 2> '" + err_file.string() +
                          "'";
    int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("glr_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n';
    return lines;
}

}  // namespace

TEST_CASE("stats prints the headline counts and writes the JSON report") {
    TempDir tmp;
    auto r = run_cli("stats toy --out " + tmp.path.string(), tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("toy: n=8 m=18 L=3 C=2") != std::string::npos);
    CHECK(fs::exists(tmp.path / "toy_stats.json"));
}

TEST_CASE("unknown model names are rejected with the valid list") {
    TempDir tmp;
    auto r = run_cli("evaluate --dataset toy --model gnn --out " + tmp.path.string(), tmp.path);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("valid: glr, lr_a, lr_x") != std::string::npos);
}

TEST_CASE("missing dataset directory is a fatal error") {
    TempDir tmp;
    auto r = run_cli("stats nowhere --out " + tmp.path.string(), tmp.path);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("nowhere") != std::string::npos);
}

TEST_CASE("evaluate: record cardinality, summary, and byte-identical determinism") {
    TempDir tmp;
    fs::path run1 = tmp.path / "run1";
    fs::path run2 = tmp.path / "run2";
    std::string args = "evaluate --dataset toy --model glr --model lr_x --k 4 --repeats 3 "
                       "--seed 42 --deterministic --out ";
    auto r1 = run_cli(args + run1.string(), tmp.path);
    REQUIRE(r1.exit_code == 0);
    CHECK(count_lines(slurp(run1 / "runs.jsonl")) == 24);  // 2 models x 4 folds x 3 repeats
    CHECK(fs::exists(run1 / "summary.csv"));
    CHECK(r1.out.find("glr") != std::string::npos);

    auto r2 = run_cli(args + run2.string(), tmp.path);
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(run1 / "runs.jsonl") == slurp(run2 / "runs.jsonl"));
    CHECK(slurp(run1 / "summary.csv") == slurp(run2 / "summary.csv"));
}

TEST_CASE("evaluate continues past an unloadable dataset and exits 2") {
    TempDir tmp;
    auto r = run_cli("evaluate --dataset toy --dataset missing_ds --model lr_x --k 2 --repeats 1 "
                     "--deterministic --out " + (tmp.path / "run").string(),
                     tmp.path);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("missing_ds") != std::string::npos);
    CHECK(count_lines(slurp(tmp.path / "run" / "runs.jsonl")) == 2);
}

TEST_CASE("homophily subcommand reports the triangle fixture at 1.0") {
    TempDir tmp;
    auto r = run_cli("homophily toy_triangle_same_label --out " + tmp.path.string(), tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("label_homophily=1.0000") != std::string::npos);
    CHECK(fs::exists(tmp.path / "toy_triangle_same_label_homophily.csv"));
}

TEST_CASE("sweep writes one row per fraction, byte-identical when deterministic") {
    TempDir tmp;
    std::string args = "sweep --dataset toy --model lr_x --fractions 0.25,0.5 --seed 7 "
                       "--deterministic --out ";
    auto r = run_cli(args + (tmp.path / "a").string(), tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(count_lines(slurp(tmp.path / "a" / "toy_lr_x_sweep.csv")) == 3);  // header + 2 rows
    REQUIRE(run_cli(args + (tmp.path / "b").string(), tmp.path).exit_code == 0);
    CHECK(slurp(tmp.path / "a" / "toy_lr_x_sweep.csv") ==
          slurp(tmp.path / "b" / "toy_lr_x_sweep.csv"));
}

TEST_CASE("report emits tradeoff and distributions, and names missing inputs") {
    TempDir tmp;
    fs::path run = tmp.path / "run";
    REQUIRE(run_cli("evaluate --dataset toy --model glr --model diffusion_a --k 4 --repeats 1 "
                    "--deterministic --out " + run.string(),
                    tmp.path)
                .exit_code == 0);

    SUBCASE("missing homophily inputs are fatal and named") {
        auto r = run_cli("report --run-dir " + run.string(), tmp.path);
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("toy_homophily.csv") != std::string::npos);
    }
    SUBCASE("with homophily data the report completes") {
        REQUIRE(run_cli("homophily toy --out " + run.string(), tmp.path).exit_code == 0);
        auto r = run_cli("report --run-dir " + run.string(), tmp.path);
        CHECK(r.exit_code == 0);
        CHECK(fs::exists(run / "tradeoff.csv"));
        CHECK(fs::exists(run / "homophily_distributions.csv"));
        CHECK(r.out.find("ranking skipped") != std::string::npos);  // single dataset
    }
}

TEST_CASE("convert produces a loadable canonical directory") {
    TempDir tmp;
    {
        std::ofstream edges(tmp.path / "raw_edges.txt");
        edges << "0 1\n1 2\n";
        std::ofstream features(tmp.path / "raw_features.txt");
        features << "0 0 1\n1 0 1\n2 1 1\n";
        std::ofstream labels(tmp.path / "raw_labels.txt");
        labels << "0 0\n1 0\n2 1\n";
    }
    fs::path out = tmp.path / "converted";
    auto r = run_cli("convert --edges " + (tmp.path / "raw_edges.txt").string() + " --features " +
                         (tmp.path / "raw_features.txt").string() + " --labels " +
                         (tmp.path / "raw_labels.txt").string() + " --out-dir " + out.string() +
                         " --name mini",
                     tmp.path);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("n=3") != std::string::npos);
    auto r2 = run_cli("stats " + out.string() + " --out " + tmp.path.string(), tmp.path);
    CHECK(r2.exit_code == 0);
    CHECK(r2.out.find("mini: n=3 m=4") != std::string::npos);
}
