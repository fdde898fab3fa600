#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ajd/cli.hpp"
#include "ajd/parallel.hpp"
#include "ajd/model_io.hpp"

using namespace ajd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("ajd_cli_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_cir_spec(const TempDir& dir, double beta, double kappa, double alpha = 1.0) {
    const auto spec =
        make_cir(1.0, beta, alpha, 1.0, kappa, JumpDist::product({Exponential{2.0}}));
    const std::string path = dir.file("spec.json");
    save_spec(spec, path);
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CoutCapture {
    std::ostringstream buffer;
    std::streambuf* old;
    CoutCapture() : old(std::cout.rdbuf(buffer.rdbuf())) {}
    ~CoutCapture() { std::cout.rdbuf(old); }
};

}  // namespace

TEST_CASE("parse_complex forms") {
    CHECK_EQ(parse_complex("1.5"), Complex(1.5, 0.0));
    CHECK_EQ(parse_complex("2i"), Complex(0.0, 2.0));
    CHECK_EQ(parse_complex("i"), Complex(0.0, 1.0));
    CHECK_EQ(parse_complex("-i"), Complex(0.0, -1.0));
    CHECK_EQ(parse_complex("-0.3+0.7i"), Complex(-0.3, 0.7));
    CHECK_EQ(parse_complex("1e-2i"), Complex(0.0, 0.01));
    CHECK_EQ(parse_complex("2.5-1i"), Complex(2.5, -1.0));
}

TEST_CASE("check: admissible spec exits 0 with a JSON report, Feller violation exits 2") {
    TempDir dir("check");
    RunConfig cfg;
    cfg.subcommand = "check";
    cfg.spec_path = write_cir_spec(dir, -1.0, 1.0);
    cfg.outdir = dir.file("out");

    std::string stdout_text;
    {
        CoutCapture cap;
        CHECK_EQ(run(cfg), kExitOk);
        stdout_text = cap.buffer.str();
    }
    const Json report = Json::parse(stdout_text);
    CHECK_EQ(report.at("schema_version").get<int>(), 1);
    CHECK(report.at("validation").at("admissible").get<bool>());
    CHECK_EQ(report.at("stability").at("classification").get<std::string>(), "EXP_ERGODIC");

    cfg.spec_path = write_cir_spec(dir, -1.0, 1.0, 3.0);  // 2b <= alpha
    {
        CoutCapture cap;
        CHECK_EQ(run(cfg), kExitValidation);
        const Json bad = Json::parse(cap.buffer.str());
        CHECK_FALSE(bad.at("validation").at("admissible").get<bool>());
        CHECK_FALSE(bad.contains("stability"));
    }
}

TEST_CASE("missing or malformed input exits 2") {
    TempDir dir("badinput");
    RunConfig cfg;
    cfg.subcommand = "check";
    cfg.spec_path = dir.file("missing.json");
    CHECK_EQ(run(cfg), kExitValidation);

    std::ofstream(dir.file("broken.json")) << "{ not json";
    cfg.spec_path = dir.file("broken.json");
    CHECK_EQ(run(cfg), kExitValidation);

    RunConfig unknown;
    unknown.subcommand = "frobnicate";
    CHECK_EQ(run(unknown), kExitValidation);
}

TEST_CASE("simulate: byte-identical reruns and a round-tripping artifact") {
    TempDir dir("simulate");
    RunConfig cfg;
    cfg.subcommand = "simulate";
    cfg.spec_path = write_cir_spec(dir, -1.0, 1.0);
    cfg.outdir = dir.file("out1");
    cfg.x0 = {1.0};
    cfg.T = 5.0;
    cfg.dt = 1e-2;
    cfg.paths = 3;
    cfg.seed = 99;
    REQUIRE_EQ(run(cfg), kExitOk);

    cfg.outdir = dir.file("out2");
    REQUIRE_EQ(run(cfg), kExitOk);
    CHECK_EQ(slurp(dir.file("out1") + "/paths.csv"), slurp(dir.file("out2") + "/paths.csv"));

    const auto table = read_csv_artifact(dir.file("out1") + "/paths.csv");
    CHECK_EQ(table.kind, "paths");
    REQUIRE_EQ(table.columns.size(), 4);  // path_id, t, x_1, is_jump
    CHECK_EQ(table.columns[0], "path_id");
    CHECK_EQ(table.columns[3], "is_jump");
    long jump_rows = 0;
    for (const auto& row : table.rows) {
        CHECK(row[2] >= 0.0);  // volatility factor stays nonnegative
        CHECK((row[3] == 0.0 || row[3] == 1.0));
        jump_rows += row[3] == 1.0 ? 1 : 0;
    }
    CHECK(jump_rows > 0);
    // three paths, each with at least the 501 grid epochs
    CHECK(table.rows.size() >= 3 * 501);
}

TEST_CASE("simulate --skeleton-delta emits a uniform-grid skeleton") {
    TempDir dir("skeleton");
    RunConfig cfg;
    cfg.subcommand = "simulate";
    cfg.spec_path = write_cir_spec(dir, -1.0, 1.0);
    cfg.outdir = dir.file("out");
    cfg.x0 = {1.0};
    cfg.dt = 1e-2;
    cfg.skeleton_delta = 0.5;
    cfg.n = 40;
    REQUIRE_EQ(run(cfg), kExitOk);

    const auto table = read_csv_artifact(dir.file("out") + "/skeleton.csv");
    CHECK_EQ(table.kind, "skeleton");
    REQUIRE_EQ(table.rows.size(), 41);
    for (size_t k = 1; k < table.rows.size(); ++k)
        CHECK_EQ(table.rows[k][0] - table.rows[k - 1][0], doctest::Approx(0.5));
}

TEST_CASE("transform: artifact matches the initial condition and stays bounded") {
    TempDir dir("transform");
    RunConfig cfg;
    cfg.subcommand = "transform";
    cfg.spec_path = write_cir_spec(dir, -1.0, 1.0);
    cfg.outdir = dir.file("out");
    cfg.u_args = {"1i"};
    cfg.T = 2.0;
    cfg.dt = 1e-3;
    REQUIRE_EQ(run(cfg), kExitOk);

    const auto table = read_csv_artifact(dir.file("out") + "/transform.csv");
    CHECK_EQ(table.kind, "transform");
    REQUIRE_EQ(table.columns.size(), 5);  // t, phi_re, phi_im, psi1_re, psi1_im
    CHECK_EQ(table.rows.front()[1], 0.0);  // phi(0) = 0
    CHECK_EQ(table.rows.front()[3], 0.0);  // Re psi(0) = 0
    CHECK_EQ(table.rows.front()[4], 1.0);  // Im psi(0) = 1
    for (const auto& row : table.rows) CHECK(row[1] <= 1e-12);  // Re phi <= 0
}

TEST_CASE("transform rejects u outside the admissible domain with exit 2") {
    TempDir dir("transform_bad");
    RunConfig cfg;
    cfg.subcommand = "transform";
    cfg.spec_path = write_cir_spec(dir, -1.0, 1.0);
    cfg.outdir = dir.file("out");
    cfg.u_args = {"0.5"};  // positive real part on a volatility coordinate
    CHECK_EQ(run(cfg), kExitValidation);
}

TEST_CASE("stationary: JSON report with target and z-scores") {
    TempDir dir("stationary");
    RunConfig cfg;
    cfg.subcommand = "stationary";
    cfg.spec_path = write_cir_spec(dir, -2.0, 1.0);  // v = 1
    cfg.outdir = dir.file("out");
    cfg.x0 = {1.0};
    cfg.T = 300.0;
    cfg.dt = 2e-3;
    cfg.nbatches = 20;
    {
        CoutCapture cap;
        REQUIRE_EQ(run(cfg), kExitOk);
    }
    const Json j = Json::parse(slurp(dir.file("out") + "/stationary.json"));
    CHECK_EQ(j.at("schema_version").get<int>(), 1);
    CHECK_EQ(j.at("batch_count").get<int>(), 20);
    CHECK_EQ(j.at("target").at(0).get<double>(), doctest::Approx(1.0));
    CHECK(std::abs(j.at("z_scores").at(0).get<double>()) < 6.0);
    CHECK_EQ(j.at("classification").get<std::string>(), "EXP_ERGODIC");
}

TEST_CASE("fclt subcommand emits the diagnostic JSON") {
    TempDir dir("fclt");
    RunConfig cfg;
    cfg.subcommand = "fclt";
    cfg.spec_path = dir.file("cir.json");
    save_spec(make_cir(1.0, -1.0, 1.0), cfg.spec_path);
    cfg.outdir = dir.file("out");
    cfg.replicates = 60;
    cfg.horizon = 50.0;
    cfg.dt = 5e-3;
    {
        CoutCapture cap;
        REQUIRE_EQ(run(cfg), kExitOk);
    }
    const Json j = Json::parse(slurp(dir.file("out") + "/fclt.json"));
    CHECK_EQ(j.at("replicates").get<int>(), 60);
    CHECK(j.at("quantile_correlation").get<double>() > 0.9);
    CHECK_EQ(j.at("block_sizes").size(), 4);
}

TEST_CASE("transience: certificate and escape fractions split the two regimes") {
    TempDir dir("transience");
    RunConfig cfg;
    cfg.subcommand = "transience";
    cfg.outdir = dir.file("out");
    cfg.x0 = {1.0};
    cfg.paths = 60;
    cfg.escape_T = 25.0;
    cfg.dt = 2e-3;
    cfg.level = 100.0;

    cfg.spec_path = write_cir_spec(dir, -1.0, 4.0);  // effective rate +1
    {
        CoutCapture cap;
        REQUIRE_EQ(run(cfg), kExitOk);
    }
    Json j = Json::parse(slurp(dir.file("out") + "/transience.json"));
    CHECK(j.at("transient_certificate").get<bool>());
    CHECK_EQ(j.at("slope_at_zero").get<double>(), doctest::Approx(1.0));
    CHECK(j.at("escape").at("fraction").get<double>() >= 0.8);
    // cumulative exceedance series is monotone and ends at the total fraction
    const auto& series = j.at("escape").at("series");
    REQUIRE_EQ(series.size(), 25);
    double prev = 0.0;
    for (const auto& point : series) {
        const double f = point.at("fraction").get<double>();
        CHECK(f >= prev);
        prev = f;
    }
    CHECK_EQ(prev, doctest::Approx(j.at("escape").at("fraction").get<double>()));

    cfg.spec_path = write_cir_spec(dir, -1.0, 1.0);  // mirrored ergodic spec
    {
        CoutCapture cap;
        REQUIRE_EQ(run(cfg), kExitOk);
    }
    j = Json::parse(slurp(dir.file("out") + "/transience.json"));
    CHECK_FALSE(j.at("transient_certificate").get<bool>());
    CHECK(j.at("escape").at("fraction").get<double>() <= 0.05);
}

TEST_CASE("numeric failures exit 3") {
    TempDir dir("numeric");
    RunConfig cfg;
    cfg.subcommand = "simulate";
    cfg.spec_path = write_cir_spec(dir, -1.0, 4.0);  // transient
    cfg.outdir = dir.file("out");
    cfg.x0 = {3e8};  // intensity guard trips on the first step
    cfg.T = 0.01;
    cfg.dt = 1e-3;
    CHECK_EQ(run(cfg), kExitNumeric);
}

TEST_CASE("the installed binary wires flags through to run()") {
    TempDir dir("binary");
    const std::string spec = write_cir_spec(dir, -1.0, 1.0);
    const std::string out = dir.file("out");

    auto shell = [](const std::string& cmd) {
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    const std::string binary = AJD_CLI_BINARY;
    CHECK_EQ(shell(binary + " check " + spec + " > /dev/null"), kExitOk);
    CHECK_EQ(shell(binary + " simulate " + spec + " --x0 1 --T 2 --dt 0.01 --paths 2 --out " +
                   out + " > /dev/null"),
             kExitOk);
    CHECK(fs::exists(out + "/paths.csv"));
    CHECK_EQ(shell(binary + " transform " + spec + " --u 1i --T 1 --out " + out + " > /dev/null"),
             kExitOk);
    CHECK(fs::exists(out + "/transform.csv"));
    CHECK_EQ(shell(binary + " check " + dir.file("nope.json") + " > /dev/null 2>&1"),
             kExitValidation);
    CHECK_EQ(shell(binary + " --help > /dev/null"), kExitOk);
}

TEST_CASE("parallel_for honors AJD_THREADS and keeps per-index results") {
    setenv("AJD_THREADS", "3", 1);
    std::vector<double> parallel_out(101), serial_out(101);
    parallel_for(101, [&](std::size_t i) { parallel_out[i] = std::sqrt(static_cast<double>(i)); });
    for (std::size_t i = 0; i < 101; ++i) serial_out[i] = std::sqrt(static_cast<double>(i));
    CHECK(parallel_out == serial_out);
    unsetenv("AJD_THREADS");
}

TEST_CASE("calibrate: skeleton CSV to fit.json round trip") {
    TempDir dir("calibrate");
    RunConfig sim;
    sim.subcommand = "simulate";
    sim.spec_path = write_cir_spec(dir, -1.0, 0.0);
    {
        // jump-free CIR truth for the fit
        const auto spec = make_cir(1.0, -1.0, 1.0);
        save_spec(spec, sim.spec_path);
    }
    sim.outdir = dir.file("data");
    sim.x0 = {1.0};
    sim.dt = 2e-3;
    sim.skeleton_delta = 0.5;
    sim.n = 5000;
    sim.seed = 271828;
    REQUIRE_EQ(run(sim), kExitOk);

    RunConfig cal;
    cal.subcommand = "calibrate";
    cal.data_path = dir.file("data") + "/skeleton.csv";
    cal.spec_path = dir.file("template.json");
    auto tmpl = make_cir(1.0, -0.5, 1.0);
    save_spec(tmpl, cal.spec_path);
    cal.outdir = dir.file("out");
    cal.free_params = {"beta"};
    {
        CoutCapture cap;
        REQUIRE_EQ(run(cal), kExitOk);
    }
    const Json j = Json::parse(slurp(dir.file("out") + "/fit.json"));
    CHECK_EQ(j.at("schema_version").get<int>(), 1);
    CHECK_EQ(j.at("free").at(0).get<std::string>(), "beta");
    const double beta_hat = j.at("estimate").at(0).get<double>();
    CHECK(beta_hat > -1.4);
    CHECK(beta_hat < -0.6);
    CHECK_EQ(j.at("delta").get<double>(), doctest::Approx(0.5));
    CHECK_EQ(j.at("classification").get<std::string>(), "EXP_ERGODIC");
    CHECK_FALSE(j.contains("warning"));
}

TEST_CASE("calibrate flags a non-ergodic fitted model") {
    TempDir dir("calibrate_warn");
    // short transient skeleton; the empty free set keeps the transient
    // template as the fitted model, which the classification gate flags
    RunConfig sim;
    sim.subcommand = "simulate";
    sim.spec_path = write_cir_spec(dir, -1.0, 4.0);
    sim.outdir = dir.file("data");
    sim.x0 = {1.0};
    sim.dt = 2e-3;
    sim.skeleton_delta = 0.1;
    sim.n = 40;
    REQUIRE_EQ(run(sim), kExitOk);

    RunConfig cal;
    cal.subcommand = "calibrate";
    cal.data_path = dir.file("data") + "/skeleton.csv";
    cal.spec_path = sim.spec_path;
    cal.outdir = dir.file("out");
    {
        CoutCapture cap;
        REQUIRE_EQ(run(cal), kExitOk);
    }
    const Json j = Json::parse(slurp(dir.file("out") + "/fit.json"));
    CHECK_EQ(j.at("classification").get<std::string>(), "TRANSIENT_1D");
    CHECK(j.contains("warning"));
}
