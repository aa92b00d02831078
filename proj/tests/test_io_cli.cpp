#include <cstdlib>
#include <fstream>
#include <sys/wait.h>
#include <random>
#include <string>

#include <doctest.h>

#include "koopgen/errors.hpp"
#include "koopgen/io.hpp"
#include "koopgen/pipeline.hpp"

using namespace koopgen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(KOOPGEN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream(path) << j.dump(2) << '\n';
}

}  // namespace

TEST_CASE("format_double round-trips doubles exactly") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> values{0.0, 1.0, -1.0, 1e-300, -3.5e123, 1.0 / 3.0};
    for (int k = 0; k < 50; ++k) values.push_back(std::ldexp(u(rng), k * 20 - 500));
    for (double v : values) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
        CHECK(s.find('e') != std::string::npos);  // scientific notation
    }
}

TEST_CASE("csv round trip is exact") {
    const fs::path dir = fresh_dir("koopgen_test_csv");
    Eigen::MatrixXd m = Eigen::MatrixXd::Random(7, 5);
    m(0, 0) = 1e-300;
    m(1, 1) = -1.0 / 3.0;
    write_csv(dir / "m.csv", m);
    const Eigen::MatrixXd back = read_csv(dir / "m.csv");
    REQUIRE(back.rows() == 7);
    REQUIRE(back.cols() == 5);
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a("") == 14695981039346656037ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    const fs::path dir = fresh_dir("koopgen_test_hash");
    std::ofstream(dir / "f.txt") << "a";
    CHECK(fnv1a_file(dir / "f.txt") == fnv1a("a"));
}

TEST_CASE("dictionary_manifest") {
    const Dictionary dict = monomials_2d(3, 2);
    const json m = dictionary_manifest(dict);
    CHECK(m.at("dimension") == 2);
    CHECK(m.at("size") == 12);
    CHECK(m.at("basis_id") == dict.basis_id());
    CHECK(m.at("entries").size() == 12);
    CHECK(m.at("entries")[1].at("label") == "x1");
    CHECK(m.at("entries")[10].at("exponents") == json::array({2, 2}));
}

TEST_CASE("ExperimentConfig validation") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(cfg.validate());  // defaults describe a valid experiment

    SUBCASE("unknown key rejected") {
        json j = cfg.to_json();
        j["lamda"] = 1e5;  // typo
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
    }
    SUBCASE("bad values rejected") {
        json j = cfg.to_json();
        j["per_axis"] = 0;
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
        j = cfg.to_json();
        j["sample_mode"] = "sobol";
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
        j = cfg.to_json();
        j["field"] = "linear:a=1";  // 1-D field with a 2-D dictionary
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
    }
    SUBCASE("json round trip") {
        cfg.lambda = 1e4;
        cfg.per_axis = 17;
        cfg.strict = false;
        const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
        CHECK(back.lambda == cfg.lambda);
        CHECK(back.per_axis == cfg.per_axis);
        CHECK(back.strict == cfg.strict);
        CHECK(back.dictionary == cfg.dictionary);
    }
}

TEST_CASE("training set save/load round trip and integrity check") {
    const fs::path dir = fresh_dir("koopgen_test_dataset");
    ExperimentConfig cfg;
    cfg.field = "linear:a=1";
    cfg.dictionary = "monomials1d:min_n=1,max_n=3";
    cfg.domain_min = {0.1};
    cfg.domain_max = {1.0};
    cfg.per_axis = 10;
    cfg.lambda = 1e4;
    const Dictionary dict = cfg.make_dictionary();
    const TrainingSet ts =
        generate(cfg.make_flow(), dict, cfg.make_plan(), cfg.make_gen_config());
    save_training_set(dir, ts, cfg, dict);

    ExperimentConfig loaded_cfg;
    const TrainingSet back = load_training_set(dir, &loaded_cfg);
    CHECK((back.X - ts.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.Y - ts.Y).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.basis_id == dict.basis_id());
    CHECK(back.dropped == 0);
    REQUIRE(back.samples.size() == ts.samples.size());
    CHECK((back.samples[3] - ts.samples[3]).norm() == 0.0);
    CHECK(loaded_cfg.lambda == cfg.lambda);

    // Tampering with the stored labels must be detected.
    {
        std::ofstream out(dir / "Y.csv", std::ios::app);
        out << "0\n";
    }
    CHECK_THROWS_AS(load_training_set(dir), ConfigError);
}

TEST_CASE("cli: full pipeline on a small problem") {
    const fs::path dir = fresh_dir("koopgen_test_cli");
    ExperimentConfig cfg;
    cfg.per_axis = 12;
    cfg.lambda = 1e4;
    cfg.output_dir = (dir / "out").string();
    write_json(dir / "config.json", cfg.to_json());
    const std::string base = "--config " + (dir / "config.json").string();

    CHECK(run_cli("generate " + base) == 0);
    CHECK(fs::exists(dir / "out" / "dataset" / "manifest.json"));
    CHECK(fs::exists(dir / "out" / "dataset" / "X.csv"));
    CHECK(fs::exists(dir / "out" / "dataset" / "Y.csv"));

    CHECK(run_cli("learn " + base + " --baseline 0.5") == 0);
    CHECK(fs::exists(dir / "out" / "model" / "L.csv"));
    CHECK(fs::exists(dir / "out" / "model" / "K.csv"));
    CHECK(fs::exists(dir / "out" / "model" / "L_log_re.csv"));
    CHECK(fs::exists(dir / "out" / "model" / "L_log_im.csv"));
    CHECK(fs::exists(dir / "out" / "model" / "eigenreport.json"));
    const Eigen::MatrixXd L = read_csv(dir / "out" / "model" / "L.csv");
    CHECK(L.rows() == 12);
    CHECK(L.cols() == 12);

    CHECK(run_cli("identify " + base) == 0);
    for (const char* f : {"f1_logfree.csv", "f2_logfree.csv", "f1_baseline_re.csv",
                          "f2_baseline_im.csv", "metrics.json"})
        CHECK(fs::exists(dir / "out" / "identify" / f));
    {
        std::ifstream in(dir / "out" / "identify" / "metrics.json");
        json metrics;
        in >> metrics;
        CHECK(metrics.at("log_free").size() == 2);
        CHECK(metrics.at("log_baseline").size() == 2);
        // dominant weight of f1 lands in the x2 cell of the table
        const Eigen::MatrixXd t1 = read_csv(dir / "out" / "identify" / "f1_logfree.csv");
        CHECK(t1(0, 1) == doctest::Approx(1.0).epsilon(1e-2));
    }

    CHECK(run_cli("lyapunov " + base) == 0);
    for (const char* f :
         {"theta.csv", "polynomial.txt", "verdict.json", "V_grid.csv", "lie_grid.csv"})
        CHECK(fs::exists(dir / "out" / "lyapunov" / f));
    {
        std::ifstream in(dir / "out" / "lyapunov" / "verdict.json");
        json v;
        in >> v;
        CHECK(v.contains("pass"));
        CHECK(v.contains("min_value"));
        CHECK(v.contains("max_reversed_lie"));
        CHECK(v.contains("reversed_lie_at_origin"));
    }
}

TEST_CASE("cli: exit codes") {
    const fs::path dir = fresh_dir("koopgen_test_cli_err");

    SUBCASE("unknown config key -> 2") {
        write_json(dir / "bad.json", {{"lamda", 1e5}});
        CHECK(run_cli("generate --config " + (dir / "bad.json").string()) == 2);
    }
    SUBCASE("learn without a dataset -> 2") {
        ExperimentConfig cfg;
        cfg.output_dir = (dir / "empty").string();
        write_json(dir / "config.json", cfg.to_json());
        CHECK(run_cli("learn --config " + (dir / "config.json").string()) == 2);
    }
    SUBCASE("strict blow-up -> 3, lenient -> 0") {
        ExperimentConfig cfg;
        cfg.field = "linear:a=20";
        cfg.dictionary = "monomials1d:min_n=1,max_n=1";
        cfg.domain_min = {0.0};
        cfg.domain_max = {0.01};
        cfg.per_axis = 5;
        cfg.lambda = 5.0;
        cfg.output_dir = (dir / "blow").string();
        write_json(dir / "blow.json", cfg.to_json());
        CHECK(run_cli("generate --config " + (dir / "blow.json").string()) == 3);
        CHECK(run_cli("generate --lenient --config " + (dir / "blow.json").string()) == 0);
    }
    SUBCASE("underdetermined fit -> 4") {
        ExperimentConfig cfg;
        cfg.field = "linear:a=1";
        cfg.dictionary = "monomials1d:min_n=1,max_n=3";
        cfg.domain_min = {0.1};
        cfg.domain_max = {1.0};
        cfg.per_axis = 2;  // 2 samples for 3 dictionary entries
        cfg.lambda = 1e4;
        cfg.output_dir = (dir / "thin").string();
        write_json(dir / "thin.json", cfg.to_json());
        REQUIRE(run_cli("generate --config " + (dir / "thin.json").string()) == 0);
        CHECK(run_cli("learn --config " + (dir / "thin.json").string()) == 4);
    }
    SUBCASE("theta file of wrong length -> 2") {
        ExperimentConfig cfg;
        cfg.per_axis = 12;
        cfg.lambda = 1e4;
        cfg.output_dir = (dir / "lyap").string();
        write_json(dir / "cfg.json", cfg.to_json());
        REQUIRE(run_cli("generate --config " + (dir / "cfg.json").string()) == 0);
        REQUIRE(run_cli("learn --config " + (dir / "cfg.json").string()) == 0);
        std::ofstream(dir / "theta.csv") << "1\n2\n";
        CHECK(run_cli("lyapunov --config " + (dir / "cfg.json").string() +
                      " --theta-file " + (dir / "theta.csv").string()) == 2);
    }
}
