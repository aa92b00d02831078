#include "koopgen/pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#ifdef KOOPGEN_HAVE_OPENMP
#include <omp.h>
#endif

#include "koopgen/apps.hpp"
#include "koopgen/edmd.hpp"
#include "koopgen/errors.hpp"

namespace koopgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Report convention: entries below this magnitude are displayed as 0.
constexpr double kDisplayFloor = 1e-9;

void set_threads(const ExperimentConfig& cfg) {
#ifdef KOOPGEN_HAVE_OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
    if (const char* env = std::getenv("KOOPGEN_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) omp_set_num_threads(t);
    }
#else
    (void)cfg;
#endif
}

// (max_i+1) x (max_j+1) table of a weight component for the 2-D monomial
// family: row i, column j holds the weight of x1^i x2^j.
Eigen::MatrixXd weight_table(const Dictionary& dict, const Eigen::VectorXd& w) {
    int max_i = 0, max_j = 0;
    for (const auto& e : dict.entries) {
        max_i = std::max(max_i, e.exponents[0]);
        max_j = std::max(max_j, e.exponents[1]);
    }
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(max_i + 1, max_j + 1);
    for (int k = 0; k < dict.size(); ++k) {
        const auto& e = dict.entries[k].exponents;
        const double v = w[k];
        table(e[0], e[1]) = std::abs(v) < kDisplayFloor ? 0.0 : v;
    }
    return table;
}

json eigen_report(const EigenPairs& pairs) {
    json vals = json::array();
    for (int i = 0; i < pairs.values.size(); ++i)
        vals.push_back({{"re", pairs.values[i].real()}, {"im", pairs.values[i].imag()}});
    return vals;
}

Eigen::MatrixXd require_model_matrix(const fs::path& dir, const std::string& name) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) throw ConfigError("missing model file: " + p.string());
    return read_csv(p);
}

}  // namespace

int run_generate(const ExperimentConfig& cfg) {
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    set_threads(cfg);
    try {
        const auto dict = cfg.make_dictionary();
        GenOptions opt;
        opt.strict = cfg.strict;
        opt.threads = cfg.threads;
        const TrainingSet ts =
            generate(cfg.make_flow(), dict, cfg.make_plan(), cfg.make_gen_config(), opt);
        save_training_set(fs::path(cfg.output_dir) / "dataset", ts, cfg, dict);
        std::cout << "dataset: " << ts.X.rows() << "x" << ts.X.cols()
                  << (ts.dropped ? " (dropped " + std::to_string(ts.dropped) + ")" : "")
                  << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "generation failed: " << e.what() << "\n";
        return kExitGeneration;
    }
}

int run_learn(const ExperimentConfig& cfg) {
    TrainingSet ts;
    ExperimentConfig data_cfg;
    try {
        ts = load_training_set(fs::path(cfg.output_dir) / "dataset", &data_cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    set_threads(cfg);
    try {
        const auto dict = data_cfg.make_dictionary();
        const GeneratorMatrix gm = fit_generator(ts);
        const fs::path dir = fs::path(cfg.output_dir) / "model";
        fs::create_directories(dir);
        write_csv(dir / "L.csv", gm.L);

        json manifest = {{"config", data_cfg.to_json()},
                         {"dictionary", dictionary_manifest(dict)},
                         {"residual", gm.residual},
                         {"rank_used", gm.rank_used},
                         {"degenerate", gm.degenerate},
                         {"hash_L", fnv1a_file(dir / "L.csv")}};

        json report = {{"generator", eigen_report(eigen(gm.L.cast<std::complex<double>>(),
                                                        SpectrumSource::Generator))},
                       {"residual", gm.residual}};

        if (cfg.baseline_s > 0.0) {
            const KoopmanMatrix km = fit_koopman(data_cfg.make_flow(), dict,
                                                 data_cfg.make_plan(), cfg.baseline_s);
            write_csv(dir / "K.csv", km.K);
            const auto [L_log, diag] = log_baseline(km);
            write_csv(dir / "L_log_re.csv", L_log.real());
            write_csv(dir / "L_log_im.csv", L_log.imag());
            manifest["baseline_s"] = cfg.baseline_s;
            manifest["baseline_eigvec_condition"] = diag.eigvec_condition;
            manifest["baseline_max_imag"] = diag.max_imag;
            report["koopman"] = eigen_report(
                eigen(km.K.cast<std::complex<double>>(), SpectrumSource::Koopman));
            report["log_baseline"] = eigen_report(eigen(L_log, SpectrumSource::LogBaseline));
        }

        std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
        std::ofstream(dir / "eigenreport.json") << report.dump(2) << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "fit failed: " << e.what() << "\n";
        return kExitFit;
    }
}

int run_identify(const ExperimentConfig& cfg) {
    ExperimentConfig data_cfg;
    TrainingSet ts;
    try {
        ts = load_training_set(fs::path(cfg.output_dir) / "dataset", &data_cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const auto dict = data_cfg.make_dictionary();
        const auto field = data_cfg.make_field();
        const auto plan = data_cfg.make_plan();
        const fs::path model = fs::path(cfg.output_dir) / "model";
        const fs::path dir = fs::path(cfg.output_dir) / "identify";
        fs::create_directories(dir);

        GeneratorMatrix gm;
        gm.L = require_model_matrix(model, "L.csv");
        gm.basis_id = dict.basis_id();
        gm.cfg = data_cfg.make_gen_config();

        std::vector<int> coords(field.dimension);
        for (int k = 0; k < field.dimension; ++k) coords[k] = k;

        const auto rep = identify_field(gm, dict, field, coords, plan);
        json metrics = {{"log_free", json::array()}};
        for (const auto& cw : rep.coordinates) {
            write_csv(dir / ("f" + std::to_string(cw.coordinate + 1) + "_logfree.csv"),
                      weight_table(dict, cw.weights.real()));
            metrics["log_free"].push_back({{"coordinate", cw.coordinate + 1},
                                           {"max_grid_error", cw.max_grid_error},
                                           {"rms_grid_error", cw.rms_grid_error},
                                           {"max_imag_weight", cw.max_imag_weight}});
        }

        if (fs::exists(model / "K.csv")) {
            KoopmanMatrix km;
            km.K = read_csv(model / "K.csv");
            km.basis_id = dict.basis_id();
            std::ifstream min(model / "manifest.json");
            json mj;
            min >> mj;
            km.s = mj.value("baseline_s", 0.5);
            const auto brep =
                identify_field_log_baseline(km, dict, field, coords, plan);
            const auto [L_log, diag] = log_baseline(km);
            (void)diag;
            metrics["log_baseline"] = json::array();
            for (const auto& cw : brep.coordinates) {
                const std::string stem = "f" + std::to_string(cw.coordinate + 1);
                write_csv(dir / (stem + "_baseline_re.csv"),
                          weight_table(dict, cw.weights.real()));
                write_csv(dir / (stem + "_baseline_im.csv"),
                          weight_table(dict, cw.weights.imag()));
                metrics["log_baseline"].push_back(
                    {{"coordinate", cw.coordinate + 1},
                     {"max_grid_error", cw.max_grid_error},
                     {"rms_grid_error", cw.rms_grid_error},
                     {"max_imag_weight", cw.max_imag_weight}});
            }
        }
        std::ofstream(dir / "metrics.json") << metrics.dump(2) << '\n';
        return kExitOk;
    } catch (const CoordinateNotInDictionaryError& e) {
        std::cerr << "identify failed: " << e.what() << "\n";
        return kExitFit;
    } catch (const std::exception& e) {
        std::cerr << "identify failed: " << e.what() << "\n";
        return kExitFit;
    }
}

int run_lyapunov(const ExperimentConfig& cfg, const LyapunovOptions& opt) {
    ExperimentConfig data_cfg;
    TrainingSet ts;
    try {
        ts = load_training_set(fs::path(cfg.output_dir) / "dataset", &data_cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const auto dict = data_cfg.make_dictionary();
        const auto plan = data_cfg.make_plan();
        const fs::path dir = fs::path(cfg.output_dir) / "lyapunov";
        fs::create_directories(dir);

        GeneratorMatrix gm;
        gm.L = require_model_matrix(fs::path(cfg.output_dir) / "model", "L.csv");
        gm.basis_id = dict.basis_id();
        gm.cfg = data_cfg.make_gen_config();

        LyapunovCandidate cand;
        if (!opt.theta_file.empty()) {
            const Eigen::MatrixXd t = read_csv(opt.theta_file);
            if (t.size() != dict.size())
                throw ConfigError("theta file has wrong length");
            cand.theta.coefficients =
                Eigen::VectorXd(t.reshaped()).cast<std::complex<double>>();
            cand.theta.basis_id = dict.basis_id();
            cand.value_at_origin =
                (evaluate(dict, Eigen::VectorXd::Zero(dict.dimension)) * gm.L *
                 cand.theta.coefficients.real())(0);
        } else {
            cand = fit_lyapunov(gm, dict, plan, ts.X);
        }

        const auto verdict = verify_candidate(cand, gm, dict, plan);

        const Eigen::VectorXd theta = cand.theta.coefficients.real();
        write_csv(dir / "theta.csv", theta);

        // Human-readable polynomial; terms below the display floor dropped.
        std::ostringstream poly;
        bool first = true;
        for (int i = 0; i < dict.size(); ++i) {
            if (std::abs(theta[i]) < kDisplayFloor) continue;
            if (!first) poly << (theta[i] >= 0 ? " + " : " - ");
            else if (theta[i] < 0) poly << "-";
            poly << std::abs(theta[i]) << "*" << dict.entries[i].label;
            first = false;
        }
        std::ofstream(dir / "polynomial.txt") << poly.str() << '\n';

        json vj = {{"pass", verdict.pass},
                   {"detail", verdict.detail},
                   {"min_value", verdict.min_value},
                   {"max_reversed_lie", verdict.max_reversed_lie},
                   {"value_at_origin", cand.value_at_origin},
                   {"reversed_lie_at_origin", -cand.value_at_origin},
                   {"fit_residual", cand.fit_residual},
                   {"note",
                    "value_at_origin is the forward-convention Z(0) L theta; "
                    "reversed_lie_at_origin is the Lie derivative of V along the "
                    "reversed dynamics at the origin"}};
        std::ofstream(dir / "verdict.json") << vj.dump(2) << '\n';

        // Plot-ready grids: x1, x2, value.
        const Eigen::VectorXd Ltheta = gm.L * theta;
        SamplePlan grid = plan;
        grid.per_axis = 50;
        grid.mode = SamplePlan::Mode::Grid;
        std::ofstream vg(dir / "V_grid.csv"), lg(dir / "lie_grid.csv");
        for (const auto& x : grid.points()) {
            const Eigen::RowVectorXd z = evaluate(dict, x);
            vg << format_double(x[0]) << ',' << format_double(x[1]) << ','
               << format_double((z * theta)(0)) << '\n';
            lg << format_double(x[0]) << ',' << format_double(x[1]) << ','
               << format_double(-(z * Ltheta)(0)) << '\n';
        }

        std::cout << "V(x) = " << poly.str() << "\n"
                  << "origin value: " << cand.value_at_origin << "\n"
                  << "verdict: " << (verdict.pass ? "PASS" : "FAIL") << "\n";
        if (opt.require_pass && !verdict.pass) return kExitVerify;
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "lyapunov failed: " << e.what() << "\n";
        return kExitFit;
    }
}

namespace {

json default_expected(bool quick) {
    json e = {{"dominant_tol", quick ? 5e-3 : 2e-4},
              {"spurious_tol", quick ? 5e-3 : 2e-4},
              {"baseline_ratio_min", 10.0},
              {"f1_im_min", 1e-3},
              {"f2_im_min", 1e-2},
              {"lyap_rel_tol", quick ? 0.25 : 0.10},
              {"origin_band", json::array({quick ? -0.3 : -0.12, quick ? 0.1 : -0.02})},
              {"lyap_coeffs",
               {{"x1^2", 1.39}, {"x1*x2", -1.56}, {"x2^2", 1.16}, {"x1^2*x2^2", 0.74}}}};
    return e;
}

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

}  // namespace

int run_reproduce(const ReproduceOptions& opt) {
    json expected = default_expected(opt.quick);
    if (!opt.expected_file.empty()) {
        std::ifstream in(opt.expected_file);
        if (!in) {
            std::cerr << "cannot open expected-tables file: " << opt.expected_file << "\n";
            return kExitConfig;
        }
        try {
            json j;
            in >> j;
            for (const char* key :
                 {"dominant_tol", "spurious_tol", "baseline_ratio_min", "f1_im_min",
                  "f2_im_min", "lyap_rel_tol", "origin_band", "lyap_coeffs"})
                if (!j.contains(key)) throw ConfigError(std::string("missing key: ") + key);
            expected = j;
        } catch (const std::exception& e) {
            std::cerr << "bad expected-tables file: " << e.what() << "\n";
            return kExitConfig;
        }
    }

    ExperimentConfig cfg;
    cfg.output_dir = opt.work_dir;
    cfg.baseline_s = 0.5;
    if (opt.quick) {
        cfg.per_axis = 30;
        cfg.lambda = 1e4;
    }

    int rc = run_generate(cfg);
    if (rc != kExitOk) return rc;
    rc = run_learn(cfg);
    if (rc != kExitOk) return rc;
    rc = run_identify(cfg);
    if (rc != kExitOk) return rc;
    rc = run_lyapunov(cfg);
    if (rc != kExitOk) return rc;

    const auto dict = cfg.make_dictionary();
    const fs::path out(cfg.output_dir);
    const Eigen::MatrixXd L = read_csv(out / "model" / "L.csv");
    std::ifstream min(out / "identify" / "metrics.json");
    json metrics;
    min >> metrics;
    std::ifstream vin(out / "lyapunov" / "verdict.json");
    json verdict;
    vin >> verdict;
    const Eigen::MatrixXd theta = read_csv(out / "lyapunov" / "theta.csv");

    const double dom_tol = expected.at("dominant_tol").get<double>();
    const double spu_tol = expected.at("spurious_tol").get<double>();

    std::vector<Check> checks;
    // Weight-table checks: column L e_idx vs the known dominant pattern.
    auto check_column = [&](const std::string& name, int coord,
                            const std::map<std::string, double>& dominant) {
        const int idx = coordinate_index(dict, coord);
        const Eigen::VectorXd w = L.col(idx);
        double worst = 0.0;
        std::string worst_label;
        for (int k = 0; k < dict.size(); ++k) {
            const auto it = dominant.find(dict.entries[k].label);
            const double target = it == dominant.end() ? 0.0 : it->second;
            const double tol = it == dominant.end() ? spu_tol : dom_tol;
            const double err = std::abs(w[k] - target) / tol;
            if (err > worst) {
                worst = err;
                worst_label = dict.entries[k].label;
            }
        }
        std::ostringstream d;
        d << "worst entry " << worst_label << " at " << worst << "x tolerance";
        checks.push_back({name, worst <= 1.0, d.str()});
    };
    check_column("table1 (L e_idx(x1))", 0, {{"x2", 1.0}});
    check_column("table2 (L e_idx(x2))", 1, {{"x2", 1.0}, {"x1", -1.0}, {"x1^2*x2", -1.0}});

    // Baseline contrast.
    {
        double free_max = 0.0, base_max = 0.0, f1_im = 0.0, f2_im = 0.0;
        for (const auto& m : metrics.at("log_free"))
            free_max = std::max(free_max, m.at("max_grid_error").get<double>());
        bool has_baseline = metrics.contains("log_baseline");
        if (has_baseline) {
            for (const auto& m : metrics.at("log_baseline")) {
                base_max = std::max(base_max, m.at("max_grid_error").get<double>());
                const double im = m.at("max_imag_weight").get<double>();
                if (m.at("coordinate").get<int>() == 1) f1_im = im;
                else f2_im = im;
            }
        }
        const double ratio = free_max > 0 ? base_max / free_max : 0.0;
        std::ostringstream d;
        d << "log-free max err " << free_max << ", baseline " << base_max << " (ratio "
          << ratio << "), imag f1 " << f1_im << " f2 " << f2_im;
        const bool pass = has_baseline &&
                          ratio >= expected.at("baseline_ratio_min").get<double>() &&
                          f1_im >= expected.at("f1_im_min").get<double>() &&
                          f2_im >= expected.at("f2_im_min").get<double>();
        checks.push_back({"baseline contrast", pass, d.str()});
    }

    // Lyapunov coefficients, origin value, verdict.
    {
        const double rel = expected.at("lyap_rel_tol").get<double>();
        bool pass = true;
        std::ostringstream d;
        for (const auto& [label, target] : expected.at("lyap_coeffs").items()) {
            int idx = -1;
            for (int k = 0; k < dict.size(); ++k)
                if (dict.entries[k].label == label) idx = k;
            const double got = idx >= 0 ? theta(idx, 0) : 0.0;
            const double t = target.get<double>();
            if (std::abs(got - t) > rel * std::abs(t)) pass = false;
            d << label << "=" << got << " (want " << t << ") ";
        }
        checks.push_back({"lyapunov coefficients", pass, d.str()});

        const double origin = verdict.at("reversed_lie_at_origin").get<double>();
        const auto band = expected.at("origin_band");
        checks.push_back({"lyapunov origin value",
                          origin >= band[0].get<double>() && origin <= band[1].get<double>(),
                          "reversed Lie derivative at origin = " + std::to_string(origin)});
        checks.push_back({"lyapunov verdict", verdict.at("pass").get<bool>(),
                          verdict.at("detail").get<std::string>()});
    }

    bool all = true;
    for (const auto& c : checks) {
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  [" << c.detail
                  << "]\n";
        if (!c.pass && all) {
            all = false;
            std::cerr << "first failing check: " << c.name << "\n";
        }
    }
    return all ? kExitOk : 1;
}

}  // namespace koopgen
