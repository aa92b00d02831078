#include "koopgen/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "koopgen/errors.hpp"

namespace koopgen {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

void write_csv(const fs::path& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError("ragged csv: " + path.string());
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a(buf.str());
}

json dictionary_manifest(const Dictionary& dict) {
    json entries = json::array();
    for (const auto& e : dict.entries) {
        json exps = json::array();
        for (int d = 0; d < e.exponents.size(); ++d) exps.push_back(e.exponents[d]);
        entries.push_back({{"label", e.label}, {"exponents", exps}});
    }
    return {{"dimension", dict.dimension},
            {"size", dict.size()},
            {"basis_id", dict.basis_id()},
            {"entries", entries}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    static const std::vector<std::string> known = {
        "field", "dictionary", "domain_min", "domain_max", "per_axis", "sample_mode",
        "seed", "lambda", "tau", "rel_tol", "abs_tol", "quadrature", "snapshots",
        "baseline_s", "output_dir", "strict", "threads"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown config key: " + it.key());
    }
    ExperimentConfig c;
    auto get = [&j](const char* key, auto& dst) {
        if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
    };
    get("field", c.field);
    get("dictionary", c.dictionary);
    get("domain_min", c.domain_min);
    get("domain_max", c.domain_max);
    get("per_axis", c.per_axis);
    get("sample_mode", c.sample_mode);
    get("seed", c.seed);
    get("lambda", c.lambda);
    get("tau", c.tau);
    get("rel_tol", c.rel_tol);
    get("abs_tol", c.abs_tol);
    get("quadrature", c.quadrature);
    get("snapshots", c.snapshots);
    get("baseline_s", c.baseline_s);
    get("output_dir", c.output_dir);
    get("strict", c.strict);
    get("threads", c.threads);
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    return {{"field", field},
            {"dictionary", dictionary},
            {"domain_min", domain_min},
            {"domain_max", domain_max},
            {"per_axis", per_axis},
            {"sample_mode", sample_mode},
            {"seed", seed},
            {"lambda", lambda},
            {"tau", tau},
            {"rel_tol", rel_tol},
            {"abs_tol", abs_tol},
            {"quadrature", quadrature},
            {"snapshots", snapshots},
            {"baseline_s", baseline_s},
            {"output_dir", output_dir},
            {"strict", strict},
            {"threads", threads}};
}

void ExperimentConfig::validate() const {
    if (domain_min.size() != domain_max.size() || domain_min.empty())
        throw ConfigError("domain_min/domain_max must be nonempty and equal length");
    for (size_t d = 0; d < domain_min.size(); ++d)
        if (!(domain_min[d] < domain_max[d])) throw ConfigError("empty domain axis");
    if (per_axis < 1) throw ConfigError("per_axis must be >= 1");
    if (sample_mode != "grid" && sample_mode != "random")
        throw ConfigError("sample_mode must be grid|random");
    if (!(lambda > 0)) throw ConfigError("lambda must be > 0");
    if (!(tau > 0)) throw ConfigError("tau must be > 0");
    if (quadrature != "augmented-ode" && quadrature != "snapshot")
        throw ConfigError("quadrature must be augmented-ode|snapshot");
    if (baseline_s < 0) throw ConfigError("baseline_s must be >= 0");
    field_from_spec(field);          // throws on bad spec
    dictionary_from_spec(dictionary);
    const auto f = field_from_spec(field);
    const auto dict = dictionary_from_spec(dictionary);
    if (f.dimension != dict.dimension)
        throw ConfigError("field and dictionary dimension mismatch");
    if (static_cast<int>(domain_min.size()) != f.dimension)
        throw ConfigError("domain dimension does not match field");
}

VectorField ExperimentConfig::make_field() const { return field_from_spec(field); }

Dictionary ExperimentConfig::make_dictionary() const {
    return dictionary_from_spec(dictionary);
}

Flow ExperimentConfig::make_flow() const {
    Flow flow;
    flow.field = make_field();
    flow.rel_tol = rel_tol;
    flow.abs_tol = abs_tol;
    return flow;
}

SamplePlan ExperimentConfig::make_plan() const {
    SamplePlan plan;
    const int n = static_cast<int>(domain_min.size());
    plan.lo.resize(n);
    plan.hi.resize(n);
    for (int d = 0; d < n; ++d) {
        plan.lo[d] = domain_min[d];
        plan.hi[d] = domain_max[d];
    }
    plan.per_axis = per_axis;
    plan.mode = sample_mode == "random" ? SamplePlan::Mode::Random : SamplePlan::Mode::Grid;
    plan.seed = seed;
    return plan;
}

GenConfig ExperimentConfig::make_gen_config() const {
    GenConfig g;
    g.lambda = lambda;
    g.tau = tau;
    g.rel_tol = rel_tol;
    g.abs_tol = abs_tol;
    g.quadrature = quadrature == "snapshot" ? GenConfig::Quadrature::Snapshot
                                            : GenConfig::Quadrature::AugmentedOde;
    g.snapshots = snapshots;
    return g;
}

void save_training_set(const fs::path& dir, const TrainingSet& ts,
                       const ExperimentConfig& cfg, const Dictionary& dict) {
    fs::create_directories(dir);
    write_csv(dir / "X.csv", ts.X);
    write_csv(dir / "Y.csv", ts.Y);
    json manifest = {
        {"config", cfg.to_json()},
        {"dictionary", dictionary_manifest(dict)},
        {"field", cfg.field},
        {"rows", ts.X.rows()},
        {"cols", ts.X.cols()},
        {"dropped", ts.dropped},
        {"fully_truncated", ts.cfg.fully_truncated()},
        {"hash_X", fnv1a_file(dir / "X.csv")},
        {"hash_Y", fnv1a_file(dir / "Y.csv")},
    };
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

TrainingSet load_training_set(const fs::path& dir, ExperimentConfig* cfg_out) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw ConfigError("missing manifest: " + (dir / "manifest.json").string());
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw ConfigError("manifest parse error: " + std::string(e.what()));
    }
    if (manifest.at("hash_X").get<std::uint64_t>() != fnv1a_file(dir / "X.csv") ||
        manifest.at("hash_Y").get<std::uint64_t>() != fnv1a_file(dir / "Y.csv"))
        throw ConfigError("dataset hash mismatch in " + dir.string());

    const ExperimentConfig cfg = ExperimentConfig::from_json(manifest.at("config"));
    if (cfg_out) *cfg_out = cfg;

    TrainingSet ts;
    ts.X = read_csv(dir / "X.csv");
    ts.Y = read_csv(dir / "Y.csv");
    if (ts.X.rows() != ts.Y.rows() || ts.X.cols() != ts.Y.cols())
        throw ConfigError("X/Y shape mismatch in " + dir.string());
    ts.cfg = cfg.make_gen_config();
    ts.basis_id = manifest.at("dictionary").at("basis_id").get<std::uint64_t>();
    ts.dropped = manifest.value("dropped", 0L);
    // Sample coordinates are regenerated from the plan (deterministic),
    // unless samples were dropped in lenient mode.
    if (ts.dropped == 0) ts.samples = cfg.make_plan().points();
    return ts;
}

}  // namespace koopgen
