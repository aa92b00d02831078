#include "koopgen/dictionary.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "koopgen/errors.hpp"

namespace koopgen {

namespace {

std::string monomial_label(const Eigen::VectorXi& exponents) {
    std::ostringstream out;
    bool any = false;
    for (int d = 0; d < exponents.size(); ++d) {
        if (exponents[d] == 0) continue;
        if (any) out << "*";
        out << "x" << (d + 1);
        if (exponents[d] > 1) out << "^" << exponents[d];
        any = true;
    }
    if (!any) out << "1";
    return out.str();
}

Observable monomial(const Eigen::VectorXi& exponents) {
    Observable o;
    o.exponents = exponents;
    o.label = monomial_label(exponents);
    return o;
}

}  // namespace

double Observable::operator()(const Eigen::VectorXd& x) const {
    double v = 1.0;
    for (int d = 0; d < exponents.size(); ++d) {
        for (int p = 0; p < exponents[d]; ++p) v *= x[d];
    }
    return v;
}

std::uint64_t Dictionary::basis_id() const {
    std::ostringstream ser;
    ser << "n=" << dimension << ";";
    for (const auto& e : entries) ser << e.label << ";";
    // FNV-1a 64
    const std::string s = ser.str();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Dictionary monomials_2d(int max_i, int max_j) {
    if (max_i < 0 || max_j < 0) throw ConfigError("monomials_2d: negative degree bound");
    Dictionary dict;
    dict.dimension = 2;
    for (int j = 0; j <= max_j; ++j) {
        for (int i = 0; i <= max_i; ++i) {
            Eigen::VectorXi e(2);
            e << i, j;
            dict.entries.push_back(monomial(e));
        }
    }
    return dict;
}

Dictionary monomials_1d(int min_n, int max_n) {
    if (min_n < 0 || max_n < min_n) throw ConfigError("monomials_1d: bad degree range");
    Dictionary dict;
    dict.dimension = 1;
    for (int n = min_n; n <= max_n; ++n) {
        Eigen::VectorXi e(1);
        e << n;
        dict.entries.push_back(monomial(e));
    }
    return dict;
}

Dictionary dictionary_from_spec(const std::string& spec) {
    auto parse_kv = [&spec](const std::string& body) {
        std::map<std::string, int> kv;
        std::istringstream in(body);
        std::string item;
        while (std::getline(in, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("bad dictionary spec: " + spec);
            try {
                kv[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
            } catch (const std::logic_error&) {
                throw ConfigError("bad dictionary spec: " + spec);
            }
        }
        return kv;
    };
    const std::string p2 = "monomials2d:";
    if (spec.rfind(p2, 0) == 0) {
        auto kv = parse_kv(spec.substr(p2.size()));
        if (!kv.count("max_i") || !kv.count("max_j") || kv.size() != 2)
            throw ConfigError("bad dictionary spec: " + spec);
        return monomials_2d(kv["max_i"], kv["max_j"]);
    }
    const std::string p1 = "monomials1d:";
    if (spec.rfind(p1, 0) == 0) {
        auto kv = parse_kv(spec.substr(p1.size()));
        if (!kv.count("min_n") || !kv.count("max_n") || kv.size() != 2)
            throw ConfigError("bad dictionary spec: " + spec);
        return monomials_1d(kv["min_n"], kv["max_n"]);
    }
    throw ConfigError("unknown dictionary spec: " + spec);
}

Eigen::RowVectorXd evaluate(const Dictionary& dict, const Eigen::VectorXd& x) {
    if (x.size() != dict.dimension) throw ConfigError("evaluate: state dimension mismatch");
    Eigen::RowVectorXd row(dict.size());
    for (int i = 0; i < dict.size(); ++i) row[i] = dict.entries[i](x);
    return row;
}

double analytic_generator_apply(const VectorField& field, const Observable& obs,
                                const Eigen::VectorXd& x) {
    const Eigen::VectorXd f = field.eval(x);
    double lie = 0.0;
    for (int d = 0; d < obs.exponents.size(); ++d) {
        const int p = obs.exponents[d];
        if (p == 0) continue;
        // d/dx_d of the monomial: p * x_d^{p-1} * prod of other factors
        double partial = static_cast<double>(p);
        for (int dd = 0; dd < obs.exponents.size(); ++dd) {
            const int q = (dd == d) ? obs.exponents[dd] - 1 : obs.exponents[dd];
            for (int k = 0; k < q; ++k) partial *= x[dd];
        }
        lie += partial * f[d];
    }
    return lie;
}

std::complex<double> reconstruct(const Dictionary& dict, const WeightVector& w,
                                 const Eigen::VectorXd& x) {
    if (w.basis_id != dict.basis_id() ||
        w.coefficients.size() != dict.size())
        throw BasisMismatchError("reconstruct: weight vector fitted on a different dictionary");
    const Eigen::RowVectorXd z = evaluate(dict, x);
    return z.cast<std::complex<double>>() * w.coefficients;
}

int coordinate_index(const Dictionary& dict, int k) {
    for (int i = 0; i < dict.size(); ++i) {
        const auto& e = dict.entries[i].exponents;
        if (e.sum() == 1 && k < e.size() && e[k] == 1) return i;
    }
    return -1;
}

}  // namespace koopgen
