#include "ralq/scenario.hpp"

#include "ralq/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace ralq {

using nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path.empty() ? key : path + "." + key, "missing required field");
    return *it;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double read_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ParseError(field, "expected a number");
    return j.get<double>();
}

int read_int(const json& j, const std::string& field) {
    if (!j.is_number_integer()) throw ParseError(field, "expected an integer");
    return j.get<int>();
}

Vector read_vector(const json& j, const std::string& field, int expected = -1) {
    if (!j.is_array()) throw ParseError(field, "expected an array of numbers");
    if (expected >= 0 && static_cast<int>(j.size()) != expected)
        throw ParseError(field, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = read_number(j[i], field + "[" + std::to_string(i) + "]");
    return v;
}

// Either nested rows [[...], ...] or a flat row-major list.
Matrix read_matrix(const json& j, const std::string& field, int rows, int cols) {
    if (!j.is_array()) throw ParseError(field, "expected a matrix");
    if (!j.empty() && j.front().is_array()) {
        if (static_cast<int>(j.size()) != rows)
            throw ParseError(field, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
        Matrix M(rows, cols);
        for (int r = 0; r < rows; ++r) M.row(r) = read_vector(j[static_cast<std::size_t>(r)], field + "[" + std::to_string(r) + "]", cols).transpose();
        return M;
    }
    const Vector flat = read_vector(j, field, rows * cols);
    return from_row_major(std::span<const double>(flat.data(), static_cast<std::size_t>(flat.size())), rows, cols);
}

// Dimension of a noise block without building it (needed for channel matrices).
int noise_dim(const json& j, const std::string& path) {
    const std::string type = require(j, "type", path).get<std::string>();
    if (type == "gaussian") return static_cast<int>(require(j, "mean", path).size());
    if (type == "discrete") {
        const auto& atoms = require(j, "atoms", path);
        if (!atoms.is_array() || atoms.empty() || !atoms.front().is_array())
            throw ParseError(join(path, "atoms"), "expected a nonempty array of vectors");
        return static_cast<int>(atoms.front().size());
    }
    if (type == "gaussian_mixture") {
        const auto& means = require(j, "means", path);
        if (!means.is_array() || means.empty() || !means.front().is_array())
            throw ParseError(join(path, "means"), "expected a nonempty array of vectors");
        return static_cast<int>(means.front().size());
    }
    if (type == "channel") {
        const auto& G = require(j, "G", path);
        if (!G.is_array() || G.empty() || !G.front().is_array())
            throw ParseError(join(path, "G"), "channel matrix must be given as nested rows");
        return static_cast<int>(G.size());
    }
    throw ParseError(join(path, "type"), "unknown noise type '" + type + "'");
}

std::vector<double> read_probs(const json& j, const std::string& field) {
    const Vector v = read_vector(j, field);
    return {v.data(), v.data() + v.size()};
}

NoiseSpec read_noise(const json& j, const std::string& path, int dim) {
    const auto& type_j = require(j, "type", path);
    if (!type_j.is_string()) throw ParseError(join(path, "type"), "expected a string");
    const std::string type = type_j.get<std::string>();
    auto build = [&]() -> NoiseSpec {
        if (type == "gaussian") {
            Vector mean = read_vector(require(j, "mean", path), join(path, "mean"), dim);
            Matrix cov = read_matrix(require(j, "cov", path), join(path, "cov"), dim, dim);
            return NoiseSpec::gaussian(std::move(mean), std::move(cov));
        }
        if (type == "discrete") {
            const auto& atoms_j = require(j, "atoms", path);
            if (!atoms_j.is_array()) throw ParseError(join(path, "atoms"), "expected an array");
            std::vector<Vector> atoms;
            for (std::size_t i = 0; i < atoms_j.size(); ++i)
                atoms.push_back(read_vector(atoms_j[i], join(path, "atoms") + "[" + std::to_string(i) + "]", dim));
            auto probs = read_probs(require(j, "probs", path), join(path, "probs"));
            return NoiseSpec::discrete(std::move(atoms), std::move(probs));
        }
        if (type == "gaussian_mixture") {
            auto weights = read_probs(require(j, "weights", path), join(path, "weights"));
            const auto& means_j = require(j, "means", path);
            const auto& covs_j = require(j, "covs", path);
            if (!means_j.is_array() || means_j.size() != weights.size())
                throw ParseError(join(path, "means"), "expected one mean per weight");
            if (!covs_j.is_array() || covs_j.size() != weights.size())
                throw ParseError(join(path, "covs"), "expected one covariance per weight");
            std::vector<Vector> means;
            std::vector<Matrix> covs;
            for (std::size_t i = 0; i < weights.size(); ++i) {
                const std::string idx = "[" + std::to_string(i) + "]";
                means.push_back(read_vector(means_j[i], join(path, "means") + idx, dim));
                covs.push_back(read_matrix(covs_j[i], join(path, "covs") + idx, dim, dim));
            }
            return NoiseSpec::gaussian_mixture(std::move(weights), std::move(means), std::move(covs));
        }
        if (type == "channel") {
            const auto& inner_j = require(j, "inner", path);
            const int k = noise_dim(inner_j, join(path, "inner"));
            NoiseSpec inner = read_noise(inner_j, join(path, "inner"), k);
            Matrix G = read_matrix(require(j, "G", path), join(path, "G"), dim, k);
            return NoiseSpec::channel(std::move(inner), std::move(G));
        }
        throw ParseError(join(path, "type"), "unknown noise type '" + type + "'");
    };
    NoiseSpec spec = [&]() {
        try {
            return build();
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(path, e.what());
        }
    }();
    if (auto it = j.find("center"); it != j.end()) {
        if (!it->is_boolean()) throw ParseError(join(path, "center"), "expected true or false");
        if (it->get<bool>()) spec = spec.centered();
    }
    return spec;
}

Scenario build(const json& root) {
    if (!root.is_object()) throw ParseError("<root>", "expected a JSON object");
    std::string name = "scenario";
    if (auto it = root.find("name"); it != root.end()) {
        if (!it->is_string()) throw ParseError("name", "expected a string");
        name = it->get<std::string>();
    }
    const auto& sys = require(root, "system", "");
    const int n = read_int(require(sys, "n", "system"), "system.n");
    const int p = read_int(require(sys, "p", "system"), "system.p");
    if (n < 1) throw ParseError("system.n", "must be >= 1");
    if (p < 1) throw ParseError("system.p", "must be >= 1");
    Matrix A = read_matrix(require(sys, "A", "system"), "system.A", n, n);
    Matrix B = read_matrix(require(sys, "B", "system"), "system.B", n, p);
    Matrix C = Matrix::Identity(n, n);
    if (sys.contains("C")) {
        const int m = read_int(require(sys, "m", "system"), "system.m");
        if (m < 1) throw ParseError("system.m", "must be >= 1");
        C = read_matrix(sys["C"], "system.C", m, n);
    }
    const auto& cost = require(root, "cost", "");
    Matrix Q = read_matrix(require(cost, "Q", "cost"), "cost.Q", n, n);
    Matrix R = read_matrix(require(cost, "R", "cost"), "cost.R", p, p);
    const int N = read_int(require(cost, "horizon", "cost"), "cost.horizon");
    if (N < 1) throw ParseError("cost.horizon", "must be >= 1");

    auto wrap = [](const std::string& field, auto&& make) {
        try {
            return make();
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(field, e.what());
        }
    };
    LinearSystem system = wrap("system", [&] { return LinearSystem(A, B, C); });
    CostSpec cost_spec = wrap("cost", [&] { return CostSpec(Q, R, N); });

    NoiseSpec process = read_noise(require(root, "process_noise", ""), "process_noise", n);
    std::optional<NoiseSpec> measurement;
    if (root.contains("measurement_noise"))
        measurement = read_noise(root["measurement_noise"], "measurement_noise", system.m());

    Vector x0 = Vector::Zero(n);
    if (root.contains("x0")) x0 = read_vector(root["x0"], "x0", n);

    MonteCarloConfig mc;
    if (root.contains("moments")) {
        const auto& m = root["moments"];
        if (!m.is_object()) throw ParseError("moments", "expected an object");
        if (m.contains("samples")) {
            if (!m["samples"].is_number_integer()) throw ParseError("moments.samples", "expected an integer");
            mc.samples = m["samples"].get<long>();
        }
        if (m.contains("seed")) {
            if (!m["seed"].is_number_unsigned()) throw ParseError("moments.seed", "expected a nonnegative integer");
            mc.seed = m["seed"].get<std::uint64_t>();
        }
    }
    return Scenario{std::move(name), std::move(system), std::move(cost_spec), std::move(process),
                    std::move(measurement), std::move(x0), mc};
}

int line_of(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

} // namespace

Matrix Scenario::measurement_covariance() const {
    if (!measurement_noise) throw Error(ErrorCategory::Configuration, "scenario has no measurement noise");
    if (!measurement_noise->is_gaussian())
        throw Error(ErrorCategory::Unsupported, "partially observed synthesis needs Gaussian measurement noise");
    return measurement_noise->covariance();
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ":" + std::to_string(line_of(text, e.byte)), "JSON syntax error");
    }
    try {
        return build(root);
    } catch (const json::exception& e) {
        throw ParseError(source, e.what());
    }
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open scenario file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

Scenario resolve_scenario(const std::string& spec) {
    const std::string prefix = "catalog:";
    if (spec.rfind(prefix, 0) == 0) return catalog_scenario(spec.substr(prefix.size()));
    for (const auto& name : catalog_names())
        if (name == spec) return catalog_scenario(name);
    return load_scenario_file(spec);
}

} // namespace ralq
