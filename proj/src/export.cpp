#include "ralq/export.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

namespace ralq {

using nlohmann::json;

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

json provenance_json(const Provenance& p) {
    return json{{"config_hash", p.config_hash}, {"seed", p.seed}, {"version", p.version}};
}

json matrix_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

namespace {

template <class T, class F>
json list_json(const std::vector<T>& xs, F f) {
    json out = json::array();
    for (const auto& x : xs) out.push_back(f(x));
    return out;
}

} // namespace

json schedule_json(const lqr::GainSchedule& s) {
    return json{{"kind", "lqr"},
                {"mu", s.mu},
                {"horizon", s.horizon()},
                {"Qmu", matrix_json(s.Qmu)},
                {"K", list_json(s.K, matrix_json)},
                {"l", list_json(s.l, vector_json)},
                {"V", list_json(s.V, matrix_json)},
                {"xi", list_json(s.xi, vector_json)},
                {"c", s.c}};
}

json schedule_json(const lqg::LqgGainSchedule& s) {
    return json{{"kind", "lqg"},
                {"mu", s.mu},
                {"horizon", s.horizon()},
                {"K", list_json(s.K, matrix_json)},
                {"l", list_json(s.l, vector_json)},
                {"V", list_json(s.V, matrix_json)},
                {"xi", list_json(s.xi, vector_json)},
                {"Qmut", list_json(s.Qmut, matrix_json)}};
}

json schedule_json(const baselines::LeqgGains& g) {
    json out{{"kind", "leqg"},
             {"theta", g.theta},
             {"horizon", g.horizon()},
             {"valid_up_to", g.valid_up_to},
             {"partially_observed", g.mode.partially_observed()},
             {"K", list_json(g.K, matrix_json)},
             {"l", list_json(g.l, vector_json)},
             {"V", list_json(g.V, matrix_json)}};
    if (g.mode.partially_observed()) out["Ptilde"] = list_json(g.Ptilde, matrix_json);
    return out;
}

json kalman_json(const lqg::KalmanSchedule& k) {
    return json{{"Wt", list_json(k.Wt, matrix_json)},
                {"Lt", list_json(k.Lt, matrix_json)},
                {"Winf", matrix_json(k.Winf)},
                {"Linf", matrix_json(k.Linf)},
                {"filter_rho", k.filter_rho}};
}

namespace {

void write_header_comment(std::ostream& out, const Provenance& p) {
    out << "# config_hash=" << p.config_hash << " seed=" << p.seed << " version=" << p.version << '\n';
}

} // namespace

void write_trace_csv(std::ostream& out, const sim::SimulationTrace& trace, const Provenance& p) {
    write_header_comment(out, p);
    const auto n = trace.states.rows();
    const auto pdim = trace.inputs.rows();
    const auto m = trace.outputs.rows();
    const bool obs = trace.outputs.cols() > 0;
    const bool est = trace.has_estimates();
    const int N = trace.horizon();
    out << "t";
    for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
    for (Eigen::Index i = 1; i <= pdim; ++i) out << ",u" << i;
    if (obs)
        for (Eigen::Index i = 1; i <= m; ++i) out << ",y" << i;
    if (est) {
        for (Eigen::Index i = 1; i <= n; ++i) out << ",xhat" << i;
        for (Eigen::Index i = 1; i <= n; ++i) out << ",xpost" << i;
    }
    out << ",state_penalty,input_penalty\n";
    for (int t = 0; t <= N; ++t) {
        const bool last = t == N;
        out << t;
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(trace.states(i, t));
        for (Eigen::Index i = 0; i < pdim; ++i) out << ',' << (last ? "" : format_double(trace.inputs(i, t)));
        if (obs)
            for (Eigen::Index i = 0; i < m; ++i) out << ',' << (last ? "" : format_double(trace.outputs(i, t)));
        if (est) {
            for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(trace.xhat_pred(i, t));
            for (Eigen::Index i = 0; i < n; ++i) out << ',' << (last ? "" : format_double(trace.xhat_post(i, t)));
        }
        out << ',' << format_double(trace.state_penalty(t)) << ','
            << (last ? "" : format_double(trace.input_penalty(t))) << '\n';
    }
}

void write_cdf_csv(std::ostream& out,
                   const std::vector<std::pair<std::string, const sim::EmpiricalDistribution*>>& dists, int points,
                   const Provenance& p) {
    write_header_comment(out, p);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [name, d] : dists) {
        if (d->size() == 0) continue;
        lo = std::min(lo, d->sorted().front());
        hi = std::max(hi, d->sorted().back());
    }
    out << "threshold";
    for (const auto& [name, d] : dists) out << ',' << name;
    out << '\n';
    if (!std::isfinite(lo) || points < 1) return;
    for (int i = 0; i < points; ++i) {
        const double tau = points == 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        out << format_double(tau);
        for (const auto& [name, d] : dists) out << ',' << format_double(d->cdf(tau));
        out << '\n';
    }
}

} // namespace ralq
