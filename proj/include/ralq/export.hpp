#pragma once

#include "ralq/baselines.hpp"
#include "ralq/lqg.hpp"
#include "ralq/lqr.hpp"
#include "ralq/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace ralq {

inline constexpr const char* kVersion = "1.0.0";

/// Shortest round-trip decimal form, independent of the C locale.
std::string format_double(double value);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Embedded in every output file.
struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = kVersion;
};

nlohmann::json provenance_json(const Provenance& p);

nlohmann::json matrix_json(const Matrix& M);
nlohmann::json vector_json(const Vector& v);

nlohmann::json schedule_json(const lqr::GainSchedule& s);
nlohmann::json schedule_json(const lqg::LqgGainSchedule& s);
nlohmann::json schedule_json(const baselines::LeqgGains& g);
nlohmann::json kalman_json(const lqg::KalmanSchedule& k);

/// Columns: t, x1..xn, u1..up, [y1..ym, xhat1..xhatn, xpost1..xpostn,] state_penalty, input_penalty.
/// The row for t = N carries the final state and empty input columns.
void write_trace_csv(std::ostream& out, const sim::SimulationTrace& trace, const Provenance& p);

/// threshold followed by one P(X <= threshold) column per distribution, on a shared grid.
void write_cdf_csv(std::ostream& out, const std::vector<std::pair<std::string, const sim::EmpiricalDistribution*>>& dists,
                   int points, const Provenance& p);

} // namespace ralq
