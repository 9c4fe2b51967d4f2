#pragma once

#include "ralq/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ralq {

/// Everything needed to build and simulate one problem instance.
struct Scenario {
    std::string name;
    LinearSystem system;
    CostSpec cost;
    NoiseSpec process_noise;
    std::optional<NoiseSpec> measurement_noise;
    Vector x0;
    MonteCarloConfig moments;

    /// Gaussian measurement covariance; throws Unsupported for other measurement noise.
    Matrix measurement_covariance() const;
    bool partially_observed() const { return measurement_noise.has_value(); }
};

/// Parse a scenario from JSON text. Syntax errors report the line; schema errors name the field.
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");

Scenario load_scenario_file(const std::string& path);

/// Built-in scenarios.
std::vector<std::string> catalog_names();
Scenario catalog_scenario(const std::string& name);

/// A catalog name, "catalog:<name>", or a path to a JSON file.
Scenario resolve_scenario(const std::string& spec);

} // namespace ralq
