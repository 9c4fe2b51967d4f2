#include "ralq/error.hpp"
#include "ralq/scenario.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace ralq;

namespace {

const std::string kDir = std::string(RALQ_SOURCE_DIR) + "/scenarios/";

std::string minimal(const std::string& A = "[[1.0]]", const std::string& noise =
                                                          R"({"type": "gaussian", "mean": [0], "cov": [[1]]})") {
    return R"({"system": {"n": 1, "p": 1, "A": )" + A + R"(, "B": [[1]]},
"cost": {"Q": [[1]], "R": [[1]], "horizon": 4},
"process_noise": )" + noise + "}";
}

std::string field_of(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ParseError& e) {
        return e.field();
    }
    return "<no error>";
}

} // namespace

TEST(Scenario, MinimalParses) {
    const auto s = parse_scenario(minimal());
    EXPECT_EQ(s.system.n(), 1);
    EXPECT_EQ(s.cost.horizon(), 4);
    EXPECT_FALSE(s.partially_observed());
    EXPECT_EQ(s.x0.size(), 1);
}

TEST(Scenario, FlatAndNestedMatricesAgree) {
    const auto a = parse_scenario(minimal("[[0.5]]"));
    const auto b = parse_scenario(minimal("[0.5]"));
    EXPECT_EQ(a.system.A(), b.system.A());
}

TEST(Scenario, SyntaxErrorReportsLine) {
    const std::string text = "{\n\"system\": {\n\"n\": 1,,\n}\n}";
    const auto f = field_of(text);
    EXPECT_NE(f.find(":3"), std::string::npos) << f;
}

TEST(Scenario, SchemaErrorsNameTheField) {
    EXPECT_EQ(field_of(minimal("[[1.0, 2.0]]")), "system.A[0]");
    EXPECT_EQ(field_of(minimal("[[\"x\"]]")), "system.A[0][0]");
    EXPECT_EQ(field_of(minimal("[[1.0]]", R"({"type": "laplace"})")), "process_noise.type");
    EXPECT_EQ(field_of(minimal("[[1.0]]", R"({"type": "gaussian", "mean": [0]})")), "process_noise.cov");
    EXPECT_EQ(field_of(R"({"system": {"n": 1, "p": 1, "A": [[1]], "B": [[1]]}})"), "cost");
    EXPECT_EQ(field_of(R"({"system": {"n": 0, "p": 1, "A": [], "B": []}})"), "system.n");
}

TEST(Scenario, InvalidProbabilitiesNameTheNoiseBlock) {
    const auto f = field_of(minimal("[[1.0]]", R"({"type": "discrete", "atoms": [[1], [2]], "probs": [0.5, 0.9]})"));
    EXPECT_EQ(f, "process_noise");
}

TEST(Scenario, ChannelAndCenterFlag) {
    const auto s = parse_scenario(minimal(
        "[[1.0]]", R"({"type": "channel", "G": [[2.0]], "center": true,
                        "inner": {"type": "discrete", "atoms": [[1], [3]], "probs": [0.5, 0.5]}})"));
    EXPECT_NEAR(s.process_noise.mean()(0), 0.0, 1e-15);
    EXPECT_NEAR(s.process_noise.covariance()(0, 0), 4.0, 1e-14);
}

TEST(Scenario, FilesMatchCatalog) {
    for (const std::string name : {"toy_scalar", "double_integrator_wind", "double_integrator_lqg"}) {
        const auto file = load_scenario_file(kDir + name + ".json");
        const auto cat = catalog_scenario(name);
        EXPECT_EQ(file.name, cat.name);
        EXPECT_LT((file.system.A() - cat.system.A()).norm(), 1e-15) << name;
        EXPECT_LT((file.system.C() - cat.system.C()).norm(), 1e-15) << name;
        EXPECT_LT((file.cost.Q() - cat.cost.Q()).norm(), 1e-15) << name;
        EXPECT_EQ(file.cost.horizon(), cat.cost.horizon());
        EXPECT_LT((file.process_noise.covariance() - cat.process_noise.covariance()).norm(), 1e-9) << name;
        EXPECT_LT((file.process_noise.mean() - cat.process_noise.mean()).norm(), 1e-12) << name;
        EXPECT_EQ(file.partially_observed(), cat.partially_observed());
    }
}

TEST(Scenario, ResolveForms) {
    EXPECT_EQ(resolve_scenario("toy_scalar").name, "toy_scalar");
    EXPECT_EQ(resolve_scenario("catalog:double_integrator_lqg").name, "double_integrator_lqg");
    EXPECT_EQ(resolve_scenario(kDir + "toy_scalar.json").name, "toy_scalar");
    EXPECT_THROW(resolve_scenario("catalog:nope"), Error);
    EXPECT_THROW(resolve_scenario(kDir + "missing.json"), ParseError);
}

TEST(Scenario, MeasurementCovarianceRequiresGaussian) {
    const auto lqg = catalog_scenario("double_integrator_lqg");
    EXPECT_EQ(lqg.measurement_covariance().rows(), 2);
    const auto toy = catalog_scenario("toy_scalar");
    EXPECT_THROW(toy.measurement_covariance(), Error);
}
