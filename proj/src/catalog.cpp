#include "ralq/error.hpp"
#include "ralq/scenario.hpp"

namespace ralq {

namespace {

constexpr double kTs = 0.5;

Matrix double_integrator_A() {
    Matrix A = Matrix::Identity(4, 4);
    A(0, 1) = kTs;
    A(2, 3) = kTs;
    return A;
}

Matrix double_integrator_B() {
    Matrix B = Matrix::Zero(4, 2);
    B(0, 0) = kTs * kTs / 2.0;
    B(1, 0) = kTs;
    B(2, 1) = kTs * kTs / 2.0;
    B(3, 1) = kTs;
    return B;
}

Matrix diag(std::initializer_list<double> d) {
    Vector v(static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double x : d) v(i++) = x;
    return v.asDiagonal();
}

Vector vec(std::initializer_list<double> d) {
    Vector v(static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double x : d) v(i++) = x;
    return v;
}

// Strong direction: 0.8 N(30, 30) + 0.2 N(80, 60); weak direction N(0, 5). Both enter through B.
NoiseSpec wind_mixture() {
    auto d = NoiseSpec::gaussian_mixture({0.8, 0.2}, {vec({30.0, 0.0}), vec({80.0, 0.0})},
                                         {diag({30.0, 5.0}), diag({60.0, 5.0})});
    return NoiseSpec::channel(std::move(d), double_integrator_B()).centered();
}

Scenario wind() {
    return Scenario{"double_integrator_wind",
                    LinearSystem::fully_observed(double_integrator_A(), double_integrator_B()),
                    CostSpec(diag({1.0, 0.1, 2.0, 0.1}), Matrix::Identity(2, 2), 5000),
                    wind_mixture(),
                    std::nullopt,
                    Vector::Zero(4),
                    MonteCarloConfig{}};
}

// Same plant and penalties with a Gaussian of the wind's first two moments.
Scenario wind_gaussian() {
    const Matrix B = double_integrator_B();
    const auto mix = wind_mixture();
    return Scenario{"double_integrator_gaussian",
                    LinearSystem::fully_observed(double_integrator_A(), B),
                    CostSpec(diag({1.0, 0.1, 2.0, 0.1}), Matrix::Identity(2, 2), 20),
                    NoiseSpec::gaussian(Vector::Zero(4), mix.covariance()),
                    std::nullopt,
                    Vector::Zero(4),
                    MonteCarloConfig{}};
}

Scenario lqg() {
    Matrix C = Matrix::Zero(2, 4);
    C(0, 0) = 1.0;
    C(1, 2) = 1.0;
    Matrix S(2, 2);
    S << 5.0, 2.0, 2.0, 2.0;
    auto d = NoiseSpec::gaussian(Vector::Zero(2), diag({30.0, 5.0}));
    return Scenario{"double_integrator_lqg",
                    LinearSystem(double_integrator_A(), double_integrator_B(), C),
                    CostSpec(diag({1.0, 0.5, 2.0, 0.5}), Matrix::Identity(2, 2), 3000),
                    NoiseSpec::channel(std::move(d), double_integrator_B()),
                    NoiseSpec::gaussian(Vector::Zero(2), S),
                    Vector::Zero(4),
                    MonteCarloConfig{}};
}

// x_{t+1} = x_t + u_t + w_{t+1}, w = 3 w.p. 1/3 and 0 otherwise; only the state is penalized.
Scenario toy() {
    return Scenario{"toy_scalar",
                    LinearSystem::fully_observed(Matrix::Ones(1, 1), Matrix::Ones(1, 1)),
                    CostSpec(Matrix::Ones(1, 1), Matrix::Zero(1, 1), 20),
                    NoiseSpec::discrete({vec({3.0}), vec({0.0})}, {1.0 / 3.0, 2.0 / 3.0}),
                    std::nullopt,
                    Vector::Zero(1),
                    MonteCarloConfig{}};
}

} // namespace

std::vector<std::string> catalog_names() {
    return {"double_integrator_wind", "double_integrator_gaussian", "double_integrator_lqg", "toy_scalar"};
}

Scenario catalog_scenario(const std::string& name) {
    if (name == "double_integrator_wind") return wind();
    if (name == "double_integrator_gaussian") return wind_gaussian();
    if (name == "double_integrator_lqg") return lqg();
    if (name == "toy_scalar") return toy();
    throw Error(ErrorCategory::Configuration, "unknown catalog scenario '" + name + "'");
}

} // namespace ralq
