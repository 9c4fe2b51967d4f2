#include "fixtures.hpp"

#include "ralq/error.hpp"
#include "ralq/linalg.hpp"
#include "ralq/model.hpp"
#include "ralq/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ralq;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

} // namespace

TEST(Linalg, SpectralRadiusAndNorm) {
    Matrix M(2, 2);
    M << 0.5, 1.0, 0.0, -0.8;
    EXPECT_NEAR(spectral_radius(M), 0.8, 1e-14);
    Matrix D = Vector(v2(3.0, -4.0)).asDiagonal();
    EXPECT_NEAR(spectral_norm(D), 4.0, 1e-14);
    EXPECT_NEAR(condition_number(D), 4.0 / 3.0, 1e-14);
}

TEST(Linalg, GuardedSolveRejectsNearSingular) {
    Matrix M(2, 2);
    M << 1.0, 1.0, 1.0, 1.0 + 1e-14;
    try {
        guarded_solve(M, Matrix::Identity(2, 2), 7, "test");
        FAIL() << "expected singularity";
    } catch (const SingularityError& e) {
        EXPECT_EQ(e.stage(), 7);
    }
    Matrix ok(2, 2);
    ok << 2.0, 0.0, 0.0, 4.0;
    const Matrix X = guarded_solve(ok, Matrix::Identity(2, 2), 0, "test");
    EXPECT_NEAR(X(1, 1), 0.25, 1e-15);
}

TEST(Linalg, PsdHelpers) {
    std::mt19937_64 g(3);
    const Matrix P = fixture::random_psd(g, 3, 0.1);
    EXPECT_TRUE(is_psd(P));
    const Matrix r = psd_sqrt(P);
    EXPECT_LT((r * r - P).norm(), 1e-10);
    EXPECT_TRUE(psd_geq(P, Matrix(P - 0.05 * Matrix::Identity(3, 3)), 1e-12));
    EXPECT_FALSE(is_psd(Matrix(-P)));
}

TEST(Model, RejectsDimensionMismatch) {
    EXPECT_THROW(LinearSystem(Matrix::Identity(2, 2), Matrix::Ones(3, 1), Matrix::Identity(2, 2)), Error);
    EXPECT_THROW(LinearSystem(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 3)), Error);
    EXPECT_THROW(CostSpec(Matrix::Identity(2, 2), Matrix::Identity(1, 1), 0), Error);
    Matrix nonsym(2, 2);
    nonsym << 1.0, 0.5, 0.0, 1.0;
    EXPECT_THROW(CostSpec(nonsym, Matrix::Identity(1, 1), 5), Error);
}

TEST(Model, ToyDiscreteMomentsAreAnalytic) {
    const auto s = fixture::toy(5);
    const auto mom = compute_moments(s.process_noise, s.cost.Q());
    ASSERT_TRUE(mom.is_analytic());
    // δ = 2 w.p. 1/3, -1 w.p. 2/3.
    EXPECT_NEAR(mom.wbar(0), 1.0, 1e-15);
    EXPECT_NEAR(mom.W(0, 0), 2.0, 1e-14);
    EXPECT_NEAR(mom.M3(0), 2.0 * (8.0 / 3.0 - 2.0 / 3.0), 1e-14);
    EXPECT_NEAR(mom.m3(0), 4.0, 1e-14);
    // δ² ∈ {4, 1}, mean 2: E(δ²-2)² = (4/3 + 2/3) = 2.
    EXPECT_NEAR(mom.m4, 2.0, 1e-14);
}

TEST(Model, GaussianFourthMoment) {
    std::mt19937_64 g(11);
    const Matrix W = fixture::random_psd(g, 3, 0.2);
    const Matrix Q = fixture::random_psd(g, 3, 0.5);
    const auto mom = compute_moments(NoiseSpec::gaussian(Vector::Zero(3), W), Q);
    const Matrix QW = Q * W;
    EXPECT_NEAR(mom.m4, 2.0 * (QW * QW).trace(), 1e-10 * (1.0 + mom.m4));
    EXPECT_LT(mom.m3.norm(), 1e-14);
}

TEST(Model, AnalyticMomentsAgreeWithMonteCarlo) {
    std::mt19937_64 g(5);
    const auto noise = fixture::random_discrete(g, 2, 4);
    const Matrix Q = fixture::random_psd(g, 2, 0.3);
    const auto exact = compute_moments(noise, Q);
    const auto mc = compute_moments_monte_carlo(noise, Q, MonteCarloConfig{400'000, 9});
    const auto& src = std::get<MonteCarloSource>(mc.source);
    EXPECT_LT(std::abs(mc.m4 - exact.m4), 5.0 * src.m4_std_error + 1e-12);
    for (int i = 0; i < 2; ++i) EXPECT_LT(std::abs(mc.M3(i) - exact.M3(i)), 5.0 * src.M3_std_error(i) + 1e-12);
}

TEST(Model, ChannelMomentsMatchPushForward) {
    // w = G d, d discrete: the analytic channel path must equal the moments of the mapped atoms.
    Matrix G(2, 1);
    G << 1.0, -2.0;
    auto inner = NoiseSpec::discrete({v1(1.0), v1(-0.5), v1(4.0)}, {0.5, 0.3, 0.2});
    auto mapped = NoiseSpec::discrete({G * v1(1.0), G * v1(-0.5), G * v1(4.0)}, {0.5, 0.3, 0.2});
    Matrix Q(2, 2);
    Q << 2.0, 0.3, 0.3, 1.0;
    const auto a = compute_moments(NoiseSpec::channel(inner, G), Q);
    const auto b = compute_moments(mapped, Q);
    EXPECT_LT((a.W - b.W).norm(), 1e-12);
    EXPECT_LT((a.m3 - b.m3).norm(), 1e-12);
    EXPECT_NEAR(a.m4, b.m4, 1e-10);
}

TEST(Model, MixtureMomentsAreMonteCarloWithErrors) {
    auto mix = NoiseSpec::gaussian_mixture({0.8, 0.2}, {v1(30.0), v1(80.0)},
                                           {Matrix::Constant(1, 1, 30.0), Matrix::Constant(1, 1, 60.0)});
    // Mixture covariance: Σ w_i (C_i + μ_i²) - mean².
    EXPECT_NEAR(mix.mean()(0), 40.0, 1e-12);
    EXPECT_NEAR(mix.covariance()(0, 0), 0.8 * (30.0 + 900.0) + 0.2 * (60.0 + 6400.0) - 1600.0, 1e-9);
    const auto mom = compute_moments(mix, Matrix::Identity(1, 1), MonteCarloConfig{20'000, 1});
    EXPECT_FALSE(mom.is_analytic());
    EXPECT_THROW(compute_moments(mix, Matrix::Identity(1, 1), MonteCarloConfig{100, 1}), Error);
}

TEST(Model, SamplerIsPureFunctionOfStream) {
    auto mix = NoiseSpec::gaussian_mixture({0.5, 0.5}, {v2(0, 0), v2(1, 1)},
                                           {Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
    NoiseSampler s(mix);
    const Vector a = s.draw(42, 17, static_cast<std::uint64_t>(Channel::Process));
    const Vector b = s.draw(42, 17, static_cast<std::uint64_t>(Channel::Process));
    const Vector c = s.draw(42, 18, static_cast<std::uint64_t>(Channel::Process));
    const Vector d = s.draw(42, 17, static_cast<std::uint64_t>(Channel::Measurement));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_NE(a, d);
}

TEST(Model, SampledMeanMatches) {
    auto noise = NoiseSpec::gaussian(v2(1.0, -2.0), Matrix::Identity(2, 2) * 4.0);
    const auto xs = sample_noise(noise, 3, 100'000);
    Vector mean = Vector::Zero(2);
    for (const auto& x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    EXPECT_NEAR(mean(0), 1.0, 4.0 * 2.0 / std::sqrt(1e5));
    EXPECT_NEAR(mean(1), -2.0, 4.0 * 2.0 / std::sqrt(1e5));
}

TEST(Model, CenteredRemovesMean) {
    auto d = NoiseSpec::discrete({v1(3.0), v1(0.0)}, {1.0 / 3.0, 2.0 / 3.0});
    EXPECT_NEAR(d.centered().mean()(0), 0.0, 1e-15);
    EXPECT_NEAR(d.centered().covariance()(0, 0), 2.0, 1e-14);
}

TEST(Model, DiscreteProbabilitiesValidated) {
    EXPECT_THROW(NoiseSpec::discrete({v1(1.0), v1(2.0)}, {0.5, 0.6}), Error);
    EXPECT_THROW(NoiseSpec::discrete({v1(1.0), v1(2.0)}, {-0.1, 1.1}), Error);
}

TEST(Model, StabilizabilityAndDetectability) {
    Matrix A(2, 2);
    A << 1.2, 0.0, 0.0, 0.5;
    Matrix B(2, 1);
    B << 0.0, 1.0;
    EXPECT_FALSE(is_stabilizable(A, B));
    B << 1.0, 0.0;
    EXPECT_TRUE(is_stabilizable(A, B));
    Matrix C(1, 2);
    C << 0.0, 1.0;
    EXPECT_FALSE(is_detectable(A, C));
    C << 1.0, 0.0;
    EXPECT_TRUE(is_detectable(A, C));
}

TEST(Model, AssumptionReportForCatalog) {
    const auto s = catalog_scenario("double_integrator_lqg");
    const auto rep = validate_assumptions(s.system, s.cost, s.process_noise.covariance(), s.measurement_covariance());
    EXPECT_TRUE(rep.lqr_ok());
    EXPECT_TRUE(rep.lqg_ok());
    const auto t = fixture::toy(5);
    const auto rt = validate_assumptions(t.system, t.cost, t.process_noise.covariance());
    EXPECT_FALSE(rt.r_positive_definite);
    EXPECT_FALSE(rt.ac_detectable.has_value());
}
