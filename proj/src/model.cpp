#include "ralq/model.hpp"

#include "ralq/error.hpp"
#include "ralq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>

namespace ralq {

namespace {

void require_finite(const Matrix& M, const char* name) {
    if (!all_finite(M)) structural_error(std::string(name) + " has non-finite entries");
}

void require_covariance(const Matrix& cov, int n, const std::string& name) {
    if (cov.rows() != n || cov.cols() != n)
        structural_error(name + " must be " + std::to_string(n) + "x" + std::to_string(n));
    require_finite(cov, name.c_str());
    if (!is_psd(cov, 1e-12, 1e-10)) structural_error(name + " must be symmetric positive semidefinite");
}

void require_probabilities(const std::vector<double>& p, const std::string& name) {
    if (p.empty()) structural_error(name + " must be non-empty");
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0) structural_error(name + " entries must be finite and nonnegative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) structural_error(name + " must sum to 1 (got " + std::to_string(sum) + ")");
}

/// Equivalent noise with all channels pushed into the leaves.
NoiseSpec flatten(const NoiseSpec& spec);

NoiseSpec apply_channel(const NoiseSpec& leaf, const Matrix& G) {
    return std::visit(
        [&](const auto& k) -> NoiseSpec {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) {
                return NoiseSpec::gaussian(G * k.mean, symmetrize(G * k.cov * G.transpose()));
            } else if constexpr (std::is_same_v<T, DiscreteNoise>) {
                std::vector<Vector> atoms;
                atoms.reserve(k.atoms.size());
                for (const auto& a : k.atoms) atoms.push_back(G * a);
                return NoiseSpec::discrete(std::move(atoms), k.probs);
            } else if constexpr (std::is_same_v<T, GaussianMixtureNoise>) {
                std::vector<Vector> means;
                std::vector<Matrix> covs;
                for (std::size_t i = 0; i < k.means.size(); ++i) {
                    means.push_back(G * k.means[i]);
                    covs.push_back(symmetrize(G * k.covs[i] * G.transpose()));
                }
                return NoiseSpec::gaussian_mixture(k.weights, std::move(means), std::move(covs));
            } else {
                return apply_channel(flatten(*k.inner), G * k.G);
            }
        },
        leaf.kind());
}

NoiseSpec flatten(const NoiseSpec& spec) {
    if (const auto* ch = std::get_if<ChannelNoise>(&spec.kind())) return apply_channel(flatten(*ch->inner), ch->G);
    return spec;
}

} // namespace

// ---------------------------------------------------------------------------

LinearSystem::LinearSystem(Matrix A, Matrix B, Matrix C) : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
    const auto n = A_.rows();
    if (n == 0 || A_.cols() != n) structural_error("A must be square and non-empty");
    if (B_.rows() != n || B_.cols() == 0) structural_error("B must have n rows and at least one column");
    if (C_.cols() != n || C_.rows() == 0) structural_error("C must have n columns and at least one row");
    require_finite(A_, "A");
    require_finite(B_, "B");
    require_finite(C_, "C");
}

LinearSystem LinearSystem::fully_observed(Matrix A, Matrix B) {
    const auto n = A.rows();
    return LinearSystem(std::move(A), std::move(B), Matrix::Identity(n, n));
}

CostSpec::CostSpec(Matrix Q, Matrix R, int horizon) : Q_(std::move(Q)), R_(std::move(R)), horizon_(horizon) {
    if (horizon_ < 1) structural_error("horizon must be >= 1");
    if (Q_.rows() == 0 || Q_.rows() != Q_.cols()) structural_error("Q must be square");
    if (R_.rows() == 0 || R_.rows() != R_.cols()) structural_error("R must be square");
    require_finite(Q_, "Q");
    require_finite(R_, "R");
    if (!is_psd(Q_, 1e-12, 1e-10)) structural_error("Q must be symmetric positive semidefinite");
    if (!is_psd(R_, 1e-12, 1e-10)) structural_error("R must be symmetric positive semidefinite");
}

// ---------------------------------------------------------------------------

NoiseSpec NoiseSpec::gaussian(Vector mean, Matrix cov) {
    const int n = static_cast<int>(mean.size());
    if (n == 0) structural_error("gaussian noise must have positive dimension");
    require_finite(mean, "gaussian mean");
    require_covariance(cov, n, "gaussian covariance");
    return NoiseSpec(GaussianNoise{std::move(mean), symmetrize(cov)});
}

NoiseSpec NoiseSpec::discrete(std::vector<Vector> atoms, std::vector<double> probs) {
    if (atoms.empty() || atoms.size() != probs.size())
        structural_error("discrete noise needs one probability per atom");
    const auto n = atoms.front().size();
    if (n == 0) structural_error("discrete atoms must have positive dimension");
    for (const auto& a : atoms) {
        if (a.size() != n) structural_error("discrete atoms must share one dimension");
        require_finite(a, "discrete atom");
    }
    require_probabilities(probs, "discrete probabilities");
    return NoiseSpec(DiscreteNoise{std::move(atoms), std::move(probs)});
}

NoiseSpec NoiseSpec::gaussian_mixture(std::vector<double> weights, std::vector<Vector> means,
                                      std::vector<Matrix> covs) {
    if (weights.empty() || weights.size() != means.size() || weights.size() != covs.size())
        structural_error("gaussian mixture needs matching weights, means and covariances");
    const int n = static_cast<int>(means.front().size());
    if (n == 0) structural_error("mixture components must have positive dimension");
    for (std::size_t i = 0; i < means.size(); ++i) {
        if (means[i].size() != n) structural_error("mixture means must share one dimension");
        require_finite(means[i], "mixture mean");
        require_covariance(covs[i], n, "mixture covariance " + std::to_string(i));
        covs[i] = symmetrize(covs[i]);
    }
    require_probabilities(weights, "mixture weights");
    return NoiseSpec(GaussianMixtureNoise{std::move(weights), std::move(means), std::move(covs)});
}

NoiseSpec NoiseSpec::channel(NoiseSpec inner, Matrix G) {
    if (G.cols() != inner.dim() || G.rows() == 0)
        structural_error("channel matrix must have as many columns as the inner noise dimension");
    require_finite(G, "channel matrix");
    return NoiseSpec(ChannelNoise{std::make_shared<const NoiseSpec>(std::move(inner)), std::move(G)});
}

NoiseSpec NoiseSpec::zero(int n) { return gaussian(Vector::Zero(n), Matrix::Zero(n, n)); }

int NoiseSpec::dim() const {
    return std::visit(
        [](const auto& k) -> int {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) return static_cast<int>(k.mean.size());
            else if constexpr (std::is_same_v<T, DiscreteNoise>) return static_cast<int>(k.atoms.front().size());
            else if constexpr (std::is_same_v<T, GaussianMixtureNoise>) return static_cast<int>(k.means.front().size());
            else return static_cast<int>(k.G.rows());
        },
        kind_);
}

Vector NoiseSpec::mean() const {
    return std::visit(
        [](const auto& k) -> Vector {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) {
                return k.mean;
            } else if constexpr (std::is_same_v<T, DiscreteNoise>) {
                Vector m = Vector::Zero(k.atoms.front().size());
                for (std::size_t i = 0; i < k.atoms.size(); ++i) m += k.probs[i] * k.atoms[i];
                return m;
            } else if constexpr (std::is_same_v<T, GaussianMixtureNoise>) {
                Vector m = Vector::Zero(k.means.front().size());
                for (std::size_t i = 0; i < k.means.size(); ++i) m += k.weights[i] * k.means[i];
                return m;
            } else {
                return k.G * k.inner->mean();
            }
        },
        kind_);
}

Matrix NoiseSpec::covariance() const {
    return std::visit(
        [this](const auto& k) -> Matrix {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) {
                return k.cov;
            } else if constexpr (std::is_same_v<T, DiscreteNoise>) {
                const Vector m = mean();
                Matrix W = Matrix::Zero(m.size(), m.size());
                for (std::size_t i = 0; i < k.atoms.size(); ++i) {
                    const Vector d = k.atoms[i] - m;
                    W += k.probs[i] * d * d.transpose();
                }
                return symmetrize(W);
            } else if constexpr (std::is_same_v<T, GaussianMixtureNoise>) {
                // Σ w_i Σ_i + Σ w_i (μ_i - μ)(μ_i - μ)'
                const Vector m = mean();
                Matrix W = Matrix::Zero(m.size(), m.size());
                for (std::size_t i = 0; i < k.means.size(); ++i) {
                    const Vector d = k.means[i] - m;
                    W += k.weights[i] * (k.covs[i] + d * d.transpose());
                }
                return symmetrize(W);
            } else {
                return symmetrize(k.G * k.inner->covariance() * k.G.transpose());
            }
        },
        kind_);
}

bool NoiseSpec::is_gaussian() const {
    if (std::holds_alternative<GaussianNoise>(kind_)) return true;
    if (const auto* ch = std::get_if<ChannelNoise>(&kind_)) return ch->inner->is_gaussian();
    return false;
}

NoiseSpec NoiseSpec::centered() const {
    return std::visit(
        [this](const auto& k) -> NoiseSpec {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) {
                return gaussian(Vector::Zero(k.mean.size()), k.cov);
            } else if constexpr (std::is_same_v<T, DiscreteNoise>) {
                const Vector m = mean();
                std::vector<Vector> atoms;
                for (const auto& a : k.atoms) atoms.push_back(a - m);
                return discrete(std::move(atoms), k.probs);
            } else if constexpr (std::is_same_v<T, GaussianMixtureNoise>) {
                const Vector m = mean();
                std::vector<Vector> means;
                for (const auto& mu : k.means) means.push_back(mu - m);
                return gaussian_mixture(k.weights, std::move(means), k.covs);
            } else {
                return channel(k.inner->centered(), k.G);
            }
        },
        kind_);
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

struct NoiseSampler::Node {
    enum class Type { Gaussian, Discrete, Mixture } type = Type::Gaussian;
    std::vector<Vector> means;   // gaussian: one; mixture: one per component; discrete: atoms
    std::vector<Matrix> factors; // symmetric square roots of covariances
    std::vector<double> cumulative;
};

NoiseSampler::NoiseSampler(const NoiseSpec& noise) : dim_(noise.dim()) {
    const NoiseSpec flat = flatten(noise);
    auto node = std::make_shared<Node>();
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            auto cumulate = [&](const std::vector<double>& p) {
                double acc = 0.0;
                for (double v : p) node->cumulative.push_back(acc += v);
                node->cumulative.back() = 1.0;
            };
            if constexpr (std::is_same_v<T, GaussianNoise>) {
                node->type = Node::Type::Gaussian;
                node->means.push_back(k.mean);
                node->factors.push_back(psd_sqrt(k.cov));
            } else if constexpr (std::is_same_v<T, DiscreteNoise>) {
                node->type = Node::Type::Discrete;
                node->means = k.atoms;
                cumulate(k.probs);
            } else if constexpr (std::is_same_v<T, GaussianMixtureNoise>) {
                node->type = Node::Type::Mixture;
                node->means = k.means;
                for (const auto& c : k.covs) node->factors.push_back(psd_sqrt(c));
                cumulate(k.weights);
            }
        },
        flat.kind());
    root_ = std::move(node);
}

Vector NoiseSampler::draw(std::uint64_t seed, std::uint64_t index, std::uint64_t channel) const {
    StreamRng rng(seed, index, static_cast<Channel>(channel));
    const Node& node = *root_;
    auto pick = [&]() -> std::size_t {
        const double u = std::generate_canonical<double, 64>(rng);
        const auto it = std::upper_bound(node.cumulative.begin(), node.cumulative.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - node.cumulative.begin()),
                                     node.cumulative.size() - 1);
    };
    auto gauss = [&](const Vector& mean, const Matrix& factor) -> Vector {
        std::normal_distribution<double> normal;
        Vector z(mean.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
        return mean + factor * z;
    };
    switch (node.type) {
    case Node::Type::Gaussian: return gauss(node.means[0], node.factors[0]);
    case Node::Type::Discrete: return node.means[pick()];
    case Node::Type::Mixture: {
        const auto c = pick();
        return gauss(node.means[c], node.factors[c]);
    }
    }
    return {};
}

std::vector<Vector> sample_noise(const NoiseSpec& noise, std::uint64_t seed, long count) {
    if (count < 1) throw Error(ErrorCategory::Configuration, "sample count must be >= 1");
    const NoiseSampler sampler(noise);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        out.push_back(sampler.draw(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(Channel::Process)));
    return out;
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

QWeightedMoments gaussian_moments(const Vector& wbar, const Matrix& W, const Matrix& Q) {
    QWeightedMoments m;
    m.wbar = wbar;
    m.W = symmetrize(W);
    m.M3 = Vector::Zero(wbar.size());
    m.m3 = Vector::Zero(wbar.size());
    const Matrix QW = Q * m.W;
    m.m4 = 2.0 * (QW * QW).trace();
    m.source = AnalyticSource{};
    return m;
}

namespace {

QWeightedMoments discrete_moments(const DiscreteNoise& d, const Vector& wbar, const Matrix& W, const Matrix& Q) {
    const double trQW = (Q * W).trace();
    Vector E3 = Vector::Zero(wbar.size());
    double m4 = 0.0;
    for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        const Vector delta = d.atoms[i] - wbar;
        const double q = delta.dot(Q * delta);
        E3 += d.probs[i] * q * delta;
        m4 += d.probs[i] * (q - trQW) * (q - trQW);
    }
    QWeightedMoments m;
    m.wbar = wbar;
    m.W = W;
    m.M3 = 2.0 * E3;
    m.m3 = Q * m.M3;
    m.m4 = m4;
    m.source = AnalyticSource{};
    return m;
}

void check_moment_inputs(const NoiseSpec& noise, const Matrix& Q) {
    if (Q.rows() != noise.dim() || Q.cols() != noise.dim())
        structural_error("Q dimension does not match noise dimension");
}

} // namespace

QWeightedMoments compute_moments_monte_carlo(const NoiseSpec& noise, const Matrix& Q, MonteCarloConfig mc) {
    check_moment_inputs(noise, Q);
    if (mc.samples < kMinMonteCarloSamples)
        throw Error(ErrorCategory::Configuration, "Monte-Carlo moments need at least " +
                                                      std::to_string(kMinMonteCarloSamples) + " samples");
    const Vector wbar = noise.mean();
    const Matrix W = noise.covariance();
    const double trQW = (Q * W).trace();
    const int n = noise.dim();
    const NoiseSampler sampler(noise);

    // Welford accumulation for each M3 component and for m4.
    Vector mean3 = Vector::Zero(n), m2_3 = Vector::Zero(n);
    double mean4 = 0.0, m2_4 = 0.0;
    for (long i = 0; i < mc.samples; ++i) {
        const Vector delta = sampler.draw(mc.seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(Channel::Moments)) - wbar;
        const double q = delta.dot(Q * delta);
        const Vector s3 = 2.0 * q * delta;
        const double s4 = (q - trQW) * (q - trQW);
        const double k = static_cast<double>(i + 1);
        const Vector d3 = s3 - mean3;
        mean3 += d3 / k;
        m2_3 += d3.cwiseProduct(s3 - mean3);
        const double d4 = s4 - mean4;
        mean4 += d4 / k;
        m2_4 += d4 * (s4 - mean4);
    }
    const double ns = static_cast<double>(mc.samples);
    MonteCarloSource src;
    src.samples = mc.samples;
    src.seed = mc.seed;
    src.M3_std_error = (m2_3 / (ns - 1.0)).cwiseSqrt() / std::sqrt(ns);
    src.m4_std_error = std::sqrt(m2_4 / (ns - 1.0)) / std::sqrt(ns);

    QWeightedMoments m;
    m.wbar = wbar;
    m.W = W;
    m.M3 = mean3;
    m.m3 = Q * m.M3;
    m.m4 = mean4;
    m.source = src;
    return m;
}

QWeightedMoments compute_moments(const NoiseSpec& noise, const Matrix& Q, std::optional<MonteCarloConfig> mc) {
    check_moment_inputs(noise, Q);
    const NoiseSpec flat = flatten(noise);
    const Vector wbar = flat.mean();
    const Matrix W = flat.covariance();
    if (std::holds_alternative<GaussianNoise>(flat.kind())) return gaussian_moments(wbar, W, Q);
    if (const auto* d = std::get_if<DiscreteNoise>(&flat.kind())) return discrete_moments(*d, wbar, W, Q);
    return compute_moments_monte_carlo(noise, Q, mc.value_or(MonteCarloConfig{}));
}

// ---------------------------------------------------------------------------
// Assumptions
// ---------------------------------------------------------------------------

bool is_stabilizable(const Matrix& A, const Matrix& B, double rel_tol) {
    const auto n = A.rows();
    if (B.rows() != n) structural_error("stabilizability test: B must have as many rows as A");
    Eigen::EigenSolver<Matrix> solver(A, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> lambda = solver.eigenvalues()(i);
        if (std::abs(lambda) < 1.0 - 1e-12) continue;
        Eigen::MatrixXcd M(n, n + B.cols());
        M.leftCols(n) = A.cast<std::complex<double>>() - lambda * Eigen::MatrixXcd::Identity(n, n);
        M.rightCols(B.cols()) = B.cast<std::complex<double>>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
        const auto& s = svd.singularValues();
        const double thresh = rel_tol * std::max(s(0), 1e-300);
        const auto rank = (s.array() > thresh).count();
        if (rank < n || s(0) == 0.0) return false;
    }
    return true;
}

bool is_detectable(const Matrix& A, const Matrix& C, double rel_tol) {
    return is_stabilizable(A.transpose(), C.transpose(), rel_tol);
}

AssumptionReport validate_assumptions(const LinearSystem& system, const CostSpec& cost, const Matrix& W,
                                      const std::optional<Matrix>& S) {
    const int n = system.n();
    if (cost.Q().rows() != n) structural_error("Q must be n x n");
    if (cost.R().rows() != system.p()) structural_error("R must be p x p");
    if (W.rows() != n || W.cols() != n) structural_error("W must be n x n");

    auto positive_definite = [](const Matrix& M) {
        const double top = std::max(1.0, std::abs(max_eigenvalue(M)));
        return min_eigenvalue(M) > 1e-14 * top;
    };

    AssumptionReport r;
    r.ab_stabilizable = is_stabilizable(system.A(), system.B());
    r.aq_detectable = is_detectable(system.A(), psd_sqrt(cost.Q()));
    r.r_positive_definite = positive_definite(cost.R());
    if (S) {
        if (S->rows() != system.m() || S->cols() != system.m()) structural_error("S must be m x m");
        r.ac_detectable = is_detectable(system.A(), system.C());
        r.aw_stabilizable = is_stabilizable(system.A(), psd_sqrt(W));
        r.s_positive_definite = is_symmetric(*S, 1e-12) && positive_definite(*S);
    }
    return r;
}

} // namespace ralq
