#include "ralq/duality.hpp"

#include "ralq/error.hpp"

#include <cmath>
#include <string>

namespace ralq::duality {

double eps_to_eps_bar(double eps, const QWeightedMoments& moments, int N) {
    return eps - static_cast<double>(N) * moments.m4;
}

double eps_to_eps_bar(double eps, const CostSpec& cost, const lqg::KalmanSchedule& kalman) {
    return eps - lqg::fourth_moment_offset(cost, kalman);
}

RiskAwareProblem::RiskAwareProblem(LinearSystem system, CostSpec cost, QWeightedMoments moments, Vector x0)
    : mode_(Mode::Lqr), system_(std::move(system)), cost_(std::move(cost)), x0_(std::move(x0)),
      moments_(std::move(moments)) {
    if (x0_.size() != system_.n()) structural_error("x0 must have the state dimension");
    wbar_ = moments_->wbar;
}

RiskAwareProblem::RiskAwareProblem(LinearSystem system, CostSpec cost, lqg::KalmanSchedule kalman, Vector wbar,
                                   Vector x0)
    : mode_(Mode::Lqg), system_(std::move(system)), cost_(std::move(cost)), x0_(std::move(x0)),
      kalman_(std::move(kalman)), wbar_(std::move(wbar)) {
    if (x0_.size() != system_.n()) structural_error("x0 must have the state dimension");
    if (kalman_->horizon() < cost_.horizon()) structural_error("Kalman schedule shorter than the cost horizon");
}

double RiskAwareProblem::eps_bar(double eps) const {
    if (mode_ == Mode::Lqr) return eps_to_eps_bar(eps, *moments_, cost_.horizon());
    return eps_to_eps_bar(eps, cost_, *kalman_);
}

double RiskAwareProblem::risk(double mu) const {
    if (mode_ == Mode::Lqr) {
        const auto s = lqr::synthesize(system_, cost_, *moments_, mu);
        return lqr::evaluate_risk(system_, cost_, *moments_, s, x0_);
    }
    const auto s = lqg::synthesize(system_, cost_, *kalman_, mu, wbar_);
    return lqg::evaluate_risk(system_, cost_, *kalman_, s, x0_, wbar_);
}

Evaluation RiskAwareProblem::evaluate(double mu, double eps_bar) const {
    Evaluation e;
    e.mu = mu;
    if (mode_ == Mode::Lqr) {
        const auto s = lqr::synthesize(system_, cost_, *moments_, mu);
        const auto d = lqr::dual_value(system_, cost_, *moments_, s, x0_, eps_bar);
        e.D = d.D;
        e.J = d.J;
        e.J_R = d.J_R;
    } else {
        const auto s = lqg::synthesize(system_, cost_, *kalman_, mu, wbar_);
        const auto d = lqg::dual_value(system_, cost_, *kalman_, s, x0_, wbar_, eps_bar);
        e.D = d.D;
        e.J = d.J;
        e.J_R = d.J_R;
    }
    return e;
}

std::string_view to_string(BisectionStatus status) {
    switch (status) {
    case BisectionStatus::Interior: return "interior";
    case BisectionStatus::BoundaryZero: return "boundary_zero";
    case BisectionStatus::Infeasible: return "infeasible";
    }
    return "unknown";
}

namespace {

BisectionResult finish(const RiskAwareProblem& problem, double mu, double eps_bar, BisectionStatus status,
                       int iters, double tol) {
    const auto e = problem.evaluate(mu, eps_bar);
    BisectionResult r;
    r.mu_star = mu;
    r.J = e.J;
    r.J_R = e.J_R;
    r.eps_bar = eps_bar;
    r.status = status;
    r.iters = iters;
    r.cs_residual = std::abs(mu * (e.J_R - eps_bar));
    const double scale = tol * (1.0 + std::abs(eps_bar));
    r.certificates.feasibility_gap = e.J_R - eps_bar;
    r.certificates.primal_feasible = e.J_R - eps_bar <= scale;
    r.certificates.complementary_slackness = r.cs_residual <= scale * std::max(1.0, mu);
    return r;
}

} // namespace

BisectionResult bisect(const RiskAwareProblem& problem, double eps, BisectionConfig config) {
    if (!(config.mu_min >= 0.0) || !(config.mu_max > config.mu_min) || !(config.tol > 0.0) || config.max_iters < 1)
        throw Error(ErrorCategory::Configuration, "invalid bisection configuration");
    const double eps_bar = problem.eps_bar(eps);
    const double scale = config.tol * (1.0 + std::abs(eps_bar));

    const double r_lo = problem.risk(config.mu_min);
    if (r_lo <= eps_bar) {
        const auto status = config.mu_min == 0.0 ? BisectionStatus::BoundaryZero : BisectionStatus::Interior;
        return finish(problem, config.mu_min, eps_bar, status, 0, config.tol);
    }
    const double r_hi = problem.risk(config.mu_max);
    if (r_hi > eps_bar + scale)
        return finish(problem, config.mu_max, eps_bar, BisectionStatus::Infeasible, 0, config.tol);
    if (std::abs(r_hi - eps_bar) <= scale)
        return finish(problem, config.mu_max, eps_bar, BisectionStatus::Interior, 0, config.tol);

    double lo = config.mu_min, hi = config.mu_max;
    for (int it = 1; it <= config.max_iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break; // interval exhausted at double precision
        const double r = problem.risk(mid);
        if (std::abs(r - eps_bar) <= scale) return finish(problem, mid, eps_bar, BisectionStatus::Interior, it, config.tol);
        if (r > eps_bar)
            lo = mid;
        else
            hi = mid;
    }
    throw NonConvergenceError("bisection did not reach |J_R - eps_bar| <= tol within " +
                                  std::to_string(config.max_iters) + " iterations",
                              problem.risk(hi) - eps_bar);
}

InfimumEstimate eps_infimum_estimate(const RiskAwareProblem& problem) {
    InfimumEstimate out;
    for (double mu : {1e6, 1e7, 1e8}) out.probes.emplace_back(mu, problem.risk(mu));
    out.mu_probe = 1e8;
    out.eps_bar_inf_estimate = out.probes[2].second;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-6 * (1.0 + std::abs(b)); };
    out.reliable = close(out.probes[1].second, out.probes[2].second);
    return out;
}

} // namespace ralq::duality
