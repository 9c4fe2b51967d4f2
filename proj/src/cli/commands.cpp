#include "commands.hpp"

#include "ralq/baselines.hpp"
#include "ralq/duality.hpp"
#include "ralq/export.hpp"
#include "ralq/lqg.hpp"
#include "ralq/lqr.hpp"
#include "ralq/scenario.hpp"
#include "ralq/sim.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace ralq::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::Parse: return kParse;
    case ErrorCategory::Assumption: return kAssumption;
    case ErrorCategory::Singularity: return kSingularity;
    case ErrorCategory::Infeasible: return kInfeasible;
    case ErrorCategory::Divergence: return kDivergence;
    case ErrorCategory::NonConvergence: return kNonConvergence;
    case ErrorCategory::Breakdown: return kBreakdown;
    case ErrorCategory::Structural:
    case ErrorCategory::Configuration:
    case ErrorCategory::Unsupported: return kUsage;
    }
    return kUsage;
}

namespace {

struct Options {
    std::string scenario;
    std::vector<double> mu;
    std::optional<double> eps;
    std::optional<double> theta;
    std::optional<int> horizon;
    std::uint64_t seed = 1;
    long rollouts = 1;
    std::string out;
    std::string mode = "lqr";
    bool strict = false;
    bool zero_noise = false;
    std::string figure;
    int cdf_points = 200;
};

json options_json(const std::string& command, const Options& o) {
    json j{{"command", command}, {"scenario", o.scenario}, {"mu", o.mu},       {"seed", o.seed},
           {"rollouts", o.rollouts}, {"mode", o.mode},     {"strict", o.strict}, {"zero_noise", o.zero_noise},
           {"figure", o.figure},   {"cdf_points", o.cdf_points}};
    j["eps"] = o.eps ? json(*o.eps) : json(nullptr);
    j["theta"] = o.theta ? json(*o.theta) : json(nullptr);
    j["horizon"] = o.horizon ? json(*o.horizon) : json(nullptr);
    return j;
}

// Scenario plus everything derived from the command line.
class Context {
public:
    Context(std::string command, Options opt, const std::string& default_scenario, std::ostream& err)
        : command_(std::move(command)), opt_(std::move(opt)), err_(err),
          scenario_(resolve_scenario(opt_.scenario.empty() ? default_scenario : opt_.scenario)) {
        if (opt_.scenario.empty()) opt_.scenario = default_scenario;
        if (opt_.horizon) {
            if (*opt_.horizon < 1) throw Error(ErrorCategory::Configuration, "--horizon must be >= 1");
            scenario_.cost = scenario_.cost.with_horizon(*opt_.horizon);
        }
        // Fully observed designs see the override too, so the affine terms vanish with the noise.
        // Filters keep the nominal covariances since a zero covariance makes the gain singular.
        if (opt_.zero_noise && !scenario_.partially_observed())
            scenario_.process_noise = NoiseSpec::zero(scenario_.system.n());
        std::string source = "catalog:" + opt_.scenario;
        if (fs::is_regular_file(opt_.scenario)) {
            std::ifstream in(opt_.scenario);
            std::stringstream ss;
            ss << in.rdbuf();
            source = ss.str();
        }
        provenance_.config_hash = fnv1a_hex(options_json(command_, opt_).dump() + "\n" + source);
        provenance_.seed = opt_.seed;

        std::string dir = opt_.out;
        if (dir.empty())
            if (const char* env = std::getenv("RALQ_OUT_DIR")) dir = env;
        if (dir.empty()) dir = ".";
        out_dir_ = dir;
    }

    const Options& opt() const { return opt_; }
    const Scenario& scenario() const { return scenario_; }
    const Provenance& provenance() const { return provenance_; }
    std::ostream& err() const { return err_; }

    const QWeightedMoments& moments() {
        if (!moments_) moments_ = compute_moments(scenario_.process_noise, scenario_.cost.Q(), scenario_.moments);
        return *moments_;
    }

    const lqg::KalmanSchedule& kalman() {
        if (!kalman_) {
            if (!scenario_.partially_observed())
                throw Error(ErrorCategory::Configuration, "scenario '" + scenario_.name + "' has no measurement model");
            if (!scenario_.process_noise.is_gaussian())
                throw Error(ErrorCategory::Unsupported, "partially observed synthesis needs Gaussian process noise");
            kalman_ = lqg::kalman_forward(scenario_.system, scenario_.process_noise.covariance(),
                                          scenario_.measurement_covariance(), scenario_.cost.horizon());
        }
        return *kalman_;
    }

    AssumptionReport assumptions() {
        std::optional<Matrix> S;
        if (scenario_.partially_observed()) S = scenario_.measurement_noise->covariance();
        return validate_assumptions(scenario_.system, scenario_.cost, scenario_.process_noise.covariance(), S);
    }

    /// Warn, or throw with --strict, when the structural assumptions for `mode` fail.
    json check_assumptions(bool partial) {
        const auto r = assumptions();
        json j{{"ab_stabilizable", r.ab_stabilizable},
               {"aq_detectable", r.aq_detectable},
               {"r_positive_definite", r.r_positive_definite}};
        if (r.ac_detectable) j["ac_detectable"] = *r.ac_detectable;
        if (r.aw_stabilizable) j["aw_stabilizable"] = *r.aw_stabilizable;
        if (r.s_positive_definite) j["s_positive_definite"] = *r.s_positive_definite;
        const bool ok = partial ? r.lqg_ok() : r.lqr_ok();
        j["satisfied"] = ok;
        if (!ok) {
            if (opt_.strict) throw Error(ErrorCategory::Assumption, "structural assumptions do not hold: " + j.dump());
            err_ << "warning: structural assumptions do not hold: " << j.dump() << '\n';
        }
        return j;
    }

    fs::path write(const std::string& name, const std::string& content) {
        fs::create_directories(out_dir_);
        const fs::path path = out_dir_ / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorCategory::Configuration, "cannot write " + path.string());
        f << content;
        files_.push_back(path.string());
        return path;
    }

    fs::path write_json(const std::string& name, json body) {
        body["provenance"] = provenance_json(provenance_);
        return write(name, body.dump(2) + "\n");
    }

    const std::vector<std::string>& files() const { return files_; }

private:
    std::string command_;
    Options opt_;
    std::ostream& err_;
    Scenario scenario_;
    Provenance provenance_;
    fs::path out_dir_;
    std::optional<QWeightedMoments> moments_;
    std::optional<lqg::KalmanSchedule> kalman_;
    std::vector<std::string> files_;
};

std::string tag(double x) { return format_double(x); }

json steady_json(const Matrix& V, const Matrix& K, double rho) {
    return json{{"K", matrix_json(K)}, {"V", matrix_json(V)}, {"rho", rho}};
}

std::vector<double> mus_or(const Options& o, std::vector<double> fallback) { return o.mu.empty() ? fallback : o.mu; }

duality::RiskAwareProblem make_problem(Context& ctx) {
    const auto& sc = ctx.scenario();
    if (ctx.opt().mode == "lqg")
        return duality::RiskAwareProblem(sc.system, sc.cost, ctx.kalman(), sc.process_noise.mean(), sc.x0);
    if (ctx.opt().mode != "lqr") throw Error(ErrorCategory::Configuration, "--mode must be lqr or lqg here");
    return duality::RiskAwareProblem(sc.system, sc.cost, ctx.moments(), sc.x0);
}

baselines::LeqgMode leqg_mode(const Scenario& sc) {
    if (sc.partially_observed()) return baselines::LeqgMode::gaussian_output(sc.measurement_covariance());
    return baselines::LeqgMode::fully_observed();
}

int cmd_synthesize(Context& ctx, std::ostream& out) {
    const auto& sc = ctx.scenario();
    const auto& o = ctx.opt();
    json summary{{"command", "synthesize"}, {"mode", o.mode}, {"results", json::array()}};
    if (o.mode == "lqr") {
        const json assumptions = ctx.check_assumptions(false);
        const auto& mom = ctx.moments();
        for (double mu : mus_or(o, {0.0})) {
            const auto s = lqr::synthesize(sc.system, sc.cost, mom, mu);
            json body{{"scenario", sc.name}, {"mode", "lqr"}, {"mu", mu}, {"assumptions", assumptions}};
            json brief{{"mu", mu}};
            try {
                const auto st = lqr::steady_state(sc.system, sc.cost, mom, mu);
                body["steady"] = steady_json(st.V, st.K, st.rho);
                body["steady"]["l"] = vector_json(st.l);
                body["steady"]["xi"] = vector_json(st.xi);
                brief["K"] = matrix_json(st.K);
                brief["rho"] = st.rho;
            } catch (const Error& e) {
                body["steady_error"] = e.what();
                brief["steady_error"] = e.what();
            }
            body["schedule"] = schedule_json(s);
            brief["file"] = ctx.write_json("synthesize_lqr_mu" + tag(mu) + ".json", body).string();
            summary["results"].push_back(brief);
        }
    } else if (o.mode == "lqg") {
        const json assumptions = ctx.check_assumptions(true);
        const auto& k = ctx.kalman();
        const Vector wbar = sc.process_noise.mean();
        for (double mu : mus_or(o, {0.0})) {
            const auto s = lqg::synthesize(sc.system, sc.cost, k, mu, wbar);
            const auto st = lqg::steady_state(sc.system, sc.cost, k, mu);
            json body{{"scenario", sc.name}, {"mode", "lqg"}, {"mu", mu}, {"assumptions", assumptions},
                      {"steady", steady_json(st.V, st.K, st.rho)}, {"kalman", kalman_json(k)},
                      {"schedule", schedule_json(s)}};
            json brief{{"mu", mu}, {"K", matrix_json(st.K)}, {"rho", st.rho}, {"filter_rho", k.filter_rho}};
            brief["file"] = ctx.write_json("synthesize_lqg_mu" + tag(mu) + ".json", body).string();
            summary["results"].push_back(brief);
        }
    } else if (o.mode == "leqg") {
        if (!o.theta) throw Error(ErrorCategory::Configuration, "--mode leqg needs --theta");
        const json assumptions = ctx.check_assumptions(sc.partially_observed());
        const auto g = baselines::synthesize_leqg(sc.system, sc.cost, sc.process_noise.covariance(),
                                                  sc.process_noise.mean(), *o.theta, leqg_mode(sc));
        json body{{"scenario", sc.name}, {"mode", "leqg"}, {"assumptions", assumptions}, {"schedule", schedule_json(g)}};
        json brief{{"theta", *o.theta}, {"K0", matrix_json(g.K.front())}};
        brief["file"] = ctx.write_json("synthesize_leqg_theta" + tag(*o.theta) + ".json", body).string();
        summary["results"].push_back(brief);
    } else {
        throw Error(ErrorCategory::Configuration, "unknown --mode '" + o.mode + "'");
    }
    summary["provenance"] = provenance_json(ctx.provenance());
    out << summary.dump(2) << '\n';
    return kOk;
}

int cmd_bisect(Context& ctx, std::ostream& out) {
    const auto& o = ctx.opt();
    if (!o.eps) throw Error(ErrorCategory::Configuration, "bisect needs --eps");
    ctx.check_assumptions(o.mode == "lqg");
    const auto problem = make_problem(ctx);
    const auto r = duality::bisect(problem, *o.eps);
    json body{{"scenario", ctx.scenario().name},
              {"mode", o.mode},
              {"eps", *o.eps},
              {"eps_bar", r.eps_bar},
              {"status", std::string(duality::to_string(r.status))},
              {"mu_star", r.mu_star},
              {"J", r.J},
              {"J_R", r.J_R},
              {"cs_residual", r.cs_residual},
              {"iters", r.iters},
              {"certificates",
               {{"lagrangian_minimized", r.certificates.lagrangian_minimized},
                {"primal_feasible", r.certificates.primal_feasible},
                {"complementary_slackness", r.certificates.complementary_slackness},
                {"feasibility_gap", r.certificates.feasibility_gap}}}};
    if (r.status == duality::BisectionStatus::Infeasible) {
        const auto inf = duality::eps_infimum_estimate(problem);
        body["eps_bar_inf_estimate"] = inf.eps_bar_inf_estimate;
        body["eps_bar_inf_reliable"] = inf.reliable;
    }
    ctx.write_json("bisection.json", body);
    body["provenance"] = provenance_json(ctx.provenance());
    out << body.dump(2) << '\n';
    if (r.status == duality::BisectionStatus::Infeasible) {
        ctx.err() << "infeasible: eps_bar = " << format_double(r.eps_bar)
                  << " is below the smallest achievable risk " << format_double(r.J_R) << '\n';
        return kInfeasible;
    }
    return kOk;
}

int cmd_evaluate_risk(Context& ctx, std::ostream& out) {
    const auto& o = ctx.opt();
    ctx.check_assumptions(o.mode == "lqg");
    const auto problem = make_problem(ctx);
    const double offset = problem.eps_bar(0.0) * -1.0;
    json rows = json::array();
    for (double mu : mus_or(o, {0.0})) {
        const double eps_bar = o.eps ? problem.eps_bar(*o.eps) : 0.0;
        const auto e = problem.evaluate(mu, eps_bar);
        json row{{"mu", mu}, {"J", e.J}, {"J_R", e.J_R}, {"predictive_variance", e.J_R + offset}};
        if (o.eps) row["D"] = e.D;
        rows.push_back(row);
    }
    json body{{"scenario", ctx.scenario().name}, {"mode", o.mode}, {"fourth_moment_offset", offset}, {"rows", rows}};
    if (o.eps) {
        body["eps"] = *o.eps;
        body["eps_bar"] = problem.eps_bar(*o.eps);
    }
    ctx.write_json("risk.json", body);
    body["provenance"] = provenance_json(ctx.provenance());
    out << body.dump(2) << '\n';
    return kOk;
}

// Controller for one (mode, μ or θ) choice on the scenario.
sim::Controller build_controller(Context& ctx, const std::string& mode, double param) {
    const auto& sc = ctx.scenario();
    if (mode == "lqr") {
        const auto s = lqr::synthesize(sc.system, sc.cost, ctx.moments(), param);
        return sim::Controller::from_lqr(param == 0.0 ? "lqr" : "risk_aware_mu" + tag(param), s);
    }
    if (mode == "lqg") {
        const auto& k = ctx.kalman();
        const Vector wbar = sc.process_noise.mean();
        const auto s = lqg::synthesize(sc.system, sc.cost, k, param, wbar);
        return sim::Controller::from_lqg(param == 0.0 ? "lqg" : "risk_aware_mu" + tag(param), k, s, wbar);
    }
    if (mode == "leqg") {
        const auto g = baselines::synthesize_leqg(sc.system, sc.cost, sc.process_noise.covariance(),
                                                  sc.process_noise.mean(), param, leqg_mode(sc));
        return sim::Controller::from_leqg("leqg_theta" + tag(param), g, sc.cost.Q(), sc.process_noise.mean());
    }
    throw Error(ErrorCategory::Configuration, "unknown --mode '" + mode + "'");
}

std::optional<NoiseSpec> simulated_measurement(const Context& ctx) {
    const auto& sc = ctx.scenario();
    if (!sc.partially_observed()) return std::nullopt;
    if (ctx.opt().zero_noise) return NoiseSpec::zero(sc.system.m());
    return sc.measurement_noise;
}

NoiseSpec simulated_process(const Context& ctx) {
    const auto& sc = ctx.scenario();
    return ctx.opt().zero_noise ? NoiseSpec::zero(sc.system.n()) : sc.process_noise;
}

json stats_json(const sim::EnsembleStats& s) {
    json j{{"mean_total_cost", s.total_cost.value},
           {"total_cost_std_error", s.total_cost.std_error},
           {"rollouts", s.total_cost.samples},
           {"mean_state_penalty", s.state_penalty.mean()},
           {"mean_input_penalty", s.input_penalty.mean()}};
    json q = json::object();
    for (double p : {0.5, 0.9, 0.95, 0.99})
        if (s.state_penalty.size() > 0) q[format_double(p)] = s.state_penalty.quantile(p);
    j["state_penalty_quantiles"] = q;
    if (s.predictive_variance) {
        j["predictive_variance"] = s.predictive_variance->value;
        j["predictive_variance_std_error"] = s.predictive_variance->std_error;
    }
    return j;
}

int cmd_simulate(Context& ctx, std::ostream& out) {
    const auto& o = ctx.opt();
    const auto& sc = ctx.scenario();
    const int N = sc.cost.horizon();
    double param = 0.0;
    if (o.mode == "leqg") {
        if (!o.theta) throw Error(ErrorCategory::Configuration, "--mode leqg needs --theta");
        param = *o.theta;
    } else if (!o.mu.empty()) {
        if (o.mu.size() > 1) throw Error(ErrorCategory::Configuration, "simulate takes a single --mu");
        param = o.mu.front();
    }
    ctx.check_assumptions(o.mode == "lqg" || (o.mode == "leqg" && sc.partially_observed()));
    const auto controller = build_controller(ctx, o.mode, param);
    sim::EnsembleOptions eo;
    eo.keep_first_trace = true;
    std::optional<double> closed_form;
    if (o.mode == "lqr" && !o.zero_noise) {
        const auto& mom = ctx.moments();
        eo.model = sim::FullyObservedModel{mom.W, mom.wbar};
        const auto problem = duality::RiskAwareProblem(sc.system, sc.cost, mom, sc.x0);
        closed_form = problem.risk(param) - problem.eps_bar(0.0);
    } else if (o.mode == "lqg" && !o.zero_noise) {
        eo.model = sim::FilteredModel{ctx.kalman()};
        const auto problem = make_problem(ctx);
        closed_form = problem.risk(param) - problem.eps_bar(0.0);
    }
    const std::vector<sim::Controller> cs{controller};
    auto res = sim::ensemble(sc.system, sc.cost, cs, simulated_process(ctx), simulated_measurement(ctx), sc.x0, N,
                             o.rollouts, o.seed, eo);
    auto& entry = res.at(controller.id);
    if (!entry.stats) throw DivergenceError(entry.error, -1);
    std::ostringstream csv;
    write_trace_csv(csv, *entry.stats->first_trace, ctx.provenance());
    ctx.write("trace_" + controller.id + ".csv", csv.str());
    json body{{"scenario", sc.name}, {"mode", o.mode}, {"controller", controller.id}, {"horizon", N},
              {"stats", stats_json(*entry.stats)}};
    if (closed_form) body["closed_form_predictive_variance"] = *closed_form;
    ctx.write_json("simulate_" + controller.id + ".json", body);
    body["provenance"] = provenance_json(ctx.provenance());
    out << body.dump(2) << '\n';
    return kOk;
}

int cmd_breakdown(Context& ctx, std::ostream& out) {
    const auto& sc = ctx.scenario();
    const auto r = baselines::find_breakdown_theta(sc.system, sc.cost, sc.process_noise.covariance(), 1e-6,
                                                   leqg_mode(sc));
    json body{{"scenario", sc.name},
              {"horizon", sc.cost.horizon()},
              {"partially_observed", sc.partially_observed()},
              {"theta_breakdown", r.theta},
              {"reached_cap", r.reached_cap},
              {"evaluations", r.evaluations}};
    ctx.write_json("breakdown.json", body);
    body["provenance"] = provenance_json(ctx.provenance());
    out << body.dump(2) << '\n';
    return kOk;
}

int cmd_reproduce(Context& ctx, std::ostream& out) {
    const auto& o = ctx.opt();
    const auto& fig = o.figure;
    const auto& sc = ctx.scenario();
    const int N = sc.cost.horizon();
    const bool partial = fig == "fig5" || fig == "fig6";
    std::vector<sim::Controller> cs;
    if (!partial) {
        cs.push_back(build_controller(ctx, "lqr", 0.0));
        for (double mu : mus_or(o, {1.0}))
            if (mu != 0.0) cs.push_back(build_controller(ctx, "lqr", mu));
        cs.push_back(build_controller(ctx, "leqg", o.theta.value_or(0.0012)));
    } else {
        for (double mu : mus_or(o, {0.0, 0.5, 100.0})) cs.push_back(build_controller(ctx, "lqg", mu));
        cs.push_back(build_controller(ctx, "leqg", o.theta.value_or(0.005)));
    }
    sim::EnsembleOptions eo;
    eo.keep_first_trace = true;
    auto res = sim::ensemble(sc.system, sc.cost, cs, simulated_process(ctx), simulated_measurement(ctx), sc.x0, N, 1,
                             o.seed, eo);
    json manifest{{"figure", fig}, {"scenario", sc.name}, {"horizon", N}, {"seed", o.seed},
                  {"controllers", json::array()}};
    for (const auto& c : cs) {
        const auto& e = res.at(c.id);
        json cj{{"id", c.id}};
        if (e.stats)
            cj["stats"] = stats_json(*e.stats);
        else
            cj["error"] = e.error;
        manifest["controllers"].push_back(cj);
    }
    for (const auto& c : cs)
        if (!res.at(c.id).stats) throw DivergenceError(c.id + ": " + res.at(c.id).error, -1);

    auto trace = [&](const sim::Controller& c) -> const sim::SimulationTrace& { return *res.at(c.id).stats->first_trace; };
    std::ostringstream csv;
    if (fig == "fig2" || fig == "fig5") {
        csv << "# config_hash=" << ctx.provenance().config_hash << " seed=" << o.seed << " version=" << kVersion << '\n';
        csv << "t";
        for (const auto& c : cs) csv << ",state_penalty_" << c.id;
        csv << '\n';
        for (int t = 0; t <= N; ++t) {
            csv << t;
            for (const auto& c : cs) csv << ',' << format_double(trace(c).state_penalty(t));
            csv << '\n';
        }
        ctx.write(fig + ".csv", csv.str());
    } else if (fig == "fig4") {
        csv << "# config_hash=" << ctx.provenance().config_hash << " seed=" << o.seed << " version=" << kVersion << '\n';
        csv << "t";
        for (const auto& c : cs) csv << ",x1_" << c.id << ",u1_" << c.id;
        csv << '\n';
        for (int t = 0; t < N; ++t) {
            csv << t;
            for (const auto& c : cs)
                csv << ',' << format_double(trace(c).states(0, t)) << ',' << format_double(trace(c).inputs(0, t));
            csv << '\n';
        }
        ctx.write(fig + ".csv", csv.str());
    } else if (fig == "fig3" || fig == "fig6") {
        std::vector<std::pair<std::string, const sim::EmpiricalDistribution*>> xs, us;
        for (const auto& c : cs) {
            xs.emplace_back(c.id, &res.at(c.id).stats->state_penalty);
            us.emplace_back(c.id, &res.at(c.id).stats->input_penalty);
        }
        write_cdf_csv(csv, xs, o.cdf_points, ctx.provenance());
        ctx.write(fig + (fig == "fig6" ? "_state.csv" : ".csv"), csv.str());
        if (fig == "fig6") {
            std::ostringstream ucsv;
            write_cdf_csv(ucsv, us, o.cdf_points, ctx.provenance());
            ctx.write("fig6_input.csv", ucsv.str());
        }
        // Tail probabilities above the risk-neutral percentiles.
        const auto& base = res.at(cs.front().id).stats->state_penalty;
        json tails = json::array();
        for (double p : {0.9, 0.95, 0.99, 0.999}) {
            const double tau = base.quantile(p);
            json row{{"percentile", p}, {"threshold", tau}};
            for (const auto& c : cs) row[c.id] = res.at(c.id).stats->state_penalty.tail_prob(tau);
            tails.push_back(row);
        }
        manifest["tail_probabilities"] = tails;
    } else {
        throw Error(ErrorCategory::Configuration, "unknown figure '" + fig + "' (expected fig2..fig6)");
    }
    ctx.write_json(fig + "_manifest.json", manifest);
    json summary{{"figure", fig}, {"files", ctx.files()}, {"provenance", provenance_json(ctx.provenance())}};
    out << summary.dump(2) << '\n';
    return kOk;
}

void add_common(CLI::App* app, Options& o) {
    app->add_option("--scenario", o.scenario, "catalog name, catalog:<name>, or JSON scenario file");
    app->add_option("--horizon", o.horizon, "override the scenario horizon");
    app->add_option("--out", o.out, "output directory (default $RALQ_OUT_DIR or .)");
    app->add_option("--seed", o.seed, "base seed");
    app->add_flag("--strict", o.strict, "treat failed structural assumptions as errors");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Risk-aware LQR/LQG synthesis, analysis and simulation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Options o;

    auto* syn = app.add_subcommand("synthesize", "write gain schedules and steady gains");
    add_common(syn, o);
    syn->add_option("--mu", o.mu, "multiplier(s)")->delimiter(',');
    syn->add_option("--theta", o.theta, "exponential-cost parameter (leqg)");
    syn->add_option("--mode", o.mode, "lqr | lqg | leqg");

    auto* bis = app.add_subcommand("bisect", "find the optimal multiplier for a risk budget");
    add_common(bis, o);
    bis->add_option("--eps", o.eps, "risk budget")->required();
    bis->add_option("--mode", o.mode, "lqr | lqg");

    auto* simc = app.add_subcommand("simulate", "closed-loop Monte Carlo");
    add_common(simc, o);
    simc->add_option("--mu", o.mu, "multiplier")->delimiter(',');
    simc->add_option("--theta", o.theta, "exponential-cost parameter (leqg)");
    simc->add_option("--mode", o.mode, "lqr | lqg | leqg");
    simc->add_option("--rollouts", o.rollouts, "number of rollouts");
    simc->add_flag("--zero-noise", o.zero_noise, "simulate without noise");

    auto* ev = app.add_subcommand("evaluate-risk", "closed-form risk and cost over a multiplier grid");
    add_common(ev, o);
    ev->add_option("--mu", o.mu, "multiplier(s)")->delimiter(',');
    ev->add_option("--eps", o.eps, "risk budget for the dual value");
    ev->add_option("--mode", o.mode, "lqr | lqg");

    auto* br = app.add_subcommand("breakdown-scan", "largest exponential-cost parameter before breakdown");
    add_common(br, o);

    auto* rep = app.add_subcommand("reproduce", "data series behind the experiment figures");
    add_common(rep, o);
    rep->add_option("figure", o.figure, "fig2 | fig3 | fig4 | fig5 | fig6")->required();
    rep->add_option("--mu", o.mu, "multiplier(s)")->delimiter(',');
    rep->add_option("--theta", o.theta, "exponential-cost parameter");
    rep->add_option("--cdf-points", o.cdf_points, "threshold grid size for CDF files");
    rep->add_flag("--zero-noise", o.zero_noise, "simulate without noise");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (syn->parsed()) {
            Context ctx("synthesize", o, "double_integrator_wind", err);
            return cmd_synthesize(ctx, out);
        }
        if (bis->parsed()) {
            Context ctx("bisect", o, "toy_scalar", err);
            return cmd_bisect(ctx, out);
        }
        if (simc->parsed()) {
            Context ctx("simulate", o, "double_integrator_wind", err);
            return cmd_simulate(ctx, out);
        }
        if (ev->parsed()) {
            Context ctx("evaluate-risk", o, "double_integrator_wind", err);
            return cmd_evaluate_risk(ctx, out);
        }
        if (br->parsed()) {
            Context ctx("breakdown-scan", o, "double_integrator_wind", err);
            return cmd_breakdown(ctx, out);
        }
        if (rep->parsed()) {
            const bool partial = o.figure == "fig5" || o.figure == "fig6";
            Context ctx("reproduce", o, partial ? "double_integrator_lqg" : "double_integrator_wind", err);
            return cmd_reproduce(ctx, out);
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.category()) << "]: " << e.what() << '\n';
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

} // namespace ralq::cli
