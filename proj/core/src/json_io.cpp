#include "fdedep/json_io.hpp"

#include <cstdio>
#include <ostream>

namespace fdedep {

using nlohmann::json;

namespace {

template <class T>
json opt(const std::optional<T>& v) {
    return v ? to_json(*v) : json(nullptr);
}

json points(const std::vector<Point>& ps) {
    json out = json::array();
    for (const auto& p : ps) out.push_back(p);
    return out;
}

} // namespace

json to_json(const Witness& w) {
    return {{"kind", to_string(w.kind)},
            {"x", w.x},
            {"t", w.t},
            {"n", w.n},
            {"gap", w.gap},
            {"eps", w.eps},
            {"probe", w.probe},
            {"sequence_n", w.sequence_n},
            {"sequence_x", points(w.sequence_x)}};
}

json to_json(const Resolution& r) {
    return {{"grid_step", r.grid_step},
            {"eps_ladder", r.eps_ladder},
            {"delta_ladder", r.delta_ladder},
            {"k_max", r.k_max},
            {"tail", r.tail}};
}

json to_json(const Verdict& v) {
    return {{"check", v.check},
            {"tag", to_string(v.tag)},
            {"meaning", v.refuted() ? "counterexample found; replay the witness to reproduce it"
                                    : "no counterexample at this resolution; this is not a proof"},
            {"witness", opt(v.witness)},
            {"resolution", to_json(v.resolution)}};
}

json to_json(const LabConfig& c) {
    return {{"k_max", c.k_max},
            {"tail", c.tail},
            {"sample_points", c.sample_points},
            {"compact_points", c.compact_points},
            {"pointwise_eps", c.pointwise_eps},
            {"uniform_eps", c.uniform_eps},
            {"cont_eps", c.cont_eps},
            {"probes_per_point", c.probes_per_point},
            {"eps_ladder", c.eps_ladder},
            {"delta_ladder", c.delta_ladder},
            {"members_continuous", c.members_continuous}};
}

json to_json(const ConsistencyMatrix& m) {
    json inc = json::array();
    for (const auto& i : m.inconsistencies) inc.push_back({{"rule", i.rule}, {"detail", i.detail}});
    return {{"pointwise", to_json(m.pointwise)},
            {"exhaustive", to_json(m.exhaustive)},
            {"weak_exhaustive", to_json(m.weak_exhaustive)},
            {"continuous_convergence", to_json(m.continuous)},
            {"uniform_on_compacta", to_json(m.uniform)},
            {"limit_continuous_on_samples", m.limit_continuous},
            {"limit_witness", opt(m.limit_witness)},
            {"inconsistencies", inc},
            {"config", to_json(m.config)}};
}

json to_json(const SolverOptions& o) {
    return {{"tol", o.tol},
            {"tube_radius", o.tube_radius},
            {"beta_fraction", o.beta_fraction},
            {"step_margin", o.step_margin},
            {"max_iter", o.max_iter},
            {"density", o.density},
            {"safety", o.safety},
            {"max_retries", o.max_retries},
            {"max_step", o.max_step ? json(*o.max_step) : json(nullptr)}};
}

json to_json(const StepRecord& s) {
    return {{"start", s.start},
            {"length", s.length},
            {"M", s.M},
            {"beta_bar", s.beta_bar},
            {"radius", s.radius},
            {"iterations", s.iterations},
            {"final_residual", s.final_residual()},
            {"residual_history", s.residual_history},
            {"iterate_norms", s.iterate_norms}};
}

json to_json(const SolveResult& r) {
    json steps = json::array();
    for (const auto& s : r.steps) steps.push_back(to_json(s));
    return {{"status", r.status == SolveStatus::Completed ? "Completed" : "Stalled"},
            {"stall_reason", r.stall_reason},
            {"achieved", r.achieved},
            {"global_residual", r.global_residual},
            {"steps", steps}};
}

json to_json(const ProblemSpec& p) {
    json phi = json::array();
    for (std::size_t i = 0; i < p.phi.nodes(); ++i) {
        const auto v = p.phi.fn().node(i);
        phi.push_back(std::vector<double>(v.begin(), v.end()));
    }
    return {{"sigma", p.sigma}, {"r", p.r},           {"h", p.h},   {"horizon", p.horizon},
            {"dim", p.dim()},   {"rhs", p.f.print()}, {"phi", phi}};
}

json to_json(const TubeBound& b) {
    return {{"M", b.M},
            {"k0", b.k0},
            {"observed_max", b.observed_max},
            {"radius", b.V.radius},
            {"t_begin", b.V.t_begin},
            {"t_end", b.V.t_end},
            {"sampled_k", b.sampled_k},
            {"member_max", b.member_max}};
}

json to_json(const RandomTubeCheck& c) {
    return {{"samples", c.samples}, {"above_bound", c.above_bound}, {"max_value", c.max_value}};
}

json to_json(const LadderCheck& c) { return {{"passed", c.passed}, {"detail", c.detail}}; }

json to_json(const MemberResult& m) {
    return {{"k", m.k},
            {"c", m.c},
            {"sigma", m.sigma},
            {"achieved", m.achieved},
            {"reached", m.reached},
            {"completed", m.completed},
            {"stall_reason", m.stall_reason},
            {"e", m.e},
            {"e_eta", m.e_eta},
            {"phi_drift", m.phi_drift},
            {"steps", m.steps},
            {"picard_iterations", m.picard_iterations},
            {"global_residual", m.global_residual},
            {"max_step_bound", m.max_step_bound},
            {"bound_checked", m.bound_checked},
            {"evaluations", m.evaluations},
            {"above_bound", m.above_bound},
            {"violations", m.violations}};
}

json to_json(const DependenceOptions& o) {
    return {{"a_prime", o.a_prime},
            {"tail_start", o.tail_start},
            {"eps_ladder", o.eps_ladder},
            {"delta", o.delta},
            {"cont_eps", o.cont_eps},
            {"theta_samples", o.theta_samples},
            {"random_samples", o.random_samples},
            {"seed", o.seed},
            {"uniqueness_check", o.uniqueness_check},
            {"solver", to_json(o.solver)}};
}

json to_json(const DependenceReport& r) {
    json members = json::array();
    for (const auto& m : r.members) members.push_back(to_json(m));
    json family = {{"base", to_json(r.spec.base)},
                   {"K", r.spec.K},
                   {"sigma_drift", r.spec.sigma_drift},
                   {"rhs_drift", r.spec.rhs_drift ? json(r.spec.rhs_drift->print()) : json(nullptr)}};
    if (r.spec.fourier) {
        family["fourier"] = {{"f", r.spec.fourier->f.print()}, {"quad_points", r.spec.fourier->quad_points}};
        family["c_rule"] = "sup |S_k - f|";
    } else {
        family["c_rule"] = {{"kind", to_string(r.spec.c_rule.kind)}, {"param", r.spec.c_rule.param}};
    }
    json psi = json::array();
    for (const auto& e : r.spec.phi_drift) psi.push_back(e.print());
    family["phi_drift"] = psi;

    const auto rate = [](const std::optional<RateFit>& f) -> json {
        if (!f) return nullptr;
        return {{"slope", f->slope}, {"points", f->points}, {"excluded", f->excluded}};
    };
    json uniq = {{"performed", r.uniqueness.performed},
                 {"agree", r.uniqueness.agree},
                 {"max_disagreement", r.uniqueness.max_disagreement},
                 {"starts", r.uniqueness.starts},
                 {"note", r.uniqueness.note}};
    return {{"family", family},
            {"options", to_json(r.options)},
            {"passed", r.passed()},
            {"existence", {{"passed", r.existence}, {"detail", r.existence_detail}}},
            {"error_ladder", to_json(r.error_ladder)},
            {"convergence", opt(r.convergence)},
            {"convergence_passed", r.convergence_passed},
            {"hypotheses",
             {{"bound", opt(r.bound)},
              {"rhs_convergence_on_tube", opt(r.rhs_convergence)},
              {"phi_convergence", to_json(r.phi_convergence)},
              {"sigma_convergence", to_json(r.sigma_convergence)},
              {"random_tube_check", opt(r.random_check)},
              {"solver_evaluations_checked", r.solver_evaluations_checked},
              {"solver_violations", r.solver_violations}}},
            {"rate", rate(r.rate)},
            {"rate_in_k", rate(r.rate_in_k)},
            {"rate_note", r.rate_note},
            {"uniqueness_spot_check", uniq},
            {"untestable", r.untestable},
            {"members", members}};
}

json to_json(const FourierCoeffs& c) { return {{"a", c.a}, {"b", c.b}, {"order", c.order()}}; }

json to_json(const FourierOptions& o) {
    return {{"c0", o.c0},
            {"horizon", o.horizon},
            {"h", o.h},
            {"orders", o.orders},
            {"quad_points", o.quad_points},
            {"rhs_grid", o.rhs_grid},
            {"reference_refinement", o.reference_refinement},
            {"solver", to_json(o.solver)}};
}

json to_json(const FourierReport& r) {
    json orders = json::array();
    for (const auto& o : r.orders)
        orders.push_back({{"n", o.n},
                          {"sup_rhs_err", o.sup_rhs_err},
                          {"sup_sol_err", o.sup_sol_err},
                          {"sup_sol_err_reference", o.sup_sol_err_reference},
                          {"gronwall_bound", o.gronwall_bound},
                          {"gronwall_holds", o.gronwall_holds},
                          {"completed", o.completed},
                          {"stall_reason", o.stall_reason}});
    return {{"options", to_json(r.options)},
            {"coefficients", to_json(r.coeffs)},
            {"lipschitz_estimate", r.lipschitz},
            {"total_variation", r.variation},
            {"total_variation_refined", r.variation_refined},
            {"variation_warning", r.variation_warning},
            {"continuous_on_samples", r.continuous_on_samples},
            {"base_completed", r.base_completed},
            {"reference_completed", r.reference_completed},
            {"base_stall_reason", r.base_stall_reason},
            {"reference_gap", r.reference_gap},
            {"orders", orders},
            {"continuous_convergence", to_json(r.continuous_convergence)},
            {"rhs_err_nonincreasing", r.rhs_err_nonincreasing},
            {"sol_err_decreasing", r.sol_err_decreasing},
            {"bessel_holds", r.bessel_holds},
            {"gronwall_all", r.gronwall_all}};
}

void write_fourier_csv(std::ostream& out, const FourierReport& report) {
    out << "n, sup_rhs_err, sup_sol_err\n";
    char buf[96];
    for (const auto& o : report.orders) {
        std::snprintf(buf, sizeof buf, "%zu, %.17g, %.17g\n", o.n, o.sup_rhs_err, o.sup_sol_err);
        out << buf;
    }
}

} // namespace fdedep
