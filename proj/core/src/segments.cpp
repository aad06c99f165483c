#include "fdedep/segments.hpp"

#include "fdedep/error.hpp"

#include <cmath>
#include <string>

namespace fdedep {

std::size_t grid_steps(double span, double h) {
    if (!(span >= -domain_tolerance(span))) throw InvalidArgument("negative span");
    const double q = span / h;
    return static_cast<std::size_t>(std::llround(std::max(0.0, q)));
}

HistorySegment::HistorySegment(SampledFn fn) : fn_(std::move(fn)) {
    const double r = static_cast<double>(fn_.size() - 1) * fn_.h();
    if (std::abs(fn_.t0() + r) > domain_tolerance(r) + 1e-12 * fn_.h())
        throw InvalidArgument("history segment must start at -r (got t0 = " +
                              std::to_string(fn_.t0()) + ")");
}

HistorySegment HistorySegment::constant(double r, double h, const Vec& value) {
    const std::size_t n = grid_steps(r, h);
    return HistorySegment(SampledFn::constant(-static_cast<double>(n) * h, h, n + 1, value));
}

HistorySegment HistorySegment::sample(double r, double h, std::size_t dim,
                                      const std::function<Vec(double)>& fn) {
    const std::size_t n = grid_steps(r, h);
    std::vector<double> flat;
    flat.reserve((n + 1) * dim);
    for (std::size_t i = 0; i <= n; ++i) {
        // theta measured from the right end so that theta = 0 is hit exactly.
        const double theta = -static_cast<double>(n - i) * h;
        Vec v = fn(theta);
        if (v.size() != dim) throw InvalidArgument("initial value has wrong dimension");
        flat.insert(flat.end(), v.begin(), v.end());
    }
    return HistorySegment(SampledFn(-static_cast<double>(n) * h, h, dim, std::move(flat)));
}

Vec HistorySegment::head() const {
    auto n = fn_.node(fn_.size() - 1);
    return {n.begin(), n.end()};
}

Trajectory::Trajectory(double sigma, double r, SampledFn fn)
    : sigma_(sigma), lag_(grid_steps(r, fn.h())), fn_(std::move(fn)) {
    if (lag_ + 1 > fn_.size()) throw InvalidArgument("trajectory shorter than its delay span");
    const double expected_t0 = sigma_ - static_cast<double>(lag_) * fn_.h();
    if (std::abs(fn_.t0() - expected_t0) > domain_tolerance(expected_t0))
        throw InvalidArgument("trajectory grid does not start at sigma - r");
}

SegmentView Trajectory::view_at(std::size_t j) const {
    if (j >= forward_nodes()) throw OutOfDomain(sigma_ + static_cast<double>(j) * fn_.h());
    const std::size_t d = fn_.dim();
    return {fn_.values().subspan(j * d, (lag_ + 1) * d), d, fn_.h(), lag_ + 1};
}

HistorySegment Trajectory::segment_at(double t) const {
    const double tol = domain_tolerance(t);
    if (t < sigma_ - tol || t > sigma_ + a() + tol) throw OutOfDomain(t);
    const double u = (t - sigma_) / fn_.h();
    const double nearest = std::round(u);
    const std::size_t d = fn_.dim();
    if (std::abs(u - nearest) <= 1e-9 * std::max(1.0, std::abs(u))) {
        const auto j = static_cast<std::size_t>(std::max(0.0, nearest));
        auto span = fn_.values().subspan(j * d, (lag_ + 1) * d);
        return HistorySegment(SampledFn(-r(), fn_.h(), d, {span.begin(), span.end()}));
    }
    std::vector<double> flat((lag_ + 1) * d);
    for (std::size_t i = 0; i <= lag_; ++i) {
        const double theta = -static_cast<double>(lag_ - i) * fn_.h();
        const double s = std::max(fn_.t0(), std::min(fn_.t1(), t + theta));
        fn_.eval_into(s, std::span<double>(flat.data() + i * d, d));
    }
    return HistorySegment(SampledFn(-r(), fn_.h(), d, std::move(flat)));
}

EtaFn::EtaFn(double r, SampledFn fn) : lag_(grid_steps(r, fn.h())), fn_(std::move(fn)) {
    if (lag_ + 1 > fn_.size()) throw InvalidArgument("eta shorter than its delay span");
    if (std::abs(fn_.t0() + r) > domain_tolerance(r)) throw InvalidArgument("eta must start at -r");
    const auto vals = fn_.values();
    for (std::size_t i = 0; i < (lag_ + 1) * fn_.dim(); ++i)
        if (vals[i] != 0.0) throw InvalidArgument("eta must vanish on [-r, 0]");
}

EtaFn EtaFn::zero(double r, double h, double a, std::size_t dim) {
    const std::size_t nr = grid_steps(r, h);
    const std::size_t na = grid_steps(a, h);
    return {static_cast<double>(nr) * h,
            SampledFn(-static_cast<double>(nr) * h, h, dim,
                      std::vector<double>((nr + na + 1) * dim, 0.0))};
}

Trajectory tilde_extend(const HistorySegment& phi, double sigma, double a) {
    if (!(a >= 0.0)) throw InvalidArgument("tilde extension needs a >= 0");
    const double h = phi.h();
    const std::size_t na = grid_steps(a, h);
    const std::size_t d = phi.dim();
    std::vector<double> flat(phi.fn().values().begin(), phi.fn().values().end());
    const Vec head = phi.head();
    flat.reserve(flat.size() + na * d);
    for (std::size_t j = 0; j < na; ++j) flat.insert(flat.end(), head.begin(), head.end());
    return {sigma, phi.r(), SampledFn(sigma - phi.r(), h, d, std::move(flat))};
}

bool in_A(const EtaFn& eta, double a, double beta) {
    if (grid_steps(a, eta.h()) + 1 != eta.forward_nodes()) return false;
    const auto vals = eta.fn().values();
    for (std::size_t i = 0; i < (eta.lag_nodes() + 1) * eta.dim(); ++i)
        if (vals[i] != 0.0) return false;
    return eta.sup_norm() < beta;
}

HistorySegment compose_state(const Trajectory& phi_tilde, const EtaFn& eta, double t) {
    if (std::abs(phi_tilde.h() - eta.h()) > 1e-12 * eta.h() ||
        phi_tilde.lag_nodes() != eta.lag_nodes() || phi_tilde.dim() != eta.dim())
        throw GridMismatch("compose_state: phi~ and eta differ in step, delay span or dimension");
    const double tol = domain_tolerance(t);
    if (t < -tol || t > eta.a() + tol || t > phi_tilde.a() + tol) throw OutOfDomain(t);
    const HistorySegment base = phi_tilde.segment_at(phi_tilde.sigma() + t);
    const Trajectory eta_as_traj(0.0, eta.r(), eta.fn());
    const HistorySegment shift = eta_as_traj.segment_at(t);
    std::vector<double> flat(base.fn().values().begin(), base.fn().values().end());
    const auto add = shift.fn().values();
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] += add[i];
    return HistorySegment(SampledFn(-base.r(), base.h(), base.dim(), std::move(flat)));
}

Trajectory reconstruct(const HistorySegment& phi, double sigma, const EtaFn& eta) {
    if (std::abs(phi.h() - eta.h()) > 1e-12 * eta.h() || phi.nodes() != eta.lag_nodes() + 1 ||
        phi.dim() != eta.dim())
        throw GridMismatch("reconstruct: phi and eta differ in step, delay span or dimension");
    const Trajectory base = tilde_extend(phi, sigma, eta.a());
    std::vector<double> flat(base.fn().values().begin(), base.fn().values().end());
    const auto add = eta.fn().values();
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] += add[i];
    return {sigma, phi.r(), SampledFn(base.fn().t0(), phi.h(), phi.dim(), std::move(flat))};
}

} // namespace fdedep
