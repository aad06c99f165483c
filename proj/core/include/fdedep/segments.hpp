#pragma once

#include "fdedep/sampled_fn.hpp"

#include <cstddef>
#include <functional>

namespace fdedep {

/// Number of grid steps of length h in `span`, snapped to the nearest integer.
std::size_t grid_steps(double span, double h);

/// Element of C([-r, 0], R^N): the state x_t of a retarded equation.
class HistorySegment {
public:
    explicit HistorySegment(SampledFn fn);

    static HistorySegment constant(double r, double h, const Vec& value);
    static HistorySegment sample(double r, double h, std::size_t dim,
                                 const std::function<Vec(double)>& fn);

    double r() const noexcept { return static_cast<double>(fn_.size() - 1) * fn_.h(); }
    double h() const noexcept { return fn_.h(); }
    std::size_t dim() const noexcept { return fn_.dim(); }
    std::size_t nodes() const noexcept { return fn_.size(); }
    const SampledFn& fn() const noexcept { return fn_; }

    Vec eval(double theta) const { return fn_.eval(theta); }
    Vec head() const; ///< value at theta = 0
    SegmentView view() const { return {fn_.values(), fn_.dim(), fn_.h(), fn_.size()}; }

private:
    SampledFn fn_;
};

/// Element of C([sigma - r, sigma + a], R^N).
class Trajectory {
public:
    Trajectory(double sigma, double r, SampledFn fn);

    double sigma() const noexcept { return sigma_; }
    double r() const noexcept { return static_cast<double>(lag_) * fn_.h(); }
    double a() const noexcept { return static_cast<double>(forward_nodes() - 1) * fn_.h(); }
    double h() const noexcept { return fn_.h(); }
    std::size_t dim() const noexcept { return fn_.dim(); }
    std::size_t lag_nodes() const noexcept { return lag_; }
    /// Nodes in [sigma, sigma + a].
    std::size_t forward_nodes() const noexcept { return fn_.size() - lag_; }
    const SampledFn& fn() const noexcept { return fn_; }

    Vec eval(double t) const { return fn_.eval(t); }
    /// Value at the forward node sigma + j*h.
    std::span<const double> forward_node(std::size_t j) const { return fn_.node(lag_ + j); }

    /// x_t for t in [sigma, sigma + a]; exact index shift when t is a grid node.
    HistorySegment segment_at(double t) const;
    /// View of x_t at t = sigma + j*h.
    SegmentView view_at(std::size_t j) const;

private:
    double sigma_;
    std::size_t lag_;
    SampledFn fn_;
};

/// Element of C([-r, a], R^N) vanishing on [-r, 0].
class EtaFn {
public:
    EtaFn(double r, SampledFn fn);

    static EtaFn zero(double r, double h, double a, std::size_t dim);

    double r() const noexcept { return static_cast<double>(lag_) * fn_.h(); }
    double a() const noexcept { return static_cast<double>(forward_nodes() - 1) * fn_.h(); }
    double h() const noexcept { return fn_.h(); }
    std::size_t dim() const noexcept { return fn_.dim(); }
    std::size_t lag_nodes() const noexcept { return lag_; }
    std::size_t forward_nodes() const noexcept { return fn_.size() - lag_; }
    const SampledFn& fn() const noexcept { return fn_; }
    std::span<const double> forward_node(std::size_t j) const { return fn_.node(lag_ + j); }

    Vec eval(double t) const { return fn_.eval(t); }
    double sup_norm() const noexcept { return fn_.sup_norm(); }

private:
    std::size_t lag_;
    SampledFn fn_;
};

/// phi~: equals phi on [sigma - r, sigma] and phi(0) on [sigma, sigma + a].
Trajectory tilde_extend(const HistorySegment& phi, double sigma, double a);

/// eta in A(a, beta): zero on [-r, 0] and sup-norm < beta.
bool in_A(const EtaFn& eta, double a, double beta);

/// (phi~)_{sigma+t} + eta_t. Throws GridMismatch unless both share step and r.
HistorySegment compose_state(const Trajectory& phi_tilde, const EtaFn& eta, double t);

/// x = phi~ + eta on [sigma - r, sigma + eta.a()].
Trajectory reconstruct(const HistorySegment& phi, double sigma, const EtaFn& eta);

} // namespace fdedep
