#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fdedep {

/// A point of R^N. The norm used throughout is the max-abs norm.
using Vec = std::vector<double>;

double max_abs(std::span<const double> v);

/// Relative slack used when deciding whether a time lies inside a grid domain.
double domain_tolerance(double t);

/// Continuous piecewise-linear function on the uniform grid t0 + i*h.
///
/// Node values are stored row-major: node i occupies values()[i*dim, (i+1)*dim).
/// A single-node function has the degenerate domain [t0, t0]; it is used for
/// history segments of the ODE case r = 0.
class SampledFn {
public:
    SampledFn(double t0, double h, std::size_t dim, std::vector<double> values);

    static SampledFn from_nodes(double t0, double h, const std::vector<Vec>& nodes);
    static SampledFn constant(double t0, double h, std::size_t count, const Vec& value);
    /// Samples `fn` at `count` nodes starting at t0.
    static SampledFn sample(double t0, double h, std::size_t count, std::size_t dim,
                            const std::function<Vec(double)>& fn);

    double t0() const noexcept { return t0_; }
    double h() const noexcept { return h_; }
    double t1() const noexcept { return time(size() - 1); }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return values_.size() / dim_; }
    double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * h_; }

    std::span<const double> node(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    double value(std::size_t i, std::size_t comp) const { return values_[i * dim_ + comp]; }
    std::span<const double> values() const noexcept { return values_; }

    bool contains(double t) const noexcept;
    Vec eval(double t) const;
    void eval_into(double t, std::span<double> out) const;
    /// Component `comp` at time t, linear interpolation between bracketing nodes.
    double eval_component(double t, std::size_t comp) const;

    double sup_norm() const noexcept;

    /// True when both functions share dim, step and left endpoint, and have the same node count.
    bool same_grid(const SampledFn& other) const noexcept;

private:
    double t0_;
    double h_;
    std::size_t dim_;
    std::vector<double> values_;
};

/// Max over nodes of the max-abs component difference. Throws GridMismatch.
double sup_dist(const SampledFn& f, const SampledFn& g);

/// Additive perturbation applied on top of a segment when sampling a tube.
class SegmentOverlay {
public:
    virtual ~SegmentOverlay() = default;
    virtual double at(std::size_t comp, double theta) const = 0;
};

/// Non-owning view of a history segment theta -> x(t + theta), theta in [-r, 0].
///
/// `data` holds nodes() * dim values in row-major order, node 0 at theta = -r.
class SegmentView {
public:
    SegmentView(std::span<const double> data, std::size_t dim, double h, std::size_t nodes)
        : data_(data), dim_(dim), h_(h), nodes_(nodes) {}

    SegmentView with_overlay(const SegmentOverlay* overlay, double active_after = -1e300) const {
        SegmentView v = *this;
        v.overlay_ = overlay;
        v.active_after_ = active_after;
        return v;
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t nodes() const noexcept { return nodes_; }
    double h() const noexcept { return h_; }
    double r() const noexcept { return static_cast<double>(nodes_ - 1) * h_; }

    /// Component `comp` at theta; the overlay only applies where theta > active_after.
    double at(std::size_t comp, double theta) const;

    /// Node value without overlay.
    double node_value(std::size_t node, std::size_t comp) const {
        return data_[node * dim_ + comp];
    }

private:
    std::span<const double> data_;
    std::size_t dim_;
    double h_;
    std::size_t nodes_;
    const SegmentOverlay* overlay_ = nullptr;
    double active_after_ = -1e300;
};

} // namespace fdedep
