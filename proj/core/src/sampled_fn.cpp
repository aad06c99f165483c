#include "fdedep/sampled_fn.hpp"

#include "fdedep/error.hpp"

#include <algorithm>
#include <cmath>

namespace fdedep {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double domain_tolerance(double t) { return 1e-9 * std::max(1.0, std::abs(t)); }

SampledFn::SampledFn(double t0, double h, std::size_t dim, std::vector<double> values)
    : t0_(t0), h_(h), dim_(dim), values_(std::move(values)) {
    if (!(h_ > 0.0) || !std::isfinite(h_)) throw InvalidArgument("grid step must be positive");
    if (dim_ == 0) throw InvalidArgument("dimension must be positive");
    if (values_.empty() || values_.size() % dim_ != 0)
        throw InvalidArgument("value count is not a positive multiple of the dimension");
}

SampledFn SampledFn::from_nodes(double t0, double h, const std::vector<Vec>& nodes) {
    if (nodes.empty()) throw InvalidArgument("no nodes");
    const std::size_t dim = nodes.front().size();
    std::vector<double> flat;
    flat.reserve(nodes.size() * dim);
    for (const auto& v : nodes) {
        if (v.size() != dim) throw InvalidArgument("node vectors differ in dimension");
        flat.insert(flat.end(), v.begin(), v.end());
    }
    return {t0, h, dim, std::move(flat)};
}

SampledFn SampledFn::constant(double t0, double h, std::size_t count, const Vec& value) {
    std::vector<double> flat;
    flat.reserve(count * value.size());
    for (std::size_t i = 0; i < count; ++i) flat.insert(flat.end(), value.begin(), value.end());
    return {t0, h, value.size(), std::move(flat)};
}

SampledFn SampledFn::sample(double t0, double h, std::size_t count, std::size_t dim,
                            const std::function<Vec(double)>& fn) {
    std::vector<double> flat;
    flat.reserve(count * dim);
    for (std::size_t i = 0; i < count; ++i) {
        Vec v = fn(t0 + static_cast<double>(i) * h);
        if (v.size() != dim) throw InvalidArgument("sampled value has wrong dimension");
        flat.insert(flat.end(), v.begin(), v.end());
    }
    return {t0, h, dim, std::move(flat)};
}

bool SampledFn::contains(double t) const noexcept {
    const double tol = domain_tolerance(t);
    return t >= t0_ - tol && t <= t1() + tol;
}

double SampledFn::eval_component(double t, std::size_t comp) const {
    if (!contains(t)) throw OutOfDomain(t);
    const std::size_t n = size();
    if (n == 1) return values_[comp];
    const double u = (t - t0_) / h_;
    if (u <= 0.0) return values_[comp];
    const auto last = static_cast<double>(n - 1);
    if (u >= last) return values_[(n - 1) * dim_ + comp];
    const auto i = static_cast<std::size_t>(u);
    const double w = u - static_cast<double>(i);
    const double a = values_[i * dim_ + comp];
    if (w == 0.0) return a;
    const double b = values_[(i + 1) * dim_ + comp];
    return a + w * (b - a);
}

void SampledFn::eval_into(double t, std::span<double> out) const {
    for (std::size_t c = 0; c < dim_; ++c) out[c] = eval_component(t, c);
}

Vec SampledFn::eval(double t) const {
    Vec out(dim_);
    eval_into(t, out);
    return out;
}

double SampledFn::sup_norm() const noexcept { return max_abs(values_); }

bool SampledFn::same_grid(const SampledFn& other) const noexcept {
    return dim_ == other.dim_ && size() == other.size() &&
           std::abs(h_ - other.h_) <= 1e-12 * h_ &&
           std::abs(t0_ - other.t0_) <= domain_tolerance(t0_);
}

double sup_dist(const SampledFn& f, const SampledFn& g) {
    if (!f.same_grid(g)) throw GridMismatch("sup_dist requires identical grids");
    double m = 0.0;
    const auto a = f.values();
    const auto b = g.values();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double SegmentView::at(std::size_t comp, double theta) const {
    const double rr = r();
    const double tol = domain_tolerance(theta);
    if (theta > tol || theta < -rr - tol) throw OutOfDomain(theta);
    double base;
    if (nodes_ == 1) {
        base = data_[comp];
    } else {
        const double u = (theta + rr) / h_;
        const auto last = static_cast<double>(nodes_ - 1);
        if (u <= 0.0) {
            base = data_[comp];
        } else if (u >= last) {
            base = data_[(nodes_ - 1) * dim_ + comp];
        } else {
            // Snap to a node when the position is within rounding of it.
            const double nearest = std::round(u);
            if (std::abs(u - nearest) <= 1e-9) {
                base = data_[static_cast<std::size_t>(nearest) * dim_ + comp];
            } else {
                const auto i = static_cast<std::size_t>(u);
                const double w = u - static_cast<double>(i);
                const double a = data_[i * dim_ + comp];
                base = a + w * (data_[(i + 1) * dim_ + comp] - a);
            }
        }
    }
    if (overlay_ != nullptr && theta > active_after_) base += overlay_->at(comp, theta);
    return base;
}

} // namespace fdedep
