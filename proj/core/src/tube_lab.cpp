#include "fdedep/tube_lab.hpp"

#include "fdedep/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fdedep {
namespace {

class ShiftOverlay final : public SegmentOverlay {
public:
    explicit ShiftOverlay(double c) : c_(c) {}
    double at(std::size_t, double) const override { return c_; }

private:
    double c_;
};

// Per-component piecewise-linear perturbation through equally spaced knots on [-r, 0].
class KnotOverlay final : public SegmentOverlay {
public:
    KnotOverlay(double r, std::size_t dim, std::size_t knots) : r_(r), dim_(dim), knots_(knots), v_(dim * knots) {}

    double& value(std::size_t comp, std::size_t j) { return v_[comp * knots_ + j]; }

    double at(std::size_t comp, double theta) const override {
        const double* v = v_.data() + comp * knots_;
        if (r_ <= 0.0 || knots_ == 1) return v[knots_ - 1];
        const double u = std::clamp((theta + r_) / r_, 0.0, 1.0) * static_cast<double>(knots_ - 1);
        const auto i = std::min(static_cast<std::size_t>(u), knots_ - 2);
        const double w = u - static_cast<double>(i);
        return v[i] + w * (v[i + 1] - v[i]);
    }

    std::size_t dim() const noexcept { return dim_; }

private:
    double r_;
    std::size_t dim_;
    std::size_t knots_;
    std::vector<double> v_;
};

std::vector<Expr::DelayRef> union_refs(const RhsFamily& family, const std::vector<std::size_t>& ks) {
    std::vector<Expr::DelayRef> refs;
    for (std::size_t k : ks)
        for (const auto& r : family[k].delay_refs())
            if (std::find(refs.begin(), refs.end(), r) == refs.end()) refs.push_back(r);
    return refs;
}

double clamp_time(const Trajectory& x0, double t) {
    return std::clamp(t, x0.sigma(), x0.sigma() + x0.a());
}

} // namespace

TubeBound uniform_bound_on_tube(const RhsFamily& family, const Trajectory& x0, double delta, double a_prime,
                                int density, double safety) {
    if (family.empty()) throw InvalidArgument("family is empty");
    if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
    if (a_prime > x0.a() + domain_tolerance(a_prime))
        throw InvalidArgument("reference trajectory is shorter than a'");
    const std::size_t K = family.size() - 1;
    const double rho = 0.5 * delta;
    Tube V{x0, rho, x0.sigma(), x0.sigma() + a_prime, std::nullopt};

    std::vector<std::size_t> ks{0};
    for (std::size_t k = std::max<std::size_t>(1, K / 2); K >= 1 && k <= K; ++k) ks.push_back(k);
    const auto refs = union_refs(family, ks);
    const double offsets[] = {-0.999 * rho, 0.0, 0.999 * rho};

    std::vector<double> member_max;
    for (std::size_t k : ks) {
        const RhsSystem& f = family[k];
        Vec out(f.dim());
        double m = 0.0;
        for_each_tube_sample(V, refs, density, [&](double tau, const SegmentView& view) {
            for (double o : offsets) {
                f.eval_into(tau + o, view, out);
                m = std::max(m, max_abs(out));
            }
        });
        member_max.push_back(m);
    }

    std::size_t k0 = ks.size() > 1 ? ks[1] : 0;
    if (ks.size() > 1) {
        // Running max over the tail, ascending in k.
        std::vector<double> running(ks.size() - 1);
        double acc = 0.0;
        for (std::size_t i = 1; i < ks.size(); ++i) running[i - 1] = acc = std::max(acc, member_max[i]);
        const double final_max = running.back();
        for (std::size_t i = 0; i < running.size(); ++i) {
            if (final_max <= 1.05 * running[i]) {
                k0 = ks[i + 1];
                break;
            }
        }
    }
    const double observed = *std::max_element(member_max.begin(), member_max.end());
    return {observed * safety, k0, std::move(V), observed, std::move(ks), std::move(member_max)};
}

bool in_tube(const Tube& V, double t, const SegmentView& psi) {
    const Trajectory& x0 = V.reference;
    const double rho = V.radius;
    if (psi.dim() != x0.dim()) throw GridMismatch("state dimension differs from the tube");
    if (std::abs(psi.r() - x0.r()) > 1e-9 * std::max(1.0, x0.r()))
        throw GridMismatch("state delay span differs from the tube");

    auto distance_below = [&](double tau) {
        for (std::size_t i = psi.nodes(); i-- > 0;) {
            const double theta = -psi.r() + static_cast<double>(i) * psi.h();
            for (std::size_t c = 0; c < psi.dim(); ++c) {
                const double d = std::abs(psi.at(c, theta) - x0.fn().eval_component(tau + theta, c));
                if (!(d < rho)) return false;
            }
        }
        return true;
    };

    const double lo = std::max(V.t_begin, t - rho);
    const double hi = std::min(V.t_end, t + rho);
    if (lo > hi) return false;
    if (t >= V.t_begin && t <= V.t_end && distance_below(t)) return true;
    const double h = x0.h();
    const auto j0 = static_cast<std::size_t>(std::max(0.0, std::ceil((lo - x0.sigma()) / h - 1e-9)));
    for (std::size_t j = j0; j < x0.forward_nodes(); ++j) {
        const double tau = x0.sigma() + static_cast<double>(j) * h;
        if (tau > hi) break;
        if (std::abs(t - tau) < rho && distance_below(tau)) return true;
    }
    return false;
}

RandomTubeCheck random_tube_check(const RhsFamily& family, const Tube& V, std::size_t k_lo, std::size_t k_hi,
                                  std::size_t count, std::uint64_t seed, double M) {
    if (k_lo > k_hi || k_hi >= family.size()) throw InvalidArgument("index range outside the family");
    const Trajectory& x0 = V.reference;
    const double rho = 0.999 * V.radius;
    constexpr std::size_t kKnots = 5;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> when(V.t_begin, V.t_end);
    std::uniform_int_distribution<std::size_t> index(k_lo, k_hi);

    RandomTubeCheck out;
    KnotOverlay ov(x0.r(), x0.dim(), kKnots);
    Vec value(x0.dim());
    for (std::size_t s = 0; s < count; ++s) {
        const double tau = when(rng);
        const double t = tau + rho * unit(rng);
        for (std::size_t c = 0; c < x0.dim(); ++c)
            for (std::size_t j = 0; j < kKnots; ++j) ov.value(c, j) = rho * unit(rng);
        const std::size_t k = index(rng);
        const HistorySegment seg = x0.segment_at(clamp_time(x0, tau));
        family[k].eval_into(t, seg.view().with_overlay(&ov), value);
        const double v = max_abs(value);
        out.max_value = std::max(out.max_value, v);
        if (v > M) ++out.above_bound;
        ++out.samples;
    }
    return out;
}

VaryingSeq tube_sequence(const RhsFamily& family, const Tube& V) {
    if (family.empty()) throw InvalidArgument("family is empty");
    const double rho = V.radius;
    auto eval = [family, V](std::size_t k, const Point& p) {
        const HistorySegment seg = V.reference.segment_at(clamp_time(V.reference, p[0]));
        const ShiftOverlay ov(p[1]);
        return family[k].eval(p[0], seg.view().with_overlay(&ov));
    };
    auto inside = [V, rho](std::size_t, const Point& p) {
        const double tol = domain_tolerance(V.t_end);
        return p.size() == 2 && p[0] >= V.t_begin - tol && p[0] <= V.t_end + tol && std::abs(p[1]) < rho;
    };
    return {eval, inside, [eval](const Point& p) { return eval(0, p); }, family.size() - 1};
}

Verdict check_tube_continuous_convergence(const RhsFamily& family, const Tube& V, double eps, std::size_t first,
                                          std::size_t time_samples) {
    if (time_samples < 2) throw InvalidArgument("need at least two time samples");
    const VaryingSeq seq = tube_sequence(family, V);
    const double rho = V.radius;
    const double lo = V.t_begin;
    const double hi = V.t_end;
    auto project = [lo, hi, rho](std::size_t, Point p) {
        p[0] = std::clamp(p[0], lo, hi);
        p[1] = std::clamp(p[1], -0.999 * rho, 0.999 * rho);
        return p;
    };
    std::vector<Point> points;
    for (std::size_t i = 0; i < time_samples; ++i) {
        const double tau = i + 1 == time_samples
                               ? hi
                               : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(time_samples - 1);
        for (double c : {-0.5 * rho, 0.0, 0.5 * rho}) points.push_back({tau, c});
    }
    auto probes = standard_probes(2, 0.5 * rho, project);
    probes.push_back(adversarial_probe(seq, rho, 8, project));
    Verdict v = check_generalized_cont_convergence(seq, points, probes, eps, first);
    v.check = "tube_continuous_convergence";
    return v;
}

} // namespace fdedep
