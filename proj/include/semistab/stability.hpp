#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "semigroup.hpp"

// Resolvent conventions: R(lambda, A) = (A - lambda I)^{-1} throughout, so that
// for Re lambda beyond the growth bound R(lambda, A) f = -int_0^inf e^{-lambda t} e^{tA} f dt.

namespace semistab {

/// max(1, ||A||): the unit for absolute tolerances on A's spectrum.
inline double operator_scale(const ComplexMatrix& a) { return std::max(1.0, linalg::op_norm(a)); }

inline ComplexMatrix resolvent(const ComplexMatrix& a, complex lambda) {
    require_square(a, "resolvent");
    require_finite(a, "resolvent");
    ComplexMatrix shifted = a;
    shifted.add_diagonal(-lambda);
    try {
        return linalg::lu_solve(linalg::lu_factor(shifted), ComplexMatrix::identity(a.n()));
    } catch (const SingularError&) {
        const double d = linalg::sigma_min(shifted);
        throw SpectrumHitError("resolvent: lambda is (numerically) in the spectrum, sigma_min(A - lambda I) = " +
                                   std::to_string(d),
                               d);
    }
}

/// ||R(lambda, A)|| = 1 / sigma_min(A - lambda I).
inline double resolvent_norm(const ComplexMatrix& a, complex lambda) {
    require_square(a, "resolvent_norm");
    ComplexMatrix shifted = a;
    shifted.add_diagonal(-lambda);
    const double s = linalg::sigma_min(shifted);
    if (!(s > 1e-12 * operator_scale(a)))
        throw SpectrumHitError("resolvent_norm: lambda is (numerically) in the spectrum", s);
    return 1.0 / s;
}

// ---------------------------------------------------------------------------
// Certified supremum of ||R(i w, A)|| over the imaginary axis
// ---------------------------------------------------------------------------

struct AxisPoint {
    double omega = 0.0;
    double norm = 0.0;
};

struct ResolventScan {
    /// Every evaluated point, sorted by omega.
    std::vector<AxisPoint> axis_points;
    /// Enclosure of sup_w ||R(i w, A)||; lower is attained at argmax.
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    double argmax = 0.0;
    int refinement_depth = 0;
    double truncation_radius = 0.0;
    /// Bound for |w| > truncation_radius.
    double tail_bound = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

struct AxisScanOptions {
    int depth_cap = 40;
    std::size_t max_evaluations = 200000;
    std::size_t initial_intervals = 64;
};

/// Adaptive scan of the imaginary axis.
///
/// sigma(w) = sigma_min(A - i w I) is 1-Lipschitz in w (this is the resolvent
/// identity bound ||R1 - R2|| <= |l1 - l2| ||R1|| ||R2|| in reciprocal form), so on
/// [a, b] of width h, sigma >= (sigma_a + sigma_b - h) / 2 and the resolvent norm is
/// at most 2 / (sigma_a + sigma_b - h). The interval with the largest such bound is
/// bisected until the enclosure is within rel_tol. Beyond |w| = Omega the bound
/// 1 / (|w| - ||A||) covers the tail.
inline ResolventScan axis_sup(const ComplexMatrix& a, double rel_tol, std::span<const complex> eigenvalues,
                              const AxisScanOptions& opt = {}) {
    require_square(a, "axis_sup");
    require_finite(a, "axis_sup");
    if (!(rel_tol > 0.0)) throw InputError("axis_sup: rel_tol must be positive");
    {
        std::size_t worst = 0;
        for (std::size_t j = 1; j < eigenvalues.size(); ++j)
            if (eigenvalues[j].real() > eigenvalues[worst].real()) worst = j;
        if (eigenvalues.empty()) throw InputError("axis_sup: empty spectrum");
        if (!(eigenvalues[worst].real() < 0.0))
            throw PreconditionError("axis_sup: spectrum meets the closed right half-plane", eigenvalues[worst]);
    }

    const double na = linalg::op_norm(a);
    const double scale = std::max(1.0, na);
    const double omega_max = 2.0 * na + 10.0 * scale;
    const std::size_t n = a.n();
    // rounding allowance on each computed singular value
    const double slack = 16.0 * static_cast<double>(n) * linalg::kEps * (na + omega_max);

    ResolventScan scan;
    scan.truncation_radius = omega_max;
    scan.tail_bound = 1.0 / (omega_max - na);

    auto sigma_at = [&](double w) {
        ComplexMatrix shifted = a;
        shifted.add_diagonal(complex(0.0, -w));
        ++scan.evaluations;
        const double s = linalg::sigma_min(shifted);
        if (!(s > 0.0)) throw SpectrumHitError("axis_sup: imaginary axis meets the spectrum", s);
        return s;
    };

    std::vector<double> grid;
    const std::size_t k0 = std::max<std::size_t>(2, opt.initial_intervals);
    for (std::size_t k = 0; k <= k0; ++k)
        grid.push_back(-omega_max + 2.0 * omega_max * static_cast<double>(k) / static_cast<double>(k0));
    for (const auto& z : eigenvalues)
        if (std::abs(z.imag()) < omega_max) grid.push_back(z.imag());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [&](double x, double y) { return std::abs(x - y) <= 1e-12 * omega_max; }),
               grid.end());

    std::vector<AxisPoint> points;
    std::vector<double> sig(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        sig[k] = sigma_at(grid[k]);
        points.push_back({grid[k], 1.0 / sig[k]});
    }

    struct Interval {
        double a, b, sa, sb;
        int depth;
        double bound;
    };
    auto make = [&](double x, double y, double sx, double sy, int depth) {
        const double m = (sx - slack) + (sy - slack) - (y - x);
        return Interval{x, y, sx, sy, depth, m > 0.0 ? 2.0 / m : std::numeric_limits<double>::infinity()};
    };
    auto cmp = [](const Interval& p, const Interval& q) { return p.bound < q.bound; };
    std::priority_queue<Interval, std::vector<Interval>, decltype(cmp)> heap(cmp);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) heap.push(make(grid[k], grid[k + 1], sig[k], sig[k + 1], 0));

    auto record = [&](double w, double s) {
        points.push_back({w, 1.0 / s});
        if (1.0 / s > scan.lower) {
            scan.lower = 1.0 / s;
            scan.argmax = w;
        }
    };
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (1.0 / sig[k] > scan.lower) {
            scan.lower = 1.0 / sig[k];
            scan.argmax = grid[k];
        }

    while (true) {
        const Interval top = heap.top();
        const double upper = std::max(top.bound, scan.tail_bound);
        if (upper - scan.lower <= rel_tol * scan.lower) {
            scan.converged = true;
            break;
        }
        if (top.depth >= opt.depth_cap || scan.evaluations >= opt.max_evaluations) break;
        heap.pop();
        const double mid = 0.5 * (top.a + top.b);
        const double sm = sigma_at(mid);
        record(mid, sm);
        scan.refinement_depth = std::max(scan.refinement_depth, top.depth + 1);
        heap.push(make(top.a, mid, top.sa, sm, top.depth + 1));
        heap.push(make(mid, top.b, sm, top.sb, top.depth + 1));
    }
    scan.upper = std::max(heap.top().bound, scan.tail_bound);
    std::sort(points.begin(), points.end(), [](const AxisPoint& p, const AxisPoint& q) { return p.omega < q.omega; });
    scan.axis_points = std::move(points);
    return scan;
}

inline ResolventScan axis_sup(const ComplexMatrix& a, double rel_tol, const AxisScanOptions& opt = {}) {
    return axis_sup(a, rel_tol, linalg::eigenvalues(a), opt);
}

struct HalfPlaneSample {
    double max_interior = 0.0;
    complex argmax{};
};

/// Largest resolvent norm over `count` random points of {Re lambda > 0, |lambda| <= Omega}.
inline HalfPlaneSample half_plane_sample(const ComplexMatrix& a, const ResolventScan& scan, std::size_t count,
                                         std::uint64_t seed = 42, unsigned threads = 1) {
    const double r = scan.truncation_radius;
    Rng rng(seed);
    std::vector<complex> pts;
    pts.reserve(count);
    while (pts.size() < count) {
        const complex z(rng.uniform() * r, rng.uniform(-r, r));
        if (z.real() > 0.0 && std::abs(z) <= r) pts.push_back(z);
    }
    std::vector<double> norms(count, 0.0);
    parallel_max(count, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) norms[k] = resolvent_norm(a, pts[k]);
        return 0.0;
    });
    HalfPlaneSample out;
    for (std::size_t k = 0; k < count; ++k)
        if (norms[k] > out.max_interior) {
            out.max_interior = norms[k];
            out.argmax = pts[k];
        }
    return out;
}

// ---------------------------------------------------------------------------
// Gearhart-Pruss-Greiner classification
// ---------------------------------------------------------------------------

struct GpgVerdict {
    bool rhp_in_resolvent_set = false;
    std::optional<ResolventScan> axis;
    Classification classification = Classification::NotUES;
    bool indeterminate = false;
    /// Eigenvalue with the largest real part when the closed right half-plane is not resolvent.
    std::optional<complex> witness;
};

/// UES iff {Re lambda >= 0} lies in the resolvent set and the resolvent is bounded there.
/// Computed spectral bounds with 0 < |s(A)| <= 1e-10 * max(1, ||A||) are reported as indeterminate.
inline GpgVerdict gpg_classify(const ComplexMatrix& a, double rel_tol, std::span<const complex> eigenvalues,
                               const AxisScanOptions& opt = {}) {
    require_square(a, "gpg_classify");
    const double s = spectral_bound(eigenvalues);
    std::size_t worst = 0;
    for (std::size_t j = 1; j < eigenvalues.size(); ++j)
        if (eigenvalues[j].real() > eigenvalues[worst].real()) worst = j;
    const double band = 1e-10 * operator_scale(a);

    GpgVerdict v;
    if (s != 0.0 && std::abs(s) <= band) {
        v.indeterminate = true;
        v.classification = Classification::Indeterminate;
        v.witness = eigenvalues[worst];
        return v;
    }
    if (s >= 0.0) {
        v.classification = Classification::NotUES;
        v.witness = eigenvalues[worst];
        return v;
    }
    v.rhp_in_resolvent_set = true;
    v.axis = axis_sup(a, rel_tol, eigenvalues, opt);
    if (std::isfinite(v.axis->upper)) {
        v.classification = Classification::UES;
    } else {
        v.indeterminate = true;
        v.classification = Classification::Indeterminate;
    }
    return v;
}

inline GpgVerdict gpg_classify(const ComplexMatrix& a, double rel_tol, const AxisScanOptions& opt = {}) {
    return gpg_classify(a, rel_tol, linalg::eigenvalues(a), opt);
}

// ---------------------------------------------------------------------------
// Laplace representation of the resolvent
// ---------------------------------------------------------------------------

/// A certified estimate ||e^{tA}|| <= M e^{omega t} for all t >= 0.
struct ExponentialBound {
    double m = 1.0;
    double omega = 0.0;
};

struct LaplaceResult {
    ComplexVector value;
    /// Bound on the neglected integral over (T, inf).
    double tail_bound = 0.0;
};

namespace detail {

struct GaussRule {
    std::array<double, 16> nodes{};
    std::array<double, 16> weights{};
};

// 16-point Gauss-Legendre on [-1, 1] via Newton iteration on P_16.
inline const GaussRule& gauss_legendre16() {
    static const GaussRule rule = [] {
        GaussRule g;
        constexpr int n = 16;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0;
                double p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            g.nodes[static_cast<std::size_t>(i)] = x;
            g.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return g;
    }();
    return rule;
}

} // namespace detail

/// Tail bound of the truncated Laplace integral: M e^{(omega - Re lambda) T} / (Re lambda - omega) * ||f||.
inline double laplace_tail_bound(const ExponentialBound& b, complex lambda, double horizon, double fnorm) {
    const double gap = lambda.real() - b.omega;
    return b.m * std::exp(-gap * horizon) / gap * fnorm;
}

/// Smallest horizon T with tail bound <= target * ||f||.
inline double laplace_horizon(const ExponentialBound& b, complex lambda, double target) {
    const double gap = lambda.real() - b.omega;
    if (!(gap > 0.0)) throw PreconditionError("laplace_horizon: Re lambda must exceed omega", lambda);
    return std::max(std::log(b.m / (gap * target)) / gap, 1.0 / gap);
}

/// -int_0^T e^{-lambda t} e^{tA} f dt by composite 16-point Gauss-Legendre on `panels` equal panels.
inline LaplaceResult laplace_resolvent(const ComplexMatrix& a, complex lambda, std::span<const complex> f,
                                       double horizon, int panels, const ExponentialBound& bound) {
    require_square(a, "laplace_resolvent");
    require_finite(a, "laplace_resolvent");
    if (f.size() != a.n()) throw InputError("laplace_resolvent: vector is not conformable");
    if (!(lambda.real() > bound.omega))
        throw PreconditionError("laplace_resolvent: needs Re lambda > omega of the exponential bound", lambda);
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("laplace_resolvent: T must be positive");
    if (panels < 1) throw InputError("laplace_resolvent: panels must be >= 1");

    const auto& rule = detail::gauss_legendre16();
    const double h = horizon / panels;
    std::array<ComplexMatrix, 16> offsets;
    std::array<double, 16> tau{};
    for (std::size_t k = 0; k < 16; ++k) {
        tau[k] = 0.5 * h * (rule.nodes[k] + 1.0);
        offsets[k] = linalg::matrix_exp(a, tau[k]);
    }
    const ComplexMatrix step = linalg::matrix_exp(a, h);

    ComplexVector v(f.begin(), f.end()); // e^{a_p A} f at the panel start
    ComplexVector sum(a.n());
    for (int p = 0; p < panels; ++p) {
        const double start = p * h;
        for (std::size_t k = 0; k < 16; ++k) {
            const complex wgt = 0.5 * h * rule.weights[k] * std::exp(-lambda * (start + tau[k]));
            const ComplexVector y = offsets[k] * v;
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += wgt * y[i];
        }
        v = step * v;
    }
    for (auto& z : sum) z = -z;
    return {std::move(sum), laplace_tail_bound(bound, lambda, horizon, norm2(f))};
}

} // namespace semistab
