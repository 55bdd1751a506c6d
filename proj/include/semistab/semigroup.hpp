#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "spectral.hpp"

namespace semistab {

enum class Classification { UES, NotUES, Indeterminate };

inline const char* to_string(Classification c) {
    switch (c) {
    case Classification::UES: return "UES";
    case Classification::NotUES: return "NotUES";
    case Classification::Indeterminate: return "Indeterminate";
    }
    return "?";
}

/// s(A) = max Re lambda.
inline double spectral_bound(std::span<const complex> eigenvalues) {
    if (eigenvalues.empty()) throw InputError("spectral_bound: empty spectrum");
    double s = -std::numeric_limits<double>::infinity();
    for (const auto& z : eigenvalues) s = std::max(s, z.real());
    return s;
}

inline double spectral_bound(const SpectralResolution& res) { return spectral_bound(res.distinct_eigenvalues); }

// ---------------------------------------------------------------------------
// Growth curves
// ---------------------------------------------------------------------------

struct GrowthSample {
    double t = 0.0;
    /// ||e^{tA}||; may over/underflow for extreme t, log_norm stays exact.
    double norm = 0.0;
    double log_norm = 0.0;
    /// (1/t) ln ||e^{tA}||
    double rate = 0.0;
};

struct GrowthCurve {
    std::vector<GrowthSample> samples;
    std::string schedule;
    /// Set when the schedule stopped early because a sample was not representable.
    bool truncated = false;
};

/// Samples ||e^{tA}|| on t = t0 * 2^k, k = 0..doublings.
///
/// Successive samples are produced by squaring a normalised copy of e^{tA},
/// e^{2tA} = (e^{tA})^2, and carrying the scale in log form. This keeps samples
/// far beyond the binary64 range of ||e^{tA}|| usable, and makes the rate
/// sequence monotone up to one rounding of the norm (ln||E^2|| <= 2 ln||E||).
inline GrowthCurve growth_curve(const ComplexMatrix& a, double t0, int doublings) {
    require_square(a, "growth_curve");
    require_finite(a, "growth_curve");
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw InputError("growth_curve: t0 must be positive");
    if (doublings < 1) throw InputError("growth_curve: doublings must be >= 1");

    const std::size_t n = a.n();
    complex trace{};
    for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
    const double shift = trace.real() / static_cast<double>(n);
    ComplexMatrix centred = a;
    centred.add_diagonal(-shift);

    GrowthCurve curve;
    {
        std::ostringstream os;
        os.precision(17);
        os << "geometric t = t0 * 2^k, k = 0.." << doublings << ", t0 = " << t0;
        curve.schedule = os.str();
    }

    ComplexMatrix e = linalg::matrix_exp(centred, t0);
    double nrm = linalg::op_norm(e);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw RangeError("growth_curve: ||e^{t0 A}|| not representable", t0 / 2);
    double log_norm = shift * t0 + std::log(nrm);
    double t = t0;
    e *= 1.0 / nrm;
    curve.samples.push_back({t, std::exp(log_norm), log_norm, log_norm / t});

    for (int k = 1; k <= doublings; ++k) {
        e = e * e;
        nrm = linalg::op_norm(e);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) {
            curve.truncated = true;
            break;
        }
        t *= 2.0;
        log_norm = 2.0 * log_norm + std::log(nrm);
        e *= 1.0 / nrm;
        if (!std::isfinite(log_norm) || !std::isfinite(t)) {
            curve.truncated = true;
            break;
        }
        curve.samples.push_back({t, std::exp(log_norm), log_norm, log_norm / t});
    }
    return curve;
}

struct GrowthBoundEstimate {
    double value = 0.0;
    /// The value bounds the growth bound from above (it is an inf over sampled t).
    bool upper = true;
};

inline GrowthBoundEstimate growth_bound_estimate(const GrowthCurve& curve) {
    if (curve.samples.empty()) throw InputError("growth_bound_estimate: empty curve");
    double v = std::numeric_limits<double>::infinity();
    for (const auto& s : curve.samples) v = std::min(v, s.rate);
    return {v, true};
}

// ---------------------------------------------------------------------------
// Stability constants
// ---------------------------------------------------------------------------

struct BestConstantScan {
    double omega = 0.0;
    /// max over the grid of ||e^{tA}|| e^{-omega t}; a lower bound on the best M.
    double grid_sup = 1.0;
    /// sum_j ||P_j|| when A is of scalar type and omega >= s(A); +inf otherwise.
    double certified_upper = std::numeric_limits<double>::infinity();
    /// No bound found up to t_max (heuristic, never a proof of nonexistence).
    bool diverging = false;
    double t_max = 0.0;
    int samples = 0;
};

/// Grid for the constant scan: geometric from t_max * 1e-4 to t_max, plus t = 0.
inline std::vector<double> constant_scan_grid(double t_max, int samples) {
    std::vector<double> ts(static_cast<std::size_t>(samples));
    const double t_min = t_max * 1e-4;
    const double ratio = std::log(t_max / t_min);
    for (int i = 0; i < samples; ++i)
        ts[static_cast<std::size_t>(i)] = t_min * std::exp(ratio * static_cast<double>(i) / static_cast<double>(samples - 1));
    ts.back() = t_max;
    return ts;
}

inline BestConstantScan best_constant_scan(const ComplexMatrix& a, double omega, double t_max, int samples,
                                           const ResolutionResult& resolution) {
    require_square(a, "best_constant_scan");
    if (samples < 2) throw InputError("best_constant_scan: samples must be >= 2");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InputError("best_constant_scan: t_max must be positive");
    if (!std::isfinite(omega)) throw InputError("best_constant_scan: omega must be finite");

    BestConstantScan out;
    out.omega = omega;
    out.t_max = t_max;
    out.samples = samples;

    // ||e^{tA}|| e^{-omega t} = ||e^{t(A - omega I)}||
    ComplexMatrix shifted = a;
    shifted.add_diagonal(-omega);
    const auto ts = constant_scan_grid(t_max, samples);
    std::vector<double> values;
    values.reserve(ts.size());
    bool overflowed = false;
    for (const double t : ts) {
        try {
            const double v = linalg::op_norm(linalg::matrix_exp(shifted, t));
            if (!std::isfinite(v)) {
                overflowed = true;
                break;
            }
            values.push_back(v);
        } catch (const RangeError&) {
            overflowed = true;
            break;
        }
    }

    out.grid_sup = 1.0; // t = 0
    for (const double v : values) out.grid_sup = std::max(out.grid_sup, v);

    if (overflowed) {
        out.diverging = true;
    } else {
        const std::size_t q = std::max<std::size_t>(1, values.size() / 4);
        double first = 1.0;
        for (std::size_t i = 0; i < q; ++i) first = std::max(first, values[i]);
        bool increasing = true;
        double last = 0.0;
        for (std::size_t i = values.size() - q; i < values.size(); ++i) {
            last = std::max(last, values[i]);
            if (i > values.size() - q && !(values[i] > values[i - 1])) increasing = false;
        }
        out.diverging = increasing && last > 10.0 * first;
    }

    if (const auto* res = std::get_if<SpectralResolution>(&resolution)) {
        if (omega >= spectral_bound(*res)) {
            double sum = 0.0;
            for (const auto& p : res->projections) sum += linalg::op_norm(p);
            out.certified_upper = sum;
        }
    }
    return out;
}

inline BestConstantScan best_constant_scan(const ComplexMatrix& a, double omega, double t_max, int samples) {
    return best_constant_scan(a, omega, t_max, samples, spectral_resolution(a));
}

// ---------------------------------------------------------------------------
// Spectral mapping
// ---------------------------------------------------------------------------

struct SmtCheck {
    /// Largest matched |mu - e^{t lambda}| over eigenvalues mu of e^{tA}, divided by max(1, max |e^{t lambda}|).
    double max_mismatch = 0.0;
};

/// Compares sigma(e^{tA}) with e^{t sigma(A)} using a greedy nearest-pair matching.
inline SmtCheck smt_check(const ComplexMatrix& a, double t) {
    require_square(a, "smt_check");
    if (!(t >= 0.0)) throw InputError("smt_check: t must be >= 0");
    const auto lambda = linalg::eigenvalues(a);
    const auto mu = linalg::eigenvalues(linalg::matrix_exp(a, t));
    const std::size_t n = lambda.size();
    ComplexVector target(n);
    double scale = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        target[j] = std::exp(t * lambda[j]);
        scale = std::max(scale, std::abs(target[j]));
    }
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    pairs.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) pairs.emplace_back(std::abs(mu[i] - target[j]), i, j);
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> used_mu(n, false), used_target(n, false);
    double worst = 0.0;
    std::size_t matched = 0;
    for (const auto& [d, i, j] : pairs) {
        if (used_mu[i] || used_target[j]) continue;
        used_mu[i] = used_target[j] = true;
        worst = std::max(worst, d);
        if (++matched == n) break;
    }
    return {worst / scale};
}

// ---------------------------------------------------------------------------
// Full analysis
// ---------------------------------------------------------------------------

struct AnalyzeConfig {
    double tol = 1e-9;
    /// Growth curve start; 1/||A|| (or 1 for A = 0) when absent.
    std::optional<double> t0;
    int doublings = 12;
    double t_max = 1024.0;
    std::size_t subset_cap = 20;
    double rel_tol = 1e-3;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    int scan_samples = 400;
};

struct StabilityReport {
    ComplexVector eigenvalues;
    double spectral_bound = 0.0;
    GrowthCurve curve;
    GrowthBoundEstimate growth;
    /// growth estimate minus s(A)
    double sbegb_gap = 0.0;
    std::optional<M0Estimate> m0;
    BestConstantScan best_constant;
    Classification classification = Classification::NotUES;
    bool scalar_type = false;
    std::vector<std::string> warnings;
};

inline double default_t0(const ComplexMatrix& a) {
    const double na = linalg::op_norm(a);
    return na > 0.0 ? 1.0 / na : 1.0;
}

inline StabilityReport analyze(const ComplexMatrix& a, const AnalyzeConfig& cfg = {}) {
    require_square(a, "analyze");
    require_finite(a, "analyze");
    StabilityReport r;

    const auto e = linalg::eig(a, cfg.tol);
    r.eigenvalues = e.eigenvalues;
    r.spectral_bound = spectral_bound(r.eigenvalues);

    const auto resolution = spectral_resolution(a, e, cfg.tol);
    r.scalar_type = is_scalar_type(resolution);
    if (const auto* res = std::get_if<SpectralResolution>(&resolution)) {
        r.m0 = m0(*res, {cfg.subset_cap, 4096, cfg.seed, cfg.threads});
    } else {
        r.warnings.push_back("matrix is not diagonalizable (" + std::get<Defective>(resolution).reason +
                             "); spectral-measure checks skipped");
    }

    const double t0 = cfg.t0.value_or(default_t0(a));
    int doublings = cfg.doublings;
    if (t0 * std::ldexp(1.0, doublings) < cfg.t_max)
        doublings = static_cast<int>(std::ceil(std::log2(cfg.t_max / t0)));
    r.curve = growth_curve(a, t0, doublings);
    if (r.curve.truncated) r.warnings.push_back("growth curve truncated: ||e^{tA}|| left the representable range");
    r.growth = growth_bound_estimate(r.curve);
    r.sbegb_gap = r.growth.value - r.spectral_bound;

    // finite matrices satisfy s(A) = omega_0, so the constant is scanned at the exact growth bound
    r.best_constant = best_constant_scan(a, r.spectral_bound, cfg.t_max, cfg.scan_samples, resolution);
    if (r.best_constant.diverging)
        r.warnings.push_back("no stability constant found up to t_max for omega = s(A)");

    r.classification = r.spectral_bound < 0.0 ? Classification::UES : Classification::NotUES;
    return r;
}

} // namespace semistab
