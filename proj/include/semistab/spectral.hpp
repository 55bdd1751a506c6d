#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace semistab {

/// Spectral structure of a diagonalizable matrix: A = sum_j lambda_j P_j with
/// P_j the projection onto the j-th eigenspace along the others.
struct SpectralResolution {
    ComplexVector distinct_eigenvalues;
    std::vector<ComplexMatrix> projections;
    double cluster_tol = 0.0;
    std::size_t source_dim = 0;

    std::size_t size() const noexcept { return projections.size(); }
};

/// The matrix has no eigenbasis (it is not of scalar type).
struct Defective {
    linalg::EigenDecomposition eig;
    std::string reason;
};

using ResolutionResult = std::variant<SpectralResolution, Defective>;

inline bool is_scalar_type(const ResolutionResult& r) noexcept { return std::holds_alternative<SpectralResolution>(r); }

/// Truncation of a normal multiplication operator on l2.
struct DiagonalOperator {
    ComplexVector eigenvalues;
    std::string label;

    ComplexMatrix to_matrix() const {
        if (eigenvalues.empty()) throw InputError("DiagonalOperator: needs at least one eigenvalue");
        if (!all_finite(eigenvalues)) throw InputError("DiagonalOperator: non-finite eigenvalue");
        return ComplexMatrix::diagonal(eigenvalues);
    }

    /// lambda_n = i n - 1/n, n = 1..N: spectrum drifting toward the imaginary axis.
    static DiagonalOperator drifting(std::size_t count) {
        DiagonalOperator d{ComplexVector(count), "drifting"};
        for (std::size_t k = 1; k <= count; ++k) {
            const double n = static_cast<double>(k);
            d.eigenvalues[k - 1] = {-1.0 / n, n};
        }
        return d;
    }
};

inline ResolutionResult spectral_resolution(const ComplexMatrix& a, const linalg::EigenDecomposition& e,
                                            double tol = 1e-9) {
    if (!(tol > 0.0)) throw InputError("spectral_resolution: tol must be positive");
    if (!e.diagonalizable) {
        std::string why = "no eigenbasis: eigenvector residual " + std::to_string(e.residual);
        return Defective{e, std::move(why)};
    }
    const std::size_t n = a.n();
    const ComplexMatrix& v = *e.vectors;
    const ComplexMatrix vinv = linalg::inverse(v);

    SpectralResolution res;
    res.source_dim = n;
    res.cluster_tol = linalg::cluster_tolerance(tol, linalg::op_norm(a));
    std::size_t m = 0;
    const auto label = linalg::cluster_eigenvalues(e.eigenvalues, res.cluster_tol, &m);
    res.distinct_eigenvalues.assign(m, complex{});
    res.projections.assign(m, ComplexMatrix(n));
    std::vector<std::size_t> count(m, 0);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = label[k];
        res.distinct_eigenvalues[j] += e.eigenvalues[k];
        ++count[j];
        auto& p = res.projections[j];
        for (std::size_t r = 0; r < n; ++r) {
            const complex vr = v(r, k);
            for (std::size_t c = 0; c < n; ++c) p(r, c) += vr * vinv(k, c);
        }
    }
    for (std::size_t j = 0; j < m; ++j) res.distinct_eigenvalues[j] /= static_cast<double>(count[j]);
    return res;
}

/// Clusters eigenvalues within max(tol, 1e-10) * max(1, ||A||) and builds P_j = V D_j V^{-1}.
inline ResolutionResult spectral_resolution(const ComplexMatrix& a, double tol = 1e-9) {
    return spectral_resolution(a, linalg::eig(a, tol), tol);
}

/// E_A of the eigenvalue set {lambda_j : j in indices}. Indices are 0-based.
inline ComplexMatrix spectral_measure(const SpectralResolution& res, std::span<const std::size_t> indices) {
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    ComplexMatrix e(res.source_dim);
    for (const auto j : idx) {
        if (j >= res.size())
            throw InputError("spectral_measure: index " + std::to_string(j) + " out of range (m = " +
                             std::to_string(res.size()) + ")");
        e += res.projections[j];
    }
    return e;
}

enum class M0Method { Exact, Bounded };

inline const char* to_string(M0Method m) { return m == M0Method::Exact ? "exact" : "bounded"; }

struct M0Estimate {
    /// sup ||E_A(S)|| over the enumerated (exact) or sampled (bounded) subsets.
    double value = 1.0;
    M0Method method = M0Method::Exact;
    /// sum_j ||P_j||, a certified upper bound.
    double upper = 1.0;
};

struct M0Options {
    std::size_t subset_cap = 20;
    std::size_t random_subsets = 4096;
    std::uint64_t seed = 42;
    unsigned threads = 1;
};

/// Best uniform bound on the spectral measure, sup over Borel sets of ||E_A(delta)||.
/// In finite dimensions the sup runs over the 2^m eigenvalue subsets.
inline M0Estimate m0(const SpectralResolution& res, const M0Options& opt = {}) {
    const std::size_t m = res.size();
    if (m == 0) throw InputError("m0: empty resolution");
    M0Estimate out;
    out.upper = 0.0;
    for (const auto& p : res.projections) out.upper += linalg::op_norm(p);

    if (m <= opt.subset_cap && m < 63) {
        out.method = M0Method::Exact;
        const std::uint64_t total = std::uint64_t{1} << m;
        // Walk the subsets in Gray-code order so each step adds or removes one projection.
        out.value = parallel_max(total, opt.threads, [&](std::size_t begin, std::size_t end) {
            auto gray = [](std::uint64_t i) { return i ^ (i >> 1); };
            std::uint64_t code = gray(begin);
            ComplexMatrix e(res.source_dim);
            for (std::size_t j = 0; j < m; ++j)
                if (code >> j & 1u) e += res.projections[j];
            double best = linalg::op_norm(e);
            for (std::uint64_t i = begin + 1; i < end; ++i) {
                const std::uint64_t next = gray(i);
                const std::uint64_t flip = next ^ code;
                const auto j = static_cast<std::size_t>(std::countr_zero(flip));
                if (next & flip)
                    e += res.projections[j];
                else
                    e -= res.projections[j];
                code = next;
                best = std::max(best, linalg::op_norm(e));
            }
            return best;
        });
    } else {
        out.method = M0Method::Bounded;
        std::vector<std::vector<std::size_t>> subsets;
        subsets.reserve(m + opt.random_subsets);
        for (std::size_t j = 0; j < m; ++j) subsets.push_back({j});
        Rng rng(opt.seed);
        for (std::size_t s = 0; s < opt.random_subsets; ++s) {
            std::vector<std::size_t> pick;
            for (std::size_t j = 0; j < m; ++j)
                if (rng.bits() >> 63) pick.push_back(j);
            subsets.push_back(std::move(pick));
        }
        out.value = parallel_max(subsets.size(), opt.threads, [&](std::size_t begin, std::size_t end) {
            double best = 0.0;
            for (std::size_t s = begin; s < end; ++s) best = std::max(best, linalg::op_norm(spectral_measure(res, subsets[s])));
            return best;
        });
    }
    // the full set gives E_A(sigma(A)) = I, whose norm is 1
    out.value = std::max(out.value, 1.0);
    return out;
}

/// F(A) = sum_j F(lambda_j) P_j.
template <typename F>
ComplexMatrix borel_apply(const SpectralResolution& res, F&& f) {
    ComplexMatrix out(res.source_dim);
    for (std::size_t j = 0; j < res.size(); ++j) {
        const complex lambda = res.distinct_eigenvalues[j];
        const complex value = f(lambda);
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
            throw DomainError("borel_apply: function is not finite at eigenvalue (" + std::to_string(lambda.real()) +
                                  ", " + std::to_string(lambda.imag()) + ")",
                              lambda);
        }
        if (value == complex{}) continue;
        out += value * res.projections[j];
    }
    return out;
}

} // namespace semistab
