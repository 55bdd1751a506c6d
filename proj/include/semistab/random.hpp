#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

#include "linalg.hpp"
#include "matrix.hpp"

namespace semistab {

/// Deterministic generator. Built directly on mt19937_64 bits so sequences do
/// not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 42) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

    double normal() {
        // Box-Muller; 1 - u keeps the log argument in (0, 1]
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    complex complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

inline ComplexMatrix random_matrix(std::size_t n, Rng& rng) {
    ComplexMatrix m(n);
    for (auto& z : m.data()) z = rng.complex_normal();
    return m;
}

/// Haar-like unitary from modified Gram-Schmidt (applied twice) on a Gaussian matrix.
inline ComplexMatrix random_unitary(std::size_t n, Rng& rng) {
    ComplexMatrix g = random_matrix(n, rng);
    ComplexMatrix q(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto v = g.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                complex dot{};
                for (std::size_t i = 0; i < n; ++i) dot += std::conj(q(i, k)) * v[i];
                for (std::size_t i = 0; i < n; ++i) v[i] -= dot * q(i, k);
            }
        }
        const double nv = norm2(v);
        for (auto& z : v) z /= nv;
        q.set_col(j, v);
    }
    return q;
}

/// Point uniformly distributed in the box [re_lo, re_hi] x [im_lo, im_hi] i.
inline complex random_in_box(Rng& rng, double re_lo, double re_hi, double im_lo, double im_hi) {
    const double re = rng.uniform(re_lo, re_hi);
    const double im = rng.uniform(im_lo, im_hi);
    return {re, im};
}

/// W diag(lambda) W^{-1}.
inline ComplexMatrix similar_to_diagonal(const ComplexMatrix& w, std::span<const complex> lambda) {
    ComplexMatrix wd = w;
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (std::size_t j = 0; j < w.cols(); ++j) wd(i, j) *= lambda[j];
    return wd * linalg::inverse(w);
}

/// Q diag(lambda) Q* with Q unitary.
inline ComplexMatrix random_normal_matrix(std::span<const complex> lambda, Rng& rng) {
    const ComplexMatrix q = random_unitary(lambda.size(), rng);
    ComplexMatrix qd = q;
    for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = 0; j < q.cols(); ++j) qd(i, j) *= lambda[j];
    return qd * q.adjoint();
}

} // namespace semistab
