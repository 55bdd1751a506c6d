#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace semistab::linalg {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// ---------------------------------------------------------------------------
// LU factorisation with partial pivoting
// ---------------------------------------------------------------------------

struct LuFactor {
    ComplexMatrix lu;
    std::vector<std::size_t> perm;
    double min_pivot = 0.0;
};

/// Default singularity threshold: pivots at or below n * eps * ||M||_1 are rejected.
inline double default_pivot_threshold(const ComplexMatrix& m) {
    return static_cast<double>(m.rows()) * kEps * m.norm_one();
}

/// Factors PM = LU. Throws SingularError when a pivot falls to or below `threshold`.
inline LuFactor lu_factor(const ComplexMatrix& m, std::optional<double> threshold = std::nullopt) {
    require_square(m, "lu_factor");
    require_finite(m, "lu_factor");
    const std::size_t n = m.n();
    const double thr = threshold.value_or(default_pivot_threshold(m));
    LuFactor f{m, std::vector<std::size_t>(n), std::numeric_limits<double>::infinity()};
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    auto& a = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        f.min_pivot = std::min(f.min_pivot, best);
        if (!(best > thr)) {
            throw SingularError("matrix is numerically singular (pivot " + std::to_string(best) + ")", best);
        }
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(f.perm[k], f.perm[p]);
        }
        const complex inv = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const complex l = a(i, k) * inv;
            a(i, k) = l;
            if (l == complex{}) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
        }
    }
    return f;
}

/// Solves using a factorisation; `b` is overwritten with the solution (columns of a matrix).
inline ComplexMatrix lu_solve(const LuFactor& f, const ComplexMatrix& b) {
    const std::size_t n = f.lu.n();
    if (b.rows() != n) throw InputError("solve: right-hand side is not conformable");
    const std::size_t k = b.cols();
    ComplexMatrix x(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) x(i, j) = b(f.perm[i], j);
    const auto& a = f.lu;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < i; ++p) {
            const complex l = a(i, p);
            if (l == complex{}) continue;
            for (std::size_t j = 0; j < k; ++j) x(i, j) -= l * x(p, j);
        }
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t p = ii + 1; p < n; ++p) {
            const complex u = a(ii, p);
            if (u == complex{}) continue;
            for (std::size_t j = 0; j < k; ++j) x(ii, j) -= u * x(p, j);
        }
        const complex inv = 1.0 / a(ii, ii);
        for (std::size_t j = 0; j < k; ++j) x(ii, j) *= inv;
    }
    return x;
}

template <typename T>
struct Solution {
    T x;
    /// ||MX - B||_F / ||B||_F (0 when B = 0).
    double residual = 0.0;
};

inline Solution<ComplexMatrix> solve(const ComplexMatrix& m, const ComplexMatrix& b) {
    if (!b.all_finite()) throw InputError("solve: right-hand side has non-finite entries");
    const auto f = lu_factor(m);
    Solution<ComplexMatrix> s{lu_solve(f, b), 0.0};
    const double nb = b.norm_fro();
    const ComplexMatrix r = m * s.x - b;
    s.residual = nb > 0.0 ? r.norm_fro() / nb : r.norm_fro();
    return s;
}

inline Solution<ComplexVector> solve(const ComplexMatrix& m, std::span<const complex> b) {
    auto s = solve(m, ComplexMatrix::column(b));
    return {s.x.col(0), s.residual};
}

inline ComplexMatrix inverse(const ComplexMatrix& m) {
    return lu_solve(lu_factor(m), ComplexMatrix::identity(m.n()));
}

// ---------------------------------------------------------------------------
// Singular values (one-sided Jacobi)
// ---------------------------------------------------------------------------

struct Svd {
    /// Singular values in descending order.
    std::vector<double> sigma;
    /// Right singular vectors, column j pairs with sigma[j].
    ComplexMatrix v;
};

namespace detail {

// One-sided Hestenes-Jacobi on the columns of `a`. On exit the columns of `a`
// are mutually orthogonal and a_in * v = a_out. Column-major scratch keeps
// the inner loops contiguous.
inline void hestenes(std::vector<ComplexVector>& cols, std::vector<ComplexVector>* vcols) {
    const std::size_t n = cols.size();
    if (n < 2) return;
    const std::size_t m = cols[0].size();
    constexpr int kMaxSweeps = 80;
    // columns this far below ||M||_F are zero at working precision; rotating them only churns denormals
    double fro2 = 0.0;
    for (const auto& c : cols)
        for (const auto& x : c) fro2 += std::norm(x);
    const double negligible = fro2 * 1e-60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                auto& ci = cols[i];
                auto& cj = cols[j];
                double alpha = 0.0;
                double beta = 0.0;
                complex gamma{};
                for (std::size_t r = 0; r < m; ++r) {
                    alpha += std::norm(ci[r]);
                    beta += std::norm(cj[r]);
                    gamma += std::conj(ci[r]) * cj[r];
                }
                if (alpha <= negligible || beta <= negligible) continue;
                const double g = std::abs(gamma);
                if (g == 0.0 || g <= kEps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const complex phase = gamma / g;
                const double zeta = (beta - alpha) / (2.0 * g);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                const complex pc = std::conj(phase);
                for (std::size_t r = 0; r < m; ++r) {
                    const complex x = ci[r];
                    const complex y = pc * cj[r];
                    ci[r] = c * x - s * y;
                    cj[r] = s * x + c * y;
                }
                if (vcols) {
                    auto& vi = (*vcols)[i];
                    auto& vj = (*vcols)[j];
                    for (std::size_t r = 0; r < n; ++r) {
                        const complex x = vi[r];
                        const complex y = pc * vj[r];
                        vi[r] = c * x - s * y;
                        vj[r] = s * x + c * y;
                    }
                }
            }
        }
        if (!rotated) return;
    }
}

inline std::vector<ComplexVector> columns_of(const ComplexMatrix& m) {
    std::vector<ComplexVector> cols(m.cols(), ComplexVector(m.rows()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) cols[j][i] = m(i, j);
    return cols;
}

} // namespace detail

/// Singular values with right singular vectors. Wide inputs are handled via the adjoint
/// (only the values are meaningful then; `v` is left empty).
inline Svd svd(const ComplexMatrix& m) {
    require_finite(m, "svd");
    if (m.rows() < m.cols()) {
        auto s = svd(m.adjoint());
        return {std::move(s.sigma), ComplexMatrix{}};
    }
    auto cols = detail::columns_of(m);
    const std::size_t n = m.cols();
    std::vector<ComplexVector> vcols(n, ComplexVector(n));
    for (std::size_t j = 0; j < n; ++j) vcols[j][j] = 1.0;
    detail::hestenes(cols, &vcols);
    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t j = 0; j < n; ++j) order[j] = {norm2(cols[j]), j};
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    Svd out{std::vector<double>(n), ComplexMatrix(n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.sigma[k] = order[k].first;
        out.v.set_col(k, vcols[order[k].second]);
    }
    return out;
}

inline std::vector<double> singular_values(const ComplexMatrix& m) {
    require_finite(m, "singular_values");
    if (m.rows() < m.cols()) return singular_values(m.adjoint());
    auto cols = detail::columns_of(m);
    detail::hestenes(cols, nullptr);
    std::vector<double> s(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) s[j] = norm2(cols[j]);
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
}

/// Operator 2-norm (largest singular value).
inline double op_norm(const ComplexMatrix& m) {
    if (!m.all_finite()) throw InputError("op_norm: matrix has non-finite entries");
    if (m.empty()) return 0.0;
    return singular_values(m).front();
}

/// Smallest singular value of a square matrix.
inline double sigma_min(const ComplexMatrix& m) {
    require_square(m, "sigma_min");
    return singular_values(m).back();
}

/// 2-norm condition number; infinite for singular input.
inline double condition(const ComplexMatrix& m) {
    const auto s = singular_values(m);
    if (s.empty()) return 1.0;
    return s.back() > 0.0 ? s.front() / s.back() : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Matrix exponential: scaling and squaring with the degree-13 Pade approximant
// ---------------------------------------------------------------------------

inline constexpr double kPadeTheta13 = 5.4;

inline ComplexMatrix matrix_exp(const ComplexMatrix& a, double t = 1.0) {
    require_square(a, "matrix_exp");
    require_finite(a, "matrix_exp");
    if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("matrix_exp: t must be finite and >= 0");
    const std::size_t n = a.n();
    ComplexMatrix x = t * a;
    const double nrm = x.norm_one();
    if (nrm == 0.0) return ComplexMatrix::identity(n);

    bool diagonal = true;
    for (std::size_t i = 0; i < n && diagonal; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && x(i, j) != 0.0) {
                diagonal = false;
                break;
            }
    if (diagonal) {
        ComplexMatrix r(n);
        for (std::size_t i = 0; i < n; ++i) {
            r(i, i) = std::exp(x(i, i));
            if (!std::isfinite(r(i, i).real()) || !std::isfinite(r(i, i).imag()))
                throw RangeError("matrix_exp: e^{tA} overflows at t = " + std::to_string(t),
                                 700.0 / std::max(a.norm_one(), std::numeric_limits<double>::min()));
        }
        return r;
    }

    int s = 0;
    if (nrm > kPadeTheta13) s = static_cast<int>(std::ceil(std::log2(nrm / kPadeTheta13)));
    if (s > 0) x *= std::ldexp(1.0, -s);

    static constexpr double b[] = {64764752532480000.0,
                                   32382376266240000.0,
                                   7771770303897600.0,
                                   1187353796428800.0,
                                   129060195264000.0,
                                   10559470521600.0,
                                   670442572800.0,
                                   33522128640.0,
                                   1323241920.0,
                                   40840800.0,
                                   960960.0,
                                   16380.0,
                                   182.0,
                                   1.0};
    const ComplexMatrix x2 = x * x;
    const ComplexMatrix x4 = x2 * x2;
    const ComplexMatrix x6 = x4 * x2;

    ComplexMatrix inner_u = b[13] * x6 + b[11] * x4 + b[9] * x2;
    ComplexMatrix tu = x6 * inner_u + b[7] * x6 + b[5] * x4 + b[3] * x2;
    tu.add_diagonal(b[1]);
    const ComplexMatrix u = x * tu;

    ComplexMatrix inner_v = b[12] * x6 + b[10] * x4 + b[8] * x2;
    ComplexMatrix v = x6 * inner_v + b[6] * x6 + b[4] * x4 + b[2] * x2;
    v.add_diagonal(b[0]);

    ComplexMatrix r = lu_solve(lu_factor(v - u, 0.0), v + u);
    for (int k = 0; k < s; ++k) {
        r = r * r;
        if (!r.all_finite()) break;
    }
    if (!r.all_finite()) {
        const double an = std::max(a.norm_one(), std::numeric_limits<double>::min());
        throw RangeError("matrix_exp: e^{tA} overflows at t = " + std::to_string(t), 700.0 / an);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Eigenvalues: Householder Hessenberg reduction + Wilkinson-shifted complex QR
// ---------------------------------------------------------------------------

struct EigOptions {
    /// Total QR iteration budget is sweep_factor * n.
    int sweep_factor = 30;
    /// Deflation threshold relative to ||A||_F.
    double deflation = 1e-14;
    /// Eigenvector matrices with a larger 2-norm condition number are treated as singular.
    double vcond_cap = 1e8;
};

inline ComplexMatrix hessenberg(const ComplexMatrix& a) {
    require_square(a, "hessenberg");
    ComplexMatrix h = a;
    const std::size_t n = h.n();
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double xnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) xnorm += std::norm(h(i, k));
        xnorm = std::sqrt(xnorm);
        if (xnorm == 0.0) continue;
        const complex x0 = h(k + 1, k);
        const complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : complex{1.0};
        const complex alpha = -phase * xnorm;
        ComplexVector v(n - k - 1);
        for (std::size_t i = k + 1; i < n; ++i) v[i - k - 1] = h(i, k);
        v[0] -= alpha;
        const double vn = norm2(v);
        if (vn == 0.0) continue;
        for (auto& z : v) z /= vn;
        // H <- (I - 2vv*) H
        for (std::size_t j = 0; j < n; ++j) {
            complex s{};
            for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i - k - 1]) * h(i, j);
            s *= 2.0;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= v[i - k - 1] * s;
        }
        // H <- H (I - 2vv*)
        for (std::size_t i = 0; i < n; ++i) {
            complex s{};
            for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j - k - 1];
            s *= 2.0;
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= s * std::conj(v[j - k - 1]);
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
    return h;
}

namespace detail {

struct Givens {
    double c;
    complex s;
};

// [c s; -conj(s) c] [a; b] = [r; 0]
inline Givens make_givens(complex a, complex b) {
    const double ab = std::abs(b);
    if (ab == 0.0) return {1.0, 0.0};
    const double aa = std::abs(a);
    if (aa == 0.0) return {0.0, std::conj(b) / ab};
    const double nrm = std::hypot(aa, ab);
    return {aa / nrm, (a / aa) * std::conj(b) / nrm};
}

// Eigenvalue of [[a, b], [c, d]] closest to d.
inline complex wilkinson_shift(complex a, complex b, complex c, complex d) {
    const complex half_tr = 0.5 * (a + d);
    const complex det = a * d - b * c;
    const complex disc = std::sqrt(half_tr * half_tr - det);
    const complex l1 = half_tr + disc;
    const complex l2 = half_tr - disc;
    return std::abs(l1 - d) <= std::abs(l2 - d) ? l1 : l2;
}

} // namespace detail

/// Eigenvalues (with algebraic multiplicity) in deflation order.
inline ComplexVector eigenvalues(const ComplexMatrix& a, const EigOptions& opt = {}) {
    require_square(a, "eigenvalues");
    require_finite(a, "eigenvalues");
    const std::size_t n = a.n();
    ComplexMatrix h = hessenberg(a);
    const double abs_tol = opt.deflation * a.norm_fro();
    ComplexVector out(n);
    if (n == 1) {
        out[0] = h(0, 0);
        return out;
    }

    const long budget = static_cast<long>(opt.sweep_factor) * static_cast<long>(n);
    long total = 0;
    std::size_t hi = n - 1;
    int since_deflation = 0;
    std::vector<detail::Givens> rot(n);

    while (true) {
        // locate the active block [lo, hi]
        std::size_t lo = hi;
        while (lo > 0) {
            const double sub = std::abs(h(lo, lo - 1));
            const double local = kEps * (std::abs(h(lo, lo)) + std::abs(h(lo - 1, lo - 1)));
            if (sub <= std::max(abs_tol, local)) {
                h(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            out[hi] = h(hi, hi);
            if (hi == 0) break;
            --hi;
            since_deflation = 0;
            continue;
        }
        if (++total > budget) {
            throw ConvergenceError("eig: shifted QR did not converge on block [" + std::to_string(lo) + ", " +
                                       std::to_string(hi) + "]",
                                   lo, hi);
        }
        ++since_deflation;

        complex mu;
        if (since_deflation % 10 == 0) {
            // exceptional shift
            mu = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1).real()) + complex(0.0, std::abs(h(hi, hi - 1)));
        } else {
            mu = detail::wilkinson_shift(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
        }

        for (std::size_t i = lo; i <= hi; ++i) h(i, i) -= mu;
        for (std::size_t k = lo; k < hi; ++k) {
            const auto g = detail::make_givens(h(k, k), h(k + 1, k));
            rot[k] = g;
            for (std::size_t j = k; j <= hi; ++j) {
                const complex x = h(k, j);
                const complex y = h(k + 1, j);
                h(k, j) = g.c * x + g.s * y;
                h(k + 1, j) = -std::conj(g.s) * x + g.c * y;
            }
        }
        for (std::size_t k = lo; k < hi; ++k) {
            const auto& g = rot[k];
            const std::size_t last = std::min(k + 2, hi);
            for (std::size_t i = lo; i <= last; ++i) {
                const complex x = h(i, k);
                const complex y = h(i, k + 1);
                h(i, k) = x * g.c + y * std::conj(g.s);
                h(i, k + 1) = -x * g.s + y * g.c;
            }
        }
        for (std::size_t i = lo; i <= hi; ++i) h(i, i) += mu;
    }
    return out;
}

struct EigenDecomposition {
    ComplexVector eigenvalues;
    /// Unit-norm eigenvector columns; present when the matrix is diagonalizable.
    std::optional<ComplexMatrix> vectors;
    bool diagonalizable = false;
    /// ||AV - V Lambda|| / ||A|| for the candidate eigenvector matrix.
    double residual = 0.0;
    /// Condition number of V; present when diagonalizable.
    std::optional<double> vcond;
};

/// Groups eigenvalues into clusters by the transitive closure of |a - b| <= tol.
/// Returns cluster index per eigenvalue; clusters are numbered by first appearance.
inline std::vector<std::size_t> cluster_eigenvalues(std::span<const complex> values, double tol,
                                                    std::size_t* count = nullptr) {
    const std::size_t n = values.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(values[i] - values[j]) <= tol) parent[find(j)] = find(i);
    std::vector<std::size_t> label(n, n);
    std::vector<std::size_t> out(n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        if (label[r] == n) label[r] = next++;
        out[i] = label[r];
    }
    if (count) *count = next;
    return out;
}

/// Eigen-tolerance used both for grouping in eig and for spectral clustering.
inline double cluster_tolerance(double tol, double norm_a) { return std::max(tol, 1e-10) * std::max(1.0, norm_a); }

namespace detail {

inline ComplexVector inverse_iteration(const ComplexMatrix& a, complex lambda) {
    const std::size_t n = a.n();
    ComplexMatrix shifted = a;
    shifted.add_diagonal(-lambda);
    const double floor = kEps * std::max(1.0, a.norm_one());
    // Factor with a zero threshold, then lift tiny pivots to the floor so the
    // nearly singular solve amplifies the eigendirection instead of failing.
    LuFactor f{shifted, std::vector<std::size_t>(n), 0.0};
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    auto& m = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            std::swap(f.perm[k], f.perm[p]);
        }
        if (std::abs(m(k, k)) < floor) m(k, k) = floor;
        const complex inv = 1.0 / m(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const complex l = m(i, k) * inv;
            m(i, k) = l;
            for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
        }
    }
    ComplexMatrix x(n, 1);
    // fixed, non-symmetric start vector
    for (std::size_t i = 0; i < n; ++i) x(i, 0) = complex(1.0 + 0.1 * static_cast<double>(i % 7), 0.05 * static_cast<double>(i % 3));
    for (int it = 0; it < 3; ++it) {
        x = lu_solve(f, x);
        const double nx = x.norm_fro();
        if (!(nx > 0.0) || !std::isfinite(nx)) break;
        x *= 1.0 / nx;
    }
    return x.col(0);
}

} // namespace detail

/// Eigen-decomposition. Diagonalizable iff the eigenvector residual is within
/// tol * ||A|| and V has condition number below the configured cap.
inline EigenDecomposition eig(const ComplexMatrix& a, double tol = 1e-9, const EigOptions& opt = {}) {
    if (!(tol > 0.0)) throw InputError("eig: tol must be positive");
    EigenDecomposition out;
    out.eigenvalues = eigenvalues(a, opt);
    const std::size_t n = a.n();
    const double na = op_norm(a);

    std::size_t groups = 0;
    const auto label = cluster_eigenvalues(out.eigenvalues, cluster_tolerance(tol, na), &groups);
    ComplexMatrix v(n);
    for (std::size_t g = 0; g < groups; ++g) {
        std::vector<std::size_t> members;
        complex mean{};
        for (std::size_t i = 0; i < n; ++i)
            if (label[i] == g) {
                members.push_back(i);
                mean += out.eigenvalues[i];
            }
        mean /= static_cast<double>(members.size());
        if (members.size() == 1) {
            v.set_col(members[0], detail::inverse_iteration(a, out.eigenvalues[members[0]]));
        } else {
            // repeated eigenvalue: take the numerical null space of A - mu I
            ComplexMatrix shifted = a;
            shifted.add_diagonal(-mean);
            const auto s = svd(shifted);
            for (std::size_t k = 0; k < members.size(); ++k) v.set_col(members[k], s.v.col(n - 1 - k));
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        auto c = v.col(j);
        const double nc = norm2(c);
        if (nc > 0.0)
            for (auto& z : c) z /= nc;
        v.set_col(j, c);
    }

    ComplexMatrix r = a * v;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) -= v(i, j) * out.eigenvalues[j];
    const double rn = op_norm(r);
    out.residual = na > 0.0 ? rn / na : rn;
    const double vc = condition(v);
    out.diagonalizable = out.residual <= tol && vc <= opt.vcond_cap;
    if (out.diagonalizable) {
        out.vectors = std::move(v);
        out.vcond = vc;
    }
    return out;
}

} // namespace semistab::linalg
