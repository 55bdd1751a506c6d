#include <cmath>
#include <complex>
#include <limits>
#include <variant>

#include <gtest/gtest.h>

#include <semistab/spectral.hpp>

#include "oracles.hpp"

using namespace semistab;
using linalg::op_norm;

namespace {

SpectralResolution must_resolve(const ResolutionResult& r) {
    const auto* res = std::get_if<SpectralResolution>(&r);
    if (!res) throw std::runtime_error("expected a spectral resolution");
    return *res;
}

// index of the distinct eigenvalue nearest to z
std::size_t index_of(const SpectralResolution& res, complex z) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < res.size(); ++j)
        if (std::abs(res.distinct_eigenvalues[j] - z) < std::abs(res.distinct_eigenvalues[best] - z)) best = j;
    return best;
}

void expect_resolution_invariants(const ComplexMatrix& a, const SpectralResolution& res) {
    const std::size_t m = res.size();
    ComplexMatrix sum(res.source_dim), recon(res.source_dim);
    for (std::size_t j = 0; j < m; ++j) {
        sum += res.projections[j];
        recon += res.distinct_eigenvalues[j] * res.projections[j];
        for (std::size_t k = 0; k < m; ++k) {
            const ComplexMatrix prod = res.projections[j] * res.projections[k];
            const ComplexMatrix expected = j == k ? res.projections[j] : ComplexMatrix(res.source_dim);
            EXPECT_LE(op_norm(prod - expected), 1e-8 * std::max(1.0, op_norm(res.projections[j])));
        }
    }
    EXPECT_LE(op_norm(sum - ComplexMatrix::identity(res.source_dim)), 1e-8 * static_cast<double>(m));
    EXPECT_LE(op_norm(recon - a), 1e-8 * std::max(1.0, op_norm(a)));
}

} // namespace

TEST(SpectralResolution, Diagonal) {
    const ComplexMatrix a{{-1, 0}, {0, -2}};
    const auto res = must_resolve(spectral_resolution(a));
    ASSERT_EQ(res.size(), 2u);
    const auto i1 = index_of(res, -1.0), i2 = index_of(res, -2.0);
    EXPECT_LE(op_norm(res.projections[i1] - ComplexMatrix{{1, 0}, {0, 0}}), 1e-12);
    EXPECT_LE(op_norm(res.projections[i2] - ComplexMatrix{{0, 0}, {0, 1}}), 1e-12);
    expect_resolution_invariants(a, res);
}

TEST(SpectralResolution, NilpotentIsDefective) {
    const auto r = spectral_resolution(ComplexMatrix{{0, 1}, {0, 0}});
    ASSERT_TRUE(std::holds_alternative<Defective>(r));
    EXPECT_FALSE(std::get<Defective>(r).reason.empty());
}

TEST(SpectralResolution, ObliqueProjectionsByHand) {
    // A = W diag(1,2) W^{-1} with W = [[1,1],[0,1]]; P1 = [[1,-1],[0,0]], P2 = [[0,1],[0,1]]
    const ComplexMatrix w{{1, 1}, {0, 1}};
    const ComplexVector lambda{1.0, 2.0};
    const ComplexMatrix a = similar_to_diagonal(w, lambda);
    EXPECT_LE(op_norm(a - ComplexMatrix{{1, 1}, {0, 2}}), 1e-15);
    const auto res = must_resolve(spectral_resolution(a));
    const ComplexMatrix p1{{1, -1}, {0, 0}}, p2{{0, 1}, {0, 1}};
    // the hand values satisfy the defining identities
    EXPECT_EQ(p1 + p2, ComplexMatrix::identity(2));
    EXPECT_EQ(p1 * p2, ComplexMatrix(2));
    EXPECT_EQ(p1 + 2.0 * p2, a);
    EXPECT_LE(op_norm(res.projections[index_of(res, 1.0)] - p1), 1e-12);
    EXPECT_LE(op_norm(res.projections[index_of(res, 2.0)] - p2), 1e-12);
}

TEST(SpectralResolution, ClustersRepeatedEigenvalues) {
    Rng rng(4);
    const ComplexVector lambda{-1.0, -1.0, -1.0, complex(0.5, 1.0)};
    const ComplexMatrix a = random_normal_matrix(lambda, rng);
    const auto res = must_resolve(spectral_resolution(a));
    ASSERT_EQ(res.size(), 2u);
    EXPECT_NEAR(op_norm(res.projections[index_of(res, -1.0)]), 1.0, 1e-10);
    expect_resolution_invariants(a, res);
}

TEST(SpectralResolution, RandomDiagonalizableInvariants) {
    Rng rng(8);
    for (int trial = 0; trial < 25; ++trial) {
        const auto k = oracle::random_diagonalizable(rng, 1 + rng.below(8), -3, 1, -5, 5);
        expect_resolution_invariants(k.a, must_resolve(spectral_resolution(k.a)));
    }
}

TEST(SpectralMeasure, EmptyFullAndSingleton) {
    const ComplexMatrix a{{-1, 0}, {0, -2}};
    const auto res = must_resolve(spectral_resolution(a));
    EXPECT_EQ(spectral_measure(res, {}), ComplexMatrix(2));
    const std::vector<std::size_t> all{0, 1};
    EXPECT_LE(op_norm(spectral_measure(res, all) - ComplexMatrix::identity(2)), 1e-8);
    const std::vector<std::size_t> one{index_of(res, -1.0)};
    EXPECT_LE(op_norm(spectral_measure(res, one) - ComplexMatrix{{1, 0}, {0, 0}}), 1e-12);
}

TEST(SpectralMeasure, OutOfRangeIndex) {
    const auto res = must_resolve(spectral_resolution(ComplexMatrix{{-1, 0}, {0, -2}}));
    const std::vector<std::size_t> bad{2};
    EXPECT_THROW(spectral_measure(res, bad), InputError);
}

TEST(SpectralMeasure, MultiplicativeOverIntersectionsAndIdempotent) {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const auto k = oracle::random_diagonalizable(rng, 2 + rng.below(6), -3, 1, -5, 5);
        const auto res = must_resolve(spectral_resolution(k.a));
        std::vector<std::size_t> s1, s2, both;
        for (std::size_t j = 0; j < res.size(); ++j) {
            const bool in1 = rng.uniform() < 0.5, in2 = rng.uniform() < 0.5;
            if (in1) s1.push_back(j);
            if (in2) s2.push_back(j);
            if (in1 && in2) both.push_back(j);
        }
        const ComplexMatrix e1 = spectral_measure(res, s1), e2 = spectral_measure(res, s2);
        const double scale = std::max({1.0, op_norm(e1), op_norm(e2)});
        EXPECT_LE(op_norm(e1 * e2 - spectral_measure(res, both)), 1e-8 * scale * scale);
        EXPECT_LE(op_norm(e1 * e1 - e1), 1e-8 * scale * scale);
    }
}

TEST(M0, IdentityIsOneExact) {
    const auto res = must_resolve(spectral_resolution(ComplexMatrix::identity(4)));
    ASSERT_EQ(res.size(), 1u);
    const auto est = m0(res);
    EXPECT_EQ(est.method, M0Method::Exact);
    EXPECT_NEAR(est.value, 1.0, 1e-12);
}

TEST(M0, NormalMatricesGiveOne) {
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const auto k = oracle::random_normal(rng, 1 + rng.below(8), -3, 1, -5, 5);
        const auto est = m0(must_resolve(spectral_resolution(k.a)));
        EXPECT_EQ(est.method, M0Method::Exact);
        EXPECT_NEAR(est.value, 1.0, 1e-8);
        EXPECT_LE(est.value, est.upper + 1e-10);
    }
}

TEST(M0, ObliqueExampleByEnumeration) {
    const ComplexMatrix w{{1, 1}, {0, 1}};
    const ComplexVector lambda{1.0, 2.0};
    const auto res = must_resolve(spectral_resolution(similar_to_diagonal(w, lambda)));
    // brute force over the four subsets: {}, {1}, {2}, {1,2} -> 0, sqrt2, sqrt2, 1
    const double brute = std::max({0.0, oracle::norm2x2(ComplexMatrix{{1, -1}, {0, 0}}),
                                   oracle::norm2x2(ComplexMatrix{{0, 1}, {0, 1}}), 1.0});
    EXPECT_NEAR(brute, std::sqrt(2.0), 1e-15);
    const auto est = m0(res);
    EXPECT_EQ(est.method, M0Method::Exact);
    EXPECT_NEAR(est.value, brute, 1e-12);
    EXPECT_NEAR(est.upper, 2.0 * std::sqrt(2.0), 1e-12);
}

TEST(M0, DiagonalOperatorIsOneInBothModes) {
    const auto d = DiagonalOperator::drifting(24);
    const auto res = must_resolve(spectral_resolution(d.to_matrix()));
    ASSERT_EQ(res.size(), 24u);
    const auto bounded = m0(res, {.subset_cap = 20, .random_subsets = 256});
    EXPECT_EQ(bounded.method, M0Method::Bounded);
    EXPECT_NEAR(bounded.value, 1.0, 1e-10);
    EXPECT_NEAR(bounded.upper, 24.0, 1e-9);

    const auto small = DiagonalOperator{{-1.0, complex(-0.5, 2.0), complex(-2.0, -1.0)}, "three"};
    EXPECT_NEAR(m0(must_resolve(spectral_resolution(small.to_matrix()))).value, 1.0, 1e-10);
}

TEST(M0, ThreadCountDoesNotChangeResult) {
    Rng rng(19);
    const auto k = oracle::random_diagonalizable(rng, 8, -3, 1, -5, 5);
    const auto res = must_resolve(spectral_resolution(k.a));
    const auto one = m0(res, {.threads = 1});
    const auto four = m0(res, {.threads = 4});
    EXPECT_EQ(one.value, four.value);
    EXPECT_GE(one.value, 1.0 - 1e-10);
    EXPECT_LE(one.value, one.upper + 1e-10);
}

TEST(M0, BoundedLowerBoundNeverExceedsExact) {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto k = oracle::random_diagonalizable(rng, 6, -3, 1, -5, 5);
        const auto res = must_resolve(spectral_resolution(k.a));
        const auto exact = m0(res);
        const auto sampled = m0(res, {.subset_cap = 2, .random_subsets = 64});
        EXPECT_EQ(sampled.method, M0Method::Bounded);
        EXPECT_LE(sampled.value, exact.value + 1e-12);
        EXPECT_NEAR(sampled.upper, exact.upper, 1e-12);
    }
}

TEST(BorelApply, IdentityIndicatorAndExponential) {
    Rng rng(25);
    for (int trial = 0; trial < 20; ++trial) {
        const auto k = oracle::random_diagonalizable(rng, 2 + rng.below(6), -3, 1, -5, 5);
        const auto res = must_resolve(spectral_resolution(k.a));
        const double na = op_norm(k.a);
        EXPECT_LE(op_norm(borel_apply(res, [](complex z) { return z; }) - k.a), 1e-8 * na);

        const complex target = res.distinct_eigenvalues[0];
        const ComplexMatrix ind = borel_apply(res, [&](complex z) { return z == target ? complex(1.0) : complex(0.0); });
        EXPECT_EQ(ind, res.projections[0]);

        const double t = rng.uniform(0.0, 2.0);
        const ComplexMatrix fa = borel_apply(res, [t](complex z) { return std::exp(t * z); });
        const ComplexMatrix ex = linalg::matrix_exp(k.a, t);
        EXPECT_LE(op_norm(fa - ex), 1e-8 * std::max(1.0, op_norm(ex)));
    }
}

TEST(BorelApply, NonFiniteValueNamesEigenvalue) {
    const auto res = must_resolve(spectral_resolution(ComplexMatrix{{0, 0}, {0, -2}}));
    try {
        borel_apply(res, [](complex z) { return 1.0 / z; });
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_EQ(e.eigenvalue(), complex(0.0));
    }
}

TEST(BorelApply, SandwichProperty) {
    Rng rng(27);
    for (int trial = 0; trial < 40; ++trial) {
        const auto k = oracle::random_diagonalizable(rng, 1 + rng.below(8), -3, 1, -5, 5);
        const auto res = must_resolve(spectral_resolution(k.a));
        ComplexVector values(res.size());
        double sup = 0.0;
        for (auto& v : values) {
            v = rng.complex_normal() * rng.uniform(0.0, 4.0);
            sup = std::max(sup, std::abs(v));
        }
        const ComplexMatrix fa = borel_apply(res, [&](complex z) {
            return values[index_of(res, z)];
        });
        const double nf = op_norm(fa);
        EXPECT_LE(sup, nf + 1e-8);
        EXPECT_LE(nf, 4.0 * m0(res).value * sup + 1e-8);
    }
}
