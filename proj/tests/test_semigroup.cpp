#include <cmath>
#include <complex>
#include <limits>
#include <variant>

#include <gtest/gtest.h>

#include <semistab/semigroup.hpp>

#include "oracles.hpp"

using namespace semistab;
using linalg::matrix_exp;
using linalg::op_norm;

namespace {

const ComplexMatrix kNilpotent{{0, 1}, {0, 0}};

ComplexMatrix oblique_stable() {
    const ComplexMatrix w{{1, 1}, {0, 1}};
    const ComplexVector lambda{-1.0, -2.0};
    return similar_to_diagonal(w, lambda);
}

} // namespace

TEST(SpectralBound, Examples) {
    EXPECT_EQ(spectral_bound(ComplexVector{-1.0, -2.0}), -1.0);
    EXPECT_EQ(spectral_bound(ComplexVector{0.0, 0.0}), 0.0);
    const auto drift = DiagonalOperator::drifting(30);
    EXPECT_EQ(spectral_bound(drift.eigenvalues), -1.0 / 30.0);
    EXPECT_THROW(spectral_bound(ComplexVector{}), InputError);
}

TEST(GrowthCurve, ScalarDecay) {
    const auto c = growth_curve(ComplexMatrix{{-1.0}}, 0.25, 5);
    ASSERT_EQ(c.samples.size(), 6u);
    EXPECT_FALSE(c.truncated);
    for (std::size_t k = 0; k < c.samples.size(); ++k) {
        EXPECT_DOUBLE_EQ(c.samples[k].t, 0.25 * std::ldexp(1.0, static_cast<int>(k)));
        EXPECT_NEAR(c.samples[k].rate, -1.0, 1e-10);
    }
}

TEST(GrowthCurve, NilpotentMatchesClosedForm) {
    const auto c = growth_curve(kNilpotent, 1.0, 10);
    ASSERT_EQ(c.samples.back().t, 1024.0);
    for (const auto& s : c.samples) {
        const double ref = oracle::nilpotent_exp_norm(s.t);
        EXPECT_NEAR(s.norm, ref, 1e-10 * ref);
    }
    EXPECT_GT(c.samples.back().rate, 0.0);
    EXPECT_LT(c.samples.back().rate, 0.01);
    const auto est = growth_bound_estimate(c);
    EXPECT_TRUE(est.upper);
    EXPECT_GT(est.value, 0.0);
    EXPECT_LE(est.value, 0.01);
}

TEST(GrowthCurve, RandomDiagonalizableApproachesSpectralBound) {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const auto k = oracle::random_diagonalizable(rng, 6, -3, 1, -5, 5);
        const double s = oracle::max_real(k.lambda);
        const auto c = growth_curve(k.a, 1.0, 10);
        EXPECT_NEAR(c.samples.back().rate, s, 0.05);
    }
}

TEST(GrowthCurve, InputValidation) {
    EXPECT_THROW(growth_curve(kNilpotent, 0.0, 3), InputError);
    EXPECT_THROW(growth_curve(kNilpotent, 1.0, 0), InputError);
}

TEST(GrowthCurve, RatesAreMonotone) {
    Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix a = random_matrix(1 + rng.below(8), rng);
        const auto c = growth_curve(a, 0.01, 14);
        for (std::size_t k = 1; k < c.samples.size(); ++k)
            EXPECT_LE(c.samples[k].rate, c.samples[k - 1].rate + 1e-8);
    }
}

TEST(GrowthBoundEstimate, Examples) {
    EXPECT_NEAR(growth_bound_estimate(growth_curve(ComplexMatrix{{-1.0}}, 1.0, 6)).value, -1.0, 1e-10);
    const ComplexMatrix d{{complex(2, 3)}};
    // ||e^{tA}|| = e^{2t} exactly
    EXPECT_NEAR(growth_bound_estimate(growth_curve(d, 0.5, 6)).value, 2.0, 1e-10);
    EXPECT_THROW(growth_bound_estimate(GrowthCurve{}), InputError);
}

TEST(BestConstantScan, NormalDecay) {
    const ComplexMatrix a{{-1.0}};
    const auto scan = best_constant_scan(a, -1.0, 50.0, 200);
    EXPECT_NEAR(scan.grid_sup, 1.0, 1e-8);
    EXPECT_NEAR(scan.certified_upper, 1.0, 1e-12);
    EXPECT_FALSE(scan.diverging);
}

TEST(BestConstantScan, NilpotentDiverges) {
    const auto scan = best_constant_scan(kNilpotent, 0.0, 200.0, 400);
    EXPECT_TRUE(scan.diverging);
    EXPECT_GE(oracle::nilpotent_exp_norm(200.0), 200.0);
    EXPECT_GE(scan.grid_sup, 200.0);
    EXPECT_TRUE(std::isinf(scan.certified_upper));
}

TEST(BestConstantScan, ObliqueWithinSandwich) {
    const ComplexMatrix a = oblique_stable();
    const auto res = spectral_resolution(a);
    ASSERT_TRUE(is_scalar_type(res));
    const double m0v = m0(std::get<SpectralResolution>(res)).value;
    const auto scan = best_constant_scan(a, -1.0, 40.0, 400, res);
    EXPECT_GE(scan.grid_sup, 1.0);
    EXPECT_LE(scan.grid_sup, 4.0 * m0v + 1e-6);
    EXPECT_FALSE(scan.diverging);
    // dense uniform t-grid oracle: the scan is a lower bound on the true supremum
    double dense = 1.0;
    for (int i = 0; i <= 20000; ++i) {
        const double t = 40.0 * i / 20000.0;
        dense = std::max(dense, op_norm(matrix_exp(a, t)) * std::exp(t));
    }
    EXPECT_LE(scan.grid_sup, dense * (1.0 + 1e-9));
    EXPECT_NEAR(scan.grid_sup, dense, 1e-3 * dense);
    EXPECT_LE(dense, scan.certified_upper + 1e-9);
}

TEST(BestConstantScan, BelowSpectralBoundHasNoCertificate) {
    const auto scan = best_constant_scan(ComplexMatrix{{-1.0}}, -2.0, 20.0, 50);
    EXPECT_TRUE(std::isinf(scan.certified_upper));
    EXPECT_TRUE(scan.diverging);
    EXPECT_THROW(best_constant_scan(ComplexMatrix{{-1.0}}, -1.0, 20.0, 1), InputError);
}

TEST(SmtCheck, Examples) {
    EXPECT_EQ(smt_check(ComplexMatrix{{complex(-1, 2), 0}, {0, 3.0}}, 0.0).max_mismatch, 0.0);
    EXPECT_LE(smt_check(ComplexMatrix{{complex(-1, 2), 0}, {0, 0.5}}, 1.7).max_mismatch, 1e-12);
    Rng rng(47);
    for (int trial = 0; trial < 10; ++trial)
        EXPECT_LE(smt_check(random_matrix(6, rng), 1.0).max_mismatch, 1e-8);
}

TEST(Analyze, DiagonalStable) {
    const auto r = analyze(ComplexMatrix{{-1, 0}, {0, -2}});
    EXPECT_EQ(r.classification, Classification::UES);
    ASSERT_TRUE(r.m0.has_value());
    EXPECT_NEAR(r.m0->value, 1.0, 1e-10);
    EXPECT_LE(r.sbegb_gap, 1e-6);
    EXPECT_GE(r.sbegb_gap, -1e-8);
    EXPECT_TRUE(r.scalar_type);
}

TEST(Analyze, Nilpotent) {
    const auto r = analyze(kNilpotent);
    EXPECT_EQ(r.classification, Classification::NotUES);
    EXPECT_FALSE(r.scalar_type);
    EXPECT_FALSE(r.m0.has_value());
    EXPECT_TRUE(r.best_constant.diverging);
    EXPECT_EQ(r.spectral_bound, 0.0);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Analyze, ObliqueStable) {
    const auto r = analyze(oblique_stable());
    EXPECT_EQ(r.classification, Classification::UES);
    ASSERT_TRUE(r.m0.has_value());
    EXPECT_LE(r.best_constant.grid_sup, 4.0 * r.m0->value);
}

TEST(Analyze, InvariantUnderScalarTypeSimilarity) {
    Rng rng(53);
    for (int trial = 0; trial < 8; ++trial) {
        const auto k = oracle::random_diagonalizable(rng, 1 + rng.below(5), -3, 1, -5, 5);
        const ComplexMatrix w = random_matrix(k.a.n(), rng);
        const ComplexMatrix b = w * k.a * linalg::inverse(w);
        AnalyzeConfig cfg;
        cfg.scan_samples = 60;
        const auto ra = analyze(k.a, cfg), rb = analyze(b, cfg);
        EXPECT_EQ(ra.classification, rb.classification);
        EXPECT_NEAR(ra.spectral_bound, rb.spectral_bound, 1e-8);
    }
}

TEST(SemigroupInvariants, SbegbAndExponentialEstimate) {
    Rng rng(59);
    for (int trial = 0; trial < 15; ++trial) {
        const auto k = oracle::random_diagonalizable(rng, 1 + rng.below(8), -3, 1, -5, 5);
        const double s = oracle::max_real(k.lambda);
        const auto est = growth_bound_estimate(growth_curve(k.a, 1.0, 10));
        EXPECT_GE(est.value, s - 1e-8);
        EXPECT_LE(est.value - s, 0.05);

        const auto res = spectral_resolution(k.a);
        ASSERT_TRUE(is_scalar_type(res));
        const double m0v = m0(std::get<SpectralResolution>(res)).value;
        for (int i = 0; i < 10; ++i) {
            const double t = rng.uniform(0.0, 6.0);
            const double bound = 4.0 * m0v * std::exp(s * t);
            EXPECT_LE(op_norm(matrix_exp(k.a, t)), bound + 1e-8 * std::max(1.0, bound));
        }
    }
}

TEST(SemigroupInvariants, NormalGeneratorsAreContractiveUpToRate) {
    Rng rng(61);
    for (int trial = 0; trial < 15; ++trial) {
        const auto k = oracle::random_normal(rng, 1 + rng.below(8), -3, 1, -5, 5);
        const double s = oracle::max_real(k.lambda);
        for (int i = 0; i < 10; ++i) {
            const double t = rng.uniform(0.0, 5.0);
            const double ref = std::exp(s * t);
            EXPECT_NEAR(op_norm(matrix_exp(k.a, t)), ref, 1e-10 * ref);
        }
    }
}
