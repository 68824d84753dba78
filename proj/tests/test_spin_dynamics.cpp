#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "masar/integrator.hpp"
#include "masar/spin_dynamics.hpp"

using namespace masar;

namespace {

TripletRates random_rates(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> expo(0.0, 8.0), u(0.01, 1.0);
    auto rate = [&] { return std::pow(10.0, expo(rng)); };
    TripletRates r;
    r.k_sp = rate();
    r.k_isc = rate();
    const double a = u(rng), b = u(rng), c = u(rng);
    r.p_x = a / (a + b + c);
    r.p_y = b / (a + b + c);
    r.p_z = 1.0 - r.p_x - r.p_y;
    r.gamma_xy = rate();
    r.gamma_yz = rate();
    r.gamma_xz = rate();
    r.k_x = rate();
    r.k_y = rate();
    r.k_z = rate();
    return r;
}

PumpParams beam() {
    PumpParams p;
    p.lambda_p = 590e-9;
    p.sigma_a = 2e-21;
    p.area_p = 1.9e-6;
    return p;
}

}  // namespace

TEST(TripletRates, DefaultsAreValid) {
    const TripletRates r;
    EXPECT_NO_THROW(validate(r));
    EXPECT_DOUBLE_EQ(r.k_sp, 4.2e7);
    EXPECT_DOUBLE_EQ(r.k_isc, 6.9e7);
    EXPECT_NEAR(r.p_x + r.p_y + r.p_z, 1.0, 1e-12);
}

TEST(TripletRates, NegativeRateNamesField) {
    TripletRates r;
    r.k_isc = -1.0;
    try {
        validate(r);
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        EXPECT_NE(std::string(e.what()).find("triplet.k_isc"), std::string::npos);
    }
}

TEST(TripletRates, SplittingRatiosMustBeNormalized) {
    TripletRates r;
    r.p_x = 0.7;
    r.p_y = 0.1;
    r.p_z = 0.1;
    try {
        validate(r);
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        EXPECT_NE(std::string(e.what()).find("normalization"), std::string::npos);
    }
}

TEST(PumpRate, OneWattBleached) {
    EXPECT_NEAR(pump_rate(beam(), 1.0), 3126.451341947577, 1e-6);
    EXPECT_NEAR(pump_rate(beam(), 1.0), 3.13e3, 0.01e3);
}

TEST(PumpRate, ZeroPower) { EXPECT_EQ(pump_rate(beam(), 0.0), 0.0); }

TEST(PumpRate, TrainMeanPower) {
    EXPECT_NEAR(pump_rate(beam(), 2.4 / 450e-6), 1.6674407157053743e7, 1.0);
}

TEST(PumpRate, NegativePowerRejected) { EXPECT_THROW(pump_rate(beam(), -1.0), domain_error); }

TEST(PumpRate, UnbleachedNeedsAlpha) {
    PumpParams p = beam();
    p.bleached = false;
    EXPECT_THROW(pump_rate(p, 1.0), config_error);
    EXPECT_THROW(validate(p), config_error);
}

TEST(PumpRate, UnbleachedFactor) {
    PumpParams p = beam();
    p.bleached = false;
    p.alpha = 6432.681836561006;
    EXPECT_NEAR(pump_rate(p, 1.0) / pump_rate(beam(), 1.0), 0.038864039346298715, 1e-12);
}

TEST(PumpRate, UnbleachedApproachesBleachedAsAlphaVanishes) {
    PumpParams p = beam();
    p.bleached = false;
    double previous = 1.0;
    for (double alpha : {1e2, 1e0, 1e-2, 1e-4, 1e-8}) {
        p.alpha = alpha;
        const double rel = std::abs(pump_rate(p, 10.0) / pump_rate(beam(), 10.0) - 1.0);
        EXPECT_LT(rel, previous);
        previous = rel;
    }
    EXPECT_LT(previous, 1e-10);
}

TEST(RateMatrix, ZeroRatesGiveZeroMatrix) {
    TripletRates r{0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0};
    EXPECT_TRUE(rate_matrix(r, 0.0, 0.0).isZero(0.0));
}

TEST(RateMatrix, IscEntry) {
    const RateMatrix m = rate_matrix(TripletRates{}, 0.0, 0.0);
    EXPECT_NEAR(m(kNX, kS1), 5.244e7, 1e-3);
    EXPECT_NEAR(m(kNY, kS1), 0.16 * 6.9e7, 1e-3);
    EXPECT_NEAR(m(kNZ, kS1), 0.08 * 6.9e7, 1e-3);
}

TEST(RateMatrix, LayoutOfDrivenTransition) {
    const TripletRates r;
    const double w = 123.0;
    const RateMatrix m0 = rate_matrix(r, 5.0, 0.0);
    const RateMatrix m1 = rate_matrix(r, 5.0, w);
    RateMatrix diff = m1 - m0;
    RateMatrix expected = RateMatrix::Zero();
    expected(kNX, kNX) = -w;
    expected(kNZ, kNZ) = -w;
    expected(kNX, kNZ) = w;
    expected(kNZ, kNX) = w;
    EXPECT_TRUE(diff.isApprox(expected, 1e-12)) << diff;
}

TEST(RateMatrix, NegativeInputsRejected) {
    EXPECT_THROW(rate_matrix(TripletRates{}, -1.0, 0.0), domain_error);
    EXPECT_THROW(rate_matrix(TripletRates{}, 0.0, -1.0), domain_error);
}

TEST(RateMatrix, ColumnSumsVanishForRandomInputs) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> expo(-2.0, 8.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const TripletRates r = random_rates(rng);
        const double xi = std::pow(10.0, expo(rng));
        const double w = std::pow(10.0, expo(rng));
        const RateMatrix m = rate_matrix(r, xi, w);
        const double scale = m.cwiseAbs().maxCoeff();
        for (int c = 0; c < 5; ++c) ASSERT_LE(std::abs(m.col(c).sum()), 1e-12 * scale) << "trial " << trial;
    }
}

TEST(SpinDerivative, ZeroState) {
    const SpinState d = spin_derivative(SpinState{}, rate_matrix(TripletRates{}, 1e6, 1.0));
    EXPECT_EQ(d.as_vector().cwiseAbs().maxCoeff(), 0.0);
}

TEST(SpinDerivative, PureGroundStateOnlyPumps) {
    const double n = 7e15, xi0 = 1.7e7;
    const SpinState d = spin_derivative(SpinState::ground(n), rate_matrix(TripletRates{}, xi0, 0.0));
    EXPECT_DOUBLE_EQ(d.s0, -xi0 * n);
    EXPECT_DOUBLE_EQ(d.s1, xi0 * n);
    EXPECT_EQ(d.n_x, 0.0);
    EXPECT_EQ(d.n_y, 0.0);
    EXPECT_EQ(d.n_z, 0.0);
}

TEST(SpinDerivative, SumVanishes) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pop(0.0, 1e16);
    for (int trial = 0; trial < 500; ++trial) {
        const SpinState s{pop(rng), pop(rng), pop(rng), pop(rng), pop(rng)};
        const RateMatrix m = rate_matrix(random_rates(rng), 1e6, 10.0);
        const SpinState d = spin_derivative(s, m);
        const double scale = (m.cwiseAbs() * s.as_vector()).sum();
        ASSERT_LE(std::abs(d.total()), 1e-12 * scale);
    }
}

TEST(SpinDerivative, Linearity) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pop(0.0, 1e15), coef(-3.0, 3.0);
    const RateMatrix m = rate_matrix(TripletRates{}, 2e6, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        const SpinState x{pop(rng), pop(rng), pop(rng), pop(rng), pop(rng)};
        const SpinState y{pop(rng), pop(rng), pop(rng), pop(rng), pop(rng)};
        const double a = coef(rng), b = coef(rng);
        const SpinVector lhs = spin_derivative(SpinState::from_vector(a * x.as_vector() + b * y.as_vector()), m)
                                   .as_vector();
        const SpinVector rhs = a * spin_derivative(x, m).as_vector() + b * spin_derivative(y, m).as_vector();
        ASSERT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * (m.cwiseAbs().maxCoeff() * 1e15 * 6));
    }
}

// Impulse limit: everything starts in S1 and drains through ISC.
TEST(SpinDerivative, EarlySublevelOrderingAgainstEulerOracle) {
    const TripletRates r;
    const RateMatrix m = rate_matrix(r, 0.0, 0.0);
    const double h = 1e-9;
    SpinVector euler = SpinState{0, 1e15, 0, 0, 0}.as_vector();
    SpinVector rk = euler;
    auto f = [&](double, const SpinVector& y) -> SpinVector { return m * y; };
    for (int i = 0; i < 2000; ++i) {
        euler += h * (m * euler);
        rk = rk4_step(f, i * h, rk, h);
    }
    EXPECT_GT(euler[kNX], euler[kNY]);
    EXPECT_GT(euler[kNY], euler[kNZ]);
    EXPECT_GT(rk[kNX], rk[kNY]);
    EXPECT_GT(rk[kNY], rk[kNZ]);
    for (int i = kNX; i <= kNZ; ++i) EXPECT_NEAR(rk[i] / euler[i], 1.0, 1e-3);
}

TEST(SpinState, VectorRoundTrip) {
    const SpinState s{1, 2, 3, 4, 5};
    const SpinState t = SpinState::from_vector(s.as_vector());
    EXPECT_EQ(t.s0, 1);
    EXPECT_EQ(t.n_z, 5);
    EXPECT_EQ(s.total(), 15);
}
