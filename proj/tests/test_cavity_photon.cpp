#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "masar/cavity_photon.hpp"

using namespace masar;

TEST(EinsteinB, DefaultMode) {
    const double b = einstein_b(CavityMode{});
    EXPECT_NEAR(b, 8.463459903542712e-08, 1e-15);
    EXPECT_NEAR(b, 9e-8, 0.6e-8);
}

TEST(EinsteinB, InverseInModeVolume) {
    CavityMode m;
    const double b = einstein_b(m);
    m.v_mode *= 2.0;
    EXPECT_DOUBLE_EQ(einstein_b(m), b / 2.0);
}

TEST(EinsteinB, SigmaSquaredOutsideRange) {
    CavityMode m;
    m.sigma_sq = 0.0;
    EXPECT_THROW(einstein_b(m), domain_error);
    EXPECT_THROW(validate(m), config_error);
    m.sigma_sq = 1.5;
    EXPECT_THROW(einstein_b(m), domain_error);
}

TEST(StimulatedRate, Values) {
    EXPECT_EQ(stimulated_rate(8.5e-8, 0.0), 0.0);
    EXPECT_NEAR(stimulated_rate(8.5e-8, 4169.0), 3.54e-4, 0.01e-4);
    EXPECT_EQ(stimulated_rate(1.0, 1.0), 1.0);
    EXPECT_THROW(stimulated_rate(-1.0, 1.0), domain_error);
    EXPECT_THROW(stimulated_rate(1.0, -1.0), domain_error);
}

TEST(MagneticLoss, Values) {
    const CavityMode m;
    EXPECT_EQ(magnetic_loss(m, 8.5e-8, 1e13, 1e13), 0.0);
    EXPECT_NEAR(magnetic_loss(m, 8.5e-8, 3e13, 0.0), 2.0, 0.02);
    EXPECT_NEAR(magnetic_loss(m, 8.5e-8, 3e13, 0.0), 2.0159, 1e-3);
}

TEST(MagneticLoss, SignFollowsPopulationDifference) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> pop(0.0, 1e15);
    const CavityMode m;
    for (int i = 0; i < 1000; ++i) {
        const double nz = pop(rng), nx = pop(rng);
        const double eta = magnetic_loss(m, einstein_b(m), nz, nx);
        ASSERT_EQ(eta > 0, nz > nx);
    }
}

TEST(PhotonDerivative, ThermalFixedPoint) {
    const CavityMode m;
    const double eps = photons_per_kelvin(m.f_mode);
    EXPECT_EQ(photon_derivative(eps * m.t0, m, einstein_b(m), 5e14, 5e14), 0.0);
}

TEST(PhotonDerivative, FixedPointForRandomModes) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int i = 0; i < 500; ++i) {
        CavityMode m;
        m.f_mode *= u(rng);
        m.q0 *= u(rng);
        m.q_ex *= u(rng);
        m.v_mode *= u(rng);
        m.t0 *= u(rng);
        const double q = photons_per_kelvin(m.f_mode) * m.t0;
        ASSERT_EQ(photon_derivative(q, m, einstein_b(m), 1e14, 1e14), 0.0);
    }
}

TEST(PhotonDerivative, PhotonsPerKelvin) {
    const double eps = photons_per_kelvin(1.4495e9);
    EXPECT_NEAR(eps, 14.3750390640411, 1e-9);
    EXPECT_NEAR(eps, 14.37, 0.01);
    EXPECT_NEAR(eps * 290.0, 4169.0, 1.0);
}

TEST(PhotonDerivative, SpinTermSigns) {
    const CavityMode m;
    const double b = einstein_b(m);
    const double q = photons_per_kelvin(m.f_mode) * m.t0;
    // spin term isolated at the thermal photon number
    EXPECT_GT(photon_derivative(q, m, b, 2e14, 1e14), 0.0);
    EXPECT_LT(photon_derivative(q, m, b, 1e14, 2e14), 0.0);
}

TEST(PhotonDerivative, SpinTemperatureTerm) {
    const CavityMode m;
    const double b = einstein_b(m);
    const double eps = photons_per_kelvin(m.f_mode);
    const double q = 100.0;
    const double d0 = photon_derivative(q, m, b, 1e14, 2e14, 0.0);
    const double d1 = photon_derivative(q, m, b, 1e14, 2e14, 0.08);
    EXPECT_NEAR(d1 - d0, b * (1e14 - 2e14) * (-eps * 0.08), 1e-6 * std::abs(d0));
}

TEST(ModeTemperature, Values) {
    const double f = 1.4495e9;
    EXPECT_EQ(mode_temperature(0.0, f), 0.0);
    EXPECT_NEAR(mode_temperature(140.0, f), 9.7, 0.05);
    EXPECT_NEAR(mode_temperature(4168.761328571919, f), 290.0, 1e-9);
    EXPECT_THROW(mode_temperature(-1.0, f), domain_error);
}

TEST(ModeTemperature, RoundTrip) {
    for (double t = 0.0; t <= 1000.0; t += 0.37)
        EXPECT_NEAR(mode_temperature(photons_of_temperature(t, 1.4495e9), 1.4495e9), t, 1e-12 * (1.0 + t));
}

TEST(BoseOccupancy, RoomTemperatureOneGigahertz) {
    const double n = bose_occupancy(300.0, 1e9);
    EXPECT_NEAR(n, 6250.485750329502, 1e-6);
    EXPECT_NEAR(n, 6200.0, 0.02 * 6200.0);
}

TEST(BoseOccupancy, UnitOccupancy) {
    const double f = 1e9;
    const double t = constants::planck * f / (constants::boltzmann * std::log(2.0));
    EXPECT_NEAR(bose_occupancy(t, f), 1.0, 1e-12);
}

TEST(BoseOccupancy, EquipartitionOffsetAtWorkingPoint) {
    const double f = 1.4495e9;
    EXPECT_NEAR(bose_occupancy(290.0, f), 4168.0, 1.0);
    EXPECT_NEAR(photons_per_kelvin(f) * 290.0 - bose_occupancy(290.0, f), 0.5, 0.01);
}

TEST(BoseOccupancy, HighTemperatureAgreement) {
    const double f = 1.4495e9;
    const double eps = photons_per_kelvin(f);
    // x = hf/kT from 1e-3 down to 1e-7
    for (double x = 1e-3; x >= 1e-7; x /= 3.0) {
        const double t = 1.0 / (eps * x);
        ASSERT_LE(std::abs(bose_occupancy(t, f) - eps * t + 0.5), 0.01) << "x = " << x;
    }
}

TEST(BoseOccupancy, NonPositiveTemperature) {
    EXPECT_THROW(bose_occupancy(0.0, 1e9), domain_error);
    EXPECT_THROW(bose_occupancy(-1.0, 1e9), domain_error);
}

TEST(Reflection, CriticalCoupling) {
    EXPECT_EQ(reflection_from_loss(0.0), 0.0);
    EXPECT_EQ(coupling_from_reflection(0.0), 1.0);
}

TEST(Reflection, TemperatureEndpoints) {
    EXPECT_EQ(reflection_from_temperature(290.0, 290.0), 0.0);
    EXPECT_NEAR(reflection_from_temperature(1e-9, 290.0), -1.0, 1e-10);
    EXPECT_THROW(reflection_from_temperature(0.0, 290.0), domain_error);
    EXPECT_THROW(reflection_from_temperature(300.0, 290.0), domain_error);
}

TEST(Reflection, EtaTwoConsistency) {
    EXPECT_DOUBLE_EQ(reflection_from_loss(2.0), -0.5);
    EXPECT_DOUBLE_EQ(mode_temperature_from_loss(2.0, 290.0), 145.0);
    EXPECT_DOUBLE_EQ(reflection_from_temperature(145.0, 290.0), -0.5);
}

TEST(Reflection, ThresholdGuard) {
    EXPECT_THROW(reflection_from_loss(-2.0), threshold_error);
    EXPECT_THROW(reflection_from_loss(-3.0), threshold_error);
    EXPECT_THROW(mode_temperature_from_loss(-2.0, 290.0), threshold_error);
    try {
        reflection_from_loss(-2.5);
    } catch (const threshold_error& e) {
        EXPECT_NE(std::string(e.what()).find("above maser oscillation threshold"), std::string::npos);
        EXPECT_EQ(e.eta_bar(), -2.5);
    }
}

TEST(Reflection, RouteConsistency) {
    for (int i = 0; i <= 10000; ++i) {
        const double eta = 100.0 * i / 10000.0;
        const double direct = reflection_from_loss(eta);
        const double via_t = reflection_from_temperature(mode_temperature_from_loss(eta, 290.0), 290.0);
        ASSERT_NEAR(direct, via_t, 1e-12) << "eta = " << eta;
    }
}

TEST(Reflection, MonotoneInLoss) {
    double g_prev = reflection_from_loss(-1.999), t_prev = mode_temperature_from_loss(-1.999, 290.0);
    for (double eta = -1.99; eta < 1000.0; eta += 0.01 + std::abs(eta) * 0.01) {
        const double g = reflection_from_loss(eta), t = mode_temperature_from_loss(eta, 290.0);
        ASSERT_LT(g, g_prev);
        ASSERT_LT(t, t_prev);
        g_prev = g;
        t_prev = t;
    }
}

TEST(Reflection, CouplingRoundTrip) {
    for (double g = -0.99; g < 0.99; g += 0.01) {
        const double k = coupling_from_reflection(g);
        EXPECT_NEAR((k - 1.0) / (k + 1.0), g, 1e-12);
    }
}

TEST(ModeTemperatureFromLoss, Values) {
    EXPECT_EQ(mode_temperature_from_loss(0.0, 290.0), 290.0);
    EXPECT_DOUBLE_EQ(mode_temperature_from_loss(56.0, 290.0), 10.0);
}

TEST(ModeTemperatureFromLoss, FullFormReducesAsSpinTemperatureVanishes) {
    const double simplified = mode_temperature_from_loss(5.0, 290.0);
    EXPECT_NEAR(mode_temperature_from_loss(5.0, 290.0, 0.08), 290.0 * 2 / 7 + 5.0 * 0.08 / 7, 1e-12);
    for (double ts = 1.0; ts > 1e-12; ts /= 10.0)
        EXPECT_LE(std::abs(mode_temperature_from_loss(5.0, 290.0, ts) - simplified), ts);
}

TEST(MaserOutputPower, Values) {
    const CavityMode m;
    EXPECT_EQ(maser_output_power(0.0, m, m.kappa_c(), 1.0), 0.0);
    EXPECT_NEAR(maser_output_power(1e12, m, constants::two_pi * 0.4e6, 1.0), 1.2069356434477078e-06, 1e-15);
    EXPECT_NEAR(maser_output_power(1e12, m, constants::two_pi * 0.4e6, 1.0), 1.2e-6, 0.05e-6);
}

TEST(MaserOutputPower, LoadedLinewidth) {
    CavityMode m;
    EXPECT_DOUBLE_EQ(m.loaded_q(), 3600.0);
    EXPECT_NEAR(m.f_mode / m.loaded_q(), 0.4e6, 0.01 * 0.4e6);
    EXPECT_NEAR(m.kappa_c() / constants::two_pi, 402638.9, 0.1);
}
