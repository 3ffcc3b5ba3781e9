// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

using namespace wpt;

namespace {

FrequencyResponse response(std::initializer_list<std::complex<double>> per_antenna)
{
    ComplexMatrix h(1, static_cast<Eigen::Index>(per_antenna.size()));
    Eigen::Index m = 0;
    for (auto v : per_antenna)
        h(0, m++) = v;
    return FrequencyResponse(h);
}

} // namespace

TEST(Waveform, TransmitPower)
{
    const auto grid4 = test::periodic_grid(4);
    EXPECT_EQ(transmit_power({RealMatrix::Zero(4, 2), RealMatrix::Zero(4, 2), grid4}), 0.0);
    EXPECT_NEAR(transmit_power({RealMatrix::Constant(1, 1, std::sqrt(2.0)), RealMatrix::Zero(1, 1),
                                test::periodic_grid(1)}),
                1.0, 1e-15);
    EXPECT_NEAR(transmit_power({RealMatrix::Constant(4, 2, 1.0 / std::sqrt(8.0)), RealMatrix::Zero(4, 2), grid4}),
                0.5, 1e-15);
}

TEST(Waveform, ConstructorChecksShapeAndSign)
{
    const auto grid = test::periodic_grid(2);
    EXPECT_THROW(MultisineWaveform(RealMatrix::Ones(2, 1), RealMatrix::Zero(2, 2), grid), invalid_input);
    EXPECT_THROW(MultisineWaveform(RealMatrix::Ones(3, 1), RealMatrix::Zero(3, 1), grid), invalid_input);
    EXPECT_THROW(MultisineWaveform(-RealMatrix::Ones(2, 1), RealMatrix::Zero(2, 1), grid), invalid_input);
}

TEST(Waveform, PowerIgnoresPhases)
{
    std::mt19937_64 rng(3);
    const auto grid = test::periodic_grid(4);
    const RealMatrix s = test::random_amplitudes(rng, 4, 3, 0.7);
    const double p = transmit_power({s, RealMatrix::Zero(4, 3), grid});
    for (int i = 0; i < 20; ++i)
        EXPECT_NEAR(transmit_power({s, test::random_phases(rng, 4, 3), grid}), p, 1e-15);
}

TEST(Waveform, ReceivedSpectrumExamples)
{
    const auto grid = test::periodic_grid(1);
    auto one = received_spectrum({RealMatrix::Ones(1, 1), RealMatrix::Zero(1, 1), grid}, response({1.0}));
    EXPECT_NEAR(one.amplitudes(0), 1.0, 1e-15);
    EXPECT_NEAR(one.phases(0), 0.0, 1e-15);

    auto cancel = received_spectrum({RealMatrix::Ones(1, 2), RealMatrix::Zero(1, 2), grid}, response({1.0, -1.0}));
    EXPECT_NEAR(cancel.amplitudes(0), 0.0, 1e-15);

    EXPECT_THROW(received_spectrum({RealMatrix::Ones(1, 2), RealMatrix::Zero(1, 2), grid}, response({1.0})),
                 invalid_input);
}

TEST(Waveform, CoherentCombining)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto h = test::random_response(rng, 1, 2);
        RealMatrix phi(1, 2);
        phi << -std::arg(h(0, 0)), -std::arg(h(0, 1));
        const auto spec = received_spectrum({RealMatrix::Ones(1, 2), phi, test::periodic_grid(1)}, h);
        // Direct complex sum of the co-phased contributions.
        const std::complex<double> direct = h(0, 0) * std::polar(1.0, phi(0, 0)) + h(0, 1) * std::polar(1.0, phi(0, 1));
        EXPECT_NEAR(spec.amplitudes(0), std::abs(direct), 1e-13);
        EXPECT_NEAR(spec.amplitudes(0), std::abs(h(0, 0)) + std::abs(h(0, 1)), 1e-13);
    }
}

TEST(Waveform, ReceivedSpectrumIsLinearInAntennaWeights)
{
    std::mt19937_64 rng(12);
    const auto grid = test::periodic_grid(3);
    const auto h = test::random_response(rng, 3, 2);
    const RealMatrix s = test::random_amplitudes(rng, 3, 2, 1.0);
    const RealMatrix phi = test::random_phases(rng, 3, 2);
    auto complex_out = [&](const RealMatrix& amp) {
        const auto spec = received_spectrum({amp, phi, grid}, h);
        Eigen::VectorXcd z(3);
        for (int n = 0; n < 3; ++n)
            z(n) = std::polar(spec.amplitudes(n), spec.phases(n));
        return z;
    };
    RealMatrix first = s, second = s;
    first.col(1).setZero();
    second.col(0).setZero();
    EXPECT_LT((complex_out(s) - complex_out(first) - complex_out(second)).norm(), 1e-13);
    EXPECT_LT((complex_out(2.5 * s) - 2.5 * complex_out(s)).norm(), 1e-13);
}

TEST(Waveform, Synthesis)
{
    ReceivedSpectrum zero{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), test::periodic_grid(3)};
    EXPECT_EQ(synthesize_received(zero, 1.3e-7), 0.0);

    ReceivedSpectrum single{Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Zero(1), test::periodic_grid(1)};
    EXPECT_EQ(synthesize_received(single, 0.0), 2.0);

    ReceivedSpectrum pair{Eigen::Vector2d(0.7, 0.7), Eigen::VectorXd::Zero(2), test::periodic_grid(2)};
    EXPECT_NEAR(synthesize_received(pair, 0.0), 1.4, 1e-15);
    for (int k = 1; k < 100; ++k)
        EXPECT_LE(synthesize_received(pair, k * 1e-8), 1.4 + 1e-12);
}

TEST(Waveform, PeriodAverageOfSquareIsHalfSumOfSquares)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int tones : {1, 2, 3, 5}) {
        ReceivedSpectrum spec;
        spec.grid = test::periodic_grid(tones, 9);
        spec.amplitudes = Eigen::VectorXd::NullaryExpr(tones, [&] { return unit(rng); });
        spec.phases = Eigen::VectorXd::NullaryExpr(tones, [&] { return two_pi * unit(rng); });
        const auto moments = time_domain_moments(spec, 16);
        EXPECT_LT(test::relative_error(moments.second, spec.mean_power()), 1e-9);
    }
}

TEST(Waveform, SampledSignalMatchesDirectSynthesis)
{
    std::mt19937_64 rng(6);
    ReceivedSpectrum spec;
    spec.grid = FrequencyGrid::centered(100e6, 20e6, 8);
    spec.amplitudes = Eigen::VectorXd::Random(8).cwiseAbs();
    spec.phases = Eigen::VectorXd::Random(8);
    const double dt = 3.1e-10;
    const auto y = sample_received(spec, dt, 5000);
    for (std::size_t k = 0; k < y.size(); k += 97)
        EXPECT_NEAR(y[k], synthesize_received(spec, dt * static_cast<double>(k)), 1e-11);
}

TEST(Waveform, DumpRoundTrip)
{
    std::mt19937_64 rng(8);
    const auto grid = FrequencyGrid::centered(5.18e9, 20e6, 4);
    const MultisineWaveform w(test::random_amplitudes(rng, 4, 2, 1.0), test::random_phases(rng, 4, 2), grid);
    std::stringstream ss;
    write_waveform(ss, w);
    const auto back = read_waveform(ss);
    EXPECT_EQ(back.amplitudes, w.amplitudes);
    EXPECT_EQ(back.phases, w.phases);
    EXPECT_EQ(back.grid.base, grid.base);
    EXPECT_EQ(back.grid.spacing, grid.spacing);
    EXPECT_EQ(back.grid.count, 4);

    std::stringstream truncated("grid 1 1 2 1\namplitudes\n1\n");
    EXPECT_THROW(read_waveform(truncated), invalid_input);
}
