// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Rectenna model: diode Taylor coefficients around an operating point and
/// the truncated (2nd + 4th order) DC output metric z_DC.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "channel.hpp"
#include "error.hpp"
#include "waveform.hpp"

namespace wpt {

struct DiodeParameters {
    // Defaults reproduce k2 = 0.0034, k4 = 0.3829 at a = 0 within 0.3%
    // (Skyworks SMS7630-class Schottky at about 300 K).
    double saturation_current = 5e-6; // A
    double ideality = 1.05;
    double thermal_voltage = 25.85e-3; // V

    double scaled_thermal_voltage() const { return ideality * thermal_voltage; }

    void validate() const
    {
        require(saturation_current > 0.0, "diode: saturation current must be positive");
        require(ideality >= 1.0, "diode: ideality factor must be >= 1");
        require(thermal_voltage > 0.0, "diode: thermal voltage must be positive");
    }

    /// Shockley law i_s (exp(v / (n v_t)) - 1).
    double current(double voltage) const
    {
        return saturation_current * std::expm1(voltage / scaled_thermal_voltage());
    }
};

/// k_0..k_max_order of the diode current expanded around v_d = a.
inline std::vector<double> taylor_coefficients(const DiodeParameters& diode, double operating_point, int max_order)
{
    diode.validate();
    require(max_order >= 2, "taylor_coefficients: max_order must be >= 2");
    const double nvt = diode.scaled_thermal_voltage();
    const double scale = diode.saturation_current * std::exp(operating_point / nvt);
    std::vector<double> k(static_cast<std::size_t>(max_order) + 1);
    k[0] = diode.saturation_current * std::expm1(operating_point / nvt);
    double denom = 1.0; // i! (n v_t)^i
    for (int i = 1; i <= max_order; ++i) {
        denom *= i * nvt;
        k[static_cast<std::size_t>(i)] = scale / denom;
    }
    return k;
}

class HarvesterModel {
public:
    /// Default diode at a = 0 behind a 50 ohm antenna.
    HarvesterModel()
    {
        const auto k = taylor_coefficients(diode_, operating_point_, 4);
        std::copy(k.begin(), k.end(), k_.begin());
    }

    static HarvesterModel from_diode(const DiodeParameters& diode, double operating_point, double antenna_resistance)
    {
        require(antenna_resistance > 0.0, "harvester: antenna resistance must be positive");
        HarvesterModel model;
        model.diode_ = diode;
        model.operating_point_ = operating_point;
        model.antenna_resistance_ = antenna_resistance;
        const auto k = taylor_coefficients(diode, operating_point, 4);
        std::copy(k.begin(), k.end(), model.k_.begin());
        return model;
    }

    /// Bypasses the diode: only k2 and k4 enter z_DC.
    static HarvesterModel from_coefficients(double k2, double k4, double antenna_resistance)
    {
        require(k2 > 0.0 && k4 > 0.0, "harvester: k2 and k4 must be positive");
        require(antenna_resistance > 0.0, "harvester: antenna resistance must be positive");
        HarvesterModel model;
        model.antenna_resistance_ = antenna_resistance;
        model.k_ = {0.0, 0.0, k2, 0.0, k4};
        return model;
    }

    const DiodeParameters& diode() const { return diode_; }
    double operating_point() const { return operating_point_; }
    double antenna_resistance() const { return antenna_resistance_; }
    double k(int i) const { return k_.at(static_cast<std::size_t>(i)); }

    /// Weight of E{y^2} and E{y^4} in z_DC.
    double second_order_weight() const { return k_[2] * antenna_resistance_; }
    double fourth_order_weight() const { return k_[4] * antenna_resistance_ * antenna_resistance_; }

private:
    DiodeParameters diode_;
    double operating_point_ = 0.0;
    double antenna_resistance_ = 50.0;
    std::array<double, 5> k_{};
};

/// Second- and fourth-order contributions to z_DC.
struct ZdcTerms {
    double second = 0.0;
    double fourth = 0.0;

    double total() const { return second + fourth; }
};

/// Enumerates the multisine DC expression term by term: a double sum over
/// antenna pairs per tone, and all (n0, n1, n2, n3) with n0 + n1 = n2 + n3
/// over all antenna quadruples.
inline ZdcTerms z_dc_analytic_terms(const RealMatrix& amplitudes, const RealMatrix& phases,
                                    const FrequencyResponse& h, const HarvesterModel& model)
{
    const int tones = h.tones();
    const int antennas = h.antennas();
    require(amplitudes.rows() == tones && amplitudes.cols() == antennas && phases.rows() == tones &&
                phases.cols() == antennas,
            "z_dc: waveform and channel dimensions differ");

    // u = s A e^{j psi}, psi = phi + arg(h); cos(psi0 + psi1 - psi2 - psi3) times the
    // amplitude product is Re(u0 u1 conj(u2) conj(u3)).
    ComplexMatrix u(tones, antennas);
    for (int n = 0; n < tones; ++n)
        for (int m = 0; m < antennas; ++m)
            u(n, m) = amplitudes(n, m) * std::abs(h(n, m)) * std::polar(1.0, phases(n, m) + std::arg(h(n, m)));

    double second = 0.0;
    for (int n = 0; n < tones; ++n)
        for (int m0 = 0; m0 < antennas; ++m0)
            for (int m1 = 0; m1 < antennas; ++m1)
                second += (u(n, m0) * std::conj(u(n, m1))).real();

    double fourth = 0.0;
    for (int n0 = 0; n0 < tones; ++n0)
        for (int n1 = 0; n1 < tones; ++n1)
            for (int n2 = 0; n2 < tones; ++n2) {
                const int n3 = n0 + n1 - n2;
                if (n3 < 0 || n3 >= tones)
                    continue;
                for (int m0 = 0; m0 < antennas; ++m0)
                    for (int m1 = 0; m1 < antennas; ++m1) {
                        const std::complex<double> head = u(n0, m0) * u(n1, m1);
                        for (int m2 = 0; m2 < antennas; ++m2) {
                            const std::complex<double> partial = head * std::conj(u(n2, m2));
                            for (int m3 = 0; m3 < antennas; ++m3)
                                fourth += (partial * std::conj(u(n3, m3))).real();
                        }
                    }
            }

    return {0.5 * model.second_order_weight() * second, 0.375 * model.fourth_order_weight() * fourth};
}

inline double z_dc_analytic(const RealMatrix& amplitudes, const RealMatrix& phases, const FrequencyResponse& h,
                            const HarvesterModel& model)
{
    return z_dc_analytic_terms(amplitudes, phases, h, model).total();
}

inline double z_dc_analytic(const MultisineWaveform& w, const FrequencyResponse& h, const HarvesterModel& model)
{
    return z_dc_analytic(w.amplitudes, w.phases, h, model);
}

/// Time averages of y, y^2, y^3, y^4 over one exact period of the received signal.
struct SignalMoments {
    double first = 0.0;
    double second = 0.0;
    double third = 0.0;
    double fourth = 0.0;
};

/// `samples_per_period` counts samples per period of the highest tone.
inline SignalMoments time_domain_moments(const ReceivedSpectrum& spec, int samples_per_period)
{
    require(samples_per_period >= 1, "time-domain moments: samples_per_period must be positive");
    const auto period = spec.grid.period();
    require(period.has_value(), "time-domain moments: base frequency is not commensurate with the spacing");
    const double cycles = spec.grid.highest() * *period / two_pi;
    const auto count = static_cast<std::size_t>(std::ceil(samples_per_period * cycles));
    const double step = *period / static_cast<double>(count);

    SignalMoments out;
    for (std::size_t k = 0; k < count; ++k) {
        const double y = synthesize_received(spec, step * static_cast<double>(k));
        const double y2 = y * y;
        out.first += y;
        out.second += y2;
        out.third += y2 * y;
        out.fourth += y2 * y2;
    }
    const double inv = 1.0 / static_cast<double>(count);
    out.first *= inv;
    out.second *= inv;
    out.third *= inv;
    out.fourth *= inv;
    return out;
}

/// Oracle for z_dc_analytic: k2 R E{y^2} + k4 R^2 E{y^4} with the moments
/// taken numerically over one period of the synthesized received signal.
inline double z_dc_time_domain(const RealMatrix& amplitudes, const RealMatrix& phases, const FrequencyResponse& h,
                               const HarvesterModel& model, const FrequencyGrid& grid, int samples_per_period = 16)
{
    const MultisineWaveform w(amplitudes, phases, grid);
    const auto moments = time_domain_moments(received_spectrum(w, h), samples_per_period);
    return model.second_order_weight() * moments.second + model.fourth_order_weight() * moments.fourth;
}

/// Linear harvesting model zeta * E{y^2}; ignores the diode nonlinearity.
inline double linear_model_power(const RealMatrix& amplitudes, const RealMatrix& phases, const FrequencyResponse& h,
                                 double efficiency)
{
    require(amplitudes.rows() == h.tones() && amplitudes.cols() == h.antennas(),
            "linear_model_power: waveform and channel dimensions differ");
    double power = 0.0;
    for (int n = 0; n < h.tones(); ++n) {
        std::complex<double> sum{0.0, 0.0};
        for (int m = 0; m < h.antennas(); ++m)
            sum += amplitudes(n, m) * h(n, m) * std::polar(1.0, phases(n, m));
        power += std::norm(sum);
    }
    return efficiency * 0.5 * power;
}

} // namespace wpt
