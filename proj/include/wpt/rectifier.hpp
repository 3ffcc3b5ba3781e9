// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Time-domain model of a single series diode feeding an RC load.
///
///   C dv_out/dt = i_d(v_in - v_out) - v_out / R_L,   v_in = y(t) sqrt(R_ant)
///
/// Integrated with BDF2 (backward Euler for the first step). Each step solves
/// v = base + gamma f(v) by Newton inside a sign bracket.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "error.hpp"
#include "harvester.hpp"
#include "units.hpp"
#include "waveform.hpp"

namespace wpt {

struct RectifierCircuit {
    DiodeParameters diode;
    double load_resistance = 5786.0;  // ohms
    double capacitance = 1e-9;        // farads
    double antenna_resistance = 50.0; // ohms

    /// Load capacitance putting 1/(R_L C) two decades below the tone spacing.
    static double smoothing_capacitance(double load_resistance, double spacing_hz)
    {
        return 100.0 / (two_pi * spacing_hz * load_resistance);
    }

    static RectifierCircuit for_spacing(double spacing_hz, DiodeParameters diode = {}, double load_resistance = 5786.0)
    {
        RectifierCircuit c;
        c.diode = diode;
        c.load_resistance = load_resistance;
        c.capacitance = smoothing_capacitance(load_resistance, spacing_hz);
        return c;
    }

    double time_constant() const { return load_resistance * capacitance; }

    void validate() const
    {
        diode.validate();
        require(load_resistance > 0.0 && capacitance > 0.0 && antenna_resistance > 0.0,
                "rectifier: circuit values must be positive");
    }
};

inline double dc_power(double voltage, double load_resistance) { return voltage * voltage / load_resistance; }

struct RectifierSample {
    double t = 0.0;
    double v_in = 0.0;
    double v_out = 0.0;
    double i_d = 0.0;
};

struct RectifierResult {
    double dc_power = 0.0;    // mean(v_out^2) / R_L over the last period
    double mean_output = 0.0; // mean v_out over the last period
    double drift = 0.0;       // relative change of the per-period mean over the last two periods
    bool converged = false;
    double step = 0.0;
    std::size_t steps = 0;
    std::vector<RectifierSample> trace;
};

struct RectifierOptions {
    int samples_per_carrier = 16;   // per period of the highest tone
    double duration = 0.0;          // seconds; 0 picks settle_time_constants * R_L C
    double settle_time_constants = 12.0;
    double step = 0.0;              // seconds; 0 derives it from samples_per_carrier
    double drift_tolerance = 1e-3;
    std::size_t trace_stride = 0;   // 0 keeps no trace
};

namespace detail {

/// Solves v = base + gamma (i_d(u1 - v) - v / R_L), starting from `guess`.
inline double implicit_step(const RectifierCircuit& c, double base, double gamma, double u1, double guess)
{
    const double nvt = c.diode.scaled_thermal_voltage();
    const double is = c.diode.saturation_current;

    // g is increasing in v; keep a sign bracket so Newton cannot run into overflow.
    auto g = [&](double v, double& dg) {
        const double e = std::exp((u1 - v) / nvt);
        dg = 1.0 + gamma * (is * e / nvt + 1.0 / c.load_resistance);
        return v - base - gamma * (is * (e - 1.0) - v / c.load_resistance);
    };
    double dg = 0.0;
    double lo = std::min({guess, u1, base}) - 1.0;
    double hi = std::max({guess, u1, base}) + 1.0;
    while (g(lo, dg) > 0.0)
        lo -= 2.0 * (hi - lo);

    double v = std::clamp(guess, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double r = g(v, dg);
        if (r == 0.0)
            return v;
        (r < 0.0 ? lo : hi) = v;
        double next = v - r / dg;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - v) <= 1e-15 + 1e-13 * std::abs(v))
            return next;
        v = next;
    }
    return v;
}

} // namespace detail

/// Drives the circuit with a periodic input given by one period of samples
/// spaced `dt` apart, for `periods` periods, starting from v_out = 0.
inline RectifierResult integrate_rectifier(std::span<const double> period_input, double dt, std::size_t periods,
                                           const RectifierCircuit& circuit, double drift_tolerance = 1e-3,
                                           std::size_t trace_stride = 0)
{
    circuit.validate();
    require(!period_input.empty() && dt > 0.0, "rectifier: empty input period or non-positive step");
    require(periods >= 2, "rectifier: need at least two periods");

    const std::size_t per = period_input.size();
    RectifierResult out;
    out.step = dt;
    out.steps = per * periods;

    double v = 0.0;
    double v_prev = 0.0;
    bool first = true;
    double previous_mean = 0.0;
    double mean = 0.0;
    double mean_square = 0.0;
    for (std::size_t p = 0; p < periods; ++p) {
        previous_mean = mean;
        mean = 0.0;
        mean_square = 0.0;
        for (std::size_t k = 0; k < per; ++k) {
            const std::size_t step = p * per + k;
            const double u0 = period_input[k];
            const double u1 = period_input[(k + 1) % per];
            if (trace_stride && step % trace_stride == 0)
                out.trace.push_back({dt * static_cast<double>(step), u0, v, circuit.diode.current(u0 - v)});
            // Average with the trapezoid rule over the samples of this period.
            const double v1 = first ? detail::implicit_step(circuit, v, dt / circuit.capacitance, u1, v)
                                    : detail::implicit_step(circuit, (4.0 * v - v_prev) / 3.0,
                                                            2.0 * dt / (3.0 * circuit.capacitance), u1, v);
            first = false;
            v_prev = v;
            mean += 0.5 * (v + v1);
            mean_square += 0.5 * (v * v + v1 * v1);
            v = v1;
        }
        mean /= static_cast<double>(per);
        mean_square /= static_cast<double>(per);
    }

    out.mean_output = mean;
    out.dc_power = mean_square / circuit.load_resistance;
    if (mean == 0.0)
        out.drift = previous_mean == 0.0 ? 0.0 : 1.0;
    else
        out.drift = std::abs(mean - previous_mean) / std::abs(mean);
    out.converged = out.drift < drift_tolerance;
    return out;
}

/// Steady-state DC output for a received multisine. The spectrum's grid must
/// be periodic; the run covers whole periods of it.
inline RectifierResult simulate_rectifier(const ReceivedSpectrum& spec, const RectifierCircuit& circuit,
                                          const RectifierOptions& options = {})
{
    circuit.validate();
    require(options.samples_per_carrier >= 16, "rectifier: need at least 16 samples per carrier period");
    const auto period = spec.grid.period();
    require(period.has_value(), "rectifier: tone grid is not periodic");

    const double fmax = spec.grid.highest() / two_pi;
    const double coarsest = 1.0 / (16.0 * fmax);
    double target_dt = options.step > 0.0 ? options.step : 1.0 / (options.samples_per_carrier * fmax);
    require(target_dt <= coarsest * (1.0 + 1e-12), "rectifier: time step too coarse for the highest tone");
    const auto per = static_cast<std::size_t>(std::ceil(*period / target_dt - 1e-9));
    const double dt = *period / static_cast<double>(per);

    const double settle = 5.0 * circuit.time_constant();
    const double duration = options.duration > 0.0 ? options.duration
                                                   : options.settle_time_constants * circuit.time_constant();
    require(duration >= settle * (1.0 - 1e-12), "rectifier: duration shorter than 5 R_L C");
    const auto periods = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(duration / *period)));

    std::vector<double> input = sample_received(spec, dt, per);
    const double scale = std::sqrt(circuit.antenna_resistance);
    for (double& u : input)
        u *= scale;
    return integrate_rectifier(input, dt, periods, circuit, options.drift_tolerance, options.trace_stride);
}

inline void write_rectifier_trace_csv(std::ostream& os, const RectifierResult& result)
{
    const auto precision = os.precision();
    os.precision(17);
    os << "t,v_in,v_out,i_d\n";
    for (const auto& s : result.trace)
        os << s.t << ',' << s.v_in << ',' << s.v_out << ',' << s.i_d << '\n';
    os << "# dc_power=" << result.dc_power << " converged=" << (result.converged ? 1 : 0) << '\n';
    os.precision(precision);
}

} // namespace wpt
