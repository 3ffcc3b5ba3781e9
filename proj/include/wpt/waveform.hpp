// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "channel.hpp"
#include "error.hpp"

namespace wpt {

/// Amplitudes and phases of N sinewaves on each of M antennas.
struct MultisineWaveform {
    RealMatrix amplitudes; // N x M, non-negative
    RealMatrix phases;     // N x M, radians
    FrequencyGrid grid;

    MultisineWaveform() = default;
    MultisineWaveform(RealMatrix s, RealMatrix phi, FrequencyGrid g)
        : amplitudes(std::move(s)), phases(std::move(phi)), grid(g)
    {
        require(amplitudes.rows() == phases.rows() && amplitudes.cols() == phases.cols(),
                "waveform: amplitude and phase matrices differ in shape");
        require(amplitudes.rows() == grid.count, "waveform: tone count does not match the grid");
        require((amplitudes.array() >= 0.0).all(), "waveform: negative amplitude");
    }

    int tones() const { return static_cast<int>(amplitudes.rows()); }
    int antennas() const { return static_cast<int>(amplitudes.cols()); }
};

/// Per-tone amplitude X_n and phase delta_n at the receiver.
struct ReceivedSpectrum {
    Eigen::VectorXd amplitudes;
    Eigen::VectorXd phases;
    FrequencyGrid grid;

    int tones() const { return static_cast<int>(amplitudes.size()); }

    /// Same tones moved to another carrier; the amplitudes and phases are kept.
    ReceivedSpectrum on_grid(const FrequencyGrid& other) const
    {
        require(other.count == tones(), "received spectrum: grid tone count mismatch");
        return {amplitudes, phases, other};
    }

    ReceivedSpectrum scaled(double factor) const { return {amplitudes * factor, phases, grid}; }

    /// Time average of y(t)^2.
    double mean_power() const { return 0.5 * amplitudes.squaredNorm(); }
};

inline double transmit_power(const MultisineWaveform& w) { return 0.5 * w.amplitudes.squaredNorm(); }

inline ReceivedSpectrum received_spectrum(const MultisineWaveform& w, const FrequencyResponse& h)
{
    require(w.tones() == h.tones() && w.antennas() == h.antennas(),
            "received_spectrum: waveform and channel dimensions differ");
    ReceivedSpectrum out;
    out.grid = w.grid;
    out.amplitudes.resize(w.tones());
    out.phases.resize(w.tones());
    for (int n = 0; n < w.tones(); ++n) {
        std::complex<double> sum{0.0, 0.0};
        for (int m = 0; m < w.antennas(); ++m)
            sum += w.amplitudes(n, m) * h(n, m) * std::polar(1.0, w.phases(n, m));
        out.amplitudes(n) = std::abs(sum);
        out.phases(n) = std::arg(sum);
    }
    return out;
}

inline double synthesize_received(const ReceivedSpectrum& spec, double t)
{
    double y = 0.0;
    for (int n = 0; n < spec.tones(); ++n)
        y += spec.amplitudes(n) * std::cos(spec.grid[n] * t + spec.phases(n));
    return y;
}

/// Samples y(t) at `count` evenly spaced instants starting at t = 0.
inline std::vector<double> sample_received(const ReceivedSpectrum& spec, double step, std::size_t count)
{
    std::vector<double> y(count, 0.0);
    for (int n = 0; n < spec.tones(); ++n) {
        if (spec.amplitudes(n) == 0.0)
            continue;
        // Rotate a phasor instead of calling cos() per sample; renormalize to bound drift.
        const std::complex<double> rotation = std::polar(1.0, spec.grid[n] * step);
        std::complex<double> phasor = std::polar(spec.amplitudes(n), spec.phases(n));
        for (std::size_t k = 0; k < count; ++k) {
            y[k] += phasor.real();
            phasor *= rotation;
            if ((k & 1023) == 1023)
                phasor = std::polar(spec.amplitudes(n), spec.grid[n] * step * static_cast<double>(k + 1) + spec.phases(n));
        }
    }
    return y;
}

// Waveform dump:
//   # wpt-waveform
//   grid <w0> <spacing> <N> <M>
//   amplitudes
//   <N rows of M values>
//   phases
//   <N rows of M values>

inline void write_waveform(std::ostream& os, const MultisineWaveform& w)
{
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << std::setprecision(17);
    os << "# wpt-waveform\n";
    os << "grid " << w.grid.base << ' ' << w.grid.spacing << ' ' << w.tones() << ' ' << w.antennas() << '\n';
    auto block = [&](const char* name, const RealMatrix& mat) {
        os << name << '\n';
        for (Eigen::Index n = 0; n < mat.rows(); ++n) {
            for (Eigen::Index m = 0; m < mat.cols(); ++m)
                os << (m ? " " : "") << mat(n, m);
            os << '\n';
        }
    };
    block("amplitudes", w.amplitudes);
    block("phases", w.phases);
    os.flags(flags);
    os.precision(precision);
}

inline MultisineWaveform read_waveform(std::istream& is)
{
    std::string token;
    std::string line;
    while (is >> std::ws && is.peek() == '#')
        std::getline(is, line);

    double base = 0.0, spacing = 0.0;
    int n_tones = 0, n_antennas = 0;
    require(static_cast<bool>(is >> token) && token == "grid", "waveform dump: expected 'grid'");
    require(static_cast<bool>(is >> base >> spacing >> n_tones >> n_antennas), "waveform dump: malformed grid line");
    require(n_tones >= 1 && n_antennas >= 1, "waveform dump: invalid dimensions");

    auto block = [&](const char* name) {
        require(static_cast<bool>(is >> token) && token == name, std::string("waveform dump: expected '") + name + "'");
        RealMatrix mat(n_tones, n_antennas);
        for (int n = 0; n < n_tones; ++n)
            for (int m = 0; m < n_antennas; ++m)
                require(static_cast<bool>(is >> mat(n, m)), std::string("waveform dump: short ") + name + " block");
        return mat;
    };
    RealMatrix s = block("amplitudes");
    RealMatrix phi = block("phases");
    return {std::move(s), std::move(phi), FrequencyGrid(base, spacing, n_tones)};
}

} // namespace wpt
