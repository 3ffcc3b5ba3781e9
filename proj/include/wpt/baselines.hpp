// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Reference waveforms: CSI-free in-phase uniform multisine, matched filter,
/// and the single strongest sinewave favored by a linear harvesting model.

#include <cmath>

#include "channel.hpp"
#include "error.hpp"
#include "waveform.hpp"

namespace wpt {

/// Phases that cancel the channel phase on every (tone, antenna).
inline RealMatrix conjugate_phases(const FrequencyResponse& h) { return -h.phases(); }

inline MultisineWaveform uniform_waveform(int tones, int antennas, const FrequencyGrid& grid, double power)
{
    require(tones >= 1 && antennas >= 1, "uniform_waveform: need at least one tone and one antenna");
    require(power >= 0.0, "uniform_waveform: negative power");
    const double s = std::sqrt(2.0 * power / (tones * antennas));
    return {RealMatrix::Constant(tones, antennas, s), RealMatrix::Zero(tones, antennas), grid};
}

/// Amplitudes proportional to |h|, globally normalized to transmit power P.
inline MultisineWaveform matched_filter_waveform(const FrequencyResponse& h, const FrequencyGrid& grid, double power)
{
    const RealMatrix a = h.magnitudes();
    const double norm = a.norm();
    require(norm > 0.0, "matched_filter_waveform: all-zero channel");
    return {std::sqrt(2.0 * power) * a / norm, conjugate_phases(h), grid};
}

/// Index of the tone with the largest sum_m |h(n, m)|^2; ties go to the lowest index.
inline int strongest_tone(const FrequencyResponse& h)
{
    const RealMatrix a = h.magnitudes();
    int best = 0;
    double best_gain = -1.0;
    for (int n = 0; n < h.tones(); ++n) {
        const double gain = a.row(n).squaredNorm();
        if (gain > best_gain) {
            best_gain = gain;
            best = n;
        }
    }
    return best;
}

/// All power on the strongest tone, spatially matched across antennas.
inline MultisineWaveform strongest_sinewave_waveform(const FrequencyResponse& h, const FrequencyGrid& grid,
                                                     double power)
{
    const RealMatrix a = h.magnitudes();
    require(a.norm() > 0.0, "strongest_sinewave_waveform: all-zero channel");
    const int n = strongest_tone(h);
    RealMatrix s = RealMatrix::Zero(h.tones(), h.antennas());
    s.row(n) = std::sqrt(2.0 * power) * a.row(n) / a.row(n).norm();
    return {std::move(s), conjugate_phases(h), grid};
}

} // namespace wpt
