// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Multipath channel generation and per-tone, per-antenna frequency responses.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "units.hpp"

namespace wpt {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

enum class ArrayType { uniform_linear };

struct ArrayGeometry {
    int num_antennas = 1;
    double element_spacing = 0.0; // meters
    ArrayType type = ArrayType::uniform_linear;

    ArrayGeometry() = default;
    ArrayGeometry(int antennas, double spacing) : num_antennas(antennas), element_spacing(spacing)
    {
        require(antennas >= 1, "array needs at least one antenna");
        require(spacing > 0.0, "element spacing must be positive");
    }

    static ArrayGeometry half_wavelength(int antennas, double frequency_hz)
    {
        return {antennas, speed_of_light / frequency_hz / 2.0};
    }
};

struct MultipathTap {
    double gain = 0.0;            // alpha, linear amplitude
    double delay = 0.0;           // tau, seconds
    double phase = 0.0;           // xi, radians
    double departure_angle = 0.0; // theta, radians w.r.t. the array axis
};

struct MultipathChannel {
    std::vector<MultipathTap> taps;
    std::optional<std::uint64_t> seed;

    std::size_t size() const { return taps.size(); }
};

struct PdpEntry {
    double delay = 0.0; // seconds
    double power = 0.0; // linear average power
    std::optional<double> departure_angle;
};

/// Ordered list of taps with average powers. Delays strictly increase.
class PowerDelayProfile {
public:
    PowerDelayProfile() = default;

    explicit PowerDelayProfile(std::vector<PdpEntry> entries, std::string label = {})
        : entries_(std::move(entries)), label_(std::move(label))
    {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            require(entries_[i].power >= 0.0, "power delay profile: negative tap power");
            require(entries_[i].delay >= 0.0, "power delay profile: negative tap delay");
            if (i > 0)
                require(entries_[i].delay > entries_[i - 1].delay,
                        "power delay profile: delays must be strictly increasing");
        }
    }

    /// Builds a profile from delays in nanoseconds and relative powers in dB.
    static PowerDelayProfile from_db(const std::vector<double>& delays_ns,
                                     const std::vector<double>& powers_db,
                                     std::string label = {})
    {
        require(delays_ns.size() == powers_db.size(),
                "power delay profile: delays_ns and powers_db differ in length");
        std::vector<PdpEntry> entries;
        entries.reserve(delays_ns.size());
        for (std::size_t i = 0; i < delays_ns.size(); ++i)
            entries.push_back({delays_ns[i] * 1e-9, db_to_linear(powers_db[i]), std::nullopt});
        return PowerDelayProfile(std::move(entries), std::move(label));
    }

    /// 18 taps, 10 ns apart, decaying 1 dB per tap. Stands in for the
    /// indoor NLOS "model B" profile whose table is not reproduced here.
    static PowerDelayProfile model_b_substitute()
    {
        std::vector<double> delays, powers;
        for (int l = 0; l < 18; ++l) {
            delays.push_back(10.0 * l);
            powers.push_back(-1.0 * l);
        }
        return from_db(delays, powers, "model-B-substitute");
    }

    /// Copy rescaled so the tap powers sum to `total`.
    PowerDelayProfile normalized(double total) const
    {
        require(total >= 0.0, "power delay profile: negative normalization target");
        const double sum = total_power();
        require(sum > 0.0, "power delay profile: cannot normalize an all-zero profile");
        auto scaled = entries_;
        for (auto& e : scaled)
            e.power *= total / sum;
        return PowerDelayProfile(std::move(scaled), label_);
    }

    double total_power() const
    {
        double sum = 0.0;
        for (const auto& e : entries_)
            sum += e.power;
        return sum;
    }

    const std::vector<PdpEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::string& label() const { return label_; }

private:
    std::vector<PdpEntry> entries_;
    std::string label_;
};

/// Evenly spaced angular frequencies w_n = w_0 + n * spacing.
struct FrequencyGrid {
    double base = 0.0;    // w_0, rad/s
    double spacing = 0.0; // rad/s
    int count = 0;

    FrequencyGrid() = default;
    FrequencyGrid(double base_rad, double spacing_rad, int n)
        : base(base_rad), spacing(spacing_rad), count(n)
    {
        require(spacing_rad > 0.0, "frequency grid: spacing must be positive");
        require(n >= 1, "frequency grid: need at least one sinewave");
        require(base_rad >= 0.0, "frequency grid: negative base frequency");
    }

    /// N tones spaced bandwidth/N apart, centered on `center_hz`.
    static FrequencyGrid centered(double center_hz, double bandwidth_hz, int n)
    {
        require(n >= 1, "frequency grid: need at least one sinewave");
        require(bandwidth_hz > 0.0, "frequency grid: bandwidth must be positive");
        const double df = bandwidth_hz / n;
        const double f0 = center_hz - 0.5 * (n - 1) * df;
        return {two_pi * f0, two_pi * df, n};
    }

    double operator[](int n) const { return base + n * spacing; }
    double highest() const { return (*this)[count - 1]; }

    /// Same tone count and spacing, moved so the band is centered on `center_hz`.
    FrequencyGrid recentered(double center_hz) const
    {
        const double f0 = center_hz - 0.5 * (count - 1) * spacing / two_pi;
        return {two_pi * f0, spacing, count};
    }

    /// Period of any real signal on this grid, if w_0/spacing is a rational
    /// with a small denominator. Empty otherwise.
    std::optional<double> period() const
    {
        const double ratio = base / spacing;
        for (int q = 1; q <= 64; ++q) {
            const double scaled = q * ratio;
            if (std::abs(scaled - std::round(scaled)) <= 1e-9 * std::max(1.0, scaled))
                return q * two_pi / spacing;
        }
        return std::nullopt;
    }
};

/// Complex gains h(n, m) for tone n and antenna m (zero-based).
class FrequencyResponse {
public:
    FrequencyResponse() = default;
    explicit FrequencyResponse(ComplexMatrix gains) : gains_(std::move(gains)) {}

    int tones() const { return static_cast<int>(gains_.rows()); }
    int antennas() const { return static_cast<int>(gains_.cols()); }

    std::complex<double> operator()(int n, int m) const { return gains_(n, m); }
    const ComplexMatrix& gains() const { return gains_; }

    RealMatrix magnitudes() const { return gains_.cwiseAbs(); }
    RealMatrix phases() const { return gains_.unaryExpr([](std::complex<double> z) { return std::arg(z); }).real(); }

private:
    ComplexMatrix gains_;
};

struct ChannelOptions {
    /// Used for taps without a configured angle. Empty means uniform on [0, 2pi).
    std::optional<double> fixed_departure_angle;
};

/// Draws one circularly-symmetric complex Gaussian tap per PDP entry.
inline MultipathChannel generate_channel(const PowerDelayProfile& pdp, std::uint64_t seed,
                                         const ChannelOptions& options = {})
{
    require(!pdp.empty(), "generate_channel: empty power delay profile");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, two_pi);

    MultipathChannel channel;
    channel.seed = seed;
    channel.taps.reserve(pdp.size());
    for (const auto& entry : pdp.entries()) {
        // Draw all variates unconditionally so tap l always consumes the same stream slots.
        const double re = normal(rng);
        const double im = normal(rng);
        const double theta = angle(rng);

        const double sigma = std::sqrt(entry.power / 2.0);
        const std::complex<double> value(sigma * re, sigma * im);

        MultipathTap tap;
        tap.gain = std::abs(value);
        tap.phase = entry.power > 0.0 ? std::arg(value) : 0.0;
        tap.delay = entry.delay;
        if (entry.departure_angle)
            tap.departure_angle = *entry.departure_angle;
        else if (options.fixed_departure_angle)
            tap.departure_angle = *options.fixed_departure_angle;
        else
            tap.departure_angle = theta;
        channel.taps.push_back(tap);
    }
    return channel;
}

/// Phase of antenna m (one-based) relative to the first element of a ULA.
inline double ula_phase_shift(int antenna, double wavelength, double departure_angle, double spacing)
{
    if (antenna == 1)
        return 0.0;
    return two_pi * (antenna - 1) * (spacing / wavelength) * std::cos(departure_angle);
}

inline FrequencyResponse frequency_response(const MultipathChannel& channel, const FrequencyGrid& grid,
                                            const ArrayGeometry& array)
{
    require(channel.size() >= 1, "frequency_response: channel has no taps");
    ComplexMatrix h = ComplexMatrix::Zero(grid.count, array.num_antennas);
    for (int n = 0; n < grid.count; ++n) {
        const double w = grid[n];
        const double wavelength = two_pi * speed_of_light / w;
        for (int m = 0; m < array.num_antennas; ++m) {
            std::complex<double> sum{0.0, 0.0};
            for (const auto& tap : channel.taps) {
                const double shift = ula_phase_shift(m + 1, wavelength, tap.departure_angle, array.element_spacing);
                sum += tap.gain * std::polar(1.0, -w * tap.delay + shift + tap.phase);
            }
            h(n, m) = sum;
        }
    }
    return FrequencyResponse(std::move(h));
}

// Channel dump: "# wpt-channel seed=<s> taps=<L>", then "alpha tau xi theta" per line.

inline void write_channel(std::ostream& os, const MultipathChannel& channel)
{
    os << "# wpt-channel seed=";
    if (channel.seed)
        os << *channel.seed;
    else
        os << "none";
    os << " taps=" << channel.size() << '\n';
    os << "# alpha tau xi theta\n";
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << std::fixed << std::setprecision(24);
    for (const auto& tap : channel.taps)
        os << tap.gain << ' ' << tap.delay << ' ' << tap.phase << ' ' << tap.departure_angle << '\n';
    os.flags(flags);
    os.precision(precision);
}

inline MultipathChannel read_channel(std::istream& is)
{
    MultipathChannel channel;
    std::string line;
    std::size_t expected = 0;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        if (line.rfind("# wpt-channel", 0) == 0) {
            have_header = true;
            const auto seed_pos = line.find("seed=");
            const auto taps_pos = line.find("taps=");
            require(seed_pos != std::string::npos && taps_pos != std::string::npos,
                    "channel dump: malformed header");
            const std::string seed = line.substr(seed_pos + 5, line.find(' ', seed_pos) - seed_pos - 5);
            if (seed != "none")
                channel.seed = std::stoull(seed);
            expected = std::stoull(line.substr(taps_pos + 5));
            continue;
        }
        if (line[0] == '#')
            continue;
        std::istringstream fields(line);
        MultipathTap tap;
        require(static_cast<bool>(fields >> tap.gain >> tap.delay >> tap.phase >> tap.departure_angle),
                "channel dump: malformed tap line '" + line + "'");
        channel.taps.push_back(tap);
    }
    require(have_header, "channel dump: missing header");
    require(channel.size() == expected, "channel dump: tap count does not match header");
    return channel;
}

} // namespace wpt
