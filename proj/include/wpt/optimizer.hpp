// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Waveform optimization for the truncated diode model.
///
/// Phases have a closed form: cancelling every channel phase makes all
/// cosines in z_DC equal to one. With those phases z_DC is a posynomial in
/// the amplitudes, and maximizing it under the transmit power budget is a
/// reverse geometric program. It is solved by successive condensation: at
/// the current iterate, weight each term by its share of z_DC, collapse the
/// posynomial into its tangent AM-GM monomial, and maximize that monomial
/// over the power sphere. The last step has the closed form
/// s_i = sqrt(2 P a_i / sum_j a_j), so no generic GP solver is needed.
/// Each step maximizes a lower bound that is tight at the current point,
/// hence z_DC never decreases. Only a local optimum is guaranteed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <vector>

#include "baselines.hpp"
#include "channel.hpp"
#include "error.hpp"
#include "harvester.hpp"
#include "posynomial.hpp"
#include "waveform.hpp"

namespace wpt {

inline RealMatrix optimal_phases(const FrequencyResponse& h) { return conjugate_phases(h); }

/// Amplitude matrix (tones x antennas) <-> flat variable vector, index n * M + m.
inline Eigen::VectorXd flatten(const RealMatrix& s)
{
    Eigen::VectorXd x(s.size());
    for (Eigen::Index n = 0; n < s.rows(); ++n)
        for (Eigen::Index m = 0; m < s.cols(); ++m)
            x(n * s.cols() + m) = s(n, m);
    return x;
}

inline RealMatrix unflatten(const Eigen::VectorXd& x, int tones, int antennas)
{
    require(x.size() == static_cast<Eigen::Index>(tones) * antennas, "unflatten: size mismatch");
    RealMatrix s(tones, antennas);
    for (int n = 0; n < tones; ++n)
        for (int m = 0; m < antennas; ++m)
            s(n, m) = x(n * antennas + m);
    return s;
}

namespace detail {

// A raw z_DC term: up to four variable ids, sorted and padded with `unused`.
inline constexpr std::uint64_t unused = 0xFFFF;

inline std::uint64_t pack(std::uint64_t a, std::uint64_t b, std::uint64_t c = unused, std::uint64_t d = unused)
{
    std::uint64_t v[4] = {a, b, c, d};
    std::sort(v, v + 4);
    return (v[0] << 48) | (v[1] << 32) | (v[2] << 16) | v[3];
}

inline std::vector<Factor> unpack(std::uint64_t key)
{
    std::vector<Factor> factors;
    for (int shift = 48; shift >= 0; shift -= 16) {
        const std::uint64_t id = (key >> shift) & 0xFFFF;
        if (id == unused)
            continue;
        if (!factors.empty() && factors.back().variable == id)
            factors.back().power += 1.0;
        else
            factors.push_back({static_cast<std::size_t>(id), 1.0});
    }
    return factors;
}

} // namespace detail

/// z_DC with all cosines set to one, as a posynomial in the flattened
/// amplitudes. Variables with |h| = 0 never appear in any term.
inline Posynomial build_posynomial(const RealMatrix& magnitudes, const HarvesterModel& model, bool merge = true)
{
    const auto tones = static_cast<int>(magnitudes.rows());
    const auto antennas = static_cast<int>(magnitudes.cols());
    require(tones >= 1 && antennas >= 1, "build_posynomial: empty magnitude matrix");
    require(static_cast<std::uint64_t>(tones) * antennas < detail::unused, "build_posynomial: too many variables");
    require((magnitudes.array() >= 0.0).all(), "build_posynomial: negative channel magnitude");

    const double c2 = 0.5 * model.second_order_weight();
    const double c4 = 0.375 * model.fourth_order_weight();
    auto id = [antennas](int n, int m) { return static_cast<std::uint64_t>(n) * antennas + m; };

    std::vector<std::pair<std::uint64_t, double>> raw;
    for (int n = 0; n < tones; ++n)
        for (int m0 = 0; m0 < antennas; ++m0)
            for (int m1 = 0; m1 < antennas; ++m1) {
                const double c = c2 * magnitudes(n, m0) * magnitudes(n, m1);
                if (c > 0.0)
                    raw.emplace_back(detail::pack(id(n, m0), id(n, m1)), c);
            }
    for (int n0 = 0; n0 < tones; ++n0)
        for (int n1 = 0; n1 < tones; ++n1)
            for (int n2 = 0; n2 < tones; ++n2) {
                const int n3 = n0 + n1 - n2;
                if (n3 < 0 || n3 >= tones)
                    continue;
                for (int m0 = 0; m0 < antennas; ++m0)
                    for (int m1 = 0; m1 < antennas; ++m1)
                        for (int m2 = 0; m2 < antennas; ++m2)
                            for (int m3 = 0; m3 < antennas; ++m3) {
                                const double c = c4 * magnitudes(n0, m0) * magnitudes(n1, m1) *
                                                 magnitudes(n2, m2) * magnitudes(n3, m3);
                                if (c > 0.0)
                                    raw.emplace_back(detail::pack(id(n0, m0), id(n1, m1), id(n2, m2), id(n3, m3)), c);
                            }
            }

    if (merge) {
        std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t out = 0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (out > 0 && raw[out - 1].first == raw[i].first)
                raw[out - 1].second += raw[i].second;
            else
                raw[out++] = raw[i];
        }
        raw.resize(out);
    }

    std::vector<Monomial> terms;
    terms.reserve(raw.size());
    for (const auto& [key, c] : raw)
        terms.emplace_back(c, detail::unpack(key));
    return {static_cast<std::size_t>(tones) * antennas, std::move(terms)};
}

/// Maximizer of c * prod s_i^{a_i} subject to 0.5 * sum s_i^2 <= P, s >= 0.
inline Eigen::VectorXd maximize_monomial_under_power(const Monomial& monomial, double power, std::size_t variables)
{
    require(power > 0.0, "maximize_monomial_under_power: power must be positive");
    double total = 0.0;
    for (const auto& f : monomial.factors()) {
        require(f.power >= 0.0, "maximize_monomial_under_power: negative exponent");
        require(f.variable < variables, "maximize_monomial_under_power: variable out of range");
        total += f.power;
    }
    require(total > 0.0, "maximize_monomial_under_power: all exponents are zero");

    Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(variables));
    for (const auto& f : monomial.factors())
        s(static_cast<Eigen::Index>(f.variable)) = std::sqrt(2.0 * power * f.power / total);
    return s;
}

struct IterationRecord {
    int iteration = 0;
    RealMatrix amplitudes;
    double z_dc = 0.0;
    double power = 0.0;
    double max_gamma = 0.0;
    std::vector<double> gammas; // filled only with OptimizerOptions::keep_weights
};

struct IterationTrace {
    std::vector<IterationRecord> records;

    bool empty() const { return records.empty(); }
    const IterationRecord& back() const { return records.back(); }
};

enum class Initialization { matched_filter, uniform };

struct OptimizerOptions {
    double tolerance = 1e-6;
    int max_iterations = 100;
    Initialization init = Initialization::matched_filter;
    int starts = 1;            // extra starts beyond the first are random and positive
    std::uint64_t seed = 0;    // for the random starts
    bool keep_weights = false;
};

struct AmplitudeSolution {
    RealMatrix amplitudes;
    double z_dc = 0.0;
    int iterations = 0;
    bool converged = false;
    IterationTrace trace;
};

/// Successive AM-GM condensation from `init` until the relative change of
/// z_DC drops below the tolerance. Hitting max_iterations is reported
/// through `converged`, not thrown.
inline AmplitudeSolution optimize_amplitudes(const FrequencyResponse& h, const HarvesterModel& model, double power,
                                             const RealMatrix& init, const OptimizerOptions& options = {})
{
    const int tones = h.tones();
    const int antennas = h.antennas();
    require(power > 0.0, "optimize_amplitudes: power must be positive");
    require(init.rows() == tones && init.cols() == antennas, "optimize_amplitudes: init has the wrong shape");
    require(0.5 * init.squaredNorm() <= power * (1.0 + 1e-12), "optimize_amplitudes: infeasible initial point");
    require(options.max_iterations >= 0, "optimize_amplitudes: negative iteration limit");

    const RealMatrix magnitudes = h.magnitudes();
    require(magnitudes.norm() > 0.0, "optimize_amplitudes: all-zero channel");
    const Posynomial objective = build_posynomial(magnitudes, model);

    Eigen::VectorXd x = flatten(init);
    const Eigen::VectorXd a = flatten(magnitudes);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (a(i) == 0.0)
            x(i) = 0.0;
        else
            require(x(i) > 0.0, "optimize_amplitudes: initial amplitudes must be positive where the channel is nonzero");
    }

    std::vector<double> values;
    std::vector<double> gammas(objective.size());
    auto span = [](const Eigen::VectorXd& v) { return std::span<const double>(v.data(), v.size()); };

    term_values(objective, span(x), values);
    double z = 0.0;
    for (double v : values)
        z += v;

    AmplitudeSolution out;
    auto record = [&](int iteration) {
        IterationRecord r;
        r.iteration = iteration;
        r.amplitudes = unflatten(x, tones, antennas);
        r.z_dc = z;
        r.power = 0.5 * x.squaredNorm();
        double max_gamma = 0.0;
        for (double v : values)
            max_gamma = std::max(max_gamma, v / z);
        r.max_gamma = max_gamma;
        if (options.keep_weights) {
            r.gammas.resize(values.size());
            for (std::size_t k = 0; k < values.size(); ++k)
                r.gammas[k] = values[k] / z;
        }
        out.trace.records.push_back(std::move(r));
    };
    record(0);

    for (int i = 1; i <= options.max_iterations; ++i) {
        for (std::size_t k = 0; k < values.size(); ++k)
            gammas[k] = values[k] / z;
        const Monomial bound = amgm_lower_bound(objective, gammas);
        x = maximize_monomial_under_power(bound, power, objective.variables());

        const double previous = z;
        term_values(objective, span(x), values);
        z = 0.0;
        for (double v : values)
            z += v;
        record(i);
        out.iterations = i;
        if (std::abs(z - previous) <= options.tolerance * std::abs(previous)) {
            out.converged = true;
            break;
        }
    }

    out.amplitudes = unflatten(x, tones, antennas);
    out.z_dc = z;
    return out;
}

/// Optimal phases plus optimized amplitudes. With several starts the best
/// local optimum is kept.
inline std::pair<MultisineWaveform, AmplitudeSolution> optimize_waveform(const FrequencyResponse& h,
                                                                         const FrequencyGrid& grid,
                                                                         const HarvesterModel& model, double power,
                                                                         const OptimizerOptions& options = {})
{
    require(options.starts >= 1, "optimize_waveform: need at least one start");
    const RealMatrix first = options.init == Initialization::matched_filter
                                 ? matched_filter_waveform(h, grid, power).amplitudes
                                 : uniform_waveform(h.tones(), h.antennas(), grid, power).amplitudes;
    AmplitudeSolution best = optimize_amplitudes(h, model, power, first, options);

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    for (int start = 1; start < options.starts; ++start) {
        RealMatrix init = RealMatrix::NullaryExpr(h.tones(), h.antennas(), [&] { return unit(rng); });
        init *= std::sqrt(2.0 * power) / init.norm();
        auto candidate = optimize_amplitudes(h, model, power, init, options);
        if (candidate.z_dc > best.z_dc)
            best = std::move(candidate);
    }
    MultisineWaveform waveform(best.amplitudes, optimal_phases(h), grid);
    return {std::move(waveform), std::move(best)};
}

/// CSV with columns iter, z_dc, power, max_gamma.
inline void write_trace_csv(std::ostream& os, const IterationTrace& trace)
{
    const auto precision = os.precision();
    os.precision(17);
    os << "iter,z_dc,power,max_gamma\n";
    for (const auto& r : trace.records)
        os << r.iteration << ',' << r.z_dc << ',' << r.power << ',' << r.max_gamma << '\n';
    os.precision(precision);
}

} // namespace wpt
