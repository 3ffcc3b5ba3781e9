// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Monte-Carlo sweeps of waveform designs over (tones, antennas) grids.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "baselines.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "error.hpp"
#include "harvester.hpp"
#include "optimizer.hpp"
#include "rectifier.hpp"
#include "units.hpp"
#include "waveform.hpp"

namespace wpt {

enum class WaveformKind { uniform, matched_filter, optimized, strongest };

inline std::string to_string(WaveformKind kind)
{
    switch (kind) {
    case WaveformKind::uniform: return "uniform";
    case WaveformKind::matched_filter: return "mf";
    case WaveformKind::optimized: return "opt";
    case WaveformKind::strongest: return "strongest";
    }
    return "?";
}

inline WaveformKind parse_waveform_kind(const std::string& name)
{
    if (name == "uniform")
        return WaveformKind::uniform;
    if (name == "mf")
        return WaveformKind::matched_filter;
    if (name == "opt")
        return WaveformKind::optimized;
    if (name == "strongest")
        return WaveformKind::strongest;
    throw invalid_input("unknown waveform '" + name + "' (expected uniform, mf, opt or strongest)");
}

struct ExperimentConfig {
    std::vector<int> tones{1, 2, 4, 8, 16};
    std::vector<int> antennas{1, 2, 4};
    std::vector<WaveformKind> waveforms{WaveformKind::uniform, WaveformKind::matched_filter, WaveformKind::optimized};
    int realizations = 100;
    std::uint64_t seed = 42;
    double power_dbm = 36.0;      // transmit power budget P
    double bandwidth_hz = 20e6;   // tone spacing is bandwidth / N
    double center_hz = 5.18e9;
    HarvesterModel harvester;
    PdpConfig pdp;
    OptimizerOptions optimizer;
    bool circuit_sim = false;
    double sim_center_hz = 100e6; // carrier used by the circuit simulation unless full_rf
    bool full_rf = false;
    int threads = 0;              // 0 uses the hardware concurrency
    std::string out = "results.csv";

    double power_watts() const { return dbm_to_watts(power_dbm); }

    /// PDP scaled so the mean received power equals rx_power_dbm at P.
    PowerDelayProfile scaled_profile() const
    {
        return pdp.profile.normalized(dbm_to_watts(pdp.rx_power_dbm) / power_watts());
    }

    void validate() const
    {
        require(realizations >= 1, "config: 'trials' must be >= 1");
        require(!tones.empty() && !antennas.empty() && !waveforms.empty(), "config: empty N, M or waveform list");
        for (int n : tones)
            require(n >= 1, "config: every N must be >= 1");
        for (int m : antennas)
            require(m >= 1, "config: every M must be >= 1");
        require(bandwidth_hz > 0.0, "config: 'bandwidth_hz' must be positive");
        require(center_hz > 0.5 * bandwidth_hz, "config: center frequency must exceed half the bandwidth");
        require(sim_center_hz > 0.5 * bandwidth_hz, "config: simulation carrier must exceed half the bandwidth");
        require(!pdp.profile.empty(), "config: empty power delay profile");
        require(threads >= 0, "config: 'threads' must be >= 0");
    }
};

/// Applies a JSON experiment description on top of `base`.
inline ExperimentConfig apply_config_json(ExperimentConfig base, const json& j, const std::string& where = "config")
{
    require(j.is_object(), where + ": expected an object");
    detail::reject_unknown(j,
                           {"n", "m", "waveforms", "trials", "seed", "power_dbm", "bandwidth_hz", "center_hz",
                            "harvester", "pdp", "pdp_path", "circuit_sim", "sim_center_hz", "full_rf", "threads",
                            "out", "tolerance", "max_iter", "starts", "init"},
                           where);
    if (auto v = detail::get_optional<std::vector<int>>(j, "n", where))
        base.tones = *v;
    if (auto v = detail::get_optional<std::vector<int>>(j, "m", where))
        base.antennas = *v;
    if (auto v = detail::get_optional<std::vector<std::string>>(j, "waveforms", where)) {
        base.waveforms.clear();
        for (const auto& name : *v)
            base.waveforms.push_back(parse_waveform_kind(name));
    }
    if (auto v = detail::get_optional<int>(j, "trials", where))
        base.realizations = *v;
    if (auto v = detail::get_optional<std::uint64_t>(j, "seed", where))
        base.seed = *v;
    if (auto v = detail::get_optional<double>(j, "power_dbm", where))
        base.power_dbm = *v;
    if (auto v = detail::get_optional<double>(j, "bandwidth_hz", where))
        base.bandwidth_hz = *v;
    if (auto v = detail::get_optional<double>(j, "center_hz", where))
        base.center_hz = *v;
    if (j.contains("harvester"))
        base.harvester = parse_harvester_config(j.at("harvester"), where + ".harvester");
    if (j.contains("pdp"))
        base.pdp = parse_pdp_config(j.at("pdp"), where + ".pdp");
    if (auto v = detail::get_optional<std::string>(j, "pdp_path", where))
        base.pdp = load_pdp_config(*v);
    if (auto v = detail::get_optional<bool>(j, "circuit_sim", where))
        base.circuit_sim = *v;
    if (auto v = detail::get_optional<double>(j, "sim_center_hz", where))
        base.sim_center_hz = *v;
    if (auto v = detail::get_optional<bool>(j, "full_rf", where))
        base.full_rf = *v;
    if (auto v = detail::get_optional<int>(j, "threads", where))
        base.threads = *v;
    if (auto v = detail::get_optional<std::string>(j, "out", where))
        base.out = *v;
    if (auto v = detail::get_optional<double>(j, "tolerance", where))
        base.optimizer.tolerance = *v;
    if (auto v = detail::get_optional<int>(j, "max_iter", where))
        base.optimizer.max_iterations = *v;
    if (auto v = detail::get_optional<int>(j, "starts", where))
        base.optimizer.starts = *v;
    if (auto v = detail::get_optional<std::string>(j, "init", where)) {
        require(*v == "mf" || *v == "uniform", where + ": 'init' must be 'mf' or 'uniform'");
        base.optimizer.init = *v == "mf" ? Initialization::matched_filter : Initialization::uniform;
    }
    return base;
}

struct TrialResult {
    int tones = 0;
    int antennas = 0;
    WaveformKind waveform = WaveformKind::uniform;
    int realization = 0;
    std::uint64_t seed = 0;
    double z_dc = 0.0;
    std::optional<double> dc_power_sim;
    int iterations = 0;
    bool converged = true;
};

struct CellSummary {
    int tones = 0;
    int antennas = 0;
    WaveformKind waveform = WaveformKind::uniform;
    int trials = 0;
    double mean_z_dc = 0.0;
    std::optional<double> mean_dc_power_sim;
};

struct SweepResults {
    std::vector<TrialResult> rows;

    std::vector<CellSummary> summarize() const;

    /// Mean z_DC of one cell, or NaN if absent.
    double mean_z_dc(int tones, int antennas, WaveformKind kind) const;
};

inline std::vector<CellSummary> SweepResults::summarize() const
{
    std::vector<CellSummary> cells;
    for (const auto& r : rows) {
        if (cells.empty() || cells.back().tones != r.tones || cells.back().antennas != r.antennas ||
            cells.back().waveform != r.waveform)
            cells.push_back({r.tones, r.antennas, r.waveform, 0, 0.0, std::nullopt});
        auto& c = cells.back();
        ++c.trials;
        c.mean_z_dc += r.z_dc;
        if (r.dc_power_sim)
            c.mean_dc_power_sim = c.mean_dc_power_sim.value_or(0.0) + *r.dc_power_sim;
    }
    for (auto& c : cells) {
        c.mean_z_dc /= c.trials;
        if (c.mean_dc_power_sim)
            *c.mean_dc_power_sim /= c.trials;
    }
    return cells;
}

inline double SweepResults::mean_z_dc(int tones, int antennas, WaveformKind kind) const
{
    double sum = 0.0;
    int count = 0;
    for (const auto& r : rows)
        if (r.tones == tones && r.antennas == antennas && r.waveform == kind) {
            sum += r.z_dc;
            ++count;
        }
    return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

/// Waveform of the given kind for one channel; `solution` is set for `optimized`.
inline MultisineWaveform design_waveform(WaveformKind kind, const FrequencyResponse& h, const FrequencyGrid& grid,
                                         const HarvesterModel& model, double power,
                                         const OptimizerOptions& options = {},
                                         AmplitudeSolution* solution = nullptr)
{
    switch (kind) {
    case WaveformKind::uniform: return uniform_waveform(h.tones(), h.antennas(), grid, power);
    case WaveformKind::matched_filter: return matched_filter_waveform(h, grid, power);
    case WaveformKind::strongest: return strongest_sinewave_waveform(h, grid, power);
    case WaveformKind::optimized: {
        auto [waveform, sol] = optimize_waveform(h, grid, model, power, options);
        if (solution)
            *solution = std::move(sol);
        return waveform;
    }
    }
    throw invalid_input("design_waveform: unknown kind");
}

/// Circuit-level DC power for a designed waveform, on the simulation carrier.
inline RectifierResult simulate_waveform(const MultisineWaveform& w, const FrequencyResponse& h,
                                         const ExperimentConfig& config, const RectifierOptions& options = {})
{
    const auto spectrum = received_spectrum(w, h);
    const FrequencyGrid sim_grid =
        config.full_rf ? spectrum.grid : spectrum.grid.recentered(config.sim_center_hz);
    const double spacing_hz = sim_grid.spacing / two_pi;
    auto circuit = RectifierCircuit::for_spacing(spacing_hz, config.harvester.diode());
    circuit.antenna_resistance = config.harvester.antenna_resistance();
    return simulate_rectifier(spectrum.on_grid(sim_grid), circuit, options);
}

/// Runs every (N, M, realization) work item; each item evaluates all waveforms
/// on one shared channel. Rows come back ordered by (N, M, waveform, realization).
inline SweepResults run_sweep(const ExperimentConfig& config)
{
    config.validate();
    const PowerDelayProfile profile = config.scaled_profile();
    const double power = config.power_watts();

    struct Item {
        int tones, antennas, realization;
    };
    std::vector<Item> items;
    for (int n : config.tones)
        for (int m : config.antennas)
            for (int r = 0; r < config.realizations; ++r)
                items.push_back({n, m, r});

    const std::size_t kinds = config.waveforms.size();
    std::vector<TrialResult> slots(items.size() * kinds);

    auto run_item = [&](std::size_t index) {
        const Item& item = items[index];
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(item.realization);
        const auto channel = generate_channel(profile, seed);
        const auto grid = FrequencyGrid::centered(config.center_hz, config.bandwidth_hz, item.tones);
        const auto array = ArrayGeometry::half_wavelength(item.antennas, config.center_hz);
        const auto h = frequency_response(channel, grid, array);

        for (std::size_t k = 0; k < kinds; ++k) {
            TrialResult row;
            row.tones = item.tones;
            row.antennas = item.antennas;
            row.waveform = config.waveforms[k];
            row.realization = item.realization;
            row.seed = seed;
            AmplitudeSolution solution;
            const auto w = design_waveform(row.waveform, h, grid, config.harvester, power, config.optimizer, &solution);
            row.z_dc = z_dc_analytic(w, h, config.harvester);
            if (row.waveform == WaveformKind::optimized) {
                row.iterations = solution.iterations;
                row.converged = solution.converged;
            }
            if (config.circuit_sim)
                row.dc_power_sim = simulate_waveform(w, h, config).dc_power;
            slots[index * kinds + k] = row;
        }
    };

    unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(items.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    auto worker = [&](unsigned id) {
        try {
            for (std::size_t i = next++; i < items.size(); i = next++)
                run_item(i);
        } catch (...) {
            errors[id] = std::current_exception();
            next = items.size();
        }
    };
    if (workers <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned id = 0; id < workers; ++id)
            pool.emplace_back(worker, id);
        for (auto& t : pool)
            t.join();
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    auto order = [&](const TrialResult& r) {
        const auto n = std::find(config.tones.begin(), config.tones.end(), r.tones) - config.tones.begin();
        const auto m = std::find(config.antennas.begin(), config.antennas.end(), r.antennas) - config.antennas.begin();
        const auto w = std::find(config.waveforms.begin(), config.waveforms.end(), r.waveform) - config.waveforms.begin();
        return std::tuple(n, m, w, r.realization);
    };
    std::stable_sort(slots.begin(), slots.end(),
                     [&](const TrialResult& a, const TrialResult& b) { return order(a) < order(b); });
    return {std::move(slots)};
}

inline void write_results_csv(std::ostream& os, const SweepResults& results)
{
    const auto precision = os.precision();
    os.precision(17);
    os << "N,M,waveform,realization,seed,z_dc,dc_power_sim,iterations,converged\n";
    for (const auto& r : results.rows) {
        os << r.tones << ',' << r.antennas << ',' << to_string(r.waveform) << ',' << r.realization << ',' << r.seed
           << ',' << r.z_dc << ',';
        if (r.dc_power_sim)
            os << *r.dc_power_sim;
        os << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
    }
    os.precision(precision);
}

inline void emit_csv(const SweepResults& results, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot write '" + path + "'");
    write_results_csv(out, results);
    out.flush();
    require(out.good(), "error while writing '" + path + "'");
}

inline void write_summary_csv(std::ostream& os, const SweepResults& results)
{
    const auto precision = os.precision();
    os.precision(10);
    os << "N,M,waveform,trials,mean_z_dc,mean_dc_power_sim\n";
    for (const auto& c : results.summarize()) {
        os << c.tones << ',' << c.antennas << ',' << to_string(c.waveform) << ',' << c.trials << ',' << c.mean_z_dc
           << ',';
        if (c.mean_dc_power_sim)
            os << *c.mean_dc_power_sim;
        os << '\n';
    }
    os.precision(precision);
}

} // namespace wpt
