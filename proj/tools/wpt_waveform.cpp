// SPDX-License-Identifier: Apache-2.0
// Command-line front end: Monte-Carlo sweeps plus single-link inspection.
#include <CLI11.hpp>

#include <wpt/wpt.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace wpt;

struct Flags {
    std::string config_path;
    std::vector<int> tones;
    std::vector<int> antennas;
    std::vector<std::string> waveforms;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<double> power_dbm;
    std::optional<int> threads;
    std::string pdp_path;
    std::string out;
    bool circuit_sim = false;
    bool full_rf = false;
};

// defaults < flags < config file
ExperimentConfig resolve(const Flags& f)
{
    ExperimentConfig config;
    if (!f.tones.empty())
        config.tones = f.tones;
    if (!f.antennas.empty())
        config.antennas = f.antennas;
    if (!f.waveforms.empty()) {
        config.waveforms.clear();
        for (const auto& name : f.waveforms)
            config.waveforms.push_back(parse_waveform_kind(name));
    }
    if (f.trials)
        config.realizations = *f.trials;
    if (f.seed)
        config.seed = *f.seed;
    if (f.power_dbm)
        config.power_dbm = *f.power_dbm;
    if (f.threads)
        config.threads = *f.threads;
    if (!f.pdp_path.empty())
        config.pdp = load_pdp_config(f.pdp_path);
    if (!f.out.empty())
        config.out = f.out;
    config.circuit_sim = config.circuit_sim || f.circuit_sim;
    config.full_rf = config.full_rf || f.full_rf;
    if (!f.config_path.empty())
        config = apply_config_json(config, read_json_file(f.config_path), f.config_path);
    config.validate();
    return config;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot write '" + path + "'");
    return out;
}

void add_common(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config_path, "JSON experiment file (overrides flags)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "base seed; realization r uses seed + r");
    cmd->add_option("--power-dbm", f.power_dbm, "transmit power budget in dBm");
    cmd->add_option("--pdp", f.pdp_path, "power delay profile JSON")->check(CLI::ExistingFile);
    cmd->add_flag("--full-rf", f.full_rf, "simulate the rectifier at the true carrier");
}

struct Link {
    ExperimentConfig config;
    MultipathChannel channel;
    FrequencyGrid grid;
    FrequencyResponse h;
};

Link make_link(const ExperimentConfig& config, int tones, int antennas)
{
    Link link{config, generate_channel(config.scaled_profile(), config.seed),
              FrequencyGrid::centered(config.center_hz, config.bandwidth_hz, tones), {}};
    link.h = frequency_response(link.channel, link.grid, ArrayGeometry::half_wavelength(antennas, config.center_hz));
    return link;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Channel-adaptive multisine waveform design for wireless power transfer"};
    app.require_subcommand(1);

    Flags sweep_flags;
    std::string summary_path;
    auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over (N, M, waveform, realization)");
    add_common(sweep, sweep_flags);
    sweep->add_option("--n", sweep_flags.tones, "tone counts")->delimiter(',');
    sweep->add_option("--m", sweep_flags.antennas, "antenna counts")->delimiter(',');
    sweep->add_option("--waveforms", sweep_flags.waveforms, "uniform,mf,opt,strongest")->delimiter(',');
    sweep->add_option("--trials", sweep_flags.trials, "channel realizations per cell");
    sweep->add_option("--threads", sweep_flags.threads, "worker threads (0 = all cores)");
    sweep->add_flag("--circuit-sim", sweep_flags.circuit_sim, "also simulate the rectifier circuit");
    sweep->add_option("--out", sweep_flags.out, "per-trial CSV (default results.csv)");
    sweep->add_option("--summary", summary_path, "per-cell means CSV ('-' for stdout)");

    Flags link_flags;
    int tones = 4, antennas = 1;
    std::string kind_name = "opt", out_path, trace_path;
    std::size_t stride = 10;

    auto* channel = app.add_subcommand("channel", "Dump one channel realization");
    add_common(channel, link_flags);
    channel->add_option("--out", out_path, "output file ('-' for stdout)")->required();

    auto* design = app.add_subcommand("design", "Design a waveform for one channel realization");
    add_common(design, link_flags);
    design->add_option("--n", tones, "tones")->check(CLI::PositiveNumber);
    design->add_option("--m", antennas, "antennas")->check(CLI::PositiveNumber);
    design->add_option("--waveform", kind_name, "uniform, mf, opt or strongest");
    design->add_option("--out", out_path, "waveform file ('-' for stdout)")->required();
    design->add_option("--trace", trace_path, "optimizer iteration CSV");

    auto* simulate = app.add_subcommand("simulate", "Rectifier transient for one designed waveform");
    add_common(simulate, link_flags);
    simulate->add_option("--n", tones, "tones")->check(CLI::PositiveNumber);
    simulate->add_option("--m", antennas, "antennas")->check(CLI::PositiveNumber);
    simulate->add_option("--waveform", kind_name, "uniform, mf, opt or strongest");
    simulate->add_option("--out", out_path, "trace CSV ('-' for stdout)")->required();
    simulate->add_option("--stride", stride, "keep every k-th step")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        auto with_output = [](const std::string& path, auto&& write) {
            if (path == "-") {
                write(std::cout);
                return;
            }
            auto out = open_output(path);
            write(out);
            out.flush();
            require(out.good(), "error while writing '" + path + "'");
        };

        if (sweep->parsed()) {
            const auto config = resolve(sweep_flags);
            const auto results = run_sweep(config);
            emit_csv(results, config.out);
            if (!summary_path.empty())
                with_output(summary_path, [&](std::ostream& os) { write_summary_csv(os, results); });
            std::cerr << "wrote " << results.rows.size() << " rows to " << config.out << '\n';
            return 0;
        }

        const auto config = resolve(link_flags);
        const auto link = make_link(config, tones, antennas);
        if (channel->parsed()) {
            with_output(out_path, [&](std::ostream& os) { write_channel(os, link.channel); });
            return 0;
        }

        const auto kind = parse_waveform_kind(kind_name);
        AmplitudeSolution solution;
        const auto w = design_waveform(kind, link.h, link.grid, config.harvester, config.power_watts(),
                                       config.optimizer, &solution);
        if (design->parsed()) {
            with_output(out_path, [&](std::ostream& os) { write_waveform(os, w); });
            if (!trace_path.empty()) {
                require(kind == WaveformKind::optimized, "--trace needs --waveform opt");
                with_output(trace_path, [&](std::ostream& os) { write_trace_csv(os, solution.trace); });
            }
            std::cerr << "z_dc = " << z_dc_analytic(w, link.h, config.harvester) << '\n';
            return 0;
        }

        RectifierOptions options;
        options.trace_stride = stride;
        const auto result = simulate_waveform(w, link.h, config, options);
        with_output(out_path, [&](std::ostream& os) { write_rectifier_trace_csv(os, result); });
        std::cerr << "dc_power = " << result.dc_power << " W" << (result.converged ? "" : " (not converged)") << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
