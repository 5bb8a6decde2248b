#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chanest/dataset.hpp"
#include "chanest/experiments.hpp"
#include "chanest/network.hpp"

namespace fs = std::filesystem;
using namespace chanest;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
};

ScenarioConfig load_config(const CommonOpts& opts) {
    if (opts.config_path.empty()) throw config_error("a --config file is required");
    ScenarioConfig cfg = scenario_from_json_file(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    return cfg;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory " + dir + ": " + ec.message());
}

int cmd_train(const CommonOpts& opts) {
    const ScenarioConfig cfg = load_config(opts);
    ensure_out_dir(opts.out_dir);

    const ScenarioOutput output = run_scenario(cfg);

    write_results_csv(opts.out_dir + "/results.csv", output.results);
    write_history_csv(opts.out_dir + "/history.csv", output);
    {
        std::ofstream os(opts.out_dir + "/config.echo.json");
        if (!os) throw io_error("cannot write config echo");
        os << scenario_to_json_text(cfg) << '\n';
    }
    for (const auto& [name, params] : output.final_params)
        save_checkpoint(opts.out_dir + "/" + name + ".mpn1", params, cfg.system, cfg.n_atoms);

    std::printf("%-12s %14s %10s\n", "method", "channels_seen", "nmse_db");
    for (const ResultRow& row : output.results.rows)
        if (row.channels_seen == output.results.rows.back().channels_seen)
            std::printf("%-12s %14zu %10.3f\n", row.method.c_str(), row.channels_seen, row.nmse_db);
    std::printf("wrote results.csv, history.csv, config.echo.json and checkpoints to %s\n", opts.out_dir.c_str());
    return 0;
}

int cmd_gen(const CommonOpts& opts, std::size_t count, const std::string& out_file) {
    const ScenarioConfig cfg = load_config(opts);
    const Rng base(cfg.seed);
    Rng rng_gains = base.derive(1);
    Rng rng_ch = base.derive(10);

    const SubcarrierGrid nominal = build_nominal_grid(cfg.system);
    SubcarrierGrid real_grid = apply_sco(nominal, cfg.system, cfg.impairments.sco_ppm);
    if (cfg.impairments.cfo_hz != 0.0) real_grid = apply_cfo(real_grid, cfg.impairments.cfo_hz);
    const AntennaGains real_gains = sample_gain_noise(nominal_gains(cfg.system.n_subcarriers),
                                                      cfg.impairments.gain_noise_var, rng_gains);

    const std::vector<double> delays = build_delay_grid(cfg.system, cfg.n_atoms, cfg.oversampling);
    PathProfile profile;
    profile.tau_max_s = delays.back();
    profile.decay_db = cfg.decay_db;
    profile.per_path_decay_db = cfg.per_path_decay_db;
    profile.fill = cfg.delay_fill;
    profile.on_grid = cfg.on_grid;
    profile.grid_step_s = delays[1] - delays[0];
    profile.max_paths = cfg.max_paths;

    std::vector<ChannelSample> samples;
    samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t n_paths =
            1 + static_cast<std::size_t>(rng_ch.uniform01() * static_cast<double>(cfg.max_paths));
        samples.push_back(
            generate_channel(real_grid, real_gains, std::min(n_paths, cfg.max_paths), rng_ch, profile));
    }
    save_dataset(out_file, cfg.system, samples);
    std::printf("wrote %zu channels to %s\n", count, out_file.c_str());
    return 0;
}

int cmd_bench(const CommonOpts& opts, const std::vector<std::size_t>& atoms, std::size_t runs) {
    ScenarioConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config(opts);
    else if (opts.seed) cfg.seed = *opts.seed;
    ensure_out_dir(opts.out_dir);

    std::vector<BenchSpec> specs;
    for (std::size_t a : atoms) specs.push_back({a, runs});
    const std::vector<BenchRow> rows = timing_bench(cfg.system, specs, cfg.snr_in_db, cfg.max_layers, cfg.seed);

    write_bench_csv(opts.out_dir + "/bench.csv", rows);
    std::printf("%-12s %8s %8s %14s %14s %18s\n", "method", "atoms", "runs", "mean_time_s", "p95_time_s",
                "mean_correlations");
    for (const BenchRow& row : rows)
        std::printf("%-12s %8zu %8zu %14.6g %14.6g %18.1f\n", row.method.c_str(), row.atoms, row.runs,
                    row.mean_time_s, row.p95_time_s, row.mean_correlations);
    std::printf("wrote %s/bench.csv\n", opts.out_dir.c_str());
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& checkpoint, const std::string& data_file,
             const std::string& selector) {
    const ScenarioConfig cfg = load_config(opts);

    std::vector<ChannelSample> channels;
    if (data_file.ends_with(".csv")) {
        channels = load_csv_channels(data_file, cfg.system.n_subcarriers);
    } else {
        auto [header, samples] = load_dataset(data_file);
        if (header.n_subcarriers != cfg.system.n_subcarriers)
            throw config_error("dataset subcarrier count does not match the config");
        channels = std::move(samples);
    }
    if (channels.empty()) throw config_error("dataset holds no channels");

    Rng rng_noise = Rng(cfg.seed).derive(11);
    std::vector<NoisyObservation> obs;
    obs.reserve(channels.size());
    for (const ChannelSample& ch : channels) obs.push_back(add_noise(ch, cfg.snr_in_db, rng_noise));

    const ModelParams params = load_checkpoint(checkpoint, cfg.system);
    const std::vector<double> delays = build_delay_grid(cfg.system, cfg.n_atoms, cfg.oversampling);
    const Dictionary dict = render(params, cfg.system, delays);

    std::optional<HierarchicalSearcher> searcher;
    if (selector == "h2") searcher.emplace(dict, HierarchyConfig{2});
    else if (selector == "h3") searcher.emplace(dict, HierarchyConfig{3});
    else if (selector != "exhaustive") throw config_error("selector must be exhaustive, h2 or h3");

    double mean_corr = 0.0;
    const double value =
        test_nmse_db(dict, channels, obs, cfg.max_layers, searcher ? &*searcher : nullptr, &mean_corr);
    std::printf("channels=%zu snr_in_db=%g nmse_db=%.4f mean_correlations=%.1f\n", channels.size(), cfg.snr_in_db,
                value, mean_corr);
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<std::size_t>& widths, const std::string& out_file) {
    const ScenarioConfig cfg = load_config(opts);
    const SubcarrierGrid grid = build_nominal_grid(cfg.system);
    const AntennaGains gains = nominal_gains(cfg.system.n_subcarriers);
    const std::vector<double> delays = build_delay_grid(cfg.system, cfg.n_atoms, cfg.oversampling);
    const double dtau = delays[1] - delays[0];
    const double span = delays.back();

    std::vector<double> taus;
    for (double t = 0.0; t <= span; t += dtau / 4.0) taus.push_back(t);

    std::ofstream os(out_file);
    if (!os) throw io_error("cannot open sweep output file: " + out_file);
    os << "width_steps,width_s,tau_center_s,tau_s,abs_corr\n";
    for (std::size_t w : widths) {
        const MetaAtom meta = make_meta_atom(grid, span / 2.0, static_cast<double>(w) * dtau);
        const std::vector<double> response = meta_correlation_response(meta, grid, gains, taus);
        for (std::size_t i = 0; i < taus.size(); ++i) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", w, meta.width_s, meta.tau_center_s,
                          taus[i], response[i]);
            os << buf;
        }
    }
    std::printf("wrote %s (%zu widths x %zu delays)\n", out_file.c_str(), widths.size(), taus.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse-recovery OFDM channel estimation: training, baselines and benchmarks"};
    app.require_subcommand(1);
    app.fallthrough(true);  // global flags may follow the subcommand

    CommonOpts opts;
    app.add_option("--config", opts.config_path, "scenario config (json)");
    app.add_option("--out", opts.out_dir, "output directory");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "override the config seed");

    auto* train = app.add_subcommand("train", "run a training scenario and write results/history csv");

    std::size_t gen_count = 1000;
    std::string gen_out = "channels.chd1";
    auto* gen = app.add_subcommand("gen", "generate a channel dataset (CHD1)");
    gen->add_option("--count", gen_count, "number of channels");
    gen->add_option("--file", gen_out, "output dataset path");

    std::vector<std::size_t> bench_atoms{990, 5000, 50000};
    std::size_t bench_runs = 10000;
    auto* bench = app.add_subcommand("bench", "execution-time comparison of exhaustive vs hierarchical MP");
    bench->add_option("--atoms", bench_atoms, "dictionary sizes")->delimiter(',');
    bench->add_option("--runs", bench_runs, "timed runs per dictionary size");

    std::string eval_checkpoint, eval_data, eval_selector = "exhaustive";
    auto* eval = app.add_subcommand("eval", "evaluate a frozen checkpoint on a dataset");
    eval->add_option("--checkpoint", eval_checkpoint, "MPN1 checkpoint file")->required();
    eval->add_option("--data", eval_data, "CHD1 dataset or CSV file")->required();
    eval->add_option("--selector", eval_selector, "exhaustive | h2 | h3");

    std::vector<std::size_t> sweep_widths{10, 20, 40};
    std::string sweep_out = "sweep.csv";
    auto* sweep = app.add_subcommand("sweep", "dump meta-atom correlation responses over delay");
    sweep->add_option("--widths", sweep_widths, "window widths in delay-grid steps")->delimiter(',');
    sweep->add_option("--file", sweep_out, "output csv path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (seed_opt->count() > 0) opts.seed = seed_value;

    try {
        if (train->parsed()) return cmd_train(opts);
        if (gen->parsed()) return cmd_gen(opts, gen_count, gen_out);
        if (bench->parsed()) return cmd_bench(opts, bench_atoms, bench_runs);
        if (eval->parsed()) return cmd_eval(opts, eval_checkpoint, eval_data, eval_selector);
        if (sweep->parsed()) return cmd_sweep(opts, sweep_widths, sweep_out);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 1;
}
