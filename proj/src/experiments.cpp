#include "chanest/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <omp.h>

#include <json.hpp>

namespace chanest {

namespace {

using json = nlohmann::json;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::ls: return "ls";
        case Method::mp_nominal: return "mp_nominal";
        case Method::mp_real: return "mp_real";
        case Method::lra_mmse: return "lra_mmse";
        case Method::mpnet: return "mpnet";
        case Method::cmpnet: return "cmpnet";
        case Method::hc2_mpnet: return "hc2_mpnet";
        case Method::hc3_mpnet: return "hc3_mpnet";
    }
    throw config_error("unknown method enum value");
}

Method method_from_string(const std::string& name) {
    for (Method m : {Method::ls, Method::mp_nominal, Method::mp_real, Method::lra_mmse, Method::mpnet,
                     Method::cmpnet, Method::hc2_mpnet, Method::hc3_mpnet})
        if (to_string(m) == name) return m;
    throw config_error("unknown method name: " + name);
}

bool method_is_learned(Method m) {
    return m == Method::mpnet || m == Method::cmpnet || m == Method::hc2_mpnet || m == Method::hc3_mpnet;
}

void ScenarioConfig::validate() const {
    system.validate();
    impairments.validate();
    if (!std::isfinite(snr_in_db)) throw config_error("snr_in_db must be finite");
    if (n_atoms < 2) throw config_error("n_atoms must be >= 2");
    if (oversampling < 1) throw config_error("oversampling must be >= 1");
    if (max_paths < 1) throw config_error("max_paths must be >= 1");
    if (batch_size < 1) throw config_error("batch_size must be >= 1");
    if (eval_every < 1) throw config_error("eval_every must be >= 1");
    if (max_layers < 1) throw config_error("max_layers must be >= 1");
    if (n_test_channels < 1) throw config_error("n_test_channels must be >= 1");
    if (methods.empty()) throw config_error("method list must not be empty");
    if (!(delay_fill > 0.0 && delay_fill <= 1.0)) throw config_error("delay_fill must be in (0, 1]");
    if (!(lra_delay_fraction > 0.0 && lra_delay_fraction <= 1.0))
        throw config_error("lra_delay_fraction must be in (0, 1]");
}

namespace {

ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig cfg;
    try {
        if (j.contains("system")) {
            const auto& s = j.at("system");
            cfg.system.n_subcarriers = s.value("n_subcarriers", cfg.system.n_subcarriers);
            cfg.system.center_freq_hz = s.value("center_freq_hz", cfg.system.center_freq_hz);
            cfg.system.bandwidth_hz = s.value("bandwidth_hz", cfg.system.bandwidth_hz);
        }
        if (j.contains("impairments")) {
            const auto& s = j.at("impairments");
            cfg.impairments.sco_ppm = s.value("sco_ppm", cfg.impairments.sco_ppm);
            cfg.impairments.cfo_hz = s.value("cfo_hz", cfg.impairments.cfo_hz);
            cfg.impairments.gain_noise_var = s.value("gain_noise_var", cfg.impairments.gain_noise_var);
        }
        if (j.contains("dictionary")) {
            const auto& s = j.at("dictionary");
            cfg.n_atoms = s.value("n_atoms", cfg.n_atoms);
            cfg.oversampling = s.value("oversampling", cfg.oversampling);
        }
        if (j.contains("channels")) {
            const auto& s = j.at("channels");
            cfg.max_paths = s.value("max_paths", cfg.max_paths);
            cfg.decay_db = s.value("decay_db", cfg.decay_db);
            cfg.per_path_decay_db = s.value("per_path_decay_db", cfg.per_path_decay_db);
            cfg.delay_fill = s.value("delay_fill", cfg.delay_fill);
            cfg.on_grid = s.value("on_grid", cfg.on_grid);
        }
        if (j.contains("train")) {
            const auto& s = j.at("train");
            cfg.n_train_channels = s.value("n_train_channels", cfg.n_train_channels);
            cfg.batch_size = s.value("batch_size", cfg.batch_size);
            cfg.eval_every = s.value("eval_every", cfg.eval_every);
            cfg.max_layers = s.value("max_layers", cfg.max_layers);
            if (s.contains("adam")) {
                const auto& a = s.at("adam");
                cfg.adam.lr = a.value("lr", cfg.adam.lr);
                cfg.adam.beta1 = a.value("beta1", cfg.adam.beta1);
                cfg.adam.beta2 = a.value("beta2", cfg.adam.beta2);
                cfg.adam.eps = a.value("eps", cfg.adam.eps);
                cfg.adam.delta_f_lr_scale = a.value("delta_f_lr_scale", cfg.adam.delta_f_lr_scale);
            }
        }
        if (j.contains("lra")) {
            const auto& s = j.at("lra");
            cfg.lra_delay_fraction = s.value("delay_spread_fraction", cfg.lra_delay_fraction);
            cfg.lra_rank = s.value("rank", cfg.lra_rank);
        }
        cfg.snr_in_db = j.value("snr_in_db", cfg.snr_in_db);
        cfg.n_test_channels = j.value("n_test_channels", cfg.n_test_channels);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("methods")) {
            cfg.methods.clear();
            for (const auto& name : j.at("methods")) cfg.methods.push_back(method_from_string(name.get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

}  // namespace

ScenarioConfig scenario_from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw config_error("config " + path + " is not valid json: " + e.what());
    }
    return scenario_from_json(j);
}

ScenarioConfig scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config is not valid json: ") + e.what());
    }
    return scenario_from_json(j);
}

std::string scenario_to_json_text(const ScenarioConfig& cfg) {
    json j;
    j["system"] = {{"n_subcarriers", cfg.system.n_subcarriers},
                   {"center_freq_hz", cfg.system.center_freq_hz},
                   {"bandwidth_hz", cfg.system.bandwidth_hz}};
    j["impairments"] = {{"sco_ppm", cfg.impairments.sco_ppm},
                        {"cfo_hz", cfg.impairments.cfo_hz},
                        {"gain_noise_var", cfg.impairments.gain_noise_var}};
    j["dictionary"] = {{"n_atoms", cfg.n_atoms}, {"oversampling", cfg.oversampling}};
    j["channels"] = {{"max_paths", cfg.max_paths},
                     {"decay_db", cfg.decay_db},
                     {"per_path_decay_db", cfg.per_path_decay_db},
                     {"delay_fill", cfg.delay_fill},
                     {"on_grid", cfg.on_grid}};
    j["train"] = {{"n_train_channels", cfg.n_train_channels},
                  {"batch_size", cfg.batch_size},
                  {"eval_every", cfg.eval_every},
                  {"max_layers", cfg.max_layers},
                  {"adam",
                   {{"lr", cfg.adam.lr},
                    {"beta1", cfg.adam.beta1},
                    {"beta2", cfg.adam.beta2},
                    {"eps", cfg.adam.eps},
                    {"delta_f_lr_scale", cfg.adam.delta_f_lr_scale}}}};
    j["lra"] = {{"delay_spread_fraction", cfg.lra_delay_fraction}, {"rank", cfg.lra_rank}};
    j["snr_in_db"] = cfg.snr_in_db;
    j["n_test_channels"] = cfg.n_test_channels;
    j["seed"] = cfg.seed;
    std::vector<std::string> names;
    for (Method m : cfg.methods) names.push_back(to_string(m));
    j["methods"] = names;
    return j.dump(2);
}

double nmse(std::span<const cplx> h_hat, std::span<const cplx> h) {
    const double h2 = norm2(h);
    if (!(h2 > 0.0)) throw numeric_error("nmse undefined for a zero channel");
    double err2 = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) err2 += std::norm(h_hat[k] - h[k]);
    return err2 / h2;
}

double nmse_db_of_mean(double mean_linear) {
    return mean_linear > 1e-30 ? 10.0 * std::log10(mean_linear) : -300.0;
}

namespace {

EvalOutcome evaluate_impl(const Estimator& est, std::span<const ChannelSample> channels,
                          std::span<const NoisyObservation> obs, bool parallel) {
    if (channels.size() != obs.size() || channels.empty())
        throw config_error("evaluation needs matching, nonempty channel/observation sets");
    std::vector<double> nmse_slot(channels.size());
    std::vector<double> corr_slot(channels.size(), 0.0);
    std::vector<double> time_slot(channels.size(), 0.0);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(channels.size()); ++i) {
        const std::size_t idx = static_cast<std::size_t>(i);
        const auto t0 = clock_type::now();
        double corr = 0.0;
        const cvec h_hat = est(obs[idx], &corr);
        time_slot[idx] = seconds_since(t0);
        corr_slot[idx] = corr;
        nmse_slot[idx] = nmse(h_hat, channels[idx].h);
    }

    EvalOutcome out;
    double mean_linear = 0.0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        mean_linear += nmse_slot[i];
        out.mean_correlations += corr_slot[i];
        out.mean_time_s += time_slot[i];
    }
    const double inv = 1.0 / static_cast<double>(channels.size());
    mean_linear *= inv;
    out.mean_correlations *= inv;
    out.mean_time_s *= inv;
    out.nmse_db = nmse_db_of_mean(mean_linear);
    return out;
}

}  // namespace

EvalOutcome evaluate_estimator_serial(const Estimator& est, std::span<const ChannelSample> channels,
                                      std::span<const NoisyObservation> obs) {
    return evaluate_impl(est, channels, obs, false);
}

EvalOutcome evaluate_estimator(const Estimator& est, std::span<const ChannelSample> channels,
                               std::span<const NoisyObservation> obs) {
    return evaluate_impl(est, channels, obs, true);
}

namespace {

struct ScenarioData {
    SubcarrierGrid nominal_grid, real_grid;
    AntennaGains nominal_gains_v, real_gains_v;
    std::vector<double> delays;
    Dictionary nominal_dict, real_dict;
    std::vector<ChannelSample> train_channels, test_channels;
    std::vector<NoisyObservation> train_obs, test_obs;
};

ScenarioData make_scenario_data(const ScenarioConfig& cfg) {
    ScenarioData d;
    const Rng base(cfg.seed);
    Rng rng_gains = base.derive(1);
    Rng rng_train = base.derive(2);
    Rng rng_train_noise = base.derive(3);
    Rng rng_test = base.derive(4);
    Rng rng_test_noise = base.derive(5);

    d.nominal_grid = build_nominal_grid(cfg.system);
    d.real_grid = apply_sco(d.nominal_grid, cfg.system, cfg.impairments.sco_ppm);
    if (cfg.impairments.cfo_hz != 0.0) d.real_grid = apply_cfo(d.real_grid, cfg.impairments.cfo_hz);
    d.nominal_gains_v = nominal_gains(cfg.system.n_subcarriers);
    d.real_gains_v = sample_gain_noise(d.nominal_gains_v, cfg.impairments.gain_noise_var, rng_gains);

    d.delays = build_delay_grid(cfg.system, cfg.n_atoms, cfg.oversampling);
    d.nominal_dict = build_dictionary(d.nominal_grid, d.nominal_gains_v, d.delays);
    d.real_dict = build_dictionary(d.real_grid, d.real_gains_v, d.delays);

    PathProfile profile;
    profile.tau_max_s = d.delays.back();
    profile.decay_db = cfg.decay_db;
    profile.per_path_decay_db = cfg.per_path_decay_db;
    profile.fill = cfg.delay_fill;
    profile.on_grid = cfg.on_grid;
    profile.grid_step_s = d.delays[1] - d.delays[0];
    profile.max_paths = cfg.max_paths;

    auto draw_set = [&](std::size_t count, Rng& rng_ch, Rng& rng_noise, std::vector<ChannelSample>& channels,
                        std::vector<NoisyObservation>& observations) {
        channels.reserve(count);
        observations.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t n_paths = 1 + static_cast<std::size_t>(rng_ch.uniform01() * static_cast<double>(cfg.max_paths));
            channels.push_back(
                generate_channel(d.real_grid, d.real_gains_v, std::min(n_paths, cfg.max_paths), rng_ch, profile));
            observations.push_back(add_noise(channels.back(), cfg.snr_in_db, rng_noise));
        }
    };
    draw_set(cfg.n_train_channels, rng_train, rng_train_noise, d.train_channels, d.train_obs);
    draw_set(cfg.n_test_channels, rng_test, rng_test_noise, d.test_channels, d.test_obs);
    return d;
}

Estimator dictionary_estimator(const Dictionary& dict, std::size_t max_layers,
                               const HierarchicalSearcher* searcher) {
    return [&dict, max_layers, searcher](const NoisyObservation& obs, double* correlations) {
        const ForwardTrace trace = forward_on(dict, obs.x, obs.noise_var, max_layers, searcher);
        if (correlations != nullptr) *correlations = static_cast<double>(trace.n_correlations);
        return h_hat_from_trace(obs.x, trace);
    };
}

}  // namespace

ScenarioOutput run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const ScenarioData data = make_scenario_data(cfg);
    ScenarioOutput out;

    struct MethodOutcome {
        Method method;
        std::vector<TrainCheckpoint> checkpoints;  // single entry for frozen methods
        EvalOutcome final_eval;
    };
    std::vector<MethodOutcome> outcomes;

    LraMmseModel lra_model;
    bool lra_built = false;

    for (Method m : cfg.methods) {
        MethodOutcome outcome;
        outcome.method = m;
        switch (m) {
            case Method::ls: {
                const Estimator est = [](const NoisyObservation& obs, double*) { return obs.x; };
                outcome.final_eval = evaluate_estimator(est, data.test_channels, data.test_obs);
                outcome.checkpoints.push_back({0, outcome.final_eval.nmse_db});
                break;
            }
            case Method::mp_nominal:
            case Method::mp_real: {
                const Dictionary& dict = m == Method::mp_nominal ? data.nominal_dict : data.real_dict;
                outcome.final_eval =
                    evaluate_estimator(dictionary_estimator(dict, cfg.max_layers, nullptr), data.test_channels,
                                       data.test_obs);
                outcome.checkpoints.push_back({0, outcome.final_eval.nmse_db});
                break;
            }
            case Method::lra_mmse: {
                if (!lra_built) {
                    const double spread = cfg.lra_delay_fraction * data.delays.back();
                    // built once from the eigenbasis; re-weighted per observation's sigma^2
                    lra_model = build_lra_mmse(cfg.system, 0.0, spread, cfg.lra_rank);
                    lra_built = true;
                }
                const Estimator est = [&lra_model](const NoisyObservation& obs, double*) {
                    return lra_mmse_estimate_adaptive(lra_model, obs);
                };
                outcome.final_eval = evaluate_estimator(est, data.test_channels, data.test_obs);
                outcome.checkpoints.push_back({0, outcome.final_eval.nmse_db});
                break;
            }
            case Method::mpnet:
            case Method::cmpnet:
            case Method::hc2_mpnet:
            case Method::hc3_mpnet: {
                ModelParams params;
                TrainConfig tc;
                tc.batch_size = cfg.batch_size;
                tc.eval_every = cfg.eval_every;
                tc.max_layers = cfg.max_layers;
                tc.adam = cfg.adam;
                if (m == Method::mpnet) {
                    UnconstrainedParams u;
                    u.n_rows = cfg.system.n_subcarriers;
                    u.n_atoms = cfg.n_atoms;
                    u.weights = data.nominal_dict.atoms;  // initialized with the nominal dictionary
                    params = std::move(u);
                } else {
                    ConstrainedParams c;
                    c.gains = data.nominal_gains_v.gains;
                    c.delta_f_hz = 0.0;
                    params = std::move(c);
                    if (m == Method::hc2_mpnet) tc.selector = {true, 2};
                    if (m == Method::hc3_mpnet) tc.selector = {true, 3};
                }

                TrainHistory history = train_online(params, cfg.system, data.delays, data.train_obs,
                                                    data.test_channels, data.test_obs, tc);

                // final timed evaluation on the trained dictionary
                const Dictionary dict = render(params, cfg.system, data.delays);
                std::optional<HierarchicalSearcher> searcher;
                if (tc.selector.hierarchical) searcher.emplace(dict, HierarchyConfig{tc.selector.branching});
                outcome.final_eval = evaluate_estimator(
                    dictionary_estimator(dict, cfg.max_layers, searcher ? &*searcher : nullptr), data.test_channels,
                    data.test_obs);

                outcome.checkpoints = history.checkpoints;
                out.histories.emplace_back(to_string(m), std::move(history));
                out.final_params.emplace_back(to_string(m), std::move(params));
                break;
            }
        }
        if (!method_is_learned(m)) out.baseline_nmse_db.emplace_back(to_string(m), outcome.final_eval.nmse_db);
        outcomes.push_back(std::move(outcome));
    }

    // one row per method per checkpoint; frozen methods repeat their value so
    // every method appears at every checkpoint
    std::vector<std::size_t> checkpoint_channels;
    for (const auto& o : outcomes)
        if (method_is_learned(o.method))
            for (const auto& cp : o.checkpoints) checkpoint_channels.push_back(cp.channels_seen);
    std::sort(checkpoint_channels.begin(), checkpoint_channels.end());
    checkpoint_channels.erase(std::unique(checkpoint_channels.begin(), checkpoint_channels.end()),
                              checkpoint_channels.end());
    if (checkpoint_channels.empty()) checkpoint_channels.push_back(0);

    for (const auto& o : outcomes) {
        for (std::size_t seen : checkpoint_channels) {
            ResultRow row;
            row.method = to_string(o.method);
            row.channels_seen = seen;
            if (method_is_learned(o.method)) {
                const auto it = std::find_if(o.checkpoints.begin(), o.checkpoints.end(),
                                             [seen](const TrainCheckpoint& cp) { return cp.channels_seen == seen; });
                if (it == o.checkpoints.end()) continue;  // method trained with a different cadence
                row.nmse_db = it->nmse_db;
            } else {
                row.nmse_db = o.checkpoints.front().nmse_db;
            }
            row.mean_time_s = o.final_eval.mean_time_s;
            row.mean_correlations = o.final_eval.mean_correlations;
            out.results.rows.push_back(std::move(row));
        }
    }
    return out;
}

std::vector<BenchRow> timing_bench(const SystemConfig& cfg, std::span<const BenchSpec> specs, double snr_in_db,
                                   std::size_t max_iter, std::uint64_t seed) {
    for (const BenchSpec& spec : specs)
        if (spec.atoms < 2) throw config_error("timing bench needs atom counts >= 2");

    const Rng base(seed);
    const SubcarrierGrid grid = build_nominal_grid(cfg);
    const AntennaGains gains = nominal_gains(cfg.n_subcarriers);

    // fixed delay span shared by all atom counts so the same channels apply
    const std::vector<double> ref_delays = build_delay_grid(cfg, 990, 4);
    const double tau_span = ref_delays.back();

    std::vector<BenchRow> rows;
    for (std::size_t spec_idx = 0; spec_idx < specs.size(); ++spec_idx) {
        const BenchSpec& spec = specs[spec_idx];
        std::vector<double> delays(spec.atoms);
        for (std::size_t a = 0; a < spec.atoms; ++a)
            delays[a] = tau_span * static_cast<double>(a) / static_cast<double>(spec.atoms - 1);
        const Dictionary dict = build_dictionary(grid, gains, delays);

        PathProfile profile;
        profile.tau_max_s = tau_span;
        profile.fill = 0.8;
        profile.max_paths = 10;

        const std::size_t warmup = 100;
        const std::size_t total = spec.runs + warmup;
        Rng rng_ch = base.derive(1000 + spec_idx);
        Rng rng_noise = base.derive(2000 + spec_idx);
        std::vector<NoisyObservation> observations;
        observations.reserve(total);
        for (std::size_t i = 0; i < total; ++i) {
            const std::size_t n_paths = 1 + static_cast<std::size_t>(rng_ch.uniform01() * 10.0);
            const ChannelSample ch = generate_channel(grid, gains, std::min<std::size_t>(n_paths, 10), rng_ch, profile);
            observations.push_back(add_noise(ch, snr_in_db, rng_noise));
        }

        struct Arm {
            std::string name;
            std::optional<HierarchicalSearcher> searcher;
        };
        std::vector<Arm> arms;
        arms.push_back({"exhaustive", std::nullopt});
        arms.push_back({"h2", std::nullopt});
        arms.back().searcher.emplace(dict, HierarchyConfig{2});
        arms.push_back({"h3", std::nullopt});
        arms.back().searcher.emplace(dict, HierarchyConfig{3});

        for (Arm& arm : arms) {
            const HierarchicalSearcher* hs = arm.searcher ? &*arm.searcher : nullptr;
            std::vector<double> times;
            times.reserve(spec.runs);
            double corr_sum = 0.0, iter_sum = 0.0;
            for (std::size_t i = 0; i < total; ++i) {
                const auto& obs = observations[i];
                const auto t0 = clock_type::now();
                const ForwardTrace trace = forward_on(dict, obs.x, obs.noise_var, max_iter, hs);
                const double dt = seconds_since(t0);
                if (i >= warmup) {
                    times.push_back(dt);
                    corr_sum += static_cast<double>(trace.n_correlations);
                    iter_sum += static_cast<double>(trace.layers);
                }
            }
            BenchRow row;
            row.method = arm.name;
            row.atoms = spec.atoms;
            row.runs = spec.runs;
            double sum = 0.0;
            for (double t : times) sum += t;
            row.mean_time_s = sum / static_cast<double>(times.size());
            std::sort(times.begin(), times.end());
            row.p50_time_s = times[times.size() / 2];
            row.p95_time_s = times[std::min(times.size() - 1, times.size() * 95 / 100)];
            row.mean_correlations = corr_sum / static_cast<double>(spec.runs);
            row.mean_iterations = iter_sum / static_cast<double>(spec.runs);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_results_csv(const std::string& path, const ResultTable& table) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open results file for writing: " + path);
    os << "method,channels_seen,nmse_db,mean_time_s,mean_correlations\n";
    for (const ResultRow& row : table.rows)
        os << row.method << ',' << row.channels_seen << ',' << fmt_double(row.nmse_db) << ','
           << fmt_double(row.mean_time_s) << ',' << fmt_double(row.mean_correlations) << '\n';
    if (!os) throw io_error("failed while writing " + path);
}

void write_history_csv(const std::string& path, const ScenarioOutput& output) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open history file for writing: " + path);
    os << "method,channels_seen,batch_loss,test_nmse_db\n";
    for (const auto& [name, value] : output.baseline_nmse_db) os << name << ",0,," << fmt_double(value) << '\n';
    for (const auto& [name, history] : output.histories) {
        for (std::size_t b = 0; b < history.batch_loss.size(); ++b)
            os << name << ',' << history.batch_channels[b] << ',' << fmt_double(history.batch_loss[b]) << ",\n";
        for (const TrainCheckpoint& cp : history.checkpoints)
            os << name << ',' << cp.channels_seen << ",," << fmt_double(cp.nmse_db) << '\n';
    }
    if (!os) throw io_error("failed while writing " + path);
}

void write_bench_csv(const std::string& path, std::span<const BenchRow> rows) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open bench file for writing: " + path);
    os << "method,atoms,runs,mean_time_s,p50_time_s,p95_time_s,mean_correlations,mean_iterations\n";
    for (const BenchRow& row : rows)
        os << row.method << ',' << row.atoms << ',' << row.runs << ',' << fmt_double(row.mean_time_s) << ','
           << fmt_double(row.p50_time_s) << ',' << fmt_double(row.p95_time_s) << ','
           << fmt_double(row.mean_correlations) << ',' << fmt_double(row.mean_iterations) << '\n';
    if (!os) throw io_error("failed while writing " + path);
}

}  // namespace chanest
