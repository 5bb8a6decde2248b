#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "chanest/baselines.hpp"
#include "chanest/network.hpp"
#include "chanest/pursuit.hpp"
#include "chanest/signal.hpp"

namespace chanest {

// Scenario orchestration: one fixed impairment draw per scenario, identical
// train/test data for every method, NMSE checkpoints, timing benchmarks.

enum class Method { ls, mp_nominal, mp_real, lra_mmse, mpnet, cmpnet, hc2_mpnet, hc3_mpnet };

std::string to_string(Method m);
Method method_from_string(const std::string& name);
bool method_is_learned(Method m);

struct ScenarioConfig {
    SystemConfig system;
    ImpairmentSpec impairments;
    double snr_in_db = 10.0;

    std::size_t n_atoms = 990;
    std::size_t oversampling = 4;

    std::size_t max_paths = 10;
    double decay_db = 20.0;
    double per_path_decay_db = 0.0;
    double delay_fill = 0.8;
    bool on_grid = false;

    std::size_t n_train_channels = 5000;
    std::size_t batch_size = 10;
    std::size_t n_test_channels = 2000;
    std::size_t eval_every = 20;  // batches
    std::size_t max_layers = 10;
    AdamConfig adam;

    double lra_delay_fraction = 0.8;  // delay spread as a fraction of the grid span
    std::size_t lra_rank = 0;         // 0 = auto

    std::vector<Method> methods{Method::ls,   Method::mp_nominal, Method::mp_real,   Method::lra_mmse,
                                Method::mpnet, Method::cmpnet,     Method::hc2_mpnet, Method::hc3_mpnet};
    std::uint64_t seed = 0;

    void validate() const;
};

ScenarioConfig scenario_from_json_file(const std::string& path);
ScenarioConfig scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioConfig& cfg);

struct ResultRow {
    std::string method;
    std::size_t channels_seen = 0;
    double nmse_db = 0.0;
    double mean_time_s = 0.0;
    double mean_correlations = 0.0;
};

struct ResultTable {
    std::vector<ResultRow> rows;
};

struct ScenarioOutput {
    ResultTable results;
    std::vector<std::pair<std::string, TrainHistory>> histories;      // learned methods
    std::vector<std::pair<std::string, double>> baseline_nmse_db;     // frozen methods
    std::vector<std::pair<std::string, ModelParams>> final_params;    // learned methods
};

ScenarioOutput run_scenario(const ScenarioConfig& cfg);

// per-sample squared error ratio ||h_hat - h||^2 / ||h||^2
double nmse(std::span<const cplx> h_hat, std::span<const cplx> h);
// mean linear NMSE in dB, floored at -300 dB
double nmse_db_of_mean(double mean_linear);

// Estimator evaluated over a test set; returns the estimate and may report a
// correlation count. The parallel variant fills per-sample slots and reduces
// serially, so it matches the serial reference bit for bit.
using Estimator = std::function<cvec(const NoisyObservation& obs, double* correlations)>;

struct EvalOutcome {
    double nmse_db = 0.0;
    double mean_time_s = 0.0;
    double mean_correlations = 0.0;
};

EvalOutcome evaluate_estimator_serial(const Estimator& est, std::span<const ChannelSample> channels,
                                      std::span<const NoisyObservation> obs);
EvalOutcome evaluate_estimator(const Estimator& est, std::span<const ChannelSample> channels,
                               std::span<const NoisyObservation> obs);

struct BenchRow {
    std::string method;  // exhaustive | h2 | h3
    std::size_t atoms = 0;
    std::size_t runs = 0;
    double mean_time_s = 0.0;
    double p50_time_s = 0.0;
    double p95_time_s = 0.0;
    double mean_correlations = 0.0;
    double mean_iterations = 0.0;
};

struct BenchSpec {
    std::size_t atoms = 990;
    std::size_t runs = 10000;
};

// Single-threaded wall-clock comparison of exhaustive vs hierarchical MP over
// random single-draw channels; 100 warm-up runs are discarded. All three
// methods see identical observations. Dictionaries cover a fixed delay span
// regardless of the atom count.
std::vector<BenchRow> timing_bench(const SystemConfig& cfg, std::span<const BenchSpec> specs, double snr_in_db,
                                   std::size_t max_iter, std::uint64_t seed);

void write_results_csv(const std::string& path, const ResultTable& table);
void write_history_csv(const std::string& path, const ScenarioOutput& output);
void write_bench_csv(const std::string& path, std::span<const BenchRow> rows);

}  // namespace chanest
