#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chanest/experiments.hpp"

using namespace chanest;

namespace {

ScenarioConfig tiny_scenario() {
    ScenarioConfig cfg;
    cfg.system.n_subcarriers = 32;
    cfg.system.center_freq_hz = 3.4e9;
    cfg.system.bandwidth_hz = 50e6;
    cfg.impairments = {40.0, 0.0, 0.09};
    cfg.n_atoms = 64;
    cfg.n_train_channels = 100;
    cfg.n_test_channels = 50;
    cfg.eval_every = 5;
    cfg.adam.lr = 0.02;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("nmse definition and reporting floor") {
    cvec h = {cplx{1.0, 1.0}, cplx{-2.0, 0.5}};
    CHECK(nmse(h, h) == 0.0);
    CHECK(nmse_db_of_mean(nmse(h, h)) == -300.0);

    const cvec zeros(2, cplx{0.0, 0.0});
    CHECK(nmse(zeros, h) == doctest::Approx(1.0));
    CHECK(nmse_db_of_mean(1.0) == doctest::Approx(0.0));

    CHECK_THROWS_AS(nmse(h, zeros), numeric_error);

    // x = h + n has nmse around 1/snr
    SystemConfig cfg;
    cfg.n_subcarriers = 64;
    cfg.center_freq_hz = 3.4e9;
    cfg.bandwidth_hz = 50e6;
    const SubcarrierGrid grid = build_nominal_grid(cfg);
    const AntennaGains gains = nominal_gains(64);
    Rng rng(3);
    PathProfile profile;
    profile.tau_max_s = 1e-6;
    double acc = 0.0;
    for (int i = 0; i < 500; ++i) {
        const ChannelSample ch = generate_channel(grid, gains, 5, rng, profile);
        const NoisyObservation obs = add_noise(ch, 10.0, rng);
        acc += nmse(obs.x, ch.h);
    }
    CHECK(acc / 500.0 == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("method names round trip") {
    for (Method m : {Method::ls, Method::mp_nominal, Method::mp_real, Method::lra_mmse, Method::mpnet,
                     Method::cmpnet, Method::hc2_mpnet, Method::hc3_mpnet})
        CHECK(method_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(method_from_string("bogus"), config_error);
    CHECK(method_is_learned(Method::cmpnet));
    CHECK_FALSE(method_is_learned(Method::ls));
}

TEST_CASE("scenario config json round trip") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.methods = {Method::ls, Method::cmpnet};
    cfg.adam.delta_f_lr_scale = 5e-4;
    const std::string text = scenario_to_json_text(cfg);
    const ScenarioConfig back = scenario_from_json_text(text);
    CHECK(back.system.n_subcarriers == cfg.system.n_subcarriers);
    CHECK(back.impairments.sco_ppm == cfg.impairments.sco_ppm);
    CHECK(back.n_atoms == cfg.n_atoms);
    CHECK(back.adam.lr == cfg.adam.lr);
    CHECK(back.adam.delta_f_lr_scale == cfg.adam.delta_f_lr_scale);
    CHECK(back.methods == cfg.methods);
    CHECK(back.seed == cfg.seed);

    CHECK_THROWS_AS(scenario_from_json_text("{"), config_error);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"methods": ["bogus"]})"), config_error);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"train": {"batch_size": 0}})"), config_error);
    CHECK_THROWS_AS(scenario_from_json_file("no_such_config.json"), io_error);
}

TEST_CASE("identical seeds give identical scenario outputs") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.methods = {Method::ls, Method::mp_real, Method::cmpnet};

    const ScenarioOutput a = run_scenario(cfg);
    const ScenarioOutput b = run_scenario(cfg);
    REQUIRE(a.results.rows.size() == b.results.rows.size());
    for (std::size_t i = 0; i < a.results.rows.size(); ++i) {
        CHECK(a.results.rows[i].method == b.results.rows[i].method);
        CHECK(a.results.rows[i].channels_seen == b.results.rows[i].channels_seen);
        CHECK(a.results.rows[i].nmse_db == b.results.rows[i].nmse_db);  // bitwise
        CHECK(a.results.rows[i].mean_correlations == b.results.rows[i].mean_correlations);
    }
    REQUIRE(a.histories.size() == 1);
    CHECK(a.histories[0].second.batch_loss == b.histories[0].second.batch_loss);
}

TEST_CASE("the method list does not perturb the shared data streams") {
    ScenarioConfig small = tiny_scenario();
    small.methods = {Method::mp_real};
    ScenarioConfig large = tiny_scenario();
    large.methods = {Method::ls, Method::lra_mmse, Method::mp_real, Method::cmpnet};

    const ScenarioOutput a = run_scenario(small);
    const ScenarioOutput b = run_scenario(large);
    const auto find_row = [](const ScenarioOutput& out, const std::string& method) {
        for (const ResultRow& row : out.results.rows)
            if (row.method == method) return row.nmse_db;
        FAIL("missing row for a requested method");
        return 0.0;
    };
    CHECK(find_row(a, "mp_real") == find_row(b, "mp_real"));  // bitwise
}

TEST_CASE("every method appears at every checkpoint in the result table") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.methods = {Method::ls, Method::mp_nominal, Method::cmpnet};
    const ScenarioOutput out = run_scenario(cfg);

    // checkpoints: 0, 50, 100 channels (eval_every=5 batches of 10)
    std::size_t ls_rows = 0, net_rows = 0;
    for (const ResultRow& row : out.results.rows) {
        if (row.method == "ls") ++ls_rows;
        if (row.method == "cmpnet") ++net_rows;
    }
    CHECK(ls_rows == net_rows);
    CHECK(net_rows == 3);
}

TEST_CASE("zero-impairment training does not degrade the nominal dictionary") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.impairments = {0.0, 0.0, 0.0};
    cfg.n_train_channels = 200;
    cfg.adam.lr = 2e-3;  // nothing to learn; only the stochastic walk remains
    cfg.methods = {Method::mp_nominal, Method::cmpnet, Method::hc3_mpnet};
    const ScenarioOutput out = run_scenario(cfg);

    double nominal_db = 0.0;
    for (const auto& [name, value] : out.baseline_nmse_db)
        if (name == "mp_nominal") nominal_db = value;

    for (const auto& [name, history] : out.histories) {
        // the exhaustive variant starts exactly at the nominal dictionary;
        // hierarchical variants carry their selection offset from the start,
        // so each is held against its own initial value
        const double start = history.checkpoints.front().nmse_db;
        if (name == "cmpnet") CHECK(start == nominal_db);
        for (const TrainCheckpoint& cp : history.checkpoints) CHECK(cp.nmse_db < start + 0.5);
    }
}

TEST_CASE("csv writers emit the fixed headers") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.methods = {Method::ls, Method::cmpnet};
    const ScenarioOutput out = run_scenario(cfg);

    write_results_csv("tmp_results.csv", out.results);
    write_history_csv("tmp_history.csv", out);

    std::ifstream results("tmp_results.csv");
    std::string line;
    std::getline(results, line);
    CHECK(line == "method,channels_seen,nmse_db,mean_time_s,mean_correlations");
    std::size_t data_rows = 0;
    while (std::getline(results, line))
        if (!line.empty()) ++data_rows;
    CHECK(data_rows == out.results.rows.size());

    std::ifstream history("tmp_history.csv");
    std::getline(history, line);
    CHECK(line == "method,channels_seen,batch_loss,test_nmse_db");

    std::remove("tmp_results.csv");
    std::remove("tmp_history.csv");
}

TEST_CASE("results nmse values are reproducible from history checkpoints") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.methods = {Method::cmpnet};
    const ScenarioOutput out = run_scenario(cfg);
    REQUIRE(out.histories.size() == 1);
    const TrainHistory& history = out.histories[0].second;
    for (const ResultRow& row : out.results.rows) {
        const auto it = std::find_if(history.checkpoints.begin(), history.checkpoints.end(),
                                     [&](const TrainCheckpoint& cp) { return cp.channels_seen == row.channels_seen; });
        REQUIRE(it != history.checkpoints.end());
        CHECK(it->nmse_db == row.nmse_db);
    }
}

TEST_CASE("timing bench reports all arms with matched observations") {
    SystemConfig cfg;
    cfg.n_subcarriers = 32;
    cfg.center_freq_hz = 3.4e9;
    cfg.bandwidth_hz = 50e6;

    const std::vector<BenchSpec> specs = {{64, 30}, {128, 30}};
    const auto rows = timing_bench(cfg, specs, 10.0, 8, 3);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 0; i < rows.size(); i += 3) {
        CHECK(rows[i].method == "exhaustive");
        CHECK(rows[i + 1].method == "h2");
        CHECK(rows[i + 2].method == "h3");
        // identical channels, so the layer counts are comparable and the
        // correlation economy must show up
        CHECK(rows[i + 1].mean_correlations < rows[i].mean_correlations);
        CHECK(rows[i + 2].mean_correlations < rows[i].mean_correlations);
        CHECK(rows[i].mean_correlations == doctest::Approx(rows[i].atoms * rows[i].mean_iterations));
    }

    write_bench_csv("tmp_bench.csv", rows);
    std::ifstream is("tmp_bench.csv");
    std::string line;
    std::getline(is, line);
    CHECK(line == "method,atoms,runs,mean_time_s,p50_time_s,p95_time_s,mean_correlations,mean_iterations");
    std::remove("tmp_bench.csv");

    CHECK_THROWS_AS(timing_bench(cfg, std::vector<BenchSpec>{{1, 5}}, 10.0, 8, 3), config_error);
}
