// Compares the serial reference kernels against their OpenMP versions:
// test-set evaluation and batch gradients. The two must agree bit for bit;
// this tool reports the wall-clock difference.

#include <chrono>
#include <cstdio>

#include <omp.h>

#include "chanest/experiments.hpp"
#include "chanest/network.hpp"

using namespace chanest;

namespace {

double wall(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n_channels = 512;
    std::size_t batch_size = 64;
    if (argc > 1) n_channels = static_cast<std::size_t>(std::atoll(argv[1]));
    if (argc > 2) batch_size = static_cast<std::size_t>(std::atoll(argv[2]));

    ScenarioConfig cfg;
    cfg.impairments.sco_ppm = 40.0;
    cfg.impairments.gain_noise_var = 0.09;
    cfg.seed = 42;

    const Rng base(cfg.seed);
    Rng rng_gains = base.derive(1);
    Rng rng_ch = base.derive(2);
    Rng rng_noise = base.derive(3);

    const SubcarrierGrid nominal = build_nominal_grid(cfg.system);
    const SubcarrierGrid real_grid = apply_sco(nominal, cfg.system, cfg.impairments.sco_ppm);
    const AntennaGains real_gains =
        sample_gain_noise(nominal_gains(cfg.system.n_subcarriers), cfg.impairments.gain_noise_var, rng_gains);
    const std::vector<double> delays = build_delay_grid(cfg.system, cfg.n_atoms, cfg.oversampling);
    const Dictionary real_dict = build_dictionary(real_grid, real_gains, delays);

    PathProfile profile;
    profile.tau_max_s = delays.back();
    profile.grid_step_s = delays[1] - delays[0];

    std::vector<ChannelSample> channels;
    std::vector<NoisyObservation> obs;
    for (std::size_t i = 0; i < n_channels; ++i) {
        const std::size_t n_paths = 1 + static_cast<std::size_t>(rng_ch.uniform01() * 10.0);
        channels.push_back(generate_channel(real_grid, real_gains, std::min<std::size_t>(n_paths, 10), rng_ch, profile));
        obs.push_back(add_noise(channels.back(), cfg.snr_in_db, rng_noise));
    }

    std::printf("threads available: %d\n", omp_get_max_threads());
    std::printf("%-28s %10s %10s %8s\n", "kernel", "serial_s", "openmp_s", "speedup");

    const Estimator est = [&](const NoisyObservation& o, double* corr) {
        const ForwardTrace trace = forward_on(real_dict, o.x, o.noise_var, cfg.max_layers);
        if (corr != nullptr) *corr = static_cast<double>(trace.n_correlations);
        return h_hat_from_trace(o.x, trace);
    };

    EvalOutcome serial_eval, parallel_eval;
    const double t_eval_serial = wall([&] { serial_eval = evaluate_estimator_serial(est, channels, obs); });
    const double t_eval_parallel = wall([&] { parallel_eval = evaluate_estimator(est, channels, obs); });
    std::printf("%-28s %10.3f %10.3f %7.2fx  (nmse match: %s)\n", "test-set evaluation", t_eval_serial,
                t_eval_parallel, t_eval_serial / t_eval_parallel,
                serial_eval.nmse_db == parallel_eval.nmse_db ? "yes" : "NO");

    ModelParams params = ConstrainedParams{nominal_gains(cfg.system.n_subcarriers).gains, 0.0};
    std::span<const NoisyObservation> batch{obs.data(), std::min(batch_size, obs.size())};
    BatchGrad g_serial, g_parallel;
    const double t_grad_serial =
        wall([&] { g_serial = batch_gradient_serial(params, cfg.system, delays, batch, cfg.max_layers); });
    const double t_grad_parallel =
        wall([&] { g_parallel = batch_gradient(params, cfg.system, delays, batch, cfg.max_layers); });
    std::printf("%-28s %10.3f %10.3f %7.2fx  (grad match: %s)\n", "batch gradient", t_grad_serial, t_grad_parallel,
                t_grad_serial / t_grad_parallel, g_serial.grad == g_parallel.grad ? "yes" : "NO");
    return 0;
}
