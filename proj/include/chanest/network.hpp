#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chanest/pursuit.hpp"
#include "chanest/signal.hpp"
#include "chanest/types.hpp"

namespace chanest {

// Unfolded matching-pursuit network. The forward pass is the MP loop run
// against a dictionary rendered from learnable parameters; the backward pass
// differentiates the final residual energy through the executed layers with
// atom selections and layer count held fixed.

// 2N+1 learnable scalars: per-subcarrier complex gains plus one frequency
// step common to all atoms. The flattened view stores the step in units of
// the subcarrier spacing.
struct ConstrainedParams {
    cvec gains;
    double delta_f_hz = 0.0;
};

// 2NA learnable scalars: the full atom matrix, column-major.
struct UnconstrainedParams {
    std::size_t n_rows = 0;
    std::size_t n_atoms = 0;
    cvec weights;
};

using ModelParams = std::variant<ConstrainedParams, UnconstrainedParams>;

std::size_t count_parameters(const ConstrainedParams& p);
std::size_t count_parameters(const UnconstrainedParams& p);
std::size_t count_parameters(const ModelParams& p);

std::vector<double> flatten(const ConstrainedParams& p, double subcarrier_spacing_hz);
void unflatten(std::span<const double> flat, double subcarrier_spacing_hz, ConstrainedParams& p);
std::vector<double> flatten(const UnconstrainedParams& p);
void unflatten(std::span<const double> flat, UnconstrainedParams& p);

std::uint64_t params_fingerprint(const ConstrainedParams& p);
std::uint64_t params_fingerprint(const UnconstrainedParams& p);
std::uint64_t params_fingerprint(const ModelParams& p);

// atom (k, a) = g_k * exp(-j 2 pi (f~_k + i_k * delta_f) * tau_a), columns
// unit-normalized; the normalization is part of the differentiable graph
Dictionary render_constrained(const ConstrainedParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s);
Dictionary render_unconstrained(const UnconstrainedParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s);
Dictionary render(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s);

// keeps the single entry of greatest modulus (ties -> lowest index)
cvec ht1(const cvec& v);

struct SelectorSpec {
    bool hierarchical = false;
    std::size_t branching = 3;
};

struct ForwardTrace {
    double input_norm = 0.0;
    cvec residual;  // final residual of the unit-norm input
    std::vector<std::size_t> selected;
    cvec coefficients;
    std::size_t layers = 0;
    bool truncated = false;
    std::size_t n_correlations = 0;
    std::uint64_t fingerprint = 0;
};

// Forward pass against an already-rendered dictionary; shares its inner loop
// with mp_denoise, so the two produce identical selections and arithmetic.
ForwardTrace forward_on(const Dictionary& dict, std::span<const cplx> x, double sigma2, std::size_t max_layers,
                        const HierarchicalSearcher* searcher = nullptr, std::uint64_t fingerprint = 0);

std::pair<cvec, ForwardTrace> forward(const ModelParams& p, const SystemConfig& cfg,
                                      const std::vector<double>& delays_s, std::span<const cplx> x, double sigma2,
                                      std::size_t max_layers, const SelectorSpec& selector = {});

cvec h_hat_from_trace(std::span<const cplx> x, const ForwardTrace& trace);

// normalized-domain residual energy ||x/||x|| - h_hat/||x||||^2
double loss(std::span<const cplx> x, std::span<const cplx> h_hat);
double loss(const ForwardTrace& trace);

// Reverse-mode gradient of loss() through the executed layers, including the
// column normalization and the dictionary rendering. Selections and layer
// count are constants fixed by the forward pass. Throws if the trace was
// produced under different parameters.
std::vector<double> backward(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                             std::span<const cplx> x, const ForwardTrace& trace);

// Loss at fixed selection: replays the trace's layer/selection schedule under
// (possibly perturbed) parameters. Finite-difference oracle companion of
// backward().
double replay_loss(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                   std::span<const cplx> x, const ForwardTrace& trace);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    // the frequency-step coordinate needs a much smaller step than the gain
    // coordinates; applied by train_online to the last constrained parameter
    double delta_f_lr_scale = 1e-4;
};

struct AdamState {
    AdamConfig cfg;
    std::vector<double> m, v;
    std::vector<double> lr_scale;  // empty => all ones
    std::uint64_t step = 0;
};

AdamState make_adam(std::size_t n_params, const AdamConfig& cfg);
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

struct BatchGrad {
    std::vector<double> grad;  // mean over the batch
    double mean_loss = 0.0;
    double mean_layers = 0.0;
};

// Per-sample forward+backward over a batch; the dictionary is rendered once
// (parameters are constant within a batch). The parallel version fills
// per-sample slots and reduces serially, so both produce identical bits.
BatchGrad batch_gradient_serial(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                                std::span<const NoisyObservation> batch, std::size_t max_layers,
                                const HierarchicalSearcher* searcher = nullptr);
BatchGrad batch_gradient(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                         std::span<const NoisyObservation> batch, std::size_t max_layers,
                         const HierarchicalSearcher* searcher = nullptr);

struct TrainCheckpoint {
    std::size_t channels_seen = 0;
    double nmse_db = 0.0;
};

struct TrainHistory {
    std::vector<double> batch_loss;
    std::vector<std::size_t> batch_channels;  // channels seen after each batch
    std::vector<TrainCheckpoint> checkpoints;
    std::size_t channels_seen = 0;
};

struct TrainConfig {
    std::size_t batch_size = 10;
    std::size_t eval_every = 20;  // batches between test evaluations
    std::size_t max_layers = 10;
    AdamConfig adam;
    SelectorSpec selector;
};

// Unsupervised online loop: one Adam step per batch of noisy observations,
// test NMSE recorded every eval_every batches (plus before the first and
// after the last batch). True channels are only used for the test metric.
TrainHistory train_online(ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                          std::span<const NoisyObservation> train_obs, std::span<const ChannelSample> test_channels,
                          std::span<const NoisyObservation> test_obs, const TrainConfig& tc);

// mean test NMSE (dB) of the MP denoiser on a fixed dictionary
double test_nmse_db(const Dictionary& dict, std::span<const ChannelSample> channels,
                    std::span<const NoisyObservation> obs, std::size_t max_layers,
                    const HierarchicalSearcher* searcher = nullptr, double* mean_correlations = nullptr);

// "MPN1" checkpoint: magic, u32 variant, u32 N, u32 A, f64 payload in
// flattening order, optional Adam state.
void save_checkpoint(const std::string& path, const ModelParams& p, const SystemConfig& cfg, std::size_t n_atoms,
                     const AdamState* adam = nullptr);
ModelParams load_checkpoint(const std::string& path, const SystemConfig& cfg, std::size_t* n_atoms_out = nullptr,
                            std::optional<AdamState>* adam_out = nullptr);

}  // namespace chanest
