#include "chanest/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <unordered_map>

#include <omp.h>

#include "chanest/binio.hpp"

namespace chanest {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNmseDbFloor = -300.0;

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t hash_doubles(std::uint64_t h, std::span<const double> values) {
    for (double d : values) h = fnv1a(h, std::bit_cast<std::uint64_t>(d));
    return h;
}

// effective grid of the constrained rendering: f~_k + i_k * delta_f
SubcarrierGrid constrained_grid(const SystemConfig& cfg, double delta_f_hz) {
    SubcarrierGrid grid = build_nominal_grid(cfg);
    for (std::size_t k = 0; k < grid.size(); ++k) grid.freqs_hz[k] += cfg.signed_index(k) * delta_f_hz;
    return grid;
}

}  // namespace

std::size_t count_parameters(const ConstrainedParams& p) { return 2 * p.gains.size() + 1; }
std::size_t count_parameters(const UnconstrainedParams& p) { return 2 * p.n_rows * p.n_atoms; }
std::size_t count_parameters(const ModelParams& p) {
    return std::visit([](const auto& v) { return count_parameters(v); }, p);
}

std::vector<double> flatten(const ConstrainedParams& p, double subcarrier_spacing_hz) {
    std::vector<double> flat(2 * p.gains.size() + 1);
    for (std::size_t k = 0; k < p.gains.size(); ++k) {
        flat[2 * k] = p.gains[k].real();
        flat[2 * k + 1] = p.gains[k].imag();
    }
    flat.back() = p.delta_f_hz / subcarrier_spacing_hz;
    return flat;
}

void unflatten(std::span<const double> flat, double subcarrier_spacing_hz, ConstrainedParams& p) {
    if (flat.size() != 2 * p.gains.size() + 1) throw config_error("flattened size does not match constrained params");
    for (std::size_t k = 0; k < p.gains.size(); ++k) p.gains[k] = {flat[2 * k], flat[2 * k + 1]};
    p.delta_f_hz = flat.back() * subcarrier_spacing_hz;
}

std::vector<double> flatten(const UnconstrainedParams& p) {
    std::vector<double> flat(2 * p.weights.size());
    for (std::size_t j = 0; j < p.weights.size(); ++j) {
        flat[2 * j] = p.weights[j].real();
        flat[2 * j + 1] = p.weights[j].imag();
    }
    return flat;
}

void unflatten(std::span<const double> flat, UnconstrainedParams& p) {
    if (flat.size() != 2 * p.weights.size()) throw config_error("flattened size does not match unconstrained params");
    for (std::size_t j = 0; j < p.weights.size(); ++j) p.weights[j] = {flat[2 * j], flat[2 * j + 1]};
}

std::uint64_t params_fingerprint(const ConstrainedParams& p) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = fnv1a(h, 0xc0);
    h = fnv1a(h, p.gains.size());
    h = hash_doubles(h, {reinterpret_cast<const double*>(p.gains.data()), 2 * p.gains.size()});
    h = fnv1a(h, std::bit_cast<std::uint64_t>(p.delta_f_hz));
    return h;
}

std::uint64_t params_fingerprint(const UnconstrainedParams& p) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = fnv1a(h, 0x0f);
    h = fnv1a(h, p.n_rows);
    h = fnv1a(h, p.n_atoms);
    h = hash_doubles(h, {reinterpret_cast<const double*>(p.weights.data()), 2 * p.weights.size()});
    return h;
}

std::uint64_t params_fingerprint(const ModelParams& p) {
    return std::visit([](const auto& v) { return params_fingerprint(v); }, p);
}

Dictionary render_constrained(const ConstrainedParams& p, const SystemConfig& cfg,
                              const std::vector<double>& delays_s) {
    if (p.gains.size() != cfg.n_subcarriers) throw config_error("gain vector length does not match n_subcarriers");
    AntennaGains gains;
    gains.gains = p.gains;
    return build_dictionary(constrained_grid(cfg, p.delta_f_hz), gains, delays_s);
}

Dictionary render_unconstrained(const UnconstrainedParams& p, const SystemConfig& cfg,
                                const std::vector<double>& delays_s) {
    if (p.n_rows != cfg.n_subcarriers || p.n_atoms != delays_s.size() || p.weights.size() != p.n_rows * p.n_atoms)
        throw config_error("weight matrix shape does not match the system/delay grid");
    Dictionary dict;
    dict.n_rows = p.n_rows;
    dict.n_atoms = p.n_atoms;
    dict.grid = build_nominal_grid(cfg);
    dict.gains = nominal_gains(p.n_rows);
    dict.delays_s = delays_s;
    dict.atoms.resize(p.weights.size());
    for (std::size_t a = 0; a < p.n_atoms; ++a) {
        const cplx* w = p.weights.data() + a * p.n_rows;
        cplx* out = dict.atoms.data() + a * p.n_rows;
        double energy = 0.0;
        for (std::size_t k = 0; k < p.n_rows; ++k) energy += std::norm(w[k]);
        if (!(energy > 0.0)) throw numeric_error("weight column has zero norm, cannot normalize");
        const double inv = 1.0 / std::sqrt(energy);
        for (std::size_t k = 0; k < p.n_rows; ++k) out[k] = w[k] * inv;
    }
    return dict;
}

Dictionary render(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s) {
    if (const auto* c = std::get_if<ConstrainedParams>(&p)) return render_constrained(*c, cfg, delays_s);
    return render_unconstrained(std::get<UnconstrainedParams>(p), cfg, delays_s);
}

cvec ht1(const cvec& v) {
    if (v.empty()) throw config_error("ht1 needs a nonempty input");
    std::size_t best = 0;
    double best_val = std::norm(v[0]);
    for (std::size_t j = 1; j < v.size(); ++j) {
        const double val = std::norm(v[j]);
        if (val > best_val) {
            best_val = val;
            best = j;
        }
    }
    cvec out(v.size(), cplx{0.0, 0.0});
    out[best] = v[best];
    return out;
}

ForwardTrace forward_on(const Dictionary& dict, std::span<const cplx> x, double sigma2, std::size_t max_layers,
                        const HierarchicalSearcher* searcher, std::uint64_t fingerprint) {
    const double x_norm = norm(x);
    const double eps = sc2_threshold(sigma2, dict.n_rows, x);

    cvec x_unit(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) x_unit[k] = x[k] / x_norm;

    auto core = detail::pursuit_core(dict, x_unit, eps, max_layers, searcher);

    ForwardTrace trace;
    trace.input_norm = x_norm;
    trace.residual = std::move(core.residual);
    trace.selected = std::move(core.indices);
    trace.coefficients = std::move(core.coeffs);
    trace.layers = trace.selected.size();
    trace.truncated = core.truncated;
    trace.n_correlations = core.n_correlations;
    trace.fingerprint = fingerprint;
    return trace;
}

std::pair<cvec, ForwardTrace> forward(const ModelParams& p, const SystemConfig& cfg,
                                      const std::vector<double>& delays_s, std::span<const cplx> x, double sigma2,
                                      std::size_t max_layers, const SelectorSpec& selector) {
    const Dictionary dict = render(p, cfg, delays_s);
    std::optional<HierarchicalSearcher> searcher;
    if (selector.hierarchical) searcher.emplace(dict, HierarchyConfig{selector.branching});
    ForwardTrace trace =
        forward_on(dict, x, sigma2, max_layers, searcher ? &*searcher : nullptr, params_fingerprint(p));
    return {h_hat_from_trace(x, trace), std::move(trace)};
}

cvec h_hat_from_trace(std::span<const cplx> x, const ForwardTrace& trace) {
    cvec h_hat(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) h_hat[k] = x[k] - trace.input_norm * trace.residual[k];
    return h_hat;
}

double loss(std::span<const cplx> x, std::span<const cplx> h_hat) {
    if (x.size() != h_hat.size()) throw config_error("loss needs matching vector lengths");
    const double x2 = norm2(x);
    if (!(x2 > 0.0)) throw numeric_error("loss undefined for a zero input");
    double diff2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) diff2 += std::norm(x[k] - h_hat[k]);
    return diff2 / x2;
}

double loss(const ForwardTrace& trace) { return norm2(trace.residual); }

namespace {

// raw (unnormalized) atom column exactly as the rendering computes it
struct RawAtom {
    cvec v;
    double inv_norm = 0.0;
    cvec atom;  // v * inv_norm
};

RawAtom raw_atom_constrained(const ConstrainedParams& p, const SubcarrierGrid& grid, double tau) {
    RawAtom ra;
    AntennaGains gains;
    gains.gains = p.gains;
    ra.v = frv(grid, gains, tau);
    const double energy = norm2(ra.v);
    ra.inv_norm = 1.0 / std::sqrt(energy);
    ra.atom.resize(ra.v.size());
    for (std::size_t k = 0; k < ra.v.size(); ++k) ra.atom[k] = ra.v[k] * ra.inv_norm;
    return ra;
}

RawAtom raw_atom_unconstrained(const UnconstrainedParams& p, std::size_t index) {
    RawAtom ra;
    const cplx* w = p.weights.data() + index * p.n_rows;
    ra.v.assign(w, w + p.n_rows);
    const double energy = norm2(ra.v);
    ra.inv_norm = 1.0 / std::sqrt(energy);
    ra.atom.resize(p.n_rows);
    for (std::size_t k = 0; k < p.n_rows; ++k) ra.atom[k] = ra.v[k] * ra.inv_norm;
    return ra;
}

struct ReplayState {
    std::vector<std::size_t> distinct;           // distinct selected atoms
    std::unordered_map<std::size_t, std::size_t> slot;  // atom index -> position in distinct
    std::vector<RawAtom> atoms;                  // per distinct atom
    std::vector<cvec> residuals;                 // r_0 .. r_T
};

ReplayState replay_layers(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                          std::span<const cplx> x, const ForwardTrace& trace, bool use_stored_coeffs) {
    ReplayState st;
    for (std::size_t idx : trace.selected) {
        if (!st.slot.contains(idx)) {
            st.slot.emplace(idx, st.distinct.size());
            st.distinct.push_back(idx);
        }
    }

    if (const auto* c = std::get_if<ConstrainedParams>(&p)) {
        const SubcarrierGrid grid = constrained_grid(cfg, c->delta_f_hz);
        for (std::size_t idx : st.distinct) st.atoms.push_back(raw_atom_constrained(*c, grid, delays_s[idx]));
    } else {
        const auto& u = std::get<UnconstrainedParams>(p);
        for (std::size_t idx : st.distinct) st.atoms.push_back(raw_atom_unconstrained(u, idx));
    }

    const double x_norm = norm(x);
    cvec r(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) r[k] = x[k] / x_norm;
    st.residuals.reserve(trace.layers + 1);
    st.residuals.push_back(r);
    for (std::size_t t = 0; t < trace.layers; ++t) {
        const cvec& atom = st.atoms[st.slot.at(trace.selected[t])].atom;
        const cplx c = use_stored_coeffs ? trace.coefficients[t] : dotc(atom, r);
        axpy(-c, atom, r);
        st.residuals.push_back(r);
    }
    return st;
}

}  // namespace

double replay_loss(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                   std::span<const cplx> x, const ForwardTrace& trace) {
    const ReplayState st = replay_layers(p, cfg, delays_s, x, trace, /*use_stored_coeffs=*/false);
    return norm2(st.residuals.back());
}

std::vector<double> backward(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                             std::span<const cplx> x, const ForwardTrace& trace) {
    if (params_fingerprint(p) != trace.fingerprint)
        throw std::invalid_argument("stale trace: parameters changed since the forward pass");

    const std::size_t n_params = count_parameters(p);
    std::vector<double> grad(n_params, 0.0);
    if (trace.layers == 0) return grad;

    const ReplayState st = replay_layers(p, cfg, delays_s, x, trace, /*use_stored_coeffs=*/true);
    const std::size_t n = x.size();

    // cogradient wrt the final residual of L = ||r_T||^2
    cvec g(st.residuals.back());
    std::vector<cvec> g_atom(st.distinct.size(), cvec(n, cplx{0.0, 0.0}));

    for (std::size_t t = trace.layers; t-- > 0;) {
        const std::size_t slot = st.slot.at(trace.selected[t]);
        const cvec& atom = st.atoms[slot].atom;
        const cvec& r_prev = st.residuals[t];
        const cplx c = trace.coefficients[t];
        const cplx a = dotc(atom, g);  // atom^H g
        cvec& ga = g_atom[slot];
        for (std::size_t k = 0; k < n; ++k) ga[k] -= std::conj(c) * g[k] + std::conj(a) * r_prev[k];
        for (std::size_t k = 0; k < n; ++k) g[k] -= a * atom[k];
    }

    // through the column normalization: atom = v / ||v||
    const auto* cparams = std::get_if<ConstrainedParams>(&p);
    const double spacing = cfg.subcarrier_spacing_hz();
    double d_delta_hz = 0.0;
    cvec g_gains;
    if (cparams != nullptr) g_gains.assign(n, cplx{0.0, 0.0});

    for (std::size_t s = 0; s < st.distinct.size(); ++s) {
        const RawAtom& ra = st.atoms[s];
        const cvec& ga = g_atom[s];
        const double sv = dotc(ga, ra.v).real();  // Re(g_atom^H v)
        const double inv = ra.inv_norm;
        cvec gv(n);
        for (std::size_t k = 0; k < n; ++k) gv[k] = ga[k] * inv - (sv * inv * inv * inv) * ra.v[k];

        if (cparams != nullptr) {
            const double tau = delays_s[st.distinct[s]];
            for (std::size_t k = 0; k < n; ++k) {
                // v_k = g_k * E_k; dv/dg_k = E_k; dv/d(delta_f) = v_k * (-j 2 pi i_k tau)
                const cplx e_k = ra.v[k] / cparams->gains[k];
                g_gains[k] += gv[k] * std::conj(e_k);
                const double i_k = static_cast<double>(cfg.signed_index(k));
                const cplx dv = ra.v[k] * cplx{0.0, -kTwoPi * i_k * tau};
                d_delta_hz += 2.0 * (std::conj(gv[k]) * dv).real();
            }
        } else {
            const auto& u = std::get<UnconstrainedParams>(p);
            const std::size_t base = 2 * st.distinct[s] * u.n_rows;
            for (std::size_t k = 0; k < n; ++k) {
                grad[base + 2 * k] = 2.0 * gv[k].real();
                grad[base + 2 * k + 1] = 2.0 * gv[k].imag();
            }
        }
    }

    if (cparams != nullptr) {
        for (std::size_t k = 0; k < n; ++k) {
            grad[2 * k] = 2.0 * g_gains[k].real();
            grad[2 * k + 1] = 2.0 * g_gains[k].imag();
        }
        grad[2 * n] = d_delta_hz * spacing;  // step is learned in units of the spacing
    }
    return grad;
}

AdamState make_adam(std::size_t n_params, const AdamConfig& cfg) {
    AdamState state;
    state.cfg = cfg;
    state.m.assign(n_params, 0.0);
    state.v.assign(n_params, 0.0);
    return state;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
    if (params.size() != state.m.size() || grads.size() != state.m.size())
        throw config_error("adam state/parameter shape mismatch");
    state.step += 1;
    const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t j = 0; j < params.size(); ++j) {
        state.m[j] = b1 * state.m[j] + (1.0 - b1) * grads[j];
        state.v[j] = b2 * state.v[j] + (1.0 - b2) * grads[j] * grads[j];
        const double m_hat = state.m[j] / bc1;
        const double v_hat = state.v[j] / bc2;
        const double scale = state.lr_scale.empty() ? 1.0 : state.lr_scale[j];
        params[j] -= state.cfg.lr * scale * m_hat / (std::sqrt(v_hat) + state.cfg.eps);
    }
}

namespace {

BatchGrad batch_gradient_impl(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                              std::span<const NoisyObservation> batch, std::size_t max_layers,
                              const HierarchicalSearcher* searcher, bool parallel) {
    if (batch.empty()) throw config_error("batch gradient needs a nonempty batch");
    const Dictionary dict = render(p, cfg, delays_s);
    const std::uint64_t fp = params_fingerprint(p);
    const std::size_t n_params = count_parameters(p);

    std::vector<std::vector<double>> grads(batch.size());
    std::vector<double> losses(batch.size(), 0.0);
    std::vector<double> layer_counts(batch.size(), 0.0);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(batch.size()); ++i) {
        const auto& obs = batch[static_cast<std::size_t>(i)];
        const ForwardTrace trace = forward_on(dict, obs.x, obs.noise_var, max_layers, searcher, fp);
        losses[static_cast<std::size_t>(i)] = loss(trace);
        layer_counts[static_cast<std::size_t>(i)] = static_cast<double>(trace.layers);
        grads[static_cast<std::size_t>(i)] = backward(p, cfg, delays_s, obs.x, trace);
    }

    BatchGrad out;
    out.grad.assign(n_params, 0.0);
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t j = 0; j < n_params; ++j) out.grad[j] += grads[i][j];
        out.mean_loss += losses[i];
        out.mean_layers += layer_counts[i];
    }
    for (double& gj : out.grad) gj *= inv;
    out.mean_loss *= inv;
    out.mean_layers *= inv;
    return out;
}

}  // namespace

BatchGrad batch_gradient_serial(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                                std::span<const NoisyObservation> batch, std::size_t max_layers,
                                const HierarchicalSearcher* searcher) {
    return batch_gradient_impl(p, cfg, delays_s, batch, max_layers, searcher, false);
}

BatchGrad batch_gradient(const ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                         std::span<const NoisyObservation> batch, std::size_t max_layers,
                         const HierarchicalSearcher* searcher) {
    return batch_gradient_impl(p, cfg, delays_s, batch, max_layers, searcher, true);
}

double test_nmse_db(const Dictionary& dict, std::span<const ChannelSample> channels,
                    std::span<const NoisyObservation> obs, std::size_t max_layers,
                    const HierarchicalSearcher* searcher, double* mean_correlations) {
    if (channels.size() != obs.size() || channels.empty()) throw config_error("test set channel/observation mismatch");
    std::vector<double> nmse(channels.size(), 0.0);
    std::vector<double> corr(channels.size(), 0.0);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(channels.size()); ++i) {
        const std::size_t idx = static_cast<std::size_t>(i);
        const ForwardTrace trace = forward_on(dict, obs[idx].x, obs[idx].noise_var, max_layers, searcher);
        double err2 = 0.0;
        for (std::size_t k = 0; k < channels[idx].h.size(); ++k) {
            const cplx h_hat_k = obs[idx].x[k] - trace.input_norm * trace.residual[k];
            err2 += std::norm(h_hat_k - channels[idx].h[k]);
        }
        nmse[idx] = err2 / norm2(channels[idx].h);
        corr[idx] = static_cast<double>(trace.n_correlations);
    }

    double mean = 0.0, mean_corr = 0.0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        mean += nmse[i];
        mean_corr += corr[i];
    }
    mean /= static_cast<double>(channels.size());
    mean_corr /= static_cast<double>(channels.size());
    if (mean_correlations != nullptr) *mean_correlations = mean_corr;
    return mean > 1e-30 ? 10.0 * std::log10(mean) : kNmseDbFloor;
}

TrainHistory train_online(ModelParams& p, const SystemConfig& cfg, const std::vector<double>& delays_s,
                          std::span<const NoisyObservation> train_obs, std::span<const ChannelSample> test_channels,
                          std::span<const NoisyObservation> test_obs, const TrainConfig& tc) {
    if (tc.batch_size < 1) throw config_error("batch_size must be >= 1");
    if (train_obs.empty()) throw config_error("empty training stream");

    // The search tree depends only on the delay grid geometry, so it is built
    // once from the initial rendering and reused as the atoms evolve.
    std::optional<HierarchicalSearcher> searcher;
    Dictionary dict = render(p, cfg, delays_s);
    if (tc.selector.hierarchical) searcher.emplace(dict, HierarchyConfig{tc.selector.branching});
    const HierarchicalSearcher* hs = searcher ? &*searcher : nullptr;

    AdamState adam = make_adam(count_parameters(p), tc.adam);
    if (std::holds_alternative<ConstrainedParams>(p)) {
        adam.lr_scale.assign(count_parameters(p), 1.0);
        adam.lr_scale.back() = tc.adam.delta_f_lr_scale;
    }

    TrainHistory history;
    history.checkpoints.push_back({0, test_nmse_db(dict, test_channels, test_obs, tc.max_layers, hs)});

    const std::size_t n_batches = (train_obs.size() + tc.batch_size - 1) / tc.batch_size;
    for (std::size_t b = 0; b < n_batches; ++b) {
        const std::size_t lo = b * tc.batch_size;
        const std::size_t hi = std::min(lo + tc.batch_size, train_obs.size());
        const BatchGrad bg = batch_gradient(p, cfg, delays_s, train_obs.subspan(lo, hi - lo), tc.max_layers, hs);
        if (!std::isfinite(bg.mean_loss)) throw numeric_error("training loss is not finite");
        history.batch_loss.push_back(bg.mean_loss);
        history.channels_seen += hi - lo;
        history.batch_channels.push_back(history.channels_seen);

        if (const auto* c = std::get_if<ConstrainedParams>(&p)) {
            auto flat = flatten(*c, cfg.subcarrier_spacing_hz());
            adam_step(adam, flat, bg.grad);
            unflatten(flat, cfg.subcarrier_spacing_hz(), std::get<ConstrainedParams>(p));
        } else {
            auto flat = flatten(std::get<UnconstrainedParams>(p));
            adam_step(adam, flat, bg.grad);
            unflatten(flat, std::get<UnconstrainedParams>(p));
        }

        if ((b + 1) % tc.eval_every == 0 || b + 1 == n_batches) {
            dict = render(p, cfg, delays_s);
            history.checkpoints.push_back(
                {history.channels_seen, test_nmse_db(dict, test_channels, test_obs, tc.max_layers, hs)});
        }
    }
    return history;
}

void save_checkpoint(const std::string& path, const ModelParams& p, const SystemConfig& cfg, std::size_t n_atoms,
                     const AdamState* adam) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open checkpoint file for writing: " + path);
    os.write("MPN1", 4);
    const bool constrained = std::holds_alternative<ConstrainedParams>(p);
    detail::write_pod<std::uint32_t>(os, constrained ? 0u : 1u);
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.n_subcarriers));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(n_atoms));
    const std::vector<double> flat = constrained
                                         ? flatten(std::get<ConstrainedParams>(p), cfg.subcarrier_spacing_hz())
                                         : flatten(std::get<UnconstrainedParams>(p));
    os.write(reinterpret_cast<const char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
    detail::write_pod<std::uint8_t>(os, adam != nullptr ? 1u : 0u);
    if (adam != nullptr) {
        detail::write_pod<std::uint64_t>(os, adam->step);
        detail::write_pod<double>(os, adam->cfg.lr);
        detail::write_pod<double>(os, adam->cfg.beta1);
        detail::write_pod<double>(os, adam->cfg.beta2);
        detail::write_pod<double>(os, adam->cfg.eps);
        os.write(reinterpret_cast<const char*>(adam->m.data()),
                 static_cast<std::streamsize>(adam->m.size() * sizeof(double)));
        os.write(reinterpret_cast<const char*>(adam->v.data()),
                 static_cast<std::streamsize>(adam->v.size() * sizeof(double)));
    }
    if (!os) throw io_error("failed while writing checkpoint: " + path);
}

ModelParams load_checkpoint(const std::string& path, const SystemConfig& cfg, std::size_t* n_atoms_out,
                            std::optional<AdamState>* adam_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open checkpoint file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "MPN1", 4) != 0) throw io_error("bad checkpoint magic in " + path);
    const auto variant = detail::read_pod<std::uint32_t>(is, "variant tag");
    const auto n = detail::read_pod<std::uint32_t>(is, "subcarrier count");
    const auto a = detail::read_pod<std::uint32_t>(is, "atom count");
    if (n != cfg.n_subcarriers) throw io_error("checkpoint subcarrier count does not match the config");
    if (n_atoms_out != nullptr) *n_atoms_out = a;

    const std::size_t count = variant == 0 ? 2 * static_cast<std::size_t>(n) + 1
                                           : 2 * static_cast<std::size_t>(n) * static_cast<std::size_t>(a);
    std::vector<double> flat(count);
    is.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw io_error("truncated checkpoint payload in " + path);

    ModelParams p;
    if (variant == 0) {
        ConstrainedParams c;
        c.gains.resize(n);
        unflatten(flat, cfg.subcarrier_spacing_hz(), c);
        p = std::move(c);
    } else if (variant == 1) {
        UnconstrainedParams u;
        u.n_rows = n;
        u.n_atoms = a;
        u.weights.resize(static_cast<std::size_t>(n) * a);
        unflatten(flat, u);
        p = std::move(u);
    } else {
        throw io_error("unknown checkpoint variant tag " + std::to_string(variant));
    }

    const auto has_adam = detail::read_pod<std::uint8_t>(is, "adam flag");
    if (adam_out != nullptr) adam_out->reset();
    if (has_adam == 1) {
        AdamState adam;
        adam.step = detail::read_pod<std::uint64_t>(is, "adam step");
        adam.cfg.lr = detail::read_pod<double>(is, "adam lr");
        adam.cfg.beta1 = detail::read_pod<double>(is, "adam beta1");
        adam.cfg.beta2 = detail::read_pod<double>(is, "adam beta2");
        adam.cfg.eps = detail::read_pod<double>(is, "adam eps");
        adam.m.resize(count);
        adam.v.resize(count);
        is.read(reinterpret_cast<char*>(adam.m.data()), static_cast<std::streamsize>(count * sizeof(double)));
        is.read(reinterpret_cast<char*>(adam.v.data()), static_cast<std::streamsize>(count * sizeof(double)));
        if (!is) throw io_error("truncated adam state in " + path);
        if (adam_out != nullptr) *adam_out = std::move(adam);
    }
    return p;
}

}  // namespace chanest
