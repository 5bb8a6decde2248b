#include "chanest/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <omp.h>

namespace chanest {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinGainNorm = 1e-12;
}  // namespace

void SystemConfig::validate() const {
    if (n_subcarriers < 2 || n_subcarriers % 2 != 0)
        throw config_error("n_subcarriers must be even and >= 2, got " + std::to_string(n_subcarriers));
    if (!(center_freq_hz >= 0.0) || !std::isfinite(center_freq_hz)) throw config_error("center_freq_hz must be finite and >= 0");
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) throw config_error("bandwidth_hz must be finite and > 0");
}

void ImpairmentSpec::validate() const {
    if (!std::isfinite(sco_ppm) || !std::isfinite(cfo_hz) || !std::isfinite(gain_noise_var))
        throw config_error("impairment parameters must be finite");
    if (gain_noise_var < 0.0) throw config_error("gain_noise_var must be >= 0");
}

SubcarrierGrid build_nominal_grid(const SystemConfig& cfg) {
    cfg.validate();
    const double df = cfg.subcarrier_spacing_hz();
    SubcarrierGrid grid;
    grid.freqs_hz.resize(cfg.n_subcarriers);
    for (std::size_t k = 0; k < cfg.n_subcarriers; ++k)
        grid.freqs_hz[k] = cfg.center_freq_hz + cfg.signed_index(k) * df;
    return grid;
}

SubcarrierGrid apply_sco(const SubcarrierGrid& grid, const SystemConfig& cfg, double xi_ppm) {
    const double xi = xi_ppm * 1e-6;
    const double df = cfg.subcarrier_spacing_hz();
    SubcarrierGrid out = grid;
    for (std::size_t k = 0; k < out.freqs_hz.size(); ++k)
        out.freqs_hz[k] += cfg.signed_index(k) * xi * df;
    return out;
}

SubcarrierGrid apply_cfo(const SubcarrierGrid& grid, double delta_f_hz) {
    SubcarrierGrid out = grid;
    for (double& f : out.freqs_hz) f += delta_f_hz;
    return out;
}

AntennaGains nominal_gains(std::size_t n) {
    AntennaGains g;
    g.gains.assign(n, cplx{1.0, 0.0});
    return g;
}

AntennaGains sample_gain_noise(const AntennaGains& nominal, double sigma2_g, Rng& rng) {
    if (sigma2_g < 0.0) throw config_error("gain noise variance must be >= 0");
    const double sd = std::sqrt(sigma2_g);
    AntennaGains out;
    out.gains.resize(nominal.gains.size());
    for (std::size_t k = 0; k < out.gains.size(); ++k) {
        cplx g = nominal.gains[k] + cplx{sd * rng.gaussian(), 0.0};
        // atoms must stay normalizable; a vanishing gain is redrawn
        while (std::abs(g) < kMinGainNorm) g = nominal.gains[k] + cplx{sd * rng.gaussian(), 0.0};
        out.gains[k] = g;
    }
    return out;
}

cvec frv(const SubcarrierGrid& grid, const AntennaGains& gains, double tau_s) {
    const std::size_t n = grid.size();
    cvec v(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double phase = -kTwoPi * grid.freqs_hz[k] * tau_s;
        v[k] = gains.gains[k] * cplx{std::cos(phase), std::sin(phase)};
    }
    return v;
}

std::vector<double> build_delay_grid(const SystemConfig& cfg, std::size_t n_atoms, std::size_t oversampling) {
    if (n_atoms < 2) throw config_error("delay grid needs at least 2 atoms");
    if (oversampling < 1) throw config_error("oversampling must be >= 1");
    const double dtau = 1.0 / (static_cast<double>(oversampling) * cfg.bandwidth_hz);
    std::vector<double> delays(n_atoms);
    for (std::size_t a = 0; a < n_atoms; ++a) delays[a] = static_cast<double>(a) * dtau;
    return delays;
}

Dictionary build_dictionary(const SubcarrierGrid& grid, const AntennaGains& gains, std::vector<double> delays_s) {
    const std::size_t n = grid.size();
    const std::size_t a_count = delays_s.size();
    if (a_count == 0) throw config_error("dictionary needs at least one delay");
    for (const cplx& g : gains.gains)
        if (std::abs(g) < kMinGainNorm) throw config_error("antenna gain too close to zero to normalize an atom");

    Dictionary dict;
    dict.n_rows = n;
    dict.n_atoms = a_count;
    dict.grid = grid;
    dict.gains = gains;
    dict.delays_s = std::move(delays_s);
    dict.atoms.resize(n * a_count);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(a_count); ++a) {
        cplx* column = dict.atoms.data() + static_cast<std::size_t>(a) * n;
        const double tau = dict.delays_s[static_cast<std::size_t>(a)];
        double energy = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double phase = -kTwoPi * grid.freqs_hz[k] * tau;
            column[k] = gains.gains[k] * cplx{std::cos(phase), std::sin(phase)};
            energy += std::norm(column[k]);
        }
        const double inv = 1.0 / std::sqrt(energy);
        for (std::size_t k = 0; k < n; ++k) column[k] *= inv;
    }
    return dict;
}

ChannelSample generate_channel(const SubcarrierGrid& grid, const AntennaGains& gains, std::size_t n_paths,
                               Rng& rng, const PathProfile& profile) {
    if (n_paths < 1 || n_paths > profile.max_paths)
        throw config_error("n_paths must be in [1, " + std::to_string(profile.max_paths) + "]");
    if (!(profile.tau_max_s > 0.0)) throw config_error("path profile needs tau_max_s > 0");

    std::vector<double> taus(n_paths);
    for (double& tau : taus) {
        tau = rng.uniform(0.0, profile.fill * profile.tau_max_s);
        if (profile.on_grid) {
            if (!(profile.grid_step_s > 0.0)) throw config_error("on_grid sampling needs grid_step_s > 0");
            tau = std::round(tau / profile.grid_step_s) * profile.grid_step_s;
        }
    }
    std::sort(taus.begin(), taus.end());

    ChannelSample sample;
    sample.paths.resize(n_paths);
    for (std::size_t l = 0; l < n_paths; ++l) {
        // power decays by decay_db over tau_max plus per_path_decay_db per arrival; phase uniform
        const double loss_db =
            profile.decay_db * (taus[l] / profile.tau_max_s) + profile.per_path_decay_db * static_cast<double>(l);
        const double mag = std::pow(10.0, -loss_db / 20.0);
        const double phi = rng.uniform(0.0, kTwoPi);
        sample.paths[l] = PathComponent{mag * cplx{std::cos(phi), std::sin(phi)}, taus[l]};
    }

    const std::size_t n = grid.size();
    sample.h.assign(n, cplx{0.0, 0.0});
    for (const PathComponent& p : sample.paths) {
        const cvec v = frv(grid, gains, p.tau_s);
        axpy(p.alpha, v, sample.h);
    }
    return sample;
}

NoisyObservation add_noise(const ChannelSample& sample, double snr_in_db, Rng& rng) {
    NoisyObservation obs;
    obs.snr_in_db = snr_in_db;
    const std::size_t n = sample.h.size();
    if (std::isinf(snr_in_db) && snr_in_db > 0.0) {
        obs.x = sample.h;
        obs.noise_var = 0.0;
        return obs;
    }
    if (!std::isfinite(snr_in_db)) throw config_error("snr_in_db must be finite or +inf");
    const double h2 = norm2(sample.h);
    if (h2 <= 0.0) throw config_error("cannot set an SNR for a zero-energy channel");
    obs.noise_var = h2 / (static_cast<double>(n) * std::pow(10.0, snr_in_db / 10.0));
    obs.x.resize(n);
    for (std::size_t k = 0; k < n; ++k) obs.x[k] = sample.h[k] + rng.complex_gaussian(obs.noise_var);
    return obs;
}

}  // namespace chanest
