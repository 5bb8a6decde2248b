#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "chanest/rng.hpp"
#include "chanest/types.hpp"

namespace chanest {

// Physical-layer model: subcarrier grids, oscillator/gain impairments,
// frequency response vectors, delay dictionaries, synthetic channels.
//
// Subcarrier index convention: signed indices i in [-N/2, N/2-1] (N values),
// so row k of any length-N vector corresponds to i = k - N/2 and the grid is
// f_k = f0 + (k - N/2) * spacing.

struct SystemConfig {
    std::size_t n_subcarriers = 256;
    double center_freq_hz = 3.4e9;
    double bandwidth_hz = 50e6;
    std::uint64_t seed = 0;

    double subcarrier_spacing_hz() const { return bandwidth_hz / static_cast<double>(n_subcarriers); }
    int signed_index(std::size_t k) const { return static_cast<int>(k) - static_cast<int>(n_subcarriers) / 2; }
    void validate() const;
};

struct SubcarrierGrid {
    std::vector<double> freqs_hz;  // ascending, length N
    std::size_t size() const { return freqs_hz.size(); }
};

struct ImpairmentSpec {
    double sco_ppm = 0.0;
    double cfo_hz = 0.0;
    double gain_noise_var = 0.0;
    void validate() const;
};

struct AntennaGains {
    cvec gains;  // length N, no entry with modulus below 1e-12
};

struct PathComponent {
    cplx alpha;
    double tau_s = 0.0;
};

struct ChannelSample {
    cvec h;
    std::vector<PathComponent> paths;
};

struct NoisyObservation {
    cvec x;
    double noise_var = 0.0;
    double snr_in_db = 0.0;
};

struct Dictionary {
    std::size_t n_rows = 0;   // N
    std::size_t n_atoms = 0;  // A
    cvec atoms;               // column-major N x A, unit-norm columns
    std::vector<double> delays_s;
    SubcarrierGrid grid;
    AntennaGains gains;

    const cplx* col(std::size_t a) const { return atoms.data() + a * n_rows; }
    std::span<const cplx> column(std::size_t a) const { return {col(a), n_rows}; }
};

SubcarrierGrid build_nominal_grid(const SystemConfig& cfg);

// f_i = f~_i + i*xi*spacing, xi = xi_ppm * 1e-6
SubcarrierGrid apply_sco(const SubcarrierGrid& grid, const SystemConfig& cfg, double xi_ppm);

SubcarrierGrid apply_cfo(const SubcarrierGrid& grid, double delta_f_hz);

AntennaGains nominal_gains(std::size_t n);

// g_i = g~_i + n_i with n_i real gaussian of variance sigma2_g
AntennaGains sample_gain_noise(const AntennaGains& nominal, double sigma2_g, Rng& rng);

// entry k = g_k * exp(-j 2 pi f_k tau); not normalized
cvec frv(const SubcarrierGrid& grid, const AntennaGains& gains, double tau_s);

// uniform delays a * dtau, dtau = 1 / (oversampling * bandwidth)
std::vector<double> build_delay_grid(const SystemConfig& cfg, std::size_t n_atoms, std::size_t oversampling = 4);

Dictionary build_dictionary(const SubcarrierGrid& grid, const AntennaGains& gains, std::vector<double> delays_s);

struct PathProfile {
    double tau_max_s = 0.0;    // upper end of the dictionary's delay span
    double decay_db = 20.0;    // path power decay over tau_max
    double per_path_decay_db = 0.0;  // extra power decay per arrival index (delays sorted)
    double fill = 0.8;         // delays drawn on [0, fill * tau_max]
    bool on_grid = false;      // snap delays to multiples of grid_step_s
    double grid_step_s = 0.0;
    std::size_t max_paths = 10;
};

ChannelSample generate_channel(const SubcarrierGrid& grid, const AntennaGains& gains, std::size_t n_paths,
                               Rng& rng, const PathProfile& profile);

// sigma^2 = ||h||^2 / (N * 10^(snr/10)); pass snr = +inf for a noiseless copy
NoisyObservation add_noise(const ChannelSample& sample, double snr_in_db, Rng& rng);

}  // namespace chanest
