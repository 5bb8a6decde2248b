#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chanest/pursuit.hpp"
#include "chanest/signal.hpp"
#include "chanest/types.hpp"

namespace chanest {

// Frozen reference estimators: LS (identity on the noisy estimate), MP with a
// fixed dictionary, and a linear MMSE filter built from a substituted
// channel covariance (uniform power-delay profile over an assumed spread).

cvec ls_estimate(const NoisyObservation& obs);

struct LraMmseModel {
    std::size_t n = 0;
    std::size_t rank = 0;
    double sigma2 = 0.0;
    double delay_spread_s = 0.0;
    cvec covariance;           // N x N, column-major, Hermitian PSD (after clipping)
    cvec basis;                // N x rank eigenvectors, column-major
    std::vector<double> eigenvalues;  // length rank, descending, clipped at 0
    cvec filter;               // N x N, F = V diag(l/(l+sigma2)) V^H
};

// C[k,l] = sinc((f_k - f_l) T) * exp(-j pi (f_k - f_l) T), truncated to the
// given rank (0 picks ceil(T * bandwidth) + 1). Throws if T <= 0.
LraMmseModel build_lra_mmse(const SystemConfig& cfg, double sigma2, double delay_spread_s, std::size_t rank = 0);

// h_hat = F x; the filter is noise-level specific, so an observation whose
// variance differs from the model's by more than 10% is rejected.
cvec lra_mmse_estimate(const LraMmseModel& model, const NoisyObservation& obs);

// Re-weights the stored eigenbasis for the observation's own noise variance.
cvec lra_mmse_estimate_adaptive(const LraMmseModel& model, const NoisyObservation& obs);

// MP against a frozen (nominal or real) dictionary.
cvec mp_baseline_estimate(const Dictionary& dict, const NoisyObservation& obs, std::size_t max_iter,
                          std::size_t* n_correlations = nullptr);

}  // namespace chanest
