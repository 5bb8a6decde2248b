#include "chanest/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace chanest {

namespace {

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

}  // namespace

cvec ls_estimate(const NoisyObservation& obs) { return obs.x; }

LraMmseModel build_lra_mmse(const SystemConfig& cfg, double sigma2, double delay_spread_s, std::size_t rank) {
    cfg.validate();
    if (!(delay_spread_s > 0.0)) throw config_error("lra-mmse needs a positive delay spread");
    if (sigma2 < 0.0) throw config_error("lra-mmse needs sigma2 >= 0");
    const std::size_t n = cfg.n_subcarriers;
    if (rank == 0) rank = static_cast<std::size_t>(std::ceil(delay_spread_s * cfg.bandwidth_hz)) + 1;
    rank = std::min(rank, n);

    const SubcarrierGrid grid = build_nominal_grid(cfg);

    // uniform power-delay profile on [0, T]: E[e^{-j2pi df tau}] over tau
    Eigen::MatrixXcd c(n, n);
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t k = 0; k < n; ++k) {
            const double df = grid.freqs_hz[k] - grid.freqs_hz[l];
            const double phase = -std::numbers::pi * df * delay_spread_s;
            c(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                sinc(df * delay_spread_s) * cplx{std::cos(phase), std::sin(phase)};
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(c);
    if (eig.info() != Eigen::Success) throw numeric_error("lra-mmse eigendecomposition failed");

    LraMmseModel model;
    model.n = n;
    model.rank = rank;
    model.sigma2 = sigma2;
    model.delay_spread_s = delay_spread_s;
    model.basis.resize(n * rank);
    model.eigenvalues.resize(rank);

    // eigenvalues come out ascending; keep the top `rank`, clipped at zero
    for (std::size_t j = 0; j < rank; ++j) {
        const Eigen::Index src = static_cast<Eigen::Index>(n - 1 - j);
        model.eigenvalues[j] = std::max(0.0, eig.eigenvalues()(src));
        for (std::size_t k = 0; k < n; ++k)
            model.basis[j * n + k] = eig.eigenvectors()(static_cast<Eigen::Index>(k), src);
    }

    // truncated covariance and filter, both materialized for inspection
    Eigen::MatrixXcd v(n, rank);
    for (std::size_t j = 0; j < rank; ++j)
        for (std::size_t k = 0; k < n; ++k)
            v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = model.basis[j * n + k];
    Eigen::VectorXd lambda(rank);
    for (std::size_t j = 0; j < rank; ++j) lambda(static_cast<Eigen::Index>(j)) = model.eigenvalues[j];

    Eigen::MatrixXcd c_r = v * lambda.asDiagonal() * v.adjoint();
    Eigen::VectorXd weights(rank);
    for (std::size_t j = 0; j < rank; ++j) {
        const double denom = model.eigenvalues[j] + sigma2;
        weights(static_cast<Eigen::Index>(j)) = denom > 0.0 ? model.eigenvalues[j] / denom : 0.0;
    }
    Eigen::MatrixXcd f = v * weights.asDiagonal() * v.adjoint();

    model.covariance.resize(n * n);
    model.filter.resize(n * n);
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t row = 0; row < n; ++row) {
            model.covariance[col * n + row] = c_r(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
            model.filter[col * n + row] = f(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
        }
    }
    return model;
}

cvec lra_mmse_estimate(const LraMmseModel& model, const NoisyObservation& obs) {
    if (obs.x.size() != model.n) throw config_error("observation length does not match the lra-mmse model");
    const double ref = std::max(model.sigma2, 1e-300);
    if (std::abs(obs.noise_var - model.sigma2) > 0.1 * ref)
        throw config_error("observation noise variance differs from the lra-mmse filter's by more than 10%");
    cvec out(model.n, cplx{0.0, 0.0});
    for (std::size_t col = 0; col < model.n; ++col) {
        const cplx xc = obs.x[col];
        const cplx* fcol = model.filter.data() + col * model.n;
        for (std::size_t row = 0; row < model.n; ++row) out[row] += fcol[row] * xc;
    }
    return out;
}

cvec lra_mmse_estimate_adaptive(const LraMmseModel& model, const NoisyObservation& obs) {
    if (obs.x.size() != model.n) throw config_error("observation length does not match the lra-mmse model");
    // y = V^H x; out = V diag(l/(l+sigma2)) y
    cvec y(model.rank);
    for (std::size_t j = 0; j < model.rank; ++j) {
        std::span<const cplx> col{model.basis.data() + j * model.n, model.n};
        y[j] = dotc(col, obs.x);
        const double denom = model.eigenvalues[j] + obs.noise_var;
        y[j] *= denom > 0.0 ? model.eigenvalues[j] / denom : 0.0;
    }
    cvec out(model.n, cplx{0.0, 0.0});
    for (std::size_t j = 0; j < model.rank; ++j) {
        const cplx* col = model.basis.data() + j * model.n;
        for (std::size_t k = 0; k < model.n; ++k) out[k] += col[k] * y[j];
    }
    return out;
}

cvec mp_baseline_estimate(const Dictionary& dict, const NoisyObservation& obs, std::size_t max_iter,
                          std::size_t* n_correlations) {
    PursuitResult result = mp_denoise(dict, obs.x, obs.noise_var, max_iter);
    if (n_correlations != nullptr) *n_correlations = result.n_correlations;
    return std::move(result.h_hat);
}

}  // namespace chanest
