#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chanest/signal.hpp"
#include "chanest/types.hpp"

namespace chanest {

// Greedy sparse recovery against an FRV dictionary, with an optional
// hierarchical atom search that replaces the exhaustive argmax.

struct PursuitResult {
    cvec h_hat;
    cvec residual;  // h_hat + residual reconstructs the input (h_hat is defined as x - residual)
    std::vector<std::pair<std::size_t, cplx>> selected;  // (atom, coefficient) in selection order,
                                                         // coefficients in the unit-norm input domain
    std::size_t n_iterations = 0;
    std::size_t n_correlations = 0;
    bool truncated = false;  // max_iter hit before the stopping criterion
};

struct MetaAtom {
    cvec vector;  // unit norm
    double tau_center_s = 0.0;
    double width_s = 0.0;
};

struct HierarchyConfig {
    std::size_t branching = 3;
    std::size_t levels_for(std::size_t n_atoms) const;
    void validate() const;
};

// eps = sigma^2 * N / ||x||^2, compared against the residual energy of the
// unit-normalized input
double sc2_threshold(double sigma2, std::size_t n_subcarriers, std::span<const cplx> x);

// Residual energies below this are floating-point dust; without the guard a
// sigma2 = 0 run on exactly representable data would spin until max_iter.
inline constexpr double kResidualEnergyFloor = 1e-24;

// One meta-atom: sinc(width * (f - f_center)) * exp(-j 2 pi f tau_center)
// sampled on the grid, unit-normalized. f_center is the grid's zero-index
// frequency (entry N/2).
MetaAtom make_meta_atom(const SubcarrierGrid& grid, double tau_center_s, double width_s);

// Evenly split [tau_lo, tau_hi] into n windows, one meta-atom per window.
std::vector<MetaAtom> build_meta_atoms(const SubcarrierGrid& grid, double tau_lo_s, double tau_hi_s,
                                       std::size_t branching);

// |<frv(tau), meta>| for each tau; plotting/verification utility.
std::vector<double> meta_correlation_response(const MetaAtom& meta, const SubcarrierGrid& grid,
                                              const AntennaGains& gains, std::span<const double> taus_s);

// Precomputed n-ary interval tree of meta-atoms over a dictionary's delay
// grid. Intervals are split by index ranges of ceil(size / n); the last child
// may be short. Read-only after construction, safe to share across threads.
class HierarchicalSearcher {
  public:
    HierarchicalSearcher(const Dictionary& dict, HierarchyConfig cfg);

    struct Pick {
        std::size_t index = 0;
        std::size_t n_correlations = 0;
    };
    Pick argmax(std::span<const cplx> r) const;
    // meta routing uses the precomputed tree; the leaf steps correlate
    // against `dict` (same delay grid, possibly re-rendered atoms)
    Pick argmax(std::span<const cplx> r, const Dictionary& dict) const;

    std::size_t branching() const { return cfg_.branching; }

  private:
    struct Node {
        std::uint32_t lo = 0, hi = 0;    // atom index range [lo, hi)
        std::uint32_t child_begin = 0;   // offset into child_ids_
        std::uint32_t n_children = 0;    // 0 => leaf
        std::uint32_t meta_offset = 0;   // this node's own meta vector, in units of n_rows
    };

    std::uint32_t build(std::size_t lo, std::size_t hi);

    const Dictionary* dict_;
    HierarchyConfig cfg_;
    std::size_t n_rows_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> child_ids_;
    cvec metas_;
};

std::pair<std::size_t, std::size_t> hierarchical_argmax(const Dictionary& dict, std::span<const cplx> r,
                                                        const HierarchyConfig& cfg);

PursuitResult mp_denoise(const Dictionary& dict, std::span<const cplx> x, double sigma2, std::size_t max_iter);

PursuitResult mp_denoise_hierarchical(const Dictionary& dict, std::span<const cplx> x, double sigma2,
                                      std::size_t max_iter, const HierarchyConfig& cfg);
PursuitResult mp_denoise_hierarchical(const Dictionary& dict, std::span<const cplx> x, double sigma2,
                                      std::size_t max_iter, const HierarchicalSearcher& searcher);

// n* = argmin over n in [2, 16] of n * log_n(A); evaluates to 3 for any A > 1
std::size_t optimal_branching(std::size_t n_atoms);

namespace detail {

// Shared inner loop of the exhaustive and hierarchical pursuits and of the
// unfolded forward pass; operates on a unit-norm input.
struct PursuitCore {
    std::vector<std::size_t> indices;
    cvec coeffs;
    cvec residual;
    std::size_t n_correlations = 0;
    bool truncated = false;
};

PursuitCore pursuit_core(const Dictionary& dict, std::span<const cplx> x_unit, double eps, std::size_t max_iter,
                         const HierarchicalSearcher* searcher);

std::size_t exhaustive_argmax(const Dictionary& dict, std::span<const cplx> r);

}  // namespace detail

}  // namespace chanest
