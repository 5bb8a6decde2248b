#include "chanest/pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <omp.h>

namespace chanest {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

}  // namespace

std::size_t HierarchyConfig::levels_for(std::size_t n_atoms) const {
    validate();
    if (n_atoms <= 1) return 0;
    return static_cast<std::size_t>(
        std::ceil(std::log(static_cast<double>(n_atoms)) / std::log(static_cast<double>(branching))));
}

void HierarchyConfig::validate() const {
    if (branching < 2 || branching > 32) throw config_error("hierarchy branching must be in [2, 32]");
}

double sc2_threshold(double sigma2, std::size_t n_subcarriers, std::span<const cplx> x) {
    const double x2 = norm2(x);
    if (!(x2 > 0.0)) throw numeric_error("sc2 threshold undefined for a zero input vector");
    return sigma2 * static_cast<double>(n_subcarriers) / x2;
}

MetaAtom make_meta_atom(const SubcarrierGrid& grid, double tau_center_s, double width_s) {
    if (!(width_s > 0.0)) throw config_error("meta-atom width must be > 0");
    const std::size_t n = grid.size();
    const double f_center = grid.freqs_hz[n / 2];
    MetaAtom meta;
    meta.tau_center_s = tau_center_s;
    meta.width_s = width_s;
    meta.vector.resize(n);
    double energy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double f = grid.freqs_hz[k];
        const double env = sinc(width_s * (f - f_center));
        const double phase = -kTwoPi * f * tau_center_s;
        meta.vector[k] = env * cplx{std::cos(phase), std::sin(phase)};
        energy += std::norm(meta.vector[k]);
    }
    const double inv = 1.0 / std::sqrt(energy);
    for (cplx& z : meta.vector) z *= inv;
    return meta;
}

std::vector<MetaAtom> build_meta_atoms(const SubcarrierGrid& grid, double tau_lo_s, double tau_hi_s,
                                       std::size_t branching) {
    if (!(tau_hi_s > tau_lo_s)) throw config_error("meta-atom interval is empty");
    if (branching < 2) throw config_error("need at least 2 meta-atoms per interval");
    const double w = (tau_hi_s - tau_lo_s) / static_cast<double>(branching);
    std::vector<MetaAtom> metas;
    metas.reserve(branching);
    for (std::size_t m = 0; m < branching; ++m)
        metas.push_back(make_meta_atom(grid, tau_lo_s + (static_cast<double>(m) + 0.5) * w, w));
    return metas;
}

std::vector<double> meta_correlation_response(const MetaAtom& meta, const SubcarrierGrid& grid,
                                              const AntennaGains& gains, std::span<const double> taus_s) {
    std::vector<double> out(taus_s.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(taus_s.size()); ++i) {
        const cvec v = frv(grid, gains, taus_s[static_cast<std::size_t>(i)]);
        out[static_cast<std::size_t>(i)] = std::abs(dotc(meta.vector, v));
    }
    return out;
}

HierarchicalSearcher::HierarchicalSearcher(const Dictionary& dict, HierarchyConfig cfg)
    : dict_(&dict), cfg_(cfg), n_rows_(dict.n_rows) {
    cfg_.validate();
    if (dict.n_atoms == 0) throw config_error("hierarchical search needs a non-empty dictionary");
    if (dict.n_atoms >= 2) {
        const double step = dict.delays_s[1] - dict.delays_s[0];
        for (std::size_t a = 1; a + 1 < dict.n_atoms; ++a) {
            const double d = dict.delays_s[a + 1] - dict.delays_s[a];
            if (std::abs(d - step) > 1e-9 * step) throw config_error("hierarchical search needs a uniform delay grid");
        }
    }
    nodes_.reserve(2 * dict.n_atoms / cfg_.branching + 4);
    build(0, dict.n_atoms);
}

std::uint32_t HierarchicalSearcher::build(std::size_t lo, std::size_t hi) {
    const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi), 0, 0, 0});

    const std::size_t count = hi - lo;
    if (count <= cfg_.branching) return id;  // leaf: correlate actual atoms

    const std::size_t chunk = (count + cfg_.branching - 1) / cfg_.branching;
    const double dtau = dict_->n_atoms >= 2 ? dict_->delays_s[1] - dict_->delays_s[0] : 1.0;

    std::vector<std::uint32_t> children;
    for (std::size_t c_lo = lo; c_lo < hi; c_lo += chunk) {
        const std::size_t c_hi = std::min(c_lo + chunk, hi);
        // meta window covering the child's atom bins
        const double center = 0.5 * (dict_->delays_s[c_lo] + dict_->delays_s[c_hi - 1]);
        const double width = static_cast<double>(c_hi - c_lo) * dtau;
        const MetaAtom meta = make_meta_atom(dict_->grid, center, width);

        const std::uint32_t meta_offset = static_cast<std::uint32_t>(metas_.size() / n_rows_);
        metas_.insert(metas_.end(), meta.vector.begin(), meta.vector.end());

        const std::uint32_t child = build(c_lo, c_hi);
        nodes_[child].meta_offset = meta_offset;
        children.push_back(child);
    }
    nodes_[id].child_begin = static_cast<std::uint32_t>(child_ids_.size());
    nodes_[id].n_children = static_cast<std::uint32_t>(children.size());
    child_ids_.insert(child_ids_.end(), children.begin(), children.end());
    return id;
}

HierarchicalSearcher::Pick HierarchicalSearcher::argmax(std::span<const cplx> r) const { return argmax(r, *dict_); }

namespace {

constexpr std::size_t kMaxFanout = 32;

// one pass over r for a whole sibling group; per-vector accumulation order
// matches dotc() exactly
std::size_t group_argmax(const cplx* const* vectors, std::size_t count, std::span<const cplx> r) {
    double acc_re[kMaxFanout] = {0.0};
    double acc_im[kMaxFanout] = {0.0};
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double rr = r[k].real(), ri = r[k].imag();
        for (std::size_t c = 0; c < count; ++c) {
            const double vr = vectors[c][k].real(), vi = vectors[c][k].imag();
            acc_re[c] += vr * rr + vi * ri;
            acc_im[c] += vr * ri - vi * rr;
        }
    }
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t c = 0; c < count; ++c) {
        const double val = acc_re[c] * acc_re[c] + acc_im[c] * acc_im[c];
        if (val > best_val) {
            best_val = val;
            best = c;
        }
    }
    return best;
}

}  // namespace

HierarchicalSearcher::Pick HierarchicalSearcher::argmax(std::span<const cplx> r, const Dictionary& dict) const {
    if (dict.n_atoms != dict_->n_atoms || dict.n_rows != n_rows_)
        throw config_error("dictionary shape does not match the hierarchical search tree");
    Pick pick;
    const cplx* group[kMaxFanout];
    const Node* node = &nodes_.front();
    while (node->n_children != 0) {
        std::size_t count = 0;
        for (std::uint32_t c = 0; c < node->n_children; ++c) {
            const Node& cn = nodes_[child_ids_[node->child_begin + c]];
            if (count < kMaxFanout) group[count++] = metas_.data() + static_cast<std::size_t>(cn.meta_offset) * n_rows_;
        }
        pick.n_correlations += count;
        const std::size_t best = group_argmax(group, count, r);
        node = &nodes_[child_ids_[node->child_begin + best]];
    }

    std::size_t count = 0;
    for (std::size_t a = node->lo; a < node->hi && count < kMaxFanout; ++a) group[count++] = dict.col(a);
    pick.n_correlations += count;
    pick.index = node->lo + group_argmax(group, count, r);
    return pick;
}

std::pair<std::size_t, std::size_t> hierarchical_argmax(const Dictionary& dict, std::span<const cplx> r,
                                                        const HierarchyConfig& cfg) {
    const HierarchicalSearcher searcher(dict, cfg);
    const auto pick = searcher.argmax(r);
    return {pick.index, pick.n_correlations};
}

namespace detail {

std::size_t exhaustive_argmax(const Dictionary& dict, std::span<const cplx> r) {
    double best_val = -1.0;
    std::size_t best = 0;
    for (std::size_t a = 0; a < dict.n_atoms; ++a) {
        const double val = std::norm(dotc(dict.column(a), r));
        if (val > best_val) {
            best_val = val;
            best = a;
        }
    }
    return best;
}

PursuitCore pursuit_core(const Dictionary& dict, std::span<const cplx> x_unit, double eps, std::size_t max_iter,
                         const HierarchicalSearcher* searcher) {
    PursuitCore core;
    core.residual.assign(x_unit.begin(), x_unit.end());
    double r2 = norm2(core.residual);

    while (r2 > eps && r2 > kResidualEnergyFloor) {
        if (core.indices.size() >= max_iter) {
            core.truncated = true;
            break;
        }
        std::size_t pick;
        if (searcher != nullptr) {
            const auto p = searcher->argmax(core.residual, dict);
            pick = p.index;
            core.n_correlations += p.n_correlations;
        } else {
            pick = exhaustive_argmax(dict, core.residual);
            core.n_correlations += dict.n_atoms;
        }
        const auto atom = dict.column(pick);
        const cplx c = dotc(atom, core.residual);
        axpy(-c, atom, core.residual);
        core.indices.push_back(pick);
        core.coeffs.push_back(c);
        r2 = norm2(core.residual);
    }
    return core;
}

}  // namespace detail

namespace {

PursuitResult run_pursuit(const Dictionary& dict, std::span<const cplx> x, double sigma2, std::size_t max_iter,
                          const HierarchicalSearcher* searcher) {
    if (dict.n_atoms == 0) throw config_error("pursuit needs a non-empty dictionary");
    if (max_iter < 1) throw config_error("pursuit needs max_iter >= 1");
    const double x_norm = norm(x);
    const double eps = sc2_threshold(sigma2, dict.n_rows, x);  // throws on zero input

    cvec x_unit(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) x_unit[k] = x[k] / x_norm;

    auto core = detail::pursuit_core(dict, x_unit, eps, max_iter, searcher);

    PursuitResult result;
    result.n_iterations = core.indices.size();
    result.n_correlations = core.n_correlations;
    result.truncated = core.truncated;
    result.selected.reserve(core.indices.size());
    for (std::size_t t = 0; t < core.indices.size(); ++t) result.selected.emplace_back(core.indices[t], core.coeffs[t]);
    result.residual.resize(x.size());
    result.h_hat.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        result.residual[k] = x_norm * core.residual[k];
        result.h_hat[k] = x[k] - result.residual[k];
    }
    return result;
}

}  // namespace

PursuitResult mp_denoise(const Dictionary& dict, std::span<const cplx> x, double sigma2, std::size_t max_iter) {
    return run_pursuit(dict, x, sigma2, max_iter, nullptr);
}

PursuitResult mp_denoise_hierarchical(const Dictionary& dict, std::span<const cplx> x, double sigma2,
                                      std::size_t max_iter, const HierarchyConfig& cfg) {
    const HierarchicalSearcher searcher(dict, cfg);
    return run_pursuit(dict, x, sigma2, max_iter, &searcher);
}

PursuitResult mp_denoise_hierarchical(const Dictionary& dict, std::span<const cplx> x, double sigma2,
                                      std::size_t max_iter, const HierarchicalSearcher& searcher) {
    return run_pursuit(dict, x, sigma2, max_iter, &searcher);
}

std::size_t optimal_branching(std::size_t n_atoms) {
    if (n_atoms <= 1) throw config_error("optimal branching needs more than one atom");
    const double log_a = std::log(static_cast<double>(n_atoms));
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_n = 2;
    for (std::size_t n = 2; n <= 16; ++n) {
        const double cost = static_cast<double>(n) * log_a / std::log(static_cast<double>(n));
        if (cost < best_cost) {
            best_cost = cost;
            best_n = n;
        }
    }
    return best_n;
}

}  // namespace chanest
