#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "chanest/pursuit.hpp"
#include "chanest/signal.hpp"

using namespace chanest;

namespace {

SystemConfig paper_cfg() {
    SystemConfig cfg;
    cfg.n_subcarriers = 256;
    cfg.center_freq_hz = 3.4e9;
    cfg.bandwidth_hz = 50e6;
    return cfg;
}

struct Setup {
    SystemConfig cfg;
    SubcarrierGrid grid;
    AntennaGains gains;
    std::vector<double> delays;
    Dictionary dict;
};

Setup nominal_setup(std::size_t n_atoms) {
    Setup s;
    s.cfg = paper_cfg();
    s.grid = build_nominal_grid(s.cfg);
    s.gains = nominal_gains(s.cfg.n_subcarriers);
    s.delays = build_delay_grid(s.cfg, n_atoms, 4);
    s.dict = build_dictionary(s.grid, s.gains, s.delays);
    return s;
}

cvec on_grid_channel(const Setup& s, const std::vector<std::pair<std::size_t, cplx>>& paths) {
    cvec h(s.cfg.n_subcarriers, cplx{0.0, 0.0});
    for (const auto& [bin, alpha] : paths) axpy(alpha, frv(s.grid, s.gains, s.delays[bin]), h);
    return h;
}

}  // namespace

TEST_CASE("sc2 threshold formula") {
    cvec x = {cplx{2.0, 0.0}, cplx{0.0, 2.0}};  // ||x||^2 = 8
    CHECK(sc2_threshold(0.0, 4, x) == 0.0);
    CHECK(sc2_threshold(1.0, 4, x) == doctest::Approx(0.5));
    cvec zero(4, cplx{0.0, 0.0});
    CHECK_THROWS_AS(sc2_threshold(1.0, 4, zero), numeric_error);
}

TEST_CASE("sc2 threshold expectation at 10 dB snr") {
    const Setup s = nominal_setup(64);
    Rng rng(3);
    PathProfile profile;
    profile.tau_max_s = s.delays.back();
    double acc = 0.0;
    const int draws = 2000;
    for (int i = 0; i < draws; ++i) {
        const ChannelSample ch = generate_channel(s.grid, s.gains, 5, rng, profile);
        const NoisyObservation obs = add_noise(ch, 10.0, rng);
        acc += sc2_threshold(obs.noise_var, s.cfg.n_subcarriers, obs.x);
    }
    CHECK(acc / draws == doctest::Approx(1.0 / 11.0).epsilon(0.05));
}

TEST_CASE("noiseless on-grid single path recovers in one iteration") {
    const Setup s = nominal_setup(990);
    const std::size_t true_bin = 137;
    const cvec x = on_grid_channel(s, {{true_bin, cplx{0.8, -0.6}}});

    const PursuitResult result = mp_denoise(s.dict, x, 0.0, 10);
    REQUIRE(result.n_iterations == 1);
    CHECK(result.selected[0].first == true_bin);
    CHECK(result.n_correlations == s.dict.n_atoms);
    CHECK_FALSE(result.truncated);

    double err = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) err += std::norm(result.h_hat[k] - x[k]);
    CHECK(err / norm2(x) < 1e-20);
}

TEST_CASE("input orthogonal to every atom runs to max_iter") {
    SystemConfig cfg;
    cfg.n_subcarriers = 4;
    cfg.center_freq_hz = 0.0;
    cfg.bandwidth_hz = 4.0;
    const SubcarrierGrid grid = build_nominal_grid(cfg);
    const AntennaGains gains = nominal_gains(4);
    // delays 0 and 0.25 give exactly orthogonal atoms on this grid
    const Dictionary dict = build_dictionary(grid, gains, {0.0, 0.25});

    // orthogonalize a probe against both atoms
    cvec x = {cplx{1.0, 0.0}, cplx{0.5, 0.3}, cplx{-0.2, 0.1}, cplx{0.0, -0.7}};
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (std::size_t a = 0; a < dict.n_atoms; ++a) {
            const cplx c = dotc(dict.column(a), x);
            axpy(-c, dict.column(a), x);
        }
    }
    for (std::size_t a = 0; a < dict.n_atoms; ++a) CHECK(std::abs(dotc(dict.column(a), x)) < 1e-12);

    const PursuitResult result = mp_denoise(dict, x, 0.0, 5);
    CHECK(result.n_iterations == 5);
    CHECK(result.truncated);
    // only floating-point dust was removed
    CHECK(norm2(result.h_hat) / norm2(x) < 1e-20);
}

TEST_CASE("three separated on-grid paths need exactly three iterations") {
    const Setup s = nominal_setup(990);
    // pairwise bin separations that are multiples of 4 are exactly orthogonal
    // on the nominal grid with flat gains
    const std::vector<std::pair<std::size_t, cplx>> paths = {
        {100, cplx{1.0, 0.0}}, {400, cplx{0.0, 0.8}}, {800, cplx{-0.45, 0.45}}};
    const cvec x = on_grid_channel(s, paths);

    const PursuitResult result = mp_denoise(s.dict, x, 0.0, 10);
    REQUIRE(result.n_iterations == 3);
    std::set<std::size_t> selected;
    for (const auto& [idx, c] : result.selected) selected.insert(idx);
    CHECK(selected == std::set<std::size_t>{100, 400, 800});
    CHECK(result.n_correlations == 3 * s.dict.n_atoms);
}

TEST_CASE("reconstruction identity and residual monotonicity") {
    const Setup s = nominal_setup(256);
    Rng rng(17);
    PathProfile profile;
    profile.tau_max_s = s.delays.back();
    for (int rep = 0; rep < 10; ++rep) {
        const ChannelSample ch = generate_channel(s.grid, s.gains, 6, rng, profile);
        const NoisyObservation obs = add_noise(ch, 8.0, rng);
        const PursuitResult result = mp_denoise(s.dict, obs.x, obs.noise_var, 10);

        // h_hat is defined as x - residual; the identity is arithmetic
        for (std::size_t k = 0; k < obs.x.size(); ++k) {
            const cplx recomputed = obs.x[k] - result.residual[k];
            CHECK(result.h_hat[k] == recomputed);
        }

        // replay the updates to watch the residual energies
        const double x_norm = norm(obs.x);
        cvec r(obs.x.size());
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = obs.x[k] / x_norm;
        double prev = norm2(r);
        for (const auto& [idx, c] : result.selected) {
            axpy(-c, s.dict.column(idx), r);
            const double cur = norm2(r);
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
    }
}

TEST_CASE("energy splits between estimate and residual") {
    const Setup s = nominal_setup(990);
    const cvec x = on_grid_channel(s, {{100, cplx{1.0, 0.0}}, {400, cplx{0.3, 0.4}}});
    const double x_norm = norm(x);

    const PursuitResult result = mp_denoise(s.dict, x, 1e-3, 2);
    cvec xu(x.size()), hu(x.size()), ru(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        xu[k] = x[k] / x_norm;
        ru[k] = result.residual[k] / x_norm;
        hu[k] = xu[k] - ru[k];
    }
    const double cross = 2.0 * dotc(hu, ru).real();
    CHECK(norm2(xu) == doctest::Approx(norm2(hu) + norm2(ru) + cross).epsilon(1e-12));
    // selected atoms orthogonal here, so the cross term vanishes
    CHECK(std::abs(cross) < 1e-10);
}

TEST_CASE("pursuit is deterministic") {
    const Setup s = nominal_setup(256);
    Rng rng(29);
    PathProfile profile;
    profile.tau_max_s = s.delays.back();
    const ChannelSample ch = generate_channel(s.grid, s.gains, 7, rng, profile);
    const NoisyObservation obs = add_noise(ch, 10.0, rng);

    const PursuitResult a = mp_denoise(s.dict, obs.x, obs.noise_var, 10);
    const PursuitResult b = mp_denoise(s.dict, obs.x, obs.noise_var, 10);
    CHECK(a.h_hat == b.h_hat);
    CHECK(a.selected == b.selected);
    CHECK(a.n_correlations == b.n_correlations);
}

TEST_CASE("meta-atom geometry over an interval") {
    const Setup s = nominal_setup(990);
    const double span = s.delays.back();
    const std::vector<MetaAtom> metas = build_meta_atoms(s.grid, 0.0, span, 2);
    REQUIRE(metas.size() == 2);
    CHECK(metas[0].tau_center_s == doctest::Approx(span / 4.0));
    CHECK(metas[1].tau_center_s == doctest::Approx(3.0 * span / 4.0));
    CHECK(metas[0].width_s == doctest::Approx(span / 2.0));
    for (const MetaAtom& m : metas) CHECK(std::abs(norm(m.vector) - 1.0) < 1e-10);

    CHECK_THROWS_AS(build_meta_atoms(s.grid, 1.0, 1.0, 2), config_error);
}

TEST_CASE("meta-atom correlation response forms a window in delay") {
    const Setup s = nominal_setup(990);
    const double dtau = s.delays[1] - s.delays[0];
    const double span = s.delays.back();

    const double width = 80.0 * dtau;
    const double center = span / 2.0;
    const MetaAtom meta = make_meta_atom(s.grid, center, width);

    const std::vector<double> response = meta_correlation_response(meta, s.grid, s.gains, s.delays);
    const double peak = *std::max_element(response.begin(), response.end());

    double in_sum = 0.0, out_sum = 0.0;
    std::size_t in_count = 0, out_count = 0;
    for (std::size_t a = 0; a < s.delays.size(); ++a) {
        if (std::abs(s.delays[a] - center) <= width / 2.0) {
            in_sum += response[a];
            ++in_count;
        } else {
            out_sum += response[a];
            ++out_count;
        }
    }
    CHECK(in_sum / in_count > 3.0 * (out_sum / out_count));

    // response near the center is close to the sweep maximum
    std::size_t center_bin = static_cast<std::size_t>(std::round(center / dtau));
    CHECK(response[center_bin] > 0.9 * peak);

    // and far outside the window it has decayed
    const std::size_t far_bin = static_cast<std::size_t>(std::round((center + 2.0 * width) / dtau));
    CHECK(response[far_bin] < 0.3 * peak);
}

namespace {

double measured_width(const SubcarrierGrid& grid, const AntennaGains& gains, double center, double width,
                      double sweep_step, double span) {
    const MetaAtom meta = make_meta_atom(grid, center, width);
    std::vector<double> taus;
    for (double t = 0.0; t <= span; t += sweep_step) taus.push_back(t);
    const std::vector<double> response = meta_correlation_response(meta, grid, gains, taus);
    const double peak = *std::max_element(response.begin(), response.end());
    // contiguous -6 dB region around the center
    const std::size_t center_idx = static_cast<std::size_t>(std::round(center / sweep_step));
    std::size_t lo = center_idx, hi = center_idx;
    while (lo > 0 && response[lo - 1] >= 0.5 * peak) --lo;
    while (hi + 1 < response.size() && response[hi + 1] >= 0.5 * peak) ++hi;
    return static_cast<double>(hi - lo) * sweep_step;
}

}  // namespace

TEST_CASE("window support width tracks the sinc width parameter") {
    const Setup s = nominal_setup(990);
    const double dtau = s.delays[1] - s.delays[0];
    const double span = s.delays.back();
    const double w1 = measured_width(s.grid, s.gains, span / 2.0, 40.0 * dtau, dtau / 4.0, span);
    const double w2 = measured_width(s.grid, s.gains, span / 2.0, 80.0 * dtau, dtau / 4.0, span);
    CHECK(std::abs(w1 - 40.0 * dtau) <= dtau);
    CHECK(std::abs(w2 - 80.0 * dtau) <= dtau);
    CHECK(std::abs(w2 - 2.0 * w1) <= 2.0 * dtau);
}

TEST_CASE("narrow meta-atoms tend to the pure frv response") {
    const Setup s = nominal_setup(256);
    const double center = s.delays[100];
    const MetaAtom narrow = make_meta_atom(s.grid, center, 1e-12);

    // reference: correlation against the unit-norm frv at the same delay
    cvec ref = frv(s.grid, s.gains, center);
    const double inv = 1.0 / norm(ref);
    for (cplx& z : ref) z *= inv;

    const std::vector<double> response = meta_correlation_response(narrow, s.grid, s.gains, s.delays);
    for (std::size_t a = 0; a < s.delays.size(); a += 16) {
        const double expected = std::abs(dotc(ref, frv(s.grid, s.gains, s.delays[a])));
        CHECK(response[a] == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("hierarchical argmax matches exhaustive on clean single paths") {
    const Setup s = nominal_setup(990);
    const cvec x = on_grid_channel(s, {{413, cplx{1.0, 0.4}}});
    cvec xu(x.size());
    const double inv = 1.0 / norm(x);
    for (std::size_t k = 0; k < x.size(); ++k) xu[k] = x[k] * inv;

    const auto [index, count] = hierarchical_argmax(s.dict, xu, HierarchyConfig{3});
    CHECK(index == detail::exhaustive_argmax(s.dict, xu));
    CHECK(index == 413);
    CHECK(count <= 3 * 7 + 3);  // 3 ceil(log3 990) + 3 = 24
}

TEST_CASE("hierarchical argmax with A = n degenerates to exhaustive") {
    const Setup base = nominal_setup(990);
    const std::vector<double> three(base.delays.begin(), base.delays.begin() + 3);
    const Dictionary dict = build_dictionary(base.grid, base.gains, three);
    const cvec x = frv(base.grid, base.gains, three[2]);
    cvec xu(x.size());
    const double inv = 1.0 / norm(x);
    for (std::size_t k = 0; k < x.size(); ++k) xu[k] = x[k] * inv;

    const auto [index, count] = hierarchical_argmax(dict, xu, HierarchyConfig{3});
    CHECK(index == 2);
    CHECK(count == 3);  // single leaf, no meta levels
}

TEST_CASE("hierarchical and exhaustive agree on at least 99% of random cases") {
    SystemConfig cfg;
    cfg.n_subcarriers = 64;
    cfg.center_freq_hz = 3.4e9;
    cfg.bandwidth_hz = 50e6;
    const SubcarrierGrid grid = build_nominal_grid(cfg);
    const AntennaGains gains = nominal_gains(cfg.n_subcarriers);

    Rng rng(101);
    std::size_t agree = 0, total = 0;
    for (std::size_t n_atoms : {243u, 256u}) {
        const std::vector<double> delays = build_delay_grid(cfg, n_atoms, 4);
        const Dictionary dict = build_dictionary(grid, gains, delays);
        const HierarchicalSearcher h2(dict, HierarchyConfig{2});
        const HierarchicalSearcher h3(dict, HierarchyConfig{3});
        for (int rep = 0; rep < 500; ++rep) {
            const std::size_t bin = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n_atoms));
            const double phi = rng.uniform(0.0, 6.28318);
            cvec x = frv(grid, gains, delays[std::min(bin, n_atoms - 1)]);
            const cplx rot{std::cos(phi), std::sin(phi)};
            for (cplx& z : x) z *= rot;
            const double inv = 1.0 / norm(x);
            for (cplx& z : x) z *= inv;

            const std::size_t truth = detail::exhaustive_argmax(dict, x);
            total += 2;
            if (h2.argmax(x).index == truth) ++agree;
            if (h3.argmax(x).index == truth) ++agree;
        }
    }
    CHECK(static_cast<double>(agree) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("hierarchical pursuit matches exhaustive selection on separated paths") {
    const Setup s = nominal_setup(990);
    const std::vector<std::pair<std::size_t, cplx>> paths = {
        {100, cplx{1.0, 0.0}}, {400, cplx{0.0, 0.8}}, {800, cplx{-0.45, 0.45}}};
    const cvec x = on_grid_channel(s, paths);

    const PursuitResult exhaustive = mp_denoise(s.dict, x, 0.0, 10);
    const PursuitResult h3 = mp_denoise_hierarchical(s.dict, x, 0.0, 10, HierarchyConfig{3});

    std::set<std::size_t> set_a, set_b;
    for (const auto& [idx, c] : exhaustive.selected) set_a.insert(idx);
    for (const auto& [idx, c] : h3.selected) set_b.insert(idx);
    CHECK(set_a == set_b);

    // per-iteration correlation budget
    CHECK(h3.n_correlations <= h3.n_iterations * (3 * 7 + 3));
    CHECK(h3.n_correlations < exhaustive.n_correlations / 10);
}

TEST_CASE("optimal branching is 3") {
    for (std::size_t a : {2u, 10u, 990u, 50000u}) CHECK(optimal_branching(a) == 3);
    CHECK_THROWS_AS(optimal_branching(1), config_error);

    // n / ln n at the candidate integers
    const double c2 = 2.0 / std::log(2.0);
    const double c3 = 3.0 / std::log(3.0);
    const double c4 = 4.0 / std::log(4.0);
    CHECK(c2 == doctest::Approx(2.885).epsilon(1e-3));
    CHECK(c3 == doctest::Approx(2.731).epsilon(1e-3));
    CHECK(c4 == doctest::Approx(2.885).epsilon(1e-3));
    CHECK(c3 < c2);
    CHECK(c3 < c4);
}
