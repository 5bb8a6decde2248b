#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "chanest/dataset.hpp"

using namespace chanest;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

SystemConfig make_cfg() {
    SystemConfig cfg;
    cfg.n_subcarriers = 32;
    cfg.center_freq_hz = 3.4e9;
    cfg.bandwidth_hz = 50e6;
    return cfg;
}

std::vector<ChannelSample> make_samples(const SystemConfig& cfg, std::size_t count) {
    const SubcarrierGrid grid = build_nominal_grid(cfg);
    const AntennaGains gains = nominal_gains(cfg.n_subcarriers);
    Rng rng(99);
    PathProfile profile;
    profile.tau_max_s = 1e-6;
    std::vector<ChannelSample> samples;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t n_paths = 1 + static_cast<std::size_t>(rng.uniform01() * 9.0);
        samples.push_back(generate_channel(grid, gains, n_paths, rng, profile));
    }
    return samples;
}

}  // namespace

TEST_CASE("chd1 roundtrip is bit exact") {
    const SystemConfig cfg = make_cfg();
    const auto samples = make_samples(cfg, 100);
    TempFile file("roundtrip.chd1");
    save_dataset(file.path, cfg, samples);

    const auto [header, loaded] = load_dataset(file.path);
    CHECK(header.n_subcarriers == cfg.n_subcarriers);
    CHECK(header.count == samples.size());
    CHECK(header.center_freq_hz == cfg.center_freq_hz);
    CHECK(header.bandwidth_hz == cfg.bandwidth_hz);
    REQUIRE(loaded.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(loaded[i].h == samples[i].h);
        REQUIRE(loaded[i].paths.size() == samples[i].paths.size());
        for (std::size_t l = 0; l < samples[i].paths.size(); ++l) {
            CHECK(loaded[i].paths[l].alpha == samples[i].paths[l].alpha);
            CHECK(loaded[i].paths[l].tau_s == samples[i].paths[l].tau_s);
        }
    }
}

TEST_CASE("a truncated dataset names the missing records") {
    const SystemConfig cfg = make_cfg();
    const auto samples = make_samples(cfg, 10);
    TempFile file("truncated.chd1");
    save_dataset(file.path, cfg, samples);

    const auto size = std::filesystem::file_size(file.path);
    std::filesystem::resize_file(file.path, size - 64);

    try {
        load_dataset(file.path);
        FAIL("expected an io_error");
    } catch (const io_error& e) {
        const std::string what = e.what();
        CHECK(what.find("10 records") != std::string::npos);
        CHECK(what.find("only 9") != std::string::npos);
        CHECK(what.find("byte offset") != std::string::npos);
    }
}

TEST_CASE("a wrong magic is rejected") {
    TempFile file("badmagic.chd1");
    std::ofstream os(file.path, std::ios::binary);
    os << "NOPE" << std::string(64, '\0');
    os.close();
    CHECK_THROWS_AS(load_dataset(file.path), io_error);
    CHECK_THROWS_AS(load_dataset("does_not_exist.chd1"), io_error);
}

TEST_CASE("csv import reads interleaved re/im rows") {
    TempFile file("channels.csv");
    {
        std::ofstream os(file.path);
        os << "1.0,0.5,-2.0,0.25\n";
        os << "0.0,0.0,3.5,-1.5\n";
    }
    const auto channels = load_csv_channels(file.path, 2);
    REQUIRE(channels.size() == 2);
    CHECK(channels[0].h[0] == cplx{1.0, 0.5});
    CHECK(channels[0].h[1] == cplx{-2.0, 0.25});
    CHECK(channels[1].h[1] == cplx{3.5, -1.5});
    CHECK(channels[0].paths.empty());
}

TEST_CASE("csv rows with the wrong column count cite the expected width") {
    TempFile file("badcols.csv");
    {
        std::ofstream os(file.path);
        os << "1.0,0.5,-2.0,0.25,9.9\n";  // 2N+1 columns
    }
    try {
        load_csv_channels(file.path, 2);
        FAIL("expected an io_error");
    } catch (const io_error& e) {
        const std::string what = e.what();
        CHECK(what.find("expected 4") != std::string::npos);
        CHECK(what.find("got 5") != std::string::npos);
    }

    TempFile garbled("garbled.csv");
    {
        std::ofstream os(garbled.path);
        os << "1.0,abc,2.0,3.0\n";
    }
    CHECK_THROWS_AS(load_csv_channels(garbled.path, 2), io_error);
}
