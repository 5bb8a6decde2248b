#include "chanest/dataset.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "chanest/binio.hpp"

namespace chanest {

using detail::read_pod;
using detail::write_pod;

void save_dataset(const std::string& path, const SystemConfig& cfg, std::span<const ChannelSample> samples) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open dataset file for writing: " + path);
    os.write("CHD1", 4);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.n_subcarriers));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(samples.size()));
    write_pod<double>(os, cfg.center_freq_hz);
    write_pod<double>(os, cfg.bandwidth_hz);
    for (const ChannelSample& s : samples) {
        if (s.h.size() != cfg.n_subcarriers) throw io_error("channel length does not match the dataset header");
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.paths.size()));
        for (const PathComponent& p : s.paths) {
            write_pod<double>(os, p.alpha.real());
            write_pod<double>(os, p.alpha.imag());
            write_pod<double>(os, p.tau_s);
        }
        for (const cplx& z : s.h) {
            write_pod<double>(os, z.real());
            write_pod<double>(os, z.imag());
        }
    }
    if (!os) throw io_error("failed while writing dataset: " + path);
}

std::pair<DatasetHeader, std::vector<ChannelSample>> load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open dataset file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CHD1", 4) != 0) throw io_error("bad dataset magic in " + path);

    DatasetHeader header;
    header.n_subcarriers = read_pod<std::uint32_t>(is, "subcarrier count");
    header.count = read_pod<std::uint32_t>(is, "record count");
    header.center_freq_hz = read_pod<double>(is, "center frequency");
    header.bandwidth_hz = read_pod<double>(is, "bandwidth");

    std::vector<ChannelSample> samples;
    samples.reserve(header.count);
    for (std::size_t rec = 0; rec < header.count; ++rec) {
        try {
            ChannelSample s;
            const auto n_paths = read_pod<std::uint32_t>(is, "path count");
            s.paths.resize(n_paths);
            for (auto& p : s.paths) {
                const double re = read_pod<double>(is, "path gain (re)");
                const double im = read_pod<double>(is, "path gain (im)");
                p.alpha = {re, im};
                p.tau_s = read_pod<double>(is, "path delay");
            }
            s.h.resize(header.n_subcarriers);
            for (auto& z : s.h) {
                const double re = read_pod<double>(is, "channel entry (re)");
                const double im = read_pod<double>(is, "channel entry (im)");
                z = {re, im};
            }
            samples.push_back(std::move(s));
        } catch (const io_error& e) {
            throw io_error("truncated dataset " + path + ": header promises " + std::to_string(header.count) +
                           " records but only " + std::to_string(rec) + " could be read (" + e.what() + ")");
        }
    }
    return {header, std::move(samples)};
}

std::vector<ChannelSample> load_csv_channels(const std::string& path, std::size_t n_subcarriers) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open csv file: " + path);
    std::vector<ChannelSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            try {
                values.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw io_error("csv " + path + " line " + std::to_string(line_no) + ": cannot parse '" + field + "'");
            }
        }
        if (values.size() != 2 * n_subcarriers)
            throw io_error("csv " + path + " line " + std::to_string(line_no) + ": expected " +
                           std::to_string(2 * n_subcarriers) + " interleaved re/im values, got " +
                           std::to_string(values.size()));
        ChannelSample s;
        s.h.resize(n_subcarriers);
        for (std::size_t k = 0; k < n_subcarriers; ++k) s.h[k] = {values[2 * k], values[2 * k + 1]};
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace chanest
