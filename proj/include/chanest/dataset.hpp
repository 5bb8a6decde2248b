#pragma once

#include <string>
#include <vector>

#include "chanest/signal.hpp"
#include "chanest/types.hpp"

namespace chanest {

// "CHD1" channel dataset, binary little-endian:
//   magic "CHD1", u32 N, u32 count, f64 center_freq_hz, f64 bandwidth_hz,
//   then per record: u32 L_p, L_p x (f64 re alpha, f64 im alpha, f64 tau_s),
//   N x (f64 re h, f64 im h).

struct DatasetHeader {
    std::size_t n_subcarriers = 0;
    std::size_t count = 0;
    double center_freq_hz = 0.0;
    double bandwidth_hz = 0.0;
};

void save_dataset(const std::string& path, const SystemConfig& cfg, std::span<const ChannelSample> samples);

std::pair<DatasetHeader, std::vector<ChannelSample>> load_dataset(const std::string& path);

// CSV import for externally generated channels: one row per channel,
// 2N interleaved re/im values; path lists are unknown and left empty.
std::vector<ChannelSample> load_csv_channels(const std::string& path, std::size_t n_subcarriers);

}  // namespace chanest
