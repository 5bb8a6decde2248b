#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "chanest/types.hpp"

namespace chanest::detail {

// little-endian scalar IO (host is little-endian; fields are written raw)

template <typename T>
void write_pod(std::ostream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& what) {
    const auto offset = is.tellg();
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is)
        throw io_error("truncated file: failed to read " + what + " at byte offset " +
                       std::to_string(static_cast<long long>(offset)));
    return value;
}

}  // namespace chanest::detail
