#pragma once

// Little-endian primitive encoding shared by the params and embedding-store formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace iovpr::detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    os.write(b, 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    os.write(b, 8);
}

inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

template <typename Error>
std::uint64_t get_le(std::istream& is, int bytes) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), bytes)) {
        throw Error("truncated file");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return v;
}

template <typename Error>
std::uint32_t get_u32(std::istream& is) {
    return static_cast<std::uint32_t>(get_le<Error>(is, 4));
}

template <typename Error>
std::uint64_t get_u64(std::istream& is) {
    return get_le<Error>(is, 8);
}

template <typename Error>
double get_f64(std::istream& is) {
    return std::bit_cast<double>(get_le<Error>(is, 8));
}

}  // namespace iovpr::detail
