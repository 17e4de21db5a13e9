#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "prhf/field.hpp"

namespace prhf {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u32le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64le(std::ostream& os, double v) {
    static_assert(sizeof(double) == 8);
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

} // namespace detail

/// Binary field snapshot. Layout: magic "PRHF1" (5 bytes), u32 LE n_per_axis,
/// f64 LE box_length, u8 space tag (0 = Real, 1 = Fourier), then n^3
/// interleaved (re, im) f64 LE, row-major with x fastest.
inline void write_snapshot(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("write_snapshot: cannot open " + path);
    os.write("PRHF1", 5);
    detail::put_u32le(os, static_cast<std::uint32_t>(f.grid().n()));
    detail::put_f64le(os, f.grid().box_length());
    const unsigned char tag = f.space() == Space::Real ? 0 : 1;
    os.write(reinterpret_cast<const char*>(&tag), 1);
    for (const auto& z : f.values()) {
        detail::put_f64le(os, z.real());
        detail::put_f64le(os, z.imag());
    }
    if (!os) throw IoError("write_snapshot: write failed for " + path);
}

inline Field read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("read_snapshot: cannot open " + path);
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, "PRHF1", 5) != 0)
        throw IoError("read_snapshot: bad magic in " + path);
    const int n = static_cast<int>(detail::get_u32le(is));
    const double L = detail::get_f64le(is);
    unsigned char tag;
    is.read(reinterpret_cast<char*>(&tag), 1);
    Grid3 g(n, L);
    Field f(g, tag == 0 ? Space::Real : Space::Fourier);
    for (auto& z : f.values()) {
        const double re = detail::get_f64le(is);
        const double im = detail::get_f64le(is);
        z = {re, im};
    }
    if (!is) throw IoError("read_snapshot: truncated file " + path);
    return f;
}

/// Comma-separated, header row, LF endings, 17 significant digits.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : os_(path, std::ios::binary) {
        if (!os_) throw IoError("CsvWriter: cannot open " + path);
    }
    void header(const std::vector<std::string>& cols) { row_text(cols); }
    void row_text(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cells[i];
        }
        os_ << '\n';
    }
    void row(const std::vector<double>& cells, const std::vector<std::string>& prefix = {}) {
        bool first = true;
        for (const auto& p : prefix) {
            if (!first) os_ << ',';
            os_ << p;
            first = false;
        }
        char buf[64];
        for (double c : cells) {
            if (!first) os_ << ',';
            std::snprintf(buf, sizeof buf, "%.17g", c);
            os_ << buf;
            first = false;
        }
        os_ << '\n';
    }

  private:
    std::ofstream os_;
};

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// FNV-1a 64-bit over a file's bytes (manifest bookkeeping).
inline std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("fnv1a_file: cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof buf);
        const std::streamsize got = is.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

} // namespace prhf
