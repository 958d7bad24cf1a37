#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "phasespace/grid.hpp"
#include "phasespace/states.hpp"

namespace phasespace::io {

// Binary grid format:
//   16-byte magic "PHSPGRID01" + six NUL bytes,
//   u32 n_z, u32 n_p (little endian), u8 axis tag {0:(z,p), 1:(z,r), 2:(x,y)},
//   u8 complex flag, 2 zero pad bytes, f64 z_min, f64 length_z,
//   row-major f64 values (re/im interleaved when complex).
inline constexpr char kMagic[16] = {'P', 'H', 'S', 'P', 'G', 'R', 'I', 'D',
                                    '0', '1', 0, 0, 0, 0, 0, 0};

struct RawGridFile {
    std::uint32_t n_z = 0;
    std::uint32_t n_p = 0;
    std::uint8_t axis_tag = 0;
    bool is_complex = false;
    double z_min = 0.0;
    double length_z = 0.0;
    Matrix values;  // n_z x n_p
};

namespace detail {

template <typename T>
void write_le(std::ofstream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

} // namespace detail

inline void write_grid_file(const std::string& path, const RawGridFile& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(kMagic, 16);
    detail::write_le<std::uint32_t>(out, f.n_z);
    detail::write_le<std::uint32_t>(out, f.n_p);
    detail::write_le<std::uint8_t>(out, f.axis_tag);
    detail::write_le<std::uint8_t>(out, f.is_complex ? 1 : 0);
    detail::write_le<std::uint16_t>(out, 0);
    detail::write_le<double>(out, f.z_min);
    detail::write_le<double>(out, f.length_z);
    for (std::uint32_t i = 0; i < f.n_z; ++i)
        for (std::uint32_t j = 0; j < f.n_p; ++j) {
            detail::write_le<double>(out, f.values(i, j).real());
            if (f.is_complex) detail::write_le<double>(out, f.values(i, j).imag());
        }
    if (!out) throw IoError("short write: " + path);
}

inline RawGridFile read_grid_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    char magic[16];
    in.read(magic, 16);
    if (!in || std::memcmp(magic, kMagic, 16) != 0)
        throw IoError("not a grid file (bad magic): " + path);
    RawGridFile f;
    f.n_z = detail::read_le<std::uint32_t>(in);
    f.n_p = detail::read_le<std::uint32_t>(in);
    f.axis_tag = detail::read_le<std::uint8_t>(in);
    f.is_complex = detail::read_le<std::uint8_t>(in) != 0;
    detail::read_le<std::uint16_t>(in);  // pad
    f.z_min = detail::read_le<double>(in);
    f.length_z = detail::read_le<double>(in);
    if (f.n_z == 0 || f.n_p == 0 || f.n_z > (1u << 20) || f.n_p > (1u << 20))
        throw IoError("implausible grid dimensions in " + path);
    f.values.resize(f.n_z, f.n_p);
    for (std::uint32_t i = 0; i < f.n_z; ++i)
        for (std::uint32_t j = 0; j < f.n_p; ++j) {
            const double re = detail::read_le<double>(in);
            const double im = f.is_complex ? detail::read_le<double>(in) : 0.0;
            f.values(i, j) = Complex(re, im);
        }
    if (!in) throw IoError("short read: " + path);
    return f;
}

inline void write_field(const std::string& path, const Field2D& f, bool as_complex = true) {
    RawGridFile raw;
    raw.n_z = f.grid.n_z;
    raw.n_p = f.grid.n_p;
    raw.axis_tag = f.axis == AxisKind::ZP ? 0 : (f.axis == AxisKind::ZR ? 1 : 2);
    raw.is_complex = as_complex;
    raw.z_min = f.grid.z_min;
    raw.length_z = f.grid.length_z;
    raw.values = f.values;
    write_grid_file(path, raw);
}

inline void write_quantum_state(const std::string& path, const QuantumWaveFunction& psi) {
    RawGridFile raw;
    raw.n_z = psi.size();
    raw.n_p = 1;
    raw.axis_tag = 2;
    raw.is_complex = true;
    raw.z_min = psi.z_min;
    raw.length_z = psi.size() * psi.dz;
    raw.values = psi.values;
    write_grid_file(path, raw);
}

/// CSV writer: header row, '.' decimal point, 17 significant digits
/// (round-trip exact for f64), no locale surprises.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw IoError("cannot open for writing: " + path);
        for (size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        char buf[40];
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
            out_ << buf;
        }
        out_ << '\n';
    }

    void close() {
        out_.flush();
        if (!out_) throw IoError("CSV write failed");
        out_.close();
    }

private:
    std::ofstream out_;
};

} // namespace phasespace::io
