#include "tposeen/field_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tposeen {

namespace {

constexpr char kMagic[7] = {'T', 'P', 'O', 'S', 'N', '1', '\n'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}

double read_f64(std::istream& is) {
    std::uint64_t bits = read_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

// ascending-coordinate axis index -> FFT layout index
inline int fft_index(int a, int n) {
    int shifted = a - n / 2;  // coordinate (a - n/2) * h
    return shifted < 0 ? shifted + n : shifted;
}

}  // namespace

void dump_field(const TimePeriodicField& u, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("dump_field: cannot open " + path);
    os.write(kMagic, sizeof(kMagic));
    write_u64(os, static_cast<std::uint64_t>(u.k_max));
    write_u64(os, static_cast<std::uint64_t>(u.grid.n));
    write_u64(os, 0);
    write_f64(os, u.grid.half_length);
    write_f64(os, u.lambda);
    write_f64(os, u.period);
    const int n = u.grid.n;
    const std::size_t nn = u.grid.nodes();
    for (int k = -u.k_max; k <= u.k_max; ++k) {
        const auto& mode = u.modes[std::abs(k)];
        const bool conj = k < 0;
        for (int a3 = 0; a3 < n; ++a3)
            for (int a2 = 0; a2 < n; ++a2)
                for (int a1 = 0; a1 < n; ++a1) {
                    std::size_t idx =
                        u.grid.index(fft_index(a1, n), fft_index(a2, n), fft_index(a3, n));
                    for (int c = 0; c < 3; ++c) {
                        Complex v = mode[c * nn + idx];
                        if (conj) v = std::conj(v);
                        write_f64(os, v.real());
                        write_f64(os, v.imag());
                    }
                }
    }
    if (!os) throw std::runtime_error("dump_field: write failure on " + path);
}

TimePeriodicField load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_field: cannot open " + path);
    char magic[7];
    is.read(magic, 7);
    if (!is || std::memcmp(magic, kMagic, 7) != 0)
        throw std::runtime_error("load_field: bad magic in " + path);
    TimePeriodicField u;
    u.k_max = static_cast<int>(read_u64(is));
    int n = static_cast<int>(read_u64(is));
    read_u64(is);  // reserved
    double L = read_f64(is);
    u.lambda = read_f64(is);
    u.period = read_f64(is);
    u.grid = GridSpec{n, L};
    const std::size_t nn = u.grid.nodes();
    u.modes.assign(u.k_max + 1, std::vector<Complex>(3 * nn));
    for (int k = -u.k_max; k <= u.k_max; ++k) {
        const bool keep = k >= 0;
        for (int a3 = 0; a3 < n; ++a3)
            for (int a2 = 0; a2 < n; ++a2)
                for (int a1 = 0; a1 < n; ++a1) {
                    std::size_t idx =
                        u.grid.index(fft_index(a1, n), fft_index(a2, n), fft_index(a3, n));
                    for (int c = 0; c < 3; ++c) {
                        double re = read_f64(is);
                        double im = read_f64(is);
                        if (keep) u.modes[k][c * nn + idx] = Complex(re, im);
                    }
                }
    }
    if (!is) throw std::runtime_error("load_field: truncated file " + path);
    return u;
}

}  // namespace tposeen
