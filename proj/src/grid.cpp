#include "dbec/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace dbec {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

} // namespace

GridPtr GridSpec::make(const std::array<int, 3>& n, const std::array<double, 3>& L) {
    for (int a = 0; a < 3; ++a) {
        if (n[a] < 8 || n[a] % 2 != 0)
            throw InvalidGrid("n[" + std::to_string(a) + "]=" + std::to_string(n[a]) +
                              " must be even and >= 8");
        if (!is_power_of_two(n[a]))
            throw InvalidGrid("n[" + std::to_string(a) + "]=" + std::to_string(n[a]) +
                              " must be a power of two");
        if (!(L[a] > 0.0))
            throw InvalidGrid("L[" + std::to_string(a) + "] must be positive");
    }
    auto g = std::shared_ptr<GridSpec>(new GridSpec());
    g->n = n;
    g->L = L;
    g->size = static_cast<std::size_t>(n[0]) * n[1] * n[2];
    g->dv = 1.0;
    g->dxi = 1.0;
    for (int a = 0; a < 3; ++a) {
        g->dx[a] = 2.0 * L[a] / n[a];
        g->dv *= g->dx[a];
        g->dxi *= M_PI / L[a];
        g->xi[a].resize(n[a]);
        for (int k = 0; k < n[a]; ++k) {
            int ks = (k < n[a] / 2) ? k : k - n[a];
            g->xi[a][k] = M_PI * ks / L[a];
        }
    }
    // Unaligned plans so std::vector storage can be used with the
    // new-array execute interface.
    std::vector<cplx> a(g->size), b(g->size);
    g->plan_fwd_ = fftw_plan_dft_3d(
        n[2], n[1], n[0], reinterpret_cast<fftw_complex*>(a.data()),
        reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    g->plan_inv_ = fftw_plan_dft_3d(
        n[2], n[1], n[0], reinterpret_cast<fftw_complex*>(a.data()),
        reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!g->plan_fwd_ || !g->plan_inv_) throw InvalidGrid("fftw plan creation failed");
    return g;
}

GridSpec::~GridSpec() {
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void GridSpec::forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_),
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void GridSpec::inverse(const cplx* in, cplx* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_inv_),
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    const double inv_n = 1.0 / static_cast<double>(size);
    for (std::size_t i = 0; i < size; ++i) out[i] *= inv_n;
}

GridPtr make_grid(const std::array<int, 3>& n, const std::array<double, 3>& L) {
    return GridSpec::make(n, L);
}

bool all_finite(const WaveField& u) {
    for (const cplx& v : u.data)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

void require_finite(const WaveField& u, const std::string& where) {
    if (!all_finite(u)) throw NonFiniteField(where);
}

WaveField transform(const WaveField& u, TransformDirection dir) {
    require_finite(u, "transform input");
    WaveField out(u.grid);
    if (dir == TransformDirection::Forward)
        u.grid->forward(u.data.data(), out.data.data());
    else
        u.grid->inverse(u.data.data(), out.data.data());
    return out;
}

std::vector<double> dipolar_multiplier(const GridSpec& grid) {
    std::vector<double> K(grid.size);
    const double c = 4.0 * M_PI / 3.0;
    for (int i3 = 0; i3 < grid.n[2]; ++i3) {
        const double xi3 = grid.xi[2][i3];
        for (int i2 = 0; i2 < grid.n[1]; ++i2) {
            const double xi2 = grid.xi[1][i2];
            for (int i1 = 0; i1 < grid.n[0]; ++i1) {
                const double xi1 = grid.xi[0][i1];
                const double r2 = xi1 * xi1 + xi2 * xi2 + xi3 * xi3;
                double v = 0.0;  // zero mode by convention
                if (r2 > 0.0) v = c * (2.0 * xi3 * xi3 - xi1 * xi1 - xi2 * xi2) / r2;
                K[grid.index(i1, i2, i3)] = v;
            }
        }
    }
    return K;
}

double discrete_mass(const WaveField& u) {
    double s = 0.0;
    for (const cplx& v : u.data) s += std::norm(v);
    return s * u.grid->dv;
}

void scale_field(WaveField& u, double factor) {
    for (cplx& v : u.data) v *= factor;
}

double spectral_tail_fraction_from_spectrum(const GridSpec& grid,
                                            const std::vector<cplx>& uhat) {
    double total = 0.0, tail = 0.0;
    const int c1 = grid.n[0] / 3, c2 = grid.n[1] / 3, c3 = grid.n[2] / 3;
    for (int i3 = 0; i3 < grid.n[2]; ++i3) {
        const int k3 = std::abs(i3 < grid.n[2] / 2 ? i3 : i3 - grid.n[2]);
        for (int i2 = 0; i2 < grid.n[1]; ++i2) {
            const int k2 = std::abs(i2 < grid.n[1] / 2 ? i2 : i2 - grid.n[1]);
            for (int i1 = 0; i1 < grid.n[0]; ++i1) {
                const int k1 = std::abs(i1 < grid.n[0] / 2 ? i1 : i1 - grid.n[0]);
                const double p = std::norm(uhat[grid.index(i1, i2, i3)]);
                total += p;
                if (k1 >= c1 || k2 >= c2 || k3 >= c3) tail += p;
            }
        }
    }
    return total > 0.0 ? tail / total : 0.0;
}

double spectral_tail_fraction(const WaveField& u) {
    WaveField uhat = transform(u, TransformDirection::Forward);
    return spectral_tail_fraction_from_spectrum(*u.grid, uhat.data);
}

namespace {
constexpr char kMagic[4] = {'D', 'B', 'E', 'C'};
constexpr std::uint32_t kVersion = 1;
} // namespace

void write_snapshot(const WaveField& u, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(kMagic, 4);
    std::uint32_t v = kVersion;
    f.write(reinterpret_cast<const char*>(&v), 4);
    for (int a = 0; a < 3; ++a) {
        std::uint32_t na = static_cast<std::uint32_t>(u.grid->n[a]);
        f.write(reinterpret_cast<const char*>(&na), 4);
    }
    for (int a = 0; a < 3; ++a)
        f.write(reinterpret_cast<const char*>(&u.grid->L[a]), 8);
    f.write(reinterpret_cast<const char*>(u.data.data()),
            static_cast<std::streamsize>(u.data.size() * sizeof(cplx)));
    if (!f) throw IoError("short write to " + path);
}

WaveField read_snapshot(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError(path + ": bad magic, expected DBEC");
    std::uint32_t version = 0;
    f.read(reinterpret_cast<char*>(&version), 4);
    if (!f || version != kVersion)
        throw FormatError(path + ": unsupported version " + std::to_string(version) +
                          " (supported: 1)");
    std::array<int, 3> n{};
    for (int a = 0; a < 3; ++a) {
        std::uint32_t na = 0;
        f.read(reinterpret_cast<char*>(&na), 4);
        n[a] = static_cast<int>(na);
    }
    std::array<double, 3> L{};
    for (int a = 0; a < 3; ++a) f.read(reinterpret_cast<char*>(&L[a]), 8);
    if (!f) throw FormatError(path + ": truncated header");
    WaveField u(make_grid(n, L));
    f.read(reinterpret_cast<char*>(u.data.data()),
           static_cast<std::streamsize>(u.data.size() * sizeof(cplx)));
    if (f.gcount() != static_cast<std::streamsize>(u.data.size() * sizeof(cplx)))
        throw FormatError(path + ": truncated field payload");
    return u;
}

} // namespace dbec
