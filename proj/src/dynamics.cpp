#include "dbec/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "dbec/errors.hpp"

namespace dbec {

namespace {

// Three-point second derivative on possibly non-uniform spacing.
double second_derivative(double f0, double f1, double f2, double h01, double h12) {
    return 2.0 * (h01 * f2 - (h01 + h12) * f1 + h12 * f0) /
           (h01 * h12 * (h01 + h12));
}

void fill_virial_residuals(TrajectoryRecord& rec) {
    auto& s = rec.samples;
    if (s.size() < 3) return;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double h01 = s[i].t - s[i - 1].t;
        const double h12 = s[i + 1].t - s[i].t;
        const double vpp = second_derivative(s[i - 1].variance, s[i].variance,
                                             s[i + 1].variance, h01, h12);
        s[i].virial_residual = std::abs(vpp - 2.0 * s[i].Q) / (1.0 + std::abs(s[i].Q));
    }
}

} // namespace

TrajectoryRecord evolve(const WaveField& u0, const PhysParams& p, double dt,
                        double T, const EvolveOptions& opts) {
    p.validate();
    if (dt <= 0.0 || T <= 0.0)
        throw InvalidPhysical("evolve: dt and T must be positive");
    require_finite(u0, "evolve");
    const GridPtr g = u0.grid;
    const std::size_t N = g->size;

    const long nsteps = std::max<long>(1, std::llround(T / dt));
    const long sample_every = std::max<long>(1, opts.sample_every);
    const long snap_every =
        opts.snapshot_every > 0 ? opts.snapshot_every : sample_every;

    // Precomputed tables: kinetic multipliers for a full step, the
    // interaction kernel, and the trap profile.
    std::vector<cplx> kin_full(N);
    std::vector<double> kernel = dipolar_multiplier(*g);
    std::vector<double> x2;
    {
        std::size_t idx = 0;
        for (int i3 = 0; i3 < g->n[2]; ++i3)
            for (int i2 = 0; i2 < g->n[1]; ++i2)
                for (int i1 = 0; i1 < g->n[0]; ++i1, ++idx) {
                    const double ksq = g->xi[0][i1] * g->xi[0][i1] +
                                       g->xi[1][i2] * g->xi[1][i2] +
                                       g->xi[2][i3] * g->xi[2][i3];
                    kin_full[idx] = std::exp(cplx(0.0, -0.5 * dt * ksq));
                    kernel[idx] = p.lambda1 + p.lambda2 * kernel[idx];
                }
    }
    if (p.trap > 0.0) {
        x2.resize(N);
        std::size_t idx = 0;
        for (int i3 = 0; i3 < g->n[2]; ++i3) {
            const double z = g->x_coord(2, i3);
            for (int i2 = 0; i2 < g->n[1]; ++i2) {
                const double y = g->x_coord(1, i2);
                for (int i1 = 0; i1 < g->n[0]; ++i1, ++idx) {
                    const double x = g->x_coord(0, i1);
                    x2[idx] = x * x + y * y + z * z;
                }
            }
        }
    }

    WaveField psi = u0;
    std::vector<cplx> spec(N), work(N);
    std::vector<double> rho(N), phi(N);

    // phi <- lambda1 rho + lambda2 K * rho with rho taken from psi.
    auto update_potential = [&]() {
        for (std::size_t i = 0; i < N; ++i) {
            rho[i] = std::norm(psi[i]);
            work[i] = rho[i];
        }
        g->forward(work.data(), spec.data());
        for (std::size_t i = 0; i < N; ++i) spec[i] *= kernel[i];
        g->inverse(spec.data(), work.data());
        for (std::size_t i = 0; i < N; ++i) phi[i] = work[i].real();
    };
    // Exact phase rotation by theta*(a^2 |x|^2 / 2 + phi); leaves rho as is.
    auto apply_potential = [&](double theta) {
        if (p.trap > 0.0) {
            const double half_a2 = 0.5 * p.trap * p.trap;
            for (std::size_t i = 0; i < N; ++i)
                psi[i] *= std::exp(cplx(0.0, -theta * (half_a2 * x2[i] + phi[i])));
        } else {
            for (std::size_t i = 0; i < N; ++i)
                psi[i] *= std::exp(cplx(0.0, -theta * phi[i]));
        }
    };
    auto apply_kinetic = [&]() {
        g->forward(psi.data.data(), spec.data());
        for (std::size_t i = 0; i < N; ++i) spec[i] *= kin_full[i];
        g->inverse(spec.data(), psi.data.data());
    };

    TrajectoryRecord rec;
    double A0 = 0.0;
    double boundary0 = 0.0;
    const bool trapped = p.trap > 0.0;

    auto take_snapshot = [&](long step) {
        rec.snapshots.push_back(psi);
        rec.snapshot_times.push_back(step * dt);
        if (!opts.snapshots_dir.empty()) {
            std::filesystem::create_directories(opts.snapshots_dir);
            char name[64];
            std::snprintf(name, sizeof(name), "snapshot_%08ld.dbec", step);
            write_snapshot(psi, opts.snapshots_dir + "/" + name);
        }
    };

    // Records monitors at time step*dt; returns false when a detector fires
    // and the run must stop. rho must be current.
    auto record_sample = [&](long step) {
        require_finite(psi, "evolve sample");
        EnergyBreakdown eb = breakdown(psi, p);
        TrajectorySample s;
        s.t = step * dt;
        s.mass = eb.mass;
        s.E = trapped ? eb.E_a : eb.E;
        s.A = eb.A;
        s.B = eb.B;
        s.D = eb.D;
        s.Q = trapped ? eb.Q_a : eb.Q;
        s.variance = eb.D;
        s.tail_fraction = spectral_tail_fraction(psi);
        double peak = 0.0, boundary = 0.0;
        for (std::size_t i = 0; i < N; ++i) peak = std::max(peak, rho[i]);
        for (int i3 = 0; i3 < g->n[2]; ++i3)
            for (int i2 = 0; i2 < g->n[1]; ++i2)
                boundary = std::max(boundary, rho[g->index(0, i2, i3)]);
        for (int i3 = 0; i3 < g->n[2]; ++i3)
            for (int i1 = 0; i1 < g->n[0]; ++i1) {
                boundary = std::max(boundary, rho[g->index(i1, 0, i3)]);
            }
        for (int i2 = 0; i2 < g->n[1]; ++i2)
            for (int i1 = 0; i1 < g->n[0]; ++i1)
                boundary = std::max(boundary, rho[g->index(i1, i2, 0)]);
        s.max_density = peak;
        rec.samples.push_back(s);
        if (step == 0) {
            A0 = eb.A;
            boundary0 = boundary;
        }
        if (eb.A > 1e4 * A0 || s.tail_fraction > 0.1) {
            rec.verdict = Verdict::BlowUpSuspected;
            return false;
        }
        // Trapped steady states keep a small static tail at the box edge;
        // only a boundary density that has grown well past its initial level
        // signals mass reaching the edge of the resolved domain.
        if (boundary > 1e-6 * peak && boundary > 10.0 * boundary0) {
            rec.verdict = Verdict::ResolutionLost;
            return false;
        }
        return true;
    };

    update_potential();
    bool alive = record_sample(0);
    if (opts.store_snapshots && alive) take_snapshot(0);

    // Fused symmetric splitting: the trailing half potential step of one
    // time step merges with the leading half of the next except at sample
    // points, where the state must be synchronized.
    bool chain_open = false;
    for (long step = 1; alive && step <= nsteps; ++step) {
        if (!chain_open) {
            update_potential();
            apply_potential(0.5 * dt);
        }
        apply_kinetic();
        const bool sync = (step % sample_every == 0) || step == nsteps ||
                          (opts.store_snapshots && step % snap_every == 0);
        update_potential();
        if (sync) {
            apply_potential(0.5 * dt);
            chain_open = false;
            if (step % sample_every == 0 || step == nsteps)
                alive = record_sample(step);
            if (alive && opts.store_snapshots && step % snap_every == 0)
                take_snapshot(step);
        } else {
            apply_potential(dt);
            chain_open = true;
        }
    }

    fill_virial_residuals(rec);
    return rec;
}

double virial_check(const TrajectoryRecord& traj) {
    const auto& s = traj.samples;
    if (s.size() < 3)
        throw InsufficientSamples("virial_check: need at least 3 samples");
    const double h = s[1].t - s[0].t;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (std::abs((s[i].t - s[i - 1].t) - h) > 1e-9 * std::max(1.0, h))
            throw InsufficientSamples("virial_check: samples not uniformly spaced");
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i)
        worst = std::max(worst, s[i].virial_residual);
    return worst;
}

Certificate globality_certificate(const WaveField& u0, const PhysParams& p,
                                  double gamma_c) {
    if (p.trap != 0.0)
        throw InvalidPhysical("globality_certificate: requires a = 0");
    EnergyBreakdown eb = breakdown(u0, p);
    const double guard = 1e-8;
    if (eb.Q > guard && eb.E < gamma_c - guard) return Certificate::Certified;
    return Certificate::NotCertified;
}

ScatteringReport scattering_diagnostic(const std::vector<WaveField>& snapshots,
                                       const std::vector<double>& times,
                                       const PhysParams& p) {
    if (p.trap != 0.0)
        throw InvalidPhysical("scattering_diagnostic: requires a = 0");
    if (snapshots.size() < 2 || snapshots.size() != times.size())
        throw InsufficientSamples(
            "scattering_diagnostic: need >= 2 snapshots with matching times");
    const GridPtr g = snapshots.front().grid;
    const std::size_t N = g->size;
    for (const auto& s : snapshots)
        if (!s.grid->same_shape(*g))
            throw InvalidGrid("scattering_diagnostic: snapshot grids differ");

    std::vector<double> ksq(N);
    {
        std::size_t idx = 0;
        for (int i3 = 0; i3 < g->n[2]; ++i3)
            for (int i2 = 0; i2 < g->n[1]; ++i2)
                for (int i1 = 0; i1 < g->n[0]; ++i1, ++idx)
                    ksq[idx] = g->xi[0][i1] * g->xi[0][i1] +
                               g->xi[1][i2] * g->xi[1][i2] +
                               g->xi[2][i3] * g->xi[2][i3];
    }

    ScatteringReport rep;
    std::vector<cplx> prev(N), cur(N);
    auto back_propagate = [&](const WaveField& u, double t, std::vector<cplx>& out) {
        g->forward(u.data.data(), out.data());
        for (std::size_t i = 0; i < N; ++i)
            out[i] *= std::exp(cplx(0.0, 0.5 * t * ksq[i]));
    };
    back_propagate(snapshots[0], times[0], prev);
    for (std::size_t k = 1; k < snapshots.size(); ++k) {
        back_propagate(snapshots[k], times[k], cur);
        double diff = 0.0;
        for (std::size_t i = 0; i < N; ++i) diff += std::norm(cur[i] - prev[i]);
        rep.defects.push_back(std::sqrt(diff * g->dv / static_cast<double>(N)));
        std::swap(prev, cur);
    }
    rep.tail_defect = rep.defects.back();
    rep.psi_plus = WaveField(g);
    g->inverse(prev.data(), rep.psi_plus.data.data());
    return rep;
}

} // namespace dbec
