#include "doctest.h"

#include <cmath>
#include <complex>

#include "dbec/dynamics.hpp"
#include "dbec/errors.hpp"
#include "dbec/functionals.hpp"
#include "dbec/ground_state.hpp"
#include "dbec/grid.hpp"

using namespace dbec;

TEST_CASE("free Gaussian spreading matches the exact variance law") {
    // exp(-r^2/2) under the free flow keeps |psi|^2 Gaussian with
    // per-axis second moment (1+t^2)/2, so V(t) = 1.5 (1+t^2).
    auto g = make_grid({64, 64, 64}, {10, 10, 10});
    PhysParams p{0.0, 0.0, 0.0, 1.0};
    WaveField u = gaussian_field(g, {1, 1, 1}, 1.0);
    EvolveOptions opts;
    opts.sample_every = 25;
    TrajectoryRecord rec = evolve(u, p, 2e-3, 2.0, opts);

    CHECK(rec.verdict == Verdict::Completed);
    REQUIRE(rec.samples.size() == 41);
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        const auto& s = rec.samples[i];
        if (i > 0) CHECK(s.t > rec.samples[i - 1].t);
        CHECK(std::abs(s.mass - 1.0) <= 1e-10);
        const double exact = 1.5 * (1.0 + s.t * s.t);
        CHECK(std::abs(s.variance - exact) <= 1e-4 * exact);
    }
    CHECK(virial_check(rec) <= 2e-3);
}

TEST_CASE("harmonic eigenstate is stationary") {
    auto g = make_grid({32, 32, 32}, {8, 8, 8});
    PhysParams p{0.0, 0.0, 1.0, 1.0};
    WaveField u = gaussian_field(g, {1, 1, 1}, 1.0);
    EvolveOptions opts;
    opts.sample_every = 100;
    TrajectoryRecord rec = evolve(u, p, 1e-3, 10.0, opts);

    CHECK(rec.verdict == Verdict::Completed);
    for (const auto& s : rec.samples) {
        CHECK(std::abs(s.mass - 1.0) <= 1e-10);
        // Strang splitting keeps the eigenstate stationary up to its O(dt^2)
        // commutator floor, ~1e-7 at this step over the full horizon.
        CHECK(std::abs(s.A - 1.5) <= 5e-7);
    }
}

TEST_CASE("halving the step quarters the energy drift") {
    auto g = make_grid({32, 32, 32}, {8, 8, 8});
    PhysParams p{-1.0, 0.3, 0.0, 5.0};
    WaveField u = gaussian_field(g, {1, 1, 1}, 5.0);
    auto drift = [&](double dt) {
        EvolveOptions opts;
        opts.sample_every = 10;
        TrajectoryRecord rec = evolve(u, p, dt, 0.4, opts);
        REQUIRE(rec.verdict == Verdict::Completed);
        double worst = 0.0;
        for (const auto& s : rec.samples)
            worst = std::max(worst, std::abs(s.E - rec.samples[0].E));
        return worst;
    };
    const double coarse = drift(4e-3);
    const double fine = drift(2e-3);
    REQUIRE(coarse > 1e-11);  // above roundoff, so the ratio is meaningful
    CHECK(coarse / fine >= 3.5);
}

TEST_CASE("standing wave: stationarity, certificate and blow-up dichotomy") {
    // The tighter box keeps the soliton's Pohozaev defect (a spectral
    // truncation effect) below 1e-4 so the stationarity window is clean.
    auto g = make_grid({64, 64, 64}, {6, 6, 6});
    PhysParams p{-1.0, 0.0, 0.0, 9.0};
    SolverOptions sopts;
    sopts.tol = 1e-7;
    auto [uc, rep] = solve_free_ground_state(g, p, std::nullopt, sopts);
    REQUIRE(rep.converged);
    REQUIRE(rep.residual <= 1e-9);  // genuine discrete critical point
    const double gamma_c = rep.level;
    const double A0 = breakdown(uc, p).A;

    // Certificate trichotomy along the dilation path through the state.
    CHECK(globality_certificate(uc, p, gamma_c) == Certificate::NotCertified);
    WaveField shrunk = isotropic_rescale(uc, 0.95);
    CHECK(globality_certificate(shrunk, p, gamma_c) == Certificate::Certified);
    WaveField stretched = isotropic_rescale(uc, 1.05);
    CHECK(globality_certificate(stretched, p, gamma_c) ==
          Certificate::NotCertified);

    // The standing wave only rotates its phase; removing e^{-i mu t} must
    // recover the initial profile. The soliton is linearly unstable, so
    // splitting error grows exponentially along the dilation mode; the
    // horizon and step are sized so that stays below the Q tolerance.
    EvolveOptions opts;
    opts.sample_every = 100;
    opts.store_snapshots = true;
    opts.snapshot_every = 400;
    TrajectoryRecord rec = evolve(uc, p, 5e-4, 0.4, opts);
    CHECK(rec.verdict == Verdict::Completed);
    CHECK(rec.samples.back().t >= 0.4 - 1e-12);
    for (const auto& s : rec.samples) {
        CHECK(std::abs(s.Q) <= 1e-4);
        CHECK(std::abs(s.mass - 9.0) <= 1e-10);
    }
    {
        const auto& last = rec.snapshots.back();
        const double t = rec.snapshot_times.back();
        const cplx phase = std::exp(cplx(0.0, -rep.mu * t));
        double diff = 0.0;
        for (std::size_t i = 0; i < uc.size(); ++i)
            diff += std::norm(last[i] * phase - uc[i]);
        CHECK(std::sqrt(diff * g->dv) <= 2e-4);
    }
    opts.store_snapshots = false;

    // A bound state never scatters: back-propagated snapshots stay far
    // from Cauchy. Accuracy is irrelevant here, so the step is coarse.
    {
        EvolveOptions snap;
        snap.sample_every = 250;
        snap.store_snapshots = true;
        TrajectoryRecord bound = evolve(uc, p, 2e-3, 4.0, snap);
        ScatteringReport scat = scattering_diagnostic(bound.snapshots,
                                                      bound.snapshot_times, p);
        CHECK(scat.tail_defect > 1e-2);
    }

    // Stretched branch enters the blow-up set: Q stays negative and the
    // detector fires before the horizon.
    TrajectoryRecord up = evolve(stretched, p, 1e-3, 5.0, opts);
    CHECK(up.verdict == Verdict::BlowUpSuspected);
    CHECK(up.samples.back().t < 5.0);
    for (const auto& s : up.samples) CHECK(s.Q < -0.1);

    // Shrunk branch is certified global: bounded kinetic energy while the
    // wave disperses, stopping before it reaches the box face.
    TrajectoryRecord down = evolve(shrunk, p, 2e-3, 1.0, opts);
    CHECK(down.verdict == Verdict::Completed);
    for (const auto& s : down.samples) CHECK(s.A <= 3.0 * A0);
}

TEST_CASE("scattering diagnostic on the free flow is exact") {
    auto g = make_grid({32, 32, 32}, {8, 8, 8});
    PhysParams p{0.0, 0.0, 0.0, 1.0};
    WaveField u = gaussian_field(g, {1, 1, 1}, 1.0);
    EvolveOptions opts;
    opts.sample_every = 25;
    opts.store_snapshots = true;
    TrajectoryRecord rec = evolve(u, p, 1e-2, 1.0, opts);
    REQUIRE(rec.snapshots.size() >= 3);
    ScatteringReport rep = scattering_diagnostic(rec.snapshots,
                                                 rec.snapshot_times, p);
    for (double d : rep.defects) CHECK(d <= 1e-12);

    CHECK_THROWS_AS(scattering_diagnostic({u}, {0.0}, p), InsufficientSamples);
    PhysParams trapped{0.0, 0.0, 1.0, 1.0};
    CHECK_THROWS_AS(scattering_diagnostic(rec.snapshots, rec.snapshot_times,
                                          trapped),
                    InvalidPhysical);
}

TEST_CASE("small-data run scatters") {
    // Weak nonlinearity on a wide box: the back-propagated states become
    // Cauchy well before the wave reaches the boundary.
    auto g = make_grid({64, 64, 64}, {16, 16, 16});
    PhysParams p{-1.0, 0.3, 0.0, 0.05};
    WaveField u = gaussian_field(g, {1, 1, 1}, 0.05);
    EvolveOptions opts;
    opts.sample_every = 200;
    opts.store_snapshots = true;
    TrajectoryRecord rec = evolve(u, p, 5e-3, 10.0, opts);
    // The spreading wave eventually touches the periodic boundary and the
    // run may stop with ResolutionLost; the scattering diagnostic only
    // needs the snapshots collected before that.
    CHECK(rec.verdict != Verdict::BlowUpSuspected);
    REQUIRE(rec.snapshots.size() >= 3);
    ScatteringReport rep = scattering_diagnostic(rec.snapshots,
                                                 rec.snapshot_times, p);
    CHECK(rep.tail_defect <= 1e-3);
    // Defects decay once the wave has left the interaction region.
    CHECK(rep.defects.back() < rep.defects.front());
}

TEST_CASE("boundary density invalidates the run") {
    auto g = make_grid({32, 32, 32}, {8, 8, 8});
    PhysParams p{0.0, 0.0, 0.0, 1.0};
    WaveField u = gaussian_field(g, {2.5, 2.5, 2.5}, 1.0);
    TrajectoryRecord rec = evolve(u, p, 1e-2, 1.0);
    CHECK(rec.verdict == Verdict::ResolutionLost);
    CHECK(rec.samples.size() == 1);
}

TEST_CASE("virial_check input validation") {
    TrajectoryRecord rec;
    rec.samples.resize(2);
    rec.samples[0].t = 0.0;
    rec.samples[1].t = 0.1;
    CHECK_THROWS_AS(virial_check(rec), InsufficientSamples);
    rec.samples.resize(4);
    rec.samples[2].t = 0.2;
    rec.samples[3].t = 0.5;  // breaks uniform spacing
    CHECK_THROWS_AS(virial_check(rec), InsufficientSamples);
}
