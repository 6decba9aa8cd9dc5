#include <catch2/catch_amalgamated.hpp>

#include "nelsonlab/propagator.hpp"
#include "oracles.hpp"

using namespace nelsonlab;

namespace {

Hamiltonian free_particle(const Grid& g) {
    return Hamiltonian(g, ParticleLayout::single(g.dims()), {1.0}, {0.0});
}

ComplexField gaussian_packet(const Grid& g, double sigma0, double v0 = 0.0, double m = 1.0,
                             double hbar = 1.0) {
    ComplexField psi(g);
    psi.assign([&](const auto& x) {
        const double amp = std::exp(-x[0] * x[0] / (4.0 * sigma0 * sigma0));
        return std::polar(amp, m * v0 * x[0] / hbar);
    });
    normalize(psi);
    return psi;
}

} // namespace

TEST_CASE("plane wave is a kinetic eigenstate of split_step") {
    Grid g = make_cube_grid(1, 64, 0.0, 2.0 * M_PI);
    Hamiltonian H = free_particle(g);
    const double k = 3.0; // integer mode of the 2*pi box
    ComplexField psi(g);
    psi.assign([&](const auto& x) { return std::polar(1.0, k * x[0]); });
    normalize(psi);
    ComplexField psi0 = psi;

    const double dt = 0.01;
    const int steps = 50;
    for (int s = 0; s < steps; ++s) split_step(psi, H, s * dt, dt);

    const cplx expected_rot = std::polar(1.0, -0.5 * k * k * dt * steps);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        CHECK(std::abs(psi[i]) == Catch::Approx(std::abs(psi0[i])).margin(1e-12));
        CHECK(std::abs(psi[i] - expected_rot * psi0[i]) < 1e-10);
    }
}

TEST_CASE("free Gaussian reaches the analytic width at t=1") {
    Grid g = make_cube_grid(1, 512, -16.0, 16.0);
    Hamiltonian H = free_particle(g);
    ComplexField psi = gaussian_packet(g, 1.0);
    const double dt = 1e-2;
    for (int s = 0; s < 100; ++s) split_step(psi, H, s * dt, dt);
    const double width = oracles::density_width(density(psi));
    CHECK(width == Catch::Approx(std::sqrt(1.25)).margin(1e-4));
}

TEST_CASE("rest-energy term is a pure global phase") {
    Grid g = make_cube_grid(1, 128, -10.0, 10.0);
    Hamiltonian H_plain = free_particle(g);
    Hamiltonian H_rest = H_plain;
    H_rest.mass = {10.0 / (H_rest.c * H_rest.c)}; // mc^2 = 10
    H_plain.mass = H_rest.mass;
    H_rest.include_rest_energy = true;

    ComplexField a = gaussian_packet(g, 1.0, 0.3, H_rest.mass[0]);
    ComplexField b = a;
    const double dt = 1e-3;
    const int steps = 200;
    for (int s = 0; s < steps; ++s) {
        split_step(a, H_plain, s * dt, dt);
        split_step(b, H_rest, s * dt, dt);
    }
    const double t = steps * dt;
    const cplx rot = std::polar(1.0, -10.0 * t);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(b[i] - rot * a[i]) < 1e-12);
        CHECK(std::abs(std::norm(b[i]) - std::norm(a[i])) < 1e-14);
    }
}

TEST_CASE("Crank-Nicolson matches split_step on a free Gaussian") {
    Grid g = make_cube_grid(1, 512, -12.0, 12.0);
    Hamiltonian H = free_particle(g);
    ComplexField ss = gaussian_packet(g, 1.0);
    ComplexField cn = ss;
    const double dt = 1e-3;
    for (int s = 0; s < 100; ++s) {
        split_step(ss, H, s * dt, dt);
        crank_nicolson(cn, H, s * dt, dt);
    }
    CHECK(norm_squared(cn) == Catch::Approx(1.0).margin(1e-8));
    double worst = 0.0;
    for (std::size_t i = 0; i < ss.size(); ++i) worst = std::max(worst, std::abs(ss[i] - cn[i]));
    CHECK(worst < 1e-5);
}

TEST_CASE("uniform vector potential: CN agrees with the spectral momentum shift") {
    Grid g = make_cube_grid(1, 512, -12.0, 12.0);
    Hamiltonian H(g, ParticleLayout::single(1), {1.0}, {1.0});
    UniformVectorPotential A;
    A.constant = {0.4, 0.0, 0.0};
    H.a_uniform = A;

    ComplexField ss = gaussian_packet(g, 1.0);
    ComplexField cn = ss;
    const double dt = 1e-3;
    for (int s = 0; s < 100; ++s) {
        split_step(ss, H, s * dt, dt);
        crank_nicolson(cn, H, s * dt, dt);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < ss.size(); ++i) worst = std::max(worst, std::abs(ss[i] - cn[i]));
    CHECK(worst < 1e-5);
}

TEST_CASE("CN keeps an eigensolver-oracle ground state stationary over a period") {
    Grid g = make_cube_grid(1, 256, -8.0, 8.0);
    Hamiltonian H(g, ParticleLayout::single(1), {1.0}, {0.0});
    H.potential.assign([](const auto& x) { return 0.5 * x[0] * x[0]; });

    // dense eigenvector of the same central-difference operator (interior
    // nodes; the wings are ~1e-14 here so Dirichlet vs periodic is moot)
    const int n = g.points(0);
    const double h = g.spacing(0);
    Eigen::VectorXd diag(n), sub(n - 1);
    for (int i = 0; i < n; ++i) {
        const double x = g.coord(0, i);
        diag[i] = 1.0 / (h * h) + 0.5 * x * x;
    }
    for (int i = 0; i + 1 < n; ++i) sub[i] = -0.5 / (h * h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    ComplexField psi(g);
    for (int i = 0; i < n; ++i) psi[i] = cplx(es.eigenvectors().col(0)[i], 0.0);
    normalize(psi);
    const RealField rho0 = density(psi);

    const double period = 2.0 * M_PI;
    const int steps = 1000;
    const double dt = period / steps;
    for (int s = 0; s < steps; ++s) crank_nicolson(psi, H, s * dt, dt);
    const RealField rho1 = density(psi);
    double worst = 0.0;
    for (std::size_t i = 0; i < rho0.size(); ++i) worst = std::max(worst, std::abs(rho1[i] - rho0[i]));
    CHECK(worst < 1e-6);
}

TEST_CASE("imaginary time finds the harmonic ground state energy") {
    Grid g = make_cube_grid(1, 256, -8.0, 8.0);
    Hamiltonian H(g, ParticleLayout::single(1), {1.0}, {0.0});
    H.potential.assign([](const auto& x) { return 0.5 * x[0] * x[0]; });
    auto res = imaginary_time_ground_state(H, 1e-10);
    CHECK(res.energy == Catch::Approx(0.5).margin(1e-6));

    const double oracle = oracles::ground_energy(
        [](double x) { return 0.5 * x * x; }, -8.0, 8.0);
    CHECK(res.energy == Catch::Approx(oracle).margin(1e-6));
}

TEST_CASE("imaginary time matches the dense oracle on a steep quartic well") {
    Grid g = make_cube_grid(1, 256, -6.0, 6.0);
    Hamiltonian H(g, ParticleLayout::single(1), {1.0}, {0.0});
    H.potential.assign([](const auto& x) { return 2.0 * std::pow(x[0], 4); });
    auto res = imaginary_time_ground_state(H, 1e-11);
    const double oracle = oracles::ground_energy(
        [](double x) { return 2.0 * std::pow(x, 4); }, -6.0, 6.0);
    CHECK(res.energy == Catch::Approx(oracle).margin(1e-5));
}

TEST_CASE("imaginary time is a fixed point on a converged state") {
    Grid g = make_cube_grid(1, 128, -8.0, 8.0);
    Hamiltonian H(g, ParticleLayout::single(1), {1.0}, {0.0});
    H.potential.assign([](const auto& x) { return 0.5 * x[0] * x[0]; });
    auto first = imaginary_time_ground_state(H, 1e-10);
    auto second = imaginary_time_relax(first.psi, H, 0.05, 1e-10);
    CHECK(second.energy == Catch::Approx(first.energy).margin(1e-9));
    // the state budges only at the Trotter-bias level of the first sweep
    double worst = 0.0;
    for (std::size_t i = 0; i < first.psi.size(); ++i)
        worst = std::max(worst, std::abs(std::abs(second.psi[i]) - std::abs(first.psi[i])));
    CHECK(worst < 1e-4);
}

TEST_CASE("classical correction: analytic Gaussian value and plane-wave zero") {
    Grid g = make_cube_grid(1, 256, -10.0, 10.0);
    Hamiltonian H = free_particle(g);
    const double sigma = 1.3;
    ComplexField psi(g);
    psi.assign([&](const auto& x) {
        return cplx(std::exp(-x[0] * x[0] / (4.0 * sigma * sigma)), 0.0);
    });
    normalize(psi);
    RealField corr = classical_correction(psi, H);
    // + (hbar^2/2m) lap|psi|/|psi| = (1/2)(x^2/4s^4 - 1/2s^2) at hbar=m=1
    for (int i : {64, 128, 190}) {
        const double x = g.coord(0, i);
        const double expect = 0.5 * (x * x / (4.0 * std::pow(sigma, 4)) - 1.0 / (2.0 * sigma * sigma));
        CHECK(corr[i] == Catch::Approx(expect).margin(1e-6));
    }

    ComplexField plane(g);
    plane.assign([](const auto& x) { return std::polar(1.0, 2.0 * M_PI * x[0] / 20.0); });
    normalize(plane);
    RealField zero = classical_correction(plane, H);
    for (std::size_t i = 0; i < zero.size(); ++i) CHECK(std::abs(zero[i]) < 1e-8);
}

TEST_CASE("classical mode freezes the free Gaussian width while quantum mode spreads") {
    Grid g = make_cube_grid(1, 512, -16.0, 16.0);
    Hamiltonian H = free_particle(g);
    ComplexField q = gaussian_packet(g, 1.0);
    ComplexField c = q;
    const double dt = 1e-3;
    for (int s = 0; s < 1000; ++s) {
        split_step(q, H, s * dt, dt, EvolutionMode::quantum);
        split_step(c, H, s * dt, dt, EvolutionMode::classical);
    }
    CHECK(oracles::density_width(density(q)) == Catch::Approx(std::sqrt(1.25)).margin(1e-3));
    CHECK(oracles::density_width(density(c)) == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("unitarity and energy conservation over long runs") {
    Grid g = make_cube_grid(1, 256, -10.0, 10.0);
    Hamiltonian H(g, ParticleLayout::single(1), {1.0}, {0.0});
    H.potential.assign([](const auto& x) { return 0.5 * x[0] * x[0]; });
    ComplexField psi(g);
    psi.assign([](const auto& x) {
        const double d = x[0] - 1.0;
        return cplx(std::exp(-d * d), 0.0);
    });
    normalize(psi);
    const double e0 = energy_expectation(psi, H);
    const double dt = 1e-3;
    for (int s = 0; s < 10000; ++s) {
        split_step(psi, H, s * dt, dt);
        if (s == 999) CHECK(norm_squared(psi) == Catch::Approx(1.0).margin(1e-10));
    }
    CHECK(norm_squared(psi) == Catch::Approx(1.0).margin(1e-9));
    CHECK(std::abs(energy_expectation(psi, H) - e0) / std::abs(e0) < 1e-8);
}

TEST_CASE("Galilean boost translates the density in both modes") {
    Grid g = make_cube_grid(1, 512, -16.0, 16.0);
    Hamiltonian H = free_particle(g);
    const double vb = 0.8, t_final = 1.0;
    for (EvolutionMode mode : {EvolutionMode::quantum, EvolutionMode::classical}) {
        ComplexField rest = gaussian_packet(g, 1.0, 0.0);
        ComplexField boosted = gaussian_packet(g, 1.0, vb);
        const double dt = 1e-3;
        for (int s = 0; s < 1000; ++s) {
            split_step(rest, H, s * dt, dt, mode);
            split_step(boosted, H, s * dt, dt, mode);
        }
        const RealField rho_rest = density(rest);
        const RealField rho_boost = density(boosted);
        double worst = 0.0;
        for (int i = 100; i < 412; ++i) {
            const double x = g.coord(0, i);
            const double translated = interpolate(rho_rest, {x - vb * t_final, 0.0, 0.0});
            worst = std::max(worst, std::abs(rho_boost[i] - translated));
        }
        CHECK(worst < 5e-4);
    }
}

TEST_CASE("evolve echoes the initial state for zero steps and logs conserved quantities") {
    Grid g = make_cube_grid(1, 128, -8.0, 8.0);
    Hamiltonian H = free_particle(g);
    ComplexField psi = gaussian_packet(g, 1.0);
    EvolveParams p;
    p.steps = 0;
    WaveSeries s = evolve(psi, H, p);
    REQUIRE(s.snapshots.size() == 1);
    for (std::size_t i = 0; i < psi.size(); ++i) CHECK(s.snapshots[0][i] == psi[i]);

    p.steps = 40;
    p.snapshot_stride = 10;
    WaveSeries s2 = evolve(psi, H, p);
    CHECK(s2.snapshots.size() == 5);
    for (double n : s2.norms) CHECK(n == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("split_step rejects unsupported configurations") {
    Grid gnp({AxisSpec{32, -1.0, 1.0, false}});
    Hamiltonian Hnp(gnp, ParticleLayout::single(1), {1.0}, {0.0});
    ComplexField psi(gnp, cplx(1.0, 0.0));
    CHECK_THROWS_AS(split_step(psi, Hnp, 0.0, 1e-3), config_error);

    Grid g = make_cube_grid(1, 32, -1.0, 1.0);
    Hamiltonian H(g, ParticleLayout::single(1), {1.0}, {1.0});
    H.a_static = VectorField(g);
    ComplexField psi2(g, cplx(1.0, 0.0));
    CHECK_THROWS_AS(split_step(psi2, H, 0.0, 1e-3), config_error);
}
