#include <catch2/catch_amalgamated.hpp>

#include "nelsonlab/circulation.hpp"
#include "nelsonlab/propagator.hpp"
#include "nelsonlab/states.hpp"

using namespace nelsonlab;

namespace {

const double kPlanck = 2.0 * M_PI; // h = 2 pi hbar at hbar = 1

Hamiltonian single_2d(const Grid& g, double charge = 0.0) {
    return Hamiltonian(g, ParticleLayout::single(2), {1.0}, {charge});
}

} // namespace

TEST_CASE("smooth node-free loop carries no circulation") {
    Grid g = make_cube_grid(2, 128, -8.0, 8.0);
    Hamiltonian H = single_2d(g);
    // spreading boosted Gaussian: nontrivial exact 1-form momentum field
    ComplexField psi(g);
    psi.assign([](const auto& x) {
        const double amp = std::exp(-(x[0] * x[0] + x[1] * x[1]) / 4.0);
        return std::polar(amp, 0.7 * x[0] + 0.2 * x[1]);
    });
    normalize(psi);
    EvolveParams p;
    p.dt = 1e-3;
    p.steps = 100;
    p.snapshot_stride = 100;
    WaveSeries w = evolve(psi, H, p);
    MadelungFields f = decompose(w.snapshots.back(), H);
    LoopPath loop = circle_loop({0.5, -0.3, 0.0}, 1.2);
    auto res = circulate(f.phase_grad, loop, &f.floored);
    CHECK_FALSE(res.crossed_floored);
    CHECK(std::abs(res.value) < 1e-6 * kPlanck);
}

TEST_CASE("l = 2 vortex eigenstate circulates 2h on loops around the core") {
    Grid g = make_cube_grid(2, 256, -8.0, 8.0);
    Hamiltonian H = single_2d(g);
    ComplexField psi = vortex_eigenstate(g, 1.0, 1.0, 1.0, 2);
    MadelungFields f = decompose(psi, H);
    for (double radius : {0.5, 1.0, 2.0}) {
        auto res = circulate(f.phase_grad, circle_loop({0.0, 0.0, 0.0}, radius));
        CHECK(res.value / kPlanck == Catch::Approx(2.0).epsilon(5e-3));
    }
    CHECK(winding_number(psi, circle_loop({0.0, 0.0, 0.0}, 1.0)) == 2);
}

TEST_CASE("uniform A: canonical = kinetic + (e/c) loop integral of A") {
    Grid g = make_cube_grid(2, 128, -8.0, 8.0);
    Hamiltonian H = single_2d(g, 1.0);
    UniformVectorPotential A;
    A.constant = {0.3, -0.1, 0.0};
    H.a_uniform = A;
    ComplexField psi = vortex_eigenstate(g, 1.0, 1.0, 1.0, 1);
    MadelungFields f = decompose(psi, H);
    LoopPath loop = circle_loop({0.0, 0.0, 0.0}, 1.0);

    VectorField kinetic(g);
    for (int a = 0; a < 2; ++a)
        for (std::size_t i = 0; i < g.size(); ++i)
            kinetic[a][i] = H.mass_of_axis(a) * f.v[a][i];
    const double canonical = circulate(f.phase_grad, loop).value;
    const double kin = circulate(kinetic, loop).value;
    // loop integral of a constant A vanishes on a closed path
    double a_integral = 0.0;
    for (std::size_t k = 0; k < loop.vertices.size(); ++k) {
        const auto& p0 = loop.vertices[k];
        const auto& p1 = loop.vertices[(k + 1) % loop.vertices.size()];
        for (int ax = 0; ax < 2; ++ax)
            a_integral += (H.charge[0] / H.c) * A.constant[ax] * (p1[ax] - p0[ax]);
    }
    CHECK(std::abs(kin + a_integral - canonical) < 1e-12);
}

TEST_CASE("winding numbers: trivial, negative, additive") {
    Grid g = make_cube_grid(2, 256, -8.0, 8.0);

    ComplexField gauss(g);
    gauss.assign([](const auto& x) {
        return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1]) / 4.0), 0.0);
    });
    normalize(gauss);
    CHECK(winding_number(gauss, circle_loop({0.0, 0.0, 0.0}, 2.0)) == 0);

    ComplexField anti = vortex_eigenstate(g, 1.0, 1.0, 1.0, -1);
    CHECK(winding_number(anti, circle_loop({0.0, 0.0, 0.0}, 1.0)) == -1);

    // product of two displaced unit vortices: loop around both sees 2
    ComplexField pair(g);
    pair.assign([](const auto& x) {
        const cplx w1(x[0] - 1.2, x[1]);
        const cplx w2(x[0] + 1.2, x[1]);
        return w1 * w2 * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0);
    });
    normalize(pair);
    CHECK(winding_number(pair, circle_loop({1.2, 0.0, 0.0}, 0.5)) == 1);
    CHECK(winding_number(pair, circle_loop({-1.2, 0.0, 0.0}, 0.5)) == 1);
    CHECK(winding_number(pair, circle_loop({0.0, 0.0, 0.0}, 3.0)) == 2);
}

TEST_CASE("winding rejects under-resolved loops") {
    Grid g = make_cube_grid(2, 256, -8.0, 8.0);
    ComplexField psi = vortex_eigenstate(g, 1.0, 1.0, 1.0, 3);
    CHECK_THROWS_AS(winding_number(psi, circle_loop({0.0, 0.0, 0.0}, 1.0, 0, 1, 10)),
                    resolution_error);
}

TEST_CASE("node detection: nodeless, single 1-D node, vortex core") {
    Grid g1 = make_cube_grid(1, 256, -8.0, 8.0);
    ComplexField ground = harmonic_eigenstate_1d(g1, 1.0, 1.0, 1.0, 0);
    CHECK(node_detect(density(ground)).empty());

    ComplexField excited = harmonic_eigenstate_1d(g1, 1.0, 1.0, 1.0, 1);
    auto nodes1 = node_detect(density(excited));
    REQUIRE(nodes1.size() == 1);
    CHECK(std::abs(nodes1[0].centroid[0]) <= g1.spacing(0));

    Grid g2 = make_cube_grid(2, 256, -8.0, 8.0);
    ComplexField vortex = vortex_eigenstate(g2, 1.0, 1.0, 1.0, 1);
    auto nodes2 = node_detect(density(vortex));
    REQUIRE(nodes2.size() == 1);
    CHECK(std::abs(nodes2[0].centroid[0]) <= g2.spacing(0));
    CHECK(std::abs(nodes2[0].centroid[1]) <= g2.spacing(1));
}

TEST_CASE("circulation is invariant under node-free loop deformation") {
    Grid g = make_cube_grid(2, 256, -8.0, 8.0);
    Hamiltonian H = single_2d(g);
    ComplexField psi = vortex_eigenstate(g, 1.0, 1.0, 1.0, 2);
    MadelungFields f = decompose(psi, H);

    const double base = circulate(f.phase_grad, circle_loop({0.0, 0.0, 0.0}, 1.0)).value;
    // squashed / offset / wobbly loops around the same core
    LoopPath ellipse;
    ellipse.active_axis = {true, true, false};
    for (int k = 0; k < 256; ++k) {
        const double phi = 2.0 * M_PI * k / 256;
        ellipse.vertices.push_back({1.8 * std::cos(phi) + 0.3,
                                    0.9 * std::sin(phi) - 0.2, 0.0});
    }
    LoopPath wobble;
    wobble.active_axis = {true, true, false};
    for (int k = 0; k < 512; ++k) {
        const double phi = 2.0 * M_PI * k / 512;
        const double r = 1.2 + 0.25 * std::sin(5.0 * phi);
        wobble.vertices.push_back({r * std::cos(phi), r * std::sin(phi), 0.0});
    }
    CHECK(std::abs(circulate(f.phase_grad, ellipse).value - base) < 1e-3 * kPlanck);
    CHECK(std::abs(circulate(f.phase_grad, wobble).value - base) < 1e-3 * kPlanck);
}

TEST_CASE("circulation is additive over separated vortices") {
    Grid g = make_cube_grid(2, 256, -8.0, 8.0);
    Hamiltonian H = single_2d(g);
    ComplexField pair(g);
    pair.assign([](const auto& x) {
        const cplx w1(x[0] - 1.2, x[1]);
        const cplx w2(x[0] + 1.2, x[1]);
        return w1 * w2 * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0);
    });
    normalize(pair);
    MadelungFields f = decompose(pair, H);
    const double both = circulate(f.phase_grad, circle_loop({0.0, 0.0, 0.0}, 3.0)).value;
    const double left = circulate(f.phase_grad, circle_loop({-1.2, 0.0, 0.0}, 0.6)).value;
    const double right = circulate(f.phase_grad, circle_loop({1.2, 0.0, 0.0}, 0.6)).value;
    CHECK(std::abs(both - left - right) < 1e-3 * kPlanck);
}

TEST_CASE("reversing loop orientation negates the value") {
    Grid g = make_cube_grid(2, 128, -8.0, 8.0);
    Hamiltonian H = single_2d(g);
    ComplexField psi = vortex_eigenstate(g, 1.0, 1.0, 1.0, 1);
    MadelungFields f = decompose(psi, H);
    LoopPath loop = circle_loop({0.2, 0.1, 0.0}, 1.3);
    const double fwd = circulate(f.phase_grad, loop).value;
    const double bwd = circulate(f.phase_grad, reversed(loop)).value;
    CHECK(fwd == Catch::Approx(-bwd).epsilon(1e-12));
}

TEST_CASE("quantum snapshots stay in integer sectors during evolution") {
    Grid g = make_cube_grid(2, 128, -8.0, 8.0);
    Hamiltonian H = single_2d(g);
    H.potential = harmonic_potential(g, H, {1.0, 1.0, 0.0});
    ComplexField psi = vortex_eigenstate(g, 1.0, 1.0, 1.0, 1);
    EvolveParams p;
    p.dt = 1e-3;
    p.steps = 400;
    p.snapshot_stride = 100;
    WaveSeries w = evolve(psi, H, p);
    for (std::size_t k = 0; k < w.snapshots.size(); ++k) {
        MadelungFields f = decompose(w.snapshots[k], H, w.times[k]);
        const double circ = circulate(f.phase_grad, circle_loop({0.0, 0.0, 0.0}, 1.0)).value;
        CHECK(circ / kPlanck == Catch::Approx(1.0).epsilon(5e-3));
        CHECK(winding_number(w.snapshots[k], circle_loop({0.0, 0.0, 0.0}, 1.0)) == 1);
    }
}

TEST_CASE("loops through floored cells warn but still return a value") {
    Grid g = make_cube_grid(2, 128, -8.0, 8.0);
    Hamiltonian H = single_2d(g);
    ComplexField psi = vortex_eigenstate(g, 1.0, 1.0, 1.0, 1);
    MadelungFields f = decompose(psi, H);
    // tiny loop near the core, inside the floored region
    LoopPath loop = circle_loop({0.0, 0.0, 0.0}, 6.5); // far tail: floored cells
    auto res = circulate(f.phase_grad, loop, &f.floored);
    CHECK(res.crossed_floored);
}
