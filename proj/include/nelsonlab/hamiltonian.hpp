#pragma once

#include <optional>

#include "nelsonlab/operators.hpp"

namespace nelsonlab {

/// Which particle owns each grid axis. Supported layouts: one particle in
/// 1/2/3 dimensions, or two 1-D particles on a 2-D configuration grid.
struct ParticleLayout {
    int n_particles = 1;
    std::array<int, Grid::max_dims> axis_particle{0, 0, 0};

    static ParticleLayout single(int dims) {
        ParticleLayout l;
        l.n_particles = 1;
        l.axis_particle = {0, 0, 0};
        (void)dims;
        return l;
    }
    static ParticleLayout two_1d() {
        ParticleLayout l;
        l.n_particles = 2;
        l.axis_particle = {0, 1, 0};
        return l;
    }
};

/// Spatially uniform, optionally oscillating vector potential
/// A(t) = constant + amplitude * sin(omega t), per axis.
struct UniformVectorPotential {
    std::array<double, Grid::max_dims> constant{};
    std::array<double, Grid::max_dims> amplitude{};
    double omega = 0.0;

    std::array<double, Grid::max_dims> at(double t) const {
        std::array<double, Grid::max_dims> a{};
        for (int i = 0; i < Grid::max_dims; ++i)
            a[i] = constant[i] + amplitude[i] * std::sin(omega * t);
        return a;
    }
    std::array<double, Grid::max_dims> time_derivative(double t) const {
        std::array<double, Grid::max_dims> a{};
        for (int i = 0; i < Grid::max_dims; ++i)
            a[i] = amplitude[i] * omega * std::cos(omega * t);
        return a;
    }
};

struct Hamiltonian {
    Grid grid;
    ParticleLayout layout;
    std::vector<double> mass{1.0};   // per particle
    std::vector<double> charge{0.0}; // per particle
    double hbar = 1.0;
    double c = 1.0;
    RealField potential; // total static scalar potential, external + interaction
    std::optional<UniformVectorPotential> a_uniform;
    std::optional<VectorField> a_static; // non-uniform A(x); Crank-Nicolson path only
    bool include_rest_energy = false;

    Hamiltonian() = default;
    Hamiltonian(Grid g, ParticleLayout lay, std::vector<double> m, std::vector<double> q)
        : grid(std::move(g)), layout(lay), mass(std::move(m)), charge(std::move(q)),
          potential(grid, 0.0) {
        if (static_cast<int>(mass.size()) != layout.n_particles ||
            static_cast<int>(charge.size()) != layout.n_particles)
            throw config_error("mass/charge count must match the particle count");
        for (double m_i : mass)
            if (!(m_i > 0.0)) throw config_error("particle masses must be positive");
    }

    int particle_of_axis(int a) const { return layout.axis_particle[a]; }
    double mass_of_axis(int a) const { return mass[particle_of_axis(a)]; }
    double charge_of_axis(int a) const { return charge[particle_of_axis(a)]; }

    /// Diffusion coefficient nu = hbar/2m for the particle owning axis a.
    double nu_of_axis(int a) const { return hbar / (2.0 * mass_of_axis(a)); }

    double rest_energy() const {
        if (!include_rest_energy) return 0.0;
        double e = 0.0;
        for (double m_i : mass) e += m_i * c * c;
        return e;
    }

    /// Uniform A(t) per axis; zero when absent.
    std::array<double, Grid::max_dims> uniform_a_at(double t) const {
        if (a_uniform) return a_uniform->at(t);
        return {};
    }

    bool has_vector_potential() const { return a_uniform.has_value() || a_static.has_value(); }

    double compton_length(int particle) const { return hbar / (mass[particle] * c); }
    double compton_frequency(int particle) const { return mass[particle] * c * c / hbar; }
};

/// Sum over axes of  1/2 m_a w_a^2 (x_a - c_a)^2.
inline RealField harmonic_potential(const Grid& grid, const Hamiltonian& H,
                                    const std::array<double, Grid::max_dims>& omega,
                                    const std::array<double, Grid::max_dims>& center = {}) {
    RealField v(grid);
    v.assign([&](const auto& x) {
        double acc = 0.0;
        for (int a = 0; a < grid.dims(); ++a) {
            const double d = x[a] - center[a];
            acc += 0.5 * H.mass_of_axis(a) * omega[a] * omega[a] * d * d;
        }
        return acc;
    });
    return v;
}

/// Two 1-D particles: e1*e2 / sqrt((x1-x2)^2 + a^2). The softening keeps the
/// 3-D kernel's non-separability without its on-grid singularity.
inline RealField softened_coulomb(const Grid& grid, double e1e2, double softening) {
    if (grid.dims() != 2) throw config_error("softened Coulomb needs the 2-particle 1-D layout");
    if (!(softening > 0.0)) throw config_error("Coulomb softening must be positive");
    RealField v(grid);
    v.assign([&](const auto& x) {
        const double d = x[0] - x[1];
        return e1e2 / std::sqrt(d * d + softening * softening);
    });
    return v;
}

/// Close-range smearing of an interaction potential:
/// V -> V + (1/12) lambda_c^2 laplacian(V).
inline RealField darwin_correct(const RealField& v_int, double lambda_c,
                                Scheme scheme = Scheme::central) {
    RealField lap = laplacian(v_int, scheme);
    RealField out = v_int;
    const double f = lambda_c * lambda_c / 12.0;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += f * lap[i];
    return out;
}

} // namespace nelsonlab
