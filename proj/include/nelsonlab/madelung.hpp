#pragma once

#include <cstdint>

#include "nelsonlab/hamiltonian.hpp"

namespace nelsonlab {

/// Hydrodynamic fields of one wavefunction snapshot. Nodes are handled by a
/// relative density floor: u, R and the quantum kinetic are evaluated on the
/// floored density and the affected cells are reported in `floored`.
struct MadelungFields {
    Grid grid;
    double t = 0.0;
    RealField rho;
    RealField R;                  // osmotic potential, (hbar/2) ln rho
    VectorField v;                // current velocity
    VectorField u;                // osmotic velocity
    VectorField b;                // mean forward drift  v + u
    VectorField b_star;           // mean backward drift v - u
    VectorField phase_grad;       // canonical momentum m v + (e/c)A
    std::vector<RealField> qk;    // quantum kinetic per particle
    std::vector<std::uint8_t> floored;
    double rho_floor = 0.0;

    std::size_t floored_count() const {
        std::size_t n = 0;
        for (auto f : floored) n += f;
        return n;
    }
};

/// Quantum kinetic of particle p: -(hbar^2/2 m_p) (lap_p sqrt(rho)) / sqrt(rho).
/// sqrt(rho) is differentiated as-is (it is smooth away from exact nodes);
/// only the division is floored, so no artificial kink enters the stencil.
inline RealField quantum_kinetic(const RealField& rho, const Hamiltonian& H, int particle,
                                 Scheme scheme = Scheme::spectral, double floor_rel = 1e-12) {
    const Grid& g = rho.grid();
    double rho_max = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) rho_max = std::max(rho_max, rho[i]);
    const double amp_floor = std::sqrt(floor_rel * rho_max);

    RealField amp(g);
    for (std::size_t i = 0; i < rho.size(); ++i) amp[i] = std::sqrt(std::max(rho[i], 0.0));
    RealField lap(g, 0.0);
    for (int a = 0; a < g.dims(); ++a) {
        if (H.particle_of_axis(a) != particle) continue;
        RealField d2 = second_derivative(amp, a, scheme);
        for (std::size_t i = 0; i < lap.size(); ++i) lap[i] += d2[i];
    }
    RealField out(g);
    const double coef = -H.hbar * H.hbar / (2.0 * H.mass[particle]);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = coef * lap[i] / std::max(amp[i], amp_floor);
    return out;
}

/// Full Madelung decomposition of psi under H at time t.
inline MadelungFields decompose(const ComplexField& psi, const Hamiltonian& H, double t = 0.0,
                                Scheme scheme = Scheme::spectral, double floor_rel = 1e-12) {
    const Grid& g = psi.grid();
    MadelungFields f;
    f.grid = g;
    f.t = t;
    f.rho = density(psi);

    double rho_max = 0.0;
    for (std::size_t i = 0; i < f.rho.size(); ++i) rho_max = std::max(rho_max, f.rho[i]);
    f.rho_floor = floor_rel * rho_max;
    f.floored.assign(g.size(), 0);
    for (std::size_t i = 0; i < f.rho.size(); ++i)
        if (f.rho[i] <= f.rho_floor) f.floored[i] = 1;

    f.R = RealField(g);
    const double half_hbar = 0.5 * H.hbar;
    for (std::size_t i = 0; i < f.R.size(); ++i)
        f.R[i] = half_hbar * std::log(std::max(f.rho[i], f.rho_floor));

    const auto grad_psi = gradient(psi, scheme);
    const VectorField grad_rho = gradient(f.rho, scheme);
    const auto a_t = H.uniform_a_at(t);

    f.v = VectorField(g);
    f.u = VectorField(g);
    f.b = VectorField(g);
    f.b_star = VectorField(g);
    f.phase_grad = VectorField(g);
    for (int a = 0; a < g.dims(); ++a) {
        const double m = H.mass_of_axis(a);
        const double nu = H.nu_of_axis(a);
        const double a_shift = H.charge_of_axis(a) * a_t[a] / (m * H.c);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (f.floored[i]) continue; // leave zero, mask flags the cell
            // Im(grad psi / psi) = Im(grad psi * conj psi) / rho
            const double im = std::imag(grad_psi[a][i] * std::conj(psi[i]));
            f.v[a][i] = (H.hbar / m) * im / f.rho[i] - a_shift;
            f.u[a][i] = nu * grad_rho[a][i] / f.rho[i];
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            f.b[a][i] = f.v[a][i] + f.u[a][i];
            f.b_star[a][i] = f.v[a][i] - f.u[a][i];
            f.phase_grad[a][i] = m * f.v[a][i] + H.charge_of_axis(a) * a_t[a] / H.c;
        }
    }

    f.qk.reserve(H.layout.n_particles);
    for (int p = 0; p < H.layout.n_particles; ++p)
        f.qk.push_back(quantum_kinetic(f.rho, H, p, scheme, floor_rel));
    return f;
}

/// Centered time derivative of equally spaced snapshots.
template <class T>
FieldT<T> central_time_derivative(const FieldT<T>& prev, const FieldT<T>& next, double two_dt) {
    FieldT<T> out(prev.grid());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (next[i] - prev[i]) / two_dt;
    return out;
}

/// d_t rho + sum_a d_a (v_a rho).
inline RealField continuity_residual(const MadelungFields& f, const RealField& drho_dt,
                                     Scheme scheme = Scheme::spectral) {
    if (!f.grid.same_layout(drho_dt.grid()))
        throw config_error("continuity residual: snapshot grids disagree");
    RealField res = drho_dt;
    for (int a = 0; a < f.grid.dims(); ++a) {
        RealField flux(f.grid);
        for (std::size_t i = 0; i < flux.size(); ++i) flux[i] = f.v[a][i] * f.rho[i];
        const RealField div = derivative(flux, a, scheme);
        for (std::size_t i = 0; i < res.size(); ++i) res[i] += div[i];
    }
    return res;
}

enum class FokkerPlanckDirection { forward, backward };

/// Residual of the forward/backward Fokker-Planck equation. The diffusion term
/// is assembled as d_a(d_a rho) with the same first-derivative operator used
/// for the drift flux, so substituting b = v + u cancels the osmotic term
/// algebraically (to rounding) wherever the density is unfloored.
inline RealField fokker_planck_residual(const MadelungFields& f, const RealField& drho_dt,
                                        FokkerPlanckDirection dir, const Hamiltonian& H,
                                        Scheme scheme = Scheme::spectral) {
    RealField res = drho_dt;
    const bool forward = dir == FokkerPlanckDirection::forward;
    for (int a = 0; a < f.grid.dims(); ++a) {
        const VectorField& drift = forward ? f.b : f.b_star;
        RealField flux(f.grid);
        for (std::size_t i = 0; i < flux.size(); ++i) flux[i] = drift[a][i] * f.rho[i];
        const RealField div = derivative(flux, a, scheme);
        const RealField diff = derivative(derivative(f.rho, a, scheme), a, scheme);
        const double nu = H.nu_of_axis(a);
        const double sign = forward ? -1.0 : 1.0;
        for (std::size_t i = 0; i < res.size(); ++i) res[i] += div[i] + sign * nu * diff[i];
    }
    return res;
}

enum class DriftKind { forward, backward };

/// Mean derivative of a scalar field:
///   D  f = d_t f + sum_a b_a  d_a f + sum_a nu_a d_a^2 f
///   D* f = d_t f + sum_a b*_a d_a f - sum_a nu_a d_a^2 f
inline RealField mean_derivative(const RealField& f, const RealField& df_dt,
                                 const MadelungFields& fields, DriftKind kind,
                                 const Hamiltonian& H, Scheme scheme = Scheme::central) {
    RealField out = df_dt;
    const VectorField& drift = (kind == DriftKind::forward) ? fields.b : fields.b_star;
    const double sign = (kind == DriftKind::forward) ? 1.0 : -1.0;
    for (int a = 0; a < f.grid().dims(); ++a) {
        const RealField d1 = derivative(f, a, scheme);
        const RealField d2 = second_derivative(f, a, scheme);
        const double nu = H.nu_of_axis(a);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += drift[a][i] * d1[i] + sign * nu * d2[i];
    }
    return out;
}

/// Mean acceleration field from three consecutive snapshots:
///   a_i = d_t v_i + sum_j (v_j.grad_j) v_i - sum_j (u_j.grad_j) u_i
///         - sum_j nu_j lap_j u_i
/// evaluated at the middle snapshot, one component per axis. Central stencils
/// by default: u is zeroed on floored cells, and a local scheme confines that
/// step to the cells next to the mask boundary.
inline VectorField mean_acceleration(const MadelungFields& prev, const MadelungFields& curr,
                                     const MadelungFields& next, double dt, const Hamiltonian& H,
                                     Scheme scheme = Scheme::central) {
    const Grid& g = curr.grid;
    VectorField acc(g);
    for (int comp = 0; comp < g.dims(); ++comp) {
        RealField a = central_time_derivative(prev.v[comp], next.v[comp], 2.0 * dt);
        for (int ax = 0; ax < g.dims(); ++ax) {
            const RealField dv = derivative(curr.v[comp], ax, scheme);
            const RealField du = derivative(curr.u[comp], ax, scheme);
            const RealField d2u = second_derivative(curr.u[comp], ax, scheme);
            const double nu = H.nu_of_axis(ax);
            for (std::size_t i = 0; i < a.size(); ++i)
                a[i] += curr.v[ax][i] * dv[i] - curr.u[ax][i] * du[i] - nu * d2u[i];
        }
        acc[comp] = std::move(a);
    }
    return acc;
}

enum class OsmoticRoute {
    current_velocity, // integrand sum_a d_a v_a
    canonical_gauge   // integrand sum_a [d_a(p_a/m_a) - (e_a/m_a c) d_a A_a]
};

/// Accumulates R(t) = R0(q0) - (hbar/2) Int sum_a d_a v_a dt' along the mean
/// flow: every node of the final snapshot is traced backwards through the
/// velocity series (RK2, multilinear interpolation in space, linear in time)
/// and the divergence is integrated along the characteristic.
inline RealField accumulate_osmotic_potential(const std::vector<MadelungFields>& series,
                                              const std::vector<double>& times,
                                              const RealField& R0, const Hamiltonian& H,
                                              OsmoticRoute route = OsmoticRoute::current_velocity,
                                              Scheme scheme = Scheme::central) {
    if (series.size() != times.size() || series.size() < 2)
        throw config_error("osmotic accumulation needs >= 2 snapshots with times");
    const Grid& g = series.front().grid;

    // divergence integrand per snapshot
    std::vector<RealField> div(series.size(), RealField(g));
    const auto a_shift_div = [&](const MadelungFields& f) {
        RealField d(g, 0.0);
        for (int a = 0; a < g.dims(); ++a) {
            RealField contrib(g);
            if (route == OsmoticRoute::current_velocity) {
                contrib = derivative(f.v[a], a, scheme);
            } else {
                RealField p_over_m(g);
                const double m = H.mass_of_axis(a);
                for (std::size_t i = 0; i < g.size(); ++i) p_over_m[i] = f.phase_grad[a][i] / m;
                contrib = derivative(p_over_m, a, scheme);
                // uniform A has zero divergence; a static non-uniform A would
                // subtract (e/mc) d_a A_a here
                if (H.a_static) {
                    const RealField dA = derivative((*H.a_static)[a], a, scheme);
                    const double coef = H.charge_of_axis(a) / (m * H.c);
                    for (std::size_t i = 0; i < g.size(); ++i) contrib[i] -= coef * dA[i];
                }
            }
            for (std::size_t i = 0; i < g.size(); ++i) d[i] += contrib[i];
        }
        return d;
    };
    for (std::size_t k = 0; k < series.size(); ++k) div[k] = a_shift_div(series[k]);

    auto v_at = [&](const std::array<double, Grid::max_dims>& x, std::size_t k0, std::size_t k1,
                    double w) {
        std::array<double, Grid::max_dims> out{};
        for (int a = 0; a < g.dims(); ++a) {
            const double v0 = interpolate(series[k0].v[a], x);
            const double v1 = interpolate(series[k1].v[a], x);
            out[a] = (1.0 - w) * v0 + w * v1;
        }
        return out;
    };
    auto div_at = [&](const std::array<double, Grid::max_dims>& x, std::size_t k0, std::size_t k1,
                      double w) {
        return (1.0 - w) * interpolate(div[k0], x) + w * interpolate(div[k1], x);
    };

    RealField out(g);
    const std::size_t last = series.size() - 1;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto idx = g.unflatten(i);
        std::array<double, Grid::max_dims> x{};
        for (int a = 0; a < g.dims(); ++a) x[a] = g.coord(a, idx[a]);
        double integral = 0.0;
        for (std::size_t k = last; k > 0; --k) {
            const double dt = times[k] - times[k - 1];
            // midpoint rule backwards in time
            const auto v_here = v_at(x, k, k, 0.0);
            std::array<double, Grid::max_dims> x_mid{};
            for (int a = 0; a < g.dims(); ++a) x_mid[a] = x[a] - 0.5 * dt * v_here[a];
            const auto v_mid = v_at(x_mid, k - 1, k, 0.5);
            integral += dt * div_at(x_mid, k - 1, k, 0.5);
            for (int a = 0; a < g.dims(); ++a) {
                x[a] -= dt * v_mid[a];
                if (!g.periodic(a) &&
                    (x[a] < g.axis(a).min || x[a] > g.axis(a).max))
                    throw out_of_domain_error("osmotic characteristic left the grid");
            }
        }
        out[i] = interpolate(R0, x) - 0.5 * H.hbar * integral;
    }
    return out;
}

} // namespace nelsonlab
