#pragma once

#include <functional>
#include <limits>

#include "nelsonlab/hamiltonian.hpp"

namespace nelsonlab {

enum class EvolutionMode { quantum, classical };

/// The nonlinearity that turns the Schroedinger equation into its classical
/// counterpart: per particle, + (hbar^2/2m_i) lap_i|psi| / |psi|, evaluated on
/// a floored modulus. Added to the potential it cancels the quantum kinetic.
inline RealField classical_correction(const ComplexField& psi, const Hamiltonian& H,
                                      Scheme scheme = Scheme::spectral) {
    const Grid& g = psi.grid();
    RealField amp(g);
    double amp_max = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        amp[i] = std::abs(psi[i]);
        amp_max = std::max(amp_max, amp[i]);
    }
    const double floor = 1e-6 * amp_max; // sqrt of the 1e-12 density floor
    RealField out(g, 0.0);
    for (int p = 0; p < H.layout.n_particles; ++p) {
        RealField lap(g, 0.0);
        for (int a = 0; a < g.dims(); ++a) {
            if (H.particle_of_axis(a) != p) continue;
            RealField d2 = second_derivative(amp, a, scheme);
            for (std::size_t i = 0; i < lap.size(); ++i) lap[i] += d2[i];
        }
        const double coef = H.hbar * H.hbar / (2.0 * H.mass[p]);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += coef * lap[i] / std::max(amp[i], floor);
    }
    return out;
}

namespace detail {

/// Kinetic dispersion at one Fourier node: sum_a (hbar k_a - e_a A_a/c)^2 / 2 m_a.
inline double kinetic_at(const Hamiltonian& H, const std::array<double, Grid::max_dims>& k,
                         const std::array<double, Grid::max_dims>& a_of_t) {
    double acc = 0.0;
    for (int a = 0; a < H.grid.dims(); ++a) {
        const double p = H.hbar * k[a] - H.charge_of_axis(a) * a_of_t[a] / H.c;
        acc += p * p / (2.0 * H.mass_of_axis(a));
    }
    return acc;
}

template <class PhaseFn>
void apply_kinetic_factor(ComplexField& psi, const Hamiltonian& H, double t_mid, PhaseFn&& fn) {
    const Grid& g = psi.grid();
    const auto a_mid = H.uniform_a_at(t_mid);
    fft_forward(psi);
    std::array<double, Grid::max_dims> k{};
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const auto idx = g.unflatten(i);
        for (int a = 0; a < g.dims(); ++a) k[a] = fourier_wavenumber(g, a, idx[a]);
        psi[i] *= fn(kinetic_at(H, k, a_mid));
    }
    fft_inverse(psi);
}

} // namespace detail

/// One Strang step exp(-iV dt/2h) exp(-iT dt/h) exp(-iV dt/2h). All axes must
/// be periodic; a vector potential must be spatially uniform here (it enters
/// through the kinetic momentum shift).
inline void split_step(ComplexField& psi, const Hamiltonian& H, double t, double dt,
                       EvolutionMode mode = EvolutionMode::quantum,
                       Scheme correction_scheme = Scheme::spectral) {
    const Grid& g = psi.grid();
    for (int a = 0; a < g.dims(); ++a)
        if (!g.periodic(a)) throw config_error("split_step requires periodic axes");
    if (H.a_static)
        throw config_error("split_step supports only spatially uniform vector potentials");

    RealField v_eff = H.potential;
    if (mode == EvolutionMode::classical) {
        // frozen-coefficient splitting: nonlinearity from the pre-step modulus
        const RealField corr = classical_correction(psi, H, correction_scheme);
        for (std::size_t i = 0; i < v_eff.size(); ++i) v_eff[i] += corr[i];
    }

    const double hbar = H.hbar;
    for (std::size_t i = 0; i < psi.size(); ++i)
        psi[i] *= std::polar(1.0, -v_eff[i] * dt / (2.0 * hbar));
    detail::apply_kinetic_factor(psi, H, t + 0.5 * dt,
                                 [&](double T) { return std::polar(1.0, -T * dt / hbar); });
    for (std::size_t i = 0; i < psi.size(); ++i)
        psi[i] *= std::polar(1.0, -v_eff[i] * dt / (2.0 * hbar));

    if (H.include_rest_energy) {
        // exact global phase
        const cplx rot = std::polar(1.0, -H.rest_energy() * dt / hbar);
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= rot;
    }
}

/// <psi|H|psi> with spectral kinetic energy (uniform-A Hamiltonians).
inline double energy_expectation(const ComplexField& psi, const Hamiltonian& H, double t = 0.0) {
    const Grid& g = psi.grid();
    double e_pot = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) e_pot += H.potential[i] * std::norm(psi[i]);
    e_pot *= g.cell_volume();

    ComplexField hat = psi;
    fft_forward(hat);
    const auto a_t = H.uniform_a_at(t);
    std::array<double, Grid::max_dims> k{};
    double e_kin = 0.0;
    for (std::size_t i = 0; i < hat.size(); ++i) {
        const auto idx = g.unflatten(i);
        for (int a = 0; a < g.dims(); ++a) k[a] = fourier_wavenumber(g, a, idx[a]);
        e_kin += detail::kinetic_at(H, k, a_t) * std::norm(hat[i]);
    }
    e_kin *= g.cell_volume() / static_cast<double>(g.size());

    return e_kin + e_pot + H.rest_energy();
}

namespace detail {

/// H psi with Hermitian central differences; supports arbitrary static A plus
/// a uniform time-dependent part.
class CentralHamiltonianApply {
public:
    CentralHamiltonianApply(const Hamiltonian& H, double t_mid) : H_(H) {
        const Grid& g = H.grid;
        a_total_ = VectorField(g);
        const auto a_u = H.uniform_a_at(t_mid);
        for (int a = 0; a < g.dims(); ++a) {
            a_total_[a] = H.a_static ? (*H.a_static)[a] : RealField(g, 0.0);
            const double scale = H.charge_of_axis(a) / H.c; // a = (e/c) A
            for (std::size_t i = 0; i < a_total_[a].size(); ++i)
                a_total_[a][i] = scale * (a_total_[a][i] + a_u[a]);
        }
    }

    ComplexField operator()(const ComplexField& psi) const {
        const Grid& g = H_.grid;
        ComplexField out(g, cplx(0.0, 0.0));
        const double hbar = H_.hbar;
        for (int a = 0; a < g.dims(); ++a) {
            const double inv2m = 1.0 / (2.0 * H_.mass_of_axis(a));
            const ComplexField d2 = second_derivative(psi, a, Scheme::central);

            ComplexField a_psi(g);
            for (std::size_t i = 0; i < psi.size(); ++i) a_psi[i] = a_total_[a][i] * psi[i];
            const ComplexField d_apsi = derivative(a_psi, a, Scheme::central);
            const ComplexField d_psi = derivative(psi, a, Scheme::central);

            for (std::size_t i = 0; i < out.size(); ++i) {
                const cplx gauge = cplx(0.0, hbar) * (d_apsi[i] + a_total_[a][i] * d_psi[i]);
                const double a2 = a_total_[a][i] * a_total_[a][i];
                out[i] += inv2m * (-hbar * hbar * d2[i] + gauge + a2 * psi[i]);
            }
        }
        const double rest = H_.rest_energy();
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += (H_.potential[i] + rest) * psi[i];
        return out;
    }

private:
    const Hamiltonian& H_;
    VectorField a_total_;
};

inline cplx dot(const ComplexField& x, const ComplexField& y) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * y[i];
    return acc;
}

inline double norm2(const ComplexField& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::norm(x[i]);
    return std::sqrt(acc);
}

/// Unpreconditioned BiCGStab for the complex system op(x) = b.
template <class Op>
ComplexField bicgstab(Op&& op, const ComplexField& b, double rel_tol, int max_iter,
                      int* iterations_out = nullptr) {
    ComplexField x(b.grid(), cplx(0.0, 0.0));
    ComplexField r = b;
    ComplexField r0 = r;
    ComplexField p = r;
    ComplexField v(b.grid(), cplx(0.0, 0.0));
    cplx rho(1.0, 0.0), alpha(1.0, 0.0), omega(1.0, 0.0);
    const double b_norm = norm2(b);
    if (b_norm == 0.0) return x;
    cplx rho_prev = dot(r0, r);
    for (int it = 1; it <= max_iter; ++it) {
        v = op(p);
        alpha = rho_prev / dot(r0, v);
        ComplexField s = r;
        for (std::size_t i = 0; i < s.size(); ++i) s[i] -= alpha * v[i];
        if (norm2(s) / b_norm < rel_tol) {
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * p[i];
            if (iterations_out) *iterations_out = it;
            return x;
        }
        const ComplexField t = op(s);
        omega = dot(t, s) / dot(t, t);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * p[i] + omega * s[i];
        r = s;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= omega * t[i];
        if (norm2(r) / b_norm < rel_tol) {
            if (iterations_out) *iterations_out = it;
            return x;
        }
        rho = dot(r0, r);
        const cplx beta = (rho / rho_prev) * (alpha / omega);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        rho_prev = rho;
        if (std::abs(rho) < 1e-290) break; // breakdown
    }
    throw numerical_error("BiCGStab did not converge within " + std::to_string(max_iter) +
                          " iterations (rel_tol " + std::to_string(rel_tol) + ")");
}

} // namespace detail

/// One Crank-Nicolson step (I + i dt H / 2hbar) psi' = (I - i dt H / 2hbar) psi.
/// Handles arbitrary smooth static vector potentials on grids of <= 2 axes.
inline void crank_nicolson(ComplexField& psi, const Hamiltonian& H, double t, double dt,
                           double solver_tol = 1e-12, int max_iter = 2000) {
    if (psi.grid().dims() > 2)
        throw config_error("crank_nicolson supports grids of at most 2 axes");
    detail::CentralHamiltonianApply apply_h(H, t + 0.5 * dt);
    const cplx ia = cplx(0.0, dt / (2.0 * H.hbar));

    const ComplexField h_psi = apply_h(psi);
    ComplexField rhs = psi;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= ia * h_psi[i];

    auto lhs = [&](const ComplexField& x) {
        ComplexField y = apply_h(x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + ia * y[i];
        return y;
    };
    psi = detail::bicgstab(lhs, rhs, solver_tol, max_iter);
}

struct GroundStateResult {
    ComplexField psi;
    double energy = 0.0;
    int iterations = 0;
    double eigen_residual = 0.0; // ||H psi - E psi||_2 at exit
};

namespace detail {

/// H psi with the spectral kinetic operator (scalar Hamiltonians).
inline ComplexField apply_spectral_h(const ComplexField& psi, const Hamiltonian& H) {
    ComplexField out = psi;
    apply_kinetic_factor(out, H, 0.0, [](double T) { return cplx(T, 0.0); });
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += H.potential[i] * psi[i];
    return out;
}

inline double eigen_residual_norm(const ComplexField& psi, const Hamiltonian& H, double energy) {
    const ComplexField h_psi = apply_spectral_h(psi, H);
    double acc = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) acc += std::norm(h_psi[i] - energy * psi[i]);
    return std::sqrt(acc * psi.grid().cell_volume());
}

} // namespace detail

/// Imaginary-time relaxation from a caller-supplied seed state. Runs the
/// norm-preserving split update exp(-H dtau / hbar) until the Rayleigh
/// quotient settles to |dE| < tol, then twice more with dtau/5 to squeeze the
/// Trotter bias out of the state. When `residual_tol > 0` an extra polish
/// phase keeps sweeping until ||H psi - E psi|| drops below it, which is what
/// pointwise identities (stationarity, quantum kinetic balance) need; the
/// energy criterion alone leaves tail-amplified contamination behind.
inline GroundStateResult imaginary_time_relax(ComplexField psi0, const Hamiltonian& H,
                                              double dtau, double tol, int max_iter = 200000,
                                              double residual_tol = 1e-6) {
    if (H.has_vector_potential())
        throw config_error("imaginary-time relaxation expects a scalar Hamiltonian");
    GroundStateResult res{std::move(psi0), 0.0, 0, 0.0};
    normalize(res.psi);
    double energy = energy_expectation(res.psi, H);
    const double hbar = H.hbar;
    auto sweep = [&](double step) {
        for (std::size_t i = 0; i < res.psi.size(); ++i)
            res.psi[i] *= std::exp(-H.potential[i] * step / (2.0 * hbar));
        detail::apply_kinetic_factor(res.psi, H, 0.0,
                                     [&](double T) { return std::exp(-T * step / hbar); });
        for (std::size_t i = 0; i < res.psi.size(); ++i)
            res.psi[i] *= std::exp(-H.potential[i] * step / (2.0 * hbar));
        normalize(res.psi);
    };
    auto bump_iter = [&]() {
        if (++res.iterations > max_iter)
            throw numerical_error("imaginary-time relaxation did not converge within " +
                                  std::to_string(max_iter) + " iterations");
    };
    const double last_step = dtau / 25.0;
    for (double step : {dtau, dtau / 5.0, last_step}) {
        for (;;) {
            bump_iter();
            sweep(step);
            const double e_new = energy_expectation(res.psi, H);
            const bool settled = std::abs(e_new - energy) < tol;
            energy = e_new;
            if (settled) break;
        }
    }
    if (residual_tol > 0.0) {
        // best-effort: the split map's own Trotter bias floors the residual,
        // so halve the step on stagnation and stop once it bottoms out
        double step = last_step;
        double prev_residual = std::numeric_limits<double>::infinity();
        for (;;) {
            res.eigen_residual = detail::eigen_residual_norm(res.psi, H, energy);
            if (res.eigen_residual < residual_tol) break;
            if (res.eigen_residual > 0.99 * prev_residual) {
                step *= 0.5;
                if (step < last_step / 256.0) break;
            }
            prev_residual = res.eigen_residual;
            for (int k = 0; k < 25; ++k) {
                bump_iter();
                sweep(step);
            }
            energy = energy_expectation(res.psi, H);
        }
    } else {
        res.eigen_residual = detail::eigen_residual_norm(res.psi, H, energy);
    }
    res.energy = energy + H.rest_energy();
    return res;
}

/// Ground-state preparation from a broad nodeless seed.
inline GroundStateResult imaginary_time_ground_state(const Hamiltonian& H, double tol,
                                                     double dtau = 0.05) {
    ComplexField seed(H.grid);
    seed.assign([&](const auto& x) {
        double r2 = 0.0;
        for (int a = 0; a < H.grid.dims(); ++a) {
            const auto& ax = H.grid.axis(a);
            const double span = ax.length();
            const double mid = 0.5 * (ax.min + ax.max);
            const double u = (x[a] - mid) / (0.25 * span);
            r2 += u * u;
        }
        return cplx(std::exp(-0.5 * r2), 0.0);
    });
    return imaginary_time_relax(std::move(seed), H, dtau, tol);
}

struct EvolveParams {
    double t0 = 0.0;
    double dt = 1e-3;
    int steps = 0;
    int snapshot_stride = 1;
    EvolutionMode mode = EvolutionMode::quantum;
};

struct WaveSeries {
    std::vector<double> times;
    std::vector<ComplexField> snapshots;
    std::vector<double> norms;    // per snapshot
    std::vector<double> energies; // per snapshot
};

/// Drives split_step over a schedule, recording snapshots (always including
/// the initial and final states) and the conserved-quantity log.
inline WaveSeries evolve(const ComplexField& psi0, const Hamiltonian& H, const EvolveParams& p,
                         const std::function<void(int, double, const ComplexField&)>& on_snapshot = {}) {
    if (p.steps < 0 || p.snapshot_stride < 1) throw config_error("bad evolve schedule");
    WaveSeries series;
    ComplexField psi = psi0;
    auto record = [&](int step) {
        const double t = p.t0 + step * p.dt;
        series.times.push_back(t);
        series.snapshots.push_back(psi);
        series.norms.push_back(norm_squared(psi));
        series.energies.push_back(energy_expectation(psi, H, t));
        if (on_snapshot) on_snapshot(step, t, psi);
    };
    record(0);
    for (int s = 1; s <= p.steps; ++s) {
        split_step(psi, H, p.t0 + (s - 1) * p.dt, p.dt, p.mode);
        if (s % p.snapshot_stride == 0 || s == p.steps) record(s);
    }
    return series;
}

} // namespace nelsonlab
