#pragma once

#include "nelsonlab/hamiltonian.hpp"

namespace nelsonlab {

/// Normalized Gaussian packet: per-axis centers, widths sigma of |psi| (so the
/// density has width sigma too... the density variance is sigma^2), boost
/// velocities entering as exp(i m v x / hbar), plus a constant phase offset.
struct GaussianSpec {
    std::array<double, Grid::max_dims> center{};
    std::array<double, Grid::max_dims> sigma{1.0, 1.0, 1.0};
    std::array<double, Grid::max_dims> boost{};
    double phase = 0.0;
};

inline ComplexField gaussian_state(const Grid& g, const Hamiltonian& H, const GaussianSpec& spec) {
    ComplexField psi(g);
    psi.assign([&](const auto& x) {
        double amp = 0.0, phase = spec.phase;
        for (int a = 0; a < g.dims(); ++a) {
            const double d = x[a] - spec.center[a];
            amp += -d * d / (4.0 * spec.sigma[a] * spec.sigma[a]);
            phase += H.mass_of_axis(a) * spec.boost[a] * x[a] / H.hbar;
        }
        return std::polar(std::exp(amp), phase);
    });
    normalize(psi);
    return psi;
}

/// 1-D harmonic eigenstate (n <= 2), Hermite polynomials hardcoded.
inline ComplexField harmonic_eigenstate_1d(const Grid& g, double omega, double m, double hbar,
                                           int n, double center = 0.0) {
    if (g.dims() != 1) throw config_error("harmonic_eigenstate_1d needs a 1-D grid");
    if (n < 0 || n > 2) throw config_error("harmonic eigenstates hardcoded for n <= 2");
    const double alpha = m * omega / hbar;
    ComplexField psi(g);
    psi.assign([&](const auto& x) {
        const double u = (x[0] - center) * std::sqrt(alpha);
        double herm = 1.0;
        if (n == 1) herm = 2.0 * u;
        if (n == 2) herm = 4.0 * u * u - 2.0;
        return cplx(herm * std::exp(-0.5 * u * u), 0.0);
    });
    normalize(psi);
    return psi;
}

/// 2-D central-potential vortex ansatz (x + i y)^l exp(-m w r^2 / 2 hbar):
/// the exact harmonic eigenstate with winding l; smooth as a complex field,
/// so safe for spectral machinery. Negative l conjugates the winding.
inline ComplexField vortex_eigenstate(const Grid& g, double omega, double m, double hbar, int l,
                                      const std::array<double, 2>& center = {0.0, 0.0}) {
    if (g.dims() != 2) throw config_error("vortex_eigenstate needs a 2-D grid");
    const double alpha = m * omega / hbar;
    ComplexField psi(g);
    psi.assign([&](const auto& x) {
        const cplx w(x[0] - center[0], x[1] - center[1]);
        const double r2 = std::norm(w);
        cplx core(1.0, 0.0);
        for (int k = 0; k < std::abs(l); ++k) core *= (l >= 0) ? w : std::conj(w);
        return core * std::exp(-0.5 * alpha * r2);
    });
    normalize(psi);
    return psi;
}

} // namespace nelsonlab
