#pragma once

#include "nelsonlab/fft.hpp"
#include "nelsonlab/field.hpp"

namespace nelsonlab {

enum class Scheme { spectral, central };

namespace detail {

template <class T>
void require_periodic_for_spectral(const FieldT<T>& f, int axis) {
    if (!f.grid().periodic(axis))
        throw config_error("spectral scheme requires a periodic axis (axis " + std::to_string(axis) + ")");
}

template <class T, class Kernel>
FieldT<T> central_stencil(const FieldT<T>& f, int axis, Kernel&& kernel) {
    const Grid& g = f.grid();
    FieldT<T> out(g);
    const std::size_t s = g.stride(axis);
    const int n = g.points(axis);
    const std::size_t lines = g.size() / static_cast<std::size_t>(n);
    const std::size_t block = s * static_cast<std::size_t>(n);
    for (std::size_t line = 0; line < lines; ++line) {
        const std::size_t outer = line / s;
        const std::size_t inner = line % s;
        const std::size_t base = outer * block + inner;
        kernel(f, out, base, s, n, g.spacing(axis), g.periodic(axis));
    }
    return out;
}

template <class T>
FieldT<T> central_derivative(const FieldT<T>& f, int axis) {
    return central_stencil(f, axis,
        [](const FieldT<T>& in, FieldT<T>& out, std::size_t base, std::size_t s, int n,
           double h, bool periodic) {
            const double c = 1.0 / (2.0 * h);
            auto at = [&](int j) { return in[base + static_cast<std::size_t>(j) * s]; };
            auto put = [&](int j, T v) { out[base + static_cast<std::size_t>(j) * s] = v; };
            for (int j = 1; j + 1 < n; ++j) put(j, (at(j + 1) - at(j - 1)) * c);
            if (periodic) {
                put(0, (at(1) - at(n - 1)) * c);
                put(n - 1, (at(0) - at(n - 2)) * c);
            } else {
                put(0, (at(0) * -3.0 + at(1) * 4.0 - at(2)) * c);
                put(n - 1, (at(n - 1) * 3.0 - at(n - 2) * 4.0 + at(n - 3)) * c);
            }
        });
}

template <class T>
FieldT<T> central_second_derivative(const FieldT<T>& f, int axis) {
    return central_stencil(f, axis,
        [](const FieldT<T>& in, FieldT<T>& out, std::size_t base, std::size_t s, int n,
           double h, bool periodic) {
            const double c = 1.0 / (h * h);
            auto at = [&](int j) { return in[base + static_cast<std::size_t>(j) * s]; };
            auto put = [&](int j, T v) { out[base + static_cast<std::size_t>(j) * s] = v; };
            for (int j = 1; j + 1 < n; ++j) put(j, (at(j + 1) - at(j) * 2.0 + at(j - 1)) * c);
            if (periodic) {
                put(0, (at(1) - at(0) * 2.0 + at(n - 1)) * c);
                put(n - 1, (at(0) - at(n - 1) * 2.0 + at(n - 2)) * c);
            } else {
                put(0, (at(0) * 2.0 - at(1) * 5.0 + at(2) * 4.0 - at(3)) * c);
                put(n - 1, (at(n - 1) * 2.0 - at(n - 2) * 5.0 + at(n - 3) * 4.0 - at(n - 4)) * c);
            }
        });
}

/// Multiplies each Fourier mode by a function of the axis wavenumber.
/// order 1: i*k (Nyquist zeroed); order 2: -k^2.
inline ComplexField spectral_apply(const ComplexField& f, int axis, int order) {
    const Grid& g = f.grid();
    ComplexField hat = f;
    fft_forward(hat);
    const int n = g.points(axis);
    const std::size_t s = g.stride(axis);
    const std::size_t block = s * static_cast<std::size_t>(n);
    const std::size_t lines = g.size() / static_cast<std::size_t>(n);
    std::vector<cplx> factor(n);
    for (int j = 0; j < n; ++j) {
        const double k = fourier_wavenumber(g, axis, j);
        if (order == 1) {
            const bool nyquist = (n % 2 == 0 && j == n / 2);
            factor[j] = nyquist ? cplx(0.0, 0.0) : cplx(0.0, k);
        } else {
            factor[j] = cplx(-k * k, 0.0);
        }
    }
    for (std::size_t line = 0; line < lines; ++line) {
        const std::size_t base = (line / s) * block + (line % s);
        for (int j = 0; j < n; ++j) hat[base + static_cast<std::size_t>(j) * s] *= factor[j];
    }
    fft_inverse(hat);
    return hat;
}

inline ComplexField spectral_derivative(const ComplexField& f, int axis, int order) {
    return spectral_apply(f, axis, order);
}

inline RealField spectral_derivative(const RealField& f, int axis, int order) {
    ComplexField tmp(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) tmp[i] = cplx(f[i], 0.0);
    tmp = spectral_apply(tmp, axis, order);
    RealField out(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = tmp[i].real();
    return out;
}

} // namespace detail

/// Partial derivative along one axis.
template <class T>
FieldT<T> derivative(const FieldT<T>& f, int axis, Scheme scheme) {
    if (scheme == Scheme::spectral) {
        detail::require_periodic_for_spectral(f, axis);
        return detail::spectral_derivative(f, axis, 1);
    }
    return detail::central_derivative(f, axis);
}

/// Second partial derivative along one axis.
template <class T>
FieldT<T> second_derivative(const FieldT<T>& f, int axis, Scheme scheme) {
    if (scheme == Scheme::spectral) {
        detail::require_periodic_for_spectral(f, axis);
        return detail::spectral_derivative(f, axis, 2);
    }
    return detail::central_second_derivative(f, axis);
}

inline VectorField gradient(const RealField& f, Scheme scheme) {
    VectorField out(f.grid());
    for (int a = 0; a < f.grid().dims(); ++a) out[a] = derivative(f, a, scheme);
    return out;
}

inline std::vector<ComplexField> gradient(const ComplexField& f, Scheme scheme) {
    std::vector<ComplexField> out;
    out.reserve(f.grid().dims());
    for (int a = 0; a < f.grid().dims(); ++a) out.push_back(derivative(f, a, scheme));
    return out;
}

template <class T>
FieldT<T> laplacian(const FieldT<T>& f, Scheme scheme) {
    FieldT<T> out = second_derivative(f, 0, scheme);
    for (int a = 1; a < f.grid().dims(); ++a) {
        const FieldT<T> d = second_derivative(f, a, scheme);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[i];
    }
    return out;
}

inline RealField divergence(const VectorField& v, Scheme scheme) {
    RealField out = derivative(v[0], 0, scheme);
    for (int a = 1; a < v.dims(); ++a) {
        const RealField d = derivative(v[a], a, scheme);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[i];
    }
    return out;
}

} // namespace nelsonlab
