#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "nelsonlab/field.hpp"

namespace nelsonlab {
namespace detail {

/// Cached FFTW plans keyed by shape and direction. FFTW's planner is not
/// thread-safe, so creation is serialized; execution via fftw_execute_dft on
/// caller buffers is safe.
class FftPlanCache {
public:
    static FftPlanCache& instance() {
        static FftPlanCache cache;
        return cache;
    }

    fftw_plan get(const std::vector<int>& shape, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto key = std::make_pair(shape, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::size_t n = 1;
        for (int s : shape) n *= static_cast<std::size_t>(s);
        // plan on a scratch buffer; FFTW_ESTIMATE never touches the data
        std::vector<std::complex<double>> scratch(n);
        auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan p = fftw_plan_dft(static_cast<int>(shape.size()),
                                    shape.data(), ptr, ptr, sign, FFTW_ESTIMATE);
        if (!p) throw numerical_error("fftw plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    FftPlanCache() = default;
    std::mutex mutex_;
    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

} // namespace detail

/// In-place forward DFT (unnormalized, FFTW sign convention e^{-ikx}).
inline void fft_forward(ComplexField& f) {
    std::vector<int> shape(f.grid().dims());
    for (int a = 0; a < f.grid().dims(); ++a) shape[a] = f.grid().points(a);
    fftw_plan p = detail::FftPlanCache::instance().get(shape, FFTW_FORWARD);
    auto* ptr = reinterpret_cast<fftw_complex*>(f.values().data());
    fftw_execute_dft(p, ptr, ptr);
}

/// In-place inverse DFT, normalized by 1/N.
inline void fft_inverse(ComplexField& f) {
    std::vector<int> shape(f.grid().dims());
    for (int a = 0; a < f.grid().dims(); ++a) shape[a] = f.grid().points(a);
    fftw_plan p = detail::FftPlanCache::instance().get(shape, FFTW_BACKWARD);
    auto* ptr = reinterpret_cast<fftw_complex*>(f.values().data());
    fftw_execute_dft(p, ptr, ptr);
    const double s = 1.0 / static_cast<double>(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= s;
}

/// Angular wavenumber of Fourier index j on axis a: k = 2*pi*m/L with m the
/// signed mode number (negative for j > n/2).
inline double fourier_wavenumber(const Grid& g, int a, int j) {
    const int n = g.points(a);
    const double L = g.axis(a).length();
    const int m = (j <= n / 2) ? j : j - n;
    return 2.0 * M_PI * static_cast<double>(m) / L;
}

} // namespace nelsonlab
