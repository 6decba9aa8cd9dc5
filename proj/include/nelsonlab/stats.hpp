#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "nelsonlab/errors.hpp"

namespace nelsonlab {

/// Pearson chi-square against given expected counts. Bins with expected
/// count below `min_expected` are pooled into their predecessor before the
/// statistic is formed.
struct ChiSquareReport {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    double l1_distance = 0.0; // sum |observed/N - expected/N|
    int bins_used = 0;
};

inline ChiSquareReport chi_square_test(std::vector<double> observed,
                                       std::vector<double> expected,
                                       double min_expected = 5.0) {
    if (observed.size() != expected.size() || observed.empty())
        throw config_error("chi-square inputs must be equal-length and non-empty");

    const double n_obs = std::accumulate(observed.begin(), observed.end(), 0.0);
    const double n_exp = std::accumulate(expected.begin(), expected.end(), 0.0);
    if (!(n_obs > 0.0) || !(n_exp > 0.0))
        throw config_error("chi-square inputs must have positive totals");
    // scale expected to the observed total
    for (auto& e : expected) e *= n_obs / n_exp;

    ChiSquareReport rep;
    for (std::size_t k = 0; k < observed.size(); ++k)
        rep.l1_distance += std::abs(observed[k] - expected[k]) / n_obs;

    // pool under-populated bins
    std::vector<double> obs_p, exp_p;
    double carry_o = 0.0, carry_e = 0.0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        carry_o += observed[k];
        carry_e += expected[k];
        if (carry_e >= min_expected) {
            obs_p.push_back(carry_o);
            exp_p.push_back(carry_e);
            carry_o = carry_e = 0.0;
        }
    }
    if (carry_e > 0.0) {
        if (exp_p.empty()) {
            obs_p.push_back(carry_o);
            exp_p.push_back(carry_e);
        } else {
            obs_p.back() += carry_o;
            exp_p.back() += carry_e;
        }
    }

    rep.bins_used = static_cast<int>(exp_p.size());
    for (std::size_t k = 0; k < exp_p.size(); ++k) {
        const double d = obs_p[k] - exp_p[k];
        rep.statistic += d * d / exp_p[k];
    }
    rep.dof = std::max(1, rep.bins_used - 1);
    rep.p_value = boost::math::gamma_q(0.5 * rep.dof, 0.5 * rep.statistic);
    return rep;
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw config_error("slope fit needs >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw numerical_error("degenerate abscissa in slope fit");
    return (n * sxy - sx * sy) / denom;
}

/// Kahan-compensated mean of a sequence; order-insensitive to ~1e-16.
inline double compensated_mean(const std::vector<double>& xs) {
    double sum = 0.0, carry = 0.0;
    for (double x : xs) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double mu = compensated_mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - mu) * (x - mu);
    return acc / static_cast<double>(xs.size() - 1);
}

} // namespace nelsonlab
