#pragma once

// Scalar numerics for uncoded PAM on the real AWGN channel: Q function and its
// inverse, PAM minimum distance and symbol-error probability, the SNR gap, and
// the rate/power conversions built on top of them.

#include <cmath>
#include <limits>

#include "macpam/types.hpp"

namespace macpam {

// Target symbol-error probability and optional coding gain (dB).
struct GapParams {
    double target_pe;
    double coding_gain_db = 0.0;

    void validate() const {
        if (!(target_pe > 0.0) || !(target_pe < 1.0))
            throw std::domain_error("GapParams: target_pe must lie in (0,1)");
        if (!(coding_gain_db >= 0.0) || !std::isfinite(coding_gain_db))
            throw std::domain_error("GapParams: coding_gain_db must be nonnegative");
    }
};

// Gaussian tail probability Q(x) = P(N(0,1) > x).
inline double q_func(double x) {
    if (!std::isfinite(x)) throw std::domain_error("q_func: non-finite argument");
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

namespace detail {

inline double normal_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

// Acklam's rational approximation to the inverse standard normal CDF,
// max relative error about 1.15e-9 over (0,1).
inline double norm_cdf_inv_approx(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

// Inverse of q_func: Q(q_inv(p)) = p to better than 1e-9 relative.
// Rational initial guess refined by Newton steps on the exact Q.
inline double q_inv(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("q_inv: argument must lie in (0,1)");
    if (p == 0.5) return 0.0;
    // Q^{-1}(p) = -Phi^{-1}(p)
    double x = -detail::norm_cdf_inv_approx(p);
    for (int i = 0; i < 4; ++i) {
        const double err = q_func(x) - p;
        if (std::abs(err) <= 1e-15 * p) break;
        const double pdf = detail::normal_pdf(x);
        if (pdf <= 0.0) break;
        x += err / pdf;  // Q' = -pdf
    }
    return x;
}

// Minimum distance of an M-PAM constellation with average power `power`,
// M = 2^bits.
inline double pam_dmin(double power, int bits) {
    if (bits < 1) throw std::domain_error("pam_dmin: bits must be >= 1");
    if (!(power >= 0.0)) throw std::domain_error("pam_dmin: power must be >= 0");
    const double m = std::exp2(bits);
    return std::sqrt(12.0 * power / (m * m - 1.0));
}

// Symbol-error probability of M-PAM at the given SNR, M = 2^bits.
inline double pam_ser(double snr, int bits) {
    if (bits < 1) throw std::domain_error("pam_ser: bits must be >= 1");
    if (!(snr >= 0.0)) throw std::domain_error("pam_ser: snr must be >= 0");
    const double m = std::exp2(bits);
    return 2.0 * (1.0 - 1.0 / m) * q_func(std::sqrt(3.0 * snr / (m * m - 1.0)));
}

namespace detail {

// Gap for a (possibly non-integer) rate r, using M = 2^r continuously.
// The coding gain divides the gap linearly; the effective gain is capped so
// the coded gap never drops below min(1, uncoded gap).
inline double gap_at_rate(double rate_bits, const GapParams& params) {
    params.validate();
    if (!(rate_bits > 0.0)) throw std::domain_error("gap: rate must be > 0");
    const double m = std::exp2(rate_bits);
    const double arg = m * params.target_pe / (2.0 * (m - 1.0));
    if (!(arg > 0.0) || !(arg < 1.0))
        throw std::domain_error("gap: Q^{-1} argument outside (0,1)");
    const double x = q_inv(arg);
    const double raw = x * x / 3.0;
    if (params.coding_gain_db == 0.0) return raw;
    const double lin = std::pow(10.0, params.coding_gain_db / 10.0);
    return std::max(raw / lin, std::min(raw, 1.0));
}

// Average power needed for rate r at the gap, P = Gamma(r)(2^{2r}-1)N0.
// Strictly increasing in r on r >= -log2(1-pe), where it vanishes.
inline double power_for_rate(double rate_bits, double n0, const GapParams& params) {
    const double m2 = std::exp2(2.0 * rate_bits);
    return gap_at_rate(rate_bits, params) * (m2 - 1.0) * n0;
}

}  // namespace detail

// SNR gap of 2^bits-PAM at the target error probability.
inline double gap(int bits, const GapParams& params) {
    if (bits < 1) throw std::domain_error("gap: bits must be >= 1");
    return detail::gap_at_rate(static_cast<double>(bits), params);
}

// High-order limit of the gap, [Q^{-1}(pe/2)]^2 / 3.
inline double gap_inf(const GapParams& params) {
    params.validate();
    const double x = q_inv(params.target_pe / 2.0);
    const double raw = x * x / 3.0;
    if (params.coding_gain_db == 0.0) return raw;
    const double lin = std::pow(10.0, params.coding_gain_db / 10.0);
    return std::max(raw / lin, std::min(raw, 1.0));
}

// Achievable rate 0.5*log2(1 + SNR/gamma) in bits per real dimension.
inline double rate_with_gap(double snr, double gamma) {
    if (!(snr >= 0.0)) throw std::domain_error("rate_with_gap: snr must be >= 0");
    if (!(gamma > 0.0)) throw std::domain_error("rate_with_gap: gamma must be > 0");
    return 0.5 * std::log2(1.0 + snr / gamma);
}

// Average power at which 2^bits-PAM meets the target error probability,
// P = Gamma(bits, pe) (2^{2 bits} - 1) N0. bits = 0 is admitted as silence.
inline double power_for_integer_rate(int bits, double n0, const GapParams& params) {
    if (bits < 0) throw std::domain_error("power_for_integer_rate: bits must be >= 0");
    if (!(n0 > 0.0)) throw std::domain_error("power_for_integer_rate: n0 must be > 0");
    if (bits == 0) return 0.0;
    return detail::power_for_rate(static_cast<double>(bits), n0, params);
}

// Relative slack when comparing a budget against an integer-rate power level.
// Budgets are routinely quoted to two or three significant figures; the slack
// accepts a level the budget was rounded down from while still rejecting
// anything 0.1% short.
inline constexpr double level_tolerance = 5e-4;

// Largest k with power_for_integer_rate(k) <= power; k = 0 means silence.
inline int max_integer_rate(double power, double n0, const GapParams& params) {
    if (!(power >= 0.0) || !std::isfinite(power))
        throw std::domain_error("max_integer_rate: power must be finite and >= 0");
    int k = 0;
    while (k < 600 && power_for_integer_rate(k + 1, n0, params) <= power * (1.0 + level_tolerance))
        ++k;
    return k;
}

// Unique r with Gamma(r, pe) (2^{2r} - 1) N0 = power; the fixed point of
// r = 0.5*log2(1 + power / (Gamma(r) N0)). Solved by bisection on the
// strictly increasing power-for-rate map.
inline double rate_for_power(double power, double n0, const GapParams& params) {
    params.validate();
    if (!(n0 > 0.0)) throw std::domain_error("rate_for_power: n0 must be > 0");
    if (!(power >= 0.0) || !std::isfinite(power))
        throw std::domain_error("rate_for_power: power must be finite and >= 0");
    // Below r_half the continuous gap leaves its monotone branch.
    const double r_half = -std::log2(1.0 - params.target_pe);
    if (power == 0.0) return r_half;
    double lo = r_half;
    double hi = std::max(1.0, 0.5 * std::log2(1.0 + power / n0));
    int guard = 0;
    while (detail::power_for_rate(hi, n0, params) < power) {
        hi *= 2.0;
        if (++guard > 200) throw numerical_error("rate_for_power: failed to bracket fixed point");
    }
    for (int i = 0; i < 200 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (detail::power_for_rate(mid, n0, params) < power ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Recover the target_pe at which `power` is exactly the integer-rate level
// for `bits`, by bisection over pe (the level is decreasing in pe).
inline double pe_for_power_level(int bits, double power, double n0, double coding_gain_db = 0.0) {
    if (bits < 1) throw std::domain_error("pe_for_power_level: bits must be >= 1");
    if (!(power > 0.0)) throw std::domain_error("pe_for_power_level: power must be > 0");
    double lo_log = std::log(1e-300);
    double hi_log = std::log(0.5);
    const auto level = [&](double log_pe) {
        return power_for_integer_rate(bits, n0, GapParams{std::exp(log_pe), coding_gain_db});
    };
    if (level(lo_log) < power)
        throw numerical_error("pe_for_power_level: power above the representable level range");
    for (int i = 0; i < 200 && (hi_log - lo_log) > 1e-14; ++i) {
        const double mid = 0.5 * (lo_log + hi_log);
        (level(mid) >= power ? lo_log : hi_log) = mid;
    }
    return std::exp(0.5 * (lo_log + hi_log));
}

}  // namespace macpam
