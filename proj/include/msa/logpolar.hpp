#pragma once

#include <cmath>
#include <complex>

namespace msa {

/// Complex number stored as e^r * (a + bi) with a^2 + b^2 = 1, so long
/// products neither underflow nor overflow.
struct LogPolarComplex {
    double r = 0.0;
    double a = 1.0;
    double b = 0.0;

    static LogPolarComplex identity() { return {0.0, 1.0, 0.0}; }

    static LogPolarComplex from_complex(std::complex<double> z) {
        double mag = std::abs(z);
        if (mag == 0.0) return {-std::numeric_limits<double>::infinity(), 1.0, 0.0};
        return {std::log(mag), z.real() / mag, z.imag() / mag};
    }

    std::complex<double> to_complex() const {
        return std::exp(r) * std::complex<double>(a, b);
    }

    LogPolarComplex normalized() const {
        double n = std::hypot(a, b);
        return {r + std::log(n), a / n, b / n};
    }
};

inline LogPolarComplex logpolar_mul(const LogPolarComplex& x,
                                    const LogPolarComplex& y) {
    double pa = x.a * y.a - x.b * y.b;
    double pb = x.a * y.b + x.b * y.a;
    double n = std::hypot(pa, pb);
    return {x.r + y.r + std::log(n), pa / n, pb / n};
}

}  // namespace msa
