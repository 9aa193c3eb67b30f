#pragma once

#include "spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hopfield {

inline constexpr double pi = std::numbers::pi;

struct ModelParams {
    double omega0 = 1.0;
    double chi = 1.0;
    double g = 0.1;
    double xi = 1.0;
    MediumVelocity v = MediumVelocity::rest();

    void validate() const {
        if (!(omega0 > 0.0)) throw DomainError("omega0 must be positive");
        if (!(chi > 0.0)) throw DomainError("chi must be positive");
        if (!(g >= 0.0)) throw DomainError("g must be non-negative");
        if (xi == 0.0 || !std::isfinite(xi)) throw DomainError("xi must be finite and nonzero");
    }

    ModelParams with_velocity(const MediumVelocity& nv) const {
        ModelParams p = *this;
        p.v = nv;
        return p;
    }
    ModelParams with_coupling(double ng) const {
        ModelParams p = *this;
        p.g = ng;
        return p;
    }
    ModelParams with_gauge(double nxi) const {
        ModelParams p = *this;
        p.xi = nxi;
        return p;
    }
};

struct DerivedConstants {
    double bar_omega;
    // g^2 chi omega0^2, recurring coupling strength
    double coupling;
};

inline DerivedConstants derive_constants(const ModelParams& p) {
    p.validate();
    const double s = p.g * p.g * p.chi;
    return {p.omega0 * std::sqrt(1.0 + 4.0 * pi * s), s * p.omega0 * p.omega0};
}

struct CoupledScalarSpectrum {
    double ksq_plus;
    double ksq_minus;
    bool tachyonic;
};

// Roots of (k^2)^2 - (m1^2 + m2^2) k^2 + m1^2 m2^2 - lambda^4 = 0.
inline CoupledScalarSpectrum coupled_scalar_spectrum(double m1, double m2, double lambda) {
    if (!(m1 >= 0.0) || !(m2 >= 0.0)) throw DomainError("masses must be non-negative");
    const double a = m1 * m1, b = m2 * m2, l4 = std::pow(lambda, 4);
    const double sum = a + b;
    const double root = std::hypot(a - b, 2.0 * lambda * lambda);
    const double plus = 0.5 * (sum + root);
    // product of roots is a b - l4; avoids cancellation in the smaller root
    const double prod = a * b - l4;
    const double minus = plus > 0.0 ? prod / plus : 0.5 * (sum - root);
    return {plus, minus, std::min(plus, minus) < 0.0};
}

}  // namespace hopfield
