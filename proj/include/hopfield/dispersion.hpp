#pragma once

#include "model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hopfield {

enum class BranchId { LightconePlus, LightconeMinus, ResonanceUpper, ResonanceLower, Sellmeier1, Sellmeier2 };

inline constexpr std::array<BranchId, 6> all_branches = {
    BranchId::LightconePlus, BranchId::LightconeMinus, BranchId::ResonanceUpper,
    BranchId::ResonanceLower, BranchId::Sellmeier1, BranchId::Sellmeier2};

inline std::string_view to_string(BranchId b) {
    switch (b) {
        case BranchId::LightconePlus: return "lightcone_plus";
        case BranchId::LightconeMinus: return "lightcone_minus";
        case BranchId::ResonanceUpper: return "resonance_upper";
        case BranchId::ResonanceLower: return "resonance_lower";
        case BranchId::Sellmeier1: return "sellmeier1";
        case BranchId::Sellmeier2: return "sellmeier2";
    }
    return "?";
}

inline bool is_sellmeier(BranchId b) { return b == BranchId::Sellmeier1 || b == BranchId::Sellmeier2; }

struct BranchPoint {
    Vec3 kvec;
    BranchId branch;
    double k0;
    double omega;

    FourVector k() const { return four(k0, kvec); }
};

// Raised when the quartic does not yield the expected roots.
class BranchFailure : public std::runtime_error {
public:
    BranchFailure(const std::string& what, Vec3 k, int found)
        : std::runtime_error(what), kvec(std::move(k)), positive_roots(found) {}
    Vec3 kvec;
    int positive_roots;
};

inline double comoving_frequency(const FourVector& k, const ModelParams& p) { return mink_dot(k, p.v.vec()); }

inline void require_off_pole(double omega, const ModelParams& p) {
    if (std::abs(omega * omega - p.omega0 * p.omega0) < 1e-14 * p.omega0 * p.omega0)
        throw DomainError("omega^2 = omega0^2 is a pole of the dispersion function");
}

inline double dr_value(const FourVector& k, const ModelParams& p) {
    const double w = comoving_frequency(k, p);
    require_off_pole(w, p);
    const double c = derive_constants(p).coupling;
    return mink_dot(k, k) / (4.0 * pi) - c * w * w / (w * w - p.omega0 * p.omega0);
}

inline double dr_slope(const FourVector& k, const ModelParams& p) {
    const double w = comoving_frequency(k, p);
    require_off_pole(w, p);
    const double c = derive_constants(p).coupling;
    const double d = w * w - p.omega0 * p.omega0;
    return k(0) / (2.0 * pi) + 2.0 * w * p.v.gamma() * c * p.omega0 * p.omega0 / (d * d);
}

// k^2 (omega^2 - omega0^2) - 4 pi g^2 chi omega0^2 omega^2, the pole-free form of DR.
inline double cleared_dispersion(const FourVector& k, const ModelParams& p) {
    const double w = comoving_frequency(k, p);
    const double c = derive_constants(p).coupling;
    return mink_dot(k, k) * (w * w - p.omega0 * p.omega0) - 4.0 * pi * c * w * w;
}

namespace detail {

// Coefficients (a0..a4) of the cleared dispersion as a polynomial in k0.
inline std::array<double, 5> cleared_quartic(const Vec3& kvec, const ModelParams& p) {
    const double v0 = p.v.gamma();
    const double b = kvec.dot(p.v.spatial());
    const double K = kvec.squaredNorm();
    const double w02 = p.omega0 * p.omega0;
    const double c4 = 4.0 * pi * derive_constants(p).coupling;
    return {-K * (b * b - w02) - c4 * b * b,
            2.0 * v0 * b * (K + c4),
            b * b - w02 - (K + c4) * v0 * v0,
            -2.0 * v0 * b,
            v0 * v0};
}

inline double horner(const std::array<double, 5>& a, double x, double* deriv) {
    double f = a[4], d = 0.0;
    for (int i = 3; i >= 0; --i) {
        d = d * x + f;
        f = f * x + a[i];
    }
    if (deriv) *deriv = d;
    return f;
}

}  // namespace detail

// All four real roots of the cleared quartic in k0, ascending.
inline std::vector<double> quartic_roots(const Vec3& kvec, const ModelParams& p) {
    const auto a = detail::cleared_quartic(kvec, p);
    Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
    for (int i = 0; i < 3; ++i) comp(i + 1, i) = 1.0;
    for (int i = 0; i < 4; ++i) comp(i, 3) = -a[i] / a[4];
    Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
    std::vector<double> roots;
    const double scale = 1.0 + comp.cwiseAbs().maxCoeff();
    for (int i = 0; i < 4; ++i) {
        const cplx z = es.eigenvalues()(i);
        if (std::abs(z.imag()) > 1e-6 * scale) continue;
        double x = z.real();
        for (int it = 0; it < 4; ++it) {
            double d = 0.0;
            const double f = detail::horner(a, x, &d);
            if (d == 0.0) break;
            const double step = f / d;
            if (!std::isfinite(step) || std::abs(step) > 1e-6 * scale) break;
            x -= step;
            if (std::abs(step) <= 1e-16 * std::abs(x)) break;
        }
        roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

inline BranchPoint branch_frequencies(const Vec3& kvec, const ModelParams& p, BranchId branch) {
    if (!kvec.allFinite()) throw DomainError("non-finite momentum");
    const double v0 = p.v.gamma();
    const double b = kvec.dot(p.v.spatial());
    const auto make = [&](double k0) { return BranchPoint{kvec, branch, k0, v0 * k0 - b}; };
    switch (branch) {
        case BranchId::LightconePlus:
        case BranchId::LightconeMinus:
            if (kvec.squaredNorm() == 0.0) throw DomainError("light-cone branch needs a nonzero momentum");
            return make(branch == BranchId::LightconePlus ? kvec.norm() : -kvec.norm());
        case BranchId::ResonanceUpper:
        case BranchId::ResonanceLower: {
            const double wb = derive_constants(p).bar_omega;
            return make((b + (branch == BranchId::ResonanceUpper ? wb : -wb)) / v0);
        }
        case BranchId::Sellmeier1:
        case BranchId::Sellmeier2: {
            std::vector<double> pos;
            for (double x : quartic_roots(kvec, p))
                if (v0 * x - b > 0.0) pos.push_back(x);
            if (pos.size() != 2)
                throw BranchFailure("expected two positive-omega roots of the cleared dispersion", kvec,
                                    int(pos.size()));
            std::sort(pos.rbegin(), pos.rend());
            const BranchPoint bp = make(branch == BranchId::Sellmeier1 ? pos[0] : pos[1]);
            if (p.g > 0.0) require_off_pole(bp.omega, p);
            return bp;
        }
    }
    throw DomainError("unknown branch");
}

// The two negative-omega roots, descending.
inline std::array<double, 2> negative_omega_roots(const Vec3& kvec, const ModelParams& p) {
    const double v0 = p.v.gamma();
    const double b = kvec.dot(p.v.spatial());
    std::vector<double> neg;
    for (double x : quartic_roots(kvec, p))
        if (v0 * x - b < 0.0) neg.push_back(x);
    if (neg.size() != 2)
        throw BranchFailure("expected two negative-omega roots of the cleared dispersion", kvec, int(neg.size()));
    return {std::max(neg[0], neg[1]), std::min(neg[0], neg[1])};
}

// Relative residual of the branch equation (k^2 = 0, omega^2 = bar_omega^2, or cleared DR = 0).
inline double branch_residual(const BranchPoint& bp, const ModelParams& p) {
    const FourVector k = bp.k();
    switch (bp.branch) {
        case BranchId::LightconePlus:
        case BranchId::LightconeMinus: {
            const double k2 = mink_dot(k, k);
            return std::abs(k2) / (k(0) * k(0) + bp.kvec.squaredNorm());
        }
        case BranchId::ResonanceUpper:
        case BranchId::ResonanceLower: {
            const double wb2 = std::pow(derive_constants(p).bar_omega, 2);
            return std::abs(bp.omega * bp.omega - wb2) / wb2;
        }
        default: {
            const double w = bp.omega, w2 = w * w, w02 = p.omega0 * p.omega0;
            const double c4 = 4.0 * pi * derive_constants(p).coupling;
            const double scale = (k(0) * k(0) + bp.kvec.squaredNorm()) * (w2 + w02) + c4 * w2;
            return std::abs(cleared_dispersion(k, p)) / scale;
        }
    }
}

// k0-derivative of the branch's own dispersion function; positive on positive-omega branches.
inline double branch_slope(const BranchPoint& bp, const ModelParams& p) {
    switch (bp.branch) {
        case BranchId::LightconePlus:
        case BranchId::LightconeMinus: return 2.0 * bp.k0;
        case BranchId::ResonanceUpper:
        case BranchId::ResonanceLower: return 2.0 * bp.omega * p.v.gamma();
        default: return dr_slope(bp.k(), p);
    }
}

struct SingularEllipsoid {
    Vec3 center;
    Vec3 axis;  // unit vector along the medium velocity (x if at rest)
    double semi_axis_long;
    double semi_axis_short;

    double Q(const Vec3& k) const {
        const Vec3 y = k - center;
        const double par = y.dot(axis);
        const Vec3 perp = y - par * axis;
        return par * par / (semi_axis_long * semi_axis_long) + perp.squaredNorm() / (semi_axis_short * semi_axis_short);
    }
};

inline SingularEllipsoid singular_ellipsoid(const ModelParams& p) {
    const double wb = derive_constants(p).bar_omega;
    const Vec3 u = p.v.spatial();
    const Vec3 axis = u.squaredNorm() > 0.0 ? Vec3(u.normalized()) : Vec3::UnitX();
    return {wb * u, axis, wb * p.v.gamma(), wb};
}

// Point of the ellipsoid along direction n from the origin.
inline Vec3 ellipsoid_point(const Vec3& n, const ModelParams& p) {
    const Vec3 d = n.normalized();
    return derive_constants(p).bar_omega / (p.v.gamma() - p.v.spatial().dot(d)) * d;
}

// |k| v0 - v.k - bar_omega, vanishing on the light-cone/resonance intersection.
inline double ellipsoid_residual(const Vec3& k, const ModelParams& p) {
    return k.norm() * p.v.gamma() - p.v.spatial().dot(k) - derive_constants(p).bar_omega;
}

struct BranchIntersections {
    FourVector sigma_plus_cap_sellmeier;
    FourVector sigma_res_cap_sellmeier;
};

inline BranchIntersections branch_intersections(const ModelParams& p) {
    const double wb = derive_constants(p).bar_omega;
    return {FourVector::Zero(), wb * p.v.vec()};
}

// Max of the relative residuals of the two branch equations that define each intersection.
inline double intersection_residual(const FourVector& k, bool resonance, const ModelParams& p) {
    const double w = comoving_frequency(k, p);
    const double c4 = 4.0 * pi * derive_constants(p).coupling;
    const double w02 = p.omega0 * p.omega0;
    const double scale = std::max(1.0, k(0) * k(0) + spatial(k).squaredNorm());
    const double dr = std::abs(mink_dot(k, k) * (w * w - w02) - c4 * w * w) / (scale * (w * w + w02) + c4 * w * w);
    if (!resonance) return std::max(dr, std::abs(mink_dot(k, k)) / scale);
    const double wb = derive_constants(p).bar_omega;
    const double on_res = std::abs(k(0) * p.v.gamma() - wb - spatial(k).dot(p.v.spatial())) / wb;
    const double k2 = std::abs(mink_dot(k, k) - wb * wb) / (wb * wb);
    return std::max({dr, on_res, k2});
}

}  // namespace hopfield
