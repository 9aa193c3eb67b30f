#pragma once

#include "spacetime.hpp"

#include <array>
#include <cmath>

namespace hopfield {

struct PolarizationPair {
    FourVector e1;
    FourVector e2;

    const FourVector& operator[](int i) const { return i == 0 ? e1 : e2; }
};

// Spacelike unit pair orthogonal to k and v, seeded by the spatial axes.
inline PolarizationPair polarization_pair(const FourVector& k, const MediumVelocity& v) {
    const FourVector& u = v.vec();
    const double kk = mink_dot(k, k), kv = mink_dot(k, u), vv = mink_dot(u, u);
    const double det = kk * vv - kv * kv;
    const double scale = k(0) * k(0) + spatial(k).squaredNorm();
    if (std::abs(det) <= 1e-14 * std::max(scale, 1e-300)) {
        const LorentzMatrix back = boost_to_rest(v).inverse();
        return {back * FourVector(0, 1, 0, 0), back * FourVector(0, 0, 1, 0)};
    }
    const auto off_plane = [&](const FourVector& a) {
        const double ak = mink_dot(a, k), av = mink_dot(a, u);
        const double ck = (vv * ak - kv * av) / det;
        const double cv = (kk * av - kv * ak) / det;
        return FourVector(a - ck * k - cv * u);
    };
    std::array<FourVector, 3> cand;
    for (int i = 0; i < 3; ++i) {
        FourVector a = FourVector::Zero();
        a(i + 1) = 1.0;
        cand[i] = off_plane(a);
    }
    const auto pick = [&](const std::array<FourVector, 3>& c, int skip) {
        int best = -1;
        double bn = -1.0;
        for (int i = 0; i < 3; ++i) {
            if (i == skip) continue;
            const double n = -mink_dot(c[i], c[i]);
            if (n > bn * (1.0 + 1e-12)) {
                bn = n;
                best = i;
            }
        }
        return best;
    };
    const int i1 = pick(cand, -1);
    const FourVector e1 = cand[i1] / std::sqrt(-mink_dot(cand[i1], cand[i1]));
    std::array<FourVector, 3> second;
    for (int i = 0; i < 3; ++i) second[i] = cand[i] + mink_dot(cand[i], e1) * e1;
    const int i2 = pick(second, i1);
    const FourVector e2 = second[i2] / std::sqrt(-mink_dot(second[i2], second[i2]));
    return {e1, e2};
}

}  // namespace hopfield
