#pragma once

#include "kernel.hpp"
#include "polarization.hpp"

#include <optional>
#include <string>

namespace hopfield {

// a0, a3, b3 and the transverse a_i^(a) labels.
struct ModeLabel {
    enum class Kind { Zero, Three, TildeThree, Transverse };
    Kind kind = Kind::Zero;
    int branch = 1;        // a, Sellmeier sheet
    int polarization = 1;  // i

    static ModeLabel zero() { return {Kind::Zero, 0, 0}; }
    static ModeLabel three() { return {Kind::Three, 0, 0}; }
    static ModeLabel tilde_three() { return {Kind::TildeThree, 0, 0}; }
    static ModeLabel transverse(int a, int i) {
        if (a < 1 || a > 2 || i < 1 || i > 2) throw DomainError("transverse indices must be 1 or 2");
        return {Kind::Transverse, a, i};
    }

    BranchId branch_id() const {
        switch (kind) {
            case Kind::Zero:
            case Kind::Three: return BranchId::LightconePlus;
            case Kind::TildeThree: return BranchId::ResonanceUpper;
            case Kind::Transverse: return branch == 1 ? BranchId::Sellmeier1 : BranchId::Sellmeier2;
        }
        return BranchId::LightconePlus;
    }

    std::string name() const {
        switch (kind) {
            case Kind::Zero: return "a0";
            case Kind::Three: return "a3";
            case Kind::TildeThree: return "b3";
            case Kind::Transverse: return "a" + std::to_string(polarization) + "^(" + std::to_string(branch) + ")";
        }
        return "?";
    }

    friend bool operator==(const ModeLabel&, const ModeLabel&) = default;
};

inline std::vector<ModeLabel> all_labels() {
    return {ModeLabel::zero(), ModeLabel::three(), ModeLabel::tilde_three(), ModeLabel::transverse(1, 1),
            ModeLabel::transverse(1, 2), ModeLabel::transverse(2, 1), ModeLabel::transverse(2, 2)};
}

// Field slots: A^0..A^3, P^0..P^3, B.
inline CFourVector a_part(const FieldVector& f) { return f.segment<4>(0); }
inline CFourVector p_part(const FieldVector& f) { return f.segment<4>(4); }

inline FieldVector pack(const CFourVector& a, const CFourVector& pv, cplx b) {
    FieldVector f;
    f << a, pv, b;
    return f;
}

// Minkowski contraction over the A and P blocks, conjugating the left argument.
inline cplx field_dot(const FieldVector& l, const FieldVector& r) {
    cplx s = 0.0;
    for (int b = 0; b < 2; ++b)
        for (int mu = 0; mu < 4; ++mu) s += metric()(mu, mu) * std::conj(l(4 * b + mu)) * r(4 * b + mu);
    return s;
}

// Quasi plane wave (constant + secular (v.x)) exp(-i k.x).
struct ModeMultiplet {
    ModeLabel label;
    FourVector wavevector;
    FieldVector constant_part;
    FieldVector secular_part = FieldVector::Zero();
    double z_factor = 0.0;

    FieldVector value(const FourVector& x, const MediumVelocity& v) const {
        const cplx phase = std::exp(cplx(0.0, -mink_dot(wavevector, x)));
        return (constant_part + secular_part * mink_dot(v.vec(), x)) * phase;
    }
};

// Momentum field; the secular part is kept to verify it vanishes.
struct MomentumMultiplet {
    FourVector wavevector;
    FieldVector constant_part;
    FieldVector secular_part = FieldVector::Zero();

    FieldVector value(const FourVector& x, const MediumVelocity& v) const {
        const cplx phase = std::exp(cplx(0.0, -mink_dot(wavevector, x)));
        return (constant_part + secular_part * mink_dot(v.vec(), x)) * phase;
    }
};

struct LightconeData {
    double omega, delta, w, z;
};

inline LightconeData lightcone_data(const FourVector& k, const ModelParams& p) {
    const double w = mink_dot(k, p.v.vec());
    const DerivedConstants dc = derive_constants(p);
    const double w02 = p.omega0 * p.omega0;
    const double delta = w * w - dc.bar_omega * dc.bar_omega;
    if (std::abs(delta) < 1e-14 * dc.bar_omega * dc.bar_omega)
        throw DomainError("momentum lies on the singular ellipsoid");
    const double W = p.xi * delta / (4.0 * pi) - w * w + w02;
    const double Z = p.xi * delta / (4.0 * pi) + w * w - w02 - 8.0 * pi * w * w * dc.coupling / delta;
    return {w, delta, W, Z};
}

inline BranchPoint mode_branch_point(const ModeLabel& label, const Vec3& kvec, const ModelParams& p) {
    return branch_frequencies(kvec, p, label.branch_id());
}

// Harmonic shift of the a0 multiplet along k: covariant (real, default) or dropped.
enum class ZeroShift { Covariant, None };

inline ModeMultiplet mode_multiplet(const ModeLabel& label, const Vec3& kvec, const ModelParams& p,
                                    ZeroShift shift_mode = ZeroShift::Covariant) {
    const cplx I(0.0, 1.0);
    const BranchPoint bp = mode_branch_point(label, kvec, p);
    const FourVector k = bp.k();
    const FourVector& v = p.v.vec();
    const DerivedConstants dc = derive_constants(p);
    const double w02 = p.omega0 * p.omega0;
    const double cw = p.chi * w02;
    ModeMultiplet m{label, k, FieldVector::Zero()};
    switch (label.kind) {
        case ModeLabel::Kind::Zero: {
            const LightconeData d = lightcone_data(k, p);
            const double shift = shift_mode == ZeroShift::Covariant ? -d.z / (4.0 * d.omega) : 0.0;
            const CFourVector a = ((d.omega * d.omega - w02 + 0.5 * d.w) * v + shift * k).cast<cplx>();
            const CFourVector pv = I * p.g * cw * (d.omega * v - k).cast<cplx>();
            m.constant_part = pack(a, pv, I * d.omega * d.delta / (4.0 * pi));
            m.secular_part = pack(-0.5 * I * d.w * k.cast<cplx>(), CFourVector::Zero(), 0.0);
            m.z_factor = d.z;
            break;
        }
        case ModeLabel::Kind::Three:
            m.constant_part = pack(I * k.cast<cplx>(), CFourVector::Zero(), 0.0);
            break;
        case ModeLabel::Kind::TildeThree: {
            const double k2 = mink_dot(k, k);
            if (std::abs(k2) < 1e-14 * (k(0) * k(0) + kvec.squaredNorm()) || k2 == 0.0)
                throw DomainError("null resonance momentum: the b3 multiplet divides by k^2");
            const double wb = dc.bar_omega;
            const CFourVector a = (4.0 * pi * p.g * (v - wb / k2 * k)).cast<cplx>();
            const CFourVector pv = I * (wb * v - k).cast<cplx>();
            m.constant_part = pack(a, pv, 0.0);
            break;
        }
        case ModeLabel::Kind::Transverse: {
            const FourVector e = polarization_pair(k, p.v)[label.polarization - 1];
            const double w = bp.omega;
            const cplx coef = I * p.g * cw * w / (w * w - w02);
            m.constant_part = pack(e.cast<cplx>(), coef * e.cast<cplx>(), 0.0);
            break;
        }
    }
    return m;
}

namespace detail {

// Canonical momenta of (c0 + c1 s) e^{-ik.x}; both parts.
inline std::pair<FieldVector, FieldVector> canonical_momentum(const FourVector& k, const FieldVector& c0,
                                                             const FieldVector& c1, const ModelParams& p) {
    const cplx I(0.0, 1.0);
    const FourVector& v = p.v.vec();
    const double w = mink_dot(k, v);
    const double v0 = v(0);
    const double cw = p.chi * p.omega0 * p.omega0;
    FieldVector pi0 = FieldVector::Zero(), pi1 = FieldVector::Zero();
    // d^mu of c0 + c1 s: constant -i k^mu c0 + v^mu c1, secular -i k^mu c1
    for (int nu = 0; nu < 4; ++nu) {
        const cplx f0 = (-I * k(0) * c0(nu) + v0 * c1(nu)) - (-I * k(nu) * c0(0) + v(nu) * c1(0));
        const cplx f1 = -I * k(0) * c1(nu) + I * k(nu) * c1(0);
        pi0(nu) = -f0 / (4.0 * pi) - p.g * (v0 * c0(4 + nu) - v(nu) * c0(4));
        pi1(nu) = -f1 / (4.0 * pi) - p.g * (v0 * c1(4 + nu) - v(nu) * c1(4));
        // v.d of P: constant -i w P0 + P1, secular -i w P1
        pi0(4 + nu) = -v0 / cw * (-I * w * c0(4 + nu) + c1(4 + nu));
        pi1(4 + nu) = -v0 / cw * (-I * w * c1(4 + nu));
    }
    pi0(0) += c0(8);
    pi1(0) += c1(8);
    return {pi0, pi1};
}

}  // namespace detail

inline MomentumMultiplet momentum_of(const ModeMultiplet& m, const ModelParams& p) {
    const auto [pi0, pi1] = detail::canonical_momentum(m.wavevector, m.constant_part, m.secular_part, p);
    return {m.wavevector, pi0, pi1};
}

inline MomentumMultiplet mode_momenta(const ModeLabel& label, const Vec3& kvec, const ModelParams& p) {
    return momentum_of(mode_multiplet(label, kvec, p), p);
}

// Directional derivative v^j d/dk_j of the a0 multiplet data along the light cone.
struct ModeDerivative {
    FourVector wavevector;
    FieldVector constant_part;
    FieldVector secular_part;
    FieldVector momentum;
};

inline ModeDerivative zero_mode_derivative(const Vec3& kvec, const ModelParams& p,
                                           ZeroShift shift_mode = ZeroShift::Covariant) {
    const cplx I(0.0, 1.0);
    const ModeMultiplet m = mode_multiplet(ModeLabel::zero(), kvec, p, shift_mode);
    const bool shifted = shift_mode == ZeroShift::Covariant;
    const FourVector& k = m.wavevector;
    const FourVector& v = p.v.vec();
    const Vec3 u = p.v.spatial();
    const DerivedConstants dc = derive_constants(p);
    const double w02 = p.omega0 * p.omega0;
    const LightconeData d = lightcone_data(k, p);
    const double a = kvec.dot(u) / kvec.norm();
    const FourVector dk = four(a, u);
    const double dw = a * v(0) - u.squaredNorm();
    const double dD = 2.0 * d.omega * dw;
    const double dW = p.xi / (4.0 * pi) * dD - 2.0 * d.omega * dw;
    const double dratio = (2.0 * d.omega * dw * d.delta - d.omega * d.omega * dD) / (d.delta * d.delta);
    const double dZ = p.xi / (4.0 * pi) * dD + 2.0 * d.omega * dw - 8.0 * pi * dc.coupling * dratio;
    const double shift = shifted ? -d.z / (4.0 * d.omega) : 0.0;
    const double dshift = shifted ? -dZ / (4.0 * d.omega) + d.z * dw / (4.0 * d.omega * d.omega) : 0.0;
    const CFourVector da = ((2.0 * d.omega * dw + 0.5 * dW) * v + dshift * k + shift * dk).cast<cplx>();
    const CFourVector dp = I * p.g * p.chi * w02 * (dw * v - dk).cast<cplx>();
    const cplx dB = I * (dw * d.delta + d.omega * dD) / (4.0 * pi);
    const FieldVector dc0 = pack(da, dp, dB);
    const FieldVector dc1 = pack(-0.5 * I * (dW * k + d.w * dk).cast<cplx>(), CFourVector::Zero(), 0.0);
    // the momentum is affine in k at fixed coefficients
    const auto base = detail::canonical_momentum(k, m.constant_part, m.secular_part, p).first;
    const auto moved = detail::canonical_momentum(k + dk, m.constant_part, m.secular_part, p).first;
    const auto lin = detail::canonical_momentum(k, dc0, dc1, p).first;
    return {dk, dc0, dc1, FieldVector(lin + moved - base)};
}

struct EomResidual {
    FieldVector residual;  // A equations, P equations, gauge equation
    cplx divergence_constraint;
    cplx transversality_constraint;
    double scale;

    double relative() const {
        return std::max({residual.cwiseAbs().maxCoeff(), std::abs(divergence_constraint),
                         std::abs(transversality_constraint)}) /
               scale;
    }
};

// Field equations evaluated on the quasi plane wave at x by exact differentiation.
inline EomResidual eom_residual_of(const ModeMultiplet& m, const FourVector& x, const ModelParams& p) {
    const cplx I(0.0, 1.0);
    const FourVector& k = m.wavevector;
    const FourVector& v = p.v.vec();
    const double s = mink_dot(v, x);
    const cplx e = std::exp(-I * mink_dot(k, x));
    const FieldVector c = m.constant_part + s * m.secular_part;
    const FieldVector& c1 = m.secular_part;
    const double w = mink_dot(k, v);
    const double k2 = mink_dot(k, k);
    const double cw = p.chi * p.omega0 * p.omega0;

    // first derivatives d^mu of slot j, and second derivative contractions
    const auto d_up = [&](int mu, int j) { return e * (-I * k(mu) * c(j) + v(mu) * c1(j)); };
    const auto box = [&](int j) { return e * (-k2 * c(j) - 2.0 * I * w * c1(j)); };
    const auto vd = [&](int j) { return e * (-I * w * c(j) + c1(j)); };
    const auto vdvd = [&](int j) { return e * (-w * w * c(j) - 2.0 * I * w * c1(j)); };
    // d^nu d_mu X^mu for a four-vector block starting at slot off
    const auto grad_div = [&](int nu, int off) {
        cplx acc = 0.0;
        for (int mu = 0; mu < 4; ++mu) {
            const double kl = metric()(mu, mu) * k(mu), vl = metric()(mu, mu) * v(mu);
            acc += -k(nu) * kl * c(off + mu) - I * (k(nu) * vl + v(nu) * kl) * c1(off + mu);
        }
        return e * acc;
    };
    const auto div = [&](int off) {
        cplx acc = 0.0;
        for (int mu = 0; mu < 4; ++mu) acc += metric()(mu, mu) * d_up(mu, off + mu);
        return acc;
    };

    EomResidual r{FieldVector::Zero(), 0.0, 0.0, 1.0};
    const cplx divA = div(0), divP = div(4);
    cplx vA = 0.0, vA1 = 0.0, vP = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
        const double vl = metric()(mu, mu) * v(mu);
        vA += vl * c(mu);
        vA1 += vl * c1(mu);
        vP += vl * c(4 + mu) * e;
    }
    for (int nu = 0; nu < 4; ++nu) {
        r.residual(nu) = -(box(nu) - grad_div(nu, 0)) / (4.0 * pi) - p.g * (vd(4 + nu) - v(nu) * divP) +
                         d_up(nu, 8);
        // d^nu (v.A) with v.A = vA + s vA1
        const cplx d_vA = e * (-I * k(nu) * vA + v(nu) * vA1);
        r.residual(4 + nu) = p.g * (vd(nu) - d_vA) - (vdvd(4 + nu) + p.omega0 * p.omega0 * e * c(4 + nu)) / cw;
    }
    r.residual(8) = divA + p.xi * c(8) * e;
    r.divergence_constraint = r.residual(8);
    r.transversality_constraint = vP;
    const double kscale = 1.0 + k(0) * k(0) + spatial(k).squaredNorm();
    const double mscale = kscale * (1.0 / (4.0 * pi) + p.g + 1.0 / p.chi + std::abs(p.xi) + 1.0);
    r.scale = mscale * (m.constant_part.norm() + m.secular_part.norm() * (1.0 + std::abs(s)));
    return r;
}

inline EomResidual eom_residual(const ModeLabel& label, const Vec3& kvec, const FourVector& x, const ModelParams& p) {
    return eom_residual_of(mode_multiplet(label, kvec, p), x, p);
}

struct GaugeDecomposition {
    cplx residual;
    double scale;
    cplx secular_coefficient;  // V, from the (v.x) term of sigma
    cplx feynman_v;            // v . A^F
    cplx delta1_coefficient;   // b(k), must vanish
};

inline GaugeDecomposition gauge_condition_residual(const Vec3& kvec, const ModelParams& p) {
    if (kvec.squaredNorm() == 0.0) throw DomainError("gauge condition needs a nonzero momentum");
    const cplx I(0.0, 1.0);
    const ModeMultiplet m = mode_multiplet(ModeLabel::zero(), kvec, p);
    const FourVector& k = m.wavevector;
    const FourVector& v = p.v.vec();
    const double w = mink_dot(k, v);
    const double w02 = p.omega0 * p.omega0;
    if (std::abs(w * w - w02) < 1e-12 * w02) throw DomainError("resonant light-cone momentum");
    const CFourVector c1 = a_part(m.secular_part);
    const CFourVector c0 = a_part(m.constant_part);
    // sigma = (sigma0 + s1 s) e^{-ik.x} with secular gradient -i k s1
    cplx c1v = 0.0;
    for (int mu = 0; mu < 4; ++mu) c1v += metric()(mu, mu) * c1(mu) * v(mu);
    const cplx s1 = I * c1v / w;
    const cplx V = 2.0 * I * w * s1;
    // c0 = alpha v + beta k + transverse; A^F keeps alpha v minus the sigma gradient
    const double k2 = mink_dot(k, k);
    cplx c0k = 0.0, c0v = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
        c0k += metric()(mu, mu) * c0(mu) * k(mu);
        c0v += metric()(mu, mu) * c0(mu) * v(mu);
    }
    const double det = k2 - w * w;
    const cplx alpha = (k2 * c0v - w * c0k) / det;
    const cplx feynman_v = alpha - s1;
    const double c = derive_constants(p).coupling;
    const cplx B = m.constant_part(8);
    const cplx res = V / (4.0 * pi) - (p.xi / (4.0 * pi) - 1.0) * B + I * c * w / (w * w - w02) * feynman_v;
    const double scale = std::abs(V) / (4.0 * pi) + std::abs(p.xi / (4.0 * pi) - 1.0) * std::abs(B) +
                         std::abs(c * w / (w * w - w02) * feynman_v) + 1e-300;
    return {res, scale, V, feynman_v, -4.0 * pi * I * res};
}

}  // namespace hopfield
