#pragma once

#include "modes.hpp"

#include <limits>
#include <optional>

namespace hopfield {

// One factor of a bilinear: (c0 + c1 s) e^{-ik.x} with momentum pi e^{-ik.x}.
// Derivatives are along v^j d/dk_j of the wave's own spatial label.
struct Wave {
    FourVector k;
    FieldVector c0, c1, pi;
    std::optional<FieldVector> dc1, dpi;

    bool secular() const { return c1.cwiseAbs().maxCoeff() > 0.0; }
};

inline Wave wave_of(const ModeLabel& label, const Vec3& kvec, const ModelParams& p,
                    ZeroShift shift = ZeroShift::Covariant) {
    const ModeMultiplet m = mode_multiplet(label, kvec, p, shift);
    Wave w{m.wavevector, m.constant_part, m.secular_part, momentum_of(m, p).constant_part, {}, {}};
    if (label.kind == ModeLabel::Kind::Zero) {
        const ModeDerivative d = zero_mode_derivative(kvec, p, shift);
        w.dc1 = d.secular_part;
        w.dpi = d.momentum;
    }
    return w;
}

// Complex conjugate of the mode at spatial momentum q; its label is -q.
inline Wave conjugate_wave(const ModeLabel& label, const Vec3& q, const ModelParams& p) {
    const Wave w = wave_of(label, q, p);
    Wave c{-w.k, w.c0.conjugate(), w.c1.conjugate(), w.pi.conjugate(), {}, {}};
    if (w.dc1) {
        c.dc1 = FieldVector(-w.dc1->conjugate());
        c.dpi = FieldVector(-w.dpi->conjugate());
    }
    return c;
}

// Delta-stripped density of (U|V); polynomial in t and the gradient markers X_j.
struct GramDensity {
    cplx constant = 0.0;
    cplx t_coefficient = 0.0;
    std::array<cplx, 3> x_markers{};
    cplx gradient_term = 0.0;
    double phase_mismatch = 0.0;

    cplx physical() const { return constant + gradient_term; }
    double max_marker() const {
        double m = std::abs(t_coefficient);
        for (const auto& x : x_markers) m = std::max(m, std::abs(x));
        return m;
    }
};

inline GramDensity gram_density(const Wave& u, const Wave& w, const ModelParams& p) {
    const cplx I(0.0, 1.0);
    GramDensity g;
    g.constant = I * (field_dot(u.c0, w.pi) - field_dot(u.pi, w.c0));
    const cplx p1 = I * (field_dot(u.c1, w.pi) - field_dot(u.pi, w.c1));
    g.t_coefficient = p.v.gamma() * p1;
    for (int j = 0; j < 3; ++j) g.x_markers[j] = -p.v.spatial()(j) * p1;
    g.phase_mismatch = u.k(0) - w.k(0);
    // integrating the X_j markers by parts against the delta
    if (u.secular()) {
        if (!u.dc1) throw std::logic_error("secular wave without derivative data");
        g.gradient_term = -(field_dot(*u.dc1, w.pi) - field_dot(*u.dpi, w.c1));
    } else if (w.secular()) {
        if (!w.dc1) throw std::logic_error("secular wave without derivative data");
        g.gradient_term = -field_dot(u.pi, *w.dc1);
    }
    return g;
}

inline GramDensity gram_density(const ModeLabel& a, const ModeLabel& b, const Vec3& kvec, const ModelParams& p) {
    return gram_density(wave_of(a, kvec, p), wave_of(b, kvec, p), p);
}

// (zeta_B^*(-k) | zeta_A(k)), the density of [alpha_A, alpha_B].
inline GramDensity c_zero_density(const ModeLabel& a, const ModeLabel& b, const Vec3& kvec, const ModelParams& p) {
    return gram_density(conjugate_wave(b, -kvec, p), wave_of(a, kvec, p), p);
}

// alpha_A = lambda_A (zeta_{partner(A)} | zeta).
inline ModeLabel inversion_partner(const ModeLabel& a) {
    if (a.kind == ModeLabel::Kind::Zero) return ModeLabel::three();
    if (a.kind == ModeLabel::Kind::Three) return ModeLabel::zero();
    return a;
}

inline cplx inversion_factor(const ModeLabel& a, const Vec3& kvec, const ModelParams& p) {
    const cplx I(0.0, 1.0);
    const BranchPoint bp = mode_branch_point(a, kvec, p);
    switch (a.kind) {
        case ModeLabel::Kind::Zero:
        case ModeLabel::Kind::Three: {
            const LightconeData d = lightcone_data(bp.k(), p);
            const cplx lam = 4.0 * pi * I / (d.omega * d.delta);
            return a.kind == ModeLabel::Kind::Zero ? -lam : lam;
        }
        case ModeLabel::Kind::TildeThree: {
            const double wb = derive_constants(p).bar_omega;
            const FourVector k = bp.k();
            return p.chi * p.omega0 * p.omega0 / (wb * wb - mink_dot(k, k));
        }
        case ModeLabel::Kind::Transverse: return 1.0;
    }
    return 1.0;
}

struct CommutatorDensity {
    cplx value;
    ModeLabel a, b;
    bool singular = false;
};

// [alpha_A, alpha_B^dagger] from the inversions and the Gram bilinear.
inline CommutatorDensity commutator_density(const ModeLabel& a, const ModeLabel& b, const Vec3& kvec,
                                            const ModelParams& p, bool shifted_a3 = true) {
    const ZeroShift shift = shifted_a3 ? ZeroShift::Covariant : ZeroShift::None;
    const ModeLabel pa = inversion_partner(a), pb = inversion_partner(b);
    const GramDensity g = gram_density(wave_of(pa, kvec, p, shift), wave_of(pb, kvec, p, shift), p);
    CommutatorDensity c{inversion_factor(a, kvec, p) * std::conj(inversion_factor(b, kvec, p)) * g.physical(), a, b};
    const bool lightcone = a.branch_id() == BranchId::LightconePlus || b.branch_id() == BranchId::LightconePlus;
    if (lightcone) {
        const double wb = derive_constants(p).bar_omega;
        c.singular = std::abs(ellipsoid_residual(kvec, p)) < 1e-6 * wb;
    }
    return c;
}

inline double covariant_measure(const BranchPoint& bp, const ModelParams& p) {
    const double slope = branch_slope(bp, p);
    if (!(slope > 0.0)) throw DomainError("non-positive dispersion slope: misclassified branch");
    return 1.0 / (std::pow(2.0 * pi, 3) * slope);
}

inline double covariant_measure(BranchId branch, const Vec3& kvec, const ModelParams& p) {
    return covariant_measure(branch_frequencies(kvec, p, branch), p);
}

struct HamiltonianDensity {
    std::array<double, 2> transverse;  // k0_(a) / DR'_(a)
    double b3;
    double mixed;  // coefficient c of i c (a3^dag a0 - a0^dag a3)
    double f;      // a0^dag a0 coefficient
    bool b3_positive;
    bool f_positive;
};

inline HamiltonianDensity hamiltonian_density(const Vec3& kvec, const ModelParams& p) {
    HamiltonianDensity h{};
    for (int a = 0; a < 2; ++a) {
        const BranchPoint bp = branch_frequencies(kvec, p, a == 0 ? BranchId::Sellmeier1 : BranchId::Sellmeier2);
        // at g = 0 one sheet sits on the pole and carries no transverse mode
        const bool on_pole = p.g == 0.0 && std::abs(bp.omega * bp.omega - p.omega0 * p.omega0) < 1e-10 * p.omega0 * p.omega0;
        h.transverse[a] = on_pole ? std::numeric_limits<double>::quiet_NaN() : bp.k0 / dr_slope(bp.k(), p);
    }
    const double wb = derive_constants(p).bar_omega;
    const BranchPoint res = branch_frequencies(kvec, p, BranchId::ResonanceUpper);
    const FourVector kr = res.k();
    h.b3 = (wb * wb - mink_dot(kr, kr)) / (2.0 * p.v.gamma() * p.chi * p.omega0 * p.omega0 * wb) * res.k0;
    const BranchPoint lc = branch_frequencies(kvec, p, BranchId::LightconePlus);
    const LightconeData d = lightcone_data(lc.k(), p);
    h.mixed = d.omega * d.delta / (8.0 * pi);
    h.f = -(d.omega * p.v.gamma() / (16.0 * pi * kvec.norm())) * d.w * d.delta;
    h.b3_positive = h.b3 > 0.0;
    h.f_positive = h.f > 0.0;
    return h;
}

struct HeisenbergCheck {
    cplx diagonal;       // coefficient of alpha in [H, alpha]
    cplx admixture;      // coefficient of a0 in [H, a3], or of a3 in [H, a0]
    cplx expected_diagonal;
    cplx expected_admixture;
    double residual;
};

// [H, alpha] = sum_g R alpha_g with R = -C h, versus d/dt alpha = i [H, alpha] read off the expansion.
inline HeisenbergCheck heisenberg_residual(const ModeLabel& label, const Vec3& kvec, const ModelParams& p) {
    const cplx I(0.0, 1.0);
    const HamiltonianDensity h = hamiltonian_density(kvec, p);
    const ModeMultiplet m = mode_multiplet(label, kvec, p);
    const double k0 = m.wavevector(0);
    HeisenbergCheck out{};
    out.expected_diagonal = -k0;
    switch (label.kind) {
        case ModeLabel::Kind::Transverse: {
            const cplx c = commutator_density(label, label, kvec, p).value;
            out.diagonal = -c * h.transverse[label.branch - 1];
            break;
        }
        case ModeLabel::Kind::TildeThree: {
            const cplx c = commutator_density(label, label, kvec, p).value;
            out.diagonal = -c * h.b3;
            break;
        }
        case ModeLabel::Kind::Zero:
        case ModeLabel::Kind::Three: {
            const ModeLabel z = ModeLabel::zero(), t = ModeLabel::three();
            const cplx c00 = commutator_density(z, z, kvec, p).value;
            const cplx c03 = commutator_density(z, t, kvec, p).value;
            const cplx c30 = commutator_density(t, z, kvec, p).value;
            const cplx c33 = commutator_density(t, t, kvec, p).value;
            // h_{beta gamma} for H = sum h alpha_beta^dag alpha_gamma, basis (a0, a3)
            const cplx h00 = h.f, h03 = -I * h.mixed, h30 = I * h.mixed, h33 = 0.0;
            if (label.kind == ModeLabel::Kind::Zero) {
                out.diagonal = -(c00 * h00 + c03 * h30);
                out.admixture = -(c00 * h03 + c03 * h33);
                out.expected_admixture = 0.0;
            } else {
                out.diagonal = -(c30 * h03 + c33 * h33);
                out.admixture = -(c30 * h00 + c33 * h30);
                // a3(t) gains lambda t a0 with secular(a0) v^0 = lambda constant(a3)
                const ModeMultiplet z0 = mode_multiplet(z, kvec, p);
                const FieldVector c3 = m.constant_part;
                const cplx lambda = c3.dot(z0.secular_part * p.v.gamma()) / c3.squaredNorm();
                out.expected_admixture = -I * lambda;
            }
            break;
        }
    }
    const double scale = std::abs(k0) + std::abs(out.expected_admixture);
    out.residual = std::max(std::abs(out.diagonal - out.expected_diagonal),
                            std::abs(out.admixture - out.expected_admixture)) / scale;
    return out;
}

struct NumberDensity {
    double value;
    bool prefactor_positive;
};

inline NumberDensity number_density(BranchId branch, const Vec3& kvec, cplx amplitude, const ModelParams& p) {
    const double a2 = std::norm(amplitude);
    if (is_sellmeier(branch)) {
        const double s = dr_slope(branch_frequencies(kvec, p, branch).k(), p);
        return {a2 / s, s > 0.0};
    }
    if (branch == BranchId::ResonanceUpper) {
        const double wb = derive_constants(p).bar_omega;
        const FourVector k = branch_frequencies(kvec, p, branch).k();
        const double pref = (wb * wb - mink_dot(k, k)) / (2.0 * p.v.gamma() * p.chi * p.omega0 * p.omega0 * wb);
        return {a2 * pref, pref > 0.0};
    }
    throw DomainError("number density is defined only on the transverse and b3 branches");
}

}  // namespace hopfield
