#include "hopfield/modes.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace hopfield;
using testing_support::Rng;

namespace {

const ModelParams lab{};
const cplx I(0.0, 1.0);

using FieldGrad = std::array<FieldVector, 4>;  // d_mu phi_j, lower derivative index

// Lagrangian density on upper-index field values and their derivatives.
cplx lagrangian(const FieldVector& f, const FieldGrad& d, const ModelParams& p) {
    const FourVector& v = p.v.vec();
    const auto eta = [](int m) { return m == 0 ? 1.0 : -1.0; };
    const double cw = p.chi * p.omega0 * p.omega0;
    cplx F2 = 0.0, vdP2 = 0.0, P2 = 0.0, coupling = 0.0, divA = 0.0;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
            const cplx Fl = eta(n) * d[m](n) - eta(m) * d[n](m);
            F2 += eta(m) * eta(n) * Fl * Fl;
            coupling += (v(m) * f(4 + n) - v(n) * f(4 + m)) * eta(n) * d[m](n);
        }
    for (int n = 0; n < 4; ++n) {
        cplx vdp = 0.0;
        for (int m = 0; m < 4; ++m) vdp += v(m) * d[m](4 + n);
        vdP2 += eta(n) * vdp * vdp;
        P2 += eta(n) * f(4 + n) * f(4 + n);
        divA += d[n](n);
    }
    return -F2 / (16.0 * pi) - (vdP2 - p.omega0 * p.omega0 * P2) / (2.0 * cw) - p.g * coupling + f(8) * divA +
           0.5 * p.xi * f(8) * f(8);
}

FieldGrad gradient(const ModeMultiplet& m, const FourVector& x, const ModelParams& p) {
    const FourVector kl = lower(m.wavevector), vl = lower(p.v.vec());
    const cplx e = std::exp(-I * mink_dot(m.wavevector, x));
    const FieldVector c = m.constant_part + mink_dot(p.v.vec(), x) * m.secular_part;
    FieldGrad d;
    for (int mu = 0; mu < 4; ++mu) d[mu] = (-I * kl(mu) * c + vl(mu) * m.secular_part) * e;
    return d;
}

// d L / d(d_mu phi_j), raised on the field index; exact for a quadratic density
FieldVector conjugate(const FieldVector& f, FieldGrad d, int mu, const ModelParams& p) {
    FieldVector out;
    for (int j = 0; j < 9; ++j) {
        const cplx base = d[mu](j);
        d[mu](j) = base + 1.0;
        const cplx up = lagrangian(f, d, p);
        d[mu](j) = base - 1.0;
        const cplx dn = lagrangian(f, d, p);
        d[mu](j) = base;
        out(j) = (up - dn) / 2.0 * (j < 8 && j % 4 != 0 ? -1.0 : 1.0);
    }
    return out;
}

FieldVector field_derivative(const FieldVector& f, const FieldGrad& d, const ModelParams& p) {
    FieldVector out;
    FieldVector g = f;
    for (int j = 0; j < 9; ++j) {
        const cplx base = g(j);
        g(j) = base + 1.0;
        const cplx up = lagrangian(g, d, p);
        g(j) = base - 1.0;
        const cplx dn = lagrangian(g, d, p);
        g(j) = base;
        out(j) = (up - dn) / 2.0 * (j < 8 && j % 4 != 0 ? -1.0 : 1.0);
    }
    return out;
}

// Euler-Lagrange expression d_mu (dL/d d_mu phi) - dL/dphi, with the outer derivative by finite differences.
FieldVector euler_lagrange(const ModeMultiplet& m, const FourVector& x, const ModelParams& p, double h) {
    FieldVector div = FieldVector::Zero();
    for (int mu = 0; mu < 4; ++mu) {
        FieldVector acc = FieldVector::Zero();
        const double w[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};
        const double s[4] = {-2, -1, 1, 2};
        for (int i = 0; i < 4; ++i) {
            FourVector y = x;
            y(mu) += s[i] * h;
            acc += w[i] * conjugate(m.value(y, p.v), gradient(m, y, p), mu, p);
        }
        div += acc / h;
    }
    return div - field_derivative(m.value(x, p.v), gradient(m, x, p), p);
}

ModeMultiplet off_shell(ModeMultiplet m, const FourVector& dk) {
    m.wavevector += dk;
    return m;
}

}  // namespace

TEST_CASE("polarization_invariants") {
    Rng rng(70);
    for (int n = 0; n < 500; ++n) {
        const MediumVelocity v = rng.velocity();
        const FourVector k = rng.four_vec(3);
        const PolarizationPair e = polarization_pair(k, v);
        for (int i = 0; i < 2; ++i) {
            CHECK(std::abs(mink_dot(e[i], k)) <= 1e-12 * k.norm() * e[i].norm());
            CHECK(std::abs(mink_dot(e[i], v.vec())) <= 1e-12 * e[i].norm() * v.gamma());
            CHECK(mink_dot(e[i], e[i]) == Catch::Approx(-1.0).epsilon(1e-12));
        }
        CHECK(std::abs(mink_dot(e.e1, e.e2)) <= 1e-12 * e.e1.norm() * e.e2.norm());
        Eigen::Matrix4d basis;
        basis << e.e1, e.e2, k, v.vec();
        CHECK(Eigen::FullPivLU<Eigen::Matrix4d>(basis).rank() == 4);
    }
}

TEST_CASE("polarization_lab_example") {
    const PolarizationPair e = polarization_pair(FourVector(0.5, 0.5, 0, 0), MediumVelocity::rest());
    CHECK(e.e1.isApprox(FourVector(0, 0, 1, 0)));
    CHECK(e.e2.isApprox(FourVector(0, 0, 0, 1)));
}

TEST_CASE("polarization_degenerate_direction") {
    Rng rng(71);
    for (int n = 0; n < 50; ++n) {
        const MediumVelocity v = rng.velocity();
        const FourVector k = rng.uniform(0.5, 2.0) * v.vec();
        const PolarizationPair e = polarization_pair(k, v);
        for (int i = 0; i < 2; ++i) {
            CHECK(std::abs(mink_dot(e[i], v.vec())) <= 1e-12 * e[i].norm() * v.gamma());
            CHECK(mink_dot(e[i], e[i]) == Catch::Approx(-1.0).epsilon(1e-12));
        }
        CHECK(std::abs(mink_dot(e.e1, e.e2)) <= 1e-12 * e.e1.norm() * e.e2.norm());
    }
}

TEST_CASE("multiplet_lab_examples") {
    const Vec3 k(0.5, 0, 0);
    const ModeMultiplet three = mode_multiplet(ModeLabel::three(), k, lab);
    CHECK(three.constant_part.isApprox(pack(I * FourVector(0.5, 0.5, 0, 0).cast<cplx>(), CFourVector::Zero(), 0.0)));
    const ModeMultiplet zero = mode_multiplet(ModeLabel::zero(), k, lab);
    CHECK(zero.constant_part(8).real() == 0.0);
    CHECK(zero.constant_part(8).imag() == Catch::Approx(-0.0348416).epsilon(1e-5));
    CHECK(zero.constant_part(5).imag() == Catch::Approx(-0.05).epsilon(1e-12));
    const ModeMultiplet b3 = mode_multiplet(ModeLabel::tilde_three(), k, lab);
    CHECK(b3.wavevector(0) == Catch::Approx(1.060973).epsilon(1e-6));
    CHECK(b3.constant_part(5).imag() == Catch::Approx(-0.5).epsilon(1e-12));
    const ModeMultiplet t = mode_multiplet(ModeLabel::transverse(1, 2), k, lab);
    CHECK(t.wavevector(0) == Catch::Approx(1.077116).epsilon(1e-6));
    CHECK(t.constant_part(3) == cplx(1.0));
}

TEST_CASE("multiplet_structure") {
    Rng rng(72);
    for (int n = 0; n < 200; ++n) {
        const ModelParams p = rng.params();
        const Vec3 kv = rng.vec3(3);
        for (const ModeLabel& l : all_labels()) {
            const ModeMultiplet m = mode_multiplet(l, kv, p);
            cplx vp = 0.0;
            for (int mu = 0; mu < 4; ++mu) vp += metric()(mu, mu) * p.v.vec()(mu) * m.constant_part(4 + mu);
            CHECK(std::abs(vp) <= 1e-12 * (1.0 + m.constant_part.norm()));
            if (l.kind == ModeLabel::Kind::Zero)
                CHECK(m.secular_part.norm() > 0.0);
            else
                CHECK(m.secular_part.isZero());
        }
    }
}

TEST_CASE("momenta_lab_values") {
    Rng rng(73);
    for (int n = 0; n < 100; ++n) {
        const Vec3 kv = rng.vec3(3);
        const MomentumMultiplet three = mode_momenta(ModeLabel::three(), kv, lab);
        CHECK(three.constant_part.norm() <= 1e-12 * (1.0 + kv.squaredNorm()));
        const MomentumMultiplet zero = mode_momenta(ModeLabel::zero(), kv, lab);
        const double w = kv.norm(), wb2 = 1.0 + 4.0 * pi * lab.g * lab.g;
        CHECK(zero.constant_part(8) == cplx(0.0));
        CHECK(testing_support::rel(zero.constant_part(0), I * w * (w * w - wb2) / (4.0 * pi)) <= 1e-12);
    }
}

TEST_CASE("momenta_match_lagrangian_derivative") {
    Rng rng(74);
    for (int n = 0; n < 100; ++n) {
        const ModelParams p = n % 2 ? rng.params() : lab;
        const Vec3 kv = rng.vec3(3);
        const FourVector x = rng.four_vec(4);
        for (const ModeLabel& l : all_labels()) {
            const ModeMultiplet m = mode_multiplet(l, kv, p);
            const FieldVector oracle = conjugate(m.value(x, p.v), gradient(m, x, p), 0, p);
            const FieldVector got = momentum_of(m, p).value(x, p.v);
            CHECK((oracle - got).norm() <= 1e-12 * (1.0 + oracle.norm()));
        }
    }
}

TEST_CASE("zero_mode_momentum_has_no_secular_part") {
    Rng rng(75);
    for (int n = 0; n < 100; ++n) {
        const ModelParams p = rng.params();
        const MomentumMultiplet m = mode_momenta(ModeLabel::zero(), rng.vec3(3), p);
        CHECK(m.secular_part.norm() <= 1e-12 * (1.0 + m.constant_part.norm()));
    }
}

TEST_CASE("modes_solve_field_equations") {
    Rng rng(76);
    for (int n = 0; n < 300; ++n) {
        const ModelParams p = n % 3 == 0 ? lab : rng.params();
        const Vec3 kv = rng.vec3(3);
        const FourVector x = rng.four_vec(5);
        for (const ModeLabel& l : all_labels()) {
            const auto r = eom_residual(l, kv, x, p);
            CHECK(r.relative() <= 1e-9);
            if (l.kind == ModeLabel::Kind::Three) CHECK(r.relative() <= 1e-14);
        }
    }
}

TEST_CASE("field_equations_match_euler_lagrange") {
    Rng rng(77);
    for (int n = 0; n < 30; ++n) {
        const ModelParams p = n % 2 ? rng.params() : lab;
        const Vec3 kv = rng.vec3(2);
        const FourVector x = rng.four_vec(2);
        for (const ModeLabel& l : all_labels()) {
            const ModeMultiplet m = mode_multiplet(l, kv, p);
            const FieldVector on = euler_lagrange(m, x, p, 1e-3);
            CHECK(on.norm() <= 1e-6 * eom_residual_of(m, x, p).scale);
            // off shell the two residuals agree up to the sign of the gauge row
            const ModeMultiplet o = off_shell(m, 0.3 * rng.four_vec(1));
            FieldVector el = euler_lagrange(o, x, p, 1e-3);
            el(8) = -el(8);
            const FieldVector got = eom_residual_of(o, x, p).residual;
            CHECK((el - got).norm() <= 1e-6 * (1.0 + got.norm()));
        }
    }
}

TEST_CASE("zero_mode_secular_part_is_null") {
    Rng rng(78);
    for (int n = 0; n < 100; ++n) {
        const ModelParams p = rng.params();
        const ModeMultiplet m = mode_multiplet(ModeLabel::zero(), rng.vec3(3), p);
        const KernelMatrix K = assemble_kernel(m.wavevector, p);
        CHECK((K * m.secular_part).norm() <= 1e-12 * K.norm() * m.secular_part.norm());
    }
}

TEST_CASE("gauge_condition") {
    Rng rng(79);
    for (int n = 0; n < 300; ++n) {
        ModelParams p = n % 3 == 0 ? lab : rng.params();
        if (n % 7 == 0) p = p.with_gauge(4.0 * pi);
        if (n % 11 == 0) p = p.with_coupling(0.0);
        const Vec3 kv = rng.vec3(3);
        const double w = comoving_frequency(branch_frequencies(kv, p, BranchId::LightconePlus).k(), p);
        if (std::abs(w * w - p.omega0 * p.omega0) < 1e-3) continue;
        const GaugeDecomposition g = gauge_condition_residual(kv, p);
        CHECK(std::abs(g.residual) <= 1e-12 * std::max(g.scale, 1e-3));
        CHECK(std::abs(g.delta1_coefficient) <= 1e-11 * std::max(g.scale, 1e-3));
    }
}

TEST_CASE("gauge_condition_lab_example") {
    const GaugeDecomposition g = gauge_condition_residual(Vec3(0.5, 0, 0), lab);
    CHECK(std::abs(g.residual) <= 1e-14);
    // i omega W with W = xi Delta / 4 pi - omega^2 + omega0^2
    const double W = (0.25 - 1.0 - 0.04 * pi) / (4.0 * pi) + 0.75;
    CHECK(testing_support::rel(g.secular_coefficient, I * 0.5 * W) <= 1e-12);
    CHECK(g.secular_coefficient.imag() == Catch::Approx(0.340159).epsilon(1e-5));
}

TEST_CASE("multiplet_bilinears_are_frame_independent") {
    Rng rng(80);
    for (int n = 0; n < 100; ++n) {
        const ModelParams p = rng.params(false);
        const LorentzMatrix L = rng.lorentz(1.2);
        const ModelParams q = testing_support::boosted(p, L);
        const Vec3 kv = rng.vec3(3);
        for (const ModeLabel& l : {ModeLabel::zero(), ModeLabel::three(), ModeLabel::tilde_three()}) {
            const ModeMultiplet a = mode_multiplet(l, kv, p);
            const ModeMultiplet b = mode_multiplet(l, spatial(L * a.wavevector), q);
            const double sc = 1.0 + a.constant_part.squaredNorm() + a.secular_part.squaredNorm();
            CHECK(std::abs(field_dot(a.constant_part, a.constant_part) - field_dot(b.constant_part, b.constant_part)) <= 1e-9 * sc);
            CHECK(std::abs(a.constant_part(8) - b.constant_part(8)) <= 1e-9 * sc);
            CHECK(std::abs(field_dot(a.secular_part, a.constant_part) - field_dot(b.secular_part, b.constant_part)) <= 1e-9 * sc);
        }
    }
}
