#include "hopfield/propagator.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace hopfield;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

class Draw {
public:
    explicit Draw(std::uint64_t seed) : gen_(seed) {}
    double u(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
    int i(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen_); }
    Vec3 vec(double r) { return {u(-r, r), u(-r, r), u(-r, r)}; }
    FourVector four_vec(double r) { return {u(-r, r), u(-r, r), u(-r, r), u(-r, r)}; }
    Vec3 dir() {
        Vec3 d;
        do d = vec(1.0);
        while (d.norm() < 0.1 || d.norm() > 1.0);
        return d.normalized();
    }
    ModelParams params(bool moving = true) {
        ModelParams p{u(0.5, 2.0), u(0.5, 2.0), u(0.02, 0.4), u(0.3, 5.0) * (i(0, 3) == 0 ? -1.0 : 1.0),
                      MediumVelocity::rest()};
        if (moving) p.v = MediumVelocity::from_spatial(u(0.0, 1.5) * dir());
        return p;
    }
    LorentzMatrix lorentz() {
        const Eigen::Matrix3d r = Eigen::AngleAxisd(u(-pi, pi), dir()).toRotationMatrix();
        return LorentzMatrix::boost(u(0.0, 1.2) * dir()) * LorentzMatrix::rotation(r);
    }

private:
    std::mt19937_64 gen_;
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

bool near_pole(const Vec3& k, const ModelParams& p, double margin) {
    for (BranchId b : all_branches) {
        const double w = comoving_frequency(branch_frequencies(k, p, b).k(), p);
        if (std::abs(w * w - p.omega0 * p.omega0) < margin) return true;
    }
    return std::abs(ellipsoid_residual(k, p)) < margin;
}

Outcome determinant() {
    Draw d(1);
    double worst = 0.0;
    int cases = 0;
    while (cases < 1000) {
        const ModelParams p = d.params();
        const FourVector k = d.four_vec(3.0);
        const double w = comoving_frequency(k, p);
        if (std::abs(w * w - p.omega0 * p.omega0) < 1e-3) continue;
        ++cases;
        const cplx a = kernel_determinant(k, p), b = kernel_determinant_lu(k, p);
        const double floor = 1e-6 * std::pow(assemble_kernel(k, p).cwiseAbs().maxCoeff(), 9);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), floor));
    }
    return {worst <= 1e-9, fmt("max rel dev %.2e over %d cases", worst, cases)};
}

Outcome branches() {
    Draw d(2);
    double resid = 0.0, ordering_gap = 1e300, degen = 0.0, refl = 0.0;
    const ModelParams lab{};
    for (int n = 0; n < 1000; ++n) {
        const ModelParams p = n % 2 ? d.params() : lab;
        const Vec3 k = d.vec(4.0);
        for (BranchId b : all_branches) resid = std::max(resid, branch_residual(branch_frequencies(k, p, b), p));
        const Vec3 kl = d.vec(5.0);
        const double a1 = branch_frequencies(kl, lab, BranchId::Sellmeier1).k0;
        const double a2 = branch_frequencies(kl, lab, BranchId::Sellmeier2).k0;
        ordering_gap = std::min({ordering_gap, a1 - lab.omega0, lab.omega0 - a2});
        refl = std::max(refl, rel(branch_frequencies(-k, p, BranchId::ResonanceLower).k0,
                                  -branch_frequencies(k, p, BranchId::ResonanceUpper).k0));
        if (std::abs(kl.norm() - 1.0) > 0.05) {
            const ModelParams free = lab.with_coupling(1e-6);
            const double s1 = branch_frequencies(kl, free, BranchId::Sellmeier1).k0;
            const double s2 = branch_frequencies(kl, free, BranchId::Sellmeier2).k0;
            degen = std::max({degen, std::abs(s1 - std::max(1.0, kl.norm())), std::abs(s2 - std::min(1.0, kl.norm()))});
        }
    }
    const bool ok = resid <= 1e-10 && ordering_gap > 0.0 && degen <= 1e-9 && refl <= 1e-14;
    return {ok, fmt("residual %.1e, min ordering gap %.2e, g->0 dev %.1e, reflection %.1e", resid, ordering_gap,
                    degen, refl)};
}

Outcome eom() {
    Draw d(3);
    double worst = 0.0, gauge = 0.0;
    for (int n = 0; n < 100; ++n) {
        const ModelParams p = n % 2 ? d.params() : ModelParams{};
        const Vec3 k = d.vec(3.0);
        if (near_pole(k, p, 1e-3)) continue;
        const FourVector x = d.four_vec(5.0);
        for (const auto& l : all_labels()) worst = std::max(worst, eom_residual(l, k, x, p).relative());
        const GaugeDecomposition g = gauge_condition_residual(k, p);
        gauge = std::max(gauge, std::abs(g.residual) / g.scale);
    }
    return {worst <= 1e-9 && gauge <= 1e-10, fmt("max EOM/constraint rel %.2e, gauge condition %.2e", worst, gauge)};
}

Outcome gram_tables() {
    Draw d(4);
    double table = 0.0, zeros = 0.0, markers = 0.0, identity = 0.0, unshifted = 0.0;
    int cases = 0;
    while (cases < 200) {
        const ModelParams p = cases % 2 ? d.params() : ModelParams{};
        const Vec3 k = d.vec(3.0);
        if (near_pole(k, p, 0.05)) continue;
        ++cases;
        const double wb = derive_constants(p).bar_omega, w02 = p.omega0 * p.omega0;
        const LightconeData l = lightcone_data(branch_frequencies(k, p, BranchId::LightconePlus).k(), p);
        const FourVector kr = branch_frequencies(k, p, BranchId::ResonanceUpper).k();
        double scale = 0.0;
        for (const auto& a : all_labels())
            for (const auto& b : all_labels()) scale = std::max(scale, std::abs(gram_density(a, b, k, p).constant));
        for (const auto& a : all_labels())
            for (const auto& b : all_labels()) {
                const GramDensity g = gram_density(a, b, k, p);
                markers = std::max(markers, g.max_marker() / scale);
                std::optional<cplx> expect;
                using K = ModeLabel::Kind;
                if (a.kind == K::Zero && b.kind == K::Three)
                    expect = -2.0 * cplx(0, 1) * l.omega / (4.0 * pi) * k.norm() * l.delta;
                if (a.kind == K::Three && b.kind == K::Zero)
                    expect = 2.0 * cplx(0, 1) * l.omega / (4.0 * pi) * k.norm() * l.delta;
                if (a.kind == K::TildeThree && b.kind == K::TildeThree)
                    expect = 2.0 * p.v.gamma() * wb / (p.chi * w02) * (wb * wb - mink_dot(kr, kr));
                if (a.kind == K::Transverse && a == b) expect = dr_slope(mode_branch_point(a, k, p).k(), p);
                if (expect)
                    table = std::max(table, rel(g.physical(), *expect));
                else
                    zeros = std::max(zeros, std::abs(g.physical()) / scale);
                const cplx c = commutator_density(a, b, k, p).value;
                const cplx via = inversion_factor(a, k, p) * std::conj(inversion_factor(b, k, p)) *
                                 gram_density(inversion_partner(a), inversion_partner(b), k, p).physical();
                identity = std::max(identity, std::abs(c - via));
            }
        // shifted and unshifted a3 conventions; the a0 a3 sign is the derived one
        const double w = l.omega;
        const cplx a03 = commutator_density(ModeLabel::zero(), ModeLabel::three(), k, p).value;
        table = std::max(table, rel(a03, -k.norm() / w * 8.0 * pi * cplx(0, 1) / l.delta));
        zeros = std::max(zeros, std::abs(commutator_density(ModeLabel::three(), ModeLabel::three(), k, p).value) / std::abs(a03));
        const double u33 = -(p.xi + 4.0 * pi * ((w * w - w02) * l.delta - 8.0 * pi * w * w * derive_constants(p).coupling) /
                                        (l.delta * l.delta)) * k.norm() / (w * w);
        unshifted = std::max(unshifted, rel(commutator_density(ModeLabel::three(), ModeLabel::three(), k, p, false).value, u33));
    }
    const cplx lab03 = commutator_density(ModeLabel::zero(), ModeLabel::three(), Vec3(0.5, 0, 0), ModelParams{}).value;
    const bool ok = table <= 1e-10 && zeros <= 1e-10 && markers <= 1e-10 && identity == 0.0 && unshifted <= 1e-10;
    return {ok, fmt("table rel %.1e, zero entries %.1e, markers %.1e, identity %.1e, unshifted a3 %.1e; "
                    "lab [a0,a3+] = %+.5fi (derived sign)",
                    table, zeros, markers, identity, unshifted, lab03.imag())};
}

Outcome heisenberg() {
    Draw d(5);
    double worst = 0.0, admix = 0.0;
    int cases = 0;
    while (cases < 100) {
        const ModelParams p = cases % 2 ? d.params() : ModelParams{};
        const Vec3 k = d.vec(3.0);
        if (near_pole(k, p, 0.05)) continue;
        ++cases;
        for (const auto& l : all_labels()) {
            const HeisenbergCheck h = heisenberg_residual(l, k, p);
            worst = std::max(worst, h.residual);
            if (l.kind == ModeLabel::Kind::Three) admix = std::max(admix, std::abs(h.expected_admixture));
        }
    }
    return {worst <= 1e-9 && admix > 0.0, fmt("max residual %.2e over %d momenta, a3->a0 admixture up to %.3f", worst, cases, admix)};
}

Outcome covariance() {
    Draw d(6);
    double br = 0.0, ns = 0.0, bil = 0.0, ell = 0.0;
    for (int n = 0; n < 100; ++n) {
        const ModelParams p = d.params(false);
        const LorentzMatrix L = d.lorentz();
        const ModelParams q = p.with_velocity(MediumVelocity(L * p.v.vec()));
        const Vec3 k = d.vec(3.0);
        for (BranchId b : all_branches) {
            const BranchPoint bp = branch_frequencies(k, p, b);
            const FourVector kk = L * bp.k();
            const BranchPoint image = branch_frequencies(spatial(kk), q, b);
            br = std::max(br, std::abs(image.k0 - kk(0)) / (1.0 + kk.norm()));
            if (b == BranchId::LightconeMinus || b == BranchId::ResonanceLower) continue;
            if (std::abs(bp.omega * bp.omega - p.omega0 * p.omega0) < 0.05) continue;
            Eigen::Matrix<cplx, 9, 9> D = Eigen::Matrix<cplx, 9, 9>::Zero();
            D.block<4, 4>(0, 0) = L.matrix().cast<cplx>();
            D.block<4, 4>(4, 4) = L.matrix().cast<cplx>();
            D(8, 8) = 1.0;
            const KernelMatrix m = assemble_kernel(image.k(), q);
            for (const auto& u : null_space(bp, p, 1e-9)) {
                const FieldVector t = D * u;
                ns = std::max(ns, (m * t).norm() / (m.norm() * t.norm()));
            }
        }
        if (near_pole(k, p, 0.05)) continue;
        for (const auto& l : all_labels()) {
            const ModeMultiplet a = mode_multiplet(l, k, p);
            const ModeMultiplet b = mode_multiplet(l, spatial(L * a.wavevector), q);
            const double s = 1.0 + a.constant_part.squaredNorm() + a.secular_part.squaredNorm();
            bil = std::max({bil, std::abs(field_dot(a.constant_part, a.constant_part) - field_dot(b.constant_part, b.constant_part)) / s,
                            std::abs(field_dot(a.secular_part, a.constant_part) - field_dot(b.secular_part, b.constant_part)) / s});
        }
        // rest-frame sphere |k| = bar_omega on the light cone, boosted onto the ellipsoid
        const SingularEllipsoid e = singular_ellipsoid(q);
        const double wb = derive_constants(q).bar_omega;
        const Vec3 u = q.v.spatial();
        ell = std::max({ell, (e.center - wb * u).norm(), std::abs(e.semi_axis_long - wb * q.v.gamma()),
                        std::abs(e.semi_axis_short - wb)});
        for (int s = 0; s < 10; ++s) {
            const FourVector kr = wb * four(1.0, d.dir());
            ell = std::max(ell, std::abs(e.Q(spatial(L * kr)) - 1.0));
        }
    }
    const bool ok = br <= 1e-8 && ns <= 1e-8 && bil <= 1e-8 && ell <= 1e-8;
    return {ok, fmt("branches %.1e, null spaces %.1e, bilinears %.1e, ellipsoid %.1e", br, ns, bil, ell)};
}

Outcome propagator_structure() {
    Draw d(7);
    double zero = 0.0, herm = 0.0, dual = 0.0;
    for (int n = 0; n < 10; ++n) {
        const ModelParams p = n % 2 ? d.params() : ModelParams{};
        // support kept off k = 0, where the light-cone integrand has an integrable 1/|k| point
        const double width = d.u(0.6, 1.2);
        const TestPacket pk = make_packet(5.0 * width * d.dir(), width, p);
        const FourVector z = d.four_vec(0.8);
        std::vector<TwoPointRequest> req;
        for (int I = 5; I <= 9; ++I) req.push_back({{I, 9}, z});
        const int i = d.i(1, 8), j = d.i(1, 8);
        req.push_back({{i, j}, z});
        req.push_back({{j, i}, FourVector(-z)});
        req.push_back({{1, 9}, z});
        req.push_back({{d.i(1, 4), d.i(1, 4)}, z});
        const auto lo = twopoint_batch(req, pk, QuadratureGrid{40}, p);
        const auto hi = twopoint_batch(req, pk, QuadratureGrid{80}, p);
        double mag = 0.0;
        for (const auto& r : hi) mag = std::max(mag, std::abs(r.value));
        for (int r = 0; r < 5; ++r) zero = std::max(zero, std::abs(hi[r].value) / mag);
        herm = std::max(herm, std::abs(hi[5].value - std::conj(hi[6].value)) / mag);
        for (std::size_t r = 5; r < req.size(); ++r)
            dual = std::max(dual, std::abs(lo[r].value - hi[r].value) / std::max(std::abs(hi[r].value), 1e-6 * mag));
        const cplx bb = pauli_jordan({9, 9}, z, FourVector::Zero(), pk, QuadratureGrid{16}, p).value;
        zero = std::max(zero, std::abs(bb) / mag);
    }
    return {zero <= 1e-12 && herm <= 1e-12 && dual <= 1e-3,
            fmt("PB/BB %.1e, Hermitian swap %.1e, 40 vs 80 nodes rel %.2e", zero, herm, dual)};
}

Outcome causality_frame(const ModelParams& p, const LorentzMatrix& L, const char* label, std::string& log) {
    const std::vector<FourVector> lab_seps = {
        {0, 0, 2.3, 0},     {0, 0, 0, 2.3},     {0.2, 0, 1.6, 1.6},   {-0.2, 0, -1.6, 1.6}, {0, 0.4, 2.2, 0},
        {0.15, -0.3, 0, -2.3}, {0, 0, -2.3, 0.4}, {-0.1, 0.2, 1.2, -1.9}, {1, 0, 0, 0},       {1.2, 0, 0.3, 0}};
    std::vector<FourVector> seps;
    for (const auto& z : lab_seps) seps.push_back(L * z);
    const std::vector<TwoPointSpec> comps = {{3, 3}, {4, 4}, {2, 3}, {1, 9}, {6, 7}, {3, 7}};
    const TestPacket pk = make_packet(Vec3(9, -7, 6), 2.5, p);
    const CausalityReport r = causality_scan(seps, comps, pk, QuadratureGrid{48}, p, {}, CausalityOptions{1e-3, 1.5});
    log += fmt("%s: max ratio %.2e (n=%d), refined %.2e (n=%d)%s; ", label, r.max_ratio, r.nodes_per_axis,
               r.refined_max_ratio, r.refined_nodes_per_axis, r.pass ? "" : " FAIL");
    return {r.pass, ""};
}

Outcome causality() {
    std::string log;
    const ModelParams lab{};
    const bool a = causality_frame(lab, LorentzMatrix{}, "lab", log).pass;
    const Vec3 u(0.75, 0, 0);
    const bool b = causality_frame(lab.with_velocity(MediumVelocity::from_spatial(u)), LorentzMatrix::boost(u), "boosted",
                                   log).pass;
    log.resize(log.size() - 2);
    return {a && b, log};
}

Outcome tachyon() {
    Draw d(9);
    int mismatch = 0, massless_miss = 0;
    for (int n = 0; n < 1000; ++n) {
        const double m1 = d.u(0.0, 3.0), m2 = d.u(0.0, 3.0), lam = d.u(0.0, 3.0);
        const CoupledScalarSpectrum s = coupled_scalar_spectrum(m1, m2, lam);
        if (s.tachyonic != (std::min(s.ksq_plus, s.ksq_minus) < 0.0)) ++mismatch;
        if (!coupled_scalar_spectrum(d.u(0.0, 3.0), 0.0, d.u(1e-3, 3.0)).tachyonic) ++massless_miss;
    }
    return {mismatch == 0 && massless_miss == 0,
            fmt("flag mismatches %d/1000, massless partner not flagged %d/1000", mismatch, massless_miss)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "determinant factorization", 5, determinant},
        {2, "branch certification", 5, branches},
        {3, "mode/EOM closure", 10, eom},
        {4, "Gram/commutator tables", 10, gram_tables},
        {5, "Heisenberg consistency", 5, heisenberg},
        {6, "covariance suite", 10, covariance},
        {7, "propagator structure", 120, propagator_structure},
        {8, "microcausality", 300, causality},
        {9, "tachyon diagnostic", 1, tachyon},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = s < c.budget_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("criterion %d %-26s %s  %s [%.2f s of %.0f s%s]\n", c.id, c.name.c_str(), pass ? "PASS" : "FAIL",
                    o.detail.c_str(), s, c.budget_s, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
