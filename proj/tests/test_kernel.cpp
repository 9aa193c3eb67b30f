#include "hopfield/modes.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace hopfield;
using testing_support::Rng;

namespace {

const ModelParams lab{};

Eigen::Matrix<cplx, 9, 9> field_rep(const LorentzMatrix& L) {
    Eigen::Matrix<cplx, 9, 9> d = Eigen::Matrix<cplx, 9, 9>::Zero();
    d.block<4, 4>(0, 0) = L.matrix().cast<cplx>();
    d.block<4, 4>(4, 4) = L.matrix().cast<cplx>();
    d(8, 8) = 1.0;
    return d;
}

// k with |omega^2 - omega0^2| bounded away from zero
FourVector off_pole(Rng& rng, const ModelParams& p, double r = 3.0) {
    for (;;) {
        const FourVector k = rng.four_vec(r);
        const double w = comoving_frequency(k, p);
        if (std::abs(w * w - p.omega0 * p.omega0) > 0.1 * p.omega0 * p.omega0) return k;
    }
}

}  // namespace

TEST_CASE("kernel_zero_momentum_blocks") {
    Rng rng(50);
    for (int n = 0; n < 20; ++n) {
        const ModelParams p = rng.params();
        const KernelMatrix m = assemble_kernel(FourVector::Zero(), p);
        CHECK(m.block<4, 8>(0, 0).isZero());
        CHECK(m.block<4, 4>(4, 0).isZero());
        CHECK((m.block<4, 4>(4, 4) + Eigen::Matrix4cd::Identity() / p.chi).isZero(1e-15));
        CHECK(m.col(8).head<8>().isZero());
        CHECK(m.row(8).head<8>().isZero());
        CHECK(m(8, 8) == cplx(-p.xi));
    }
}

TEST_CASE("kernel_decouples_at_zero_coupling") {
    Rng rng(51);
    for (int n = 0; n < 50; ++n) {
        const ModelParams p = rng.params().with_coupling(0.0);
        const KernelMatrix m = assemble_kernel(rng.four_vec(3), p);
        CHECK(m.block<4, 4>(0, 4).isZero());
        CHECK(m.block<4, 4>(4, 0).isZero());
    }
}

TEST_CASE("kernel_conjugation_reverses_momentum") {
    Rng rng(52);
    for (int n = 0; n < 200; ++n) {
        const ModelParams p = rng.params();
        const FourVector k = rng.four_vec(3);
        CHECK((assemble_kernel(k, p).conjugate() - assemble_kernel(-k, p)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("determinant_closed_form_matches_lu") {
    Rng rng(53);
    for (int n = 0; n < 1000; ++n) {
        const ModelParams p = rng.params();
        const FourVector k = off_pole(rng, p);
        const cplx a = kernel_determinant(k, p), b = kernel_determinant_lu(k, p);
        const double scale = std::pow(assemble_kernel(k, p).cwiseAbs().maxCoeff(), 9);
        CHECK(std::abs(a - b) <= 1e-9 * std::max(std::abs(a), 1e-6 * scale));
    }
}

TEST_CASE("determinant_vanishes_on_branches") {
    Rng rng(54);
    for (int n = 0; n < 100; ++n) {
        const ModelParams p = rng.params();
        const Vec3 kv = rng.vec3(3);
        for (BranchId b : all_branches) {
            const FourVector k = branch_frequencies(kv, p, b).k();
            if (std::abs(std::pow(comoving_frequency(k, p), 2) / std::pow(p.omega0, 2) - 1.0) < 0.05) continue;
            FourVector off = k;
            off(0) += 0.05 * (1.0 + std::abs(k(0)));
            const double on = std::abs(kernel_determinant_lu(k, p));
            const double away = std::abs(kernel_determinant_lu(off, p));
            CHECK(on <= 1e-8 * away);
            CHECK(std::abs(kernel_determinant(k, p)) <= 1e-8 * std::abs(kernel_determinant(off, p)));
        }
    }
}

TEST_CASE("mode_vectors_span_null_space") {
    Rng rng(55);
    for (int n = 0; n < 200; ++n) {
        const ModelParams p = n % 2 ? rng.params() : lab;
        const Vec3 kv = rng.vec3(3);
        for (const ModeLabel& l : all_labels()) {
            if (l.kind == ModeLabel::Kind::Zero) continue;
            const BranchPoint bp = mode_branch_point(l, kv, p);
            if (std::abs(bp.omega * bp.omega - p.omega0 * p.omega0) < 0.05) continue;
            const FieldVector u = mode_multiplet(l, kv, p).constant_part;
            const KernelMatrix m = assemble_kernel(bp.k(), p);
            CHECK((m * u).norm() <= 1e-10 * m.norm() * u.norm());
            CHECK(subspace_residual(null_space(bp, p, 1e-9), u) <= 1e-6);
        }
    }
}

TEST_CASE("null_space_dimension_free_field") {
    Rng rng(56);
    for (int n = 0; n < 50; ++n) {
        const ModelParams p = rng.params().with_coupling(0.0);
        const Vec3 kv = rng.vec3(3);
        const BranchPoint bp = branch_frequencies(kv, p, BranchId::LightconePlus);
        if (std::abs(bp.omega - p.omega0) < 0.05) continue;
        const auto ns = null_space(bp, p, 1e-9);
        CHECK(ns.size() == 3);
        for (const auto& u : ns) {
            CHECK(p_part(u).norm() <= 1e-9);
            CHECK(std::abs(u(8)) <= 1e-9);
        }
    }
}

TEST_CASE("null_space_covariance") {
    Rng rng(57);
    for (int n = 0; n < 100; ++n) {
        const ModelParams p = rng.params(false);
        const LorentzMatrix L = rng.lorentz(1.2);
        const ModelParams q = testing_support::boosted(p, L);
        const Vec3 kv = rng.vec3(3);
        for (BranchId b : {BranchId::LightconePlus, BranchId::ResonanceUpper, BranchId::Sellmeier1, BranchId::Sellmeier2}) {
            const BranchPoint bp = branch_frequencies(kv, p, b);
            if (std::abs(bp.omega * bp.omega - p.omega0 * p.omega0) < 0.05) continue;
            const FourVector kk = L * bp.k();
            const BranchPoint image = branch_frequencies(spatial(kk), q, b);
            const auto D = field_rep(L);
            const KernelMatrix ms = assemble_kernel(bp.k(), p), md = assemble_kernel(image.k(), q);
            for (const auto& u : null_space(bp, p, 1e-9)) {
                const FieldVector t = D * u;
                CHECK((md * t).norm() <= 1e-8 * md.norm() * t.norm());
            }
            for (const auto& u : null_space(image, q, 1e-9)) {
                const FieldVector t = D.inverse() * u;
                CHECK((ms * t).norm() <= 1e-8 * ms.norm() * t.norm());
            }
        }
    }
}

TEST_CASE("reduced_kernel_eigensystem") {
    Rng rng(58);
    for (int n = 0; n < 300; ++n) {
        const ModelParams p = rng.params();
        const FourVector k = off_pole(rng, p);
        const ReducedKernel r = af_eigensystem(k, p);
        CHECK(r.residual() <= 1e-10);
        const cplx det = r.matrix.determinant();
        const double prod = std::pow(r.eigen_triple, 3) * r.eigen_v;
        CHECK(std::abs(det - prod) <= 1e-9 * std::max(std::abs(prod), std::pow(r.matrix.cwiseAbs().maxCoeff(), 4) * 1e-6));
    }
}

TEST_CASE("reduced_kernel_zero_on_shell") {
    Rng rng(59);
    for (int n = 0; n < 100; ++n) {
        const ModelParams p = rng.params();
        const Vec3 kv = rng.vec3(3);
        for (BranchId b : {BranchId::Sellmeier1, BranchId::Sellmeier2}) {
            const BranchPoint bp = branch_frequencies(kv, p, b);
            if (std::abs(bp.omega * bp.omega - p.omega0 * p.omega0) < 0.05) continue;
            const ReducedKernel r = af_eigensystem(bp.k(), p);
            CHECK(std::abs(r.eigen_triple) <= 1e-10 * (1.0 + bp.k().squaredNorm()));
        }
        const BranchPoint res = branch_frequencies(kv, p, BranchId::ResonanceUpper);
        CHECK(std::abs(af_eigensystem(res.k(), p).eigen_v) <= 1e-10 * (1.0 + res.k().squaredNorm()));
    }
}

TEST_CASE("reduced_kernel_rejects_k_parallel_v") {
    Rng rng(60);
    for (int n = 0; n < 20; ++n) {
        const ModelParams p = rng.params();
        CHECK_THROWS_AS(af_eigensystem(rng.uniform(1.5, 3.0) * p.omega0 * p.v.vec(), p), DomainError);
    }
}
