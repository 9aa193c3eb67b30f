#pragma once

#include "dispersion.hpp"
#include "polarization.hpp"

#include <Eigen/SVD>

#include <vector>

namespace hopfield {

using KernelMatrix = Eigen::Matrix<cplx, 9, 9>;
using FieldVector = Eigen::Matrix<cplx, 9, 1>;

// Rows: A equations (4), P equations (4), gauge equation; columns: A^mu, P^mu, B.
inline KernelMatrix assemble_kernel(const FourVector& k, const ModelParams& p) {
    const cplx I(0.0, 1.0);
    const FourVector& v = p.v.vec();
    const FourVector kl = lower(k), vl = lower(v);
    const double k2 = mink_dot(k, k);
    const double w = mink_dot(k, v);
    KernelMatrix m = KernelMatrix::Zero();
    for (int mu = 0; mu < 4; ++mu) {
        for (int nu = 0; nu < 4; ++nu) {
            const double d = mu == nu ? 1.0 : 0.0;
            m(mu, nu) = (k2 * d - k(mu) * kl(nu)) / (4.0 * pi);
            m(mu, 4 + nu) = I * p.g * (w * d - v(mu) * kl(nu));
            m(4 + mu, nu) = -I * p.g * (w * d - k(mu) * vl(nu));
        }
        m(4 + mu, 4 + mu) = (w * w / (p.omega0 * p.omega0) - 1.0) / p.chi;
        m(mu, 8) = -I * k(mu);
        m(8, mu) = I * kl(mu);
    }
    m(8, 8) = -p.xi;
    return m;
}

inline cplx kernel_determinant(const FourVector& k, const ModelParams& p) {
    const double w = mink_dot(k, p.v.vec());
    require_off_pole(w, p);
    const double k2 = mink_dot(k, k);
    const double w02 = p.omega0 * p.omega0;
    const double c = derive_constants(p).coupling;
    const double dr = k2 / (4.0 * pi) - c * w * w / (w * w - w02);
    const double res = 1.0 / (4.0 * pi) - c / (w * w - w02);
    return -(k2 * k2) / std::pow(p.chi, 4) * std::pow(w * w / w02 - 1.0, 4) * dr * dr * res;
}

inline cplx kernel_determinant_lu(const FourVector& k, const ModelParams& p) {
    return assemble_kernel(k, p).partialPivLu().determinant();
}

inline std::vector<FieldVector> null_space(const BranchPoint& bp, const ModelParams& p, double rel_threshold = 1e-10) {
    const KernelMatrix m = assemble_kernel(bp.k(), p);
    Eigen::JacobiSVD<KernelMatrix> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    std::vector<FieldVector> out;
    for (int i = 0; i < 9; ++i)
        if (s(i) <= rel_threshold * s(0)) out.push_back(svd.matrixV().col(i));
    if (out.empty()) throw std::logic_error("empty kernel at a certified branch point");
    return out;
}

// Euclidean residual of v projected off span(basis).
inline double subspace_residual(const std::vector<FieldVector>& basis, const FieldVector& v) {
    FieldVector r = v;
    for (const auto& b : basis) r -= b.dot(r) * b;
    return r.norm() / v.norm();
}

struct ReducedKernel {
    Eigen::Matrix<cplx, 4, 4> matrix;
    double eigen_triple;
    double eigen_v;
    std::array<FourVector, 3> triple_vectors;
    FourVector v_vector;

    double residual() const {
        double worst = 0.0;
        const double scale = matrix.cwiseAbs().maxCoeff();
        for (const auto& u : triple_vectors)
            worst = std::max(worst, (matrix * u.cast<cplx>() - eigen_triple * u.cast<cplx>()).norm() / u.norm());
        worst = std::max(worst, (matrix * v_vector.cast<cplx>() - eigen_v * v_vector.cast<cplx>()).norm() / v_vector.norm());
        return worst / scale;
    }
};

// 4x4 operator on the transverse-plus-longitudinal A amplitude after eliminating P and B.
inline ReducedKernel af_eigensystem(const FourVector& k, const ModelParams& p) {
    const FourVector& v = p.v.vec();
    const double w = mink_dot(k, v);
    require_off_pole(w, p);
    const double k2 = mink_dot(k, k);
    const double kk = k(0) * k(0) + spatial(k).squaredNorm();
    if (std::abs(k2 - w * w) <= 1e-12 * std::max(kk, 1e-300))
        throw DomainError("af_eigensystem needs k and v linearly independent");
    const double w02 = p.omega0 * p.omega0;
    const double c = derive_constants(p).coupling / (w * w - w02);
    const double dr = k2 / (4.0 * pi) - c * w * w;
    const FourVector kl = lower(k), vl = lower(v);
    Eigen::Matrix<cplx, 4, 4> m;
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu)
            m(mu, nu) = (mu == nu ? dr : 0.0) + c * (w * v(mu) * kl(nu) - k2 * v(mu) * vl(nu));
    const double wb2 = std::pow(derive_constants(p).bar_omega, 2);
    const PolarizationPair e = polarization_pair(k, p.v);
    return {m, dr, k2 / (4.0 * pi) * (w * w - wb2) / (w * w - w02), {e.e1, e.e2, k}, v};
}

}  // namespace hopfield
