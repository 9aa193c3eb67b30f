#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace hopfield {

using cplx = std::complex<double>;

// Contravariant components (x^0, x^1, x^2, x^3), c = 1.
template <class T>
using Four = Eigen::Matrix<T, 4, 1>;

using FourVector = Four<double>;
using CFourVector = Four<cplx>;
using Vec3 = Eigen::Vector3d;

inline const Eigen::Matrix4d& metric() {
    static const Eigen::Matrix4d eta = Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal();
    return eta;
}

template <class A, class B>
auto mink_dot(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    return a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3);
}

template <class A>
auto lower(const Eigen::MatrixBase<A>& a) {
    using T = typename A::Scalar;
    return Four<T>(a(0), -a(1), -a(2), -a(3));
}

inline FourVector four(double t, const Vec3& s) { return {t, s(0), s(1), s(2)}; }
inline Vec3 spatial(const FourVector& a) { return a.tail<3>(); }

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Timelike unit four-velocity of the medium.
class MediumVelocity {
public:
    // Unit four-velocity with spatial part u = gamma * nu.
    static MediumVelocity from_spatial(const Vec3& u) {
        return MediumVelocity(four(std::sqrt(1.0 + u.squaredNorm()), u));
    }
    static MediumVelocity rest() { return from_spatial(Vec3::Zero()); }

    explicit MediumVelocity(const FourVector& v) : v_(v) {
        if (!(v(0) > 0.0) || std::abs(mink_dot(v, v) - 1.0) > 1e-12 * v(0) * v(0))
            throw DomainError("medium velocity must be a future unit timelike vector");
    }

    const FourVector& vec() const { return v_; }
    double gamma() const { return v_(0); }
    Vec3 spatial() const { return v_.tail<3>(); }
    // Three-velocity nu with v = gamma (1, nu).
    Vec3 nu() const { return v_.tail<3>() / v_(0); }

private:
    FourVector v_;
};

// Restricted orthochronous Lorentz matrix Lambda^mu_nu.
class LorentzMatrix {
public:
    LorentzMatrix() : m_(Eigen::Matrix4d::Identity()) {}
    explicit LorentzMatrix(const Eigen::Matrix4d& m) : m_(m) {
        const double defect = (m.transpose() * metric() * m - metric()).cwiseAbs().maxCoeff();
        if (defect > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff() * m.cwiseAbs().maxCoeff()) ||
            m(0, 0) < 1.0 - 1e-12 || m.determinant() < 0.0)
            throw DomainError("matrix is not a restricted Lorentz transformation");
    }

    const Eigen::Matrix4d& matrix() const { return m_; }
    double operator()(int mu, int nu) const { return m_(mu, nu); }

    template <class T>
    Four<T> operator*(const Four<T>& a) const { return m_.cast<T>() * a; }
    LorentzMatrix operator*(const LorentzMatrix& o) const { return LorentzMatrix(m_ * o.m_, Unchecked{}); }

    LorentzMatrix inverse() const { return LorentzMatrix(metric() * m_.transpose() * metric(), Unchecked{}); }

    double orthogonality_defect() const {
        return (m_.transpose() * metric() * m_ - metric()).cwiseAbs().maxCoeff();
    }

    // Pure boost taking the rest frame to velocity u (spatial part of the four-velocity).
    static LorentzMatrix boost(const Vec3& u) {
        const double g = std::sqrt(1.0 + u.squaredNorm());
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m(0, 0) = g;
        m.block<1, 3>(0, 1) = u.transpose();
        m.block<3, 1>(1, 0) = u;
        const double u2 = u.squaredNorm();
        if (u2 > 0.0) m.block<3, 3>(1, 1) += (g - 1.0) / u2 * u * u.transpose();
        return LorentzMatrix(m, Unchecked{});
    }

    static LorentzMatrix rotation(const Eigen::Matrix3d& r) {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.block<3, 3>(1, 1) = r;
        return LorentzMatrix(m);
    }

private:
    struct Unchecked {};
    LorentzMatrix(const Eigen::Matrix4d& m, Unchecked) : m_(m) {}
    Eigen::Matrix4d m_;
};

// Lambda(v) with Lambda(v) v = (1, 0, 0, 0). Identity at rest.
inline LorentzMatrix boost_to_rest(const MediumVelocity& v) {
    return LorentzMatrix::boost(-v.spatial());
}

// Antisymmetric rank-2 tensor, six stored entries (upper indices unless noted).
class AntisymmetricTensor {
public:
    AntisymmetricTensor() { e_.fill(0.0); }
    static AntisymmetricTensor from_matrix(const Eigen::Matrix4d& m) {
        AntisymmetricTensor t;
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) t.set(a, b, 0.5 * (m(a, b) - m(b, a)));
        return t;
    }

    double operator()(int a, int b) const {
        if (a == b) return 0.0;
        return a < b ? e_[slot(a, b)] : -e_[slot(b, a)];
    }
    void set(int a, int b, double x) {
        if (a == b) throw DomainError("diagonal of an antisymmetric tensor is fixed at zero");
        if (a < b) e_[slot(a, b)] = x;
        else e_[slot(b, a)] = -x;
    }
    Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d m;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) m(a, b) = (*this)(a, b);
        return m;
    }

private:
    static int slot(int a, int b) {
        static constexpr int table[4][4] = {{-1, 0, 1, 2}, {-1, -1, 3, 4}, {-1, -1, -1, 5}, {-1, -1, -1, -1}};
        return table[a][b];
    }
    std::array<double, 6> e_;
};

inline double levi_civita(int i, int j, int k) {
    return 0.5 * double((i - j) * (j - k) * (k - i));
}

// eps_{mu nu} = eps3_{ij} Lambda(v)^i_mu Lambda(v)^j_nu; spatial indices of eps3 run 0..2.
inline AntisymmetricTensor little_group_embed(const Eigen::Matrix3d& eps3, const MediumVelocity& v) {
    if ((eps3 + eps3.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, eps3.cwiseAbs().maxCoeff()))
        throw DomainError("little_group_embed needs an antisymmetric 3x3 matrix");
    const Eigen::Matrix4d L = boost_to_rest(v).matrix();
    const Eigen::Matrix<double, 3, 4> Ls = L.bottomRows<3>();
    return AntisymmetricTensor::from_matrix(Ls.transpose() * eps3 * Ls);
}

struct LittleGroupProjection {
    Eigen::Matrix3d R;  // R^{ij}
    Vec3 Jv;            // (1/2) eps^{lij} R_{ij}
};

// Direct projection R^{ij} = Lambda^i_mu Lambda^j_nu M^{mu nu}.
inline LittleGroupProjection little_group_project(const AntisymmetricTensor& M, const MediumVelocity& v) {
    const Eigen::Matrix4d L = boost_to_rest(v).matrix();
    const Eigen::Matrix<double, 3, 4> Ls = L.bottomRows<3>();
    LittleGroupProjection out;
    out.R = Ls * M.matrix() * Ls.transpose();
    for (int l = 0; l < 3; ++l) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += 0.5 * levi_civita(l, i, j) * out.R(i, j);
        out.Jv(l) = s;
    }
    return out;
}

// Same R^{ij} expanded in M^{ij}, M^{0i} and the velocity.
inline Eigen::Matrix3d little_group_R_expanded(const AntisymmetricTensor& M, const MediumVelocity& v) {
    const Vec3 u = v.spatial();
    const double g = v.gamma();
    const double u2 = u.squaredNorm();
    Eigen::Matrix3d R;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double r = M(i + 1, j + 1) - u(i) * M(0, j + 1) + u(j) * M(0, i + 1);
            if (u2 > 0.0) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += u(k) * (u(i) * M(k + 1, j + 1) - u(j) * M(k + 1, i + 1));
                r += (g - 1.0) / u2 * s;
            }
            R(i, j) = r;
        }
    return R;
}

// J^l = (1/2) eps^{lij} M^{ij} and K^j = M^{0j}.
inline Vec3 rotation_part(const AntisymmetricTensor& M) {
    return {M(2, 3), M(3, 1), M(1, 2)};
}
inline Vec3 boost_part(const AntisymmetricTensor& M) { return {M(0, 1), M(0, 2), M(0, 3)}; }

// J_v in terms of J and K, including the longitudinal term.
inline Vec3 little_group_Jv_expanded(const AntisymmetricTensor& M, const MediumVelocity& v) {
    const Vec3 J = rotation_part(M);
    const Vec3 K = boost_part(M);
    const Vec3 u = v.spatial();
    const double g = v.gamma();
    Vec3 out = g * J - u.cross(K);
    if (u.squaredNorm() > 0.0) out -= (g - 1.0) * u * u.dot(J) / u.squaredNorm();
    return out;
}

// v^0 J - eps^{lij} v_i K_j without the longitudinal term; equals the above only when v.J = 0.
inline Vec3 little_group_Jv_short(const AntisymmetricTensor& M, const MediumVelocity& v) {
    return v.gamma() * rotation_part(M) - v.spatial().cross(boost_part(M));
}

}  // namespace hopfield
