#pragma once

#include "hopfield/spacetime.hpp"
#include "hopfield/model.hpp"

#include <random>

namespace testing_support {

using namespace hopfield;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen_); }
    Vec3 vec3(double r) { return {uniform(-r, r), uniform(-r, r), uniform(-r, r)}; }
    Vec3 direction() {
        Vec3 d;
        do d = vec3(1.0);
        while (d.norm() < 0.1 || d.norm() > 1.0);
        return d.normalized();
    }
    FourVector four_vec(double r) { return {uniform(-r, r), uniform(-r, r), uniform(-r, r), uniform(-r, r)}; }
    // |u| up to umax, i.e. speeds up to umax / sqrt(1 + umax^2)
    MediumVelocity velocity(double umax = 1.5) { return MediumVelocity::from_spatial(uniform(0.0, umax) * direction()); }
    Eigen::Matrix3d rotation() {
        const Vec3 axis = direction();
        return Eigen::AngleAxisd(uniform(-pi, pi), axis).toRotationMatrix();
    }
    LorentzMatrix lorentz(double umax = 1.5) {
        return LorentzMatrix::boost(uniform(0.0, umax) * direction()) * LorentzMatrix::rotation(rotation());
    }
    ModelParams params(bool boosted = true) {
        ModelParams p;
        p.omega0 = uniform(0.5, 2.0);
        p.chi = uniform(0.5, 2.0);
        p.g = uniform(0.02, 0.4);
        p.xi = uniform(0.3, 5.0) * (integer(0, 3) == 0 ? -1.0 : 1.0);
        if (boosted) p.v = velocity();
        return p;
    }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

inline double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }
inline double rel(cplx a, cplx b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Parameters boosted from a rest-frame medium by L, i.e. v' = L e0.
inline ModelParams boosted(const ModelParams& p, const LorentzMatrix& L) {
    return p.with_velocity(MediumVelocity(L * p.v.vec()));
}

}  // namespace testing_support
