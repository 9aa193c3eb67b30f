#pragma once

#include "algebra.hpp"

#include <algorithm>
#include <atomic>
#include <string>
#include <thread>
#include <vector>

namespace hopfield {

using BlockMatrix = Eigen::Matrix<cplx, 9, 9>;

// Phi^I: A^{I-1} for I = 1..4, P^{I-5} for I = 5..8, B for I = 9.
struct TwoPointSpec {
    int I, J;

    TwoPointSpec(int i, int j) : I(i), J(j) {
        if (i < 1 || i > 9 || j < 1 || j > 9) throw DomainError("component indices run from 1 to 9");
    }
    int slot_i() const { return I - 1; }
    int slot_j() const { return J - 1; }
    TwoPointSpec swapped() const { return {J, I}; }
};

inline std::string component_name(int I) {
    if (I >= 1 && I <= 4) return "A" + std::to_string(I - 1);
    if (I >= 5 && I <= 8) return "P" + std::to_string(I - 5);
    if (I == 9) return "B";
    throw DomainError("component indices run from 1 to 9");
}

// Gaussian times the square of (omega_+^2 - bar_omega^2), omega_+ on the light cone.
class TestPacket {
public:
    TestPacket(Vec3 center, double width, const ModelParams& p, bool reflected = false)
        : center_(std::move(center)), width_(width), reflected_(reflected),
          bar_omega_(derive_constants(p).bar_omega), v_(p.v) {
        if (!(width > 0.0)) throw DomainError("packet width must be positive");
    }

    const Vec3& center() const { return center_; }
    double width() const { return width_; }
    bool reflected() const { return reflected_; }
    // Centre of the support in the integration variable.
    Vec3 support_center() const { return reflected_ ? Vec3(-center_) : center_; }
    TestPacket reflect() const {
        TestPacket r = *this;
        r.reflected_ = !reflected_;
        return r;
    }

    double window(const Vec3& k) const {
        const double w = v_.gamma() * k.norm() - v_.spatial().dot(k);
        const double d = w * w - bar_omega_ * bar_omega_;
        return d * d;
    }
    double gaussian(const Vec3& k) const {
        return std::exp(-(k - center_).squaredNorm() / (2.0 * width_ * width_));
    }
    double operator()(const Vec3& kin) const {
        const Vec3 k = reflected_ ? Vec3(-kin) : kin;
        return window(k) * gaussian(k);
    }

private:
    Vec3 center_;
    double width_;
    bool reflected_;
    double bar_omega_;
    MediumVelocity v_;
};

struct PacketCheck {
    double max_surface_value;
    double max_shell_ratio;
};

// packet / dist^2 on a thin shell around sampled ellipsoid points.
inline PacketCheck check_packet_window(const TestPacket& pk, const ModelParams& p, int samples = 20,
                                       double shell = 1e-2) {
    PacketCheck c{0.0, 0.0};
    for (int s = 0; s < samples; ++s) {
        // deterministic spiral over directions
        const double zc = 1.0 - 2.0 * (s + 0.5) / samples;
        const double phi = s * pi * (3.0 - std::sqrt(5.0));
        const Vec3 n(std::sqrt(1.0 - zc * zc) * std::cos(phi), std::sqrt(1.0 - zc * zc) * std::sin(phi), zc);
        const Vec3 q = ellipsoid_point(n, p);
        c.max_surface_value = std::max(c.max_surface_value, std::abs(pk(q)));
        for (double sign : {-1.0, 1.0})
            for (double frac : {1.0, 0.5, 0.25}) {
                const double d = sign * shell * frac;
                c.max_shell_ratio = std::max(c.max_shell_ratio, pk(q + d * n) / (d * d));
            }
    }
    return c;
}

inline TestPacket make_packet(const Vec3& center, double width, const ModelParams& p) {
    TestPacket pk(center, width, p);
    const PacketCheck c = check_packet_window(pk, p);
    const double scale = std::pow(derive_constants(p).bar_omega, 4);
    if (c.max_surface_value > 1e-14 * scale || !std::isfinite(c.max_shell_ratio))
        throw std::logic_error("packet window does not vanish to second order on the singular ellipsoid");
    return pk;
}

struct QuadratureGrid {
    int nodes_per_axis = 48;
    double radius_sigmas = 6.0;
    std::string scheme = "trapezoid-ball";

    QuadratureGrid refined() const { return {2 * nodes_per_axis, radius_sigmas, scheme}; }
};

enum class Route { Closed, ModeSum };

struct BranchMask {
    bool lightcone = true;
    bool resonance = true;
    bool sellmeier = true;
};

struct PropagatorOptions {
    Route route = Route::Closed;
    BranchMask branches{};
    int threads = 1;
    bool auto_refine = true;
};

// Momentum-space integrand of one branch: (constant + secular (v.z)) e^{-i k.z}.
struct BranchTerm {
    FourVector k;
    BlockMatrix constant = BlockMatrix::Zero();
    BlockMatrix secular = BlockMatrix::Zero();
};

namespace detail {

inline Eigen::Matrix4d outer(const FourVector& a, const FourVector& b) { return a * b.transpose(); }

inline void set_block(BlockMatrix& m, int bi, int bj, const Eigen::Matrix4cd& blk) {
    m.block<4, 4>(4 * bi, 4 * bj) = blk;
}

// sum_i e_i e_i over the transverse pair, from the metric and the (k, v) Gram matrix.
inline Eigen::Matrix4d transverse_projector(const FourVector& k, const FourVector& v) {
    Eigen::Matrix2d G;
    G << mink_dot(k, k), mink_dot(k, v), mink_dot(v, k), mink_dot(v, v);
    const Eigen::Matrix2d Gi = G.inverse();
    Eigen::Matrix4d T = -metric();
    const std::array<FourVector, 2> X{k, v};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) T += Gi(a, b) * outer(X[a], X[b]);
    return T;
}

}  // namespace detail

inline std::vector<BranchTerm> closed_form_terms(const Vec3& kvec, const ModelParams& p, const BranchMask& mask = {}) {
    const cplx I(0.0, 1.0);
    const FourVector& v = p.v.vec();
    const DerivedConstants dc = derive_constants(p);
    const double w02 = p.omega0 * p.omega0;
    const double cw = p.chi * w02;
    const double kn = kvec.norm();
    std::vector<BranchTerm> out;
    if (mask.lightcone) {
        BranchTerm t;
        t.k = four(kn, kvec);
        const LightconeData d = lightcone_data(t.k, p);
        const double w = d.omega;
        const double q_alpha = -(p.xi + 4.0 * pi * (w * w - w02) / d.delta) / (4.0 * kn * w);
        const double q_beta2 = pi * d.z / (kn * w * w * d.delta);
        const Eigen::Matrix4d kk = detail::outer(t.k, t.k);
        const Eigen::Matrix4d vk = detail::outer(v, t.k) + detail::outer(t.k, v);
        detail::set_block(t.constant, 0, 0, (q_alpha * vk + q_beta2 * kk).cast<cplx>());
        const double ap = 2.0 * pi * p.g * cw / (kn * w * d.delta);
        detail::set_block(t.constant, 0, 1, I * ap * (w * detail::outer(t.k, v) - kk).cast<cplx>());
        detail::set_block(t.constant, 1, 0, -I * ap * (w * detail::outer(v, t.k) - kk).cast<cplx>());
        for (int mu = 0; mu < 4; ++mu) {
            t.constant(mu, 8) = 0.5 * I * t.k(mu) / kn;
            t.constant(8, mu) = -0.5 * I * t.k(mu) / kn;
        }
        const double sec = (p.xi - 4.0 * pi * (w * w - w02) / d.delta) / (4.0 * kn * w);
        detail::set_block(t.secular, 0, 0, I * sec * kk.cast<cplx>());
        out.push_back(t);
    }
    if (mask.resonance) {
        BranchTerm t;
        const BranchPoint bp = branch_frequencies(kvec, p, BranchId::ResonanceUpper);
        t.k = bp.k();
        const double wb = dc.bar_omega;
        const double k2 = mink_dot(t.k, t.k);
        const double n = cw / (2.0 * wb * v(0) * (wb * wb - k2));
        const FourVector ua = v - wb / k2 * t.k;
        const FourVector up = wb * v - t.k;
        detail::set_block(t.constant, 0, 0, (16.0 * pi * pi * p.g * p.g * n * detail::outer(ua, ua)).cast<cplx>());
        detail::set_block(t.constant, 0, 1, -I * 4.0 * pi * p.g * n * detail::outer(ua, up).cast<cplx>());
        detail::set_block(t.constant, 1, 0, I * 4.0 * pi * p.g * n * detail::outer(up, ua).cast<cplx>());
        detail::set_block(t.constant, 1, 1, (n * detail::outer(up, up)).cast<cplx>());
        out.push_back(t);
    }
    if (mask.sellmeier) {
        const auto roots = quartic_roots(kvec, p);
        std::vector<double> pos;
        for (double x : roots)
            if (v(0) * x - kvec.dot(p.v.spatial()) > 0.0) pos.push_back(x);
        if (pos.size() != 2) throw BranchFailure("expected two positive-omega roots", kvec, int(pos.size()));
        std::sort(pos.rbegin(), pos.rend());
        for (double k0 : pos) {
            BranchTerm t;
            t.k = four(k0, kvec);
            const double w = mink_dot(t.k, v);
            // g = 0 pole sheet: no photon, only the free transverse oscillator (g -> 0 limit of gam^2 / slope)
            if (p.g == 0.0 && std::abs(w * w - w02) < 1e-10 * w02) {
                const Eigen::Matrix4d T = detail::transverse_projector(t.k, v);
                detail::set_block(t.constant, 1, 1, (p.chi * p.omega0 / (2.0 * v(0)) * T).cast<cplx>());
                out.push_back(t);
                continue;
            }
            const double slope = dr_slope(t.k, p);
            const double gam = p.g * cw * w / (w * w - w02);
            const Eigen::Matrix4d T = detail::transverse_projector(t.k, v) / slope;
            detail::set_block(t.constant, 0, 0, T.cast<cplx>());
            detail::set_block(t.constant, 0, 1, -I * gam * T.cast<cplx>());
            detail::set_block(t.constant, 1, 0, I * gam * T.cast<cplx>());
            detail::set_block(t.constant, 1, 1, (gam * gam * T).cast<cplx>());
            out.push_back(t);
        }
    }
    return out;
}

// Same integrand assembled from the mode multiplets and the commutator table.
// secular_y collects the (v.y) coefficient, which must equal -secular.
inline std::vector<BranchTerm> mode_sum_terms(const Vec3& kvec, const ModelParams& p, const BranchMask& mask = {},
                                              std::vector<BlockMatrix>* secular_y = nullptr) {
    struct Group {
        std::vector<ModeLabel> labels;
    };
    std::vector<Group> groups;
    if (mask.lightcone) groups.push_back({{ModeLabel::zero(), ModeLabel::three()}});
    if (mask.resonance) groups.push_back({{ModeLabel::tilde_three()}});
    if (mask.sellmeier)
        for (int a = 1; a <= 2; ++a) groups.push_back({{ModeLabel::transverse(a, 1), ModeLabel::transverse(a, 2)}});
    std::vector<BranchTerm> out;
    for (const auto& g : groups) {
        std::vector<ModeMultiplet> ms;
        std::vector<double> norm;
        for (const auto& l : g.labels) {
            ms.push_back(mode_multiplet(l, kvec, p));
            const BranchPoint bp = mode_branch_point(l, kvec, p);
            norm.push_back(1.0 / branch_slope(bp, p));
        }
        BranchTerm t;
        t.k = ms.front().wavevector;
        BlockMatrix sy = BlockMatrix::Zero();
        for (std::size_t a = 0; a < ms.size(); ++a)
            for (std::size_t b = 0; b < ms.size(); ++b) {
                const cplx c = norm[a] * norm[b] * commutator_density(g.labels[a], g.labels[b], kvec, p).value;
                t.constant += c * ms[a].constant_part * ms[b].constant_part.adjoint();
                t.secular += c * ms[a].secular_part * ms[b].constant_part.adjoint();
                sy += c * ms[a].constant_part * ms[b].secular_part.adjoint();
            }
        if (secular_y) secular_y->push_back(sy);
        out.push_back(t);
    }
    return out;
}

inline std::vector<BranchTerm> integrand_terms(const Vec3& kvec, const ModelParams& p, const PropagatorOptions& o) {
    return o.route == Route::Closed ? closed_form_terms(kvec, p, o.branches) : mode_sum_terms(kvec, p, o.branches);
}

inline cplx evaluate_terms(const std::vector<BranchTerm>& terms, const TwoPointSpec& c, const FourVector& z,
                           const ModelParams& p) {
    const double s = mink_dot(p.v.vec(), z);
    cplx acc = 0.0;
    for (const auto& t : terms) {
        const cplx amp = t.constant(c.slot_i(), c.slot_j()) + s * t.secular(c.slot_i(), c.slot_j());
        acc += amp * std::polar(1.0, -mink_dot(t.k, z));
    }
    return acc;
}

struct QuadratureResult {
    cplx value;
    cplx coarse;  // same lattice with doubled spacing
    double est_error;
    int nodes_per_axis;
    double spacing;
};

struct TwoPointRequest {
    TwoPointSpec component;
    FourVector separation;  // x - y
};

inline int effective_nodes(const QuadratureGrid& grid, double width, double max_separation, bool auto_refine) {
    int n = grid.nodes_per_axis;
    if (n < 4) throw DomainError("quadrature grid needs at least 4 nodes per axis");
    if (auto_refine && max_separation > 0.0) {
        const double span = 2.0 * grid.radius_sigmas * width;
        const int need = int(std::ceil(span * max_separation / (pi / 4.0))) + 1;
        n = std::max(n, need);
    }
    return n;
}

// Smeared W^{IJ}(z) = int d^3k/(2pi)^3 P(k) integrand for a batch of requests over one lattice.
inline std::vector<QuadratureResult> twopoint_batch(const std::vector<TwoPointRequest>& req, const TestPacket& packet,
                                                    const QuadratureGrid& grid, const ModelParams& p,
                                                    const PropagatorOptions& opt = {}) {
    double zmax = 0.0;
    for (const auto& r : req) zmax = std::max(zmax, std::abs(r.separation(0)) + spatial(r.separation).norm());
    const int n = effective_nodes(grid, packet.width(), zmax, opt.auto_refine);
    const double R = grid.radius_sigmas * packet.width();
    const double h = 2.0 * R / (n - 1);
    const Vec3 c = packet.support_center();
    const double wb2 = std::pow(derive_constants(p).bar_omega, 2);
    const std::size_t nr = req.size();
    std::vector<FourVector> seps;
    std::vector<std::size_t> sep_of(nr);
    for (std::size_t r = 0; r < nr; ++r) {
        std::size_t s = 0;
        while (s < seps.size() && seps[s] != req[r].separation) ++s;
        if (s == seps.size()) seps.push_back(req[r].separation);
        sep_of[r] = s;
    }
    std::vector<double> vz(seps.size());
    for (std::size_t s = 0; s < seps.size(); ++s) vz[s] = mink_dot(p.v.vec(), seps[s]);

    struct Partial {
        std::vector<cplx> fine, coarse;
    };
    std::vector<Partial> slices(n, Partial{std::vector<cplx>(nr, 0.0), std::vector<cplx>(nr, 0.0)});
    std::atomic<int> next{0};
    std::vector<std::string> errors(n);

    const auto work = [&]() {
        std::vector<cplx> phase;
        for (int i = next++; i < n; i = next++) {
            try {
                Partial& part = slices[i];
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l) {
                        const Vec3 off((i - 0.5 * (n - 1)) * h, (j - 0.5 * (n - 1)) * h, (l - 0.5 * (n - 1)) * h);
                        if (off.norm() > R) continue;
                        const Vec3 k = c + off;
                        const double w = packet(k);
                        if (w == 0.0) continue;
                        // node on the ellipsoid itself, where the window has already killed the integrand
                        const double lc = mink_dot(four(k.norm(), k), p.v.vec());
                        if (std::abs(lc * lc - wb2) < 1e-14 * wb2) continue;
                        const auto terms = integrand_terms(k, p, opt);
                        const std::size_t nb = terms.size();
                        phase.resize(nb * seps.size());
                        for (std::size_t s = 0; s < seps.size(); ++s)
                            for (std::size_t b = 0; b < nb; ++b)
                                phase[s * nb + b] = w * std::polar(1.0, -mink_dot(terms[b].k, seps[s]));
                        const bool even = i % 2 == 0 && j % 2 == 0 && l % 2 == 0;
                        for (std::size_t r = 0; r < nr; ++r) {
                            const int a = req[r].component.slot_i(), bb = req[r].component.slot_j();
                            const std::size_t s = sep_of[r];
                            cplx f = 0.0;
                            for (std::size_t b = 0; b < nb; ++b)
                                f += (terms[b].constant(a, bb) + vz[s] * terms[b].secular(a, bb)) * phase[s * nb + b];
                            part.fine[r] += f;
                            if (even) part.coarse[r] += f;
                        }
                    }
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int nt = std::max(1, std::min(opt.threads, n));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error("quadrature node failure: " + e);

    // pairwise tree over slice index, independent of thread count
    for (int stride = 1; stride < n; stride *= 2)
        for (int i = 0; i + stride < n; i += 2 * stride)
            for (std::size_t r = 0; r < nr; ++r) {
                slices[i].fine[r] += slices[i + stride].fine[r];
                slices[i].coarse[r] += slices[i + stride].coarse[r];
            }
    const double wf = std::pow(h / (2.0 * pi), 3);
    std::vector<QuadratureResult> out(nr);
    for (std::size_t r = 0; r < nr; ++r) {
        const cplx fine = wf * slices[0].fine[r];
        const cplx coarse = 8.0 * wf * slices[0].coarse[r];
        out[r] = {fine, coarse, std::abs(fine - coarse), n, h};
    }
    return out;
}

inline QuadratureResult twopoint_plus(const TwoPointSpec& comp, const FourVector& x, const FourVector& y,
                                      const TestPacket& packet, const QuadratureGrid& grid, const ModelParams& p,
                                      const PropagatorOptions& opt = {}) {
    return twopoint_batch({{comp, x - y}}, packet, grid, p, opt).front();
}

struct CommutatorResult {
    cplx value;
    double est_error;
    int nodes_per_axis;
};

// C^{IJ}(z) = W^{IJ}(z; P) - W^{JI}(-z; P(-k)), batched.
inline std::vector<CommutatorResult> pauli_jordan_batch(const std::vector<TwoPointRequest>& req,
                                                        const TestPacket& packet, const QuadratureGrid& grid,
                                                        const ModelParams& p, const PropagatorOptions& opt = {}) {
    std::vector<TwoPointRequest> swapped;
    for (const auto& r : req) swapped.push_back({r.component.swapped(), FourVector(-r.separation)});
    const auto plus = twopoint_batch(req, packet, grid, p, opt);
    const auto minus = twopoint_batch(swapped, packet.reflect(), grid, p, opt);
    std::vector<CommutatorResult> out;
    for (std::size_t r = 0; r < req.size(); ++r)
        out.push_back({plus[r].value - minus[r].value, plus[r].est_error + minus[r].est_error,
                       std::max(plus[r].nodes_per_axis, minus[r].nodes_per_axis)});
    return out;
}

inline CommutatorResult pauli_jordan(const TwoPointSpec& comp, const FourVector& x, const FourVector& y,
                                     const TestPacket& packet, const QuadratureGrid& grid, const ModelParams& p,
                                     const PropagatorOptions& opt = {}) {
    return pauli_jordan_batch({{comp, x - y}}, packet, grid, p, opt).front();
}

struct CausalityEntry {
    FourVector separation;
    TwoPointSpec component;
    bool spacelike;
    cplx value = 0.0;
    cplx refined_value = 0.0;
    double ratio = 0.0;
    double refined_ratio = 0.0;
};

struct CausalityReport {
    std::vector<CausalityEntry> entries;
    double reference = 0.0;
    double max_ratio = 0.0;
    double refined_max_ratio = 0.0;
    double threshold = 1e-3;
    double refinement_slack = 0.05;
    double ratio_floor = 1e-6;
    int nodes_per_axis = 0;
    int refined_nodes_per_axis = 0;
    bool has_spacelike = false;
    bool has_timelike = false;
    bool pass = false;
    std::string note;
};

struct CausalityOptions {
    double threshold = 1e-3;
    double refine_factor = 2.0;
};

// Each spacelike |C^IJ| is measured against the largest timelike |C^IJ| of the same component,
// or the largest timelike value overall when that component vanishes at every timelike point.
inline CausalityReport causality_scan(const std::vector<FourVector>& separations,
                                      const std::vector<TwoPointSpec>& components, const TestPacket& packet,
                                      const QuadratureGrid& grid, const ModelParams& p,
                                      const PropagatorOptions& opt = {}, const CausalityOptions& copt = {}) {
    CausalityReport rep;
    rep.threshold = copt.threshold;
    std::vector<TwoPointRequest> req;
    for (const auto& z : separations)
        for (const auto& c : components) {
            req.push_back({c, z});
            const bool space = mink_dot(z, z) < 0.0;
            rep.entries.push_back({z, c, space});
            (space ? rep.has_spacelike : rep.has_timelike) = true;
        }
    if (!rep.has_spacelike) {
        rep.pass = true;
        rep.note = "no spacelike points";
        return rep;
    }
    if (!rep.has_timelike) {
        rep.note = "no timelike reference; informational only";
        return rep;
    }
    const auto base = pauli_jordan_batch(req, packet, grid, p, opt);
    rep.nodes_per_axis = base.front().nodes_per_axis;
    QuadratureGrid fine = grid;
    fine.nodes_per_axis = int(std::ceil(copt.refine_factor * rep.nodes_per_axis));
    const auto refined = pauli_jordan_batch(req, packet, fine, p, opt);
    rep.refined_nodes_per_axis = refined.front().nodes_per_axis;
    for (std::size_t r = 0; r < req.size(); ++r) {
        rep.entries[r].value = base[r].value;
        rep.entries[r].refined_value = refined[r].value;
    }
    const auto reference = [&](const CausalityEntry& e, bool use_fine) {
        double own = 0.0, all = 0.0;
        for (const auto& t : rep.entries) {
            if (t.spacelike) continue;
            const double m = std::abs(use_fine ? t.refined_value : t.value);
            all = std::max(all, m);
            if (t.component.I == e.component.I && t.component.J == e.component.J) own = std::max(own, m);
        }
        return own > 1e-12 * all ? own : all;
    };
    for (auto& e : rep.entries) {
        if (!e.spacelike) {
            rep.reference = std::max(rep.reference, std::abs(e.value));
            continue;
        }
        e.ratio = std::abs(e.value) / reference(e, false);
        e.refined_ratio = std::abs(e.refined_value) / reference(e, true);
        rep.max_ratio = std::max(rep.max_ratio, e.ratio);
        rep.refined_max_ratio = std::max(rep.refined_max_ratio, e.refined_ratio);
    }
    if (rep.reference == 0.0) {
        rep.note = "timelike reference vanishes";
        return rep;
    }
    const bool small = rep.max_ratio <= rep.threshold;
    const bool not_worse = rep.refined_max_ratio <= rep.max_ratio * (1.0 + rep.refinement_slack) ||
                           rep.refined_max_ratio <= rep.ratio_floor;
    rep.pass = small && not_worse;
    return rep;
}

}  // namespace hopfield
