#include "hopfield/algebra.hpp"
#include "hopfield/config.hpp"
#include "hopfield/propagator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <variant>

using namespace hopfield;
using json = nlohmann::ordered_json;

namespace {

constexpr int exit_invariant = 1;
constexpr int exit_usage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

// Rows share one column list; CSV and JSON are two views of the same table.
class Table {
public:
    using Cell = std::variant<double, long, std::string, bool>;

    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add(std::vector<Cell> row) {
        if (row.size() != columns_.size()) throw std::logic_error("row width does not match the header");
        rows_.push_back(std::move(row));
    }

    std::string csv() const {
        std::ostringstream os;
        for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
        os << '\n';
        for (const auto& r : rows_) {
            for (std::size_t c = 0; c < r.size(); ++c) {
                if (c) os << ',';
                std::visit([&](const auto& v) { os << text(v); }, r[c]);
            }
            os << '\n';
        }
        return os.str();
    }

    json rows_json() const {
        json a = json::array();
        for (const auto& r : rows_) {
            json o = json::object();
            for (std::size_t c = 0; c < r.size(); ++c)
                std::visit([&](const auto& v) { o[columns_[c]] = value(v); }, r[c]);
            a.push_back(std::move(o));
        }
        return a;
    }

private:
    static std::string text(double v) { return num(v); }
    static std::string text(long v) { return std::to_string(v); }
    static std::string text(const std::string& v) { return v; }
    static std::string text(bool v) { return v ? "true" : "false"; }
    static json value(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
    static json value(long v) { return v; }
    static json value(const std::string& v) { return v; }
    static json value(bool v) { return v; }

    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

// Writes to a sibling temporary and renames, so a failed run leaves nothing behind.
void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".partial";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw UsageError("cannot open '" + path + "' for writing");
        f << text;
        if (!f.flush()) throw UsageError("write to '" + path + "' failed");
    }
    std::filesystem::rename(tmp, target);
}

std::string render(const Table& t, const RunConfig& c) {
    return c.format == "json" ? t.rows_json().dump(2) + "\n" : t.csv();
}

std::vector<std::string> param_columns() { return {"omega0", "chi", "g", "xi", "vx", "vy", "vz"}; }

std::vector<Table::Cell> param_cells(const RunConfig& c) {
    return {c.omega0, c.chi, c.g, c.xi, c.velocity(0), c.velocity(1), c.velocity(2)};
}

template <class... L>
std::vector<std::string> cat(std::vector<std::string> a, const L&... rest) {
    (a.insert(a.end(), rest.begin(), rest.end()), ...);
    return a;
}

std::vector<Table::Cell> cat_cells(std::vector<Table::Cell> a, const std::vector<Table::Cell>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::string slot_name(int s) { return component_name(s + 1); }

// ---- dispersion

const std::vector<std::string> dispersion_columns =
    cat(std::vector<std::string>{"i", "kx", "ky", "kz", "k_norm", "lightcone_plus", "lightcone_minus",
                                 "resonance_upper", "resonance_lower", "sellmeier1", "sellmeier2", "max_residual",
                                 "kmax", "n", "tol"},
        param_columns());

int run_dispersion(const RunConfig& c) {
    const ModelParams p = c.params();
    const Vec3 dir = c.direction.normalized();
    Table t(dispersion_columns);
    double worst = 0.0;
    for (int i = 1; i <= c.n; ++i) {
        const Vec3 k = c.kmax * double(i) / double(c.n) * dir;
        std::vector<Table::Cell> row{long(i), k(0), k(1), k(2), k.norm()};
        double resid = 0.0;
        for (BranchId b : all_branches) {
            const BranchPoint bp = branch_frequencies(k, p, b);
            row.emplace_back(bp.k0);
            try {
                resid = std::max(resid, branch_residual(bp, p));
            } catch (const DomainError&) {
                // g = 0 sheet on the pole: the defining equation is the pole itself
            }
        }
        worst = std::max(worst, resid);
        row.insert(row.end(), {resid, c.kmax, long(c.n), c.tol});
        t.add(cat_cells(std::move(row), param_cells(c)));
    }
    emit(render(t, c), c.out);
    if (worst > 1e-10) {
        std::cerr << "branch residual " << num(worst) << " exceeds 1e-10\n";
        return exit_invariant;
    }
    return 0;
}

// ---- kernel

const std::vector<std::string> kernel_columns =
    cat(std::vector<std::string>{"branch", "k0", "kx", "ky", "kz", "comoving_omega", "det_closed_re", "det_closed_im",
                                 "det_lu_re", "det_lu_im", "det_rel_dev", "null_dim", "mode_residual", "tol", "note"},
        param_columns());

int run_kernel(const RunConfig& c) {
    const ModelParams p = c.params();
    Table t(kernel_columns);
    bool ok = true;
    for (BranchId b : all_branches) {
        const BranchPoint bp = branch_frequencies(c.k, p, b);
        const FourVector k = bp.k();
        cplx closed = std::nan(""), lu = std::nan("");
        double dev = std::nan(""), resid = std::nan("");
        long dim = -1;
        std::string note;
        try {
            closed = kernel_determinant(k, p);
            lu = kernel_determinant_lu(k, p);
            const KernelMatrix m = assemble_kernel(k, p);
            dev = std::abs(closed - lu) / std::pow(m.cwiseAbs().maxCoeff(), 9);
            const auto basis = null_space(bp, p);
            dim = long(basis.size());
            resid = 0.0;
            for (const auto& u : basis) resid = std::max(resid, (m * u).norm() / (m.norm() * u.norm()));
            ok = ok && dev <= 1e-9 && resid <= 1e-9;
        } catch (const DomainError& e) {
            note = e.what();
        }
        t.add(cat_cells({std::string(to_string(b)), k(0), k(1), k(2), k(3), bp.omega, closed.real(), closed.imag(),
                         lu.real(), lu.imag(), dev, dim, resid, c.tol, note},
                        param_cells(c)));
    }
    emit(render(t, c), c.out);
    return ok ? 0 : exit_invariant;
}

// ---- modes

const std::vector<std::string> modes_columns =
    cat(std::vector<std::string>{"label", "slot", "k0", "kx", "ky", "kz", "constant_re", "constant_im", "secular_re",
                                 "secular_im", "momentum_re", "momentum_im", "eom_relative", "x0", "x1", "x2", "x3",
                                 "tol"},
        param_columns());

int run_modes(const RunConfig& c) {
    const ModelParams p = c.params();
    Table t(modes_columns);
    double worst = 0.0;
    for (const auto& l : all_labels()) {
        const ModeMultiplet m = mode_multiplet(l, c.k, p);
        const MomentumMultiplet pi_m = momentum_of(m, p);
        const double eom = eom_residual_of(m, c.x, p).relative();
        worst = std::max(worst, eom);
        for (int s = 0; s < 9; ++s)
            t.add(cat_cells({l.name(), slot_name(s), m.wavevector(0), c.k(0), c.k(1), c.k(2),
                             m.constant_part(s).real(), m.constant_part(s).imag(), m.secular_part(s).real(),
                             m.secular_part(s).imag(), pi_m.constant_part(s).real(), pi_m.constant_part(s).imag(), eom,
                             c.x(0), c.x(1), c.x(2), c.x(3), c.tol},
                            param_cells(c)));
    }
    emit(render(t, c), c.out);
    if (worst > 1e-9) {
        std::cerr << "field-equation residual " << num(worst) << " exceeds 1e-9\n";
        return exit_invariant;
    }
    return 0;
}

// ---- gram

const std::vector<std::string> gram_columns =
    cat(std::vector<std::string>{"a", "b", "kx", "ky", "kz", "gram_re", "gram_im", "max_marker", "commutator_re",
                                 "commutator_im", "singular", "tol"},
        param_columns());

int run_gram(const RunConfig& c) {
    const ModelParams p = c.params();
    Table t(gram_columns);
    double markers = 0.0, scale = 0.0;
    std::vector<std::tuple<ModeLabel, ModeLabel, GramDensity, CommutatorDensity>> entries;
    for (const auto& a : all_labels())
        for (const auto& b : all_labels()) {
            entries.emplace_back(a, b, gram_density(a, b, c.k, p), commutator_density(a, b, c.k, p));
            scale = std::max(scale, std::abs(std::get<2>(entries.back()).constant));
        }
    for (const auto& [a, b, g, com] : entries) {
        markers = std::max(markers, g.max_marker() / scale);
        t.add(cat_cells({a.name(), b.name(), c.k(0), c.k(1), c.k(2), g.physical().real(), g.physical().imag(),
                         g.max_marker(), com.value.real(), com.value.imag(), com.singular, c.tol},
                        param_cells(c)));
    }
    emit(render(t, c), c.out);
    if (markers > 1e-10) {
        std::cerr << "t and gradient markers " << num(markers) << " exceed 1e-10\n";
        return exit_invariant;
    }
    return 0;
}

// ---- propagator

const std::vector<std::string> propagator_columns = {
    "function", "component", "x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3", "value_re", "value_im",
    "nodes_per_axis", "radius_sigmas", "scheme", "est_error", "tol"};

QuadratureGrid grid_of(const RunConfig& c) { return {c.nodes, c.radius_sigmas, "trapezoid-ball"}; }

PropagatorOptions options_of(const RunConfig& c) {
    PropagatorOptions o;
    o.threads = c.threads;
    return o;
}

int run_propagator(const RunConfig& c) {
    const ModelParams p = c.params();
    const TestPacket pk = make_packet(c.packet_center, c.packet_width, p);
    const TwoPointSpec comp(c.component[0], c.component[1]);
    const QuadratureGrid grid = grid_of(c);
    const QuadratureResult w = twopoint_plus(comp, c.x, c.y, pk, grid, p, options_of(c));
    const CommutatorResult pj = pauli_jordan(comp, c.x, c.y, pk, grid, p, options_of(c));
    const std::string name = component_name(comp.I) + "_" + component_name(comp.J);
    const auto four_json = [](const FourVector& v) { return json::array({v(0), v(1), v(2), v(3)}); };
    const auto grid_json = [&](int n) {
        return json{{"nodes_per_axis", n}, {"radius_sigmas", grid.radius_sigmas}, {"scheme", grid.scheme}};
    };
    const bool ok = w.est_error <= c.tol * std::max(std::abs(w.value), 1e-300);
    if (c.format == "json") {
        json a = json::array();
        a.push_back({{"function", "w_plus"}, {"component", name}, {"x", four_json(c.x)}, {"y", four_json(c.y)},
                     {"value_re", w.value.real()}, {"value_im", w.value.imag()}, {"grid", grid_json(w.nodes_per_axis)},
                     {"est_error", w.est_error}, {"tol", c.tol}});
        a.push_back({{"function", "pauli_jordan"}, {"component", name}, {"x", four_json(c.x)}, {"y", four_json(c.y)},
                     {"value_re", pj.value.real()}, {"value_im", pj.value.imag()},
                     {"grid", grid_json(pj.nodes_per_axis)}, {"est_error", pj.est_error}, {"tol", c.tol}});
        emit(a.dump(2) + "\n", c.out);
    } else {
        Table t(propagator_columns);
        const auto row = [&](const std::string& f, cplx v, int n, double err) {
            t.add({f, name, c.x(0), c.x(1), c.x(2), c.x(3), c.y(0), c.y(1), c.y(2), c.y(3), v.real(), v.imag(), long(n),
                   grid.radius_sigmas, grid.scheme, err, c.tol});
        };
        row("w_plus", w.value, w.nodes_per_axis, w.est_error);
        row("pauli_jordan", pj.value, pj.nodes_per_axis, pj.est_error);
        emit(t.csv(), c.out);
    }
    if (!ok) {
        std::cerr << "estimated relative error " << num(w.est_error / std::abs(w.value)) << " exceeds tol "
                  << num(c.tol) << "\n";
        return exit_invariant;
    }
    return 0;
}

// ---- causality

const std::vector<std::string> causality_columns = {
    "t", "x", "y", "z", "component", "spacelike", "value_re", "value_im", "refined_re", "refined_im", "ratio",
    "refined_ratio", "status", "nodes_per_axis", "refined_nodes_per_axis", "threshold"};

std::vector<FourVector> default_separations() {
    return {{0, 0, 2.3, 0},        {0, 0, 0, 2.3},   {0.2, 0, 1.6, 1.6},     {-0.2, 0, -1.6, 1.6}, {0, 0.4, 2.2, 0},
            {0.15, -0.3, 0, -2.3}, {0, 0, -2.3, 0.4}, {-0.1, 0.2, 1.2, -1.9}, {1, 0, 0, 0},         {1.2, 0, 0.3, 0}};
}

std::vector<TwoPointSpec> default_components() { return {{3, 3}, {4, 4}, {2, 3}, {1, 9}, {6, 7}, {3, 7}}; }

CausalityReport scan(const RunConfig& c, const std::vector<FourVector>& seps, const std::vector<TwoPointSpec>& comps) {
    const ModelParams p = c.params();
    const TestPacket pk = make_packet(c.packet_center, c.packet_width, p);
    return causality_scan(seps, comps, pk, grid_of(c), p, options_of(c), CausalityOptions{c.tol, c.refine_factor});
}

int run_causality(const RunConfig& c) {
    std::vector<FourVector> seps = c.separations.empty() ? default_separations() : c.separations;
    std::vector<TwoPointSpec> comps;
    for (const auto& [i, j] : c.components) comps.emplace_back(i, j);
    if (comps.empty()) comps = default_components();
    const CausalityReport r = scan(c, seps, comps);
    Table t(causality_columns);
    for (const auto& e : r.entries) {
        const std::string status = !e.spacelike ? "REF" : e.ratio <= r.threshold ? "PASS" : "FAIL";
        t.add({e.separation(0), e.separation(1), e.separation(2), e.separation(3),
               component_name(e.component.I) + "_" + component_name(e.component.J), e.spacelike, e.value.real(),
               e.value.imag(), e.refined_value.real(), e.refined_value.imag(), e.ratio, e.refined_ratio, status,
               long(r.nodes_per_axis), long(r.refined_nodes_per_axis), r.threshold});
    }
    if (c.format == "json") {
        json o{{"pass", r.pass},
               {"max_ratio", r.max_ratio},
               {"refined_max_ratio", r.refined_max_ratio},
               {"threshold", r.threshold},
               {"note", r.note},
               {"entries", t.rows_json()}};
        emit(o.dump(2) + "\n", c.out);
    } else {
        emit(t.csv(), c.out);
    }
    std::cerr << (r.pass ? "PASS" : "FAIL") << " max spacelike ratio " << num(r.max_ratio) << " (n=" << r.nodes_per_axis
              << "), refined " << num(r.refined_max_ratio) << " (n=" << r.refined_nodes_per_axis << ")"
              << (r.note.empty() ? "" : "; " + r.note) << "\n";
    return r.pass ? 0 : exit_invariant;
}

// ---- selfcheck

struct Check {
    std::string name;
    double measured;
    double tolerance;
    bool pass;
};

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : gen_(seed) {}
    double u(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
    Vec3 vec(double r) { return {u(-r, r), u(-r, r), u(-r, r)}; }
    FourVector four_vec(double r) { return {u(-r, r), u(-r, r), u(-r, r), u(-r, r)}; }
    Vec3 dir() {
        Vec3 d;
        do d = vec(1.0);
        while (d.norm() < 0.1 || d.norm() > 1.0);
        return d.normalized();
    }

private:
    std::mt19937_64 gen_;
};

bool near_pole(const Vec3& k, const ModelParams& p, double margin) {
    if (k.norm() < margin) return true;
    for (BranchId b : all_branches) {
        const double w = comoving_frequency(branch_frequencies(k, p, b).k(), p);
        if (std::abs(w * w - p.omega0 * p.omega0) < margin) return true;
    }
    return std::abs(ellipsoid_residual(k, p)) < margin;
}

std::vector<Check> selfcheck_suite(const RunConfig& c) {
    const ModelParams p = c.params();
    std::vector<Check> out;
    const auto add = [&](std::string name, double measured, double tol, bool extra = true) {
        out.push_back({std::move(name), measured, tol, measured <= tol && extra});
    };
    Sampler s(20240601);

    double det = 0.0;
    for (int n = 0; n < 200; ++n) {
        const FourVector k = s.four_vec(3.0);
        const double w = comoving_frequency(k, p);
        if (std::abs(w * w - p.omega0 * p.omega0) < 1e-3) continue;
        const cplx a = kernel_determinant(k, p), b = kernel_determinant_lu(k, p);
        const double floor = 1e-6 * std::pow(assemble_kernel(k, p).cwiseAbs().maxCoeff(), 9);
        det = std::max(det, std::abs(a - b) / std::max(std::abs(a), floor));
    }
    add("determinant_closed_vs_lu", det, 1e-9);

    double resid = 0.0, refl = 0.0, order = 1e300;
    for (int n = 0; n < 200; ++n) {
        const Vec3 k = s.vec(4.0);
        if (k.norm() < 1e-3) continue;
        for (BranchId b : all_branches) {
            const BranchPoint bp = branch_frequencies(k, p, b);
            if (p.g == 0.0 && std::abs(bp.omega - p.omega0) < 1e-12) continue;
            resid = std::max(resid, branch_residual(bp, p));
        }
        const double up = branch_frequencies(k, p, BranchId::ResonanceUpper).k0;
        refl = std::max(refl, std::abs(branch_frequencies(-k, p, BranchId::ResonanceLower).k0 + up) / std::abs(up));
        if (p.g > 0.0) {
            const double w1 = branch_frequencies(k, p, BranchId::Sellmeier1).omega;
            const double w2 = branch_frequencies(k, p, BranchId::Sellmeier2).omega;
            order = std::min({order, w1 - p.omega0, p.omega0 - w2});
        }
    }
    add("branch_residual", resid, 1e-10);
    add("branch_reflection", refl, 1e-14);
    if (p.g > 0.0) add("sellmeier_ordering_violation", std::max(0.0, -order), 0.0);

    double eom = 0.0, gauge = 0.0, markers = 0.0, herm = 0.0, heis = 0.0;
    int momenta = 0;
    for (int n = 0; n < 200 && momenta < 40; ++n) {
        const Vec3 k = s.vec(3.0);
        if (near_pole(k, p, 0.05)) continue;
        ++momenta;
        const FourVector x = s.four_vec(5.0);
        for (const auto& l : all_labels()) eom = std::max(eom, eom_residual(l, k, x, p).relative());
        const GaugeDecomposition gd = gauge_condition_residual(k, p);
        gauge = std::max(gauge, std::abs(gd.residual) / std::max(gd.scale, 1e-3));
        double scale = 0.0;
        for (const auto& a : all_labels())
            for (const auto& b : all_labels()) scale = std::max(scale, std::abs(gram_density(a, b, k, p).constant));
        for (const auto& a : all_labels())
            for (const auto& b : all_labels()) {
                markers = std::max(markers, gram_density(a, b, k, p).max_marker() / scale);
                const cplx ab = commutator_density(a, b, k, p).value, ba = commutator_density(b, a, k, p).value;
                herm = std::max(herm, std::abs(ab - std::conj(ba)) / std::max(std::abs(ab), 1.0));
            }
        if (p.g > 0.0)
            for (const auto& l : all_labels()) heis = std::max(heis, heisenberg_residual(l, k, p).residual);
    }
    add("field_equations", eom, 1e-9);
    add("gauge_condition", gauge, 1e-9);
    add("gram_markers", markers, 1e-10);
    add("commutator_hermiticity", herm, 1e-10);
    if (p.g > 0.0) add("heisenberg_closure", heis, 1e-9);

    double cov = 0.0;
    for (int n = 0; n < 40; ++n) {
        const LorentzMatrix L = LorentzMatrix::boost(s.u(0.0, 1.2) * s.dir());
        const ModelParams q = p.with_velocity(MediumVelocity(L * p.v.vec()));
        const Vec3 k = s.vec(3.0);
        for (BranchId b : all_branches) {
            const FourVector kk = L * branch_frequencies(k, p, b).k();
            cov = std::max(cov, std::abs(branch_frequencies(spatial(kk), q, b).k0 - kk(0)) / (1.0 + kk.norm()));
        }
    }
    add("branch_covariance", cov, 1e-8);

    const bool round_trip = parse_config(emit_config(c)) == c;
    add("config_round_trip", round_trip ? 0.0 : 1.0, 0.0);

    int mismatch = 0;
    for (int n = 0; n < 200; ++n) {
        const CoupledScalarSpectrum sp = coupled_scalar_spectrum(s.u(0, 3), s.u(0, 3), s.u(0, 3));
        if (sp.tachyonic != (std::min(sp.ksq_plus, sp.ksq_minus) < 0.0)) ++mismatch;
    }
    add("tachyon_flag_mismatches", mismatch, 0.0);

    // smeared structure on a packet kept off k = 0
    const TestPacket pk = make_packet(5.0 * s.dir(), 1.0, p);
    const FourVector z = s.four_vec(0.8);
    std::vector<TwoPointRequest> req = {{{6, 9}, z}, {{9, 9}, z}, {{2, 7}, z}, {{7, 2}, FourVector(-z)}, {{3, 3}, z}};
    const auto lo = twopoint_batch(req, pk, QuadratureGrid{32}, p, options_of(c));
    const auto hi = twopoint_batch(req, pk, QuadratureGrid{64}, p, options_of(c));
    double mag = 0.0;
    for (const auto& r : hi) mag = std::max(mag, std::abs(r.value));
    add("smeared_pb_bb", std::max(std::abs(hi[0].value), std::abs(hi[1].value)) / mag, 1e-12);
    add("hermitian_swap", std::abs(hi[2].value - std::conj(hi[3].value)) / mag, 1e-12);
    double dual = 0.0;
    for (std::size_t r = 2; r < req.size(); ++r)
        dual = std::max(dual, std::abs(lo[r].value - hi[r].value) / std::max(std::abs(hi[r].value), 1e-6 * mag));
    add("grid_32_vs_64", dual, c.tol);

    const CausalityReport cr = scan(c, {{0, 0, 2.3, 0}, {0, 0, 0, 2.3}, {1, 0, 0, 0}}, {{3, 3}, {1, 9}});
    add("causality_max_ratio", cr.max_ratio, c.tol, cr.pass);
    return out;
}

int run_selfcheck(const RunConfig& c) {
    const std::vector<Check> checks = selfcheck_suite(c);
    Table t({"check", "measured", "tolerance", "status"});
    int failures = 0;
    for (const auto& k : checks) {
        t.add({k.name, k.measured, k.tolerance, std::string(k.pass ? "PASS" : "FAIL")});
        if (!k.pass) {
            ++failures;
            std::cerr << "FAIL " << k.name << ": measured " << num(k.measured) << ", tolerated " << num(k.tolerance)
                      << "\n";
        }
    }
    if (c.format == "json")
        emit(json{{"checks", t.rows_json()}, {"failures", failures}}.dump(2) + "\n", c.out);
    else
        emit(t.csv(), c.out);
    std::cerr << checks.size() - failures << " of " << checks.size() << " checks passed\n";
    return failures ? exit_invariant : 0;
}

std::string columns_help(const std::vector<std::string>& cols, bool flat_json = true) {
    std::string s = "CSV columns, in order:\n  ";
    int width = 2;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const std::string item = cols[i] + (i + 1 < cols.size() ? ", " : "");
        if (width + int(item.size()) > 78) {
            s += "\n  ";
            width = 2;
        }
        s += item;
        width += int(item.size());
    }
    return flat_json ? s + "\nJSON output is an array of objects with the same keys." : s;
}

RunConfig load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("", "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covariant quantization of a moving dielectric: dispersion, modes, commutators and propagators."};
    app.require_subcommand(1);
    app.footer("Exit status: 0 ok, 1 invariant failure, 2 usage or config error.");

    std::string config_path, out, format;
    double tol = 0.0, kmax = 0.0;
    int threads = 0, n = 0, nodes = 0;
    struct Flags {
        CLI::Option *config, *out, *format, *tol, *threads, *kmax = nullptr, *n = nullptr, *nodes = nullptr;
    };
    std::map<std::string, Flags> flags;

    const auto sub = [&](const std::string& name, const std::string& desc, const std::string& footer) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->footer(footer);
        Flags f{};
        f.config = s->add_option("--config", config_path, "TOML run configuration; flags override its values");
        f.out = s->add_option("--out", out, "output file (default: standard output)");
        f.format = s->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
        f.tol = s->add_option("--tol", tol, "tolerance recorded with every row and used by the pass/fail checks")
                    ->check(CLI::PositiveNumber);
        f.threads = s->add_option("--threads", threads, "worker threads for momentum-space quadrature")
                        ->check(CLI::PositiveNumber);
        flags[name] = f;
        return s;
    };

    CLI::App* disp = sub("dispersion", "six dispersion branches along a ray of momenta",
                         columns_help(dispersion_columns) +
                             "\nRow i uses k = kmax * i / n * direction; lightcone_minus and resonance_lower are the "
                             "reflected k^0 at the same k.");
    flags["dispersion"].kmax = disp->add_option("--kmax", kmax, "largest |k| of the sweep")->check(CLI::PositiveNumber);
    flags["dispersion"].n = disp->add_option("--n", n, "number of momenta")->check(CLI::PositiveNumber);
    sub("kernel", "9x9 kernel determinant and null space on each branch at k", columns_help(kernel_columns));
    sub("modes", "mode multiplets, momenta and field-equation residuals at k", columns_help(modes_columns));
    sub("gram", "Gram bilinears and commutators of all mode pairs at k", columns_help(gram_columns));
    CLI::App* prop = sub("propagator", "smeared two-point function and commutator for one component",
                         columns_help(propagator_columns, false) +
                             "\nJSON keys: function, component, x, y, value_re, value_im, grid, est_error, tol.");
    CLI::App* caus = sub("causality", "spacelike versus timelike smeared commutators",
                         columns_help(causality_columns, false) +
                             "\nstatus is PASS or FAIL for spacelike rows and REF for timelike reference rows."
                             "\nJSON wraps the rows as entries beside pass, max_ratio, refined_max_ratio, threshold, note.");
    for (CLI::App* s : {prop, caus})
        flags[s->get_name()].nodes =
            s->add_option("--nodes", nodes, "quadrature nodes per axis before auto-refinement")->check(CLI::Range(4, 4096));
    sub("selfcheck", "invariant suite over all modules",
        "CSV columns, in order:\n  check, measured, tolerance, status\nFailures are also listed on standard error.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const Flags& f = flags.at(command);
    RunConfig c;
    try {
        if (f.config->count()) c = load(config_path);
        c.command = command;
        if (f.out->count()) c.out = out;
        if (f.format->count()) c.format = format;
        if (f.tol->count()) c.tol = tol;
        if (f.threads->count()) c.threads = threads;
        if (f.kmax && f.kmax->count()) c.kmax = kmax;
        if (f.n && f.n->count()) c.n = n;
        if (f.nodes && f.nodes->count()) c.nodes = nodes;
        validate(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << (f.config->count() ? config_path + ": " : "") << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (command == "dispersion") return run_dispersion(c);
        if (command == "kernel") return run_kernel(c);
        if (command == "modes") return run_modes(c);
        if (command == "gram") return run_gram(c);
        if (command == "propagator") return run_propagator(c);
        if (command == "causality") return run_causality(c);
        return run_selfcheck(c);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_invariant;
    }
}
