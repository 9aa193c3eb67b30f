#pragma once

#include "model.hpp"

#include <toml.hpp>

#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace hopfield {

inline constexpr std::array<std::string_view, 7> command_names = {"dispersion", "kernel", "modes", "gram",
                                                                  "propagator", "causality", "selfcheck"};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what, std::optional<int> line = std::nullopt)
        : std::runtime_error(format(key, what, line)), key_(key), line_(line) {}
    const std::string& key() const { return key_; }
    std::optional<int> line() const { return line_; }

private:
    static std::string format(const std::string& key, const std::string& what, std::optional<int> line) {
        std::string s = line ? "line " + std::to_string(*line) + ": " : std::string();
        if (!key.empty()) s += "'" + key + "': ";
        return s + what;
    }
    std::string key_;
    std::optional<int> line_;
};

// Flat run configuration; every field maps to one top-level key of the same name.
struct RunConfig {
    std::string command = "selfcheck";
    double omega0 = 1.0;
    double chi = 1.0;
    double g = 0.1;
    double xi = 1.0;
    Vec3 velocity = Vec3::Zero();  // spatial part of the four-velocity

    // dispersion sweep along a ray
    double kmax = 2.0;
    int n = 64;
    Vec3 direction = Vec3::UnitX();
    // single momentum for kernel, modes, gram
    Vec3 k = Vec3(0.5, 0.0, 0.0);

    Vec3 packet_center = Vec3(9.0, -7.0, 6.0);
    double packet_width = 2.5;
    int nodes = 48;
    double radius_sigmas = 6.0;
    std::array<int, 2> component = {1, 9};
    FourVector x = FourVector::Zero();
    FourVector y = FourVector::Zero();
    std::vector<FourVector> separations;
    std::vector<std::array<int, 2>> components;
    double refine_factor = 1.5;

    double tol = 1e-3;
    int threads = 1;
    std::string format = "csv";
    std::string out;

    ModelParams params() const {
        ModelParams p;
        p.omega0 = omega0;
        p.chi = chi;
        p.g = g;
        p.xi = xi;
        p.v = MediumVelocity::from_spatial(velocity);
        return p;
    }

    bool operator==(const RunConfig& o) const {
        return command == o.command && omega0 == o.omega0 && chi == o.chi && g == o.g && xi == o.xi &&
               velocity == o.velocity && kmax == o.kmax && n == o.n && direction == o.direction && k == o.k &&
               packet_center == o.packet_center && packet_width == o.packet_width && nodes == o.nodes &&
               radius_sigmas == o.radius_sigmas && component == o.component && x == o.x && y == o.y &&
               separations == o.separations && components == o.components && refine_factor == o.refine_factor &&
               tol == o.tol && threads == o.threads && format == o.format && out == o.out;
    }
};

namespace detail {

inline int line_of(const toml::node& n) { return int(n.source().begin.line); }

inline double read_double(const toml::node& n, const std::string& key) {
    if (auto d = n.value_exact<double>()) return *d;
    if (auto i = n.value_exact<int64_t>()) return double(*i);
    throw ConfigError(key, "expected a number", line_of(n));
}

inline int read_int(const toml::node& n, const std::string& key) {
    if (auto i = n.value_exact<int64_t>()) {
        if (*i < std::numeric_limits<int>::min() || *i > std::numeric_limits<int>::max())
            throw ConfigError(key, "integer out of range", line_of(n));
        return int(*i);
    }
    throw ConfigError(key, "expected an integer", line_of(n));
}

inline std::string read_string(const toml::node& n, const std::string& key) {
    if (auto s = n.value_exact<std::string>()) return *s;
    throw ConfigError(key, "expected a string", line_of(n));
}

template <int N>
Eigen::Matrix<double, N, 1> read_vec(const toml::node& n, const std::string& key) {
    const toml::array* a = n.as_array();
    if (!a || int(a->size()) != N)
        throw ConfigError(key, "expected an array of " + std::to_string(N) + " numbers", line_of(n));
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) out(i) = read_double((*a)[i], key);
    return out;
}

inline std::array<int, 2> read_pair(const toml::node& n, const std::string& key) {
    const toml::array* a = n.as_array();
    if (!a || a->size() != 2) throw ConfigError(key, "expected a pair [I, J]", line_of(n));
    std::array<int, 2> c{read_int((*a)[0], key), read_int((*a)[1], key)};
    for (int v : c)
        if (v < 1 || v > 9) throw ConfigError(key, "component indices run from 1 to 9", line_of(n));
    return c;
}

inline toml::array to_array(const auto& v) {
    toml::array a;
    for (int i = 0; i < int(v.size()); ++i) a.push_back(double(v(i)));
    return a;
}

}  // namespace detail

inline void validate(const RunConfig& c, const std::vector<std::pair<std::string, int>>& lines = {}) {
    const auto fail = [&](const std::string& key, const std::string& what) {
        std::optional<int> line;
        for (const auto& [k, l] : lines)
            if (k == key) line = l;
        throw ConfigError(key, what, line);
    };
    if (std::find(command_names.begin(), command_names.end(), c.command) == command_names.end())
        fail("command", "unknown command '" + c.command + "'");
    if (!(c.omega0 > 0.0)) fail("omega0", "must be positive");
    if (!(c.chi > 0.0)) fail("chi", "must be positive");
    if (!(c.g >= 0.0)) fail("g", "must be non-negative");
    if (!(c.xi != 0.0) || !std::isfinite(c.xi)) fail("xi", "must be finite and nonzero");
    if (!c.velocity.allFinite()) fail("velocity", "must be finite");
    if (!(c.kmax > 0.0)) fail("kmax", "must be positive");
    if (c.n < 1) fail("n", "must be at least 1");
    if (!(c.direction.norm() > 0.0)) fail("direction", "must be a nonzero vector");
    if (!c.k.allFinite()) fail("k", "must be finite");
    if (!(c.packet_width > 0.0)) fail("packet_width", "must be positive");
    if (c.nodes < 4) fail("nodes", "must be at least 4");
    if (!(c.radius_sigmas > 0.0)) fail("radius_sigmas", "must be positive");
    if (!(c.refine_factor > 1.0)) fail("refine_factor", "must exceed 1");
    if (!(c.tol > 0.0)) fail("tol", "must be positive");
    if (c.threads < 1) fail("threads", "must be at least 1");
    if (c.format != "csv" && c.format != "json") fail("format", "must be \"csv\" or \"json\"");
}

inline RunConfig parse_config(std::string_view text, std::string_view source = "config") {
    toml::table t;
    try {
        t = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        throw ConfigError("", std::string(e.description()), int(e.source().begin.line));
    }
    RunConfig c;
    std::vector<std::pair<std::string, int>> lines;
    for (const auto& [key_node, node] : t) {
        const std::string key(key_node.str());
        lines.emplace_back(key, detail::line_of(node));
        if (key == "command") c.command = detail::read_string(node, key);
        else if (key == "omega0") c.omega0 = detail::read_double(node, key);
        else if (key == "chi") c.chi = detail::read_double(node, key);
        else if (key == "g") c.g = detail::read_double(node, key);
        else if (key == "xi") c.xi = detail::read_double(node, key);
        else if (key == "velocity") c.velocity = detail::read_vec<3>(node, key);
        else if (key == "kmax") c.kmax = detail::read_double(node, key);
        else if (key == "n") c.n = detail::read_int(node, key);
        else if (key == "direction") c.direction = detail::read_vec<3>(node, key);
        else if (key == "k") c.k = detail::read_vec<3>(node, key);
        else if (key == "packet_center") c.packet_center = detail::read_vec<3>(node, key);
        else if (key == "packet_width") c.packet_width = detail::read_double(node, key);
        else if (key == "nodes") c.nodes = detail::read_int(node, key);
        else if (key == "radius_sigmas") c.radius_sigmas = detail::read_double(node, key);
        else if (key == "component") c.component = detail::read_pair(node, key);
        else if (key == "x") c.x = detail::read_vec<4>(node, key);
        else if (key == "y") c.y = detail::read_vec<4>(node, key);
        else if (key == "refine_factor") c.refine_factor = detail::read_double(node, key);
        else if (key == "tol") c.tol = detail::read_double(node, key);
        else if (key == "threads") c.threads = detail::read_int(node, key);
        else if (key == "format") c.format = detail::read_string(node, key);
        else if (key == "out") c.out = detail::read_string(node, key);
        else if (key == "separations" || key == "components") {
            const toml::array* a = node.as_array();
            if (!a) throw ConfigError(key, "expected an array", detail::line_of(node));
            if (key == "separations") {
                c.separations.clear();
                for (const auto& e : *a) c.separations.push_back(detail::read_vec<4>(e, key));
            } else {
                c.components.clear();
                for (const auto& e : *a) c.components.push_back(detail::read_pair(e, key));
            }
        } else
            throw ConfigError(key, "unknown key", detail::line_of(node));
    }
    validate(c, lines);
    return c;
}

inline std::string emit_config(const RunConfig& c) {
    toml::table t;
    t.insert("command", c.command);
    t.insert("omega0", c.omega0);
    t.insert("chi", c.chi);
    t.insert("g", c.g);
    t.insert("xi", c.xi);
    t.insert("velocity", detail::to_array(c.velocity));
    t.insert("kmax", c.kmax);
    t.insert("n", int64_t(c.n));
    t.insert("direction", detail::to_array(c.direction));
    t.insert("k", detail::to_array(c.k));
    t.insert("packet_center", detail::to_array(c.packet_center));
    t.insert("packet_width", c.packet_width);
    t.insert("nodes", int64_t(c.nodes));
    t.insert("radius_sigmas", c.radius_sigmas);
    t.insert("component", toml::array{int64_t(c.component[0]), int64_t(c.component[1])});
    t.insert("x", detail::to_array(c.x));
    t.insert("y", detail::to_array(c.y));
    toml::array seps;
    for (const auto& s : c.separations) seps.push_back(detail::to_array(s));
    t.insert("separations", std::move(seps));
    toml::array comps;
    for (const auto& p : c.components) comps.push_back(toml::array{int64_t(p[0]), int64_t(p[1])});
    t.insert("components", std::move(comps));
    t.insert("refine_factor", c.refine_factor);
    t.insert("tol", c.tol);
    t.insert("threads", int64_t(c.threads));
    t.insert("format", c.format);
    t.insert("out", c.out);
    std::ostringstream os;
    os << t << '\n';
    return os.str();
}

}  // namespace hopfield
