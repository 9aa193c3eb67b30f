#include "hopfield/model.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace hopfield;
using testing_support::Rng;

TEST_CASE("bar_omega_examples") {
    ModelParams p;
    CHECK(derive_constants(p.with_coupling(0.0)).bar_omega == 1.0);
    CHECK(derive_constants(p).bar_omega == Catch::Approx(1.060973).epsilon(1e-6));
    p.omega0 = 2.0;
    CHECK(derive_constants(p).bar_omega == Catch::Approx(2.0 * std::sqrt(1.0 + 4.0 * pi * 0.01)).epsilon(1e-14));
    CHECK(derive_constants(p).bar_omega == Catch::Approx(2.121946).epsilon(1e-6));
    CHECK(derive_constants(ModelParams{}).coupling == Catch::Approx(0.01));
}

TEST_CASE("bar_omega_monotone_in_coupling") {
    Rng rng(21);
    for (int n = 0; n < 100; ++n) {
        ModelParams p = rng.params(false);
        double prev = derive_constants(p.with_coupling(0.0)).bar_omega;
        CHECK(prev == p.omega0);
        for (double g = 0.01; g < 1.0; g += 0.05) {
            const double b = derive_constants(p.with_coupling(g)).bar_omega;
            CHECK(b > prev);
            CHECK(b > p.omega0);
            prev = b;
        }
    }
}

TEST_CASE("params_validation") {
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    p.omega0 = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = ModelParams{};
    p.chi = -1.0;
    CHECK_THROWS_AS(derive_constants(p), DomainError);
    CHECK_THROWS_AS(ModelParams{}.with_coupling(-0.1).validate(), DomainError);
    CHECK_THROWS_AS(ModelParams{}.with_gauge(0.0).validate(), DomainError);
    CHECK_NOTHROW(ModelParams{}.with_gauge(-2.0).validate());
}

namespace {

// Quadratic-formula oracle in long double.
std::pair<long double, long double> quadratic_roots(long double m1, long double m2, long double lam) {
    const long double b = -(m1 * m1 + m2 * m2), c = m1 * m1 * m2 * m2 - lam * lam * lam * lam;
    const long double d = std::sqrt(b * b - 4 * c);
    return {(-b + d) / 2, (-b - d) / 2};
}

}  // namespace

TEST_CASE("coupled_scalar_examples") {
    const auto a = coupled_scalar_spectrum(1.0, 1.0, 0.0);
    CHECK(a.ksq_plus == Catch::Approx(1.0));
    CHECK(a.ksq_minus == Catch::Approx(1.0));
    CHECK_FALSE(a.tachyonic);

    const auto b = coupled_scalar_spectrum(1.0, 0.0, 0.5);
    const auto [bp, bm] = quadratic_roots(1.0L, 0.0L, 0.5L);
    CHECK(b.ksq_plus == Catch::Approx(double(bp)).epsilon(1e-14));
    CHECK(b.ksq_minus == Catch::Approx(double(bm)).epsilon(1e-12));
    CHECK(b.ksq_minus < 0.0);
    CHECK(b.tachyonic);

    const auto c = coupled_scalar_spectrum(2.0, 1.0, 1.2);
    CHECK_FALSE(c.tachyonic);
    CHECK(c.ksq_minus > 0.0);
    CHECK_THROWS_AS(coupled_scalar_spectrum(-1.0, 1.0, 0.1), DomainError);
}

TEST_CASE("coupled_scalar_random_roots") {
    Rng rng(22);
    for (int n = 0; n < 1000; ++n) {
        const double m1 = rng.uniform(0, 3), m2 = rng.uniform(0, 3), lam = rng.uniform(0, 3);
        const auto s = coupled_scalar_spectrum(m1, m2, lam);
        REQUIRE(std::isfinite(s.ksq_plus));
        REQUIRE(std::isfinite(s.ksq_minus));
        CHECK(s.tachyonic == (std::min(s.ksq_plus, s.ksq_minus) < 0.0));
        const auto [p, m] = quadratic_roots(m1, m2, lam);
        const double scale = m1 * m1 + m2 * m2 + lam * lam + 1e-12;
        CHECK(std::abs(s.ksq_plus - double(p)) <= 1e-12 * scale);
        CHECK(std::abs(s.ksq_minus - double(m)) <= 1e-12 * scale);
        if (std::abs(lam * lam - m1 * m2) > 1e-9 * scale) CHECK(s.tachyonic == (lam * lam > m1 * m2));
    }
}

TEST_CASE("massless_partner_always_tachyonic") {
    Rng rng(23);
    for (int n = 0; n < 1000; ++n) {
        const double m1 = rng.uniform(0, 5), lam = rng.uniform(1e-3, 3);
        CHECK(coupled_scalar_spectrum(m1, 0.0, lam).tachyonic);
        CHECK(coupled_scalar_spectrum(0.0, m1, lam).tachyonic);
    }
}
