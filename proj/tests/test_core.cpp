#include <doctest.h>

#include "blowup/core.hpp"

#include <cmath>
#include <stdexcept>

using namespace blowup;

TEST_CASE("beta values") {
    CHECK(beta(1, 2) == 0.0);
    CHECK(beta(1, 3) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(beta(1, 1.5) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK_THROWS_AS(beta(0, 2), std::domain_error);
    CHECK_THROWS_AS(beta(-1, 2), std::domain_error);
    CHECK_THROWS_AS(beta(1, 1), std::domain_error);
}

TEST_CASE("equilibria") {
    auto e = equilibria(1, 2);
    CHECK(e.f_star == 1.0);
    CHECK(e.F_star == 1.0);
    e = equilibria(1, 3);
    CHECK(e.f_star == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(e.F_star == doctest::Approx(0.5).epsilon(1e-14));
    const double f_near = equilibria(0.5, 1.1).f_star;
    const double f_nearer = equilibria(0.5, 1.01).f_star;
    CHECK(f_near > 1e9);
    CHECK(f_nearer > f_near * 1e10);
    for (double n : {0.1, 0.5, 1.0, 3.0})
        for (double p : {1.2, 1.7, 2.0, 3.5, 6.0}) {
            const auto q = equilibria(n, p);
            CHECK(std::pow(q.f_star, p - 1) * (p - 1) == doctest::Approx(1.0).epsilon(1e-14));
        }
}

TEST_CASE("regime classification") {
    CHECK(classify_regime(1, 2) == Regime::S);
    CHECK(classify_regime(1, 2.25) == Regime::LS);
    CHECK(classify_regime(1, 1.7) == Regime::HS);
    CHECK(classify_regime(1, 2 + 1e-13) == Regime::S);
    CHECK(classify_regime(1, 2 + 1e-9) == Regime::LS);
    for (double n : {0.01, 0.5, 1.0, 2.0, 10.0})
        for (double p : {1.05, 1.5, 2.0, 3.0, 11.0, n + 1}) {
            const ProblemParams q(n, p);
            const double b = q.beta();
            switch (q.regime()) {
            case Regime::S: CHECK(b == 0.0); break;
            case Regime::LS: CHECK(b > 0.0); break;
            case Regime::HS: CHECK(b < 0.0); break;
            }
            CHECK(q.alpha() > 0.0);
            CHECK(q.alpha() < 1.0);
            CHECK(q.nu_var() > 1.0);
            CHECK(q.nu_var() < 2.0);
        }
}

TEST_CASE("alpha increases towards one") {
    double prev = 0;
    for (double n : {0.01, 0.1, 1.0, 10.0, 1000.0}) {
        const double a = ProblemParams(n, 1.5).alpha();
        CHECK(a > prev);
        prev = a;
    }
    CHECK(ProblemParams(1e9, 2).alpha() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mesh validation") {
    CHECK_NOTHROW(Mesh::uniform(0, 1, 5).validate());
    CHECK_THROWS(Mesh({0, 1, 2, 3}).validate());
    CHECK_THROWS(Mesh({0, 1, 1, 2, 3}).validate());
    Mesh m = Mesh::uniform(0, 1, 30, 20);
    CHECK_THROWS(m.validate());
}

TEST_CASE("multiindex text form") {
    const auto m = MultiIndex::parse("{+2,2,+2}");
    REQUIRE(m.entries.size() == 3);
    CHECK(m.entries[1].kind == MultiIndex::Kind::zero);
    CHECK(m.str() == "{+2,2,+2}");
    CHECK(m.negated().str() == "{-2,2,-2}");
    CHECK(MultiIndex::parse("{-2,1,+2}").str() == "{-2,1,+2}");
}
