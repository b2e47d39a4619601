#include <doctest.h>

#include "blowup/odeint.hpp"

#include <cmath>
#include <numbers>

using namespace blowup;

namespace {

IvpSystem decay() {
    return {1, [](double, const State& y, State& d) { d[0] = -y[0]; }};
}

IvpSystem harmonic() {
    return {2, [](double, const State& y, State& d) {
                d[0] = y[1];
                d[1] = -y[0];
            }};
}

IvpSystem fourth() {
    return {4, [](double, const State& y, State& d) {
                d[0] = y[1];
                d[1] = y[2];
                d[2] = y[3];
                d[3] = y[0];
            }};
}

} // namespace

TEST_CASE("linear decay") {
    const auto tr = integrate(decay(), {1.0}, 0, 1, 1e-10, 1e-12);
    CHECK(tr.status == IvpStatus::completed);
    CHECK(std::abs(tr.back()[0] - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("harmonic oscillator returns") {
    const double T = 2 * std::numbers::pi;
    const auto tr = integrate(harmonic(), {1.0, 0.0}, 0, T, 1e-10, 1e-12);
    CHECK(std::abs(tr.back()[0] - 1.0) < 1e-6);
    CHECK(std::abs(tr.back()[1]) < 1e-6);
}

TEST_CASE("fourth order exponential") {
    const auto tr = integrate(fourth(), {1, 1, 1, 1}, 0, 3, 1e-10, 1e-12);
    for (std::size_t k = 0; k < tr.times().size(); ++k) {
        const double t = tr.times()[k];
        CHECK(std::abs(tr.states()[k][0] - std::exp(t)) <= 1e-8 * std::exp(t));
    }
}

TEST_CASE("tightening tolerances does not increase error") {
    double prev = 1e300;
    for (double tol : {1e-6, 1e-7, 1e-8, 1e-9, 1e-10}) {
        const auto tr = integrate(harmonic(), {1.0, 0.0}, 0, 10, tol, tol);
        const double err = std::hypot(tr.back()[0] - std::cos(10.0), tr.back()[1] + std::sin(10.0));
        CHECK(err <= prev * 1.0000001);
        prev = err;
    }
}

TEST_CASE("dense output between steps") {
    const double tol = 1e-9;
    const auto tr = integrate(harmonic(), {1.0, 0.0}, 0, 20, tol, tol);
    double worst = 0;
    for (int k = 0; k <= 2000; ++k) {
        const double t = 20.0 * k / 2000;
        worst = std::max(worst, std::abs(tr(t)[0] - std::cos(t)));
    }
    const double endpoint = std::abs(tr.back()[0] - std::cos(20.0));
    CHECK(worst <= 10 * std::max(endpoint, tol));
}

TEST_CASE("events") {
    const auto tr = integrate(harmonic(), {std::sin(0.1), std::cos(0.1)}, 0.1, 0.1 + 2 * std::numbers::pi, 1e-10, 1e-12);
    const auto ev = detect_events(tr, [](double, const State& y) { return y[0]; });
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].t == doctest::Approx(std::numbers::pi).epsilon(1e-9));
    CHECK(ev[1].t == doctest::Approx(2 * std::numbers::pi).epsilon(1e-9));
    CHECK(std::abs(ev[0].state[0]) <= 1e-12);
    const auto none = detect_events(tr, [](double, const State& y) { return 2.0 + y[0]; });
    CHECK(none.empty());
}

TEST_CASE("terminal event stops integration") {
    IntegrateOptions o;
    o.stop_event = [](double, const State& y) { return y[0]; };
    o.stop_direction = -1;
    const auto tr = integrate(harmonic(), {1.0, 0.0}, 0, 10, 1e-10, 1e-12, o);
    CHECK(tr.status == IvpStatus::stopped_by_event);
    CHECK(tr.t_end() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));
}

TEST_CASE("blow-up reported") {
    IvpSystem sq{1, [](double, const State& y, State& d) { d[0] = y[0] * y[0]; }};
    const auto tr = integrate(sq, {1.0}, 0, 2, 1e-8, 1e-10);
    CHECK(tr.status != IvpStatus::completed);
    CHECK(tr.t_end() < 1.0 + 1e-6);
}

TEST_CASE("periodic orbit of the harmonic oscillator") {
    PeriodicOptions o;
    o.transient = 1.0;
    const auto orb = find_periodic(harmonic(), {1.0, 0.0}, [](double, const State& y) { return y[0]; }, o);
    REQUIRE(orb.converged());
    CHECK(std::abs(orb.period - 2 * std::numbers::pi) < 1e-6);
    const auto back = integrate(harmonic(), orb.anchor, 0, orb.period, 1e-12, 1e-14);
    CHECK(std::abs(back.back()[0] - orb.anchor[0]) < 1e-6);
    CHECK(std::abs(back.back()[1] - orb.anchor[1]) < 1e-6);
}

TEST_CASE("damped system ends at equilibrium") {
    IvpSystem damped{2, [](double, const State& y, State& d) {
                         d[0] = y[1];
                         d[1] = -y[0] - 3.0 * y[1];
                     }};
    PeriodicOptions o;
    o.transient = 50;
    o.max_return_time = 100;
    const auto orb = find_periodic(damped, {1.0, 0.0}, [](double, const State& y) { return y[0]; }, o);
    CHECK(orb.status == PeriodicOrbit::Status::equilibrium);
}
