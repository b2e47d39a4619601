#include <doctest.h>

#include "blowup/continuation.hpp"

#include <cmath>
#include <stdexcept>

using namespace blowup;

namespace {

ProfileSolution seed(double n, double p, double tol = 1e-6) {
    auto spec = default_spec(n, p);
    spec.eps = tol;
    ProfileSolveOptions o;
    o.tol = tol;
    return solve_profile(spec, cap_guess(spec), o);
}

const ProfileSolution& f0_at_2() {
    static const ProfileSolution s = seed(1, 2);
    return s;
}

} // namespace

TEST_CASE("bifurcation points") {
    const auto pts = bifurcation_points(1, 8);
    REQUIRE(pts.size() == 4);
    const double expect[] = {1.2, 4.0 / 3, 10.0 / 7, 1.5};
    for (int i = 0; i < 4; ++i) {
        CHECK(pts[static_cast<std::size_t>(i)].first == 5 + i);
        CHECK(pts[static_cast<std::size_t>(i)].second == doctest::Approx(expect[i]).epsilon(1e-14));
    }
    // l = 4/n itself is excluded
    CHECK(bifurcation_points(0.5, 8).empty());
    CHECK(bifurcation_points(0.5, 9).size() == 1);
    CHECK_THROWS(bifurcation_points(0, 8));

    const auto mu = mu_points(8);
    REQUIRE(mu.size() == 4);
    CHECK(mu[0] == 0.5);
    CHECK(mu[3] == 0.125);
    CHECK_THROWS(mu_points(1));
    for (double p : {2.1, 3.0, 5.9}) CHECK(ProblemParams(1, p).beta() < 0.25);
}

TEST_CASE("form rescaling") {
    const auto& s = f0_at_2();
    REQUIRE(s.converged());
    // C = a = 1 at n = 1, p = 2
    const auto g = rescale_form(s, Form::general);
    CHECK(g.spec.form == Form::general);
    for (std::size_t i = 0; i < s.F.size(); i += 97) CHECK(g.F[i] == doctest::Approx(s.F[i]).epsilon(1e-14));
    CHECK(g.residual <= 10 * std::max(s.residual, s.tol));

    const auto h = seed(0.5, 1.5);
    REQUIRE(h.converged());
    const auto gen = rescale_form(h, Form::general);
    const auto sc = form_scaling(0.5, 1.5);
    CHECK(gen.F_at_origin() == doctest::Approx(sc.C * h.F_at_origin()).epsilon(1e-12));
    CHECK(gen.mesh.back() == doctest::Approx(sc.a * h.mesh.back()).epsilon(1e-12));
    CHECK(gen.residual <= 10 * std::max(h.residual, h.tol));
    const auto back = rescale_form(gen, Form::normalized);
    for (std::size_t i = 0; i < h.F.size(); i += 53) CHECK(back.F[i] == doctest::Approx(h.F[i]).epsilon(1e-12));
    CHECK(back.spec.eps == doctest::Approx(h.spec.eps).epsilon(1e-14));
    CHECK_THROWS(rescale_form(h, Form::S));

    const auto ls = seed(1, 2.5);
    REQUIRE(ls.converged());
    const auto sl = form_scaling(1, 2.5);
    CHECK(std::pow(sl.a, 4) == doctest::Approx(1.5 * std::sqrt(sl.C)).epsilon(1e-14));
    const auto nrm = rescale_form(ls, Form::normalized);
    const auto rt = rescale_form(nrm, Form::general);
    for (std::size_t i = 0; i < ls.F.size(); i += 41) CHECK(rt.F[i] == doctest::Approx(ls.F[i]).epsilon(1e-10));
    CHECK(nrm.residual <= 10 * std::max(ls.residual, ls.tol));
}

TEST_CASE("jump detection") {
    const auto& s = f0_at_2();
    BranchPoint bp;
    bp.solution = s;
    bp.sigma = *s.sigma;
    CHECK_FALSE(detect_jump(bp, s));
    CHECK(relative_distance(s, s) == 0.0);

    auto flipped = s;
    for (auto* v : {&flipped.F, &flipped.dF, &flipped.d2F, &flipped.d3F})
        for (double& x : *v) x = -x;
    flipped.sigma.reset();
    CHECK(detect_jump(bp, flipped));

    auto scaled = s;
    for (double& x : scaled.F) x *= 1.5;
    scaled.sigma = s.sigma;
    CHECK(relative_distance(scaled, s) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(detect_jump(bp, scaled));
    CHECK_FALSE(detect_jump(bp, scaled, 0.6));
}

TEST_CASE("degenerate range") {
    const auto& s = f0_at_2();
    int calls = 0;
    ContinuationOptions o;
    o.checkpoint = [&](const Branch&) { ++calls; };
    const auto br = continue_branch(s, ContinuationParam::p, 2.0, o);
    CHECK(br.points.size() == 1);
    CHECK(br.reason == Termination::completed);
    CHECK(calls == 1);
    CHECK_THROWS(continue_branch(ProfileSolution{}, ContinuationParam::p, 1.9, o));
}

TEST_CASE("p-branch across the variational point") {
    const auto start = seed(1, 2.06);
    REQUIRE(start.converged());
    ContinuationOptions o;
    o.dp0 = 0.02;
    std::size_t seen = 0;
    o.checkpoint = [&](const Branch& b) { seen = b.points.size(); };
    auto br = continue_branch(start, ContinuationParam::p, 1.96, o);
    REQUIRE(br.reason == Termination::completed);
    CHECK(seen == br.points.size());
    CHECK(br.points.back().param == doctest::Approx(1.96).epsilon(1e-14));

    bool hit = false;
    for (std::size_t i = 1; i < br.points.size(); ++i) {
        const auto& a = br.points[i - 1];
        const auto& b = br.points[i];
        CHECK(b.param < a.param);
        CHECK(b.F0 > a.F0);
        CHECK(b.sigma.str() == "{+2}");
        if (b.param == 2.0) hit = true;
    }
    CHECK(hit);
    // the solve at p = 2 reproduces the S-form profile
    for (const auto& b : br.points)
        if (b.param == 2.0) CHECK(b.F0 == doctest::Approx(f0_at_2().F_at_origin()).epsilon(1e-5));

    // resume continues from the last accepted point, then return to the start
    resume_branch(br, 1.94, o);
    CHECK(br.reason == Termination::completed);
    CHECK(br.points.back().param == doctest::Approx(1.94).epsilon(1e-14));
    auto back = continue_branch(br.points.back().solution, ContinuationParam::p, 2.06, o);
    REQUIRE(back.reason == Termination::completed);
    CHECK(back.points.back().F0 == doctest::Approx(start.F_at_origin()).epsilon(1e-3));
}

TEST_CASE("mu-branch") {
    const auto s = seed(1, 3);
    REQUIRE(s.converged());
    ContinuationOptions o;
    o.dp0 = 0.01;
    const auto br = continue_branch(s, ContinuationParam::mu, 0.15, o);
    REQUIRE(br.reason == Termination::completed);
    CHECK(br.points.front().param == doctest::Approx(0.125));
    CHECK(br.points.back().param == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(br.points.back().solution.spec.drift.value() == doctest::Approx(0.15).epsilon(1e-14));
}

TEST_CASE("parameter names") {
    CHECK(to_string(ContinuationParam::mu) == "mu");
    CHECK(continuation_param_from_string("p") == ContinuationParam::p);
    CHECK_THROWS_AS(continuation_param_from_string("eps"), std::invalid_argument);
    CHECK(to_string(Termination::jump_detected) == "jump_detected");
}
