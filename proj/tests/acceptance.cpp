// Acceptance run: one PASS/FAIL line per criterion. Arguments select criteria by number.

#include "blowup/archive.hpp"
#include "blowup/continuation.hpp"
#include "blowup/oscillatory.hpp"
#include "blowup/profiles.hpp"
#include "blowup/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace blowup;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
    }
};

std::string num(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ProfileSolution solve_at(double n, double p, double tol, double eps, double R = 0) {
    auto spec = default_spec(n, p);
    spec.eps = eps;
    if (R > 0) spec.R = R;
    ProfileSolveOptions o;
    o.tol = tol;
    return solve_profile(spec, cap_guess(spec), o);
}

const ProfileSolution& f0_at(double tol) {
    static std::vector<std::pair<double, ProfileSolution>> cache;
    for (const auto& [t, s] : cache)
        if (t == tol) return s;
    cache.emplace_back(tol, solve_at(1, 2, tol, tol));
    return cache.back().second;
}

// Two-hump seed at (n, p) glued from the single-hump profile with copies at +-s.
ProfileSolution glued(const ProfileSolution& base, int left_sign, double s, Symmetry sym, double tol) {
    auto sp = base.spec;
    sp.symmetry = sym;
    sp.R = base.spec.R + s;
    sp.eps = tol;
    ProfileSolveOptions o;
    o.tol = tol;
    o.initial_nodes = 2001;
    return solve_profile(sp, glue_guess({{left_sign, -s}, {1, s}}, base), o);
}

void spectral_oracle(Verdict& v) {
    const SpectralBasis b;
    const double mass = kernel_mass(b);
    v.check(std::abs(mass - 1) <= 1e-8, "|mass-1|=" + num(std::abs(mass - 1), 3));
    const auto G = biorthogonality(b, 6);
    const double g = (G - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff();
    v.check(g <= 1e-6, "max|G-I|=" + num(g, 3));
    double worst = 0;
    for (int l = 0; l <= 8; ++l) {
        const auto p = adjoint_poly(l);
        const auto q = apply_adjoint(p);
        double scale = 0;
        for (double c : p) scale = std::max(scale, std::abs(c));
        for (std::size_t m = 0; m < p.size(); ++m) worst = std::max(worst, std::abs(q[m] + 0.25 * l * p[m]) / scale);
    }
    v.check(worst <= 1e-14, "adjoint identity defect=" + num(worst, 3));
}

void oscillatory_component(Verdict& v) {
    const std::array<std::array<double, 3>, 3> starts{{{1, 0, 0}, {0.3, -0.5, 0.8}, {-2, 1, 0}}};
    for (double n : {0.75, 1.0, 2.0, std::numeric_limits<double>::infinity()}) {
        std::vector<OscComponent> orbits;
        std::string why;
        for (const auto& s : starts) {
            OscOptions o;
            o.start = s;
            try {
                orbits.push_back(oscillatory_orbit(n, o));
            } catch (const std::exception& e) {
                why = e.what();
            }
        }
        if (orbits.size() != starts.size()) {
            v.check(false, "n=" + num(n) + " no orbit: " + why);
            continue;
        }
        double dist = 0, res = 0;
        for (std::size_t i = 0; i < orbits.size(); ++i) {
            res = std::max(res, orbits[i].residual / orbits[i].amplitude);
            for (std::size_t j = i + 1; j < orbits.size(); ++j) dist = std::max(dist, orbit_distance(orbits[i], orbits[j]));
        }
        v.check(dist <= 1e-6 && res <= 1e-6,
                "n=" + num(n) + " T=" + num(orbits[0].period) + " dist=" + num(dist, 2) + " res=" + num(res, 2));
    }
}

void nonoscillatory_spectrum(Verdict& v) {
    const auto cs = char_spectrum(6);
    std::vector<std::complex<double>> want{{-1, 0}, {-7, std::sqrt(11.0)}, {-7, -std::sqrt(11.0)}};
    double worst = 0;
    for (const auto& w : want) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : cs.roots) best = std::min(best, std::abs(r - w));
        worst = std::max(worst, best);
    }
    v.check(worst <= 1e-10, "mu=6 root error=" + num(worst, 3));
    for (double mu : {4.0, 6.0, 8.0, 12.0}) {
        const auto c = char_spectrum(mu);
        double re = -std::numeric_limits<double>::infinity();
        for (const auto& r : c.roots) re = std::max(re, r.real());
        v.check(re < 0, "mu=" + num(mu) + " max Re=" + num(re, 4));
    }
}

void s_regime_numbers(Verdict& v) {
    const auto& fine = f0_at(1e-10);
    if (!fine.converged()) return v.check(false, "eps=1e-10 solve: " + fine.diagnostic);
    const auto ie = interface_estimate(fine);
    v.check(std::abs(ie.y0 - 12) <= 1, "y0=" + num(ie.y0, 5));
    const auto coarse = solve_at(1, 2, 1e-3, 1e-3);
    const int zc = coarse.converged() ? coarse.zero_count.value_or(0) : -1;
    v.check(ie.zero_count >= 4, "zeros(1e-10)=" + std::to_string(ie.zero_count));
    v.check(zc >= 0 && zc < ie.zero_count, "zeros(1e-3)=" + std::to_string(zc));
    v.check(std::abs(ie.fitted_slope - 8) <= 1, "lobe slope=" + num(ie.fitted_slope, 4));
}

void periodic_orbit(Verdict& v) {
    const auto o = periodic_spatial(1.0);
    v.check(std::abs(o.max_value - 1.535) <= 0.02,
            "F''(0)=" + num(o.F2_origin, 10) + " max=" + num(o.max_value, 6) + " period=" + num(o.period, 6));
}

void small_n(Verdict& v) {
    const auto s = solve_at(0.01, 0.01 + 1.0, 1e-6, 1e-6);
    if (!s.converged()) v.check(false, "n=0.01: " + s.diagnostic);
    else v.check(std::abs(s.F_at_origin() / 1.435 - 1) <= 0.05, "F0(0) at n=0.01=" + num(s.F_at_origin(), 5));

    // Wide domains and a small regularization so the tail stays resolved beyond the interface.
    struct Run {
        double n, eps, R;
    };
    std::vector<double> ns, y0s;
    for (const Run r : {Run{0.1, 1e-10, 150}, Run{0.05, 1e-12, 300}, Run{0.02, 1e-14, 800}}) {
        const auto sol = solve_at(r.n, r.n + 1, 1e-8, r.eps, r.R);
        if (!sol.converged()) {
            v.check(false, "n=" + num(r.n) + ": " + sol.diagnostic);
            return;
        }
        ns.push_back(r.n);
        y0s.push_back(interface_estimate(sol).y0);
    }
    const double k = slope_fit(ns, y0s);
    v.check(std::abs(k + 0.75) <= 0.15, "y0=(" + num(y0s[0], 4) + ", " + num(y0s[1], 4) + ", " + num(y0s[2], 4) +
                                            ") slope=" + num(k, 4));
}

// Compactly supported C^3 bump a*(1 - ((y-c)/w)^2)^4 and its second derivative.
struct Bump {
    double a, c, w;
    double v(double y) const {
        const double s = (y - c) / w;
        return std::abs(s) >= 1 ? 0.0 : a * std::pow(1 - s * s, 4);
    }
    double d2(double y) const {
        const double s = (y - c) / w;
        if (std::abs(s) >= 1) return 0.0;
        const double u = 1 - s * s;
        return a * (-8 * std::pow(u, 3) + 48 * s * s * u * u) / (w * w);
    }
};

void criticality(Verdict& v) {
    const auto& f = f0_at(1e-10);
    if (!f.converged()) return v.check(false, "solve: " + f.diagnostic);
    const double R = f.mesh.back();
    const std::size_t N = 40001;
    std::vector<double> y(N), F(N), d2(N);
    for (std::size_t i = 0; i < N; ++i) {
        y[i] = -R + 2 * R * static_cast<double>(i) / (N - 1);
        const auto s = f.eval(y[i]);
        F[i] = s[0];
        d2[i] = s[2];
    }
    std::mt19937_64 rng(20261015);
    std::uniform_real_distribution<double> uc(-0.8 * R, 0.8 * R), uw(1.0, 4.0), ua(-1.0, 1.0);
    const double h = 1e-7;
    double worst = 0;
    for (int k = 0; k < 10; ++k) {
        const Bump b{ua(rng), uc(rng), uw(rng)};
        std::vector<double> Fp(N), Fm(N), dp(N), dm(N);
        double vn = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double bv = b.v(y[i]), b2 = b.d2(y[i]);
            Fp[i] = F[i] + h * bv;
            Fm[i] = F[i] - h * bv;
            dp[i] = d2[i] + h * b2;
            dm[i] = d2[i] - h * b2;
            if (i + 1 < N) vn += bv * bv * (y[i + 1] - y[i]);
        }
        const double dE = (energy(y, Fp, dp, 1.0).E - energy(y, Fm, dm, 1.0).E) / (2 * h);
        worst = std::max(worst, std::abs(dE) / std::sqrt(vn));
    }
    v.check(worst <= 1e-4, "max |dE|/|v|=" + num(worst, 3));
}

void ls_regime(Verdict& v) {
    const auto s = solve_at(1, 3, 1e-10, 1e-10);
    if (!s.converged()) return v.check(false, "solve: " + s.diagnostic);
    const double mn = *std::min_element(s.F.begin(), s.F.end());
    v.check(mn > 0, "min F=" + num(mn, 4));
    const double k = tail_slope(s, s.spec.R / 2, s.spec.R);
    v.check(std::abs(k + 4) <= 0.2, "far-field slope=" + num(k, 5));
}

void continuation(Verdict& v) {
    const double tol = 1e-6;
    ContinuationOptions co;
    co.tol = tol;
    co.eps = tol;

    // p0-branch
    {
        const auto seed = solve_at(1, 2.5, tol, tol);
        if (!seed.converged()) {
            v.check(false, "p0 seed: " + seed.diagnostic);
        } else {
            const auto br = continue_branch(seed, ContinuationParam::p, 1.7, co);
            bool mono = true;
            for (std::size_t i = 1; i < br.points.size(); ++i) mono = mono && br.points[i].F0 > br.points[i - 1].F0;
            v.check(br.reason == Termination::completed && mono && std::abs(br.points.back().param - 1.7) < 1e-12,
                    "p0 branch " + to_string(br.reason) + " to p=" + num(br.points.back().param) +
                        (mono ? " monotone" : " not monotone"));
        }
    }

    // F_{+4} jump near p = 2
    {
        const auto seed = glued(f0_at(tol), 1, 3.0, Symmetry::even, tol);
        if (!seed.converged() || seed.sigma->str() != "{+4}") {
            v.check(false, "F+4 seed: " + (seed.converged() ? seed.sigma->str() : seed.diagnostic));
        } else {
            auto jo = co;
            jo.dp0 = jo.dp_max = 1e-3;
            std::string seen;
            bool hit = false;
            for (double target : {2.01, 1.99}) {
                const auto br = continue_branch(seed, ContinuationParam::p, target, jo);
                const auto& last = br.points.back();
                hit = hit || (br.reason == Termination::jump_detected && last.sigma.str() == "{+2,2,+2}" &&
                              std::abs(last.param - 2) <= 1e-2);
                seen += (seen.empty() ? "" : ", ") + std::string("to ") + num(target) + ": " + to_string(br.reason) +
                        " at p=" + num(last.param) + " " + last.sigma.str();
            }
            v.check(hit, "F+4 " + seen);
        }
    }

    // Splitting at n = 0.5
    {
        const double p = 1.5;
        const auto base = solve_at(0.5, p, tol, tol);
        const auto a = glued(base, 1, 3.0, Symmetry::even, tol);
        const auto b = glued(base, 1, 5.5, Symmetry::even, tol);
        if (!a.converged() || !b.converged()) {
            v.check(false, "n=0.5 seeds did not converge");
            return;
        }
        auto so = co;
        so.dp0 = 2e-3;
        so.dp_max = 1e-2;
        so.stop_on_jump = false;
        auto A = continue_branch(a, ContinuationParam::p, p, so);
        auto B = continue_branch(b, ContinuationParam::p, p, so);
        auto dist_at = [&](double t, Branch& X, Branch& Y) {
            resume_branch(X, t, so);
            resume_branch(Y, t, so);
            const bool ok = std::abs(X.points.back().param - t) < 1e-12 && std::abs(Y.points.back().param - t) < 1e-12;
            return ok ? relative_distance(X.points.back().solution, Y.points.back().solution)
                      : std::numeric_limits<double>::quiet_NaN();
        };
        std::string above, below;
        bool sep = true, merged = true;
        for (double t : {1.5, 1.495}) {
            auto X = A, Y = B;
            const double d = dist_at(t, X, Y);
            sep = sep && d > 0.05;
            above += " " + num(t) + ":" + num(d, 3);
        }
        for (double t : {1.49, 1.47, 1.45, 1.43}) {
            const double d = dist_at(t, A, B);
            if (t <= 1.45) merged = merged && d < 0.05;
            below += " " + num(t) + ":" + num(d, 3);
        }
        v.check(sep, "n=0.5 distance above 1.49" + above);
        v.check(merged, "n=0.5 distance below" + below);
    }
}

void gluing(Verdict& v) {
    const auto& f = f0_at(1e-10);
    if (!f.converged()) return v.check(false, "base: " + f.diagnostic);
    const std::regex even_re(R"(\{\+2,(\d+),\+2\})"), odd_re(R"(\{-2,(\d+),\+2\})");
    std::set<int> evens, odds;
    std::string found;
    for (int odd = 0; odd < 2; ++odd) {
        for (double s : odd ? std::vector<double>{2, 6} : std::vector<double>{2, 7}) {
            const auto sol = glued(f, odd ? -1 : 1, s, odd ? Symmetry::odd : Symmetry::even, 1e-8);
            const std::string sig = sol.converged() ? sol.sigma->str() : to_string(sol.status);
            found += " " + sig;
            std::smatch m;
            if (!sol.converged() || !std::regex_match(sig, m, odd ? odd_re : even_re)) continue;
            const int k = std::stoi(m[1]);
            if (odd && k % 2 == 1) odds.insert(k);
            if (!odd && k % 2 == 0) evens.insert(k);
        }
    }
    v.check(evens.size() >= 2 && odds.size() >= 2, "members" + found);
}

BvpProblem sine_problem(std::size_t nodes) {
    BvpProblem pb;
    pb.dimension = 2;
    pb.rhs = [](double, const Vec& y, Vec& f) {
        f.resize(2);
        f << y[1], -y[0];
    };
    pb.bc = [](const Vec& a, const Vec& b, Vec& r) {
        r.resize(2);
        r << a[0], b[0] - 1.0;
    };
    pb.mesh = Mesh::uniform(0, std::numbers::pi / 2, nodes);
    pb.guess = Mat::Zero(2, nodes);
    for (std::size_t i = 0; i < nodes; ++i) pb.guess(0, i) = pb.mesh.nodes[i] / (std::numbers::pi / 2);
    return pb;
}

void properties(Verdict& v) {
    std::vector<double> hs, errs;
    for (std::size_t n : {9, 17, 33, 65}) {
        BvpOptions o;
        o.rtol = o.atol = 1.0;
        o.max_refinements = 0;
        const auto sol = solve_bvp(sine_problem(n), o);
        double err = 0;
        for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(sol.states(0, i) - std::sin(sol.mesh.nodes[i])));
        hs.push_back(sol.mesh.nodes[1] - sol.mesh.nodes[0]);
        errs.push_back(err);
    }
    const double order = slope_fit(hs, errs);
    v.check(std::abs(order - 4) <= 0.3, "collocation order=" + num(order, 4));

    const auto& a = f0_at(1e-8);
    const auto& b = f0_at(1e-10);
    const double drift = std::abs(a.F_at_origin() - b.F_at_origin());
    v.check(a.converged() && b.converged() && drift < 1e-3, "F0(0) drift=" + num(drift, 3));

    const Provenance prov{"acceptance", 1e-8, 1e-8};
    const auto text = dump_profile(a, prov);
    const auto back = parse_profile(text);
    v.check(dump_profile(back.solution, back.provenance) == text, "archive round trip");

    const auto again = solve_at(1, 2, 1e-8, 1e-8);
    v.check(dump_profile(again, prov) == text, "repeat run identical");
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<double, std::function<void(Verdict&)>>> criteria{
        {10, spectral_oracle}, {60, oscillatory_component}, {1, nonoscillatory_spectrum}, {300, s_regime_numbers},
        {30, periodic_orbit},  {600, small_n},             {60, criticality},           {300, ls_regime},
        {1800, continuation},  {900, gluing},              {600, properties}};
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(id)) continue;
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(v);
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        v.check(dt < criteria[i].first, "time " + num(dt, 3) + " s");
        if (!v.pass) ++failed;
        std::printf("criterion %2d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
