#include "blowup/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace blowup {

namespace {

struct Crossing {
    double y;
    MultiIndex::Kind kind;
};

// Sample positions and values of F over the full symmetric domain.
void full_line(const ProfileSolution& sol, std::vector<double>& y, std::vector<double>& v) {
    const auto& x = sol.mesh.nodes;
    const double s = sol.spec.symmetry == Symmetry::even ? 1.0 : -1.0;
    y.clear();
    v.clear();
    for (std::size_t i = x.size(); i-- > 1;) {
        y.push_back(-x[i]);
        v.push_back(s * sol.F[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        y.push_back(x[i]);
        v.push_back(sol.F[i]);
    }
}

// Sign changes of v - level, located by linear interpolation.
std::vector<std::size_t> sign_changes(const std::vector<double>& v, double level, std::vector<double>* where,
                                      const std::vector<double>& y) {
    std::vector<std::size_t> idx;
    int last = 0;
    std::size_t last_i = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - level;
        const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (s == 0) continue;
        if (last != 0 && s != last) {
            idx.push_back(i);
            if (where) {
                const double d0 = v[last_i] - level;
                where->push_back(y[last_i] + (y[i] - y[last_i]) * d0 / (d0 - d));
            }
        }
        last = s;
        last_i = i;
    }
    return idx;
}

double lobe_max(const std::vector<double>& y, const std::vector<double>& v, double a, double b) {
    double m = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] > a && y[i] < b) m = std::max(m, std::abs(v[i]));
    return m;
}

template <class F>
double golden_min(F f, double a, double b, int iters = 200) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && (b - a) > 1e-12 * (1 + std::abs(b)); ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

struct LineFit {
    double slope, intercept, sse;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    const double slope = den != 0 ? (n * sxy - sx * sy) / den : 0.0;
    const double icpt = (sy - slope * sx) / n;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sse += std::pow(y[i] - slope * x[i] - icpt, 2);
    return {slope, icpt, sse};
}

} // namespace

MultiIndex classify(const ProfileSolution& sol, double tail_threshold) {
    if (!sol.converged()) throw std::invalid_argument("classify needs a converged solution");
    std::vector<double> y, v;
    full_line(sol, y, v);
    const double L = sol.spec.equilibrium();
    double sup = 0;
    for (double a : v) sup = std::max(sup, std::abs(a));

    std::vector<Crossing> ev;
    std::vector<double> pos;
    sign_changes(v, L, &pos, y);
    for (double p : pos) ev.push_back({p, MultiIndex::Kind::plus});
    pos.clear();
    sign_changes(v, -L, &pos, y);
    for (double p : pos) ev.push_back({p, MultiIndex::Kind::minus});
    double first_eq = std::numeric_limits<double>::infinity(), last_eq = -first_eq;
    for (const auto& e : ev) {
        first_eq = std::min(first_eq, e.y);
        last_eq = std::max(last_eq, e.y);
    }
    const bool have_eq = !ev.empty();

    std::vector<double> zeros;
    sign_changes(v, 0.0, &zeros, y);
    const double floor = tail_threshold * sup;
    for (std::size_t k = 0; k < zeros.size(); ++k) {
        const double z = zeros[k];
        if (have_eq && (z <= first_eq || z >= last_eq)) continue;
        const double left = lobe_max(y, v, k == 0 ? y.front() - 1 : zeros[k - 1], z);
        const double right = lobe_max(y, v, z, k + 1 == zeros.size() ? y.back() + 1 : zeros[k + 1]);
        if (left < floor || right < floor) continue;
        ev.push_back({z, MultiIndex::Kind::zero});
    }
    std::stable_sort(ev.begin(), ev.end(), [](const Crossing& a, const Crossing& b) { return a.y < b.y; });

    MultiIndex m;
    m.tail_threshold = tail_threshold;
    for (const auto& e : ev) {
        if (!m.entries.empty() && m.entries.back().kind == e.kind) ++m.entries.back().count;
        else m.entries.push_back({e.kind, 1});
    }
    return m;
}

InterfaceEstimate interface_estimate(const ProfileSolution& sol) {
    if (sol.spec.right_bc != RightBc::compact_support) throw std::invalid_argument("interface needs a compact-support run");
    const auto& x = sol.mesh.nodes;
    const auto& v = sol.F;
    const double L = sol.spec.equilibrium();
    const double n = sol.spec.params.n();
    const double mu = 4.0 * (n + 1.0) / n;

    std::vector<double> pos;
    double start = 0.0;
    sign_changes(v, L, &pos, x);
    sign_changes(v, -L, &pos, x);
    if (!pos.empty()) start = *std::max_element(pos.begin(), pos.end());

    std::vector<double> zr;
    sign_changes(v, 0.0, &zr, x);
    InterfaceEstimate ie;
    for (double z : zr)
        if (z > start) ie.zeros.push_back(z);
    if (ie.zeros.empty()) throw std::runtime_error("no decaying tail found");

    const double floor = sol.spec.eps;
    // Lobes past the first zero, in order, until one drops below the floor.
    for (std::size_t k = 0; k < ie.zeros.size(); ++k) {
        const double a = ie.zeros[k];
        const double b = k + 1 < ie.zeros.size() ? ie.zeros[k + 1] : x.back();
        double best = 0, where = a;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] > a && x[i] < b && std::abs(v[i]) > std::abs(best)) {
                best = v[i];
                where = x[i];
            }
        if (std::abs(best) <= floor) break;
        ie.lobes.emplace_back(where, best);
    }
    ie.zero_count = static_cast<int>(ie.lobes.size());
    if (ie.lobes.size() < 2) throw std::runtime_error("no decaying tail found");

    std::vector<double> yk, lk;
    for (const auto& [p, a] : ie.lobes) {
        yk.push_back(p);
        lk.push_back(std::log(std::abs(a)));
    }
    const double ylast = yk.back();
    const double span = std::max(ylast - yk.front(), 1e-3);
    auto fixed_sse = [&](double y0) {
        std::vector<double> lx(yk.size());
        for (std::size_t i = 0; i < yk.size(); ++i) lx[i] = std::log(y0 - yk[i]);
        double c = 0;
        for (std::size_t i = 0; i < yk.size(); ++i) c += lk[i] - mu * lx[i];
        c /= static_cast<double>(yk.size());
        double s = 0;
        for (std::size_t i = 0; i < yk.size(); ++i) s += std::pow(lk[i] - mu * lx[i] - c, 2);
        return s;
    };
    const double lo = ylast + 1e-9 * span, hi = ylast + 20 * span;
    ie.y0 = golden_min(fixed_sse, lo, hi);

    if (yk.size() >= 3) {
        auto free_sse = [&](double y0) {
            std::vector<double> lx(yk.size());
            for (std::size_t i = 0; i < yk.size(); ++i) lx[i] = std::log(y0 - yk[i]);
            return fit_line(lx, lk).sse;
        };
        ie.free_fit_y0 = golden_min(free_sse, lo, hi);
        std::vector<double> lx(yk.size());
        for (std::size_t i = 0; i < yk.size(); ++i) lx[i] = std::log(ie.free_fit_y0 - yk[i]);
        ie.fitted_slope = fit_line(lx, lk).slope;
    } else {
        ie.free_fit_y0 = ie.y0;
        ie.fitted_slope = mu;
    }
    return ie;
}

Energy energy(const ProfileSolution& sol, double n) {
    const double nu = (n + 2.0) / (n + 1.0);
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    double i2 = 0, i0 = 0, inu = 0;
    const auto& x = sol.mesh.nodes;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i], c = 0.5 * (x[i] + x[i + 1]);
        for (int k = 0; k < 4; ++k) {
            const auto s = sol.eval(c + 0.5 * h * gx[k]);
            const double w = 0.5 * h * gw[k];
            i2 += w * s[2] * s[2];
            i0 += w * s[0] * s[0];
            inu += w * std::pow(std::abs(s[0]), nu);
        }
    }
    i2 *= 2;
    i0 *= 2;
    inu *= 2;
    Energy e;
    e.E = -0.5 * i2 + 0.5 * i0 - inu / nu;
    e.H0 = -i2 + i0;
    if (e.H0 > 0) {
        e.fibering_defined = true;
        e.H_tilde = inu / std::pow(e.H0, 0.5 * nu);
        e.r0 = std::pow(e.H_tilde, 1.0 / (2.0 - nu));
    }
    return e;
}

Energy energy(const std::vector<double>& y, const std::vector<double>& F, const std::vector<double>& d2F, double n) {
    if (y.size() != F.size() || y.size() != d2F.size()) throw std::invalid_argument("array size mismatch");
    const double nu = (n + 2.0) / (n + 1.0);
    double i2 = 0, i0 = 0, inu = 0;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        const double h = y[i + 1] - y[i];
        i2 += 0.5 * h * (d2F[i] * d2F[i] + d2F[i + 1] * d2F[i + 1]);
        i0 += 0.5 * h * (F[i] * F[i] + F[i + 1] * F[i + 1]);
        inu += 0.5 * h * (std::pow(std::abs(F[i]), nu) + std::pow(std::abs(F[i + 1]), nu));
    }
    Energy e;
    e.E = -0.5 * i2 + 0.5 * i0 - inu / nu;
    e.H0 = -i2 + i0;
    if (e.H0 > 0) {
        e.fibering_defined = true;
        e.H_tilde = inu / std::pow(e.H0, 0.5 * nu);
        e.r0 = std::pow(e.H_tilde, 1.0 / (2.0 - nu));
    }
    return e;
}

FarField::FarField(double n, double p, double c0, double c1) : C0(c0), C1(c1) {
    if (classify_regime(n, p) != Regime::LS) throw std::domain_error("far field needs p > n+1");
    gamma = -4.0 / (p - (n + 1.0));
    nu = 4.0 * (p - 1.0) / (3.0 * (p - (n + 1.0)));
    b0 = std::cbrt(beta(n, p) * std::pow(std::abs(C0), -n) / (n + 1.0)) / nu;
}

double farfield_eval(const FarField& ff, double n, double p, double y) {
    if (classify_regime(n, p) != Regime::LS) throw std::domain_error("far field needs p > n+1");
    if (!(y > 0)) throw std::domain_error("far field is evaluated at positive y");
    return ff.C0 * std::pow(y, ff.gamma) + ff.C1 * std::exp(-ff.b0 * std::pow(y, ff.nu));
}

double final_time(const FarField& ff, double x) { return ff.C0 * std::pow(std::abs(x), ff.gamma); }

namespace {

// f = |F|^{-alpha}F in the original similarity variables.
double f_of(const ProfileSolution& sol, double F) {
    const auto& P = sol.spec.params;
    double Fg = F;
    if (sol.spec.form == Form::normalized) Fg = form_scaling(P.n(), P.p()).C * F;
    return std::copysign(std::pow(std::abs(Fg), 1.0 - P.alpha()), Fg);
}

double y_of(const ProfileSolution& sol, double y) {
    if (sol.spec.form == Form::normalized) return form_scaling(sol.spec.params.n(), sol.spec.params.p()).a * y;
    return y;
}

} // namespace

double tail_slope(const ProfileSolution& sol, double a, double b) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < sol.mesh.size(); ++i) {
        const double y = sol.mesh.nodes[i];
        if (y < a || y > b) continue;
        const double f = f_of(sol, sol.F[i]);
        if (!(f > 0)) throw std::runtime_error("tail is not positive");
        lx.push_back(std::log(y_of(sol, y)));
        ly.push_back(std::log(f));
    }
    if (lx.size() < 3) throw std::runtime_error("too few tail samples");
    return fit_line(lx, ly).slope;
}

double farfield_constant(const ProfileSolution& sol) {
    const auto& P = sol.spec.params;
    const double g = -4.0 / (P.p() - (P.n() + 1.0));
    const double R = sol.mesh.back();
    return f_of(sol, sol.F.back()) * std::pow(y_of(sol, R), -g);
}

ProfileGuess glue_guess(const std::vector<std::pair<int, double>>& components, const ProfileSolution& base,
                        std::size_t nodes) {
    if (components.empty()) throw std::invalid_argument("no components to glue");
    if (nodes < 5) throw std::invalid_argument("too few nodes");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const double R = base.mesh.back();
    for (const auto& [s, shift] : components) {
        if (s != 1 && s != -1) throw std::invalid_argument("component signs must be +1 or -1");
        lo = std::min(lo, shift - R);
        hi = std::max(hi, shift + R);
    }
    ProfileGuess g;
    g.y.resize(nodes);
    g.states = Mat::Zero(4, static_cast<Eigen::Index>(nodes));
    for (std::size_t i = 0; i < nodes; ++i) {
        const double y = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nodes - 1);
        g.y[i] = y;
        for (const auto& [s, shift] : components) {
            const double z = y - shift;
            if (std::abs(z) > R) continue;
            const auto st = base.eval(z);
            for (int j = 0; j < 4; ++j) g.states(j, static_cast<Eigen::Index>(i)) += s * st[j];
        }
    }
    return g;
}

SpatialOrbit periodic_spatial(double n, double F0, double F2_hint) {
    if (!(n > 0)) throw std::domain_error("n must be positive");
    const double alpha = n / (n + 1.0);
    IvpSystem sys{4, [alpha](double, const State& s, State& d) {
                      d[0] = s[1];
                      d[1] = s[2];
                      d[2] = s[3];
                      const double F = s[0];
                      d[3] = F - (F == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(F), 1.0 - alpha), F));
                  }};
    const double Ymax = 400.0;
    const double band = 2.0 * std::abs(F0);
    IntegrateOptions io;
    io.stop_event = [F0, band](double, const State& s) { return band - std::abs(s[0] - std::copysign(1.0, F0)); };
    io.stop_direction = -1;
    auto shoot = [&](double c) { return integrate(sys, {F0, 0.0, c, 0.0}, 0.0, Ymax, 1e-12, 1e-14, io); };
    auto escape = [&](const Trajectory& t) {
        if (t.status != IvpStatus::stopped_by_event) return 0;
        return t.back()[0] > std::copysign(1.0, F0) ? 1 : -1;
    };

    double lo = F2_hint, hi = F2_hint;
    int elo = 0, ehi = 0;
    bool bracket = false;
    for (double d = 1e-7; d < 0.5 && !bracket; d *= 2) {
        lo = F2_hint - d;
        hi = F2_hint + d;
        elo = escape(shoot(lo));
        ehi = escape(shoot(hi));
        bracket = elo != 0 && ehi != 0 && elo != ehi;
    }
    if (!bracket) throw std::runtime_error("no bounded window found");
    for (int it = 0; it < 80 && hi - lo > 4e-16 * std::abs(hi); ++it) {
        const double m = 0.5 * (lo + hi);
        const int e = escape(shoot(m));
        if (e == 0) {
            lo = hi = m;
            break;
        }
        if (e == elo) lo = m;
        else hi = m;
    }
    const double tl = shoot(lo).t_end(), th = shoot(hi).t_end();
    SpatialOrbit out;
    out.F2_origin = tl >= th ? lo : hi;
    out.trajectory = shoot(out.F2_origin);
    out.window = out.trajectory.t_end();

    // One period: the symmetric point at 0 recurs at the next extremum of the same kind.
    const auto ext = detect_events(out.trajectory, [](double, const State& s) { return s[1]; });
    std::vector<double> same;
    const bool is_max = out.F2_origin < 0;
    for (const auto& e : ext) {
        const bool m = e.state[2] < 0;
        if (m == is_max && e.t > 1e-6) same.push_back(e.t);
    }
    if (same.empty()) throw std::runtime_error("no full period inside the bounded window");
    out.period = same.front();
    double mx = -1e300, mn = 1e300, acc = 0;
    const int M = 4000;
    for (int k = 0; k <= M; ++k) {
        const double y = out.period * k / M;
        const double F = out.trajectory(y)[0];
        mx = std::max(mx, F);
        mn = std::min(mn, F);
        if (k < M) acc += F;
    }
    out.max_value = mx;
    out.min_value = mn;
    out.mean_value = acc / M;
    return out;
}

} // namespace blowup
