#include "blowup/odeint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blowup {

std::string to_string(IvpStatus s) {
    switch (s) {
    case IvpStatus::completed: return "completed";
    case IvpStatus::stopped_by_event: return "stopped_by_event";
    case IvpStatus::step_underflow: return "step_underflow";
    case IvpStatus::nonfinite: return "nonfinite";
    case IvpStatus::bound_exceeded: return "bound_exceeded";
    case IvpStatus::max_steps: return "max_steps";
    }
    return "?";
}

std::string to_string(PeriodicOrbit::Status s) {
    switch (s) {
    case PeriodicOrbit::Status::converged: return "converged";
    case PeriodicOrbit::Status::no_convergence: return "no_convergence";
    case PeriodicOrbit::Status::equilibrium: return "converged to equilibrium";
    case PeriodicOrbit::Status::unbounded: return "unbounded";
    }
    return "?";
}

State Trajectory::operator()(double t) const {
    if (step_h_.empty()) return states_.front();
    const double lo = std::min(times_.front(), times_.back());
    const double hi = std::max(times_.front(), times_.back());
    if (t < lo - 1e-12 * (1 + std::abs(lo)) || t > hi + 1e-12 * (1 + std::abs(hi)))
        throw std::out_of_range("dense output requested outside the trajectory");
    const bool forward = times_.back() >= times_.front();
    auto it = forward ? std::upper_bound(times_.begin(), times_.end(), t)
                      : std::upper_bound(times_.begin(), times_.end(), t, std::greater<>());
    std::size_t k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    k = std::min(k, step_h_.size() - 1);
    const double th = (t - step_t0_[k]) / step_h_[k];
    const double th1 = 1.0 - th;
    const double* r = &dense_[5 * dim_ * k];
    State y(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        const double r1 = r[i], r2 = r[dim_ + i], r3 = r[2 * dim_ + i], r4 = r[3 * dim_ + i], r5 = r[4 * dim_ + i];
        y[i] = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
    }
    return y;
}

class DormandPrince {
public:
    static Trajectory run(const IvpSystem& sys, const State& y0, double t0, double t1, double rtol,
                          double atol, const IntegrateOptions& o);
};

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

bool finite(const State& y) {
    for (double v : y)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace

Trajectory DormandPrince::run(const IvpSystem& sys, const State& y0, double t0, double t1, double rtol,
                              double atol, const IntegrateOptions& o) {
    if (!(rtol > 0) || !(atol > 0)) throw std::invalid_argument("tolerances must be positive");
    if (t1 == t0) throw std::invalid_argument("degenerate time span");
    const std::size_t n = sys.dimension;
    if (y0.size() != n) throw std::invalid_argument("initial state has wrong dimension");

    Trajectory tr;
    tr.dim_ = n;
    tr.times_.push_back(t0);
    tr.states_.push_back(y0);

    const double dir = t1 > t0 ? 1.0 : -1.0;
    State y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), ynew(n);
    auto f = [&](double t, const State& s, State& out) { sys.rhs(t, s, out); };

    f(t0, y, k1);
    if (!finite(k1)) {
        tr.status = IvpStatus::nonfinite;
        return tr;
    }

    double h = std::abs(o.h0);
    if (h == 0.0) {
        double dn0 = 0, dn1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = atol + rtol * std::abs(y[i]);
            dn0 = std::max(dn0, std::abs(y[i]) / sc);
            dn1 = std::max(dn1, std::abs(k1[i]) / sc);
        }
        h = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
        h = std::min(h, std::abs(t1 - t0));
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + dir * h * k1[i];
        f(t0 + dir * h, yt, k2);
        double dn2 = 0;
        for (std::size_t i = 0; i < n; ++i)
            dn2 = std::max(dn2, std::abs(k2[i] - k1[i]) / (atol + rtol * std::abs(y[i])));
        dn2 /= h;
        const double h1 = std::max(dn1, dn2) <= 1e-15 ? std::max(1e-6, h * 1e-3)
                                                       : std::pow(0.01 / std::max(dn1, dn2), 0.2);
        h = std::min({100 * h, h1, std::abs(t1 - t0)});
    }
    h = std::min(h, o.h_max);

    double t = t0;
    double g_prev = o.stop_event ? o.stop_event(t0, y0) : 0.0;
    std::size_t steps = 0;
    bool last = false;

    while (!last) {
        if (++steps > o.max_steps) {
            tr.status = IvpStatus::max_steps;
            return tr;
        }
        if (dir * (t + dir * h - t1) >= 0) {
            h = std::abs(t1 - t);
            last = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            tr.status = IvpStatus::step_underflow;
            return tr;
        }
        const double hs = dir * h;
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * a21 * k1[i];
        f(t + c2 * hs, yt, k2);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * hs, yt, k3);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * hs, yt, k4);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * hs, yt, k5);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + hs, yt, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(t + hs, ynew, k7);

        double err = 0;
        bool ok = finite(ynew) && finite(k7);
        if (ok) {
            for (std::size_t i = 0; i < n; ++i) {
                const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err = std::max(err, std::abs(e) / sc);
            }
        }
        if (!ok || !std::isfinite(err)) {
            last = false;
            h *= 0.25;
            continue;
        }
        if (err > 1.0) {
            last = false;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        const std::size_t base = tr.dense_.size();
        tr.dense_.resize(base + 5 * n);
        double* r = &tr.dense_[base];
        for (std::size_t i = 0; i < n; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = hs * k1[i] - ydiff;
            r[i] = y[i];
            r[n + i] = ydiff;
            r[2 * n + i] = bspl;
            r[3 * n + i] = ydiff - hs * k7[i] - bspl;
            r[4 * n + i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        tr.step_t0_.push_back(t);
        tr.step_h_.push_back(hs);
        const double tnew = last ? t1 : t + hs;

        if (o.stop_event) {
            const double g_new = o.stop_event(tnew, ynew);
            const bool rising = g_prev < 0 && g_new >= 0;
            const bool falling = g_prev > 0 && g_new <= 0;
            const bool hit = (o.stop_direction >= 0 && rising) || (o.stop_direction <= 0 && falling);
            if (hit) {
                tr.times_.push_back(tnew);
                tr.states_.push_back(ynew);
                double a = t, b = tnew, ga = g_prev;
                for (int it = 0; it < 200 && std::abs(b - a) > 4e-16 * std::max(1.0, std::abs(b)); ++it) {
                    const double m = 0.5 * (a + b);
                    const double gm = o.stop_event(m, tr(m));
                    if (gm == 0.0) { a = b = m; break; }
                    if ((gm < 0) == (ga < 0)) { a = m; ga = gm; }
                    else b = m;
                }
                const double troot = 0.5 * (a + b);
                if (std::abs(troot - t0) >= o.min_event_gap) {
                    const State yr = tr(troot);
                    tr.times_.back() = troot;
                    tr.states_.back() = yr;
                    tr.status = IvpStatus::stopped_by_event;
                    return tr;
                }
                tr.times_.pop_back();
                tr.states_.pop_back();
            }
            g_prev = g_new;
        }

        t = tnew;
        y = ynew;
        k1 = k7;
        tr.times_.push_back(t);
        tr.states_.push_back(y);

        for (double v : y)
            if (std::abs(v) > o.max_abs) {
                tr.status = IvpStatus::bound_exceeded;
                return tr;
            }

        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = std::min(h * fac, o.h_max);
    }
    tr.status = IvpStatus::completed;
    return tr;
}

Trajectory integrate(const IvpSystem& system, const State& y0, double t0, double t1, double rtol, double atol,
                     const IntegrateOptions& opts) {
    return DormandPrince::run(system, y0, t0, t1, rtol, atol, opts);
}

std::vector<Event> detect_events(const Trajectory& traj, const EventFunction& event, int direction) {
    std::vector<Event> out;
    const auto& ts = traj.times();
    if (ts.size() < 2) return out;
    constexpr int sub = 4;
    double tp = ts[0];
    double gp = event(tp, traj.states()[0]);
    const double scale = std::max(1.0, std::abs(gp));
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        for (int j = 1; j <= sub; ++j) {
            const double tc = j == sub ? ts[k + 1] : ts[k] + (ts[k + 1] - ts[k]) * j / sub;
            const double gc = event(tc, j == sub ? traj.states()[k + 1] : traj(tc));
            const bool rising = gp < 0 && gc >= 0;
            const bool falling = gp > 0 && gc <= 0;
            if ((direction >= 0 && rising) || (direction <= 0 && falling)) {
                double a = tp, b = tc, ga = gp;
                double tm = b;
                for (int it = 0; it < 200; ++it) {
                    tm = 0.5 * (a + b);
                    const double gm = event(tm, traj(tm));
                    if (std::abs(gm) <= 1e-12 * scale && std::abs(b - a) < 1e-9 * std::max(1.0, std::abs(tm))) break;
                    if (gm == 0.0) break;
                    if ((gm < 0) == (ga < 0)) { a = tm; ga = gm; }
                    else b = tm;
                    if (std::abs(b - a) <= 4e-16 * std::max(1.0, std::abs(tm))) { tm = 0.5 * (a + b); break; }
                }
                out.push_back({tm, traj(tm)});
            }
            if (gc != 0.0) { tp = tc; gp = gc; }
            else tp = tc;
        }
    }
    return out;
}

PeriodicOrbit find_periodic(const IvpSystem& system, const State& x0, const EventFunction& section,
                            const PeriodicOptions& opts) {
    PeriodicOrbit orbit;
    IntegrateOptions io;
    io.max_abs = opts.bound;
    State x = x0;
    if (opts.transient > 0) {
        const Trajectory tr = integrate(system, x0, 0.0, opts.transient, opts.rtol, opts.atol, io);
        if (tr.status == IvpStatus::bound_exceeded) {
            orbit.status = PeriodicOrbit::Status::unbounded;
            orbit.diagnostic = "orbit left the bound during the transient";
            return orbit;
        }
        if (tr.status != IvpStatus::completed) {
            orbit.diagnostic = "transient integration failed: " + to_string(tr.status);
            return orbit;
        }
        x = tr.back();
    }

    io.stop_event = section;
    io.stop_direction = opts.direction;
    State prev;
    double t_prev = 0.0, t = 0.0;
    for (int k = 0; k < opts.max_returns; ++k) {
        const Trajectory tr = integrate(system, x, t, t + opts.max_return_time, opts.rtol, opts.atol, io);
        if (tr.status == IvpStatus::bound_exceeded) {
            orbit.status = PeriodicOrbit::Status::unbounded;
            orbit.diagnostic = "orbit left the bound";
            return orbit;
        }
        if (tr.status != IvpStatus::stopped_by_event) {
            State d(system.dimension);
            system.rhs(tr.t_end(), tr.back(), d);
            double dn = 0, yn = 0;
            for (std::size_t i = 0; i < d.size(); ++i) {
                dn = std::max(dn, std::abs(d[i]));
                yn = std::max(yn, std::abs(tr.back()[i]));
            }
            if (tr.status == IvpStatus::completed && dn <= 1e-6 * (1.0 + yn)) {
                orbit.status = PeriodicOrbit::Status::equilibrium;
                orbit.diagnostic = "no periodic orbit; converged to equilibrium";
            } else {
                orbit.diagnostic = "no section crossing within the return window";
            }
            orbit.anchor = tr.back();
            return orbit;
        }
        x = tr.back();
        t = tr.t_end();
        if (!prev.empty()) {
            double dist = 0;
            for (std::size_t i = 0; i < x.size(); ++i) dist = std::max(dist, std::abs(x[i] - prev[i]));
            orbit.return_distances.push_back(dist);
            if (dist <= opts.return_tol) {
                orbit.period = t - t_prev;
                orbit.anchor = x;
                IntegrateOptions one = io;
                orbit.samples = integrate(system, x, 0.0, 2.0 * orbit.period, opts.rtol, opts.atol, one);
                orbit.status = PeriodicOrbit::Status::converged;
                return orbit;
            }
        }
        prev = x;
        t_prev = t;
    }
    orbit.diagnostic = "return map did not contract below tolerance";
    orbit.anchor = x;
    return orbit;
}

} // namespace blowup
