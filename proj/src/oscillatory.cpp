#include "blowup/oscillatory.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blowup {

namespace {

struct Coeffs {
    double mu, c2, c1, K, alpha, A;
    bool sign;
};

Coeffs coeffs(double n) {
    if (!(n > 0)) throw std::domain_error("n must be positive");
    Coeffs c{};
    c.sign = std::isinf(n);
    c.mu = interface_exponent(n, InterfaceOrder::tw_third_order);
    c.c2 = 3 * (c.mu - 1);
    c.c1 = 3 * c.mu * c.mu - 6 * c.mu + 2;
    c.K = c.mu * (c.mu - 1) * (c.mu - 2);
    c.alpha = c.sign ? 1.0 : n / (n + 1);
    c.A = c.sign ? 1.0 / c.K : std::pow(c.K, -(n + 1) / n);
    return c;
}

double nonlin(const Coeffs& c, double psi) {
    if (psi == 0.0) return 0.0;
    if (c.sign) return std::copysign(1.0, psi);
    return std::copysign(std::pow(std::abs(psi), 1 - c.alpha), psi);
}

// psi''' for P_3 psi = -K N(psi)
double third(const Coeffs& c, double p0, double p1, double p2) {
    return -c.K * nonlin(c, p0) - c.c2 * p2 - c.c1 * p1 - c.K * p0;
}

double wrap(double s, double T) {
    double r = std::fmod(s, T);
    return r < 0 ? r + T : r;
}

} // namespace

std::vector<double> pk_coefficients(int k, double mu) {
    if (k < 0) throw std::invalid_argument("k must be non-negative");
    std::vector<double> c{1.0};
    for (int j = 0; j < k; ++j) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] += (mu - j) * c[i];
        }
        c = std::move(next);
    }
    return c;
}

double interface_exponent(double n, InterfaceOrder order) {
    if (!(n > 0)) throw std::domain_error("n must be positive");
    const double base = order == InterfaceOrder::tw_third_order ? 3.0 : 4.0;
    return std::isinf(n) ? base : base * (n + 1) / n;
}

double OscComponent::phi(double s) const {
    if (samples.size() < 2 || !(period > 0)) throw std::logic_error("empty oscillatory component");
    const double t = wrap(s - samples.front().s, period);
    const double h = period / static_cast<double>(samples.size());
    std::size_t i = std::min(static_cast<std::size_t>(t / h), samples.size() - 1);
    const OscSample& a = samples[i];
    const OscSample& b = samples[(i + 1) % samples.size()];
    // quintic Hermite on (phi, phi', phi'')
    const double x = (t - h * static_cast<double>(i)) / h;
    const double x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x;
    const double h0 = 1 - 10 * x3 + 15 * x4 - 6 * x5, h1 = x - 6 * x3 + 8 * x4 - 3 * x5;
    const double h2 = 0.5 * (x2 - 3 * x3 + 3 * x4 - x5);
    const double g0 = 10 * x3 - 15 * x4 + 6 * x5, g1 = -4 * x3 + 7 * x4 - 3 * x5;
    const double g2 = 0.5 * (x3 - 2 * x4 + x5);
    return h0 * a.phi + h * h1 * a.dphi + h * h * h2 * a.d2phi + g0 * b.phi + h * g1 * b.dphi + h * h * g2 * b.d2phi;
}

OscComponent oscillatory_orbit(double n, const OscOptions& opts) {
    const Coeffs c = coeffs(n);
    IvpSystem sys{3, [c](double, const State& y, State& d) {
                      d[0] = y[1];
                      d[1] = y[2];
                      d[2] = third(c, y[0], y[1], y[2]);
                  }};
    const State x0{opts.start[0], opts.start[1], opts.start[2]};
    const auto orbit = find_periodic(sys, x0, [](double, const State& y) { return y[0]; }, opts.periodic);
    if (!orbit.converged())
        throw std::runtime_error("no periodic orbit (" + to_string(orbit.status) + "): " + orbit.diagnostic);

    OscComponent out;
    out.n = n;
    out.mu = c.mu;
    out.scale = c.A;
    out.period = orbit.period;
    out.return_distances = orbit.return_distances;
    const std::size_t M = std::max<std::size_t>(opts.samples, 16);
    const double T = orbit.period;
    // a capped step keeps the interpolant as accurate as the step itself
    IntegrateOptions io;
    io.h_max = T / 4096;
    const Trajectory tr = integrate(sys, orbit.anchor, 0.0, T, opts.periodic.rtol, opts.periodic.atol, io);
    out.samples.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double s = T * static_cast<double>(i) / static_cast<double>(M);
        const State y = tr(s);
        out.samples[i] = {s, c.A * y[0], c.A * y[1], c.A * y[2]};
        out.amplitude = std::max(out.amplitude, std::abs(out.samples[i].phi));
    }
    for (std::size_t i = 0; i < M; ++i) {
        const double a = out.samples[i].phi, b = out.samples[(i + 1) % M].phi;
        if ((a < 0) != (b < 0)) ++out.sign_changes;
    }

    // integral form: psi''(b) - psi''(a) = int_a^b psi''' ds along the dense output
    auto g = [&](double s) {
        const State y = tr(s);
        return third(c, y[0], y[1], y[2]);
    };
    double worst = 0;
    const int W = 64;
    for (int i = 0; i < W; ++i) {
        const double a = T * i / W;
        const double b = T * (i + 1) / W;
        const double I = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, a, b, 12, 1e-13);
        const double defect = std::abs(tr(b)[2] - tr(a)[2] - I) / (b - a);
        worst = std::max(worst, defect);
    }
    out.residual = c.A * worst;

    double sym = 0;
    for (const auto& smp : out.samples) sym = std::max(sym, std::abs(smp.phi + out.phi(smp.s + 0.5 * T)));
    out.symmetry_defect = sym / out.amplitude;
    return out;
}

double orbit_distance(const OscComponent& a, const OscComponent& b) {
    if (a.n != b.n && !(std::isinf(a.n) && std::isinf(b.n))) throw std::invalid_argument("orbits of different n");
    // both orbits start on the upward zero crossing, so equal offsets are equal phases
    double d = 0;
    for (const auto& s : a.samples) d = std::max(d, std::abs(s.phi - b.phi(b.samples.front().s + (s.s - a.samples.front().s))));
    return d / a.amplitude;
}

NonOscEquilibria nonosc_equilibria(double n) {
    const Coeffs c = coeffs(n);
    return {c.A, -c.A};
}

CharSpectrum char_spectrum(double mu) {
    if (!(mu > 3)) throw std::domain_error("characteristic spectrum needs mu > 3");
    CharSpectrum cs;
    cs.mu = mu;
    cs.coefficients = {1.0, 3 * (mu - 1), 3 * mu * mu - 6 * mu + 2, 3 * (mu - 1) * (mu - 2)};
    const auto& k = cs.coefficients;
    Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
    C(0, 0) = -k[1];
    C(0, 1) = -k[2];
    C(0, 2) = -k[3];
    C(1, 0) = 1;
    C(2, 1) = 1;
    Eigen::EigenSolver<Eigen::Matrix3d> es(C, false);
    using cd = std::complex<double>;
    for (int i = 0; i < 3; ++i) {
        cd z = es.eigenvalues()[i];
        for (int it = 0; it < 6; ++it) {
            const cd p = ((z + k[1]) * z + k[2]) * z + k[3];
            const cd dp = (3.0 * z + 2.0 * k[1]) * z + k[2];
            if (std::abs(dp) == 0) break;
            const cd step = p / dp;
            z -= step;
            if (std::abs(step) <= 1e-16 * std::abs(z)) break;
        }
        if (std::abs(z.imag()) <= 1e-14 * std::abs(z)) z = z.real();
        cs.roots[static_cast<std::size_t>(i)] = z;
    }
    std::sort(cs.roots.begin(), cs.roots.end(), [](const cd& a, const cd& b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    const auto& r = cs.roots;
    const cd e1 = r[0] + r[1] + r[2];
    const cd e2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
    const cd e3 = r[0] * r[1] * r[2];
    cs.vieta_defect = std::max({std::abs(e1 + k[1]) / k[1], std::abs(e2 - k[2]) / k[2], std::abs(e3 + k[3]) / k[3]});
    cs.all_stable = std::all_of(r.begin(), r.end(), [](const cd& z) { return z.real() < 0; });
    return cs;
}

LocalExpansion::LocalExpansion(double n, double y0, double window)
    : branch_(ExpansionBranch::nonoscillatory_1D), n_(n), y0_(y0), window_(window),
      mu_(interface_exponent(n, InterfaceOrder::tw_third_order)) {
    if (!(window > 0)) throw std::invalid_argument("window must be positive");
}

LocalExpansion::LocalExpansion(const OscComponent& component, double y0, double s0, double window)
    : branch_(ExpansionBranch::oscillatory_2D), n_(component.n), y0_(y0), s0_(s0), window_(window),
      mu_(component.mu), comp_(component) {
    if (!(window > 0)) throw std::invalid_argument("window must be positive");
    if (component.samples.empty()) throw std::invalid_argument("oscillatory component has no samples");
}

double LocalExpansion::operator()(double y) const {
    if (branch_ == ExpansionBranch::nonoscillatory_1D) {
        const double d = y - y0_;
        if (!(d > 0) || d > window_) throw std::domain_error("outside the validity window");
        const double K = mu_ * (mu_ - 1) * (mu_ - 2);
        return std::pow(d, 3 / n_) * std::pow(K, -1 / n_);
    }
    const double d = y0_ - y;
    if (!(d > 0) || d > window_) throw std::domain_error("outside the validity window");
    return std::pow(d, mu_) * comp_.phi(std::log(d) + s0_);
}

} // namespace blowup
