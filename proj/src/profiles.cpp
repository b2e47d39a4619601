#include "blowup/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace blowup {

std::string to_string(Form f) {
    switch (f) {
    case Form::f_form: return "f_form";
    case Form::S: return "S";
    case Form::general: return "general";
    case Form::normalized: return "normalized";
    case Form::sign_limit: return "sign_limit";
    }
    return "?";
}

std::string to_string(Symmetry s) { return s == Symmetry::even ? "even" : "odd"; }

std::string to_string(RightBc b) { return b == RightBc::compact_support ? "compact_support" : "farfield"; }

Form form_from_string(const std::string& s) {
    if (s == "f_form") return Form::f_form;
    if (s == "S") return Form::S;
    if (s == "general") return Form::general;
    if (s == "normalized") return Form::normalized;
    if (s == "sign_limit") return Form::sign_limit;
    throw std::invalid_argument("unknown form: " + s);
}

Symmetry symmetry_from_string(const std::string& s) {
    if (s == "even") return Symmetry::even;
    if (s == "odd") return Symmetry::odd;
    throw std::invalid_argument("unknown symmetry: " + s);
}

RightBc right_bc_from_string(const std::string& s) {
    if (s == "compact_support") return RightBc::compact_support;
    if (s == "farfield") return RightBc::farfield;
    throw std::invalid_argument("unknown boundary condition: " + s);
}

void ProfileProblemSpec::validate() const {
    if (!(R > 0)) throw std::invalid_argument("radius must be positive");
    if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
    const bool variational_form = form == Form::S || form == Form::sign_limit;
    if (variational_form && params.regime() != Regime::S)
        throw std::invalid_argument("S and sign_limit forms require p = n+1");
    const double mu = drift_coefficient();
    if (right_bc == RightBc::compact_support && mu > 0)
        throw std::invalid_argument("compact support boundary conditions require p <= n+1");
    if (right_bc == RightBc::farfield && !(mu > 0))
        throw std::invalid_argument("far-field boundary conditions require p > n+1");
}

double ProfileProblemSpec::drift_coefficient() const {
    if (form == Form::S || form == Form::sign_limit) return 0.0;
    return drift ? *drift : params.beta();
}

double ProfileProblemSpec::equilibrium() const {
    if (form == Form::general || form == Form::f_form) return params.F_star();
    return 1.0;
}

double ProfileProblemSpec::farfield_power() const {
    const double mu = drift_coefficient();
    if (!(mu > 0)) throw std::domain_error("far-field power law needs a positive drift");
    return -(params.n() + 1.0) / (mu * (params.p() - 1.0));
}

double default_radius(double n) { return 15.0 * std::max(1.0, std::pow(n, -0.75)); }

ProfileProblemSpec default_spec(double n, double p, Symmetry sym) {
    ProfileProblemSpec s;
    s.params = ProblemParams(n, p);
    s.symmetry = sym;
    s.form = s.params.regime() == Regime::S ? Form::S : Form::general;
    s.right_bc = s.params.regime() == Regime::LS ? RightBc::farfield : RightBc::compact_support;
    s.R = default_radius(n);
    if (s.form == Form::general) s.R *= form_scaling(n, p).a;
    return s;
}

FormScaling form_scaling(double n, double p) {
    const ProblemParams q(n, p);
    const double C = q.F_star();
    return {C, std::pow((p - 1.0) * std::pow(C, q.alpha()), 0.25)};
}

ProfileRhs::ProfileRhs(const ProfileProblemSpec& spec) {
    const auto& P = spec.params;
    eps = spec.eps;
    alpha = P.alpha();
    const double mu = spec.drift_coefficient();
    switch (spec.form) {
    case Form::S:
        c_lin = 1;
        c_a = 1;
        break;
    case Form::sign_limit:
        c_lin = 1;
        c_a = 1;
        alpha = 1;
        break;
    case Form::general:
    case Form::f_form:
        c_y = mu * (1 - alpha);
        c_a = 1 / (P.p() - 1);
        c_q = 1;
        q = P.p() * (1 - alpha) - 1;
        break;
    case Form::normalized:
        c_y = mu * (P.p() - 1) * (1 - alpha);
        c_a = 1;
        c_q = 1;
        q = P.p() * (1 - alpha) - 1;
        break;
    }
}

double ProfileRhs::operator()(double y, double F, double dF) const {
    const double s = eps * eps + F * F;
    const double w = std::pow(s, -0.5 * alpha);
    double g = c_lin * F - c_a * w * F;
    if (c_q != 0) g += c_q * (q == 0 ? F : std::pow(s, 0.5 * q) * F);
    if (c_y != 0) g -= c_y * y * dF * w;
    return g;
}

void ProfileRhs::partials(double y, double F, double dF, double& gF, double& gdF) const {
    const double e2 = eps * eps;
    const double s = e2 + F * F;
    const double w = std::pow(s, -0.5 * alpha);
    gF = c_lin - c_a * w / s * (e2 + (1 - alpha) * F * F);
    if (c_q != 0) gF += c_q * (q == 0 ? 1.0 : std::pow(s, 0.5 * q - 1) * (e2 + (1 + q) * F * F));
    gdF = 0;
    if (c_y != 0) {
        const double dw = -alpha * F * w / s;
        gF -= c_y * y * dF * dw;
        gdF = -c_y * y * w;
    }
}

BvpProblem build_system(const ProfileProblemSpec& spec) {
    spec.validate();
    BvpProblem pb;
    pb.dimension = 4;
    const ProfileRhs g(spec);
    pb.rhs = [g](double y, const Vec& s, Vec& f) {
        f.resize(4);
        f << s[1], s[2], s[3], g(y, s[0], s[1]);
    };
    pb.jacobian = [g](double y, const Vec& s, Mat& J) {
        J.setZero(4, 4);
        J(0, 1) = J(1, 2) = J(2, 3) = 1;
        double gF, gdF;
        g.partials(y, s[0], s[1], gF, gdF);
        J(3, 0) = gF;
        J(3, 1) = gdF;
    };
    const bool even = spec.symmetry == Symmetry::even;
    const bool compact = spec.right_bc == RightBc::compact_support;
    const double R = spec.R;
    const double G = compact ? 0.0 : spec.farfield_power();
    pb.bc = [=](const Vec& a, const Vec& b, Vec& r) {
        r.resize(4);
        if (even) r << a[1], a[3], 0, 0;
        else r << a[0], a[2], 0, 0;
        if (compact) {
            r[2] = b[0];
            r[3] = b[1];
        } else {
            r[2] = R * b[1] - G * b[0];
            r[3] = R * R * b[2] - G * (G - 1) * b[0];
        }
    };
    pb.bc_jacobian = [=](const Vec&, const Vec&, Mat& Ja, Mat& Jb) {
        Ja.setZero(4, 4);
        Jb.setZero(4, 4);
        if (even) {
            Ja(0, 1) = 1;
            Ja(1, 3) = 1;
        } else {
            Ja(0, 0) = 1;
            Ja(1, 2) = 1;
        }
        if (compact) {
            Jb(2, 0) = 1;
            Jb(3, 1) = 1;
        } else {
            Jb(2, 1) = R;
            Jb(2, 0) = -G;
            Jb(3, 2) = R * R;
            Jb(3, 0) = -G * (G - 1);
        }
    };
    return pb;
}

ProfileGuess cap_guess(const ProfileProblemSpec& spec, double amplitude, double half_width) {
    const double n = spec.params.n();
    double L = half_width;
    if (L <= 0) {
        L = 4.0 * std::pow(n, -0.25);
        if (spec.form == Form::general || spec.form == Form::f_form) L *= form_scaling(n, spec.params.p()).a;
        L = std::min(L, 0.9 * spec.R);
    }
    const double C = amplitude > 0 ? amplitude : 1.5 * spec.equilibrium();
    const std::size_t N = 801;
    ProfileGuess g;
    g.y.resize(N);
    g.states = Mat::Zero(4, N);
    const double k = std::numbers::pi / (2 * L);
    for (std::size_t i = 0; i < N; ++i) {
        const double y = spec.R * static_cast<double>(i) / (N - 1);
        g.y[i] = y;
        if (y >= L) continue;
        const double t = 2 * k * y;
        if (spec.symmetry == Symmetry::even) {
            g.states.col(i) << 0.5 * C * (1 + std::cos(t)), -C * k * std::sin(t), -2 * C * k * k * std::cos(t),
                4 * C * k * k * k * std::sin(t);
        } else {
            g.states.col(i) << C * std::sin(t), 2 * C * k * std::cos(t), -4 * C * k * k * std::sin(t),
                -8 * C * k * k * k * std::cos(t);
        }
    }
    return g;
}

namespace {

Mat sample_guess(const ProfileGuess& g, const std::vector<double>& x) {
    Mat out = Mat::Zero(4, static_cast<Eigen::Index>(x.size()));
    const auto& Y = g.y;
    if (Y.size() < 2) return out;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double xv = x[k];
        if (xv < Y.front() || xv > Y.back()) continue;
        auto it = std::upper_bound(Y.begin(), Y.end(), xv);
        std::size_t i = it == Y.begin() ? 0 : static_cast<std::size_t>(it - Y.begin()) - 1;
        if (i + 1 >= Y.size()) i = Y.size() - 2;
        const double h = Y[i + 1] - Y[i];
        const double t = (xv - Y[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        for (int j = 0; j < 3; ++j)
            out(j, k) = h00 * g.states(j, i) + h * h10 * g.states(j + 1, i) + h01 * g.states(j, i + 1) +
                        h * h11 * g.states(j + 1, i + 1);
        out(3, k) = (1 - t) * g.states(3, i) + t * g.states(3, i + 1);
    }
    return out;
}

std::vector<double> eps_ladder(double start, double target) {
    std::vector<double> out;
    if (target >= start) return {target};
    for (double e = start; e > target * 1.0000001; e /= 10) out.push_back(e);
    out.push_back(target);
    return out;
}

} // namespace

ProfileSolution ProfileSolution::from_bvp(const ProfileProblemSpec& spec, const BvpSolution& bvp, double tol) {
    ProfileSolution s;
    s.spec = spec;
    s.mesh = bvp.mesh;
    const auto N = bvp.states.cols();
    s.F.resize(N);
    s.dF.resize(N);
    s.d2F.resize(N);
    s.d3F.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        s.F[i] = bvp.states(0, i);
        s.dF[i] = bvp.states(1, i);
        s.d2F[i] = bvp.states(2, i);
        s.d3F[i] = bvp.states(3, i);
    }
    s.residual = bvp.residual;
    s.tol = tol;
    s.status = bvp.status;
    s.newton_iterations = bvp.newton_iterations;
    s.diagnostic = bvp.diagnostic;
    return s;
}

ProfileSolution ProfileSolution::from_arrays(const ProfileProblemSpec& spec, Mesh mesh, std::vector<double> F,
                                             std::vector<double> dF, std::vector<double> d2F,
                                             std::vector<double> d3F) {
    const std::size_t N = mesh.size();
    if (F.size() != N || dF.size() != N || d2F.size() != N || d3F.size() != N)
        throw std::invalid_argument("profile arrays must match the mesh");
    ProfileSolution s;
    s.spec = spec;
    s.mesh = std::move(mesh);
    s.F = std::move(F);
    s.dF = std::move(dF);
    s.d2F = std::move(d2F);
    s.d3F = std::move(d3F);
    return s;
}

BvpSolution ProfileSolution::bvp() const {
    BvpSolution b;
    b.mesh = mesh;
    const auto N = static_cast<Eigen::Index>(mesh.size());
    b.states.resize(4, N);
    b.slopes.resize(4, N);
    const ProfileRhs g(spec);
    for (Eigen::Index i = 0; i < N; ++i) {
        b.states.col(i) << F[i], dF[i], d2F[i], d3F[i];
        b.slopes.col(i) << dF[i], d2F[i], d3F[i], g(mesh.nodes[i], F[i], dF[i]);
    }
    b.residual = residual;
    b.status = status;
    b.rtol = b.atol = tol;
    return b;
}

std::array<double, 4> ProfileSolution::eval(double y) const {
    const double ay = std::abs(y);
    const auto& x = mesh.nodes;
    const double yy = std::min(ay, x.back());
    auto it = std::upper_bound(x.begin(), x.end(), yy);
    std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    if (i + 1 >= x.size()) i = x.size() - 2;
    const ProfileRhs g(spec);
    const double h = x[i + 1] - x[i];
    const double t = (yy - x[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const double a[5] = {F[i], dF[i], d2F[i], d3F[i], g(x[i], F[i], dF[i])};
    const double b[5] = {F[i + 1], dF[i + 1], d2F[i + 1], d3F[i + 1], g(x[i + 1], F[i + 1], dF[i + 1])};
    std::array<double, 4> out{};
    for (int j = 0; j < 4; ++j) out[j] = h00 * a[j] + h * h10 * a[j + 1] + h01 * b[j] + h * h11 * b[j + 1];
    if (ay > x.back() && spec.right_bc == RightBc::compact_support) out = {0, 0, 0, 0};
    if (y < 0) {
        const double sgn0 = spec.symmetry == Symmetry::even ? 1.0 : -1.0;
        for (int j = 0; j < 4; ++j) out[j] *= (j % 2 == 0) ? sgn0 : -sgn0;
    }
    return out;
}

double ProfileSolution::sup_norm() const {
    double m = 0;
    for (double v : F) m = std::max(m, std::abs(v));
    return m;
}

double ProfileSolution::l2_norm() const {
    double s = 0;
    const auto& x = mesh.nodes;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i];
        const double fm = value(0.5 * (x[i] + x[i + 1]));
        s += h / 6 * (F[i] * F[i] + 4 * fm * fm + F[i + 1] * F[i + 1]);
    }
    return std::sqrt(2 * s);
}

ProfileGuess ProfileSolution::as_guess() const {
    ProfileGuess g;
    g.y = mesh.nodes;
    g.states.resize(4, static_cast<Eigen::Index>(mesh.size()));
    for (std::size_t i = 0; i < mesh.size(); ++i) g.states.col(i) << F[i], dF[i], d2F[i], d3F[i];
    return g;
}

double ProfileSolution::recompute_residual() const {
    const auto pb = build_system(spec);
    return residual_norm(bvp(), pb);
}

ProfileSolution solve_profile(const ProfileProblemSpec& spec, const ProfileGuess& guess, double tol) {
    ProfileSolveOptions o;
    o.tol = tol;
    return solve_profile(spec, guess, o);
}

ProfileSolution solve_profile(const ProfileProblemSpec& spec, const ProfileGuess& guess,
                              const ProfileSolveOptions& opts) {
    spec.validate();
    if (guess.states.rows() != 4 || guess.states.cols() != static_cast<Eigen::Index>(guess.y.size()))
        throw std::invalid_argument("guess shape mismatch");
    if (!guess.states.allFinite()) throw std::invalid_argument("guess is not finite");

    std::vector<double> x;
    const bool reuse = guess.y.size() >= 5 && guess.y.size() <= opts.max_nodes && guess.y.front() == 0.0 &&
                       std::abs(guess.y.back() - spec.R) <= 1e-12 * spec.R;
    if (reuse) {
        x = guess.y;
        x.back() = spec.R;
    } else {
        x = Mesh::uniform(0, spec.R, opts.initial_nodes).nodes;
    }
    Mat S = sample_guess(guess, x);

    const auto ladder = opts.ladder ? eps_ladder(opts.eps_start, spec.eps) : std::vector<double>{spec.eps};
    BvpSolution bvp;
    ProfileProblemSpec sk = spec;
    double tk = opts.tol;
    for (double e : ladder) {
        sk.eps = e;
        tk = std::max(opts.tol, std::min(e, 1e-3));
        if (e == ladder.back()) tk = opts.tol;
        BvpProblem pb = build_system(sk);
        pb.mesh = Mesh(x, opts.max_nodes);
        pb.guess = S;
        BvpOptions bo;
        bo.rtol = bo.atol = tk;
        bo.max_nodes = opts.max_nodes;
        bo.coarsen = opts.coarsen;
        bo.max_newton = opts.max_newton;
        bvp = solve_bvp(pb, bo);
        if (!bvp.converged()) {
            ProfileSolution fail = ProfileSolution::from_bvp(sk, bvp, tk);
            std::ostringstream os;
            os << bvp.diagnostic << " (eps=" << e << ")";
            fail.diagnostic = os.str();
            fail.spec.eps = spec.eps;
            return fail;
        }
        x = bvp.mesh.nodes;
        S = bvp.states;
    }
    ProfileSolution sol = ProfileSolution::from_bvp(spec, bvp, tk);
    if (opts.analyse) {
        sol.sigma = classify(sol);
        if (spec.right_bc == RightBc::compact_support) {
            try {
                const auto ie = interface_estimate(sol);
                sol.y0 = ie.y0;
                sol.zero_count = ie.zero_count;
            } catch (const std::exception&) {
            }
        }
    }
    return sol;
}

} // namespace blowup
