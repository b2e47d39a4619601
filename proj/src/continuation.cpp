#include "blowup/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace blowup {

std::string to_string(ContinuationParam c) { return c == ContinuationParam::p ? "p" : "mu"; }

ContinuationParam continuation_param_from_string(const std::string& s) {
    if (s == "p") return ContinuationParam::p;
    if (s == "mu") return ContinuationParam::mu;
    throw std::invalid_argument("unknown continuation parameter: " + s);
}

std::string to_string(Termination t) {
    switch (t) {
    case Termination::completed: return "completed";
    case Termination::jump_detected: return "jump_detected";
    case Termination::step_underflow: return "step_underflow";
    case Termination::newton_failure: return "newton_failure";
    }
    return "?";
}

namespace {

bool normalized_like(Form f) { return f == Form::normalized || f == Form::S || f == Form::sign_limit; }

// Scale factors (C, a) taking the normalized profile of `spec` to its own form.
FormScaling own_scaling(const ProfileProblemSpec& spec) {
    if (normalized_like(spec.form)) return {1.0, 1.0};
    return form_scaling(spec.params.n(), spec.params.p());
}

ProfileSolution scaled(const ProfileSolution& sol, const ProfileProblemSpec& target, double C, double a) {
    std::vector<double> x(sol.mesh.size()), F(x.size()), dF(x.size()), d2F(x.size()), d3F(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = a * sol.mesh.nodes[i];
        F[i] = C * sol.F[i];
        dF[i] = C / a * sol.dF[i];
        d2F[i] = C / (a * a) * sol.d2F[i];
        d3F[i] = C / (a * a * a) * sol.d3F[i];
    }
    x.front() = 0.0;
    auto out = ProfileSolution::from_arrays(target, Mesh(std::move(x), sol.mesh.max_nodes), std::move(F),
                                            std::move(dF), std::move(d2F), std::move(d3F));
    out.spec.R = out.mesh.back();
    out.tol = sol.tol;
    out.status = sol.status;
    out.newton_iterations = sol.newton_iterations;
    return out;
}

double param_of(const ProfileSolution& s, ContinuationParam c) {
    return c == ContinuationParam::p ? s.spec.params.p() : s.spec.drift_coefficient();
}

// Problem at the next parameter value, in the general form for p-branches.
ProfileProblemSpec spec_at(const ProfileProblemSpec& base, ContinuationParam c, double value) {
    ProfileProblemSpec s = base;
    if (c == ContinuationParam::p) {
        s.params = ProblemParams(base.params.n(), value);
        if (normalized_like(s.form)) s.form = Form::general;
        s.drift.reset();
        const double a_old = own_scaling(base).a;
        s.R = base.R / a_old * own_scaling(s).a;
    } else {
        if (s.form == Form::S || s.form == Form::sign_limit) s.form = Form::general;
        s.drift = value;
    }
    s.right_bc = s.drift_coefficient() > 0 ? RightBc::farfield : RightBc::compact_support;
    return s;
}

BranchPoint make_point(const ProfileSolution& s, ContinuationParam c, double step) {
    BranchPoint b;
    b.param = param_of(s, c);
    b.solution = s;
    b.F0 = s.F_at_origin();
    b.sup = s.sup_norm();
    b.sigma = s.sigma ? *s.sigma : classify(s);
    b.step = step;
    return b;
}

} // namespace

ProfileSolution rescale_form(const ProfileSolution& sol, Form target) {
    if (!sol.converged()) throw std::invalid_argument("rescale_form needs a converged solution");
    if (target != Form::general && target != Form::normalized)
        throw std::invalid_argument("rescale_form targets the general or normalized form");
    const bool from_norm = normalized_like(sol.spec.form);
    ProfileProblemSpec ts = sol.spec;
    ts.form = target;
    const auto sc = form_scaling(sol.spec.params.n(), sol.spec.params.p());
    double C = 1, a = 1;
    if (from_norm && target == Form::general) C = sc.C, a = sc.a;
    if (!from_norm && target == Form::normalized) C = 1 / sc.C, a = 1 / sc.a;
    ts.eps = sol.spec.eps * C; // the regularization acts on F
    ProfileSolution out = scaled(sol, ts, C, a);
    out.residual = out.recompute_residual();
    if (!(out.residual <= 10 * std::max(sol.residual, sol.tol)))
        throw std::runtime_error("rescaled profile fails the target-form residual check");
    out.sigma = classify(out);
    if (sol.y0) out.y0 = *sol.y0 * (out.mesh.back() / sol.mesh.back());
    out.zero_count = sol.zero_count;
    return out;
}

ProfileGuess transfer_guess(const ProfileSolution& sol, const ProfileProblemSpec& target) {
    const auto from = own_scaling(sol.spec);
    const auto to = own_scaling(target);
    const double C = to.C / from.C, a = to.a / from.a;
    ProfileGuess g;
    g.y.resize(sol.mesh.size());
    g.states.resize(4, static_cast<Eigen::Index>(sol.mesh.size()));
    for (std::size_t i = 0; i < sol.mesh.size(); ++i) {
        g.y[i] = a * sol.mesh.nodes[i];
        g.states.col(static_cast<Eigen::Index>(i)) << C * sol.F[i], C / a * sol.dF[i], C / (a * a) * sol.d2F[i],
            C / (a * a * a) * sol.d3F[i];
    }
    g.y.front() = 0.0;
    g.y.back() = target.R;
    return g;
}

double relative_distance(const ProfileSolution& a, const ProfileSolution& b) {
    const double R = std::min(a.mesh.back(), b.mesh.back());
    double d = 0, s = 0;
    const int M = 4000;
    for (int i = 0; i <= M; ++i) {
        const double y = R * i / M;
        const double vb = b.value(y);
        d = std::max(d, std::abs(a.value(y) - vb));
        s = std::max(s, std::abs(vb));
    }
    return s > 0 ? d / s : d;
}

bool detect_jump(const BranchPoint& prev, const ProfileSolution& next, double threshold) {
    const MultiIndex sn = next.sigma ? *next.sigma : classify(next);
    if (!(sn == prev.sigma)) return true;
    return relative_distance(next, prev.solution) > threshold;
}

Branch continue_branch(const ProfileSolution& start, ContinuationParam param, double target,
                       const ContinuationOptions& opts) {
    if (!start.converged()) throw std::invalid_argument("continuation needs a converged seed");
    Branch br;
    br.param = param;
    br.target = target;
    br.points.push_back(make_point(start, param, 0.0));
    br.dp = opts.dp0;
    if (opts.checkpoint) opts.checkpoint(br);
    resume_branch(br, target, opts);
    return br;
}

void resume_branch(Branch& br, double target, const ContinuationOptions& opts) {
    if (br.points.empty()) throw std::invalid_argument("cannot resume an empty branch");
    if (!(opts.dp0 > 0) || !(opts.dp_min > 0)) throw std::invalid_argument("step sizes must be positive");
    br.target = target;
    br.reason = Termination::completed;
    br.diagnostic.clear();
    double dp = br.dp > 0 ? br.dp : opts.dp0;
    int streak = 0;
    const double n = br.points.front().solution.spec.params.n();
    const double pivot = n + 1;

    while (true) {
        const BranchPoint& last = br.points.back();
        const double cur = last.param;
        const double span = target - cur;
        if (std::abs(span) <= 1e-12 * std::max(1.0, std::abs(target))) break;
        const double dir = span > 0 ? 1.0 : -1.0;
        double step = std::min(dp, std::abs(span));
        double next = cur + dir * step;
        // land exactly on the variational point when crossing it
        if (br.param == ContinuationParam::p && (cur - pivot) * (next - pivot) < 0 &&
            std::abs(cur - pivot) > 1e-12) {
            next = pivot;
            step = std::abs(next - cur);
        }
        if (br.param == ContinuationParam::p && !(next > 1)) {
            br.reason = Termination::step_underflow;
            br.diagnostic = "p left the admissible range p > 1";
            break;
        }

        const ProfileSolution& prev = last.solution;
        ProfileProblemSpec spec = spec_at(prev.spec, br.param, next);
        if (opts.eps > 0) spec.eps = opts.eps;
        ProfileSolveOptions so;
        so.tol = opts.tol > 0 ? opts.tol : prev.tol;
        so.ladder = false;
        so.max_nodes = opts.max_nodes;
        so.max_newton = opts.max_newton;
        so.coarsen = true;

        ProfileSolution sol = solve_profile(spec, transfer_guess(prev, spec), so);
        const bool ok = sol.converged();
        const bool jump = ok && detect_jump(last, sol, opts.jump_threshold);
        const bool can_halve = dp / 2 >= opts.dp_min;
        if ((!ok || jump) && can_halve) {
            dp /= 2;
            streak = 0;
            continue;
        }
        if (!ok) {
            br.reason = Termination::newton_failure;
            std::ostringstream os;
            os << "no convergence at " << to_string(br.param) << "=" << next << " with the smallest step";
            if (!sol.diagnostic.empty()) os << ": " << sol.diagnostic;
            br.diagnostic = os.str();
            break;
        }
        BranchPoint bp = make_point(sol, br.param, step);
        bp.jump = jump;
        br.points.push_back(std::move(bp));
        br.dp = dp;
        if (opts.checkpoint) opts.checkpoint(br);
        if (jump) {
            br.reason = Termination::jump_detected;
            std::ostringstream os;
            os << "jump at " << to_string(br.param) << "=" << next << " to " << br.points.back().sigma.str();
            br.diagnostic = os.str();
            if (opts.stop_on_jump) break;
        }
        if (++streak >= opts.grow_after) {
            dp = std::min(dp * opts.grow, opts.dp_max);
            streak = 0;
        }
    }
    br.dp = dp;
}

std::vector<std::pair<int, double>> bifurcation_points(double n, int l_max) {
    if (!(n > 0)) throw std::domain_error("n must be positive");
    std::vector<std::pair<int, double>> out;
    for (int l = 1; l <= l_max; ++l)
        if (l > 4.0 / n) out.emplace_back(l, n + 1 - 4.0 / l);
    return out;
}

std::vector<double> mu_points(int l_max) {
    if (l_max < 2) throw std::invalid_argument("l_max must be at least 2");
    std::vector<double> out;
    for (int l = 2; l <= l_max; l += 2) out.push_back(1.0 / l);
    return out;
}

} // namespace blowup
