#include "blowup/collocation.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blowup {

std::string to_string(BvpStatus s) {
    switch (s) {
    case BvpStatus::converged: return "converged";
    case BvpStatus::newton_failure: return "newton_failure";
    case BvpStatus::mesh_overflow: return "mesh_overflow";
    }
    return "?";
}

namespace {

struct MeshOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void hermite(double x0, double h, const Vec& y0, const Vec& f0, const Vec& y1, const Vec& f1, double x, Vec& y,
             Vec& dy) {
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const double d00 = (6 * t2 - 6 * t) / h, d10 = 3 * t2 - 4 * t + 1, d01 = (-6 * t2 + 6 * t) / h, d11 = 3 * t2 - 2 * t;
    y = h00 * y0 + h * h10 * f0 + h01 * y1 + h * h11 * f1;
    dy = d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1;
}

void jacobian_of(const BvpProblem& pb, double x, const Vec& y, Mat& J) {
    const int d = pb.dimension;
    J.resize(d, d);
    if (pb.jacobian) {
        pb.jacobian(x, y, J);
        return;
    }
    const double step0 = std::sqrt(std::numeric_limits<double>::epsilon());
    Vec yp = y, fp(d), fm(d);
    for (int j = 0; j < d; ++j) {
        const double hj = step0 * std::max(1.0, std::abs(y[j]));
        yp[j] = y[j] + hj;
        pb.rhs(x, yp, fp);
        yp[j] = y[j] - hj;
        pb.rhs(x, yp, fm);
        yp[j] = y[j];
        J.col(j) = (fp - fm) / (2 * hj);
    }
}

void bc_jacobian_of(const BvpProblem& pb, const Vec& ya, const Vec& yb, Mat& Ja, Mat& Jb) {
    const int d = pb.dimension;
    Ja.resize(d, d);
    Jb.resize(d, d);
    if (pb.bc_jacobian) {
        pb.bc_jacobian(ya, yb, Ja, Jb);
        return;
    }
    const double step0 = std::sqrt(std::numeric_limits<double>::epsilon());
    Vec rp(d), rm(d), a = ya, b = yb;
    for (int j = 0; j < d; ++j) {
        const double hj = step0 * std::max(1.0, std::abs(ya[j]));
        a[j] = ya[j] + hj;
        pb.bc(a, yb, rp);
        a[j] = ya[j] - hj;
        pb.bc(a, yb, rm);
        a[j] = ya[j];
        Ja.col(j) = (rp - rm) / (2 * hj);
    }
    for (int j = 0; j < d; ++j) {
        const double hj = step0 * std::max(1.0, std::abs(yb[j]));
        b[j] = yb[j] + hj;
        pb.bc(ya, b, rp);
        b[j] = yb[j] - hj;
        pb.bc(ya, b, rm);
        b[j] = yb[j];
        Jb.col(j) = (rp - rm) / (2 * hj);
    }
}

class Collocation {
public:
    Collocation(const BvpProblem& pb, const std::vector<double>& x) : pb_(pb), x_(x), d_(pb.dimension) {}

    std::size_t unknowns() const { return x_.size() * d_; }

    // Residual of the collocation equations; optionally the sparse Jacobian.
    bool residual(const Vec& Z, Vec& phi, Eigen::SparseMatrix<double>* jac) const {
        const std::size_t N = x_.size();
        const int d = d_;
        phi.resize(static_cast<Eigen::Index>(N * d));
        Mat F(d, N);
        std::vector<Mat> Jn;
        if (jac) Jn.resize(N);
        Vec fi(d);
        for (std::size_t i = 0; i < N; ++i) {
            const Vec yi = Z.segment(i * d, d);
            pb_.rhs(x_[i], yi, fi);
            F.col(i) = fi;
            if (jac) jacobian_of(pb_, x_[i], yi, Jn[i]);
        }
        if (!F.allFinite()) return false;

        std::vector<Eigen::Triplet<double>> trip;
        if (jac) trip.reserve(N * d * d * 2 + 2 * d * d);

        Vec r(d);
        const Vec ya = Z.segment(0, d), yb = Z.segment((N - 1) * d, d);
        pb_.bc(ya, yb, r);
        phi.segment(0, d) = r;
        if (jac) {
            Mat Ja, Jb;
            bc_jacobian_of(pb_, ya, yb, Ja, Jb);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    if (Ja(a, b) != 0.0) trip.emplace_back(a, b, Ja(a, b));
                    if (Jb(a, b) != 0.0) trip.emplace_back(a, static_cast<int>((N - 1) * d) + b, Jb(a, b));
                }
        }

        const Mat I = Mat::Identity(d, d);
        Vec ym(d), fm(d);
        Mat Jm;
        for (std::size_t i = 0; i + 1 < N; ++i) {
            const double h = x_[i + 1] - x_[i];
            const auto y0 = Z.segment(i * d, d);
            const auto y1 = Z.segment((i + 1) * d, d);
            ym = 0.5 * (y0 + y1) - h / 8 * (F.col(i + 1) - F.col(i));
            const double xm = x_[i] + 0.5 * h;
            pb_.rhs(xm, ym, fm);
            phi.segment((i + 1) * d, d) = y1 - y0 - h / 6 * (F.col(i) + 4 * fm + F.col(i + 1));
            if (jac) {
                jacobian_of(pb_, xm, ym, Jm);
                const Mat A = -I - h / 6 * (Jn[i] + 4 * Jm * (0.5 * I + h / 8 * Jn[i]));
                const Mat B = I - h / 6 * (Jn[i + 1] + 4 * Jm * (0.5 * I - h / 8 * Jn[i + 1]));
                const int row = static_cast<int>((i + 1) * d);
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) {
                        if (A(a, b) != 0.0) trip.emplace_back(row + a, static_cast<int>(i * d) + b, A(a, b));
                        if (B(a, b) != 0.0) trip.emplace_back(row + a, static_cast<int>((i + 1) * d) + b, B(a, b));
                    }
            }
        }
        if (!phi.allFinite()) return false;
        if (jac) {
            jac->resize(static_cast<Eigen::Index>(N * d), static_cast<Eigen::Index>(N * d));
            jac->setFromTriplets(trip.begin(), trip.end());
            jac->makeCompressed();
        }
        return true;
    }

private:
    const BvpProblem& pb_;
    const std::vector<double>& x_;
    int d_;
};

Vec flatten(const Mat& S) {
    return Eigen::Map<const Vec>(S.data(), S.size());
}

Mat unflatten(const Vec& Z, int d) {
    return Eigen::Map<const Mat>(Z.data(), d, Z.size() / d);
}

double weighted_max(const Vec& dz, const Vec& z, double rtol, double atol) {
    double m = 0;
    for (Eigen::Index k = 0; k < dz.size(); ++k) m = std::max(m, std::abs(dz[k]) / (atol + rtol * std::abs(z[k])));
    return m;
}

struct NewtonResult {
    bool ok = false;
    bool refinable = false;
    int iterations = 0;
    std::string message;
};

NewtonResult newton(const BvpProblem& pb, const std::vector<double>& x, Vec& Z, const BvpOptions& o) {
    Collocation col(pb, x);
    NewtonResult res;
    Eigen::SparseMatrix<double> J;
    Vec phi, phit;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool pattern = false;
    for (int it = 0; it < o.max_newton; ++it) {
        if (!col.residual(Z, phi, &J)) {
            res.message = "non-finite residual";
            return res;
        }
        if (!pattern) {
            lu.analyzePattern(J);
            pattern = true;
        }
        lu.factorize(J);
        ++res.iterations;
        if (lu.info() != Eigen::Success) {
            res.message = "singular collocation jacobian";
            return res;
        }
        const Vec dz = -lu.solve(phi);
        if (!dz.allFinite()) {
            res.message = "non-finite newton step";
            return res;
        }
        if (weighted_max(dz, Z, o.rtol, o.atol) <= 0.1) {
            Z += dz;
            res.ok = true;
            return res;
        }
        const double n0 = dz.norm();
        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 8; ++halving) {
            const Vec Zt = Z + lambda * dz;
            if (col.residual(Zt, phit, nullptr)) {
                const Vec dzt = lu.solve(phit);
                if (dzt.allFinite() && dzt.norm() <= (1.0 - 0.5 * lambda) * n0) {
                    Z = Zt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            res.message = "damped newton step not contracting after 8 halvings";
            res.refinable = true;
            return res;
        }
    }
    res.message = "newton iteration limit reached";
    res.refinable = true;
    return res;
}

Mat slopes_of(const BvpProblem& pb, const std::vector<double>& x, const Mat& S) {
    Mat F(S.rows(), S.cols());
    Vec f(S.rows());
    for (Eigen::Index i = 0; i < S.cols(); ++i) {
        pb.rhs(x[i], S.col(i), f);
        F.col(i) = f;
    }
    return F;
}

} // namespace

Vec BvpSolution::operator()(double x) const {
    Vec y, dy;
    eval(x, y, dy);
    return y;
}

void BvpSolution::eval(double x, Vec& y, Vec& dy) const {
    const auto& nd = mesh.nodes;
    if (x <= nd.front()) x = nd.front();
    if (x >= nd.back()) x = nd.back();
    auto it = std::upper_bound(nd.begin(), nd.end(), x);
    std::size_t i = it == nd.begin() ? 0 : static_cast<std::size_t>(it - nd.begin()) - 1;
    if (i + 1 >= nd.size()) i = nd.size() - 2;
    hermite(nd[i], nd[i + 1] - nd[i], states.col(i), slopes.col(i), states.col(i + 1), slopes.col(i + 1), x, y, dy);
}

Mat interpolate_states(const BvpSolution& sol, const std::vector<double>& x) {
    Mat out(sol.states.rows(), static_cast<Eigen::Index>(x.size()));
    Vec y, dy;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sol.eval(x[k], y, dy);
        out.col(k) = y;
    }
    return out;
}

std::vector<double> interval_residuals(const Mesh& mesh, const Mat& S, const BvpProblem& pb, double rtol,
                                       double atol) {
    // L2 norm of the scaled defect over each interval, by five-point Lobatto quadrature
    // (the defect vanishes at the nodes and the midpoint of a collocation solution).
    static const double pts[3] = {0.5 - 0.5 * 0.6546536707079771, 0.5, 0.5 + 0.5 * 0.6546536707079771};
    static const double wts[3] = {49.0 / 90, 32.0 / 45, 49.0 / 90};
    const auto& x = mesh.nodes;
    const Mat F = slopes_of(pb, x, S);
    const double floor = atol / rtol;
    std::vector<double> out(x.size() - 1, 0.0);
    Vec y, dy, f(S.rows());
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i];
        double acc = 0;
        for (int k = 0; k < 3; ++k) {
            const double xs = x[i] + pts[k] * h;
            hermite(x[i], h, S.col(i), F.col(i), S.col(i + 1), F.col(i + 1), xs, y, dy);
            pb.rhs(xs, y, f);
            double sq = 0;
            for (Eigen::Index j = 0; j < f.size(); ++j) {
                const double r = (dy[j] - f[j]) / std::max(std::abs(f[j]), floor);
                sq += r * r;
            }
            acc += wts[k] * sq;
        }
        const double r = std::sqrt(0.5 * h * acc);
        out[i] = std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
    }
    return out;
}

double residual_norm(const BvpSolution& sol, const BvpProblem& pb) {
    if (sol.states.rows() != pb.dimension) throw std::invalid_argument("dimension mismatch");
    const auto r = interval_residuals(sol.mesh, sol.states, pb, sol.rtol, sol.atol);
    return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

Mesh refine_mesh(const BvpSolution& sol, double target, bool coarsen) {
    const auto& x = sol.mesh.nodes;
    const auto& r = sol.interval_residuals;
    if (r.size() + 1 != x.size()) throw std::invalid_argument("solution carries no residual estimate");
    std::vector<double> out;
    out.reserve(x.size() * 2);
    out.push_back(x.front());
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (coarsen && i + 2 < x.size() && r[i] < target / 64 && r[i + 1] < target / 64) {
            out.push_back(x[i + 2]);
            ++i;
            continue;
        }
        int k = 1;
        if (r[i] > target) k = static_cast<int>(std::clamp(std::ceil(std::pow(r[i] / target, 1.0 / 3.5)), 2.0, 4.0));
        const double h = x[i + 1] - x[i];
        for (int j = 1; j < k; ++j) out.push_back(x[i] + h * j / k);
        out.push_back(x[i + 1]);
    }
    if (out.size() > sol.mesh.max_nodes) throw MeshOverflow("refined mesh exceeds max_nodes");
    return Mesh(std::move(out), sol.mesh.max_nodes);
}

BvpSolution solve_bvp(const BvpProblem& pb, double rtol, double atol, std::size_t max_nodes) {
    BvpOptions o;
    o.rtol = rtol;
    o.atol = atol;
    o.max_nodes = max_nodes;
    return solve_bvp(pb, o);
}

BvpSolution solve_bvp(const BvpProblem& pb, const BvpOptions& o) {
    if (!(o.rtol > 0) || !(o.atol > 0)) throw std::invalid_argument("tolerances must be positive");
    if (pb.dimension <= 0 || !pb.rhs || !pb.bc) throw std::invalid_argument("incomplete problem");
    pb.mesh.validate();
    if (pb.guess.rows() != pb.dimension || pb.guess.cols() != static_cast<Eigen::Index>(pb.mesh.size()))
        throw std::invalid_argument("guess shape does not match the mesh");
    if (!pb.guess.allFinite()) throw std::invalid_argument("guess is not finite");

    BvpSolution sol;
    sol.rtol = o.rtol;
    sol.atol = o.atol;
    sol.mesh = Mesh(pb.mesh.nodes, std::min(o.max_nodes, pb.mesh.max_nodes));
    if (sol.mesh.size() > sol.mesh.max_nodes) throw std::invalid_argument("initial mesh exceeds max_nodes");
    Vec Z = flatten(pb.guess);
    int failed_passes = 0;

    for (int pass = 0; pass <= o.max_refinements; ++pass) {
        const NewtonResult nr = newton(pb, sol.mesh.nodes, Z, o);
        sol.newton_iterations += nr.iterations;
        sol.states = unflatten(Z, pb.dimension);
        sol.slopes = slopes_of(pb, sol.mesh.nodes, sol.states);
        sol.interval_residuals = interval_residuals(sol.mesh, sol.states, pb, o.rtol, o.atol);
        sol.residual = *std::max_element(sol.interval_residuals.begin(), sol.interval_residuals.end());
        if (!nr.ok) {
            // a failed pass may still be refined from its last iterate, a bounded number of times
            if (++failed_passes > o.max_failed_passes || !nr.refinable || !std::isfinite(sol.residual) ||
                pass == o.max_refinements) {
                sol.status = BvpStatus::newton_failure;
                sol.diagnostic = nr.message;
                return sol;
            }
        } else
        if (sol.residual <= o.rtol) {
            if (o.coarsen) {
                // one coarsening pass is only kept when it still meets the tolerance
                Mesh c;
                try {
                    c = refine_mesh(sol, o.rtol, true);
                } catch (const MeshOverflow&) {
                    c = sol.mesh;
                }
                if (c.size() < sol.mesh.size()) {
                    BvpProblem sub = pb;
                    sub.mesh = c;
                    sub.guess = interpolate_states(sol, c.nodes);
                    BvpOptions so = o;
                    so.coarsen = false;
                    so.max_refinements = 0;
                    BvpSolution s2 = solve_bvp(sub, so);
                    if (s2.converged()) {
                        s2.newton_iterations += sol.newton_iterations;
                        return s2;
                    }
                }
            }
            sol.status = BvpStatus::converged;
            return sol;
        }
        if (pass == o.max_refinements) break;
        Mesh next;
        try {
            next = refine_mesh(sol, o.rtol, false);
        } catch (const MeshOverflow&) {
            sol.status = BvpStatus::mesh_overflow;
            sol.diagnostic = "required mesh exceeds max_nodes";
            return sol;
        }
        const Mat S = interpolate_states(sol, next.nodes);
        sol.mesh = next;
        Z = flatten(S);
    }
    sol.status = BvpStatus::mesh_overflow;
    sol.diagnostic = "refinement limit reached";
    return sol;
}

} // namespace blowup
