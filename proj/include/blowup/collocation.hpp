#pragma once

#include "blowup/core.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace blowup {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct BvpProblem {
    int dimension = 0;
    std::function<void(double x, const Vec& y, Vec& f)> rhs;
    // Optional; central differences are used when empty.
    std::function<void(double x, const Vec& y, Mat& J)> jacobian;
    std::function<void(const Vec& ya, const Vec& yb, Vec& r)> bc;
    std::function<void(const Vec& ya, const Vec& yb, Mat& Ja, Mat& Jb)> bc_jacobian;
    Mesh mesh;
    Mat guess; // dimension x nodes
};

enum class BvpStatus { converged, newton_failure, mesh_overflow };

std::string to_string(BvpStatus s);

struct BvpOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    std::size_t max_nodes = kDefaultMaxNodes;
    int max_newton = 40;      // per mesh
    int max_refinements = 60;
    // Newton failures on a mesh that are followed by refinement before giving up.
    int max_failed_passes = 3;
    bool coarsen = false;
};

/// Piecewise-cubic collocation solution; columns of `states` and `slopes` follow the mesh.
class BvpSolution {
public:
    Mesh mesh;
    Mat states;
    Mat slopes;
    double residual = 0.0;
    std::vector<double> interval_residuals;
    int newton_iterations = 0;
    BvpStatus status = BvpStatus::newton_failure;
    std::string diagnostic;
    double rtol = 1e-10;
    double atol = 1e-10;

    bool converged() const { return status == BvpStatus::converged; }
    Vec operator()(double x) const;
    // Value and derivative of the interpolant.
    void eval(double x, Vec& y, Vec& dy) const;
};

BvpSolution solve_bvp(const BvpProblem& problem, const BvpOptions& opts);
BvpSolution solve_bvp(const BvpProblem& problem, double rtol, double atol, std::size_t max_nodes = kDefaultMaxNodes);

// Per-interval L2 norm of the scaled defect of the interpolant.
std::vector<double> interval_residuals(const Mesh& mesh, const Mat& states, const BvpProblem& problem,
                                       double rtol, double atol);

double residual_norm(const BvpSolution& solution, const BvpProblem& problem);

Mesh refine_mesh(const BvpSolution& solution, double target, bool coarsen = false);

// Hermite interpolation of node data onto another mesh inside the same interval.
Mat interpolate_states(const BvpSolution& solution, const std::vector<double>& x);

} // namespace blowup
