#pragma once

#include "blowup/collocation.hpp"
#include "blowup/core.hpp"
#include "blowup/odeint.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace blowup {

enum class Form { f_form, S, general, normalized, sign_limit };
enum class Symmetry { even, odd };
enum class RightBc { compact_support, farfield };

std::string to_string(Form f);
std::string to_string(Symmetry s);
std::string to_string(RightBc b);
Form form_from_string(const std::string& s);
Symmetry symmetry_from_string(const std::string& s);
RightBc right_bc_from_string(const std::string& s);

struct ProfileProblemSpec {
    ProblemParams params{1.0, 2.0};
    Form form = Form::S;
    Symmetry symmetry = Symmetry::even;
    double R = 15.0;
    double eps = 1e-10;
    RightBc right_bc = RightBc::compact_support;
    // Replaces beta in the drift term when set (mu-branches).
    std::optional<double> drift;

    void validate() const;
    double drift_coefficient() const;
    // Equilibrium level of the unknown F in this form.
    double equilibrium() const;
    // Power-law index of F at the far field, F ~ y^Gamma.
    double farfield_power() const;
};

// Sensible defaults: S-form at p = n+1, general form elsewhere, boundary type by regime.
ProfileProblemSpec default_spec(double n, double p, Symmetry sym = Symmetry::even);
double default_radius(double n);

// Right-hand side F'''' = g(y, F, F') and its partial derivatives.
struct ProfileRhs {
    double c_lin = 0, c_a = 0, c_q = 0, c_y = 0, alpha = 0, q = 0, eps = 0;
    explicit ProfileRhs(const ProfileProblemSpec& spec);
    double operator()(double y, double F, double dF) const;
    void partials(double y, double F, double dF, double& dg_dF, double& dg_ddF) const;
};

BvpProblem build_system(const ProfileProblemSpec& spec);

struct ProfileGuess {
    std::vector<double> y;
    Mat states; // 4 x y.size(), rows F, F', F'', F'''
};

ProfileGuess cap_guess(const ProfileProblemSpec& spec, double amplitude = 0.0, double half_width = 0.0);

class ProfileSolution {
public:
    ProfileProblemSpec spec;
    Mesh mesh;
    std::vector<double> F, dF, d2F, d3F;
    double residual = 0.0;
    double tol = 1e-10;
    BvpStatus status = BvpStatus::newton_failure;
    int newton_iterations = 0;
    std::optional<double> y0;
    std::optional<int> zero_count;
    std::optional<MultiIndex> sigma;
    std::string diagnostic;

    bool converged() const { return status == BvpStatus::converged; }

    static ProfileSolution from_bvp(const ProfileProblemSpec& spec, const BvpSolution& bvp, double tol);
    static ProfileSolution from_arrays(const ProfileProblemSpec& spec, Mesh mesh, std::vector<double> F,
                                       std::vector<double> dF, std::vector<double> d2F, std::vector<double> d3F);

    BvpSolution bvp() const;
    // State (F, F', F'', F''') at any y in [-R, R], continued by the symmetry.
    std::array<double, 4> eval(double y) const;
    double value(double y) const { return eval(y)[0]; }
    double F_at_origin() const { return F.front(); }
    double sup_norm() const;
    double l2_norm() const; // over the full symmetric domain
    ProfileGuess as_guess() const;
    // Residual of the stored data against the spec's own system.
    double recompute_residual() const;
};

struct ProfileSolveOptions {
    double tol = 1e-10;
    bool ladder = true;
    double eps_start = 1e-3;
    std::size_t max_nodes = kDefaultMaxNodes;
    std::size_t initial_nodes = 401;
    bool coarsen = false;
    int max_newton = 40; // per mesh
    bool analyse = true; // attach interface estimate and multiindex
};

ProfileSolution solve_profile(const ProfileProblemSpec& spec, const ProfileGuess& guess,
                              const ProfileSolveOptions& opts = {});
ProfileSolution solve_profile(const ProfileProblemSpec& spec, const ProfileGuess& guess, double tol);

struct Energy {
    double E = 0, H0 = 0, r0 = 0, H_tilde = 0;
    bool fibering_defined = false;
};

// Functionals over the full symmetric domain of the solution.
Energy energy(const ProfileSolution& sol, double n);
// Same functionals for an arbitrary profile given by values and second derivatives on a grid.
Energy energy(const std::vector<double>& y, const std::vector<double>& F, const std::vector<double>& d2F, double n);

struct FarField {
    double C0 = 1, C1 = 0, gamma = 0, nu = 0, b0 = 0;
    FarField(double n, double p, double C0, double C1 = 0.0);
};

double farfield_eval(const FarField& ff, double n, double p, double y);
double final_time(const FarField& ff, double x);
// Least-squares slope of log f against log y over [a, b].
double tail_slope(const ProfileSolution& sol, double a, double b);
// C0 read off the far-field end of an LS profile.
double farfield_constant(const ProfileSolution& sol);

MultiIndex classify(const ProfileSolution& sol, double tail_threshold = 1e-4);

struct InterfaceEstimate {
    double y0 = 0;
    int zero_count = 0;
    double fitted_slope = 0;      // free three-parameter fit of lobe maxima
    double free_fit_y0 = 0;
    std::vector<double> zeros;
    std::vector<std::pair<double, double>> lobes; // (position, signed extremum)
};

InterfaceEstimate interface_estimate(const ProfileSolution& sol);

// Sum of sign_i * base(y - shift_i) sampled on a fresh grid covering every copy.
ProfileGuess glue_guess(const std::vector<std::pair<int, double>>& components, const ProfileSolution& base,
                        std::size_t nodes = 2001);

struct SpatialOrbit {
    double F2_origin = 0;
    double max_value = 0;
    double min_value = 0;
    double mean_value = 0;
    double period = 0;
    double window = 0; // length of the bounded stretch before escape
    Trajectory trajectory;
};

SpatialOrbit periodic_spatial(double n, double F0 = 1.5, double F2_hint = -0.3787329255);

// F_general(y) = C * G(y / a) links the general and normalized forms.
struct FormScaling {
    double C, a;
};
FormScaling form_scaling(double n, double p);

} // namespace blowup
