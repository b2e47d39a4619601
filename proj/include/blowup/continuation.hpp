#pragma once

#include "blowup/profiles.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace blowup {

enum class ContinuationParam { p, mu };

std::string to_string(ContinuationParam c);
ContinuationParam continuation_param_from_string(const std::string& s);

struct BranchPoint {
    double param = 0;
    ProfileSolution solution;
    double F0 = 0;       // F(0) in the solution's own form
    double sup = 0;      // sup |F|
    MultiIndex sigma;
    double step = 0;     // increment that produced this point (0 for the seed)
    bool jump = false;
};

enum class Termination { completed, jump_detected, step_underflow, newton_failure };

std::string to_string(Termination t);

struct Branch {
    ContinuationParam param = ContinuationParam::p;
    double target = 0;
    std::vector<BranchPoint> points;
    Termination reason = Termination::completed;
    std::string diagnostic;
    double dp = 0; // increment to use when the branch is resumed
};

struct ContinuationOptions {
    double dp0 = 1e-2;
    double dp_min = 1e-5;
    double dp_max = 5e-2;
    int max_halvings = 10;
    int grow_after = 3;
    double grow = 1.5;
    int max_newton = 10;     // per Newton solve; running out triggers a halving
    double jump_threshold = 0.3;
    bool stop_on_jump = true;
    double tol = 0;          // 0 keeps the seed's tolerance
    double eps = 0;          // 0 keeps the seed's regularization
    std::size_t max_nodes = kDefaultMaxNodes;
    // Called after every accepted point; a throwing callback aborts the branch.
    std::function<void(const Branch&)> checkpoint;
};

// Follows a profile in p (the far side of p = n+1 included) or in the drift coefficient mu.
Branch continue_branch(const ProfileSolution& start, ContinuationParam param, double target,
                       const ContinuationOptions& opts = {});

// Continues an existing branch from its last accepted point towards `target`.
void resume_branch(Branch& branch, double target, const ContinuationOptions& opts = {});

// p_l = n+1 - 4/l for integers 4/n < l <= l_max.
std::vector<std::pair<int, double>> bifurcation_points(double n, int l_max);

// mu_l = 1/l for even l <= l_max.
std::vector<double> mu_points(int l_max);

// F_general(y) = C G(y/a) with C = F_*, a^4 = (p-1) C^alpha; S profiles count as normalized.
ProfileSolution rescale_form(const ProfileSolution& sol, Form target);

// Profile of `sol` carried to parameters (n, p) through the normalized form.
ProfileGuess transfer_guess(const ProfileSolution& sol, const ProfileProblemSpec& target);

// Multiindex change, or relative sup distance on the common domain above `threshold`.
bool detect_jump(const BranchPoint& prev, const ProfileSolution& next, double threshold = 0.3);

// sup |a - b| / sup |b| over the common part of the two domains.
double relative_distance(const ProfileSolution& a, const ProfileSolution& b);

} // namespace blowup
