#pragma once

#include "blowup/odeint.hpp"

#include <array>
#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace blowup {

// Coefficients of P_k(D) = prod_{j<k} (D + mu - j), highest derivative first.
std::vector<double> pk_coefficients(int k, double mu);

enum class InterfaceOrder { tw_third_order, profile_fourth_order };

// 3(n+1)/n or 4(n+1)/n; n may be +infinity.
double interface_exponent(double n, InterfaceOrder order);

enum class OscDirection { oscillatory, non_oscillatory };

struct OscSample {
    double s, phi, dphi, d2phi;
};

struct OscComponent {
    double n = 1;
    double mu = 6;
    OscDirection direction = OscDirection::oscillatory;
    double period = 0;
    double amplitude = 0;     // max |phi| over a period
    double scale = 1;         // phi = scale * psi, scale = K^{-(n+1)/n}
    double residual = 0;      // integral-form defect of phi'' over 64 windows per period, per unit s
    double symmetry_defect = 0; // max |phi(s) + phi(s + T/2)| / amplitude
    int sign_changes = 0;
    std::vector<OscSample> samples; // one period, starting where phi crosses zero upwards
    std::vector<double> return_distances;

    // Periodic Hermite interpolation of phi.
    double phi(double s) const;
};

struct OscOptions {
    std::array<double, 3> start{1.0, 0.0, 0.0}; // (psi, psi', psi'') in rescaled units
    std::size_t samples = 1200;
    PeriodicOptions periodic = short_transient();

    static PeriodicOptions short_transient() {
        PeriodicOptions p;
        p.transient = 40;
        return p;
    }
};

// Stable periodic orbit of P_3 phi = -|phi|^{-n/(n+1)} phi with mu = 3(n+1)/n.
// Throws std::runtime_error carrying the find_periodic diagnostic when no orbit is found.
OscComponent oscillatory_orbit(double n, const OscOptions& opts = {});

// Largest pointwise distance between two orbits of the same n after aligning their phase,
// relative to the amplitude of `a`.
double orbit_distance(const OscComponent& a, const OscComponent& b);

struct NonOscEquilibria {
    double phi_plus, phi_minus;
};

// Equilibria +-K^{-(n+1)/n} of P_3 phi = |phi|^{-n/(n+1)} phi, K = mu(mu-1)(mu-2).
NonOscEquilibria nonosc_equilibria(double n);

struct CharSpectrum {
    double mu = 0;
    std::array<std::complex<double>, 3> roots{};
    std::array<double, 4> coefficients{}; // monic cubic, leading first
    double vieta_defect = 0;
    bool all_stable = false; // every root has negative real part
};

// Linearization of the non-oscillatory component about its equilibria.
CharSpectrum char_spectrum(double mu);

enum class ExpansionBranch { oscillatory_2D, nonoscillatory_1D };

class LocalExpansion {
public:
    // Non-oscillatory bundle f(y) = (y - y0)^{3/n} K^{-1/n} for y0 < y <= y0 + window.
    LocalExpansion(double n, double y0, double window);
    // Oscillatory bundle F(y) = (y0 - y)^mu phi(ln(y0 - y) + s0) for y0 - window <= y < y0.
    LocalExpansion(const OscComponent& component, double y0, double s0, double window);

    ExpansionBranch branch() const { return branch_; }
    double mu() const { return mu_; }
    // Throws std::domain_error outside the validity window.
    double operator()(double y) const;

private:
    ExpansionBranch branch_;
    double n_, y0_, s0_ = 0, window_, mu_;
    OscComponent comp_;
};

} // namespace blowup
