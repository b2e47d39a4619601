#pragma once

#include <Eigen/Dense>

#include <vector>

namespace blowup {

// Decay rate d in |F(y)| <= D exp(-d |y|^{4/3}).
double kernel_decay_rate();

/// Rescaled bi-harmonic kernel F(y) = (1/pi) int_0^inf exp(-k^4) cos(ky) dk and the
/// eigenfunctions psi_l = (-1)^l F^{(l)} / sqrt(l!) of B = -D^4 + (y/4) D + 1/4.
///
/// The Fourier integral is evaluated on the line Im k = (|y|/32)^{1/3} through the saddle
/// points, with Gauss-Legendre panels up to where the integrand has dropped by `drop` orders
/// of e. Values keep their relative accuracy in the far tails.
class SpectralBasis {
public:
    explicit SpectralBasis(int l_max = 8, int panels = 48, double drop = 45.0);

    int l_max() const { return l_max_; }
    int panels() const { return panels_; }
    double weight_a() const { return weight_a_; }

    double kernel(double y) const { return kernel_deriv(0, y); }
    // F^{(l)}(y) for any l >= 0.
    double kernel_deriv(int l, double y) const;
    // F^{(0)}, ..., F^{(lmax)} at y sharing one set of exponentials.
    std::vector<double> kernel_derivs(int lmax, double y) const;
    double eigenfunction(int l, double y) const;

private:
    int l_max_, panels_;
    double drop_, weight_a_;
    std::vector<double> gx_, gw_; // Gauss-Legendre rule on [0, 1]
};

// Coefficients of psi_l^*(y) in ascending powers of y.
std::vector<double> adjoint_poly(int l);

// Coefficients of B* p = -p'''' - (y/4) p'.
std::vector<double> apply_adjoint(const std::vector<double>& p);

// Dual pairing <psi_l, psi_k^*> for l, k <= l_max by quadrature over |y| <= Y.
Eigen::MatrixXd biorthogonality(const SpectralBasis& basis, int l_max, double Y = 80.0);

// int F dy over |y| <= Y.
double kernel_mass(const SpectralBasis& basis, double Y = 80.0);

// u_l(x, t) = e^{-t} t^{-(1+l)/4} psi_l(x / t^{1/4}).
double linear_pattern(const SpectralBasis& basis, int l, double x, double t);

} // namespace blowup
