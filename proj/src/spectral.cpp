#include "blowup/spectral.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace blowup {

namespace {

using cd = std::complex<double>;
constexpr int kOrder = 16;

double factorial(int l) { return std::tgamma(l + 1.0); }

// Gauss-Legendre rule mapped to [0, 1].
void unit_rule(std::vector<double>& gx, std::vector<double>& gw) {
    using rule = boost::math::quadrature::gauss<double, kOrder>;
    for (std::size_t i = 0; i < rule::abscissa().size(); ++i) {
        gx.push_back(0.5 * (1 - rule::abscissa()[i]));
        gw.push_back(0.5 * rule::weights()[i]);
        gx.push_back(0.5 * (1 + rule::abscissa()[i]));
        gw.push_back(0.5 * rule::weights()[i]);
    }
}

// Gauss-Legendre panels over [-Y, Y] of width about 0.5.
template <class F>
void for_each_y(const std::vector<double>& gx, const std::vector<double>& gw, double Y, F&& f) {
    const int P = static_cast<int>(std::ceil(2 * Y / 0.5));
    const double h = 2 * Y / P;
    for (int p = 0; p < P; ++p)
        for (std::size_t j = 0; j < gx.size(); ++j) f(-Y + h * (p + gx[j]), h * gw[j]);
}

} // namespace

double kernel_decay_rate() { return 3.0 * std::pow(2.0, -11.0 / 3.0); }

SpectralBasis::SpectralBasis(int l_max, int panels, double drop)
    : l_max_(l_max), panels_(panels), drop_(drop), weight_a_(kernel_decay_rate()) {
    if (l_max < 0 || panels < 1 || !(drop > 0)) throw std::invalid_argument("invalid spectral basis parameters");
    unit_rule(gx_, gw_);
}

std::vector<double> SpectralBasis::kernel_derivs(int lmax, double y) const {
    if (lmax < 0) throw std::invalid_argument("derivative order must be non-negative");
    const double ay = std::abs(y);
    const double c = std::cbrt(ay / 32.0);
    auto expo = [&](double x) {
        const cd k(x, c);
        return -k * k * k * k + cd(0, 1) * k * ay;
    };
    // peak of the integrand along the line, then the point where it has dropped by drop_
    const double xs = std::sqrt(3.0) * c;
    const double peak = std::max(expo(0).real(), expo(xs).real());
    double X = xs + 1;
    while (expo(X).real() > peak - drop_) X *= 1.1;

    std::vector<cd> acc(static_cast<std::size_t>(lmax) + 1, cd(0));
    const double h = X / panels_;
    for (int p = 0; p < panels_; ++p)
        for (std::size_t j = 0; j < gx_.size(); ++j) {
            const double x = h * (p + gx_[j]);
            const cd k(x, c);
            cd term = std::exp(expo(x)) * (h * gw_[j]);
            const cd ik = cd(0, 1) * k;
            for (int l = 0; l <= lmax; ++l) {
                acc[static_cast<std::size_t>(l)] += term;
                term *= ik;
            }
        }
    std::vector<double> out(acc.size());
    for (std::size_t l = 0; l < acc.size(); ++l) {
        double v = acc[l].real() / std::numbers::pi;
        if (y < 0 && (l % 2 == 1)) v = -v;
        out[l] = v;
    }
    return out;
}

double SpectralBasis::kernel_deriv(int l, double y) const { return kernel_derivs(l, y)[static_cast<std::size_t>(l)]; }

double SpectralBasis::eigenfunction(int l, double y) const {
    if (l < 0 || l > l_max_) throw std::out_of_range("eigenfunction index outside the basis");
    const double s = (l % 2 == 0 ? 1.0 : -1.0) / std::sqrt(factorial(l));
    return s * kernel_deriv(l, y);
}

std::vector<double> adjoint_poly(int l) {
    if (l < 0) throw std::invalid_argument("l must be non-negative");
    std::vector<double> c(static_cast<std::size_t>(l) + 1, 0.0);
    // D^{4j} y^l = l!/(l-4j)! y^{l-4j}
    for (int j = 0; 4 * j <= l; ++j) {
        double d = 1;
        for (int m = 0; m < 4 * j; ++m) d *= l - m;
        c[static_cast<std::size_t>(l - 4 * j)] += d / factorial(j);
    }
    const double s = 1 / std::sqrt(factorial(l));
    for (double& v : c) v *= s;
    return c;
}

std::vector<double> apply_adjoint(const std::vector<double>& p) {
    std::vector<double> out(p.size(), 0.0);
    for (std::size_t m = 0; m < p.size(); ++m) {
        if (m >= 4) out[m - 4] -= p[m] * static_cast<double>(m * (m - 1) * (m - 2) * (m - 3));
        out[m] -= 0.25 * static_cast<double>(m) * p[m];
    }
    return out;
}

Eigen::MatrixXd biorthogonality(const SpectralBasis& basis, int l_max, double Y) {
    if (l_max > basis.l_max()) throw std::out_of_range("l_max exceeds the basis");
    std::vector<std::vector<double>> polys;
    for (int k = 0; k <= l_max; ++k) polys.push_back(adjoint_poly(k));
    std::vector<double> gx, gw;
    unit_rule(gx, gw);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(l_max + 1, l_max + 1);
    for_each_y(gx, gw, Y, [&](double y, double w) {
        const auto d = basis.kernel_derivs(l_max, y);
        for (int l = 0; l <= l_max; ++l) {
            const double psi = (l % 2 == 0 ? 1.0 : -1.0) / std::sqrt(factorial(l)) * d[static_cast<std::size_t>(l)];
            for (int k = 0; k <= l_max; ++k) {
                double pk = 0;
                const auto& c = polys[static_cast<std::size_t>(k)];
                for (std::size_t m = c.size(); m-- > 0;) pk = pk * y + c[m];
                G(l, k) += w * psi * pk;
            }
        }
    });
    return G;
}

double kernel_mass(const SpectralBasis& basis, double Y) { return biorthogonality(basis, 0, Y)(0, 0); }

double linear_pattern(const SpectralBasis& basis, int l, double x, double t) {
    if (!(t > 0)) throw std::domain_error("t must be positive");
    const double s = std::pow(t, 0.25);
    return std::exp(-t) * std::pow(t, -(1.0 + l) / 4) * basis.eigenfunction(l, x / s);
}

} // namespace blowup
