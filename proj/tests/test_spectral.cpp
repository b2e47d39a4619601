#include <doctest.h>

#include "blowup/spectral.hpp"

#include <cmath>

using namespace blowup;

namespace {
const SpectralBasis& basis() {
    static const SpectralBasis b(8);
    return b;
}
} // namespace

TEST_CASE("kernel values") {
    const auto& b = basis();
    // independent 30-digit quadrature of the real-axis integral
    CHECK(b.kernel(0) == doctest::Approx(0.288516869308234844).epsilon(1e-13));
    CHECK(b.kernel(0) == doctest::Approx(std::tgamma(1.25) / 3.14159265358979324).epsilon(1e-13));
    CHECK(b.kernel(1) == doctest::Approx(0.242665094564103721).epsilon(1e-13));
    CHECK(b.kernel(5) == doctest::Approx(-0.0272974057632752592).epsilon(1e-12));
    CHECK(b.kernel(-10) == doctest::Approx(-0.000428794353904739282).epsilon(1e-11));
    CHECK(kernel_mass(b) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("kernel equation and decay") {
    const auto& b = basis();
    double worst = 0;
    for (double y = -8; y <= 8; y += 0.05) {
        const auto d = b.kernel_derivs(4, y);
        worst = std::max(worst, std::abs(-d[4] + 0.25 * y * d[1] + 0.25 * d[0]));
    }
    CHECK(worst <= 1e-8);

    const double d = kernel_decay_rate();
    CHECK(d == doctest::Approx(3 * std::pow(2.0, -11.0 / 3)));
    double D = 0;
    for (double y = 0; y <= 10; y += 0.05) D = std::max(D, std::abs(b.kernel(y)) * std::exp(d * std::pow(y, 4.0 / 3)));
    CHECK(D < 1.0);
    for (double y = 10; y <= 60; y += 0.5) CHECK(std::abs(b.kernel(y)) <= 4 * D * std::exp(-d * std::pow(y, 4.0 / 3)));

    int changes = 0;
    double prev = b.kernel(0.01);
    for (double y = 0.1; y < 10; y += 0.01) {
        const double v = b.kernel(y);
        if ((v < 0) != (prev < 0)) ++changes;
        prev = v;
    }
    CHECK(changes >= 3);
}

TEST_CASE("eigenfunctions") {
    const auto& b = basis();
    for (double y : {-3.0, 0.0, 2.5}) CHECK(b.eigenfunction(0, y) == b.kernel(y));
    for (double y : {0.3, 1.7, 4.2}) CHECK(b.eigenfunction(1, y) + b.eigenfunction(1, -y) == doctest::Approx(0).scale(1e-14));
    for (int l = 0; l <= 4; ++l) {
        double worst = 0;
        const double s = (l % 2 == 0 ? 1.0 : -1.0) / std::sqrt(std::tgamma(l + 1.0));
        for (double y = -6; y <= 6; y += 0.1) {
            const auto d = b.kernel_derivs(l + 4, y);
            // B psi = -psi'''' + (y/4) psi' + psi/4
            const double Bpsi = s * (-d[l + 4] + 0.25 * y * d[l + 1] + 0.25 * d[l]);
            worst = std::max(worst, std::abs(Bpsi + 0.25 * l * s * d[l]));
        }
        CAPTURE(l);
        CHECK(worst <= 1e-6);
    }
    CHECK_THROWS(b.eigenfunction(9, 0.0));
}

TEST_CASE("adjoint polynomials") {
    CHECK(adjoint_poly(0) == std::vector<double>{1.0});
    CHECK(adjoint_poly(1) == std::vector<double>{0.0, 1.0});
    const auto p4 = adjoint_poly(4);
    CHECK(p4[0] == doctest::Approx(24 / std::sqrt(24.0)));
    CHECK(p4[4] == doctest::Approx(1 / std::sqrt(24.0)));
    for (int l = 0; l <= 8; ++l) {
        const auto p = adjoint_poly(l);
        const auto q = apply_adjoint(p);
        for (std::size_t m = 0; m < p.size(); ++m) CHECK(q[m] + 0.25 * l * p[m] == doctest::Approx(0).scale(1e-12));
    }
}

TEST_CASE("bi-orthonormality") {
    const auto G = biorthogonality(basis(), 6);
    CHECK((G - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(G(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(G(0, 2)) <= 1e-8);
    CHECK_THROWS(biorthogonality(SpectralBasis(4), 6));
}

TEST_CASE("quadrature refinement") {
    const SpectralBasis coarse(8, 48), fine(8, 96);
    for (double y : {0.0, 1.0, 3.3, 7.0, 10.0})
        for (int l : {0, 1, 4}) CHECK(std::abs(coarse.kernel_deriv(l, y) - fine.kernel_deriv(l, y)) < 1e-10);
    CHECK(std::abs(kernel_mass(coarse) - kernel_mass(fine)) < 1e-8);
}

TEST_CASE("linear patterns") {
    const auto& b = basis();
    CHECK(linear_pattern(b, 0, 0, 1) == doctest::Approx(std::exp(-1.0) * b.kernel(0)));
    CHECK(linear_pattern(b, 0, 0, 1) == doctest::Approx(0.10615).epsilon(1e-4));
    for (double t : {0.5, 1.0, 3.0}) CHECK(linear_pattern(b, 1, 0, t) == doctest::Approx(0).scale(1e-14));
    // u_l(x s^{1/4}, t s) = e^{-t(s-1)} s^{-(1+l)/4} u_l(x, t)
    const double x = 1.3, t = 0.7, s = 2.5;
    for (int l : {0, 2, 3}) {
        const double lhs = linear_pattern(b, l, x * std::pow(s, 0.25), t * s);
        const double rhs = std::exp(-t * (s - 1)) * std::pow(s, -(1.0 + l) / 4) * linear_pattern(b, l, x, t);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
    CHECK_THROWS_AS(linear_pattern(b, 0, 0, 0), std::domain_error);
}
