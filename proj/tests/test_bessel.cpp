#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "diracbox/bessel.hpp"
#include "diracbox/numerics.hpp"

using namespace diracbox;
using Catch::Approx;

// Independent oracle: the ascending power series
//   J_m(x) = sum_j (-1)^j (x/2)^(m+2j) / (j! (m+j)!)
// accumulated in long double. Fine up to x ~ 15 where cancellation is mild.
static double jm_series(int m, double x) {
    long double half = static_cast<long double>(x) / 2.0L;
    long double term = 1.0L;
    for (int i = 1; i <= m; ++i) term *= half / i;
    long double sum = term;
    for (int j = 1; j < 300; ++j) {
        term *= -half * half / (static_cast<long double>(j) * (m + j));
        sum += term;
        if (fabsl(term) < 1e-26L * (fabsl(sum) + 1e-30L)) break;
    }
    return static_cast<double>(sum);
}

TEST_CASE("backward recurrence matches the power series") {
    for (double x : {0.01, 0.1, 0.5, 1.0, 2.5, 5.0, 10.0}) {
        auto j = bessel_j_list(25, x);
        for (int m = 0; m <= 25; ++m) {
            CAPTURE(x, m);
            REQUIRE(j[m] == Approx(jm_series(m, x)).margin(5e-15));
        }
    }
}

TEST_CASE("backward recurrence matches the standard library") {
    for (double x : {0.3, 1.0, 4.7, 9.2, 14.8}) {
        auto j = bessel_j_list(20, x);
        for (int m = 0; m <= 20; ++m) {
            CAPTURE(x, m);
            REQUIRE(j[m] == Approx(std::cyl_bessel_j(m, x)).margin(1e-13));
        }
    }
}

TEST_CASE("spot values from the standard tables") {
    auto j1 = bessel_j_list(5, 1.0);
    REQUIRE(j1[0] == Approx(0.7651976865579666).margin(1e-15));
    REQUIRE(j1[1] == Approx(0.44005058574493355).margin(1e-15));
    auto j5 = bessel_j_list(5, 5.0);
    REQUIRE(j5[5] == Approx(0.26114054612017007).margin(1e-14));
    // first zero of J_0
    auto jz = bessel_j_list(0, 2.404825557695773);
    REQUIRE(std::abs(jz[0]) < 1e-14);
}

TEST_CASE("Neumann sum rule normalizes the list") {
    for (double x : {0.5, 2.0, 7.0}) {
        auto j = bessel_j_list(static_cast<int>(x) + 45, x);
        double s = j[0] * j[0];
        for (size_t m = 1; m < j.size(); ++m) s += 2.0 * j[m] * j[m];
        CAPTURE(x);
        REQUIRE(s == Approx(1.0).margin(1e-14));
    }
}

TEST_CASE("degenerate arguments") {
    auto j = bessel_j_list(10, 0.0);
    REQUIRE(j[0] == 1.0);
    for (int m = 1; m <= 10; ++m) REQUIRE(j[m] == 0.0);

    auto jt = bessel_j_list(3, 1e-12);
    REQUIRE(jt[1] == Approx(0.5e-12).epsilon(1e-12));

    REQUIRE_THROWS_AS(bessel_j_list(3, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(bessel_j_list(-1, 1.0), std::invalid_argument);
}

TEST_CASE("kick coefficients reconstruct the plane-wave phase") {
    // Defining identity of the expansion: sum_m b_m e^{i m theta} = e^{i eps cos theta}.
    for (double eps : {0.1, 0.5, 1.0, 2.0, -0.7}) {
        JacobiAngerSeries s = jacobi_anger_coeffs(eps, 1e-14);
        for (double theta : {0.0, 0.3, 1.1, 2.2, kPi}) {
            std::complex<double> acc = s.coeff(0);
            for (int m = 1; m <= s.order; ++m) {
                acc += s.coeff(m) * std::complex<double>(std::cos(m * theta), std::sin(m * theta));
                acc += s.coeff(-m) * std::complex<double>(std::cos(m * theta), -std::sin(m * theta));
            }
            std::complex<double> expect(std::cos(eps * std::cos(theta)),
                                        std::sin(eps * std::cos(theta)));
            CAPTURE(eps, theta);
            REQUIRE(std::abs(acc - expect) < 1e-13);
        }
    }
}

TEST_CASE("kick coefficient structure") {
    JacobiAngerSeries s = jacobi_anger_coeffs(0.8, 1e-14);
    // b_m = i^m J_m(eps), symmetric in the sign of m
    REQUIRE(s.coeff(0).real() == Approx(jm_series(0, 0.8)).margin(1e-14));
    REQUIRE(s.coeff(0).imag() == 0.0);
    REQUIRE(s.coeff(1).real() == 0.0);
    REQUIRE(s.coeff(1).imag() == Approx(jm_series(1, 0.8)).margin(1e-14));
    REQUIRE(s.coeff(2).real() == Approx(-jm_series(2, 0.8)).margin(1e-14));
    REQUIRE(s.coeff(2).imag() == 0.0);
    for (int m = 1; m <= s.order; ++m) REQUIRE(s.coeff(-m) == s.coeff(m));

    // the cutoff really is where the tail drops below tol
    REQUIRE(std::abs(jm_series(s.order + 1, 0.8)) < 1e-14);
    REQUIRE(std::abs(jm_series(s.order + 2, 0.8)) < 1e-14);

    // total weight of the coefficients is 1 (unitary pointwise phase)
    REQUIRE(s.sum_squares() == Approx(1.0).margin(1e-13));

    JacobiAngerSeries z = jacobi_anger_coeffs(0.0, 1e-14);
    REQUIRE(z.order == 0);
    REQUIRE(z.coeff(0) == std::complex<double>(1.0, 0.0));

    REQUIRE_THROWS_AS(jacobi_anger_coeffs(0.5, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(jacobi_anger_coeffs(0.5, 0.1), std::invalid_argument);
}
