#include <doctest.h>

#include <cmath>

#include "liouville/quadrature.hpp"
#include "liouville/stats.hpp"

using namespace liouville;

TEST_CASE("polynomials and smooth integrands") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("integrable endpoint singularity") {
    // int_0^1 1/sqrt(x) dx = 2
    const double v = integrate([](double x) { return 1.0 / std::sqrt(x); }, 1e-300, 1.0);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("half line integrals") {
    CHECK(integrate_half_line([](double x) { return std::exp(-x); }, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-10));
    // Gaussian tail: int_0^inf e^{-x^2} dx = sqrt(pi)/2
    CHECK(integrate_half_line([](double x) { return std::exp(-x * x); }, 0.0) ==
          doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-10));
    // Shifted start: int_1^inf e^{-x} dx = 1/e
    CHECK(integrate_half_line([](double x) { return std::exp(-x); }, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("pairwise sum and kahan agree with exact rationals") {
    std::vector<double> xs(1 << 12, 0.1);
    const double expected = 0.1 * double(1 << 12);
    CHECK(pairwise_sum(xs) == doctest::Approx(expected).epsilon(1e-14));
    KahanSum ks;
    for (double x : xs) ks.add(x);
    CHECK(ks.value() == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("weighted line fit recovers slope and errors") {
    std::vector<double> x{0, 1, 2, 3, 4}, y, s;
    for (double xi : x) {
        y.push_back(3.0 - 2.0 * xi);
        s.push_back(0.5);
    }
    const LineFit fit = fit_line(x, y, s);
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-12));
    // Known closed form for the slope error with equal sigma.
    CHECK(fit.slope_stderr == doctest::Approx(0.5 / std::sqrt(10.0)).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0));
}
