#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "liouville/brownian.hpp"
#include "liouville/kernels.hpp"
#include "liouville/rng.hpp"
#include "oracles.hpp"

using namespace liouville;

TEST_CASE("massive green matches the bessel oracle") {
    CHECK(eval_massive_green(1.0, 1.0) == doctest::Approx(0.421024).epsilon(1e-5));
    for (double r : {1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double reference = oracle::k0(r);
        CHECK(std::abs(eval_massive_green(1.0, r) - reference) <=
              1e-8 * reference);
    }
}

TEST_CASE("massive green depends on m r only") {
    CHECK(eval_massive_green(2.0, 0.5) ==
          doctest::Approx(eval_massive_green(1.0, 1.0)).epsilon(1e-10));
    CHECK(eval_massive_green(4.0, 0.25) ==
          doctest::Approx(eval_massive_green(1.0, 1.0)).epsilon(1e-10));
}

TEST_CASE("massive green log asymptotics near zero") {
    // G_m(r) + ln r extends continuously to 0 with small total variation.
    double prev = eval_massive_green(1.0, 0.1) + std::log(0.1);
    double variation = 0.0;
    for (int i = 1; i <= 40; ++i) {
        const double r = 0.1 * std::pow(0.002 / 0.1, i / 40.0);
        const double g = eval_massive_green(1.0, r) + std::log(r);
        variation += std::abs(g - prev);
        prev = g;
        CHECK(std::abs(g) < 1.0);
    }
    CHECK(variation < 0.1);
}

TEST_CASE("massive green domain errors") {
    CHECK_THROWS_AS(eval_massive_green(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(eval_massive_green(0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(eval_massive_green(-1.0, 1.0), ParameterError);
}

TEST_CASE("seed kernel values and monotonicity") {
    CHECK(eval_k_seed(1.0, 0.0) == 1.0);
    CHECK(eval_k_seed(1.0, 1.0) == doctest::Approx(0.601907).epsilon(1e-5));
    for (double r : {0.01, 0.1, 0.5, 1.0, 3.0}) {
        const double reference = r * oracle::k1(r);
        CHECK(std::abs(eval_k_seed(1.0, r) - reference) <= 1e-8 * reference);
    }
    double prev = 1.0;
    for (double r = 0.05; r < 4.0; r += 0.05) {
        const double v = eval_k_seed(1.0, r);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(eval_k_seed(-1.0, 1.0), ParameterError);
}

TEST_CASE("star integral reproduces the green function") {
    for (double r : {0.05, 0.2, 1.0, 3.0}) {
        CHECK(std::abs(eval_star_integral(1.0, r) - eval_massive_green(1.0, r)) <
              1e-6);
    }
    for (double r : {0.5, 1.5}) {
        CHECK(std::abs(eval_star_integral(2.0, r) - eval_massive_green(2.0, r)) <
              1e-6);
    }
}

TEST_CASE("layer covariance on the dyadic schedule") {
    const auto params = SimulationParams::with_dyadic_schedule(1.0, 1.0, 8);
    CHECK(eval_layer_cov(params, 2, 0.0) == doctest::Approx(std::log(2.0)));
    CHECK(eval_layer_cov(params, 1, 0.0) == 0.0);
    CHECK(eval_layer_cov(params, 1, 0.7) == 0.0);
    CHECK_THROWS_AS(eval_layer_cov(params, 9, 0.1), ParameterError);
    CHECK_THROWS_AS(eval_layer_cov(params, 0, 0.1), ParameterError);
}

TEST_CASE("telescoping: layer sums increase toward the green function") {
    const auto params = SimulationParams::with_dyadic_schedule(1.0, 1.0, 12);
    for (double r : {0.05, 0.3, 1.0}) {
        const double total = eval_massive_green(1.0, r);
        double sum = 0.0;
        for (int n = 1; n <= params.truncation; ++n) {
            const double before = sum;
            sum += eval_layer_cov(params, n, r);
            if (n > 1) CHECK(sum > before);
            CHECK(sum <= total + 1e-9);
        }
        CHECK(sum == doctest::Approx(eval_cumulative_cov(params, 12, r)).epsilon(1e-7));
        // Deep truncation exhausts the kernel at this radius.
        CHECK(total - sum < eval_k_seed(1.0, params.scale_schedule.back() * r) +
                                1.0 / params.scale_schedule.back());
    }
}

TEST_CASE("white noise slice covariance cases") {
    CHECK(eval_wn_slice_cov(1.0, 1.0, 3.0) == 0.0);
    CHECK(eval_wn_slice_cov(0.5, 0.5, 1.0) == doctest::Approx(std::log(2.0)));
    CHECK(eval_wn_slice_cov(0.25, 0.25, 0.0) ==
          doctest::Approx(std::log(8.0) + 2.0));
    CHECK(eval_wn_slice_cov(0.25, 0.5, 0.3) ==
          doctest::Approx(std::log(2.0) + 2.0 * (1.0 - std::sqrt(0.3 / 0.5))));
    CHECK_THROWS_AS(eval_wn_slice_cov(0.0, 0.5, 1.0), ParameterError);
    CHECK_THROWS_AS(eval_wn_slice_cov(0.5, 1.5, 1.0), ParameterError);
}

TEST_CASE("disk green closed form") {
    CHECK(eval_disk_green(1.0, {0.5, 0.0}, {0.0, 0.0}) ==
          doctest::Approx(std::log(2.0) / M_PI).epsilon(1e-12));
    // Radial form G(x, 0) = ln(R/|x|)/pi.
    CHECK(eval_disk_green(2.0, {0.5, 0.5}, {0.0, 0.0}) ==
          doctest::Approx(std::log(2.0 / std::hypot(0.5, 0.5)) / M_PI));
    // Dirichlet boundary.
    CHECK(eval_disk_green(1.0, {0.3, -0.2}, {1.0, 0.0}) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(eval_disk_green(1.0, {0.5, 0.0}, {0.5, 0.0}), DomainError);
    CHECK_THROWS_AS(eval_disk_green(1.0, {1.5, 0.0}, {0.0, 0.0}), DomainError);
}

TEST_CASE("disk green symmetry and log bound") {
    GaussianRng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const double R = 0.5 + 2.0 * rng.uniform();
        Point x{0, 0}, y{0, 0};
        do {
            x = {R * (2 * rng.uniform() - 1), R * (2 * rng.uniform() - 1)};
            y = {R * (2 * rng.uniform() - 1), R * (2 * rng.uniform() - 1)};
        } while (x.x * x.x + x.y * x.y >= R * R ||
                 y.x * y.x + y.y * y.y >= R * R || distance(x, y) < 1e-6);
        const double g = eval_disk_green(R, x, y);
        CHECK(std::abs(g - eval_disk_green(R, y, x)) <= 1e-12);
        // G_R <= ln(1/|x-y|)/pi + C with C = ln(2R)/pi on the ball.
        CHECK(g <= std::log(1.0 / distance(x, y)) / M_PI +
                       std::log(2.0 * R) / M_PI + 1e-9);
        CHECK(g >= 0.0);
    }
}

TEST_CASE("disk green against brownian occupation" * doctest::timeout(300)) {
    // E_x[time spent in A before exiting B(0,1)] = int_A G_1(x, y) dy.
    const double R = 1.0;
    const Point x0{0.5, 0.0};
    const double rho = 0.15;  // occupation disk around the origin
    const double dt = 5e-5;

    // Quadrature of G over A on a fine polar grid.
    double expected = 0.0;
    const int nr = 60, na = 64;
    for (int i = 0; i < nr; ++i) {
        const double r = (i + 0.5) * rho / nr;
        for (int a = 0; a < na; ++a) {
            const double th = (a + 0.5) * 2.0 * M_PI / na;
            expected += eval_disk_green(R, x0, {r * std::cos(th), r * std::sin(th)}) *
                        r * (rho / nr) * (2.0 * M_PI / na);
        }
    }

    const int replicas = 4000;
    std::vector<double> occupation(replicas);
    for (int rep = 0; rep < replicas; ++rep) {
        const BrownianPath path =
            sample_path(x0, 10.0, dt, derive_stream(42, rep, 5));
        double time_in = 0.0;
        for (const Point& p : path.positions) {
            if (p.x * p.x + p.y * p.y >= R * R) break;
            if ((p.x) * (p.x) + (p.y) * (p.y) <= rho * rho) time_in += dt;
        }
        occupation[rep] = time_in;
    }
    const double mean = oracle::mean(occupation);
    const double se = oracle::stderr_of_mean(occupation);
    CHECK(std::abs(mean - expected) <= 3.0 * se + 0.02 * expected);
}

TEST_CASE("scale bound holds") {
    CHECK(check_scale_bound(1.0, {1.0, 0.0}, {0.0, 0.0}, 1.0));
    CHECK(check_scale_bound(1.0, {0.5, 0.0}, {0.0, 0.0}, 0.5));
    GaussianRng rng(11);
    int checked = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const double r = std::exp(-6.0 + 8.0 * rng.uniform());
        const double eps = std::max(1e-3, rng.uniform());
        const Point x{r, 0.0}, y{0.0, 0.0};
        CHECK(check_scale_bound(1.0, x, y, eps));
        ++checked;
    }
    CHECK(checked == 10000);
}

TEST_CASE("kernel gram matrices are positive semidefinite") {
    const auto params = SimulationParams::with_dyadic_schedule(1.0, 1.0, 6);
    std::vector<KernelSpec> specs;
    specs.push_back(KernelSpec::layer_kernel(params, 3));
    specs.push_back(KernelSpec::wn_slice_kernel(0.25, 0.25));
    KernelSpec seed_spec;
    seed_spec.variant = KernelVariant::k_seed;
    specs.push_back(seed_spec);
    KernelSpec green_spec;
    green_spec.variant = KernelVariant::massive_green;
    specs.push_back(green_spec);
    KernelSpec logp;
    logp.variant = KernelVariant::log_plus;
    specs.push_back(logp);
    KernelSpec esi;
    esi.variant = KernelVariant::exact_scale_invariant;
    specs.push_back(esi);

    GaussianRng rng(1234);
    for (const KernelSpec& spec : specs) {
        for (int trial = 0; trial < 8; ++trial) {
            const int n = 8 + static_cast<int>(rng.bits() % 25);
            std::vector<Point> pts;
            while (static_cast<int>(pts.size()) < n) {
                Point p{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
                bool ok = true;
                for (const Point& q : pts) {
                    if (distance(p, q) < 2e-3) ok = false;
                }
                if (ok) pts.push_back(p);
            }
            double min_sep = 1e9;
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j)
                    min_sep = std::min(min_sep, distance(pts[i], pts[j]));
            }
            // Diverging kernels are tested through their cutoff covariance:
            // off the diagonal it coincides with the kernel once points are
            // at least the cutoff apart, and at zero lag it carries the
            // kernel value at the cutoff plus 2 (the white-noise slice form).
            const double diag = spec.value_at_zero()
                                    ? *spec.value_at_zero()
                                    : spec.evaluate(min_sep) + 2.0;
            Eigen::MatrixXd gram(n, n);
            for (int i = 0; i < n; ++i) {
                gram(i, i) = diag;
                for (int j = i + 1; j < n; ++j) {
                    const double v = spec.evaluate(distance(pts[i], pts[j]));
                    gram(i, j) = v;
                    gram(j, i) = v;
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
            CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * gram.trace());
        }
    }
}

TEST_CASE("radial tables interpolate to 1e-6") {
    const auto params = SimulationParams::with_dyadic_schedule(1.0, 1.0, 8);
    const KernelSpec spec = KernelSpec::layer_kernel(params, 4);
    const RadialTable table(spec, 4.0);
    GaussianRng rng(99);
    for (int i = 0; i < 40; ++i) {
        const double r = 4.0 * rng.uniform();
        CHECK(std::abs(table(r) - spec.evaluate(r)) < 1e-6);
    }
    CHECK(table(0.0) == doctest::Approx(std::log(2.0)));
    // Past the table range the last node value is held.
    CHECK(table(10.0) == table(table.r_max()));
}

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(SimulationParams::with_dyadic_schedule(2.0, 1.0, 4),
                    ParameterError);
    CHECK_THROWS_AS(SimulationParams::with_dyadic_schedule(-0.1, 1.0, 4),
                    ParameterError);
    SimulationParams p;
    p.gamma = 0.5;
    p.mass = 1.0;
    p.truncation = 3;
    p.scale_schedule = {1.0, 2.0, 1.5};
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p.scale_schedule = {2.0, 3.0, 4.0};
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p.scale_schedule = {1.0, 3.0, 9.0};
    CHECK_NOTHROW(p.validate());
    CHECK(p.layer_variance(2) == doctest::Approx(std::log(3.0)));
    CHECK(p.cumulative_variance(3) == doctest::Approx(std::log(9.0)));
}
