#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fockforge/hilbert.hpp"
#include "fockforge/ode.hpp"

using namespace fockforge;
using Eigen::VectorXcd;

TEST_CASE("exponential decay integrates to machine-level accuracy") {
    VectorXcd y(1);
    y[0] = 1.0;
    const Complex lambda(-0.7, 2.3);
    integrate_rk45([&](double, const VectorXcd& v, VectorXcd& dv) { dv = lambda * v; }, y,
                   0.0, 3.0, {}, {}, OdeOptions{1e-12, 1e-10});
    CHECK(std::abs(y[0] - std::exp(lambda * 3.0)) < 1e-9);
}

TEST_CASE("harmonic oscillator conserves energy and phase") {
    // y'' = -y as a first-order system; exact solution (cos t, -sin t).
    VectorXcd y(2);
    y[0] = 1.0;
    y[1] = 0.0;
    integrate_rk45(
        [](double, const VectorXcd& v, VectorXcd& dv) {
            dv.resize(2);
            dv[0] = v[1];
            dv[1] = -v[0];
        },
        y, 0.0, 10.0, {}, {}, OdeOptions{1e-12, 1e-10});
    CHECK(std::abs(y[0] - std::cos(10.0)) < 1e-8);
    CHECK(std::abs(y[1] + std::sin(10.0)) < 1e-8);
}

TEST_CASE("sample times are hit exactly and in order") {
    std::vector<double> seen;
    VectorXcd y(1);
    y[0] = 1.0;
    const std::vector<double> wanted{0.25, 0.5, 0.99, 1.0};
    integrate_rk45([](double, const VectorXcd& v, VectorXcd& dv) { dv = -v; }, y, 0.0, 1.0,
                   wanted,
                   [&](double t, const VectorXcd& v) {
                       seen.push_back(t);
                       CHECK(std::abs(v[0] - std::exp(-t)) < 1e-9);
                   },
                   OdeOptions{});
    REQUIRE(seen.size() == wanted.size());
    for (std::size_t i = 0; i < seen.size(); ++i)
        CHECK(seen[i] == doctest::Approx(wanted[i]).epsilon(1e-12));
}

TEST_CASE("max_step callback bounds the step size") {
    // A rapidly-varying coefficient confined to a window; with the cap the
    // window is resolved, giving the analytically known integral.
    const auto pulse = [](double t) { return std::exp(-0.5 * (t - 1.0) * (t - 1.0) / 1e-4); };
    VectorXcd y(1);
    y[0] = 1.0;
    OdeOptions opts;
    opts.abs_tol = 1e-12;
    opts.rel_tol = 1e-10;
    opts.max_step = [](double t) {
        return (std::abs(t - 1.0) < 0.1) ? 5e-4 : 0.1;
    };
    integrate_rk45(
        [&](double t, const VectorXcd& v, VectorXcd& dv) {
            dv = Complex(0.0, -1.0) * pulse(t) * v;
        },
        y, 0.0, 2.0, {}, {}, opts);
    const double area = std::sqrt(2.0 * M_PI * 1e-4);  // full Gaussian mass
    CHECK(std::abs(y[0] - std::exp(Complex(0.0, -area))) < 1e-8);
}

TEST_CASE("non-finite dynamics raise a numerical error") {
    VectorXcd y(1);
    y[0] = 1.0;
    CHECK_THROWS_AS(
        integrate_rk45([](double, const VectorXcd&, VectorXcd& dv) { dv.setConstant(1, std::nan("")); },
                       y, 0.0, 1.0, {}, {}, OdeOptions{}),
        NumericalError);
}
