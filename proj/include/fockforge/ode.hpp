#pragma once

#include <functional>

#include <Eigen/Dense>

#include "fockforge/errors.hpp"

namespace fockforge {

/// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) over a flat complex
/// state vector. Steps are clipped so that requested sample times are hit
/// exactly; `max_step` (optional) further bounds the step as a function of t.
struct OdeOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double initial_step = 1e-4;
    double min_step = 1e-14;
    std::function<double(double)> max_step;  // may be empty
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy)>;
using OdeSampleFn = std::function<void(double t, const Eigen::VectorXcd& y)>;

/// Integrates y' = rhs(t, y) from t0 to t1, invoking `on_sample` at each of
/// `sample_times` (must be ascending, within [t0, t1]). `y` is updated in
/// place to the state at t1.
void integrate_rk45(const OdeRhs& rhs, Eigen::VectorXcd& y, double t0, double t1,
                    const std::vector<double>& sample_times, const OdeSampleFn& on_sample,
                    const OdeOptions& opts);

}  // namespace fockforge
