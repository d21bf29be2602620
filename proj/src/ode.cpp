#include "fockforge/ode.hpp"

#include <algorithm>
#include <cmath>

namespace fockforge {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat, for the embedded error estimate.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

}  // namespace

void integrate_rk45(const OdeRhs& rhs, Eigen::VectorXcd& y, double t0, double t1,
                    const std::vector<double>& sample_times, const OdeSampleFn& on_sample,
                    const OdeOptions& opts) {
    using Vec = Eigen::VectorXcd;
    const Eigen::Index n = y.size();
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);

    double t = t0;
    double h = opts.initial_step;
    std::size_t next_sample = 0;

    auto emit_samples_at = [&](double tcur) {
        const double tol = 1e-12 * std::max(1.0, std::abs(tcur));
        while (next_sample < sample_times.size() && sample_times[next_sample] <= tcur + tol) {
            if (on_sample) on_sample(sample_times[next_sample], y);
            ++next_sample;
        }
    };

    rhs(t, y, k1);
    emit_samples_at(t);

    while (t < t1 - 1e-14) {
        double hmax = t1 - t;
        if (next_sample < sample_times.size())
            hmax = std::min(hmax, sample_times[next_sample] - t);
        if (opts.max_step) hmax = std::min(hmax, opts.max_step(t));
        double hstep = std::min(h, std::max(hmax, opts.min_step));

        for (;;) {
            ytmp = y + hstep * (a21 * k1);
            rhs(t + c2 * hstep, ytmp, k2);
            ytmp = y + hstep * (a31 * k1 + a32 * k2);
            rhs(t + c3 * hstep, ytmp, k3);
            ytmp = y + hstep * (a41 * k1 + a42 * k2 + a43 * k3);
            rhs(t + c4 * hstep, ytmp, k4);
            ytmp = y + hstep * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            rhs(t + c5 * hstep, ytmp, k5);
            ytmp = y + hstep * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            rhs(t + hstep, ytmp, k6);
            ynew = y + hstep * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            rhs(t + hstep, ynew, k7);
            yerr = hstep * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double err_sq = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double scale =
                    opts.abs_tol +
                    opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                const double r = std::abs(yerr[i]) / scale;
                err_sq += r * r;
            }
            const double err = std::sqrt(err_sq / double(n));
            if (!std::isfinite(err))
                throw NumericalError("integrate_rk45: non-finite state encountered");

            if (err <= 1.0) {
                t += hstep;
                y.swap(ynew);
                k1.swap(k7);  // FSAL
                const double grow = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
                h = hstep * std::clamp(grow, 0.2, 5.0);
                break;
            }
            hstep *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            if (hstep < opts.min_step)
                throw NumericalError("integrate_rk45: step size underflow");
        }
        emit_samples_at(t);
    }
    emit_samples_at(t1);
}

}  // namespace fockforge
