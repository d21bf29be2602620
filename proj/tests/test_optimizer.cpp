#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "fockforge/analysis.hpp"
#include "fockforge/optimizer.hpp"

using namespace fockforge;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("axis enumerates an inclusive linear grid") {
    const Axis a{1.0, 3.0, 5};
    CHECK(a.value(0) == 1.0);
    CHECK(a.value(2) == doctest::Approx(2.0));
    CHECK(a.value(4) == 3.0);
    CHECK(a.step() == doctest::Approx(0.5));
    CHECK(Axis{2.5, 9.0, 1}.value(0) == 2.5);
    CHECK_THROWS_AS(a.value(5), std::out_of_range);
}

TEST_CASE("grid validation enforces the stated parameter ranges") {
    GridSpec g;
    g.zeta1_db = {0, 15, 4};
    g.t1 = {0, 1.5, 4};
    g.zeta2_db = {0, 15, 4};
    g.t2 = {0, 1.5, 4};
    g.zeta3_db = {0, 15, 4};
    CHECK_NOTHROW(g.validate());
    GridSpec bad = g;
    bad.zeta2_db.max = 16.0;  // above the 15 dB envelope
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = g;
    bad.t1.max = 2.0;  // total interaction time above 3
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = g;
    bad.t2.steps = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("sequence_from_params converts dB gains and orders delays") {
    const PulseSequence seq = sequence_from_params({4.76, 1.11, 12.86, 0.19, 12.39},
                                                   0.0, kPi, 0.0, 1.0);
    REQUIRE(seq.pulses.size() == 3);
    CHECK(seq.pulses[0].delay_before == 0.0);
    CHECK(seq.pulses[1].delay_before == doctest::Approx(1.11));
    CHECK(seq.pulses[2].delay_before == doctest::Approx(0.19));
    CHECK(gain_db(seq.pulses[0].zeta) == doctest::Approx(4.76));
    CHECK(seq.pulses[1].phi == doctest::Approx(kPi));
    CHECK_THROWS_AS(sequence_from_params({1.0, 2.0}, 0, 0, 0), std::invalid_argument);
}

TEST_CASE("prefix-reuse sweep agrees with the general propagator pointwise") {
    const FockBasis basis = make_basis(30);
    GridSpec g;
    g.zeta1_db = {2.0, 9.0, 3};
    g.t1 = {0.2, 1.2, 3};
    g.zeta2_db = {5.0, 12.0, 2};
    g.t2 = {0.1, 1.0, 3};
    g.zeta3_db = {3.0, 11.0, 3};
    const SweepResult sweep = sweep_three_pulse(basis, g, 2);
    double worst = 0.0;
    for (int i1 = 0; i1 < 3; ++i1)
        for (int j1 = 0; j1 < 3; ++j1)
            for (int i2 = 0; i2 < 2; ++i2)
                for (int j2 = 0; j2 < 3; ++j2)
                    for (int i3 = 0; i3 < 3; ++i3) {
                        const PulseSequence seq = sequence_from_params(
                            {g.zeta1_db.value(i1), g.t1.value(j1), g.zeta2_db.value(i2),
                             g.t2.value(j2), g.zeta3_db.value(i3)},
                            g.phi1, g.phi2, g.phi3, 1.0);
                        const EvolveResult ev = evolve_decoupled(vacuum_state(basis), seq);
                        const double direct = fock_probability(ev.state, 2);
                        const double swept =
                            sweep.probabilities[sweep.flat_index({i1, j1, i2, j2, i3})];
                        worst = std::max(worst, std::abs(direct - swept));
                    }
    CHECK(worst < 1e-12);
}

TEST_CASE("worker partitioning does not change the result") {
    const FockBasis basis = make_basis(20);
    GridSpec g;
    g.zeta1_db = {1.0, 10.0, 5};
    g.t1 = {0.0, 1.0, 4};
    g.zeta2_db = {1.0, 10.0, 4};
    g.t2 = {0.0, 1.0, 4};
    g.zeta3_db = {1.0, 10.0, 4};
    const SweepResult serial = sweep_three_pulse(basis, g, 1, 1.0, 1);
    const SweepResult parallel = sweep_three_pulse(basis, g, 1, 1.0, 3);
    REQUIRE(serial.probabilities.size() == parallel.probabilities.size());
    for (std::size_t i = 0; i < serial.probabilities.size(); ++i)
        CHECK(serial.probabilities[i] == parallel.probabilities[i]);
    CHECK(serial.argmax_index == parallel.argmax_index);
}

TEST_CASE("zero-gain grids cannot produce photons") {
    const FockBasis basis = make_basis(10);
    GridSpec g;
    g.zeta1_db = {0.0, 0.0, 1};
    g.t1 = {0.0, 1.0, 3};
    g.zeta2_db = {0.0, 0.0, 1};
    g.t2 = {0.0, 1.0, 3};
    g.zeta3_db = {0.0, 0.0, 1};
    const SweepResult sweep = sweep_three_pulse(basis, g, 1);
    CHECK(sweep.max_probability == doctest::Approx(0.0));
}

TEST_CASE("refinement never loses the coarse maximum") {
    const FockBasis basis = make_basis(25);
    GridSpec g;
    g.zeta1_db = {0.0, 12.0, 7};
    g.t1 = {0.0, 1.2, 5};
    g.zeta2_db = {0.0, 12.0, 7};
    g.t2 = {0.0, 1.2, 5};
    g.zeta3_db = {0.0, 12.0, 7};
    const SweepResult coarse = sweep_three_pulse(basis, g, 1);
    const SweepResult refined = sweep_three_pulse_refined(basis, g, 1, 1.0, 1, 3, 3);
    CHECK(refined.max_probability >= coarse.max_probability - 1e-14);
}

TEST_CASE("two-pulse sweep reports the landscape and its argmax") {
    const FockBasis basis = make_basis(25);
    TwoPulseGrid grid;
    grid.zeta1 = 0.58;
    grid.zeta2 = Axis{0.3, 0.8, 11};
    grid.t1 = Axis{0.4, 0.8, 9};
    const SweepResult res = sweep_two_pulse(basis, grid, 1);
    REQUIRE(res.axis_values.size() == 2);
    CHECK(res.probabilities.size() == 99);
    // the maximum matches a direct evaluation at the reported argmax
    PulseSequence seq;
    seq.pulses = {PumpPulse{0.58, 0.0, 0.0},
                  PumpPulse{res.argmax_params[0], kPi, res.argmax_params[1]}};
    const EvolveResult ev = evolve_decoupled(vacuum_state(basis), seq);
    CHECK(fock_probability(ev.state, 1) == doctest::Approx(res.max_probability).epsilon(1e-10));
}

TEST_CASE("convergence study tightens monotonically for a modest-gain sequence") {
    PulseSequence seq;
    seq.pulses = {PumpPulse{0.5, 0.0, 0.0}, PumpPulse{0.55, kPi, 0.61}};
    const auto rows = convergence_study(seq, 1, {10, 15, 20, 25}, std::nullopt);
    REQUIRE(rows.size() == 4);
    CHECK(!rows[0].diff_from_previous.has_value());
    REQUIRE(rows[3].diff_from_previous.has_value());
    CHECK(std::abs(*rows[3].diff_from_previous) < std::abs(*rows[1].diff_from_previous) + 1e-12);
    CHECK(std::abs(*rows[3].diff_from_previous) < 1e-6);
    CHECK(rows[3].error.empty());
    CHECK_THROWS_AS(convergence_study(seq, 1, {20, 10}, std::nullopt), std::invalid_argument);
}
