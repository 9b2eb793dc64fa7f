#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gv95/hardware.hpp"
#include "gv95/rng.hpp"

using namespace gv95;

TEST_CASE("drift_step is inert at zero sigma and ramp") {
    PhaseState p;
    p.phi_ph = 1.25;
    std::mt19937_64 rng = make_stream(21, "hw-drift0");
    for (int i = 0; i < 10; ++i) drift_step(p, 0.001, rng);
    CHECK(p.phi_ph == 1.25);
}

TEST_CASE("drift_step increments have the configured standard deviation") {
    PhaseState p;
    p.drift_sigma = 1.0;
    std::mt19937_64 rng = make_stream(22, "hw-driftstd");
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        drift_step(p, 1.0, rng);
        double step = p.phi_ph - prev;
        prev = p.phi_ph;
        sum += step;
        sumsq += step * step;
    }
    double mean = sum / n;
    double std = std::sqrt(sumsq / n - mean * mean);
    CHECK(std == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(mean) < 0.02);
}

TEST_CASE("drift variance grows linearly in time (Wiener law)") {
    const double sigma = 0.7;
    const double T = 4.0;
    const double dt = 0.01;
    const int paths = 10000;
    std::mt19937_64 rng = make_stream(23, "hw-wiener");
    double sumsq = 0.0;
    for (int i = 0; i < paths; ++i) {
        PhaseState p;
        p.drift_sigma = sigma;
        for (double t = 0.0; t < T - 1e-12; t += dt) drift_step(p, dt, rng);
        sumsq += p.phi_ph * p.phi_ph;
    }
    double var = sumsq / paths;
    CHECK(var == doctest::Approx(sigma * sigma * T).epsilon(0.05));
}

TEST_CASE("drift_step is reproducible for a fixed seed") {
    auto run = [] {
        PhaseState p;
        p.drift_sigma = 0.3;
        p.drift_ramp = 0.01;
        std::mt19937_64 rng = make_stream(24, "hw-repro");
        std::vector<double> trace;
        for (int i = 0; i < 1000; ++i) {
            drift_step(p, 0.001, rng);
            trace.push_back(p.phi_ph);
        }
        return trace;
    };
    CHECK(run() == run());
}

TEST_CASE("stretcher_apply basics") {
    PhaseState p;
    p.stretcher_range = 60.0 * kPi;

    CHECK_FALSE(stretcher_apply(p, 0.0));
    CHECK(p.stretcher_offset == 0.0);

    CHECK_FALSE(stretcher_apply(p, kPi));
    CHECK(p.stretcher_offset == doctest::Approx(kPi));
}

TEST_CASE("stretcher saturation rewinds by whole fringes") {
    PhaseState p;
    p.stretcher_range = 60.0 * kPi;
    p.stretcher_offset = 60.0 * kPi; // parked at the positive stop

    double before = p.stretcher_offset + kPi; // the commanded target
    CHECK(stretcher_apply(p, kPi));
    CHECK(std::abs(p.stretcher_offset) <= p.stretcher_range);
    // The rewind is an exact multiple of 2*pi: same fringe position.
    double diff = before - p.stretcher_offset;
    double k = diff / (2.0 * kPi);
    CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-12));
    CHECK(std::round(k) >= 1.0);
}

TEST_CASE("stretcher never leaves its range under random commands") {
    PhaseState p;
    p.stretcher_range = 2.0 * kPi;
    std::mt19937_64 rng = make_stream(25, "hw-stretch");
    std::uniform_real_distribution<double> cmd(-3.0, 3.0);
    for (int i = 0; i < 20000; ++i) {
        double target = p.stretcher_offset + 0.0; // value before command
        double c = cmd(rng);
        double commanded = target + c;
        stretcher_apply(p, c);
        CHECK(std::abs(p.stretcher_offset) <= p.stretcher_range + 1e-12);
        // Offset differs from the commanded value by a multiple of 2*pi.
        double k = (commanded - p.stretcher_offset) / (2.0 * kPi);
        CHECK(std::abs(k - std::round(k)) < 1e-9);
    }
}

TEST_CASE("attenuate matches the published insertion losses") {
    CHECK(attenuate(1.0, 1.6) == doctest::Approx(0.6918).epsilon(1e-3));
    CHECK(attenuate(1.0, 3.0) == doctest::Approx(0.5012).epsilon(1e-3));
    CHECK(attenuate(0.37, 0.0) == 0.37);
}

TEST_CASE("attenuate composes multiplicatively in dB") {
    std::mt19937_64 rng = make_stream(26, "hw-att");
    std::uniform_real_distribution<double> loss(0.0, 20.0);
    std::uniform_real_distribution<double> budget(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        double x = budget(rng), a = loss(rng), b = loss(rng);
        CHECK(attenuate(attenuate(x, a), b) ==
              doctest::Approx(attenuate(x, a + b)).epsilon(1e-12));
    }
}

TEST_CASE("gated_click dark-only probabilities and rates") {
    DetectorParams d0{500e3, 2.5e-9, 1.4e-5, 1.0};
    DetectorParams d1{500e3, 2.5e-9, 3.87e-5, 1.0};

    // Expected dark rates at 500 kHz gating.
    CHECK(d0.gate_rate * d0.dark_prob == doctest::Approx(7.0));
    CHECK(d1.gate_rate * d1.dark_prob == doctest::Approx(19.35));

    std::mt19937_64 rng = make_stream(27, "hw-dark");
    const int n = 2000000;
    long long clicks = 0;
    for (int i = 0; i < n; ++i)
        if (gated_click(0.0, d1, rng)) ++clicks;
    double expect = n * d1.dark_prob;
    double sigma = std::sqrt(expect);
    CHECK(std::abs(clicks - expect) < 4.0 * sigma + 1.0);

    DetectorParams ideal{500e3, 2.5e-9, 0.0, 1.0};
    for (int i = 0; i < 100; ++i) CHECK(gated_click(1.0, ideal, rng));
}

TEST_CASE("gated_click matches its closed form for mixed causes") {
    std::mt19937_64 rng = make_stream(28, "hw-click");
    const double p_signal = 0.003;
    DetectorParams det{500e3, 2.5e-9, 2e-4, 1.0};
    const int n = 1000000;
    long long clicks = 0;
    for (int i = 0; i < n; ++i)
        if (gated_click(p_signal, det, rng)) ++clicks;
    double p = 1.0 - (1.0 - det.dark_prob) * (1.0 - p_signal);
    double sigma = std::sqrt(n * p * (1.0 - p));
    CHECK(std::abs(clicks - n * p) < 4.0 * sigma);
}

TEST_CASE("classical_pd_power fringe") {
    CHECK(classical_pd_power(2.0, kPi, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(classical_pd_power(2.0, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));

    std::mt19937_64 rng = make_stream(29, "hw-pd");
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += classical_pd_power(1.0, phase(rng), 1.0);
    CHECK(acc / n == doctest::Approx(0.5).epsilon(0.01));
}
