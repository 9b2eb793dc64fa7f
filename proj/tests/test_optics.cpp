#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "gv95/optics.hpp"
#include "gv95/rng.hpp"

using namespace gv95;

TEST_CASE("make_state produces the two orthogonal superpositions") {
    ModeAmplitudes s0 = make_state(0);
    ModeAmplitudes s1 = make_state(1);
    double r = 1.0 / std::sqrt(2.0);
    CHECK(s0.amp_a.real() == doctest::Approx(r).epsilon(1e-12));
    CHECK(s0.amp_b.real() == doctest::Approx(r).epsilon(1e-12));
    CHECK(s1.amp_a.real() == doctest::Approx(r).epsilon(1e-12));
    CHECK(s1.amp_b.real() == doctest::Approx(-r).epsilon(1e-12));
    CHECK(s0.is_normalized());
    CHECK(s1.is_normalized());
    CHECK(std::abs(inner_product(s0, s1)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(make_state(2), std::invalid_argument);
}

TEST_CASE("interfere hits the fringe extrema") {
    auto [p0, p1] = interfere(make_state(0), 0.0, 1.0);
    CHECK(p0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(0.0).epsilon(1e-12));

    auto [q0, q1] = interfere(make_state(0), kPi, 1.0);
    CHECK(q0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q1 == doctest::Approx(1.0).epsilon(1e-12));

    // At the reported visibility the wrong-detector probability is the
    // (1 - V)/2 target of the error-rate analysis.
    auto [w0, w1] = interfere(make_state(1), 0.0, 0.962);
    CHECK(w0 == doctest::Approx(0.019).epsilon(1e-9));
    CHECK(w1 == doctest::Approx(0.981).epsilon(1e-9));
}

TEST_CASE("interfere rejects bad inputs") {
    CHECK_THROWS_AS(interfere(make_state(0), 0.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(interfere(make_state(0), 0.0, -0.1), std::invalid_argument);
    ModeAmplitudes bad{{0.9, 0.0}, {0.9, 0.0}};
    CHECK_THROWS_AS(interfere(bad, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("interfere probabilities form a distribution for random inputs") {
    std::mt19937_64 rng = make_stream(11, "optics-prop");
    std::uniform_real_distribution<double> phase(-10.0, 10.0);
    std::uniform_real_distribution<double> vis(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        int bit = i & 1;
        auto [p0, p1] = interfere(make_state(bit), phase(rng), vis(rng));
        CHECK(p0 >= 0.0);
        CHECK(p0 <= 1.0);
        CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("fringe symmetry between the two states") {
    std::mt19937_64 rng = make_stream(12, "optics-sym");
    std::uniform_real_distribution<double> phase(-7.0, 7.0);
    std::uniform_real_distribution<double> vis(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double phi = phase(rng);
        double v = vis(rng);
        auto a = interfere(make_state(0), phi, v);
        // Same phase, outputs swapped...
        auto b = interfere(make_state(1), phi, v);
        CHECK(a.first == doctest::Approx(b.second).epsilon(1e-12));
        CHECK(a.second == doctest::Approx(b.first).epsilon(1e-12));
        // ...or a half-period shift with outputs kept.
        auto c = interfere(make_state(1), phi + kPi, v);
        CHECK(a.first == doctest::Approx(c.first).epsilon(1e-9));
        CHECK(a.second == doctest::Approx(c.second).epsilon(1e-9));
    }
}

TEST_CASE("phase-averaged fringe washes out to one half") {
    std::mt19937_64 rng = make_stream(13, "optics-washout");
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) acc += interfere(make_state(0), phase(rng), 1.0).first;
    CHECK(acc / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("sample_photon_count matches Poisson statistics") {
    std::mt19937_64 rng = make_stream(14, "optics-poisson");

    for (int i = 0; i < 100; ++i) CHECK(sample_photon_count(0.0, rng) == 0);

    const double mu = 0.1;
    const int n = 1000000;
    long long sum = 0;
    long long hist[4] = {0, 0, 0, 0};
    long long at_least_1 = 0, at_least_2 = 0;
    for (int i = 0; i < n; ++i) {
        int k = sample_photon_count(mu, rng);
        sum += k;
        if (k < 4) ++hist[k];
        if (k >= 1) ++at_least_1;
        if (k >= 2) ++at_least_2;
    }
    CHECK(static_cast<double>(sum) / n == doctest::Approx(mu).epsilon(0.01));

    // pmf within 4 sigma on {0,1,2,3}
    double p = std::exp(-mu);
    for (int k = 0; k < 4; ++k) {
        double expect = n * p;
        double sigma = std::sqrt(n * p * (1.0 - p));
        CHECK(std::abs(hist[k] - expect) < 4.0 * sigma + 1.0);
        p *= mu / (k + 1);
    }

    // Multi-photon fraction against the closed form 1 - mu e^-mu/(1 - e^-mu).
    double frac = static_cast<double>(at_least_2) / static_cast<double>(at_least_1);
    double oracle = 1.0 - mu * std::exp(-mu) / (1.0 - std::exp(-mu));
    CHECK(oracle == doctest::Approx(0.0492).epsilon(0.002));
    CHECK(frac == doctest::Approx(oracle).epsilon(0.05));
}

TEST_CASE("fiber_delay reproduces the quoted propagation times") {
    CHECK(fiber_delay(40.0, 1.44) == doctest::Approx(192e-9).epsilon(0.005));
    CHECK(fiber_delay(6.4, 1.44) == doctest::Approx(30.72e-9).epsilon(0.005));
    CHECK(fiber_delay(0.0, 1.44) == 0.0);

    // Linear in length.
    std::mt19937_64 rng = make_stream(15, "optics-delay");
    std::uniform_real_distribution<double> len(0.0, 5000.0);
    for (int i = 0; i < 100; ++i) {
        double a = len(rng), b = len(rng);
        CHECK(fiber_delay(a + b, 1.44) ==
              doctest::Approx(fiber_delay(a, 1.44) + fiber_delay(b, 1.44)).epsilon(1e-12));
    }
}

TEST_CASE("wavelength_phase_ratio") {
    CHECK(wavelength_phase_ratio(1547.72e-9, 1546.12e-9) ==
          doctest::Approx(1.001035).epsilon(1e-6));
    CHECK(wavelength_phase_ratio(1.5e-6, 1.5e-6) == 1.0);
    CHECK(wavelength_phase_ratio(3.0e-6, 1.5e-6) == 2.0);
    CHECK_THROWS_AS(wavelength_phase_ratio(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("wrap_pi maps into (-pi, pi]") {
    CHECK(wrap_pi(0.0) == 0.0);
    CHECK(wrap_pi(kPi) == doctest::Approx(kPi));
    CHECK(wrap_pi(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_pi(3.0 * kPi) == doctest::Approx(kPi));
    CHECK(wrap_pi(2.0 * kPi + 0.25) == doctest::Approx(0.25));
    CHECK(wrap_pi(-2.0 * kPi - 0.25) == doctest::Approx(-0.25));
}
