#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "greenevo/error.hpp"
#include "greenevo/fitness.hpp"
#include "greenevo/rng.hpp"

using namespace greenevo;

namespace {

// Reference formulas, written independently of the library.
double eq1(double l, double r, double p) { return (l < 0.80 ? l : 0.80) + (r < 0.85 ? r : 0.85) + 1.0 / p; }
double eq2(double l, double r, double p) { return (l < 0.80 ? l : 0.80) + (r < 0.85 ? r : 0.85) + 10.0 / p; }
double eq3(double l, double r, double p) { return (l <= 0.80 && r <= 0.85) ? l + r : l + r + 10.0 / p; }

} // namespace

TEST_CASE("f1 table")
{
    CHECK(fitness_f1(0.9, 0.9, 50).value == doctest::Approx(1.67).epsilon(1e-12));
    CHECK(fitness_f1(0.5, 0.5, 100).value == doctest::Approx(1.01).epsilon(1e-12));
    for (double p : {30.0, 65.0, 100.0}) {
        CHECK(fitness_f1(0.80, 0.85, p).value == doctest::Approx(1.65 + 1.0 / p).epsilon(1e-12));
    }
}

TEST_CASE("f2 table")
{
    CHECK(fitness_f2(0.9, 0.9, 50).value == doctest::Approx(1.85).epsilon(1e-12));
    CHECK(fitness_f2(0.9, 0.9, 1e15).value == doctest::Approx(1.65).epsilon(1e-12));
    for (double p : {31.0, 47.5, 99.0}) {
        const double d = fitness_f2(0.7, 0.6, p).value - fitness_f1(0.7, 0.6, p).value;
        CHECK(d == doctest::Approx(9.0 / p).epsilon(1e-12));
    }
}

TEST_CASE("f3 table")
{
    for (double p : {30.0, 50.0, 100.0}) {
        CHECK(fitness_f3(0.5, 0.6, p).value == doctest::Approx(1.1).epsilon(1e-12));
        CHECK(fitness_f3(0.80, 0.85, p).value == doctest::Approx(1.65).epsilon(1e-12));
    }
    CHECK(fitness_f3(0.9, 0.9, 100).value == doctest::Approx(1.9).epsilon(1e-12));
    // One partition above its threshold is enough for the power term.
    CHECK(fitness_f3(0.81, 0.5, 50).value == doctest::Approx(1.31 + 0.2).epsilon(1e-12));
    CHECK(fitness_f3(0.5, 0.86, 50).value == doctest::Approx(1.36 + 0.2).epsilon(1e-12));
}

TEST_CASE("accuracy fitness is the identity")
{
    CHECK(fitness_accuracy(0.916).value == 0.916);
    CHECK(fitness_accuracy(0).value == 0);
    CHECK(fitness_accuracy(1).value == 1);
}

TEST_CASE("nonpositive power violates the contract")
{
    CHECK_THROWS_AS(fitness_f1(0.5, 0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(fitness_f2(0.5, 0.5, -1), std::invalid_argument);
    CHECK_THROWS_AS(fitness_f3(0.9, 0.9, 0), std::invalid_argument);
}

TEST_CASE("configuration")
{
    CHECK(parse_fitness_kind("f3") == FitnessKind::f3);
    CHECK(parse_fitness_kind("accuracy") == FitnessKind::accuracy);
    CHECK_THROWS_AS(parse_fitness_kind("f4"), ConfigError);
    FitnessConfig bad;
    bad.threshold_left = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.power_weight = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    FitnessConfig cfg;
    cfg.kind = FitnessKind::accuracy;
    CHECK(compute_fitness(cfg, 0.7, 0.2, 40).value == 0.7);
    cfg.kind = FitnessKind::f2;
    CHECK(compute_fitness(cfg, 0.9, 0.9, 50).value == doctest::Approx(1.85).epsilon(1e-12));
    cfg.power_weight = 20;
    CHECK(compute_fitness(cfg, 0.9, 0.9, 50).value == doctest::Approx(2.05).epsilon(1e-12));
}

TEST_CASE("worst fitness sorts below everything")
{
    CHECK(FitnessValue::worst() < FitnessValue{-1e300});
    CHECK(FitnessValue::worst().is_worst());
    CHECK_FALSE(FitnessValue{0}.is_worst());
}

TEST_CASE("property: hand formulas, monotonicity, branch consistency")
{
    Rng rng(31);
    for (int i = 0; i < 20000; ++i) {
        const double l = uniform01(rng);
        const double r = uniform01(rng);
        const double p = uniform_real(rng, 30, 100);
        CHECK(fitness_f1(l, r, p).value == doctest::Approx(eq1(l, r, p)).epsilon(1e-12));
        CHECK(fitness_f2(l, r, p).value == doctest::Approx(eq2(l, r, p)).epsilon(1e-12));
        CHECK(fitness_f3(l, r, p).value == doctest::Approx(eq3(l, r, p)).epsilon(1e-12));

        const double dl = uniform01(rng) * (1 - l);
        const double dr = uniform01(rng) * (1 - r);
        const double dp = uniform01(rng) * 10;
        for (auto f : {&fitness_f1, &fitness_f2, &fitness_f3}) {
            CHECK(f(l + dl, r, p, {}).value >= f(l, r, p, {}).value);
            CHECK(f(l, r + dr, p, {}).value >= f(l, r, p, {}).value);
        }
        CHECK(fitness_f1(l, r, p + dp).value <= fitness_f1(l, r, p).value);
        CHECK(fitness_f2(l, r, p + dp).value <= fitness_f2(l, r, p).value);
        if (l > 0.80 || r > 0.85) {
            CHECK(fitness_f3(l, r, p + dp).value <= fitness_f3(l, r, p).value);
        }
    }
    // Crossing the left threshold upward adds the power term.
    CHECK(fitness_f3(std::nextafter(0.80, 1.0), 0.5, 60).value > fitness_f3(0.80, 0.5, 60).value);
}
