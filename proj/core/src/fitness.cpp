#include "greenevo/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "greenevo/error.hpp"

namespace greenevo {

namespace {

void require_power(double power_left)
{
    if (!(power_left > 0.0) || !std::isfinite(power_left)) {
        throw std::invalid_argument("fitness: power_left must be positive and finite");
    }
}

} // namespace

std::string_view to_string(FitnessKind kind) noexcept
{
    switch (kind) {
    case FitnessKind::accuracy: return "accuracy";
    case FitnessKind::f1: return "f1";
    case FitnessKind::f2: return "f2";
    case FitnessKind::f3: return "f3";
    }
    return "?";
}

FitnessKind parse_fitness_kind(std::string_view text)
{
    if (text == "accuracy") return FitnessKind::accuracy;
    if (text == "f1") return FitnessKind::f1;
    if (text == "f2") return FitnessKind::f2;
    if (text == "f3") return FitnessKind::f3;
    throw ConfigError("fitness.kind must be one of accuracy, f1, f2, f3 (got '" + std::string(text) + "')");
}

void FitnessConfig::validate() const
{
    if (!(threshold_left >= 0.0 && threshold_left <= 1.0) || !(threshold_right >= 0.0 && threshold_right <= 1.0)) {
        throw ConfigError("fitness thresholds must lie in [0, 1]");
    }
    if (!(power_weight >= 0.0) || !std::isfinite(power_weight)) {
        throw ConfigError("fitness.power_weight must be non-negative");
    }
}

FitnessValue fitness_f1(double acc_left, double acc_right, double power_left, const FitnessConfig& cfg)
{
    require_power(power_left);
    return {std::min(cfg.threshold_left, acc_left) + std::min(cfg.threshold_right, acc_right) + 1.0 / power_left};
}

FitnessValue fitness_f2(double acc_left, double acc_right, double power_left, const FitnessConfig& cfg)
{
    require_power(power_left);
    return {std::min(cfg.threshold_left, acc_left) + std::min(cfg.threshold_right, acc_right) +
            cfg.power_weight / power_left};
}

FitnessValue fitness_f3(double acc_left, double acc_right, double power_left, const FitnessConfig& cfg)
{
    require_power(power_left);
    if (acc_left <= cfg.threshold_left && acc_right <= cfg.threshold_right) {
        return {acc_left + acc_right};
    }
    return {acc_left + acc_right + cfg.power_weight / power_left};
}

FitnessValue fitness_accuracy(double acc)
{
    return {acc};
}

FitnessValue compute_fitness(const FitnessConfig& cfg, double acc_left, double acc_right, double power_left)
{
    switch (cfg.kind) {
    case FitnessKind::accuracy: return fitness_accuracy(acc_left);
    case FitnessKind::f1: return fitness_f1(acc_left, acc_right, power_left, cfg);
    case FitnessKind::f2: return fitness_f2(acc_left, acc_right, power_left, cfg);
    case FitnessKind::f3: return fitness_f3(acc_left, acc_right, power_left, cfg);
    }
    return FitnessValue::worst();
}

} // namespace greenevo
