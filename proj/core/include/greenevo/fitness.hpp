#pragma once

#include <compare>
#include <limits>
#include <string>
#include <string_view>

namespace greenevo {

enum class FitnessKind { accuracy, f1, f2, f3 };

std::string_view to_string(FitnessKind kind) noexcept;
FitnessKind parse_fitness_kind(std::string_view text);

struct FitnessConfig {
    FitnessKind kind = FitnessKind::f3;
    double threshold_left = 0.80;
    double threshold_right = 0.85;
    double power_weight = 10.0; ///< multiplier on 1/power in f2 and f3; hardware dependent

    void validate() const;
};

/// Scalar fitness, higher is better. worst() sorts below every finite value.
struct FitnessValue {
    double value = 0.0;

    static constexpr FitnessValue worst() noexcept { return {-std::numeric_limits<double>::infinity()}; }
    bool is_worst() const noexcept { return value == -std::numeric_limits<double>::infinity(); }

    auto operator<=>(const FitnessValue&) const = default;
};

// min(tl, acc_left) + min(tr, acc_right) + 1/power_left
FitnessValue fitness_f1(double acc_left, double acc_right, double power_left, const FitnessConfig& cfg = {});
// min(tl, acc_left) + min(tr, acc_right) + w/power_left
FitnessValue fitness_f2(double acc_left, double acc_right, double power_left, const FitnessConfig& cfg = {});
// acc_left + acc_right while both are at or below their thresholds, plus w/power_left otherwise
FitnessValue fitness_f3(double acc_left, double acc_right, double power_left, const FitnessConfig& cfg = {});
FitnessValue fitness_accuracy(double acc);

/// Dispatch on cfg.kind. Accuracy fitness reads acc_left (the main head).
FitnessValue compute_fitness(const FitnessConfig& cfg, double acc_left, double acc_right, double power_left);

} // namespace greenevo
