#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "greenevo/fitness.hpp"

namespace greenevo {

struct TrainReport {
    int epochs_run = 0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_history; ///< joint loss on the training set after each epoch
    bool diverged = false;
};

/// Accuracies on the validation split and mean inference power of each partition.
struct PartitionEval {
    double acc_left = 0.0;
    double acc_right = 0.0;
    double power_left = 0.0;
    double power_right = 0.0;
};

struct EvaluationRecord {
    PartitionEval partitions;
    FitnessValue fitness = FitnessValue::worst();
    int epochs_run = 0;
    double final_loss = 0.0;
    bool failed = false;
    std::string failure; ///< empty unless failed
    std::uint64_t seed = 0; ///< stream used for init and training; replaying it reproduces the weights
    double wall_seconds = 0.0;
};

} // namespace greenevo
