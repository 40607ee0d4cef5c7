#pragma once

// A small synthetic problem that runs a whole evolution in well under a second.

#include "greenevo/data.hpp"
#include "greenevo/evolution.hpp"
#include "greenevo/grammar.hpp"

namespace fixture {

inline greenevo::Splits small_splits()
{
    const auto ds = greenevo::synthetic_dataset(3, 40, 8, 3.0, 17);
    return greenevo::split_by_count(ds, {60, 30, 30}, 5, true);
}

inline greenevo::EvolutionConfig small_config()
{
    greenevo::EvolutionConfig cfg;
    cfg.runs = 2;
    cfg.generations = 3;
    cfg.population_size = 5;
    cfg.max_epochs = 6;
    cfg.genome.initial_train_budget = 2;
    cfg.genome.max_layers = 4;
    cfg.genome.init_max_layers = 3;
    cfg.meter.n_measures = 3;
    cfg.meter.inference_samples = 16;
    cfg.probe_batch = 4;
    cfg.seed = 11;
    return cfg;
}

inline const char* small_config_text()
{
    return "evolution.runs = 2\n"
           "evolution.generations = 2\n"
           "evolution.seed = 3\n"
           "evolution.max_epochs = 4\n"
           "genome.initial_train_budget = 1\n"
           "meter.n_measures = 2\n"
           "meter.inference_samples = 8\n"
           "evolution.probe_batch = 4\n"
           "data.kind = synthetic\n"
           "data.synthetic_classes = 3\n"
           "data.synthetic_per_class = 30\n"
           "data.synthetic_dims = 6\n"
           "data.train_count = 45\n"
           "data.validation_count = 20\n"
           "data.test_count = 10\n";
}

} // namespace fixture
