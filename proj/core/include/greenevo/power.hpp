#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "greenevo/error.hpp"
#include "greenevo/genome.hpp"
#include "greenevo/grammar.hpp"

namespace greenevo {

struct EnergyReading {
    double millijoules = 0.0;
    double seconds = 0.0;
};

/// Energy meter bracketing one unit of work: start(), stop(), then read().
class Meter {
public:
    virtual ~Meter() = default;
    virtual void start() = 0;
    virtual void stop() = 0;
    virtual EnergyReading read() = 0;
    /// Exclusive meters observe the whole device; measurements must not overlap.
    virtual bool exclusive() const noexcept { return false; }
};

/// What is being measured: per-sample cost and how many samples one call runs.
struct Workload {
    std::uint64_t macs_per_sample = 0;
    std::size_t samples_per_call = 1;
};

class MeterFactory {
public:
    virtual ~MeterFactory() = default;
    virtual std::unique_ptr<Meter> create(const Workload& workload, std::uint64_t seed) const = 0;
    virtual bool exclusive() const noexcept { return false; }
};

/// Replays a fixed trace of readings, cycling when exhausted.
class ScriptedMeter final : public Meter {
public:
    explicit ScriptedMeter(std::vector<EnergyReading> trace);

    void start() override;
    void stop() override;
    EnergyReading read() override;

    std::size_t reads() const noexcept { return reads_; }

private:
    enum class State { idle, running, stopped };
    std::vector<EnergyReading> trace_;
    State state_ = State::idle;
    std::size_t reads_ = 0;
};

class ScriptedMeterFactory final : public MeterFactory {
public:
    explicit ScriptedMeterFactory(std::vector<EnergyReading> trace);
    std::unique_ptr<Meter> create(const Workload& workload, std::uint64_t seed) const override;

private:
    std::vector<EnergyReading> trace_;
};

/// Stand-in for GPU telemetry: P = clamp(p_min + k ln(1 + MACs), p_min, p_max)
/// plus optional Gaussian noise.
struct AnalyticMeterConfig {
    // Puts a 784-128-128-128-10 network (134 400 MACs) at 65 W.
    static constexpr double kDefaultScale = 35.0 / 11.808583147519697;

    double p_min = 30.0;
    double p_max = 100.0;
    double k = kDefaultScale;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Watts for a workload of `macs` per sample. With noise_sigma > 0 the noise
/// draw is keyed by (cfg.seed, noise_stream) and the result is clamped to
/// [p_min, p_max + 6 sigma].
double analytic_power(std::uint64_t macs, const AnalyticMeterConfig& cfg, std::uint64_t noise_stream = 0);
double analytic_power(const PhenotypeSpec& spec, int input_dim, int class_count, const AnalyticMeterConfig& cfg);

class AnalyticMeter final : public Meter {
public:
    AnalyticMeter(AnalyticMeterConfig cfg, Workload workload, std::uint64_t seed);

    void start() override;
    void stop() override;
    EnergyReading read() override;

private:
    AnalyticMeterConfig cfg_;
    Workload workload_;
    std::uint64_t seed_;
    bool running_ = false;
    bool stopped_ = false;
    std::uint64_t reads_ = 0;
};

class AnalyticMeterFactory final : public MeterFactory {
public:
    explicit AnalyticMeterFactory(AnalyticMeterConfig cfg);
    std::unique_ptr<Meter> create(const Workload& workload, std::uint64_t seed) const override;
    const AnalyticMeterConfig& config() const noexcept { return cfg_; }

private:
    AnalyticMeterConfig cfg_;
};

enum class MeterKind { analytic, scripted };

struct MeterSettings {
    MeterKind kind = MeterKind::analytic;
    AnalyticMeterConfig analytic;
    std::vector<EnergyReading> script{{5000.0, 0.5}};
    int n_measures = 30;
    std::size_t inference_samples = 0; ///< samples per measured call; 0 = the full validation split

    void validate() const;
};

std::unique_ptr<MeterFactory> make_meter_factory(const MeterSettings& settings);

template <class T>
struct MeasureResult {
    T output{};
    std::vector<double> samples; ///< watts
    double mean_watts = 0.0;
};

/// Runs `work` n_measures times, each bracketed by start/stop, converting each
/// reading with watts = mJ / 1000 / s. Returns the last output and the mean.
template <class F>
auto measure_mean(Meter& meter, F&& work, int n_measures)
{
    using R = std::invoke_result_t<F&>;
    using Out = std::conditional_t<std::is_void_v<R>, std::monostate, R>;
    if (n_measures < 1) {
        throw MeasurementError("n_measures must be at least 1");
    }
    MeasureResult<Out> result;
    result.samples.reserve(static_cast<std::size_t>(n_measures));
    double sum = 0.0;
    for (int i = 0; i < n_measures; ++i) {
        meter.start();
        if constexpr (std::is_void_v<R>) {
            work();
        } else {
            result.output = work();
        }
        meter.stop();
        const auto r = meter.read();
        if (!(r.seconds > 0.0) || !std::isfinite(r.seconds)) {
            throw MeasurementError("meter reported a non-positive duration");
        }
        if (!(r.millijoules >= 0.0) || !std::isfinite(r.millijoules)) {
            throw MeasurementError("meter reported negative or non-finite energy");
        }
        const double watts = r.millijoules / 1000.0 / r.seconds;
        result.samples.push_back(watts);
        sum += watts;
    }
    result.mean_watts = sum / static_cast<double>(n_measures);
    return result;
}

struct IoShape {
    int input_dim = 784;
    int class_count = 10;
};

struct ProbeResult {
    double watts = 0.0;
    std::uint64_t macs = 0;
};

/// Power of an untrained input -> module layers -> softmax output network,
/// run on seeded uniform random batches.
ProbeResult probe_module_power(const ModuleGene& module, const Grammar& grammar, const MeterFactory& meters,
                               const IoShape& io, int n_measures, std::uint64_t seed, std::size_t batch = 32);

} // namespace greenevo
