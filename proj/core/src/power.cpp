#include "greenevo/power.hpp"

#include <algorithm>

#include "greenevo/network.hpp"
#include "greenevo/rng.hpp"

namespace greenevo {

ScriptedMeter::ScriptedMeter(std::vector<EnergyReading> trace) : trace_(std::move(trace))
{
    if (trace_.empty()) {
        throw MeasurementError("scripted meter needs at least one reading");
    }
}

void ScriptedMeter::start()
{
    if (state_ == State::running) {
        throw MeasurementError("meter started twice");
    }
    state_ = State::running;
}

void ScriptedMeter::stop()
{
    if (state_ != State::running) {
        throw MeasurementError("meter stopped before start");
    }
    state_ = State::stopped;
}

EnergyReading ScriptedMeter::read()
{
    if (state_ != State::stopped) {
        throw MeasurementError("meter read before stop");
    }
    state_ = State::idle;
    return trace_[reads_++ % trace_.size()];
}

ScriptedMeterFactory::ScriptedMeterFactory(std::vector<EnergyReading> trace) : trace_(std::move(trace))
{
    if (trace_.empty()) {
        throw MeasurementError("scripted meter needs at least one reading");
    }
}

std::unique_ptr<Meter> ScriptedMeterFactory::create(const Workload&, std::uint64_t) const
{
    return std::make_unique<ScriptedMeter>(trace_);
}

void AnalyticMeterConfig::validate() const
{
    if (!(p_min > 0.0) || !(p_min < p_max)) {
        throw ConfigError("meter.p_min must be positive and below meter.p_max");
    }
    if (!(k > 0.0)) {
        throw ConfigError("meter.k must be positive");
    }
    if (!(noise_sigma >= 0.0)) {
        throw ConfigError("meter.noise_sigma must be non-negative");
    }
}

double analytic_power(std::uint64_t macs, const AnalyticMeterConfig& cfg, std::uint64_t noise_stream)
{
    const double base = std::clamp(cfg.p_min + cfg.k * std::log1p(static_cast<double>(macs)), cfg.p_min, cfg.p_max);
    if (cfg.noise_sigma <= 0.0) {
        return base;
    }
    Rng rng(derive_seed(cfg.seed, {noise_stream}));
    const double noisy = base + cfg.noise_sigma * standard_normal(rng);
    return std::clamp(noisy, cfg.p_min, cfg.p_max + 6.0 * cfg.noise_sigma);
}

double analytic_power(const PhenotypeSpec& spec, int input_dim, int class_count, const AnalyticMeterConfig& cfg)
{
    return analytic_power(mac_count(spec.layers, true, spec.aux_index, input_dim, class_count), cfg);
}

AnalyticMeter::AnalyticMeter(AnalyticMeterConfig cfg, Workload workload, std::uint64_t seed)
    : cfg_(cfg), workload_(workload), seed_(seed)
{
}

void AnalyticMeter::start()
{
    if (running_) {
        throw MeasurementError("meter started twice");
    }
    running_ = true;
    stopped_ = false;
}

void AnalyticMeter::stop()
{
    if (!running_) {
        throw MeasurementError("meter stopped before start");
    }
    running_ = false;
    stopped_ = true;
}

EnergyReading AnalyticMeter::read()
{
    if (!stopped_) {
        throw MeasurementError("meter read before stop");
    }
    stopped_ = false;
    // Nominal one-second window: the reading converts back to exactly `watts` mJ/s.
    const double watts = analytic_power(workload_.macs_per_sample, {cfg_.p_min, cfg_.p_max, cfg_.k, cfg_.noise_sigma, seed_},
                                        reads_++);
    return {watts * 1000.0, 1.0};
}

AnalyticMeterFactory::AnalyticMeterFactory(AnalyticMeterConfig cfg) : cfg_(cfg)
{
    cfg_.validate();
}

std::unique_ptr<Meter> AnalyticMeterFactory::create(const Workload& workload, std::uint64_t seed) const
{
    return std::make_unique<AnalyticMeter>(cfg_, workload, derive_seed(cfg_.seed, {seed}));
}

void MeterSettings::validate() const
{
    if (n_measures < 1) {
        throw ConfigError("meter.n_measures must be >= 1");
    }
    if (kind == MeterKind::analytic) {
        analytic.validate();
    } else if (script.empty()) {
        throw ConfigError("meter.script needs at least one mJ:s reading");
    }
}

std::unique_ptr<MeterFactory> make_meter_factory(const MeterSettings& settings)
{
    settings.validate();
    if (settings.kind == MeterKind::scripted) {
        return std::make_unique<ScriptedMeterFactory>(settings.script);
    }
    return std::make_unique<AnalyticMeterFactory>(settings.analytic);
}

ProbeResult probe_module_power(const ModuleGene& module, const Grammar& grammar, const MeterFactory& meters,
                               const IoShape& io, int n_measures, std::uint64_t seed, std::size_t batch)
{
    const auto layers = module_layers(module, grammar);
    Rng rng(derive_seed(seed, {0}));
    const auto net = build_network<float>(layers, std::nullopt, io.input_dim, io.class_count, rng);
    Eigen::MatrixXf input(io.input_dim, static_cast<Eigen::Index>(std::max<std::size_t>(batch, 1)));
    for (Eigen::Index k = 0; k < input.size(); ++k) {
        input.data()[k] = static_cast<float>(uniform01(rng));
    }
    ProbeResult result;
    result.macs = mac_count(net);
    auto meter = meters.create({result.macs, static_cast<std::size_t>(input.cols())}, derive_seed(seed, {1}));
    const auto measured = measure_mean(*meter, [&] { return forward<float>(net, input).main(0, 0); }, n_measures);
    result.watts = measured.mean_watts;
    return result;
}

} // namespace greenevo
