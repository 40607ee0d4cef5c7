#include "greenevo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "greenevo/error.hpp"
#include "greenevo/serialize.hpp"

namespace greenevo {

namespace {

// Sum over tie groups of t^3 - t.
double tie_term(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) {
            ++j;
        }
        const auto t = static_cast<double>(j - i);
        sum += t * t * t - t;
        i = j;
    }
    return sum;
}

double binomial(std::size_t n, std::size_t k)
{
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return std::round(c);
}

void require_nonempty(std::span<const double> v, const char* what)
{
    if (v.empty()) {
        throw StatsError(std::string(what) + ": empty sample");
    }
    for (double x : v) {
        if (std::isnan(x)) {
            throw StatsError(std::string(what) + ": NaN in sample");
        }
    }
}

double normal_cdf(double z)
{
    return boost::math::cdf(boost::math::normal_distribution<double>(), z);
}

double normal_sf(double z)
{
    return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), z));
}

TestResult mw_exact(const std::vector<double>& ranks, std::size_t na, double u, Tail alt)
{
    const std::size_t n = ranks.size();
    if (binomial(n, na) > static_cast<double>(kExactEnumerationCap)) {
        throw StatsError("exact Mann-Whitney needs more than 200000 arrangements; use approximate mode");
    }
    // Doubled midranks are integers, so rank sums are compared exactly.
    std::vector<long> doubled(n);
    long total_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        doubled[i] = std::lround(2.0 * ranks[i]);
        total_sum += doubled[i];
    }
    long observed = 0;
    for (std::size_t i = 0; i < na; ++i) {
        observed += doubled[i];
    }
    // count[k][s]: subsets of size k with doubled rank sum s.
    std::vector<std::vector<double>> count(na + 1, std::vector<double>(static_cast<std::size_t>(total_sum) + 1, 0.0));
    count[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(doubled[i]);
        for (std::size_t k = std::min(na, i + 1); k >= 1; --k) {
            auto& dst = count[k];
            const auto& src = count[k - 1];
            for (std::size_t s = dst.size(); s-- > r;) {
                dst[s] += src[s - r];
            }
        }
    }
    double le = 0.0;
    double ge = 0.0;
    double all = 0.0;
    for (std::size_t s = 0; s < count[na].size(); ++s) {
        const double c = count[na][s];
        all += c;
        if (static_cast<long>(s) <= observed) {
            le += c;
        }
        if (static_cast<long>(s) >= observed) {
            ge += c;
        }
    }
    TestResult res;
    res.statistic = u;
    res.method = TestMethod::exact;
    switch (alt) {
    case Tail::less:
        res.p_value = le / all;
        break;
    case Tail::greater:
        res.p_value = ge / all;
        break;
    case Tail::two_sided:
        res.p_value = std::min(1.0, 2.0 * std::min(le, ge) / all);
        break;
    }
    return res;
}

TestResult mw_normal(std::size_t na, std::size_t nb, double u, double ties, Tail alt)
{
    const double a = static_cast<double>(na);
    const double b = static_cast<double>(nb);
    const double n = a + b;
    const double mu = a * b / 2.0;
    const double var = a * b / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    TestResult res;
    res.statistic = u;
    res.method = TestMethod::approximate;
    if (!(var > 0.0)) {
        res.degenerate = true;
        res.p_value = 1.0;
        return res;
    }
    const double sigma = std::sqrt(var);
    switch (alt) {
    case Tail::less:
        res.p_value = normal_cdf((u - mu + 0.5) / sigma);
        break;
    case Tail::greater:
        res.p_value = normal_sf((u - mu - 0.5) / sigma);
        break;
    case Tail::two_sided: {
        const double dev = std::abs(u - mu) - 0.5;
        res.p_value = dev <= 0.0 ? 1.0 : std::min(1.0, 2.0 * normal_sf(dev / sigma));
        break;
    }
    }
    return res;
}

double median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

} // namespace

std::string_view to_string(TestMethod method) noexcept
{
    return method == TestMethod::exact ? "exact" : "approximate";
}

std::vector<double> midranks(std::span<const double> values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) {
            ++j;
        }
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = r;
        }
        i = j;
    }
    return ranks;
}

TestResult kruskal_wallis(std::span<const SampleGroup> groups)
{
    if (groups.size() < 2) {
        throw StatsError("Kruskal-Wallis needs at least two groups");
    }
    std::vector<double> pooled;
    for (const auto& g : groups) {
        require_nonempty(g.values, "Kruskal-Wallis");
        pooled.insert(pooled.end(), g.values.begin(), g.values.end());
    }
    const auto ranks = midranks(pooled);
    const double n = static_cast<double>(pooled.size());
    double h = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double r = 0.0;
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            r += ranks[offset + i];
        }
        offset += g.values.size();
        h += r * r / static_cast<double>(g.values.size());
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    const double correction = 1.0 - tie_term(pooled) / (n * n * n - n);
    TestResult res;
    res.method = TestMethod::approximate;
    if (!(correction > 0.0)) {
        res.degenerate = true;
        res.statistic = 0.0;
        res.p_value = 1.0;
        return res;
    }
    h = std::max(0.0, h / correction);
    res.statistic = h;
    const boost::math::chi_squared_distribution<double> chi2(static_cast<double>(groups.size() - 1));
    res.p_value = h == 0.0 ? 1.0 : std::clamp(boost::math::cdf(boost::math::complement(chi2, h)), 0.0, 1.0);
    return res;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, MannWhitneyMode mode,
                          Tail alternative)
{
    require_nonempty(a, "Mann-Whitney");
    require_nonempty(b, "Mann-Whitney");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = midranks(pooled);
    const double na = static_cast<double>(a.size());
    double ra = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ra += ranks[i];
    }
    const double u = ra - na * (na + 1.0) / 2.0;

    if (mode == MannWhitneyMode::automatic) {
        mode = binomial(pooled.size(), a.size()) <= static_cast<double>(kExactEnumerationCap) ? MannWhitneyMode::exact
                                                                                              : MannWhitneyMode::approximate;
    }
    TestResult res = mode == MannWhitneyMode::exact ? mw_exact(ranks, a.size(), u, alternative)
                                                    : mw_normal(a.size(), b.size(), u, tie_term(pooled), alternative);
    if (tie_term(pooled) == static_cast<double>(pooled.size()) * (static_cast<double>(pooled.size()) * pooled.size() - 1.0)) {
        res.degenerate = true;
    }
    return res;
}

TestResult mann_whitney_u(const SampleGroup& a, const SampleGroup& b, MannWhitneyMode mode, Tail alternative)
{
    return mann_whitney_u(std::span<const double>(a.values), std::span<const double>(b.values), mode, alternative);
}

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m)
{
    if (m < 1 || m < p_values.size()) {
        throw StatsError("Bonferroni: m must be at least the number of p-values");
    }
    std::vector<double> out;
    out.reserve(p_values.size());
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw StatsError("Bonferroni: p-value outside [0, 1]");
        }
        out.push_back(std::min(1.0, p * static_cast<double>(m)));
    }
    return out;
}

std::vector<SummaryRow> summarize(std::span<const SampleGroup> groups, std::size_t baseline_index)
{
    if (baseline_index >= groups.size()) {
        throw StatsError("summarize: baseline group out of range");
    }
    std::vector<SummaryRow> rows;
    for (const auto& g : groups) {
        require_nonempty(g.values, "summarize");
        SummaryRow r;
        r.label = g.label;
        r.n = g.values.size();
        r.mean = std::accumulate(g.values.begin(), g.values.end(), 0.0) / static_cast<double>(r.n);
        if (r.n > 1) {
            double ss = 0.0;
            for (double v : g.values) {
                ss += (v - r.mean) * (v - r.mean);
            }
            r.sd = std::sqrt(ss / static_cast<double>(r.n - 1));
        }
        r.median = median_of(g.values);
        rows.push_back(std::move(r));
    }
    const double base = rows[baseline_index].median;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i != baseline_index) {
            rows[i].diff_to_baseline = rows[i].median - base;
        }
    }
    return rows;
}

namespace {

std::vector<GenerationRow> pooled_rows(const std::vector<GenerationRow>& rows, Pooling pooling)
{
    auto best = best_per_generation(rows);
    if (pooling == Pooling::all_generations) {
        return best;
    }
    std::map<int, GenerationRow> last;
    for (const auto& r : best) {
        auto it = last.find(r.run);
        if (it == last.end() || r.generation > it->second.generation) {
            last[r.run] = r;
        }
    }
    std::vector<GenerationRow> out;
    for (auto& [run, r] : last) {
        out.push_back(r);
    }
    return out;
}

template <class F>
SampleGroup group_of(std::string label, const std::vector<GenerationRow>& rows, F&& field)
{
    SampleGroup g{std::move(label), {}};
    for (const auto& r : rows) {
        g.values.push_back(field(r));
    }
    return g;
}

PairwiseMatrix pairwise(std::string metric, const std::vector<SampleGroup>& groups)
{
    PairwiseMatrix m;
    m.metric = std::move(metric);
    const std::size_t k = groups.size();
    std::vector<double> raw;
    for (std::size_t i = 0; i < k; ++i) {
        m.labels.push_back(groups[i].label);
        for (std::size_t j = 0; j < i; ++j) {
            raw.push_back(mann_whitney_u(groups[i], groups[j]).p_value);
        }
    }
    const auto adjusted = bonferroni(raw, raw.size());
    m.p.assign(k, std::vector<std::optional<double>>(k));
    std::size_t idx = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            m.p[i][j] = adjusted[idx++];
        }
    }
    return m;
}

std::map<int, std::vector<GenerationRow>> by_generation(const std::vector<GenerationRow>& best)
{
    std::map<int, std::vector<GenerationRow>> out;
    for (const auto& r : best) {
        out[r.generation].push_back(r);
    }
    return out;
}

template <class F>
double mean_of(const std::vector<GenerationRow>& rows, F&& field)
{
    double s = 0.0;
    for (const auto& r : rows) {
        s += field(r);
    }
    return s / static_cast<double>(rows.size());
}

std::string csv_cell(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

std::string pairwise_csv(const PairwiseMatrix& m)
{
    std::string out = "group";
    for (const auto& l : m.labels) {
        out += "," + csv_cell(l);
    }
    out += "\n";
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out += csv_cell(m.labels[i]);
        for (std::size_t j = 0; j < m.labels.size(); ++j) {
            out += ",";
            if (m.p[i][j]) {
                out += format_double(*m.p[i][j]);
            }
        }
        out += "\n";
    }
    return out;
}

} // namespace

AnalysisReport analyze_experiments(const std::vector<GenerationRow>& baseline, const std::vector<GenerationRow>& proposed,
                                   Pooling pooling)
{
    if (baseline.empty() || proposed.empty()) {
        throw StatsError("no data: both experiments need at least one generations.csv row");
    }
    const auto base = pooled_rows(baseline, pooling);
    const auto prop = pooled_rows(proposed, pooling);

    const std::vector<SampleGroup> acc{
        group_of("Baseline/Accuracy", base, [](const GenerationRow& r) { return r.acc_left; }),
        group_of("Proposed/Accuracy_left", prop, [](const GenerationRow& r) { return r.acc_left; }),
        group_of("Proposed/Accuracy_right", prop, [](const GenerationRow& r) { return r.acc_right; })};
    const std::vector<SampleGroup> pow{
        group_of("Baseline/Power", base, [](const GenerationRow& r) { return r.power_left; }),
        group_of("Proposed/Power_left", prop, [](const GenerationRow& r) { return r.power_left; }),
        group_of("Proposed/Power_right", prop, [](const GenerationRow& r) { return r.power_right; })};

    AnalysisReport rep;
    rep.accuracy = summarize(acc, 0);
    rep.power = summarize(pow, 0);
    rep.accuracy_pairwise = pairwise("accuracy", acc);
    rep.power_pairwise = pairwise("power", pow);
    rep.kruskal.push_back({"accuracy", kruskal_wallis(acc), acc.size()});
    rep.kruskal.push_back({"power", kruskal_wallis(pow), pow.size()});

    const auto base_gen = by_generation(best_per_generation(baseline));
    const auto prop_gen = by_generation(best_per_generation(proposed));
    for (const auto& [g, b] : base_gen) {
        auto it = prop_gen.find(g);
        if (it == prop_gen.end()) {
            continue;
        }
        const auto& p = it->second;
        MbfRow row;
        row.generation = g;
        row.baseline_fitness = mean_of(b, [](const GenerationRow& r) { return r.fitness; });
        row.proposed_fitness = mean_of(p, [](const GenerationRow& r) { return r.fitness; });
        row.baseline_accuracy = mean_of(b, [](const GenerationRow& r) { return r.acc_left; });
        row.proposed_acc_left = mean_of(p, [](const GenerationRow& r) { return r.acc_left; });
        row.proposed_acc_right = mean_of(p, [](const GenerationRow& r) { return r.acc_right; });
        row.baseline_power = mean_of(b, [](const GenerationRow& r) { return r.power_left; });
        row.proposed_power_left = mean_of(p, [](const GenerationRow& r) { return r.power_left; });
        row.proposed_power_right = mean_of(p, [](const GenerationRow& r) { return r.power_right; });
        rep.mbf.push_back(row);
    }
    return rep;
}

void write_analysis(const AnalysisReport& rep, const std::string& directory)
{
    const std::filesystem::path dir(directory);
    std::string summary = "experiment,metric,n,mean,sd,median,diff_to_baseline\n";
    for (const auto* rows : {&rep.accuracy, &rep.power}) {
        for (const auto& r : *rows) {
            const auto slash = r.label.find('/');
            summary += csv_cell(r.label.substr(0, slash)) + "," +
                       csv_cell(slash == std::string::npos ? std::string{} : r.label.substr(slash + 1)) + ",";
            summary += std::to_string(r.n) + "," + format_double(r.mean) + "," + format_double(r.sd) + "," +
                       format_double(r.median) + ",";
            if (r.diff_to_baseline) {
                summary += format_double(*r.diff_to_baseline);
            }
            summary += "\n";
        }
    }
    write_text_file((dir / "summary.csv").string(), summary);
    write_text_file((dir / "accuracy_pairwise.csv").string(), pairwise_csv(rep.accuracy_pairwise));
    write_text_file((dir / "power_pairwise.csv").string(), pairwise_csv(rep.power_pairwise));

    std::string kw = "metric,groups,H,p_value,method,degenerate\n";
    for (const auto& k : rep.kruskal) {
        kw += k.metric + "," + std::to_string(k.groups) + "," + format_double(k.result.statistic) + "," +
              format_double(k.result.p_value) + "," + std::string(to_string(k.result.method)) + "," +
              (k.result.degenerate ? "1" : "0") + "\n";
    }
    write_text_file((dir / "kruskal.csv").string(), kw);

    std::string mbf = "generation,baseline_fitness,proposed_fitness,baseline_accuracy,proposed_acc_left,"
                      "proposed_acc_right,baseline_power_w,proposed_power_left_w,proposed_power_right_w\n";
    for (const auto& r : rep.mbf) {
        mbf += std::to_string(r.generation) + "," + format_double(r.baseline_fitness) + "," +
               format_double(r.proposed_fitness) + "," + format_double(r.baseline_accuracy) + "," +
               format_double(r.proposed_acc_left) + "," + format_double(r.proposed_acc_right) + "," +
               format_double(r.baseline_power) + "," + format_double(r.proposed_power_left) + "," +
               format_double(r.proposed_power_right) + "\n";
    }
    write_text_file((dir / "mbf.csv").string(), mbf);
}

} // namespace greenevo
