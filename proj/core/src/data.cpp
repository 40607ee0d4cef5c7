#include "greenevo/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "greenevo/error.hpp"
#include "greenevo/rng.hpp"

namespace greenevo {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& buf, std::size_t offset)
{
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

std::string hex(std::uint32_t v)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s = "0x";
    for (int shift = 28; shift >= 0; shift -= 4) {
        s.push_back(digits[(v >> shift) & 0xf]);
    }
    return s;
}

void finalize_split(std::vector<std::size_t>& v)
{
    std::sort(v.begin(), v.end());
}

} // namespace

void Dataset::validate() const
{
    if (dims <= 0 || class_count <= 0) {
        throw DataError("dataset '" + source + "' has non-positive dims or class count");
    }
    if (features.size() != labels.size() * static_cast<std::size_t>(dims)) {
        throw DataError("dataset '" + source + "' feature count does not match labels x dims");
    }
    for (int y : labels) {
        if (y < 0 || y >= class_count) {
            throw DataError("dataset '" + source + "' has label " + std::to_string(y) + " outside [0, " +
                            std::to_string(class_count) + ")");
        }
    }
}

IdxImages read_idx_images(const std::string& path)
{
    const auto buf = read_file(path);
    if (buf.size() < 16) {
        throw DataError("'" + path + "': truncated IDX image header");
    }
    const auto magic = be32(buf, 0);
    if (magic != kIdxImagesMagic) {
        throw DataError("'" + path + "': bad IDX image magic " + hex(magic) + ", expected " + hex(kIdxImagesMagic));
    }
    IdxImages img;
    img.count = be32(buf, 4);
    img.rows = be32(buf, 8);
    img.cols = be32(buf, 12);
    const auto expected = std::uint64_t{img.count} * img.rows * img.cols;
    if (buf.size() - 16 < expected) {
        throw DataError("'" + path + "': truncated IDX image data (" + std::to_string(buf.size() - 16) + " of " +
                        std::to_string(expected) + " bytes)");
    }
    img.pixels.assign(buf.begin() + 16, buf.begin() + 16 + static_cast<std::ptrdiff_t>(expected));
    return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path)
{
    const auto buf = read_file(path);
    if (buf.size() < 8) {
        throw DataError("'" + path + "': truncated IDX label header");
    }
    const auto magic = be32(buf, 0);
    if (magic != kIdxLabelsMagic) {
        throw DataError("'" + path + "': bad IDX label magic " + hex(magic) + ", expected " + hex(kIdxLabelsMagic));
    }
    const auto count = be32(buf, 4);
    if (buf.size() - 8 < count) {
        throw DataError("'" + path + "': truncated IDX label data");
    }
    return {buf.begin() + 8, buf.begin() + 8 + count};
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path)
{
    const auto images = read_idx_images(images_path);
    const auto labels = read_idx_labels(labels_path);
    if (labels.size() != images.count) {
        throw DataError("image count " + std::to_string(images.count) + " does not match label count " +
                        std::to_string(labels.size()));
    }
    Dataset ds;
    ds.dims = static_cast<int>(images.rows * images.cols);
    ds.source = images_path;
    ds.features.resize(images.pixels.size());
    std::transform(images.pixels.begin(), images.pixels.end(), ds.features.begin(),
                   [](std::uint8_t p) { return static_cast<float>(p) / 255.0f; });
    ds.labels.assign(labels.begin(), labels.end());
    const int max_label = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end());
    ds.class_count = max_label + 1;
    ds.validate();
    return ds;
}

Dataset synthetic_dataset(int classes, int samples_per_class, int dims, double separation, std::uint64_t seed)
{
    if (classes <= 0 || samples_per_class <= 0 || dims <= 0 || separation < 0.0) {
        throw DataError("synthetic dataset needs positive classes, samples and dims, and non-negative separation");
    }
    Rng rng(seed);
    const std::size_t n = static_cast<std::size_t>(classes) * static_cast<std::size_t>(samples_per_class);
    std::vector<double> raw(n * static_cast<std::size_t>(dims));
    Dataset ds;
    ds.dims = dims;
    ds.class_count = classes;
    ds.source = "synthetic";
    ds.labels.resize(n);
    const bool simplex = dims >= classes;
    const double offset = separation / std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % static_cast<std::size_t>(classes));
        ds.labels[i] = y;
        for (int d = 0; d < dims; ++d) {
            double centre = 0.0;
            if (simplex) {
                centre = d == y ? offset : 0.0;
            } else if (d == 0) {
                centre = y * separation;
            }
            raw[i * static_cast<std::size_t>(dims) + static_cast<std::size_t>(d)] = centre + standard_normal(rng);
        }
    }
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double min = *lo;
    const double range = *hi - *lo;
    ds.features.resize(raw.size());
    std::transform(raw.begin(), raw.end(), ds.features.begin(), [&](double v) {
        return range > 0.0 ? static_cast<float>((v - min) / range) : 0.5f;
    });
    return ds;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices)
{
    Dataset out;
    out.dims = ds.dims;
    out.class_count = ds.class_count;
    out.source = ds.source;
    out.labels.reserve(indices.size());
    out.features.reserve(indices.size() * static_cast<std::size_t>(ds.dims));
    for (auto i : indices) {
        if (i >= ds.size()) {
            throw DataError("subset index out of range");
        }
        out.labels.push_back(ds.labels[i]);
        const auto s = ds.sample(i);
        out.features.insert(out.features.end(), s.begin(), s.end());
    }
    return out;
}

SplitIndices split_indices_by_count(const Dataset& ds, std::array<std::size_t, 3> counts, std::uint64_t seed,
                                    bool stratified)
{
    const std::size_t n = ds.size();
    const std::size_t total = counts[0] + counts[1] + counts[2];
    if (total > n) {
        throw DataError("split requests " + std::to_string(total) + " samples from a dataset of " + std::to_string(n));
    }
    Rng rng(seed);
    std::array<std::vector<std::size_t>, 3> out;
    if (!stratified) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        shuffle(idx.begin(), idx.end(), rng);
        auto it = idx.begin();
        for (int s = 0; s < 3; ++s) {
            out[s].assign(it, it + static_cast<std::ptrdiff_t>(counts[s]));
            it += static_cast<std::ptrdiff_t>(counts[s]);
        }
    } else {
        std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.class_count));
        for (std::size_t i = 0; i < n; ++i) {
            by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
        }
        const std::size_t k = by_class.size();
        std::vector<std::array<std::size_t, 3>> quota(k, {0, 0, 0});
        std::vector<std::size_t> used(k, 0);
        for (int s = 0; s < 3; ++s) {
            // largest-remainder apportionment of counts[s] across classes
            std::vector<std::pair<double, std::size_t>> remainders;
            std::size_t assigned = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double exact = static_cast<double>(counts[s]) * static_cast<double>(by_class[c].size()) /
                                     static_cast<double>(n);
                auto q = static_cast<std::size_t>(std::floor(exact));
                q = std::min(q, by_class[c].size() - used[c]);
                quota[c][s] = q;
                used[c] += q;
                assigned += q;
                remainders.emplace_back(exact - std::floor(exact), c);
            }
            std::stable_sort(remainders.begin(), remainders.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });
            std::size_t left = counts[s] - assigned;
            while (left > 0) {
                bool progressed = false;
                for (const auto& [frac, c] : remainders) {
                    if (left == 0) {
                        break;
                    }
                    if (used[c] < by_class[c].size()) {
                        ++quota[c][s];
                        ++used[c];
                        --left;
                        progressed = true;
                    }
                }
                if (!progressed) {
                    throw DataError("stratified split ran out of samples");
                }
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            auto& members = by_class[c];
            shuffle(members.begin(), members.end(), rng);
            auto it = members.begin();
            for (int s = 0; s < 3; ++s) {
                out[s].insert(out[s].end(), it, it + static_cast<std::ptrdiff_t>(quota[c][s]));
                it += static_cast<std::ptrdiff_t>(quota[c][s]);
            }
        }
    }
    for (auto& v : out) {
        finalize_split(v);
    }
    return {std::move(out[0]), std::move(out[1]), std::move(out[2])};
}

SplitIndices split_indices(const Dataset& ds, const SplitSpec& spec)
{
    if (!(spec.train > 0.0) || !(spec.validation > 0.0) || !(spec.test > 0.0)) {
        throw DataError("split fractions must be positive");
    }
    if (spec.train + spec.validation + spec.test > 1.0 + 1e-12) {
        throw DataError("split fractions sum to more than 1");
    }
    const auto n = static_cast<double>(ds.size());
    const auto count = [&](double f) { return static_cast<std::size_t>(std::floor(f * n + 1e-9)); };
    std::array<std::size_t, 3> counts{count(spec.train), count(spec.validation), count(spec.test)};
    while (counts[0] + counts[1] + counts[2] > ds.size()) {
        // rounding guard when fractions sum to exactly 1
        --counts[0];
    }
    return split_indices_by_count(ds, counts, spec.seed, spec.stratified);
}

Splits split(const Dataset& ds, const SplitSpec& spec)
{
    const auto idx = split_indices(ds, spec);
    return {subset(ds, idx.train), subset(ds, idx.validation), subset(ds, idx.test)};
}

Splits split_by_count(const Dataset& ds, std::array<std::size_t, 3> counts, std::uint64_t seed, bool stratified)
{
    const auto idx = split_indices_by_count(ds, counts, seed, stratified);
    return {subset(ds, idx.train), subset(ds, idx.validation), subset(ds, idx.test)};
}

std::vector<std::size_t> class_histogram(const Dataset& ds)
{
    std::vector<std::size_t> h(static_cast<std::size_t>(std::max(ds.class_count, 0)), 0);
    for (int y : ds.labels) {
        if (y >= 0 && y < ds.class_count) {
            ++h[static_cast<std::size_t>(y)];
        }
    }
    return h;
}

} // namespace greenevo
