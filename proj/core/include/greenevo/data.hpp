#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace greenevo {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Row-major samples; equivalently a column-major (dims x size) matrix, one
/// sample per column.
struct Dataset {
    std::vector<float> features;
    std::vector<int> labels;
    int dims = 0;
    int class_count = 0;
    std::string source;

    std::size_t size() const noexcept { return labels.size(); }
    bool empty() const noexcept { return labels.empty(); }

    Eigen::Map<const Eigen::MatrixXf> matrix() const
    {
        return {features.data(), dims, static_cast<Eigen::Index>(size())};
    }
    std::span<const float> sample(std::size_t i) const
    {
        return {features.data() + i * static_cast<std::size_t>(dims), static_cast<std::size_t>(dims)};
    }

    /// Throws DataError when sizes or labels are inconsistent.
    void validate() const;
};

/// Raw IDX contents before scaling, kept for bit-exact inspection.
struct IdxImages {
    std::uint32_t count = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint8_t> pixels;
};

IdxImages read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);

/// Images scaled by 1/255, class_count = max label + 1 (at least 10 for
/// Fashion-MNIST style label files).
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Gaussian blobs (unit variance), one per class, centres pairwise
/// `separation` apart, affinely rescaled into [0, 1].
Dataset synthetic_dataset(int classes, int samples_per_class, int dims, double separation, std::uint64_t seed);

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

struct SplitSpec {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct Splits {
    Dataset train;
    Dataset validation;
    Dataset test;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Split sizes are floor(fraction * N).
SplitIndices split_indices(const Dataset& ds, const SplitSpec& spec);
Splits split(const Dataset& ds, const SplitSpec& spec);

/// Exact-count split (e.g. 2000/500/500) drawn without replacement.
SplitIndices split_indices_by_count(const Dataset& ds, std::array<std::size_t, 3> counts, std::uint64_t seed,
                                    bool stratified);
Splits split_by_count(const Dataset& ds, std::array<std::size_t, 3> counts, std::uint64_t seed, bool stratified);

std::vector<std::size_t> class_histogram(const Dataset& ds);

} // namespace greenevo
