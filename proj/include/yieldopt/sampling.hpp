#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "yieldopt/uncertainty.hpp"

namespace yieldopt {

/// Monte Carlo sample points of the uncertain parameters, stored row-major.
class SampleSet {
public:
    SampleSet() = default;
    SampleSet(std::uint64_t seed, std::size_t dim, std::vector<double> values, std::vector<std::string> labels = {});

    std::uint64_t seed() const { return seed_; }
    std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return size() == 0; }
    const std::vector<std::string>& labels() const { return labels_; }

    std::span<const double> operator[](std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    const std::vector<double>& values() const { return values_; }

    /// Copy with the points reordered: result[k] = (*this)[order[k]].
    SampleSet permuted(std::span<const std::size_t> order) const;

    friend bool operator==(const SampleSet&, const SampleSet&) = default;

private:
    std::uint64_t seed_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> values_;
    std::vector<std::string> labels_;
};

/// n independent uniform draws from `spec`; point i coordinate j depends only
/// on (seed, i, j). Throws std::invalid_argument for n == 0.
SampleSet sample_uniform(const UncertaintySpec& spec, std::size_t n, std::uint64_t seed);

/// CSV with one row per point and the parameter labels as header.
void write_samples_csv(const SampleSet& samples, const std::filesystem::path& path);
SampleSet read_samples_csv(const std::filesystem::path& path, std::uint64_t seed = 0);

}  // namespace yieldopt
