#include "yieldopt/sampling.hpp"

#include <stdexcept>

#include "yieldopt/io.hpp"
#include "yieldopt/random.hpp"

namespace yieldopt {

SampleSet::SampleSet(std::uint64_t seed, std::size_t dim, std::vector<double> values, std::vector<std::string> labels)
    : seed_(seed), dim_(dim), values_(std::move(values)), labels_(std::move(labels)) {
    if (dim_ == 0 || values_.size() % dim_ != 0) throw std::invalid_argument("sample set: values do not fill whole rows");
    if (!labels_.empty() && labels_.size() != dim_) throw std::invalid_argument("sample set: label count mismatch");
}

SampleSet SampleSet::permuted(std::span<const std::size_t> order) const {
    std::vector<double> v;
    v.reserve(order.size() * dim_);
    for (std::size_t i : order) {
        const auto row = (*this)[i];
        v.insert(v.end(), row.begin(), row.end());
    }
    return SampleSet(seed_, dim_, std::move(v), labels_);
}

SampleSet sample_uniform(const UncertaintySpec& spec, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_uniform: need at least one sample");
    if (spec.dim() == 0) throw std::invalid_argument("sample_uniform: empty uncertainty spec");
    const std::size_t d = spec.dim();
    std::vector<double> v(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const auto& e = spec[j];
            const double u = counter_uniform(seed, i, j);
            double value = e.mean - e.half_width + 2.0 * e.half_width * u;
            // Rounding can push mean + r*(2u-1) one ulp past the upper edge.
            if (value > e.mean + e.half_width) value = e.mean + e.half_width;
            v[i * d + j] = value;
        }
    }
    return SampleSet(seed, d, std::move(v), spec.labels());
}

void write_samples_csv(const SampleSet& samples, const std::filesystem::path& path) {
    std::vector<std::string> header = samples.labels();
    if (header.empty()) {
        for (std::size_t j = 0; j < samples.dim(); ++j) header.push_back("p" + std::to_string(j + 1));
    }
    CsvTable t(header);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::vector<std::string> row;
        for (double v : samples[i]) row.push_back(format_double(v));
        t.row(std::move(row));
    }
    t.write(path);
}

SampleSet read_samples_csv(const std::filesystem::path& path, std::uint64_t seed) {
    const auto rows = CsvTable::parse(read_file(path));
    if (rows.empty()) throw std::runtime_error("empty sample file " + path.string());
    const std::size_t d = rows.front().size();
    std::vector<double> v;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != d) throw std::runtime_error("ragged row in " + path.string());
        for (const auto& f : rows[i]) v.push_back(std::stod(f));
    }
    return SampleSet(seed, d, std::move(v), rows.front());
}

}  // namespace yieldopt
