#pragma once

#include <string>
#include <vector>

namespace yieldopt {

/// Independent uniform parameter p_i ~ U(mean - half_width, mean + half_width).
struct UncertainParameter {
    double mean = 0.0;
    double half_width = 1.0;
    std::string label;
};

class UncertaintySpec {
public:
    UncertaintySpec() = default;
    /// Throws std::invalid_argument unless every half_width > 0.
    explicit UncertaintySpec(std::vector<UncertainParameter> entries);

    /// Six remanences B_r,i ~ 0.94 +- 0.05 T followed by six magnetization
    /// angles phi_i ~ 0 +- 3 deg.
    static UncertaintySpec pmsm_default();

    std::size_t dim() const { return entries_.size(); }
    const std::vector<UncertainParameter>& entries() const { return entries_; }
    const UncertainParameter& operator[](std::size_t i) const { return entries_[i]; }

    std::vector<double> means() const;
    std::vector<std::string> labels() const;

private:
    std::vector<UncertainParameter> entries_;
};

enum class Direction { at_most, at_least };

/// Performance feature specification Q <= c (at_most) or Q >= c (at_least).
struct PerformanceSpec {
    double threshold = 0.0;
    Direction direction = Direction::at_most;

    /// Maps a QoI value onto the canonical "value <= threshold" form.
    double canonical(double q) const { return direction == Direction::at_least ? -q : q; }
    double canonical_threshold() const { return canonical(threshold); }
    bool satisfied(double q) const { return canonical(q) <= canonical_threshold(); }
};

const char* to_string(Direction d);
Direction direction_from_string(const std::string& s);

}  // namespace yieldopt
