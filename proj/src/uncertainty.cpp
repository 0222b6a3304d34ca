#include "yieldopt/uncertainty.hpp"

#include <cmath>
#include <stdexcept>

#include "yieldopt/pmsm_constants.hpp"

namespace yieldopt {

UncertaintySpec::UncertaintySpec(std::vector<UncertainParameter> entries) : entries_(std::move(entries)) {
    for (const auto& e : entries_) {
        if (!(e.half_width > 0.0) || !std::isfinite(e.half_width) || !std::isfinite(e.mean)) {
            throw std::invalid_argument("uncertain parameter '" + e.label + "' needs a finite mean and half_width > 0");
        }
    }
}

UncertaintySpec UncertaintySpec::pmsm_default() {
    std::vector<UncertainParameter> e;
    for (int i = 1; i <= pmsm::magnet_count; ++i) {
        e.push_back({pmsm::remanence_mean, pmsm::remanence_half_width, "Br" + std::to_string(i)});
    }
    for (int i = 1; i <= pmsm::magnet_count; ++i) {
        e.push_back({pmsm::angle_mean_deg, pmsm::angle_half_width_deg, "phi" + std::to_string(i)});
    }
    return UncertaintySpec(std::move(e));
}

std::vector<double> UncertaintySpec::means() const {
    std::vector<double> m;
    m.reserve(entries_.size());
    for (const auto& e : entries_) m.push_back(e.mean);
    return m;
}

std::vector<std::string> UncertaintySpec::labels() const {
    std::vector<std::string> l;
    l.reserve(entries_.size());
    for (const auto& e : entries_) l.push_back(e.label);
    return l;
}

const char* to_string(Direction d) { return d == Direction::at_least ? "at_least" : "at_most"; }

Direction direction_from_string(const std::string& s) {
    if (s == "at_least") return Direction::at_least;
    if (s == "at_most") return Direction::at_most;
    throw std::invalid_argument("unknown direction '" + s + "' (expected at_least or at_most)");
}

}  // namespace yieldopt
