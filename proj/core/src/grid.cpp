#include "mlcert/grid.hpp"

#include "mlcert/error.hpp"

namespace mlcert {

GridSpec::GridSpec(const OddSpace& space, std::vector<std::size_t> resolution)
    : resolution_(std::move(resolution)) {
    for (std::size_t i : space.continuous_indices()) {
        const auto& dim = space.dimensions()[i];
        names_.push_back(dim.name());
        lowers_.push_back(dim.continuous().lower());
        uppers_.push_back(dim.continuous().upper());
    }
    if (names_.empty()) {
        throw UnsupportedDimensionError("grid needs at least one continuous dimension");
    }
    if (resolution_.size() == 1 && names_.size() > 1) {
        resolution_.assign(names_.size(), resolution_[0]);
    }
    if (resolution_.size() != names_.size()) {
        throw ConfigError("grid resolution count does not match continuous dimension count");
    }
    num_cells_ = 1;
    cell_volume_ = 1.0;
    for (std::size_t d = 0; d < names_.size(); ++d) {
        if (resolution_[d] == 0) {
            throw ConfigError("grid resolution must be >= 1");
        }
        const double width = (uppers_[d] - lowers_[d]) / static_cast<double>(resolution_[d]);
        widths_.push_back(width);
        num_cells_ *= resolution_[d];
        cell_volume_ *= width;
    }
}

GridSpec::GridSpec(const OddSpace& space, std::size_t resolution)
    : GridSpec(space, std::vector<std::size_t>{resolution}) {}

std::vector<std::size_t> GridSpec::multi_index(std::size_t flat) const {
    std::vector<std::size_t> multi(names_.size());
    for (std::size_t d = names_.size(); d-- > 0;) {
        multi[d] = flat % resolution_[d];
        flat /= resolution_[d];
    }
    return multi;
}

std::size_t GridSpec::flat_index(const std::vector<std::size_t>& multi) const {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < names_.size(); ++d) {
        flat = flat * resolution_[d] + multi[d];
    }
    return flat;
}

double GridSpec::coordinate(std::size_t dim, std::size_t idx) const {
    return lowers_[dim] + (static_cast<double>(idx) + 0.5) * widths_[dim];
}

OddPoint GridSpec::center(std::size_t flat) const {
    const auto multi = multi_index(flat);
    OddPoint p;
    for (std::size_t d = 0; d < names_.size(); ++d) {
        p.set(names_[d], coordinate(d, multi[d]));
    }
    return p;
}

std::vector<OddPoint> GridSpec::centers() const {
    std::vector<OddPoint> points;
    points.reserve(num_cells_);
    for (std::size_t i = 0; i < num_cells_; ++i) {
        points.push_back(center(i));
    }
    return points;
}

GridCell GridSpec::cell(std::size_t flat) const {
    GridCell c;
    c.index = multi_index(flat);
    for (std::size_t d = 0; d < names_.size(); ++d) {
        c.lower.push_back(lowers_[d] + static_cast<double>(c.index[d]) * widths_[d]);
        c.upper.push_back(lowers_[d] + static_cast<double>(c.index[d] + 1) * widths_[d]);
    }
    return c;
}

} // namespace mlcert
