#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mlcert/odd.hpp"

namespace mlcert {

// One cell of a tensor grid: per-dimension index and bounds, in the order of
// the space's continuous dimensions.
struct GridCell {
    std::vector<std::size_t> index;
    std::vector<double> lower;
    std::vector<double> upper;
};

// Tensor grid of cell centers over the continuous dimensions of an ODD
// space. Flat indices run with the last dimension fastest; the candidate
// ordering is the tie-break order used by the acquisition functions.
class GridSpec {
public:
    GridSpec(const OddSpace& space, std::vector<std::size_t> resolution);

    // Same resolution along every continuous dimension.
    GridSpec(const OddSpace& space, std::size_t resolution);

    std::size_t num_dimensions() const { return names_.size(); }
    std::size_t num_cells() const { return num_cells_; }
    const std::vector<std::size_t>& resolution() const { return resolution_; }
    const std::vector<std::string>& dimension_names() const { return names_; }

    double cell_volume() const { return cell_volume_; }
    double cell_width(std::size_t dim) const { return widths_[dim]; }
    double dimension_lower(std::size_t dim) const { return lowers_[dim]; }
    double dimension_upper(std::size_t dim) const { return uppers_[dim]; }

    std::vector<std::size_t> multi_index(std::size_t flat) const;
    std::size_t flat_index(const std::vector<std::size_t>& multi) const;

    double coordinate(std::size_t dim, std::size_t idx) const;
    OddPoint center(std::size_t flat) const;
    std::vector<OddPoint> centers() const;
    GridCell cell(std::size_t flat) const;

private:
    std::vector<std::string> names_;
    std::vector<double> lowers_;
    std::vector<double> uppers_;
    std::vector<double> widths_;
    std::vector<std::size_t> resolution_;
    std::size_t num_cells_ = 0;
    double cell_volume_ = 0.0;
};

} // namespace mlcert
