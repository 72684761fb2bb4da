#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mlcert/truncated_normal.hpp"

namespace mlcert {

// Finite discrete dimension (airport, runway class, ...). Values are stored
// as the category index. Participates in density products and sampling but
// is excluded from surrogate inputs.
class Categorical {
public:
    Categorical(std::vector<std::string> categories, std::vector<double> probabilities);

    const std::vector<std::string>& categories() const { return categories_; }
    const std::vector<double>& probabilities() const { return probabilities_; }

    // Probability mass of category `index`; 0 for out-of-range or
    // non-integral values.
    double pmf(double index) const;

    // Inverse-CDF draw, returned as a category index.
    double sample_index(double unit) const;

private:
    std::vector<std::string> categories_;
    std::vector<double> probabilities_;
};

class OddDimension {
public:
    OddDimension(std::string name, std::string unit, TruncatedNormal dist);
    OddDimension(std::string name, std::string unit, Categorical dist);

    const std::string& name() const { return name_; }
    const std::string& unit() const { return unit_; }
    bool is_continuous() const;
    const TruncatedNormal& continuous() const;
    const Categorical& categorical() const;

private:
    std::string name_;
    std::string unit_;
    std::variant<TruncatedNormal, Categorical> dist_;
};

// One sample of the operational domain: dimension name -> value.
class OddPoint {
public:
    OddPoint() = default;
    explicit OddPoint(std::map<std::string, double> values) : values_(std::move(values)) {}

    double at(std::string_view name) const; // throws SchemaError when missing
    bool has(std::string_view name) const;
    void set(std::string name, double value) { values_[std::move(name)] = value; }
    const std::map<std::string, double>& values() const { return values_; }

    bool operator==(const OddPoint&) const = default;

private:
    std::map<std::string, double> values_;
};

// Parametric operational design domain: independent dimensions whose joint
// density is the product of the marginals, conditioned on an operational
// event (e.g. "approach"). Immutable value type.
class OddSpace {
public:
    explicit OddSpace(std::vector<OddDimension> dimensions, std::string conditioning = "");

    const std::vector<OddDimension>& dimensions() const { return dimensions_; }
    const std::string& conditioning() const { return conditioning_; }
    std::size_t num_dimensions() const { return dimensions_.size(); }

    const OddDimension& dimension(std::string_view name) const;
    bool has_dimension(std::string_view name) const;

    std::vector<std::size_t> continuous_indices() const;
    std::size_t num_continuous() const;
    bool all_continuous() const;

    // Product of per-dimension densities; 0 when any coordinate is outside
    // its truncation interval. Missing coordinates raise SchemaError.
    double density(const OddPoint& point) const;

    // Per-dimension inverse-CDF sampling with decorrelated substreams
    // derived from `seed`. Bit-reproducible.
    std::vector<OddPoint> sample(std::size_t n, std::uint64_t seed) const;

    // New space whose named continuous dimension is truncated to the
    // intersection of its interval with [lo, hi]. Density renormalizes by
    // construction. Empty intersection raises InvalidRestrictionError.
    OddSpace restricted(std::string_view dimension, double lo, double hi) const;

private:
    std::vector<OddDimension> dimensions_;
    std::string conditioning_;
};

// ODD specification file schema:
//   {"dimensions": [{"name", "unit", "mu", "sigma", "lower", "upper"} |
//                   {"name", "unit", "categories": [...], "probabilities": [...]}],
//    "conditioning": "approach"}
// Round-trips losslessly.
OddSpace odd_space_from_json(const nlohmann::json& j);
nlohmann::json odd_space_to_json(const OddSpace& space);

nlohmann::json odd_point_to_json(const OddPoint& point);
OddPoint odd_point_from_json(const nlohmann::json& j);

} // namespace mlcert
