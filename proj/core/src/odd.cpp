#include "mlcert/odd.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "mlcert/error.hpp"
#include "mlcert/rng.hpp"

namespace mlcert {

Categorical::Categorical(std::vector<std::string> categories, std::vector<double> probabilities)
    : categories_(std::move(categories)), probabilities_(std::move(probabilities)) {
    if (categories_.empty() || categories_.size() != probabilities_.size()) {
        throw DomainError("categorical needs matching, non-empty category and probability lists");
    }
    double total = 0.0;
    for (double p : probabilities_) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw DomainError("categorical probabilities must be finite and >= 0");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw DomainError("categorical probabilities must sum to 1");
    }
}

double Categorical::pmf(double index) const {
    if (!std::isfinite(index)) {
        throw DomainError("categorical value must be finite");
    }
    const double rounded = std::round(index);
    if (rounded != index || rounded < 0.0 ||
        rounded >= static_cast<double>(categories_.size())) {
        return 0.0;
    }
    return probabilities_[static_cast<std::size_t>(rounded)];
}

double Categorical::sample_index(double unit) const {
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probabilities_.size(); ++i) {
        cumulative += probabilities_[i];
        if (unit < cumulative) {
            return static_cast<double>(i);
        }
    }
    return static_cast<double>(probabilities_.size() - 1);
}

OddDimension::OddDimension(std::string name, std::string unit, TruncatedNormal dist)
    : name_(std::move(name)), unit_(std::move(unit)), dist_(std::move(dist)) {
    if (name_.empty()) {
        throw SchemaError("dimension name must be non-empty");
    }
}

OddDimension::OddDimension(std::string name, std::string unit, Categorical dist)
    : name_(std::move(name)), unit_(std::move(unit)), dist_(std::move(dist)) {
    if (name_.empty()) {
        throw SchemaError("dimension name must be non-empty");
    }
}

bool OddDimension::is_continuous() const {
    return std::holds_alternative<TruncatedNormal>(dist_);
}

const TruncatedNormal& OddDimension::continuous() const {
    if (!is_continuous()) {
        throw SchemaError("dimension '" + name_ + "' is not continuous");
    }
    return std::get<TruncatedNormal>(dist_);
}

const Categorical& OddDimension::categorical() const {
    if (is_continuous()) {
        throw SchemaError("dimension '" + name_ + "' is not categorical");
    }
    return std::get<Categorical>(dist_);
}

double OddPoint::at(std::string_view name) const {
    auto it = values_.find(std::string(name));
    if (it == values_.end()) {
        throw SchemaError("point is missing dimension '" + std::string(name) + "'");
    }
    return it->second;
}

bool OddPoint::has(std::string_view name) const {
    return values_.count(std::string(name)) > 0;
}

OddSpace::OddSpace(std::vector<OddDimension> dimensions, std::string conditioning)
    : dimensions_(std::move(dimensions)), conditioning_(std::move(conditioning)) {
    if (dimensions_.empty()) {
        throw SchemaError("ODD space needs at least one dimension");
    }
    std::set<std::string> names;
    for (const auto& dim : dimensions_) {
        if (!names.insert(dim.name()).second) {
            throw SchemaError("duplicate dimension name '" + dim.name() + "'");
        }
    }
}

const OddDimension& OddSpace::dimension(std::string_view name) const {
    for (const auto& dim : dimensions_) {
        if (dim.name() == name) {
            return dim;
        }
    }
    throw SchemaError("unknown dimension '" + std::string(name) + "'");
}

bool OddSpace::has_dimension(std::string_view name) const {
    return std::any_of(dimensions_.begin(), dimensions_.end(),
                       [&](const OddDimension& d) { return d.name() == name; });
}

std::vector<std::size_t> OddSpace::continuous_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dimensions_.size(); ++i) {
        if (dimensions_[i].is_continuous()) {
            idx.push_back(i);
        }
    }
    return idx;
}

std::size_t OddSpace::num_continuous() const {
    return continuous_indices().size();
}

bool OddSpace::all_continuous() const {
    return num_continuous() == dimensions_.size();
}

double OddSpace::density(const OddPoint& point) const {
    double product = 1.0;
    for (const auto& dim : dimensions_) {
        const double value = point.at(dim.name());
        if (!std::isfinite(value)) {
            throw DomainError("coordinate '" + dim.name() + "' must be finite");
        }
        const double factor = dim.is_continuous() ? dim.continuous().pdf(value)
                                                  : dim.categorical().pmf(value);
        if (factor == 0.0) {
            return 0.0;
        }
        product *= factor;
    }
    return product;
}

std::vector<OddPoint> OddSpace::sample(std::size_t n, std::uint64_t seed) const {
    std::vector<OddPoint> points(n);
    for (std::size_t d = 0; d < dimensions_.size(); ++d) {
        const auto& dim = dimensions_[d];
        UniformSource rng(derive_seed(seed, d));
        if (dim.is_continuous()) {
            const auto& dist = dim.continuous();
            for (std::size_t i = 0; i < n; ++i) {
                points[i].set(dim.name(), dist.quantile(rng.next_unit()));
            }
        } else {
            const auto& dist = dim.categorical();
            for (std::size_t i = 0; i < n; ++i) {
                points[i].set(dim.name(), dist.sample_index(rng.next_unit()));
            }
        }
    }
    return points;
}

OddSpace OddSpace::restricted(std::string_view name, double lo, double hi) const {
    std::vector<OddDimension> dims;
    dims.reserve(dimensions_.size());
    bool found = false;
    for (const auto& dim : dimensions_) {
        if (dim.name() != name) {
            dims.push_back(dim);
            continue;
        }
        found = true;
        if (!dim.is_continuous()) {
            throw InvalidRestrictionError("cannot interval-restrict categorical dimension '" +
                                          std::string(name) + "'");
        }
        const auto& dist = dim.continuous();
        const double new_lo = std::max(lo, dist.lower());
        const double new_hi = std::min(hi, dist.upper());
        if (!(new_lo < new_hi)) {
            throw InvalidRestrictionError("restriction of '" + std::string(name) +
                                          "' yields an empty interval");
        }
        dims.emplace_back(dim.name(), dim.unit(),
                          TruncatedNormal(dist.mu(), dist.sigma(), new_lo, new_hi));
    }
    if (!found) {
        throw SchemaError("unknown dimension '" + std::string(name) + "'");
    }
    return OddSpace(std::move(dims), conditioning_);
}

OddSpace odd_space_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dimensions") || !j["dimensions"].is_array()) {
        throw SchemaError("ODD document needs a 'dimensions' array");
    }
    std::vector<OddDimension> dims;
    for (const auto& d : j["dimensions"]) {
        if (!d.is_object() || !d.contains("name")) {
            throw SchemaError("each ODD dimension needs a 'name'");
        }
        const std::string name = d["name"].get<std::string>();
        const std::string unit = d.value("unit", std::string{});
        if (d.contains("categories")) {
            if (!d.contains("probabilities")) {
                throw SchemaError("categorical dimension '" + name + "' needs 'probabilities'");
            }
            dims.emplace_back(name, unit,
                              Categorical(d["categories"].get<std::vector<std::string>>(),
                                          d["probabilities"].get<std::vector<double>>()));
            continue;
        }
        for (const char* key : {"mu", "sigma", "lower", "upper"}) {
            if (!d.contains(key) || !d[key].is_number()) {
                throw SchemaError("dimension '" + name + "' is missing numeric field '" + key + "'");
            }
        }
        dims.emplace_back(name, unit,
                          TruncatedNormal(d["mu"].get<double>(), d["sigma"].get<double>(),
                                          d["lower"].get<double>(), d["upper"].get<double>()));
    }
    return OddSpace(std::move(dims), j.value("conditioning", std::string{}));
}

nlohmann::json odd_space_to_json(const OddSpace& space) {
    nlohmann::json dims = nlohmann::json::array();
    for (const auto& dim : space.dimensions()) {
        nlohmann::json d{{"name", dim.name()}, {"unit", dim.unit()}};
        if (dim.is_continuous()) {
            const auto& dist = dim.continuous();
            d["mu"] = dist.mu();
            d["sigma"] = dist.sigma();
            d["lower"] = dist.lower();
            d["upper"] = dist.upper();
        } else {
            const auto& dist = dim.categorical();
            d["categories"] = dist.categories();
            d["probabilities"] = dist.probabilities();
        }
        dims.push_back(std::move(d));
    }
    nlohmann::json j{{"dimensions", std::move(dims)}};
    if (!space.conditioning().empty()) {
        j["conditioning"] = space.conditioning();
    }
    return j;
}

nlohmann::json odd_point_to_json(const OddPoint& point) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, value] : point.values()) {
        j[name] = value;
    }
    return j;
}

OddPoint odd_point_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw SchemaError("ODD point must be a JSON object");
    }
    OddPoint p;
    for (const auto& [name, value] : j.items()) {
        if (!value.is_number()) {
            throw SchemaError("ODD point coordinate '" + name + "' must be numeric");
        }
        p.set(name, value.get<double>());
    }
    return p;
}

} // namespace mlcert
