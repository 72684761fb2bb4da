#include <cmath>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "mlcert/error.hpp"
#include "mlcert/odd.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace mlcert;

TEST_CASE("space construction enforces unique, non-empty dimensions") {
    CHECK_THROWS_AS(OddSpace({}), SchemaError);
    std::vector<OddDimension> dims;
    dims.emplace_back("x", "", TruncatedNormal(0.0, 1.0, -1.0, 1.0));
    dims.emplace_back("x", "", TruncatedNormal(0.0, 1.0, -1.0, 1.0));
    CHECK_THROWS_AS(OddSpace(std::move(dims)), SchemaError);
}

TEST_CASE("density is the product of the marginals") {
    const OddSpace space = fixtures::vbl_space();
    const TruncatedNormal alpha(3.0, 0.3, 1.0, 7.0);
    const TruncatedNormal distance(0.0, 1.5, 0.0, 4.0);

    const OddPoint p = fixtures::vbl_point(3.0, 0.0);
    CHECK(space.density(p) ==
          doctest::Approx(alpha.pdf(3.0) * distance.pdf(0.0)).epsilon(1e-12));

    // One coordinate outside its interval zeroes the product.
    CHECK(space.density(fixtures::vbl_point(0.5, 1.0)) == 0.0);
    CHECK(space.density(fixtures::vbl_point(3.0, 5.0)) == 0.0);

    // A single-dimension space reduces to the marginal pdf.
    std::vector<OddDimension> one;
    one.emplace_back("d", "nm", distance);
    const OddSpace line(std::move(one));
    OddPoint q;
    q.set("d", 1.7);
    CHECK(line.density(q) == doctest::Approx(distance.pdf(1.7)).epsilon(1e-12));

    OddPoint missing;
    missing.set(kGlideslopeDimension, 3.0);
    CHECK_THROWS_AS(space.density(missing), SchemaError);
}

TEST_CASE("sampling respects intervals and decorrelates dimensions") {
    const OddSpace space = fixtures::vbl_space();
    CHECK(space.sample(0, 5).empty());

    const auto small = space.sample(10000, 5);
    for (const auto& p : small) {
        REQUIRE(p.at(kGlideslopeDimension) >= 1.0);
        REQUIRE(p.at(kGlideslopeDimension) <= 7.0);
        REQUIRE(p.at(kDistanceDimension) >= 0.0);
        REQUIRE(p.at(kDistanceDimension) <= 4.0);
    }

    const auto big = space.sample(100000, 11);
    double mean_a = 0.0;
    double mean_d = 0.0;
    for (const auto& p : big) {
        mean_a += p.at(kGlideslopeDimension);
        mean_d += p.at(kDistanceDimension);
    }
    mean_a /= static_cast<double>(big.size());
    mean_d /= static_cast<double>(big.size());
    double cov = 0.0;
    double var_a = 0.0;
    double var_d = 0.0;
    for (const auto& p : big) {
        const double da = p.at(kGlideslopeDimension) - mean_a;
        const double dd = p.at(kDistanceDimension) - mean_d;
        cov += da * dd;
        var_a += da * da;
        var_d += dd * dd;
    }
    const double corr = cov / std::sqrt(var_a * var_d);
    // Correlation of independent draws is ~N(0, 1/n).
    CHECK(std::abs(corr) < 3.0 / std::sqrt(100000.0));
}

TEST_CASE("sampling is reproducible") {
    const OddSpace space = fixtures::vbl_space();
    const auto a = space.sample(100, 123);
    const auto b = space.sample(100, 123);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
    }
}

TEST_CASE("restriction intersects the truncation interval") {
    const OddSpace space = fixtures::vbl_space();
    const OddSpace below2 = space.restricted(kDistanceDimension, 0.0, 2.0);
    const auto& dist = below2.dimension(kDistanceDimension).continuous();
    CHECK(dist.mu() == 0.0);
    CHECK(dist.sigma() == 1.5);
    CHECK(dist.lower() == 0.0);
    CHECK(dist.upper() == 2.0);
    CHECK(below2.conditioning() == "approach");

    // Identity restriction leaves the interval untouched.
    const OddSpace same = space.restricted(kDistanceDimension, 0.0, 4.0);
    CHECK(same.dimension(kDistanceDimension).continuous().upper() == 4.0);

    // The restricted density renormalizes to mass 1.
    OddPoint probe = fixtures::vbl_point(3.0, 1.0);
    const double mass = oracle::simpson(
        [&](double d) {
            probe.set(kDistanceDimension, d);
            return below2.dimension(kDistanceDimension).continuous().pdf(d);
        },
        0.0, 2.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(space.restricted(kDistanceDimension, 5.0, 6.0), InvalidRestrictionError);
    CHECK_THROWS_AS(space.restricted("nope", 0.0, 1.0), SchemaError);
}

TEST_CASE("restricted density equals the conditional density") {
    const TruncatedNormal original(0.0, 1.5, 0.0, 4.0);
    const TruncatedNormal restricted(0.0, 1.5, 0.0, 2.0);
    const double interval_mass = original.cdf(2.0);
    for (double x : {0.1, 0.5, 1.0, 1.5, 1.9}) {
        CHECK(restricted.pdf(x) ==
              doctest::Approx(original.pdf(x) / interval_mass).epsilon(1e-6));
    }
}

TEST_CASE("ODD specification file round-trips losslessly") {
    const OddSpace space = fixtures::vbl_space();
    const nlohmann::json j = odd_space_to_json(space);
    const OddSpace back = odd_space_from_json(j);
    CHECK(odd_space_to_json(back) == j);
    CHECK(back.conditioning() == "approach");
    const auto& d = back.dimension(kDistanceDimension).continuous();
    CHECK(d.mu() == 0.0);
    CHECK(d.sigma() == 1.5);

    CHECK_THROWS_AS(odd_space_from_json(nlohmann::json::object()), SchemaError);
    CHECK_THROWS_AS(odd_space_from_json(nlohmann::json{{"dimensions", {{{"name", "x"}}}}}),
                    SchemaError);
}

TEST_CASE("categorical dimensions join density and sampling but not restriction") {
    std::vector<OddDimension> dims;
    dims.emplace_back("d", "nm", TruncatedNormal(0.0, 1.5, 0.0, 4.0));
    dims.emplace_back("runway_class", "",
                      Categorical({"paved", "unpaved"}, {0.8, 0.2}));
    const OddSpace space(std::move(dims), "approach");
    CHECK_FALSE(space.all_continuous());
    CHECK(space.num_continuous() == 1);

    OddPoint p;
    p.set("d", 1.0);
    p.set("runway_class", 1.0);
    const TruncatedNormal d(0.0, 1.5, 0.0, 4.0);
    CHECK(space.density(p) == doctest::Approx(d.pdf(1.0) * 0.2).epsilon(1e-12));
    p.set("runway_class", 2.0); // out of table
    CHECK(space.density(p) == 0.0);
    p.set("runway_class", 0.5); // not an index
    CHECK(space.density(p) == 0.0);

    const auto samples = space.sample(20000, 4);
    std::size_t unpaved = 0;
    for (const auto& s : samples) {
        const double v = s.at("runway_class");
        REQUIRE((v == 0.0 || v == 1.0));
        unpaved += v == 1.0;
    }
    const double frac = static_cast<double>(unpaved) / 20000.0;
    CHECK(frac == doctest::Approx(0.2).epsilon(0.1));

    CHECK_THROWS_AS(space.restricted("runway_class", 0.0, 0.5), InvalidRestrictionError);

    // Categorical dimensions survive the file round-trip too.
    const nlohmann::json j = odd_space_to_json(space);
    const OddSpace back = odd_space_from_json(j);
    CHECK(odd_space_to_json(back) == j);
}
