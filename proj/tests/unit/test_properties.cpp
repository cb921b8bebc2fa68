#include <doctest.h>

#include "property_suite.hpp"

TEST_CASE("randomized model invariants") {
    props::Outcome out = props::run_all(25, 2024);
    for (const auto& f : out.failures) FAIL_CHECK(f);
    CHECK(out.checks > 25 * 10);
}

TEST_CASE("random models rarely need redrawing") {
    std::size_t redraws = 0;
    props::random_models(25, 2024, &redraws);
    CHECK(redraws < 25);
}
