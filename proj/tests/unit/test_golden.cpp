#include <doctest.h>

#include "golden_cases.hpp"

TEST_SUITE("golden") {

TEST_CASE("rendered prompts match their golden files") {
    for (const auto& c : panda::testing::golden_cases()) {
        CAPTURE(c.name);
        const auto r = panda::testing::check_golden(c);
        CHECK_MESSAGE(r.ok, r.detail);
    }
}

}
