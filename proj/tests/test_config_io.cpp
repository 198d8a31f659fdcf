#include <catch2/catch_amalgamated.hpp>

#include "chdg/chdg.hpp"

TEST_CASE("placeholder") { CHECK(true); }
