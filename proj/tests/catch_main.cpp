// Catch2 amalgamated implementation unit (provides the default main);
// compiled once and linked into the test binary.
#include <catch2/catch_amalgamated.cpp>
