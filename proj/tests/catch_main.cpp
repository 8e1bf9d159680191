// Catch2 v3 amalgamated translation unit, compiled once and linked into every
// module test binary (it supplies main()).
#include <catch2/catch_amalgamated.cpp>
