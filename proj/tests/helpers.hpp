#pragma once

/** Catch2 glue for the shared test utilities: stringification of value types. */

#include <catch2/catch_amalgamated.hpp>
#include <string>

#include "fedosov/formal.hpp"
#include "fedosov/poly.hpp"
#include "fedosov/weyl.hpp"
#include "random_gen.hpp"

namespace Catch {
template <>
struct StringMaker<fedosov::Poly> {
  static std::string convert(const fedosov::Poly& p) { return p.to_string(); }
};
template <>
struct StringMaker<fedosov::WeylSection> {
  static std::string convert(const fedosov::WeylSection& s) { return s.to_string(); }
};
template <>
struct StringMaker<fedosov::FormalFunction> {
  static std::string convert(const fedosov::FormalFunction& f) { return f.to_string(); }
};
}  // namespace Catch
