#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace dictate::dsl {

enum class Category { action, target, constraint };

enum class ArgKind { action, target, constraint, string, integer };

enum class Multiplicity { one, optional, zero_or_more, one_or_more };

struct ArgSpec {
  ArgKind kind;
  Multiplicity multiplicity = Multiplicity::one;
};

struct HeadInfo {
  std::string_view name;
  Category category;
  std::vector<ArgSpec> signature;
  // Constraints only: the head enumerates its own candidate spans instead of
  // filtering a universe of units.
  bool generator = false;
};

// The closed registry: 16 actions, 6 target heads, 28 constraints and combinators.
std::span<const HeadInfo> registry();
const HeadInfo* lookup(std::string_view head);

std::string_view to_string(ArgKind kind);

}  // namespace dictate::dsl
