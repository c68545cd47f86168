#include "dictate/dsl/registry.hpp"

#include <algorithm>

namespace dictate::dsl {

namespace {

using M = Multiplicity;
using K = ArgKind;

std::vector<HeadInfo> build() {
  const ArgSpec target{K::target};
  const ArgSpec opt_target{K::target, M::optional};
  const ArgSpec literal{K::string};
  const ArgSpec constraint{K::constraint};
  const ArgSpec index{K::integer};

  auto action = [](std::string_view name, std::vector<ArgSpec> sig) {
    return HeadInfo{name, Category::action, std::move(sig), false};
  };
  auto tgt = [](std::string_view name, std::vector<ArgSpec> sig) {
    return HeadInfo{name, Category::target, std::move(sig), false};
  };
  auto gen = [](std::string_view name, std::vector<ArgSpec> sig) {
    return HeadInfo{name, Category::constraint, std::move(sig), true};
  };
  auto filter = [](std::string_view name, std::vector<ArgSpec> sig) {
    return HeadInfo{name, Category::constraint, std::move(sig), false};
  };

  return {
      action("capitalize", {target}),
      action("lowercase", {target}),
      action("allCaps", {target}),
      action("delete", {target}),
      action("insert", {opt_target, literal}),
      action("replace", {target, literal}),
      action("move", {target, target}),
      action("moveCursor", {target}),
      action("spell", {opt_target, literal}),
      action("respell", {target, literal}),
      action("quote", {target}),
      action("parenthesize", {target}),
      action("combineSentences", {target}),
      action("combine", {target}),
      action("correction", {opt_target, literal}),
      action("do", {{K::action, M::zero_or_more}}),

      tgt("theText", {constraint}),
      tgt("thePosition", {constraint}),
      tgt("findAll", {constraint}),
      tgt("nth", {index, constraint}),
      tgt("nthToLast", {index, constraint}),
      tgt("take", {index, constraint}),

      gen("like", {literal}),
      gen("word", {}),
      gen("letter", {}),
      gen("sentence", {}),
      gen("line", {}),
      gen("phrase", {}),
      gen("passage", {}),
      gen("parenthetical", {}),
      gen("text", {}),
      filter("hasSubstring", {literal}),
      filter("startsWith", {literal}),
      filter("endsWith", {literal}),
      gen("exactly", {literal}),
      gen("at", {target}),
      filter("atStart", {opt_target}),
      filter("atEnd", {opt_target}),
      filter("before", {target}),
      filter("after", {target}),
      filter("between", {target, target}),
      filter("nextTo", {target}),
      filter("in", {target}),
      filter("contains", {target}),
      gen("empty", {}),
      gen("extra", {}),
      filter("alwaysTrue", {}),
      filter("and", {constraint, {K::constraint, M::one_or_more}}),
      filter("or", {constraint, {K::constraint, M::one_or_more}}),
      filter("union", {constraint, {K::constraint, M::one_or_more}}),
  };
}

}  // namespace

std::span<const HeadInfo> registry() {
  static const std::vector<HeadInfo> heads = build();
  return heads;
}

const HeadInfo* lookup(std::string_view head) {
  auto heads = registry();
  auto it = std::find_if(heads.begin(), heads.end(), [&](const HeadInfo& h) { return h.name == head; });
  return it == heads.end() ? nullptr : &*it;
}

std::string_view to_string(ArgKind kind) {
  switch (kind) {
    case ArgKind::action: return "action";
    case ArgKind::target: return "target";
    case ArgKind::constraint: return "constraint";
    case ArgKind::string: return "string";
    case ArgKind::integer: return "integer";
  }
  return "?";
}

}  // namespace dictate::dsl
