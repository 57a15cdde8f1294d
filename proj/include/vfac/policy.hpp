#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vfac {

// Attribute names follow "authorityId:name"; the authority that manages an
// attribute is read off its prefix.
bool is_valid_attribute(std::string_view attribute);
// Throws Error(kInvalidInput) for malformed names.
std::string authority_of(std::string_view attribute);

// Monotone boolean formula over attributes.
//
// Text syntax (case-insensitive keywords, AND binds tighter than OR):
//   expr   := term { "OR" term }
//   term   := factor { "AND" factor }
//   factor := "(" expr ")" | attribute
//   attribute := ident ":" ident     ident := [A-Za-z0-9_.-]+
// e.g. "(aa1:doctor AND aa2:cardiology) OR aa1:admin"
struct PolicyNode {
  enum class Kind { kAnd, kOr, kLeaf };

  Kind kind = Kind::kLeaf;
  std::vector<PolicyNode> children;
  std::string label;

  static PolicyNode leaf(std::string attribute);
  static PolicyNode all_of(std::vector<PolicyNode> children);
  static PolicyNode any_of(std::vector<PolicyNode> children);

  // Gates need >= 2 children (kInvalidPolicy), leaves must be valid
  // attribute names (kInvalidPolicy) and distinct (kDuplicateAttribute).
  void validate() const;

  // Leaf labels, left to right.
  std::vector<std::string> leaves() const;
  bool evaluate(const std::set<std::string>& attributes) const;
  std::string to_string() const;
};

// Throws Error(kInvalidPolicy) on syntax errors.
PolicyNode parse_policy(std::string_view text);

}  // namespace vfac
