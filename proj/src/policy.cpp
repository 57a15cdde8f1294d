#include "vfac/policy.hpp"

#include <algorithm>
#include <cctype>

#include "vfac/error.hpp"

namespace vfac {

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

bool is_ident(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_ident_char);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  PolicyNode parse() {
    PolicyNode root = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  PolicyNode expr() {
    std::vector<PolicyNode> terms{term()};
    while (keyword("OR")) terms.push_back(term());
    return terms.size() == 1 ? std::move(terms.front()) : PolicyNode::any_of(std::move(terms));
  }

  PolicyNode term() {
    std::vector<PolicyNode> factors{factor()};
    while (keyword("AND")) factors.push_back(factor());
    return factors.size() == 1 ? std::move(factors.front()) : PolicyNode::all_of(std::move(factors));
  }

  PolicyNode factor() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      PolicyNode inner = expr();
      skip_space();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && (is_ident_char(text_[pos_]) || text_[pos_] == ':')) ++pos_;
    std::string_view token = text_.substr(start, pos_ - start);
    if (token.empty()) fail("expected attribute or '('");
    if (!is_valid_attribute(token)) fail("malformed attribute '" + std::string(token) + "'");
    return PolicyNode::leaf(std::string(token));
  }

  bool keyword(std::string_view kw) {
    skip_space();
    if (text_.size() - pos_ < kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(text_[pos_ + i])) != kw[i]) return false;
    }
    std::size_t end = pos_ + kw.size();
    if (end < text_.size() && (is_ident_char(text_[end]) || text_[end] == ':')) return false;
    pos_ = end;
    return true;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Errc::kInvalidPolicy, msg + " at offset " + std::to_string(pos_));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void collect(const PolicyNode& node, std::vector<std::string>& out) {
  if (node.kind == PolicyNode::Kind::kLeaf) {
    out.push_back(node.label);
    return;
  }
  for (const auto& c : node.children) collect(c, out);
}

}  // namespace

bool is_valid_attribute(std::string_view attribute) {
  auto colon = attribute.find(':');
  if (colon == std::string_view::npos) return false;
  return is_ident(attribute.substr(0, colon)) && is_ident(attribute.substr(colon + 1));
}

std::string authority_of(std::string_view attribute) {
  if (!is_valid_attribute(attribute)) {
    throw Error(Errc::kInvalidInput, "malformed attribute '" + std::string(attribute) + "'");
  }
  return std::string(attribute.substr(0, attribute.find(':')));
}

PolicyNode PolicyNode::leaf(std::string attribute) {
  PolicyNode n;
  n.kind = Kind::kLeaf;
  n.label = std::move(attribute);
  return n;
}

PolicyNode PolicyNode::all_of(std::vector<PolicyNode> children) {
  PolicyNode n;
  n.kind = Kind::kAnd;
  n.children = std::move(children);
  return n;
}

PolicyNode PolicyNode::any_of(std::vector<PolicyNode> children) {
  PolicyNode n;
  n.kind = Kind::kOr;
  n.children = std::move(children);
  return n;
}

void PolicyNode::validate() const {
  struct Walk {
    std::set<std::string> seen;
    void operator()(const PolicyNode& n) {
      if (n.kind == Kind::kLeaf) {
        if (!n.children.empty()) throw Error(Errc::kInvalidPolicy, "leaf with children");
        if (!is_valid_attribute(n.label)) {
          throw Error(Errc::kInvalidPolicy, "malformed attribute '" + n.label + "'");
        }
        if (!seen.insert(n.label).second) {
          throw Error(Errc::kDuplicateAttribute, "attribute '" + n.label + "' used twice");
        }
        return;
      }
      if (n.children.size() < 2) throw Error(Errc::kInvalidPolicy, "gate needs at least two children");
      for (const auto& c : n.children) (*this)(c);
    }
  };
  Walk{}(*this);
}

std::vector<std::string> PolicyNode::leaves() const {
  std::vector<std::string> out;
  collect(*this, out);
  return out;
}

bool PolicyNode::evaluate(const std::set<std::string>& attributes) const {
  switch (kind) {
    case Kind::kLeaf:
      return attributes.count(label) != 0;
    case Kind::kAnd:
      return std::all_of(children.begin(), children.end(),
                         [&](const PolicyNode& c) { return c.evaluate(attributes); });
    case Kind::kOr:
      return std::any_of(children.begin(), children.end(),
                         [&](const PolicyNode& c) { return c.evaluate(attributes); });
  }
  return false;
}

std::string PolicyNode::to_string() const {
  if (kind == Kind::kLeaf) return label;
  std::string out;
  const char* op = kind == Kind::kAnd ? " AND " : " OR ";
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (i > 0) out += op;
    const auto& c = children[i];
    if (c.kind == Kind::kLeaf) {
      out += c.to_string();
    } else {
      out += "(" + c.to_string() + ")";
    }
  }
  return out;
}

PolicyNode parse_policy(std::string_view text) { return Parser(text).parse(); }

}  // namespace vfac
