#include "vfac/lsss.hpp"

#include "vfac/error.hpp"
#include "vfac/rng.hpp"

namespace vfac {

namespace {

struct Compiler {
  const std::function<std::string(const std::string&)>& relabel;
  std::vector<std::vector<Scalar>> rows;
  std::vector<std::string> labels;
  std::size_t columns = 1;

  void visit(const PolicyNode& node, std::vector<Scalar> vec) {
    switch (node.kind) {
      case PolicyNode::Kind::kLeaf:
        rows.push_back(std::move(vec));
        labels.push_back(relabel ? relabel(node.label) : node.label);
        return;
      case PolicyNode::Kind::kOr:
        for (const auto& child : node.children) visit(child, vec);
        return;
      case PolicyNode::Kind::kAnd:
        for (std::size_t i = 0; i + 1 < node.children.size(); ++i) {
          std::size_t c = columns++;
          std::vector<Scalar> left = vec;
          left.resize(c + 1);
          left[c] = Scalar::from_u64(1);
          std::vector<Scalar> right(c + 1);
          right[c] = Scalar::from_i64(-1);
          visit(node.children[i], std::move(left));
          vec = std::move(right);
        }
        visit(node.children.back(), std::move(vec));
        return;
    }
  }
};

Scalar dot(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  Scalar acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

void AccessStructure::validate() const {
  if (matrix.empty() || matrix.front().empty()) {
    throw Error(Errc::kInvalidPolicy, "access structure must have at least one row and column");
  }
  if (rho.size() != matrix.size()) throw Error(Errc::kInvalidPolicy, "row label count mismatch");
  for (const auto& row : matrix) {
    if (row.size() != cols()) throw Error(Errc::kInvalidPolicy, "ragged access matrix");
  }
  std::set<std::string> seen(rho.begin(), rho.end());
  if (seen.size() != rho.size()) throw Error(Errc::kDuplicateAttribute, "row labels must be distinct");
}

std::optional<std::size_t> AccessStructure::row_of(const std::string& label) const {
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] == label) return i;
  }
  return std::nullopt;
}

void AccessStructure::write(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(rows()));
  w.u32(static_cast<std::uint32_t>(cols()));
  for (const auto& row : matrix) {
    for (const auto& x : row) x.write(w);
  }
  for (const auto& label : rho) w.field(label);
}

AccessStructure AccessStructure::read(ByteReader& r) {
  AccessStructure a;
  std::uint32_t l = r.u32();
  std::uint32_t n = r.u32();
  if (static_cast<std::uint64_t>(l) * n * Scalar::kBytes > r.remaining()) {
    throw Error(Errc::kDecodeError, "access matrix larger than buffer");
  }
  a.matrix.assign(l, std::vector<Scalar>(n));
  for (auto& row : a.matrix) {
    for (auto& x : row) x = Scalar::read(r);
  }
  for (std::uint32_t i = 0; i < l; ++i) a.rho.push_back(r.field_string());
  a.validate();
  return a;
}

AccessStructure compile(const PolicyNode& policy,
                        const std::function<std::string(const std::string&)>& relabel) {
  policy.validate();
  Compiler c{relabel, {}, {}};
  c.visit(policy, {Scalar::from_u64(1)});
  AccessStructure out;
  for (auto& row : c.rows) row.resize(c.columns);
  out.matrix = std::move(c.rows);
  out.rho = std::move(c.labels);
  out.validate();
  return out;
}

ShareVector share_with(const AccessStructure& access, const std::vector<Scalar>& v,
                       const std::vector<Scalar>& w) {
  if (v.size() != access.cols() || w.size() != access.cols()) {
    throw Error(Errc::kInvalidInput, "sharing vectors must match the column count");
  }
  ShareVector out;
  for (const auto& row : access.matrix) {
    out.lambdas.push_back(dot(row, v));
    out.ws.push_back(dot(row, w));
  }
  return out;
}

Sharing share(const AccessStructure& access, const Scalar& secret, Rng& rng) {
  Sharing out;
  out.v.push_back(secret);
  out.w.push_back(Scalar{});
  for (std::size_t i = 1; i < access.cols(); ++i) {
    out.v.push_back(Scalar::random(rng));
    out.w.push_back(Scalar::random(rng));
  }
  out.shares = share_with(access, out.v, out.w);
  return out;
}

std::optional<Coefficients> reconstruct(const AccessStructure& access,
                                        const std::set<std::size_t>& rows) {
  const std::size_t n = access.cols();
  std::vector<std::size_t> idx;
  for (auto r : rows) {
    if (r >= access.rows()) throw Error(Errc::kInvalidInput, "row index out of range");
    idx.push_back(r);
  }
  const std::size_t m = idx.size();
  if (m == 0) return std::nullopt;

  // Solve A_I^T c = e_1: n equations in m unknowns, augmented column last.
  std::vector<std::vector<Scalar>> sys(n, std::vector<Scalar>(m + 1));
  for (std::size_t eq = 0; eq < n; ++eq) {
    for (std::size_t k = 0; k < m; ++k) sys[eq][k] = access.matrix[idx[k]][eq];
  }
  sys[0][m] = Scalar::from_u64(1);

  std::vector<std::size_t> pivot_col;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < m && rank < n; ++col) {
    std::size_t pivot = rank;
    while (pivot < n && sys[pivot][col].is_zero()) ++pivot;
    if (pivot == n) continue;
    std::swap(sys[pivot], sys[rank]);
    Scalar inv = sys[rank][col].inverse();
    for (auto& x : sys[rank]) x *= inv;
    for (std::size_t eq = 0; eq < n; ++eq) {
      if (eq == rank || sys[eq][col].is_zero()) continue;
      Scalar f = sys[eq][col];
      for (std::size_t k = col; k <= m; ++k) sys[eq][k] -= f * sys[rank][k];
    }
    pivot_col.push_back(col);
    ++rank;
  }
  for (std::size_t eq = rank; eq < n; ++eq) {
    if (!sys[eq][m].is_zero()) return std::nullopt;
  }

  // Free variables are zero, so each pivot variable equals its right-hand side.
  Coefficients out;
  for (std::size_t r = 0; r < rank; ++r) {
    if (!sys[r][m].is_zero()) out.emplace(idx[pivot_col[r]], sys[r][m]);
  }
  return out;
}

bool is_authorized(const AccessStructure& access, const std::set<std::string>& labels) {
  std::set<std::size_t> rows;
  for (std::size_t i = 0; i < access.rows(); ++i) {
    if (labels.count(access.rho[i])) rows.insert(i);
  }
  return reconstruct(access, rows).has_value();
}

}  // namespace vfac
