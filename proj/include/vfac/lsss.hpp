#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vfac/group.hpp"
#include "vfac/policy.hpp"

namespace vfac {

class Rng;

// LSSS access structure (A, rho). Row labels are opaque byte strings:
// attribute names while compiling, hidden labels inside ciphertexts.
struct AccessStructure {
  std::vector<std::vector<Scalar>> matrix;  // l rows of n entries
  std::vector<std::string> rho;

  std::size_t rows() const { return matrix.size(); }
  std::size_t cols() const { return matrix.empty() ? 0 : matrix.front().size(); }

  // Rectangular, l >= 1, n >= 1, labels pairwise distinct.
  void validate() const;
  std::optional<std::size_t> row_of(const std::string& label) const;

  void write(ByteWriter& w) const;
  static AccessStructure read(ByteReader& r);
};

// Lewko-Waters conversion. The root carries (1); an OR gate hands its
// vector to every child; each binary AND opens a new column c and gives
// (v || 0..0 || 1) to its left child and (0..0 || -1) to its right child.
// n-ary ANDs are folded right: AND(a, b, c) = AND(a, AND(b, c)).
// `relabel` maps each leaf name to its row label.
AccessStructure compile(const PolicyNode& policy,
                        const std::function<std::string(const std::string&)>& relabel = {});

struct ShareVector {
  std::vector<Scalar> lambdas;
  std::vector<Scalar> ws;
};

struct Sharing {
  ShareVector shares;
  std::vector<Scalar> v;  // (s, y_2..y_n)
  std::vector<Scalar> w;  // (0, z_2..z_n)
};

// lambda_j = A_j . v and w_j = A_j . w with fresh y_i, z_i.
Sharing share(const AccessStructure& access, const Scalar& secret, Rng& rng);
// Same with caller-supplied vectors.
ShareVector share_with(const AccessStructure& access, const std::vector<Scalar>& v,
                       const std::vector<Scalar>& w);

// Row index -> c_j with sum c_j A_j = (1, 0, ..., 0). Only nonzero
// coefficients are listed.
using Coefficients = std::map<std::size_t, Scalar>;

// Gaussian elimination over Z_p with lowest-index pivoting; nullopt when
// (1, 0, ..., 0) is outside the span of the selected rows.
std::optional<Coefficients> reconstruct(const AccessStructure& access,
                                        const std::set<std::size_t>& rows);

bool is_authorized(const AccessStructure& access, const std::set<std::string>& labels);

}  // namespace vfac
