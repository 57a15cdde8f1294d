#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vfac/instrument.hpp"

namespace vfac::harness {

struct SizeEntry {
  std::string item;
  std::size_t bytes = 0;
  instrument::EncodingTally tally;
};

// Serialized sizes with element counts tallied while serializing.
struct SizeReport {
  std::vector<SizeEntry> entries;
  const SizeEntry& at(const std::string& item) const;
};

// One line of the side-by-side comparison. `claimed` is the published
// count evaluated at the bench parameters, when the claim is a count.
struct ComparisonRow {
  std::string quantity;
  std::string claim;
  std::optional<std::uint64_t> claimed;
  std::uint64_t naive = 0;
  std::uint64_t collapsed = 0;
  bool flagged = false;
  std::string note;
};

struct BenchReport {
  std::size_t rows = 0;
  std::size_t authorities = 0;
  std::uint64_t seed = 0;
  bool decrypted = false;
  std::map<std::string, instrument::OpCounters> phases;
  SizeReport sizes;
  std::vector<ComparisonRow> comparison;
};

// Runs every algorithm once for an AND policy over `rows` attributes spread
// across two authorities, held in full by one user, and collects counts
// and sizes.
BenchReport run_bench(std::size_t rows, std::uint64_t seed);

std::vector<ComparisonRow> compare(const BenchReport& r);

std::string render_table(const BenchReport& r);
std::string render_json(const BenchReport& r);

}  // namespace vfac::harness
