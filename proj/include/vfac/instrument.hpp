#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>

namespace vfac::instrument {

// Operation tallies for one phase. A dual-representation exponentiation
// counts once in `g_exp` (comparison mode) and twice in `g_exp_raw`
// (one per source group). `multi_exp_saved` records how many
// exponentiations a k-base multi-exponentiation absorbs (k - 1 each).
struct OpCounters {
  std::atomic<std::uint64_t> g_exp{0};
  std::atomic<std::uint64_t> g_exp_raw{0};
  std::atomic<std::uint64_t> gt_exp{0};
  std::atomic<std::uint64_t> multi_exp_saved{0};
  std::atomic<std::uint64_t> pairings{0};
  std::atomic<std::uint64_t> hashes{0};

  OpCounters() = default;
  OpCounters(const OpCounters& other) { *this = other; }
  OpCounters& operator=(const OpCounters& other);

  std::uint64_t exps() const { return g_exp + gt_exp; }
  std::uint64_t exps_collapsed() const { return exps() - multi_exp_saved; }
  void reset();
  OpCounters& operator+=(const OpCounters& other);
};

// Collects per-phase counters for every counted primitive executed on the
// threads where it is installed. Phase names are free-form dotted strings,
// e.g. "online.assembly".
class Recorder {
 public:
  OpCounters& phase(const std::string& name);
  std::map<std::string, OpCounters> snapshot() const;
  OpCounters total() const;
  void reset();

 private:
  mutable std::mutex mu_;
  std::map<std::string, OpCounters> phases_;
};

// Installs `recorder` as the active sink of the calling thread for the
// scope's lifetime. Nesting restores the previous sink on exit.
class RecorderScope {
 public:
  explicit RecorderScope(Recorder& recorder);
  ~RecorderScope();
  RecorderScope(const RecorderScope&) = delete;
  RecorderScope& operator=(const RecorderScope&) = delete;

 private:
  Recorder* prev_;
  const char* prev_phase_;
};

// Routes counts on the calling thread into the named phase until the
// scope ends.
class PhaseScope {
 public:
  explicit PhaseScope(const char* name);
  ~PhaseScope();
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  const char* prev_;
};

// Process-wide totals, always on.
OpCounters& global();

// Hooks called by the group facade.
void count_g_exp(std::uint64_t n = 1);
// Exponentiation applied to one half of a dual element only.
void count_g_exp_half(std::uint64_t n = 1);
void count_gt_exp(std::uint64_t n = 1);
void count_multi_exp_saved(std::uint64_t n);
void count_pairings(std::uint64_t n = 1);
void count_hash(std::uint64_t n = 1);

// Element encodings written on the calling thread while a TallyScope is
// active. Size reports count elements this way instead of by formula.
struct EncodingTally {
  std::uint64_t scalars = 0;
  std::uint64_t source = 0;
  std::uint64_t target = 0;

  std::uint64_t group_elements() const { return source + target; }
};

class TallyScope {
 public:
  explicit TallyScope(EncodingTally& tally);
  ~TallyScope();
  TallyScope(const TallyScope&) = delete;
  TallyScope& operator=(const TallyScope&) = delete;

 private:
  EncodingTally* prev_;
};

enum class Encoding { kScalar, kSource, kTarget };
void count_encoding(Encoding e);

}  // namespace vfac::instrument
