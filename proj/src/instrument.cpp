#include "vfac/instrument.hpp"

namespace vfac::instrument {

namespace {

thread_local Recorder* tl_recorder = nullptr;
thread_local const char* tl_phase = "unscoped";

template <typename Fn>
void bump(Fn&& fn) {
  fn(global());
  if (tl_recorder != nullptr) fn(tl_recorder->phase(tl_phase));
}

}  // namespace

OpCounters& OpCounters::operator=(const OpCounters& other) {
  g_exp = other.g_exp.load();
  g_exp_raw = other.g_exp_raw.load();
  gt_exp = other.gt_exp.load();
  multi_exp_saved = other.multi_exp_saved.load();
  pairings = other.pairings.load();
  hashes = other.hashes.load();
  return *this;
}

void OpCounters::reset() { *this = OpCounters{}; }

OpCounters& OpCounters::operator+=(const OpCounters& other) {
  g_exp += other.g_exp;
  g_exp_raw += other.g_exp_raw;
  gt_exp += other.gt_exp;
  multi_exp_saved += other.multi_exp_saved;
  pairings += other.pairings;
  hashes += other.hashes;
  return *this;
}

OpCounters& Recorder::phase(const std::string& name) {
  std::lock_guard lock(mu_);
  // std::map never invalidates references on insertion.
  return phases_[name];
}

std::map<std::string, OpCounters> Recorder::snapshot() const {
  std::lock_guard lock(mu_);
  return phases_;
}

OpCounters Recorder::total() const {
  std::lock_guard lock(mu_);
  OpCounters sum;
  for (const auto& [_, c] : phases_) sum += c;
  return sum;
}

void Recorder::reset() {
  std::lock_guard lock(mu_);
  phases_.clear();
}

RecorderScope::RecorderScope(Recorder& recorder) : prev_(tl_recorder), prev_phase_(tl_phase) {
  tl_recorder = &recorder;
  tl_phase = "unscoped";
}

RecorderScope::~RecorderScope() {
  tl_recorder = prev_;
  tl_phase = prev_phase_;
}

PhaseScope::PhaseScope(const char* name) : prev_(tl_phase) { tl_phase = name; }

PhaseScope::~PhaseScope() { tl_phase = prev_; }

OpCounters& global() {
  static OpCounters counters;
  return counters;
}

void count_g_exp(std::uint64_t n) {
  bump([n](OpCounters& c) {
    c.g_exp += n;
    c.g_exp_raw += 2 * n;
  });
}

void count_g_exp_half(std::uint64_t n) {
  bump([n](OpCounters& c) {
    c.g_exp += n;
    c.g_exp_raw += n;
  });
}

void count_gt_exp(std::uint64_t n) {
  bump([n](OpCounters& c) { c.gt_exp += n; });
}

void count_multi_exp_saved(std::uint64_t n) {
  bump([n](OpCounters& c) { c.multi_exp_saved += n; });
}

void count_pairings(std::uint64_t n) {
  bump([n](OpCounters& c) { c.pairings += n; });
}

void count_hash(std::uint64_t n) {
  bump([n](OpCounters& c) { c.hashes += n; });
}

namespace {
thread_local EncodingTally* tl_tally = nullptr;
}  // namespace

TallyScope::TallyScope(EncodingTally& tally) : prev_(tl_tally) { tl_tally = &tally; }

TallyScope::~TallyScope() { tl_tally = prev_; }

void count_encoding(Encoding e) {
  if (!tl_tally) return;
  switch (e) {
    case Encoding::kScalar: ++tl_tally->scalars; break;
    case Encoding::kSource: ++tl_tally->source; break;
    case Encoding::kTarget: ++tl_tally->target; break;
  }
}

}  // namespace vfac::instrument
