#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vfac/harness/testbed.hpp"

namespace vfac::harness {

// A declarative script, read from TOML:
//
//   name = "two authorities"
//   seed = 7
//   authorities = ["hospital", "university"]
//
//   [[step]]
//   action = "enroll"            # enroll | encrypt | decrypt | revoke | restart
//   user = "alice"
//   attributes = ["hospital:doctor"]
//
//   [[step]]
//   action = "encrypt"
//   name = "rota"
//   policy = "hospital:doctor OR hospital:admin"
//   message = "ward 7"
//
//   [[step]]
//   action = "decrypt"
//   user = "alice"
//   ciphertext = "rota"
//   expect = "ok"                # ok | not_satisfied | verification_failed | unknown_user
//   tamper = "c_se"              # optional: c_se | c0 | vk | x_inv
//
// enroll and encrypt may also carry `expect` naming an error class such as
// "RevokedIdentity"; revoke may carry `changed = true|false`.
struct ScenarioStep {
  std::string action;
  std::string user;
  std::set<std::string> attributes;
  std::string name;
  std::string policy;
  std::string message;
  std::string ciphertext;
  std::string expect;
  std::string tamper;
  std::optional<bool> changed;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  std::vector<std::string> authorities;
  std::vector<ScenarioStep> steps;
};

// Throws kInvalidInput with the parser's position on malformed input.
Scenario parse_scenario(std::string_view toml_text, const std::string& source = "scenario");
Scenario load_scenario(const std::filesystem::path& file);

struct StepResult {
  std::size_t index = 0;
  std::string action;
  std::string subject;
  std::string outcome;
  std::string expected;
  bool passed = false;
};

struct ScenarioResult {
  std::string name;
  std::string transport;
  std::vector<StepResult> steps;
  bool passed() const;
};

ScenarioResult run_scenario(const Scenario& s, Transport t, const std::filesystem::path& data_dir);

std::string render_table(const ScenarioResult& r);
std::string render_json(const ScenarioResult& r);

}  // namespace vfac::harness
