#pragma once

// Run configuration: line-oriented "key = value" text with [section]
// headers and # comments.
//
//   command = certify            # certify | simulate | validate | sweep
//   output = out
//   [triplet]  drift, gaussian, measure, alpha, scale, rate, atoms, weights, file
//   [kernel]   name, dim, lo, hi, width, rate, amplitude, beta, file
//   [numerics] rel_tol, abs_tol, max_intervals, window, t_step, s_min, s_max,
//              s_points, search_s_min, search_s_max, search_points,
//              refine_rounds, candidates, s_independent, force_search,
//              negdef_pairs, lemma3_draws, lemma3_t_max
//   [simulate] h, window, samples, seed, lags, rho_bar, measures

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "srd/certify.hpp"
#include "srd/kernels.hpp"
#include "srd/levy.hpp"
#include "srd/simulate.hpp"

namespace srd::config {

/// Malformed configuration text; the message names the line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Certify, Simulate, Validate, Sweep };

std::string to_string(Command c);

struct Entry {
  std::string value;
  int line = 0;
};

/// Section name ("" for top-level keys) -> key -> entry.
struct RawConfig {
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::filesystem::path base_dir;  // relative data-file paths resolve here
  std::string source = "<config>";

  void set(const std::string& dotted_key, const std::string& value);
};

RawConfig parse(std::istream& is, const std::string& source = "<config>");

struct RunConfig {
  Command command = Command::Certify;
  std::filesystem::path output = "srd-out";
  unsigned threads = 0;
  std::uint64_t seed = 1;

  levy::LevyTriplet triplet;
  std::optional<kernels::Kernel> kernel;
  certify::CertifyConfig certify;

  std::optional<simulate::SimConfig> simulation;
  double sim_rho_bar = 0.5;
  std::vector<simulate::TestMeasure> measures;

  std::size_t negdef_pairs = 100000;
  std::size_t lemma3_draws = 1000;
  double lemma3_t_max = 2.0;

  std::string sweep_key;  // "section.key"
  std::vector<std::string> sweep_values;
};

/// Builds typed blocks from the raw text. Throws ConfigError for unknown
/// keys or malformed values and Rejection for invalid model parameters.
RunConfig build(const RawConfig& raw);

RawConfig read_file(const std::filesystem::path& path);

}  // namespace srd::config
