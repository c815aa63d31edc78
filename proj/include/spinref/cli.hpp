#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spinref/compiler.hpp"
#include "spinref/cooling.hpp"
#include "spinref/report.hpp"

namespace spinref {

struct ExperimentConfig {
  std::string command;
  std::size_t n = 1000000;
  double epsilon = 0.25;
  ModelKind model = ModelKind::Binomial;
  double ell = 10.0;
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  double target_bias = 0.856;
  double alpha = 0.3;
  ReportFormat format = ReportFormat::Csv;
  std::string out;
  std::size_t jobs = 1;
  PipelineMode mode = PipelineMode::BinomialDirect;
  InitialPermutation initial = InitialPermutation::Auto;

  void validate() const;
};

struct NamedReport {
  std::string name;
  EquivalenceReport report;
};
/// Compiled-vs-abstract checks for the three round kinds.
std::vector<NamedReport> equivalence_suite(std::uint64_t seed);

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 1 validation error, 2 failed check.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spinref
