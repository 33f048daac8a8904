#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "odpo/design.hpp"
#include "odpo/estimator.hpp"
#include "odpo/instance.hpp"
#include "odpo/pipeline.hpp"

namespace odpo {

// Instance text format, whitespace separated:
//   N K d
//   N*K lines of d numbers, one arm per line, contexts in order
//   one line of d numbers for theta*
// Blank lines and lines starting with '#' are skipped. Every failure,
// including norm violations, throws ParseError carrying the 1-based line.
Instance read_instance(std::istream& in);
Instance read_instance_file(const std::string& path);
// Rectangular instances only (every action set of size max_arms()).
void write_instance(const Instance& instance, std::ostream& out);

// Design file: '#'-comment header with key/value pairs (lambda, epsilon,
// iterations, final_g, threshold, status and the certificate fields), then
// one `arm_index weight` line per atom, weights printed with 17 digits.
void write_design(const FrankWolfeResult& result, const KwCertificate& certificate,
                  const FrankWolfeOptions& options, std::ostream& out);

struct DesignFile {
  Design design;
  std::map<std::string, std::string> header;
};

DesignFile read_design(std::istream& in, int dimension);

// Allocation file: '#' header (requested_T, effective_T), then
// `arm_index count` lines.
void write_allocation(const Allocation& allocation, std::ostream& out);
Allocation read_allocation(std::istream& in);

// CSV with header draw_index,context_id,i,j,y.
void write_sample_log(std::span<const PreferenceSample> samples,
                      std::span<const DifferenceArm> arms, std::ostream& out);

// Key/value lines: theta_hat, theta_hat_projected, radius, lambda, the
// diagnostics, then `V <row>` for each row of V.
void write_estimator_result(const EstimatorResult& result, std::ostream& out);

struct RunRecordInput {
  std::string algorithm;
  int replica = 0;
  std::uint64_t seed = 0;
  const Instance* instance = nullptr;
  int horizon = 0;
  const OdpoConfig* config = nullptr;
  const FrankWolfeResult* design = nullptr;  // null for baselines
  const Allocation* allocation = nullptr;
  const EstimatorResult* estimate = nullptr;
  const Prediction* prediction = nullptr;
  double regret = 0.0;
  std::vector<std::string> warnings;
  std::string status;
};

// One-line JSON object with keys: algorithm, replica, seed, d, T,
// effective_T, N, K, config, design, allocation, estimator, predictions,
// regret, warnings, status.
std::string run_record_json(const RunRecordInput& input);

}  // namespace odpo
