#include "odpo/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

namespace odpo {

namespace {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
};

// Non-blank, non-comment lines with their 1-based numbers.
std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string text;
  int number = 0;
  while (std::getline(in, text)) {
    ++number;
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos || text[first] == '#') continue;
    Line line{number, {}};
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) line.tokens.push_back(tok);
    lines.push_back(std::move(line));
  }
  return lines;
}

double parse_double(const std::string& tok, int line) {
  double value = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError(fmt::format("line {}: '{}' is not a finite number", line, tok), line);
  }
  return value;
}

long long parse_int(const std::string& tok, int line) {
  long long value = 0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(fmt::format("line {}: '{}' is not an integer", line, tok), line);
  }
  return value;
}

Vector parse_vector(const Line& line, int dimension, const char* what) {
  if (static_cast<int>(line.tokens.size()) != dimension) {
    throw ParseError(fmt::format("line {}: {} has {} values, expected {}", line.number,
                                 what, line.tokens.size(), dimension),
                     line.number);
  }
  Vector v(dimension);
  for (int k = 0; k < dimension; ++k) {
    v[k] = parse_double(line.tokens[static_cast<std::size_t>(k)], line.number);
  }
  const double norm = v.norm();
  if (norm > 1.0 + kNormTolerance) {
    throw ParseError(fmt::format("line {}: {} has Euclidean norm {:.12g} > 1",
                                 line.number, what, norm),
                     line.number);
  }
  return v;
}

std::string join_vector(const Vector& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k > 0) out += ' ';
    out += fmt::format("{:.17g}", v[k]);
  }
  return out;
}

nlohmann::json to_json(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v[k]);
  return arr;
}

}  // namespace

Instance read_instance(std::istream& in) {
  const std::vector<Line> lines = read_lines(in);
  if (lines.empty()) throw ParseError("line 1: missing header 'N K d'", 1);
  const Line& header = lines.front();
  if (header.tokens.size() != 3) {
    throw ParseError(fmt::format("line {}: header must be 'N K d'", header.number),
                     header.number);
  }
  const long long n = parse_int(header.tokens[0], header.number);
  const long long k = parse_int(header.tokens[1], header.number);
  const long long d = parse_int(header.tokens[2], header.number);
  if (n < 1 || k < 1 || d < 1 || n > 1000000 || k > 100000 || d > 100000) {
    throw ParseError(fmt::format("line {}: header values must be positive", header.number),
                     header.number);
  }
  const std::size_t expected = static_cast<std::size_t>(n * k + 1);
  if (lines.size() - 1 < expected) {
    const int last = lines.back().number + 1;
    throw ParseError(fmt::format("line {}: expected {} arm lines and a theta* line, "
                                 "found {} lines",
                                 last, n * k, lines.size() - 1),
                     last);
  }
  if (lines.size() - 1 > expected) {
    const Line& extra = lines[expected + 1];
    throw ParseError(fmt::format("line {}: unexpected trailing data", extra.number),
                     extra.number);
  }
  std::vector<ActionSet> sets(static_cast<std::size_t>(n));
  std::size_t idx = 1;
  for (long long c = 0; c < n; ++c) {
    auto& set = sets[static_cast<std::size_t>(c)];
    set.context_id = static_cast<int>(c);
    for (long long a = 0; a < k; ++a) {
      set.arms.push_back(parse_vector(lines[idx++], static_cast<int>(d), "arm"));
    }
  }
  Vector theta = parse_vector(lines[idx], static_cast<int>(d), "theta*");
  return build_instance(std::move(sets), std::move(theta));
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open instance file '{}'", path));
  return read_instance(in);
}

void write_instance(const Instance& instance, std::ostream& out) {
  const int k = instance.max_arms();
  for (const auto& set : instance.action_sets()) {
    if (static_cast<int>(set.arms.size()) != k) {
      throw Error("only rectangular instances can be written");
    }
  }
  out << fmt::format("{} {} {}\n", instance.num_contexts(), k, instance.dimension());
  for (const auto& set : instance.action_sets()) {
    for (const auto& a : set.arms) out << join_vector(a) << '\n';
  }
  out << join_vector(instance.theta_star()) << '\n';
}

void write_design(const FrankWolfeResult& result, const KwCertificate& certificate,
                  const FrankWolfeOptions& options, std::ostream& out) {
  out << "# odpo design\n";
  out << fmt::format("# lambda {:.17g}\n", options.lambda);
  out << fmt::format("# epsilon {:.17g}\n", options.epsilon);
  out << fmt::format("# iterations {}\n", result.iterations);
  out << fmt::format("# final_g {:.17g}\n", result.final_g);
  out << fmt::format("# threshold {:.17g}\n", result.threshold);
  out << fmt::format("# status {}\n", result.converged() ? "converged" : "max_iters");
  out << fmt::format("# span_deficient {}\n", result.span_deficient ? 1 : 0);
  out << fmt::format("# kw_g {:.17g}\n", certificate.g);
  out << fmt::format("# kw_logdet {:.17g}\n", certificate.logdet);
  out << fmt::format("# kw_support_size {}\n", certificate.support_size);
  out << fmt::format("# kw_dimension {}\n", certificate.dimension);
  out << fmt::format("# kw_support_exceeds_bound {}\n",
                     certificate.support_exceeds_bound ? 1 : 0);
  for (const auto& atom : result.design.support) {
    out << fmt::format("{} {:.17g}\n", atom.arm, atom.weight);
  }
}

DesignFile read_design(std::istream& in, int dimension) {
  DesignFile file;
  file.design.dimension = dimension;
  std::string text;
  int number = 0;
  while (std::getline(in, text)) {
    ++number;
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::istringstream ss(text.substr(first));
    if (text[first] == '#') {
      std::string hash, key, value;
      ss >> hash >> key >> value;
      if (!key.empty() && !value.empty()) file.header[key] = value;
      continue;
    }
    std::string arm_tok, weight_tok, extra;
    ss >> arm_tok >> weight_tok;
    if (weight_tok.empty() || (ss >> extra)) {
      throw ParseError(fmt::format("line {}: expected 'arm_index weight'", number), number);
    }
    const long long arm = parse_int(arm_tok, number);
    file.design.support.push_back({static_cast<int>(arm), parse_double(weight_tok, number)});
  }
  return file;
}

void write_allocation(const Allocation& allocation, std::ostream& out) {
  out << "# odpo allocation\n";
  out << fmt::format("# requested_T {}\n", allocation.requested_t);
  out << fmt::format("# effective_T {}\n", allocation.effective_t);
  for (const auto& e : allocation.entries) out << fmt::format("{} {}\n", e.arm, e.count);
}

Allocation read_allocation(std::istream& in) {
  Allocation alloc;
  std::string text;
  int number = 0;
  while (std::getline(in, text)) {
    ++number;
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::istringstream ss(text.substr(first));
    std::string a, b, c;
    ss >> a >> b >> c;
    if (a == "#") {
      if (b == "requested_T") alloc.requested_t = static_cast<int>(parse_int(c, number));
      continue;
    }
    if (b.empty() || !c.empty()) {
      throw ParseError(fmt::format("line {}: expected 'arm_index count'", number), number);
    }
    const auto count = static_cast<int>(parse_int(b, number));
    if (count < 1) throw ParseError(fmt::format("line {}: count must be >= 1", number), number);
    alloc.entries.push_back({static_cast<int>(parse_int(a, number)), count});
    alloc.effective_t += count;
  }
  return alloc;
}

void write_sample_log(std::span<const PreferenceSample> samples,
                      std::span<const DifferenceArm> arms, std::ostream& out) {
  out << "draw_index,context_id,i,j,y\n";
  for (const auto& s : samples) {
    const ArmOrigin& o = arms[static_cast<std::size_t>(s.arm)].origin;
    out << fmt::format("{},{},{},{},{}\n", s.draw_index, o.context, o.first, o.second,
                       s.outcome);
  }
}

void write_estimator_result(const EstimatorResult& result, std::ostream& out) {
  const auto& diag = result.diagnostics;
  out << "theta_hat " << join_vector(result.theta_hat) << '\n';
  out << "theta_hat_projected " << join_vector(result.theta_hat_projected) << '\n';
  out << fmt::format("radius {:.17g}\n", result.radius);
  out << fmt::format("lambda {:.17g}\n", result.v.lambda);
  out << fmt::format("newton_iters {}\n", diag.newton_iters);
  out << fmt::format("grad_norm {:.17g}\n", diag.grad_norm);
  out << fmt::format("mle_converged {}\n", diag.mle_converged ? 1 : 0);
  out << fmt::format("projection_objective {:.17g}\n", diag.projection_objective);
  out << fmt::format("projection_iters {}\n", diag.projection_iters);
  out << fmt::format("projection_converged {}\n", diag.projection_converged ? 1 : 0);
  for (Eigen::Index r = 0; r < result.v.matrix.rows(); ++r) {
    out << "V " << join_vector(result.v.matrix.row(r).transpose()) << '\n';
  }
}

std::string run_record_json(const RunRecordInput& input) {
  nlohmann::ordered_json j;
  const Instance& inst = *input.instance;
  const int d = inst.dimension();
  j["algorithm"] = input.algorithm;
  j["replica"] = input.replica;
  j["seed"] = input.seed;
  j["d"] = d;
  j["T"] = input.horizon;
  j["effective_T"] = input.allocation ? input.allocation->effective_t : 0;
  j["N"] = inst.num_contexts();
  j["K"] = inst.max_arms();
  if (input.config) {
    j["config"] = {{"lambda_design", input.config->lambda_design},
                   {"lambda_est", input.config->estimation_lambda(d)},
                   {"epsilon", input.config->epsilon},
                   {"delta", input.config->delta}};
  }
  if (input.design) {
    j["design"] = {{"iterations", input.design->iterations},
                   {"final_g", input.design->final_g},
                   {"threshold", input.design->threshold},
                   {"converged", input.design->converged()},
                   {"support_size", input.design->design.support.size()}};
  } else {
    j["design"] = nullptr;
  }
  if (input.allocation) {
    j["allocation"] = {{"requested_T", input.allocation->requested_t},
                       {"effective_T", input.allocation->effective_t},
                       {"support_size", input.allocation->entries.size()}};
  }
  if (input.estimate) {
    const auto& e = *input.estimate;
    j["estimator"] = {{"theta_hat", to_json(e.theta_hat)},
                      {"theta_hat_projected", to_json(e.theta_hat_projected)},
                      {"radius", e.radius},
                      {"newton_iters", e.diagnostics.newton_iters},
                      {"grad_norm", e.diagnostics.grad_norm},
                      {"mle_converged", e.diagnostics.mle_converged},
                      {"projection_objective", e.diagnostics.projection_objective},
                      {"projection_iters", e.diagnostics.projection_iters},
                      {"projection_converged", e.diagnostics.projection_converged}};
  }
  if (input.prediction) j["predictions"] = input.prediction->chosen;
  j["regret"] = input.regret;
  j["warnings"] = input.warnings;
  j["status"] = input.status;
  return j.dump();
}

}  // namespace odpo
