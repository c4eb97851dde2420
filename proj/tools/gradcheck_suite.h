#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drama/encoder/config.h"
#include "drama/util/io.h"

namespace drama::cli {

struct GradCheckOptions {
  std::size_t points = 3;
  double step = 1e-6;
  /// Coordinates checked per point and target; spread evenly.
  std::size_t coords = 120;
  std::uint64_t seed = 0;
};

struct GradCheckCase {
  std::string target;  // "encode_infonce", "prune_theta", "prune_log_alpha"
  std::size_t point = 0;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

struct GradCheckSummary {
  std::vector<GradCheckCase> cases;
  double max_rel_error = 0.0;
};

/// Finite-difference checks of the encode -> InfoNCE pipeline and of the
/// pruning objective (wrt weights and gate logits, with fixed noise).
GradCheckSummary run_gradcheck_suite(const encoder::EncoderConfig& cfg, const GradCheckOptions& opt);

Json to_json(const GradCheckSummary& s);

}  // namespace drama::cli
