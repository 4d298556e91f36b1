#pragma once

#include <string>

#include "dllab/io/dataset.hpp"
#include "dllab/pipeline/config.hpp"

namespace dllab::pipeline {

enum class Split : std::uint64_t { train = 1, test = 2 };

/// Digest of everything that determines generated data: system, seed and
/// the data sections of the config.
std::uint64_t data_config_digest(const RunConfig& cfg);

/// One split with identity normalization. Stochastic pair systems emit one
/// realization per training input and data.realizations per test input;
/// trajectory systems emit data.segment (train) or data.horizon (test)
/// states after data.warmup discarded steps.
io::Dataset generate_split(const RunConfig& cfg, Split split);

struct GeneratedData {
  io::Dataset train;
  io::Dataset test;
};

/// Both splits, with normalization statistics from the training split
/// stored in both headers.
GeneratedData generate(const RunConfig& cfg);

/// Per-point spread statistics for the CLI summary.
std::string describe(const io::Dataset& d);

}  // namespace dllab::pipeline
