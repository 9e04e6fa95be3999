#pragma once

#include <ostream>

#include "kppfrag/io/config.hpp"
#include "kppfrag/io/results.hpp"

namespace kppfrag::io {

/// Resource named by cfg.resource on cfg.grid(): the 1D crenel, the constant
/// m0, a random Fourier field from cfg.optim.seed, or a field CSV. Fields read
/// from disk define their own grid; their mean must equal m0.
ResourceField build_resource(const RunConfig& cfg);

/// Runs cfg.command, writes its outputs under cfg.out and prints a short
/// human-readable summary to `log`.
Manifest run_command(const RunConfig& cfg, std::ostream& log);

}  // namespace kppfrag::io
