#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "meanfield/ensemble.hpp"

namespace meanfield {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// CSV with header `id,x1..xd,v1..vd`, one row per particle. Values use the
/// shortest round-trip representation, so write/read is lossless.
void write_ensemble_csv(std::ostream& out, const PhaseEnsemble& ensemble);
void write_ensemble_csv(const std::filesystem::path& path, const PhaseEnsemble& ensemble);

/// Throws ConfigError on malformed input (wrong header, bad number, missing row).
PhaseEnsemble read_ensemble_csv(std::istream& in);
PhaseEnsemble read_ensemble_csv(const std::filesystem::path& path);

}  // namespace meanfield
