#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

namespace omtk {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one subcommand. Results go to `out`, failures to `err` as
/// {"error": {"category": ..., "message": ...}}. Returns the exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Penrose identities on random matrices and partitioned-versus-flat
/// agreement; the `pinv-check` report.
nlohmann::json pinv_property_suite(std::size_t trials, std::uint64_t seed, int max_dim);

}  // namespace omtk
