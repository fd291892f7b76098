#pragma once

#include <exception>
#include <iosfwd>
#include <optional>
#include <string>

#include "nucav/config.hpp"

namespace nucav {

inline constexpr const char* kVersion = "0.1.0";

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<double> max_cladding;
};

void apply_overrides(RunConfig& config, const RunOverrides& overrides);

// Runs the configured command, writes its artifacts plus manifest.json into the
// output directory and a short summary to out. On failure writes error.json and
// returns a nonzero status: 2 config, 3 domain, 4 numerical, 1 anything else.
int run_command(const RunConfig& config, std::ostream& out);

int exit_status(const std::exception& e);
// Machine-readable error report; creates the directory if needed.
void write_error_json(const std::string& dir, const std::exception& e);

std::string sha256_hex(const std::string& bytes);

}  // namespace nucav
