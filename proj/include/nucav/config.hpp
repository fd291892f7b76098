#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nucav/design.hpp"
#include "nucav/ensemble.hpp"
#include "nucav/poles.hpp"

namespace nucav {

struct SpectrumCommand {
    double theta_mrad = 3.0;
    double detuning_min = -20.0;
    double detuning_max = 20.0;
    std::size_t points = 2001;
    bool semiclassical = false;
};

struct LevelSchemeCommand {
    double theta_mrad = 3.0;
};

struct RockingCommand {
    double theta_min_mrad = 1.0;
    double theta_max_mrad = 6.0;
    std::size_t points = 1001;
};

struct PolesCommand {
    PoleWindow window;  // radians internally; mrad in the config
    std::vector<std::string> observables{"coupling12", "level1", "level2"};
    std::size_t trajectory_points = 0;  // real-angle samples of each observable, 0 for none
};

// Free parameters either from the built-in two-layer family or listed explicitly
// against the configured stack.
struct ParameterSpec {
    std::string family;  // "two-layer" or empty
    std::string cladding = "Pd";
    std::vector<FreeParameter> free;
    double theta_mrad = 3.0;
    std::optional<double> max_cladding;
};

struct OSCommand {
    ParameterSpec params;
    std::size_t budget = 2000;
    std::vector<std::string> observables{"delta12", "gamma12"};
    std::vector<std::string> boundary;  // defaults to the first two observables
};

struct DesignEITCommand {
    ParameterSpec params;
    EITGoal goal;
    std::size_t budget = 20000;
};

struct DesignSpectrumCommand {
    ParameterSpec params;
    SpectralGoal goal;
    std::size_t budget = 30000;
};

using Command = std::variant<SpectrumCommand, LevelSchemeCommand, RockingCommand, PolesCommand,
                             OSCommand, DesignEITCommand, DesignSpectrumCommand>;

const std::vector<std::string>& command_names();
std::string command_name(const Command& c);

struct RunConfig {
    std::string source_path;
    std::string source_text;  // raw config, hashed into the manifest
    std::string overrides;    // command-line overrides that change results, also hashed
    std::string materials_path;
    MaterialTable materials;
    double photon_energy = kFe57Energy_eV;
    std::optional<CavityStack> stack;
    ResonantLayerSet layers;
    NuclearSpecies species;
    std::uint64_t seed = 1;
    std::string output_dir = "nucav-out";
    Command command;

    CavityParameterization parameterization() const;  // for os / design commands
};

// Parses YAML (or JSON, which is read by the same parser). Every problem found
// is reported in one ConfigError, each prefixed with line:column where known.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& source_name = "<string>");

// Stack block in the config syntax; parse_config reads it back unchanged.
std::string export_stack_yaml(const CavityStack& stack, const ResonantLayerSet& layers);

}  // namespace nucav
