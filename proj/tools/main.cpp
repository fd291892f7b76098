#include <CLI11.hpp>

#include <iostream>

#include "nucav/errors.hpp"
#include "nucav/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nucav: x-ray thin-film cavity level schemes, spectra and inverse design"};
    app.require_subcommand(1);
    std::string config_path;
    nucav::RunOverrides ov;
    std::uint64_t seed = 0;
    std::string out;
    double max_cladding = 0.0;

    for (const auto& name : nucav::command_names()) {
        auto* sub = app.add_subcommand(name, "run the '" + name + "' block of a config");
        sub->add_option("--config", config_path, "YAML or JSON run config")->required();
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        sub->add_option("--out", out, "output directory (overrides the config)");
        sub->add_option("--max-cladding", max_cladding, "top-cladding limit in nm");
    }
    CLI11_PARSE(app, argc, argv);

    const auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--out")) ov.output_dir = out;
    if (sub->count("--max-cladding")) ov.max_cladding = max_cladding;

    nucav::RunConfig cfg;
    try {
        cfg = nucav::load_config(config_path);
        if (nucav::command_name(cfg.command) != sub->get_name())
            throw nucav::ConfigError({config_path + ": config holds a '" +
                                      nucav::command_name(cfg.command) + "' block, not '" +
                                      sub->get_name() + "'"});
        nucav::apply_overrides(cfg, ov);
    } catch (const std::exception& e) {
        const std::string dir = ov.output_dir ? *ov.output_dir : "nucav-out";
        nucav::write_error_json(dir, e);
        std::cerr << "error: " << e.what() << "\n";
        if (auto* ce = dynamic_cast<const nucav::ConfigError*>(&e))
            for (const auto& p : ce->problems()) std::cerr << "  " << p << "\n";
        return nucav::exit_status(e);
    }
    return nucav::run_command(cfg, std::cout);
}
