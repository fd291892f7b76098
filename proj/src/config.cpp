#include "nucav/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nucav/errors.hpp"

namespace nucav {

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {
        "spectrum", "levelscheme", "rocking", "poles", "os", "design-eit", "design-spectrum"};
    return names;
}

std::string command_name(const Command& c) { return command_names()[c.index()]; }

namespace {

std::string where(const YAML::Node& n) {
    const auto m = n.Mark();
    if (m.is_null()) return "";
    return std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) + ": ";
}

class Reader {
public:
    std::vector<std::string> errors;

    void fail(const YAML::Node& n, const std::string& msg) { errors.push_back(where(n) + msg); }

    // Reports keys of a map that are not in allowed.
    void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                    const std::string& context) {
        if (!map.IsMap()) {
            fail(map, context + " must be a mapping");
            return;
        }
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + context);
        }
    }

    std::optional<double> number(const YAML::Node& map, const std::string& key) {
        const auto n = map[key];
        if (!n) return std::nullopt;
        try {
            const double v = n.as<double>();
            if (!std::isfinite(v)) throw YAML::Exception(n.Mark(), "");
            return v;
        } catch (const YAML::Exception&) {
            fail(n, "'" + key + "' must be a finite number");
            return std::nullopt;
        }
    }

    void number(const YAML::Node& map, const std::string& key, double& out) {
        if (auto v = number(map, key)) out = *v;
    }

    void count(const YAML::Node& map, const std::string& key, std::size_t& out) {
        const auto n = map[key];
        if (!n) return;
        try {
            const auto v = n.as<long long>();
            if (v < 0) throw YAML::Exception(n.Mark(), "");
            out = static_cast<std::size_t>(v);
        } catch (const YAML::Exception&) {
            fail(n, "'" + key + "' must be a non-negative integer");
        }
    }

    void text(const YAML::Node& map, const std::string& key, std::string& out) {
        const auto n = map[key];
        if (!n) return;
        if (!n.IsScalar()) {
            fail(n, "'" + key + "' must be a string");
            return;
        }
        out = n.as<std::string>();
    }

    void flag(const YAML::Node& map, const std::string& key, bool& out) {
        const auto n = map[key];
        if (!n) return;
        try {
            out = n.as<bool>();
        } catch (const YAML::Exception&) {
            fail(n, "'" + key + "' must be true or false");
        }
    }

    void names(const YAML::Node& map, const std::string& key, std::vector<std::string>& out) {
        const auto n = map[key];
        if (!n) return;
        if (!n.IsSequence()) {
            fail(n, "'" + key + "' must be a list of names");
            return;
        }
        out.clear();
        for (const auto& e : n) out.push_back(e.as<std::string>());
    }
};

std::string unknown_material(const std::string& name, const MaterialTable& table) {
    std::string msg = "unknown material '" + name + "' (available:";
    for (const auto& n : table.names()) msg += " " + n;
    return msg + ")";
}

void parse_stack(Reader& rd, const YAML::Node& node, const MaterialTable& table,
                 CavityStack& stack, ResonantLayerSet& layers, const NuclearSpecies& species) {
    rd.check_keys(node, {"top", "bottom", "layers"}, "stack");
    if (!node.IsMap()) return;
    auto material = [&](const YAML::Node& n, Material& out) {
        if (!n.IsScalar()) {
            rd.fail(n, "material must be a name");
            return;
        }
        const auto name = n.as<std::string>();
        if (!table.contains(name)) rd.fail(n, unknown_material(name, table));
        else out = table.get(name);
    };
    if (node["top"]) material(node["top"], stack.top);
    if (node["bottom"]) material(node["bottom"], stack.bottom);
    const auto list = node["layers"];
    if (!list) {
        rd.fail(node, "stack is missing required field 'layers'");
        return;
    }
    if (!list.IsSequence() || list.size() == 0) {
        rd.fail(list, "'layers' must be a non-empty list of [material, thickness_nm]");
        return;
    }
    std::vector<std::size_t> marked;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto e = list[i];
        Layer layer;
        bool resonant = false;
        YAML::Node mat, thick;
        if (e.IsSequence() && (e.size() == 2 || e.size() == 3)) {
            mat = e[0];
            thick = e[1];
            if (e.size() == 3) {
                if (e[2].IsScalar() && e[2].as<std::string>() == "resonant") resonant = true;
                else rd.fail(e[2], "third layer entry may only be 'resonant'");
            }
        } else if (e.IsMap()) {
            rd.check_keys(e, {"material", "thickness", "resonant"}, "layer");
            mat = e["material"];
            thick = e["thickness"];
            rd.flag(e, "resonant", resonant);
            if (!mat) rd.fail(e, "layer is missing required field 'material'");
            if (!thick) rd.fail(e, "layer is missing required field 'thickness'");
            if (!mat || !thick) continue;
        } else {
            rd.fail(e, "layer must be [material, thickness_nm] or [material, thickness_nm, resonant]");
            continue;
        }
        material(mat, layer.material);
        try {
            layer.thickness = thick.as<double>();
            if (!std::isfinite(layer.thickness) || layer.thickness < 0.0)
                rd.fail(thick, "layer thickness must be finite and >= 0");
        } catch (const YAML::Exception&) {
            rd.fail(thick, "layer thickness must be a number (nm)");
        }
        if (resonant) marked.push_back(i);
        stack.layers.push_back(layer);
    }
    if (marked.empty())
        for (std::size_t i = 0; i < stack.layers.size(); ++i)
            if (stack.layers[i].material.name == "Fe57") marked.push_back(i);
    layers = ResonantLayerSet::uniform(marked, species);
}

void parse_params(Reader& rd, const YAML::Node& node, ParameterSpec& p,
                  const std::set<std::string>& extra, const std::string& context) {
    std::set<std::string> allowed = {"family", "cladding", "free", "theta_mrad", "max_cladding"};
    allowed.insert(extra.begin(), extra.end());
    rd.check_keys(node, allowed, context);
    if (!node.IsMap()) return;
    rd.text(node, "family", p.family);
    if (!p.family.empty() && p.family != "two-layer")
        rd.fail(node["family"], "unknown family '" + p.family + "' (available: two-layer)");
    rd.text(node, "cladding", p.cladding);
    rd.number(node, "theta_mrad", p.theta_mrad);
    if (auto v = rd.number(node, "max_cladding")) p.max_cladding = *v;
    if (const auto free = node["free"]) {
        if (!free.IsSequence()) {
            rd.fail(free, "'free' must be a list");
        } else {
            for (const auto& f : free) {
                rd.check_keys(f, {"layer", "angle", "min", "max", "name"}, "free parameter");
                if (!f.IsMap()) continue;
                FreeParameter fp;
                bool angle = false;
                rd.flag(f, "angle", angle);
                if (angle) {
                    fp.kind = FreeParameter::Kind::Angle;
                    fp.name = "theta_mrad";
                } else {
                    rd.count(f, "layer", fp.layer);
                    if (!f["layer"]) rd.fail(f, "free parameter needs 'layer' or 'angle: true'");
                    fp.name = "d" + std::to_string(fp.layer);
                }
                rd.text(f, "name", fp.name);
                const auto lo = rd.number(f, "min");
                const auto hi = rd.number(f, "max");
                if (!lo || !hi) rd.fail(f, "free parameter needs 'min' and 'max'");
                else {
                    fp.lo = *lo;
                    fp.hi = *hi;
                }
                p.free.push_back(fp);
            }
        }
    }
    if (p.family.empty() && p.free.empty())
        rd.fail(node, context + " needs 'family' or a 'free' parameter list");
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source_name) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError({source_name + ":" + std::to_string(e.mark.line + 1) + ":" +
                           std::to_string(e.mark.column + 1) + ": parse error: " + e.msg});
    }
    if (!root.IsMap()) throw ConfigError({source_name + ": config must be a mapping"});

    Reader rd;
    RunConfig cfg;
    cfg.source_path = source_name;
    cfg.source_text = text;

    std::set<std::string> allowed = {"materials", "photon_energy_eV", "seed", "output", "stack",
                                     "species"};
    for (const auto& c : command_names()) allowed.insert(c);
    rd.check_keys(root, allowed, "config");

    // Materials: environment override, then config, then the bundled table.
    std::string mpath;
    rd.text(root, "materials", mpath);
    if (!mpath.empty() && std::filesystem::path(mpath).is_relative() && source_name != "<string>") {
        const auto base = std::filesystem::path(source_name).parent_path();
        mpath = (base / mpath).string();
    }
    if (const char* env = std::getenv("NUCAV_MATERIALS"); env && *env) mpath = env;
    if (mpath.empty()) mpath = MaterialTable::default_path();
    cfg.materials_path = mpath;
    try {
        cfg.materials = MaterialTable::load_csv(mpath);
    } catch (const std::exception& e) {
        rd.errors.push_back(std::string("materials: ") + e.what());
    }
    cfg.photon_energy = cfg.materials.energy_eV() > 0.0 ? cfg.materials.energy_eV() : kFe57Energy_eV;
    rd.number(root, "photon_energy_eV", cfg.photon_energy);

    if (const auto s = root["seed"]) {
        try {
            cfg.seed = s.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            rd.fail(s, "'seed' must be a non-negative integer");
        }
    }
    rd.text(root, "output", cfg.output_dir);

    if (const auto sp = root["species"]) {
        rd.check_keys(sp, {"name", "gamma0_eV", "xi", "transition_energy_eV"}, "species");
        if (sp.IsMap()) {
            rd.text(sp, "name", cfg.species.name);
            rd.number(sp, "gamma0_eV", cfg.species.gamma0);
            rd.number(sp, "xi", cfg.species.xi);
            rd.number(sp, "transition_energy_eV", cfg.species.transition_energy);
            try {
                cfg.species.validate();
            } catch (const std::exception& e) {
                rd.fail(sp, e.what());
            }
        }
    }

    if (const auto st = root["stack"]) {
        CavityStack stack;
        parse_stack(rd, st, cfg.materials, stack, cfg.layers, cfg.species);
        cfg.stack = stack;
    }

    std::vector<std::string> found;
    for (const auto& c : command_names())
        if (root[c]) found.push_back(c);
    if (found.size() != 1) {
        std::string msg = "exactly one command block required (one of:";
        for (const auto& c : command_names()) msg += " " + c;
        msg += "), found " + std::to_string(found.size());
        rd.errors.push_back(msg);
    } else {
        const std::string name = found.front();
        const YAML::Node b = root[name];
        const bool needs_stack = name == "spectrum" || name == "levelscheme" ||
                                 name == "rocking" || name == "poles";
        if (needs_stack && !cfg.stack) rd.fail(b, "command '" + name + "' needs a 'stack' block");
        if (name == "spectrum") {
            SpectrumCommand c;
            rd.check_keys(b, {"theta_mrad", "detuning_min", "detuning_max", "points", "semiclassical"},
                          name);
            if (b.IsMap()) {
                if (!b["theta_mrad"]) rd.fail(b, "spectrum is missing required field 'theta_mrad'");
                rd.number(b, "theta_mrad", c.theta_mrad);
                rd.number(b, "detuning_min", c.detuning_min);
                rd.number(b, "detuning_max", c.detuning_max);
                rd.count(b, "points", c.points);
                rd.flag(b, "semiclassical", c.semiclassical);
                if (!(c.detuning_max > c.detuning_min) || c.points < 2)
                    rd.fail(b, "detuning range must be increasing with at least 2 points");
            }
            cfg.command = c;
        } else if (name == "levelscheme") {
            LevelSchemeCommand c;
            rd.check_keys(b, {"theta_mrad"}, name);
            if (b.IsMap()) {
                if (!b["theta_mrad"]) rd.fail(b, "levelscheme is missing required field 'theta_mrad'");
                rd.number(b, "theta_mrad", c.theta_mrad);
            }
            cfg.command = c;
        } else if (name == "rocking") {
            RockingCommand c;
            rd.check_keys(b, {"theta_min_mrad", "theta_max_mrad", "points"}, name);
            if (b.IsMap()) {
                rd.number(b, "theta_min_mrad", c.theta_min_mrad);
                rd.number(b, "theta_max_mrad", c.theta_max_mrad);
                rd.count(b, "points", c.points);
                if (!(c.theta_max_mrad > c.theta_min_mrad) || c.points < 2 || c.theta_min_mrad <= 0.0)
                    rd.fail(b, "angle range must be positive and increasing with at least 2 points");
            }
            cfg.command = c;
        } else if (name == "poles") {
            PolesCommand c;
            rd.check_keys(b, {"re_min_mrad", "re_max_mrad", "im_min_mrad", "im_max_mrad", "n_re",
                              "n_im", "observables", "trajectory_points"},
                          name);
            if (b.IsMap()) {
                double v[4] = {c.window.re_min * 1e3, c.window.re_max * 1e3, c.window.im_min * 1e3,
                               c.window.im_max * 1e3};
                rd.number(b, "re_min_mrad", v[0]);
                rd.number(b, "re_max_mrad", v[1]);
                rd.number(b, "im_min_mrad", v[2]);
                rd.number(b, "im_max_mrad", v[3]);
                c.window.re_min = v[0] * 1e-3;
                c.window.re_max = v[1] * 1e-3;
                c.window.im_min = v[2] * 1e-3;
                c.window.im_max = v[3] * 1e-3;
                rd.count(b, "n_re", c.window.n_re);
                rd.count(b, "n_im", c.window.n_im);
                rd.names(b, "observables", c.observables);
                rd.count(b, "trajectory_points", c.trajectory_points);
                try {
                    c.window.validate();
                } catch (const std::exception& e) {
                    rd.fail(b, e.what());
                }
                for (const auto& o : c.observables)
                    if (o != "coupling12" && o != "level1" && o != "level2")
                        rd.fail(b["observables"], "unknown pole observable '" + o +
                                                      "' (available: coupling12 level1 level2)");
            }
            cfg.command = c;
        } else if (name == "os") {
            OSCommand c;
            parse_params(rd, b, c.params, {"budget", "observables", "boundary"}, name);
            if (b.IsMap()) {
                rd.count(b, "budget", c.budget);
                rd.names(b, "observables", c.observables);
                rd.names(b, "boundary", c.boundary);
                if (c.budget < 1) rd.fail(b, "budget >= 1 required");
                try {
                    validate_observables(c.observables);
                } catch (const std::exception& e) {
                    rd.fail(b, e.what());
                }
                if (c.boundary.empty() && c.observables.size() >= 2)
                    c.boundary = {c.observables[0], c.observables[1]};
                for (const auto& n : c.boundary)
                    if (std::find(c.observables.begin(), c.observables.end(), n) == c.observables.end())
                        rd.fail(b, "boundary axis '" + n + "' is not among the sampled observables");
                if (!c.boundary.empty() && c.boundary.size() != 2 && c.boundary.size() != 3)
                    rd.fail(b, "boundary needs 2 or 3 observables");
            }
            cfg.command = c;
        } else if (name == "design-eit") {
            DesignEITCommand c;
            parse_params(rd, b, c.params,
                         {"budget", "metastable", "margin", "max_incoherent_ratio",
                          "min_rabi_suppression", "include_incoherent", "max_dip_ratio"},
                         name);
            if (b.IsMap()) {
                rd.count(b, "budget", c.budget);
                std::size_t meta = 0;
                rd.count(b, "metastable", meta);
                c.goal.metastable = static_cast<int>(meta);
                rd.number(b, "margin", c.goal.margin);
                rd.number(b, "max_incoherent_ratio", c.goal.max_incoherent_ratio);
                rd.number(b, "min_rabi_suppression", c.goal.min_rabi_suppression);
                rd.flag(b, "include_incoherent", c.goal.include_incoherent);
                rd.number(b, "max_dip_ratio", c.goal.max_dip_ratio);
                if (c.budget < 1) rd.fail(b, "budget >= 1 required");
                try {
                    c.goal.validate();
                } catch (const ConfigError& e) {
                    for (const auto& p : e.problems()) rd.fail(b, p);
                }
            }
            cfg.command = c;
        } else {
            DesignSpectrumCommand c;
            parse_params(rd, b, c.params,
                         {"budget", "separation", "alpha", "shift", "weights"}, name);
            if (b.IsMap()) {
                rd.count(b, "budget", c.budget);
                rd.number(b, "separation", c.goal.separation);
                rd.number(b, "alpha", c.goal.alpha);
                if (auto s = rd.number(b, "shift")) c.goal.shift = *s;
                if (const auto w = b["weights"]) {
                    rd.check_keys(w, {"separation", "balance", "resolution", "width", "background",
                                      "shift"},
                                  "weights");
                    if (w.IsMap()) {
                        rd.number(w, "separation", c.goal.w_separation);
                        rd.number(w, "balance", c.goal.w_balance);
                        rd.number(w, "resolution", c.goal.w_resolution);
                        rd.number(w, "width", c.goal.w_width);
                        rd.number(w, "background", c.goal.w_background);
                        rd.number(w, "shift", c.goal.w_shift);
                    }
                }
                if (c.budget < 1) rd.fail(b, "budget >= 1 required");
                try {
                    c.goal.validate();
                } catch (const ConfigError& e) {
                    for (const auto& p : e.problems()) rd.fail(b, p);
                }
            }
            cfg.command = c;
        }
        if (std::holds_alternative<OSCommand>(cfg.command) ||
            std::holds_alternative<DesignEITCommand>(cfg.command) ||
            std::holds_alternative<DesignSpectrumCommand>(cfg.command)) {
            const ParameterSpec* ps = nullptr;
            if (auto* o = std::get_if<OSCommand>(&cfg.command)) ps = &o->params;
            if (auto* o = std::get_if<DesignEITCommand>(&cfg.command)) ps = &o->params;
            if (auto* o = std::get_if<DesignSpectrumCommand>(&cfg.command)) ps = &o->params;
            if (ps->family == "two-layer" && !cfg.materials.contains(ps->cladding))
                rd.fail(b["cladding"] ? b["cladding"] : b, unknown_material(ps->cladding, cfg.materials));
            if (ps->family.empty() && !cfg.stack)
                rd.fail(b, "explicit free parameters need a 'stack' block");
        }
    }

    if (cfg.stack && rd.errors.empty()) {
        try {
            cfg.stack->validate();
            cfg.layers.validate(*cfg.stack);
        } catch (const std::exception& e) {
            rd.fail(root["stack"], e.what());
        }
    }
    if (!rd.errors.empty()) {
        for (auto& e : rd.errors) e = source_name + ":" + e;
        throw ConfigError(rd.errors);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({path + ": cannot open config file"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

CavityParameterization RunConfig::parameterization() const {
    const ParameterSpec* ps = nullptr;
    if (auto* o = std::get_if<OSCommand>(&command)) ps = &o->params;
    if (auto* o = std::get_if<DesignEITCommand>(&command)) ps = &o->params;
    if (auto* o = std::get_if<DesignSpectrumCommand>(&command)) ps = &o->params;
    if (!ps) throw DomainError("command '" + command_name(command) + "' has no parameterization");
    CavityParameterization p;
    if (ps->family == "two-layer") {
        p = CavityParameterization::two_layer_family(materials, ps->cladding);
        for (auto& s : p.layers.species) s = species;
    } else {
        p.base = *stack;
        p.layers = layers;
        p.params = ps->free;
    }
    p.theta_mrad = ps->theta_mrad;
    p.photon_energy = photon_energy;
    if (ps->max_cladding) p.max_top_cladding = ps->max_cladding;
    p.validate();
    return p;
}

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string export_stack_yaml(const CavityStack& stack, const ResonantLayerSet& layers) {
    std::ostringstream os;
    os << "stack:\n  top: " << stack.top.name << "\n  bottom: " << stack.bottom.name
       << "\n  layers:\n";
    for (std::size_t i = 0; i < stack.layers.size(); ++i) {
        const bool res = std::find(layers.indices.begin(), layers.indices.end(), i) !=
                         layers.indices.end();
        os << "    - [" << stack.layers[i].material.name << ", "
           << shortest(stack.layers[i].thickness) << (res ? ", resonant" : "") << "]\n";
    }
    return os.str();
}

}  // namespace nucav
