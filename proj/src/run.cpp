#include "nucav/run.hpp"

#include <openssl/evp.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "nucav/errors.hpp"
#include "nucav/os.hpp"
#include "nucav/stratified.hpp"

namespace nucav {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return os.str();
}

void apply_overrides(RunConfig& config, const RunOverrides& ov) {
    if (ov.seed) config.seed = *ov.seed;
    if (ov.output_dir) config.output_dir = *ov.output_dir;
    if (ov.max_cladding) {
        ParameterSpec* ps = nullptr;
        if (auto* o = std::get_if<OSCommand>(&config.command)) ps = &o->params;
        if (auto* o = std::get_if<DesignEITCommand>(&config.command)) ps = &o->params;
        if (auto* o = std::get_if<DesignSpectrumCommand>(&config.command)) ps = &o->params;
        if (!ps) throw ConfigError({"--max-cladding only applies to os and design commands"});
        ps->max_cladding = *ov.max_cladding;
        std::ostringstream os;
        os << std::setprecision(17) << *ov.max_cladding;
        config.overrides += "max_cladding=" + os.str() + ";";
    }
}

int exit_status(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const DomainError*>(&e)) return 3;
    if (dynamic_cast<const NumericalError*>(&e)) return 4;
    return 1;
}

void write_error_json(const std::string& dir, const std::exception& e) {
    json j;
    j["status"] = "error";
    const char* kind = "internal";
    if (dynamic_cast<const ConfigError*>(&e)) kind = "config";
    else if (dynamic_cast<const DomainError*>(&e)) kind = "domain";
    else if (dynamic_cast<const NumericalError*>(&e)) kind = "numerical";
    j["kind"] = kind;
    j["exit_status"] = exit_status(e);
    j["message"] = e.what();
    json problems = json::array();
    if (auto* ce = dynamic_cast<const ConfigError*>(&e))
        for (const auto& p : ce->problems()) problems.push_back(p);
    j["problems"] = problems;
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream(fs::path(dir) / "error.json") << j.dump(2) << "\n";
}

namespace {

json cjson(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

class Csv {
public:
    explicit Csv(const fs::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\r\n";
    }
    void row(const std::vector<double>& cells) {
        std::vector<std::string> s;
        s.reserve(cells.size());
        for (double v : cells) s.push_back(num(v));
        row(s);
    }

private:
    std::ofstream out_;
};

json stack_json(const CavityStack& stack, const ResonantLayerSet& layers) {
    json j;
    j["top"] = stack.top.name;
    j["bottom"] = stack.bottom.name;
    json ls = json::array();
    for (std::size_t i = 0; i < stack.layers.size(); ++i) {
        const bool res = std::find(layers.indices.begin(), layers.indices.end(), i) !=
                         layers.indices.end();
        ls.push_back({{"material", stack.layers[i].material.name},
                      {"thickness_nm", stack.layers[i].thickness},
                      {"resonant", res}});
    }
    j["layers"] = ls;
    j["total_thickness_nm"] = stack.total_thickness();
    return j;
}

json scheme_json(const LevelScheme& s) {
    json j;
    const auto L = static_cast<Eigen::Index>(s.size());
    json E = json::array();
    for (Eigen::Index a = 0; a < L; ++a) {
        json row = json::array();
        for (Eigen::Index b = 0; b < L; ++b) row.push_back(cjson(s.E(a, b)));
        E.push_back(row);
    }
    j["theta_mrad"] = s.theta.real() * 1e3;
    j["E_gamma0"] = E;
    json rabi = json::array(), rr = json::array(), rt = json::array(), cls = json::array(),
         sr = json::array();
    for (Eigen::Index a = 0; a < L; ++a) {
        rabi.push_back(cjson(s.rabi(a)));
        rr.push_back(cjson(s.out_refl(a)));
        rt.push_back(cjson(s.out_trans(a)));
        cls.push_back(s.cls(static_cast<std::size_t>(a)));
        sr.push_back(s.sr(static_cast<std::size_t>(a)));
    }
    j["rabi"] = rabi;
    j["out_refl"] = rr;
    j["out_trans"] = rt;
    j["cls_gamma0"] = cls;
    j["sr_gamma0"] = sr;
    j["r_el"] = cjson(s.r_el);
    j["t_el"] = cjson(s.t_el);
    const auto d = eigen_decompose(s);
    json ev = json::array(), gr = json::array(), gt = json::array();
    for (Eigen::Index a = 0; a < L; ++a) {
        ev.push_back(cjson(d.eigenvalues(a)));
        gr.push_back(cjson(d.weights_r(a)));
        gt.push_back(cjson(d.weights_t(a)));
    }
    j["eigenvalues_gamma0"] = ev;
    j["weights_r"] = gr;
    j["weights_t"] = gt;
    j["condition_number"] = d.condition_number;
    j["near_degenerate"] = d.degenerate();
    return j;
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << j.dump(2) << "\n";
}

void write_spectrum_csv(const fs::path& p, const LevelScheme& s, const FrequencyGrid& g,
                        const std::vector<cplx>* semiclassical = nullptr) {
    const auto r = reflectance(s, g);
    const auto t = transmittance(s, g);
    Csv csv(p);
    std::vector<std::string> head = {"detuning_gamma0", "re_r", "im_r", "abs_r2",
                                     "re_t", "im_t", "abs_t2"};
    if (semiclassical) {
        head.push_back("re_r_semiclassical");
        head.push_back("im_r_semiclassical");
    }
    csv.row(head);
    for (std::size_t i = 0; i < g.detunings.size(); ++i) {
        std::vector<double> row = {g.detunings[i], r[i].real(), r[i].imag(), std::norm(r[i]),
                                   t[i].real(), t[i].imag(), std::norm(t[i])};
        if (semiclassical) {
            row.push_back((*semiclassical)[i].real());
            row.push_back((*semiclassical)[i].imag());
        }
        csv.row(row);
    }
}

void write_trace_csv(const fs::path& p, const OptimizeOutcome& o,
                     const std::vector<std::string>& names, bool negate) {
    Csv csv(p);
    std::vector<std::string> head = {"evaluation"};
    head.insert(head.end(), names.begin(), names.end());
    head.push_back(negate ? "cost" : "penalty");
    csv.row(head);
    for (std::size_t i = 0; i < o.trace.size(); ++i) {
        std::vector<double> row = {static_cast<double>(i)};
        row.insert(row.end(), o.trace[i].x.begin(), o.trace[i].x.end());
        row.push_back(negate ? -o.trace[i].value : o.trace[i].value);
        csv.row(row);
    }
}

json result_json(const OptimizationResult& r, const CavityParameterization& p) {
    json j;
    j["feasible"] = r.feasible;
    j["report"] = r.report;
    json params;
    for (std::size_t i = 0; i < p.params.size(); ++i) params[p.params[i].name] = r.params[i];
    j["parameters"] = params;
    j["theta_mrad"] = r.geom.theta.real() * 1e3;
    j["stack"] = stack_json(r.stack, r.layers);
    json m;
    for (std::size_t i = 0; i < r.metric_names.size(); ++i) m[r.metric_names[i]] = r.metrics[i];
    j["metrics"] = m;
    j["evaluations"] = r.search.evaluations;
    j["rejected"] = r.search.rejected;
    j["level_scheme"] = scheme_json(r.scheme);
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> execute(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    std::vector<std::string> files;
    const auto energy = cfg.photon_energy;
    std::ostringstream summary;
    summary << std::setprecision(4);

    if (auto* c = std::get_if<SpectrumCommand>(&cfg.command)) {
        const auto geom = IncidenceGeometry::at_mrad(c->theta_mrad, energy);
        const auto scheme = derive_level_scheme(*cfg.stack, geom, cfg.layers);
        const auto grid = FrequencyGrid::linspace(c->detuning_min, c->detuning_max, c->points);
        std::vector<cplx> sc;
        if (c->semiclassical)
            sc = semiclassical_reflectance(*cfg.stack, geom, grid.detunings, cfg.layers);
        write_spectrum_csv(dir / "spectrum.csv", scheme, grid, c->semiclassical ? &sc : nullptr);
        write_json(dir / "levelscheme.json", scheme_json(scheme));
        files = {"spectrum.csv", "levelscheme.json"};
        const auto r = reflectance(scheme, grid);
        std::size_t imin = 0;
        for (std::size_t i = 0; i < r.size(); ++i)
            if (std::norm(r[i]) < std::norm(r[imin])) imin = i;
        summary << "spectrum at " << c->theta_mrad << " mrad, " << grid.detunings.size()
                << " detunings\n  |r_el|^2 = " << std::norm(scheme.r_el) << ", min |r|^2 = "
                << std::norm(r[imin]) << " at " << grid.detunings[imin] << " gamma0\n";
    } else if (auto* c = std::get_if<LevelSchemeCommand>(&cfg.command)) {
        const auto geom = IncidenceGeometry::at_mrad(c->theta_mrad, energy);
        const auto scheme = derive_level_scheme(*cfg.stack, geom, cfg.layers);
        write_json(dir / "levelscheme.json", scheme_json(scheme));
        files = {"levelscheme.json"};
        summary << "level scheme at " << c->theta_mrad << " mrad (gamma0 units)\n";
        for (std::size_t l = 0; l < scheme.size(); ++l)
            summary << "  layer " << l + 1 << ": CLS " << scheme.cls(l) << ", Gamma_SR "
                    << scheme.sr(l) << ", Rabi " << scheme.rabi(static_cast<Eigen::Index>(l))
                    << "\n";
        if (scheme.size() == 2)
            summary << "  Delta12 " << scheme.delta12() << ", gamma12 " << scheme.gamma12() << "\n";
    } else if (auto* c = std::get_if<RockingCommand>(&cfg.command)) {
        std::vector<double> th(c->points);
        for (std::size_t i = 0; i < th.size(); ++i)
            th[i] = 1e-3 * (c->theta_min_mrad + (c->theta_max_mrad - c->theta_min_mrad) *
                                                    static_cast<double>(i) /
                                                    static_cast<double>(th.size() - 1));
        Csv csv(dir / "rocking.csv");
        csv.row(std::vector<std::string>{"theta_mrad", "abs_r2", "abs_t2"});
        std::vector<double> r2(th.size());
        for (std::size_t i = 0; i < th.size(); ++i) {
            const auto co = parratt_coefficients(*cfg.stack, {cplx(th[i], 0.0), energy});
            r2[i] = std::norm(co.r);
            csv.row(std::vector<double>{th[i] * 1e3, r2[i], std::norm(co.t)});
        }
        files = {"rocking.csv"};
        summary << "rocking curve, " << th.size() << " angles; minima at (mrad):";
        for (std::size_t i = 1; i + 1 < th.size(); ++i)
            if (r2[i] < r2[i - 1] && r2[i] <= r2[i + 1]) summary << " " << th[i] * 1e3;
        summary << "\n";
    } else if (auto* c = std::get_if<PolesCommand>(&cfg.command)) {
        const auto set = find_poles(*cfg.stack, cfg.layers, c->window, c->observables, energy);
        Csv csv(dir / "poles.csv");
        std::vector<std::string> head = {"re_theta_mrad", "im_theta_mrad"};
        for (const auto& o : set.observables) {
            head.push_back("re_residue_" + o);
            head.push_back("im_residue_" + o);
        }
        csv.row(head);
        json pj = json::array();
        for (std::size_t k = 0; k < set.poles.size(); ++k) {
            std::vector<double> row = {set.poles[k].real() * 1e3, set.poles[k].imag() * 1e3};
            json pk;
            pk["theta_mrad"] = cjson(set.poles[k] * 1e3);
            for (std::size_t o = 0; o < set.observables.size(); ++o) {
                row.push_back(set.residues[o][k].real());
                row.push_back(set.residues[o][k].imag());
                pk["residue_" + set.observables[o]] = cjson(set.residues[o][k]);
            }
            csv.row(row);
            pj.push_back(pk);
        }
        json j;
        j["poles"] = pj;
        json consts;
        for (std::size_t o = 0; o < set.observables.size(); ++o)
            consts[set.observables[o]] = cjson(set.constants[o]);
        j["value_at_zero_angle"] = consts;
        j["unconverged_candidates"] = set.failed.size();
        write_json(dir / "poles.json", j);
        files = {"poles.csv", "poles.json"};
        if (c->trajectory_points >= 2) {
            Csv tr(dir / "trajectory.csv");
            std::vector<std::string> th = {"theta_mrad"};
            for (const auto& o : set.observables) {
                th.push_back("re_" + o);
                th.push_back("im_" + o);
                th.push_back("re_" + o + "_mittag_leffler");
                th.push_back("im_" + o + "_mittag_leffler");
            }
            tr.row(th);
            std::vector<AngleFunction> fs;
            for (const auto& o : set.observables)
                fs.push_back(named_observable(*cfg.stack, cfg.layers, o, energy));
            for (std::size_t i = 0; i < c->trajectory_points; ++i) {
                const double t = c->window.re_min + (c->window.re_max - c->window.re_min) *
                                                        static_cast<double>(i) /
                                                        static_cast<double>(c->trajectory_points - 1);
                std::vector<double> row = {t * 1e3};
                for (std::size_t o = 0; o < fs.size(); ++o) {
                    const cplx v = fs[o](cplx(t, 0.0));
                    const cplx m = mittag_leffler_approx(set, o, cplx(t, 0.0));
                    row.insert(row.end(), {v.real(), v.imag(), m.real(), m.imag()});
                }
                tr.row(row);
            }
            files.push_back("trajectory.csv");
        }
        summary << set.poles.size() << " poles in the window (theta in mrad):\n";
        for (std::size_t k = 0; k < set.poles.size() && k < 12; ++k)
            summary << "  " << set.poles[k].real() * 1e3 << (set.poles[k].imag() < 0 ? " - " : " + ")
                    << std::abs(set.poles[k].imag()) * 1e3 << "i\n";
    } else if (auto* c = std::get_if<OSCommand>(&cfg.command)) {
        const auto param = cfg.parameterization();
        OSOptions opt;
        opt.budget = c->budget;
        opt.seed = cfg.seed;
        const auto space = sample_os(param, c->observables, opt);
        Csv csv(dir / "os_samples.csv");
        std::vector<std::string> head = space.param_names;
        head.insert(head.end(), space.observable_names.begin(), space.observable_names.end());
        for (const char* f : {"evaluated", "capped", "degenerate", "boundary"}) head.push_back(f);
        csv.row(head);
        for (const auto& s : space.samples) {
            std::vector<double> row = s.params;
            row.insert(row.end(), s.observables.begin(), s.observables.end());
            for (bool b : {s.evaluated, s.capped, s.degenerate, s.boundary}) row.push_back(b ? 1.0 : 0.0);
            csv.row(row);
        }
        files = {"os_samples.csv"};
        summary << "observable space: " << space.samples.size() << " samples\n";
        for (std::size_t j = 0; j < space.observable_names.size(); ++j) {
            double lo = 1e300, hi = -1e300;
            for (const auto& s : space.samples)
                if (s.evaluated) {
                    lo = std::min(lo, s.observables[j]);
                    hi = std::max(hi, s.observables[j]);
                }
            summary << "  " << space.observable_names[j] << " in [" << lo << ", " << hi << "]\n";
        }
        if (!c->boundary.empty() && space.samples.size() >= 10) {
            const auto b = os_boundary(space, c->boundary);
            auto ring_json = [](const Boundary2D& o) {
                json ring = json::array();
                for (const auto& p : o.ring) ring.push_back({p.x, p.y});
                json holes = json::array();
                for (const auto& h : o.holes) {
                    json hr = json::array();
                    for (const auto& p : h) hr.push_back({p.x, p.y});
                    holes.push_back(hr);
                }
                return json{{"ring", ring}, {"holes", holes}, {"area", o.area}, {"alpha_radius", o.alpha_radius},
                            {"loops", o.rings}, {"degenerate", o.degenerate}};
            };
            json j;
            j["axes"] = b.axes;
            j["outline"] = ring_json(b.outline);
            json slices = json::array();
            for (const auto& s : b.slices)
                slices.push_back({{"lo", s.lo}, {"hi", s.hi}, {"outline", ring_json(s.outline)}});
            j["slices"] = slices;
            j["degenerate"] = b.degenerate;
            write_json(dir / "os_boundary.json", j);
            files.push_back("os_boundary.json");
            summary << "  boundary area (" << b.axes[0] << ", " << b.axes[1]
                    << ") = " << b.outline.area << (b.degenerate ? " [degenerate]" : "") << "\n";
        }
    } else if (auto* c = std::get_if<DesignEITCommand>(&cfg.command)) {
        const auto param = cfg.parameterization();
        OptimizerOptions opt;
        opt.budget = c->budget;
        opt.seed = cfg.seed;
        const auto res = design_eit(param, c->goal, opt);
        write_json(dir / "result.json", result_json(res, param));
        std::ofstream(dir / "stack.yaml", std::ios::binary) << export_stack_yaml(res.stack, res.layers);
        const auto rep = check_eit_conditions(res.scheme, c->goal);
        const auto w = transparency_witness(res.scheme, 3 - rep.metastable);
        Csv sus(dir / "susceptibility.csv");
        sus.row(std::vector<std::string>{"detuning_gamma0", "re_chi", "im_chi"});
        for (std::size_t i = 0; i < w.chi.size(); ++i)
            sus.row(std::vector<double>{w.grid.detunings[i], w.chi[i].real(), w.chi[i].imag()});
        write_spectrum_csv(dir / "spectrum.csv", res.scheme, FrequencyGrid::linspace(-40, 40, 1601));
        std::vector<std::string> pn;
        for (const auto& p : param.params) pn.push_back(p.name);
        write_trace_csv(dir / "cost_trace.csv", res.search, pn, false);
        files = {"result.json", "stack.yaml", "susceptibility.csv", "spectrum.csv", "cost_trace.csv"};
        summary << "EIT design: " << res.report << "\n  " << res.stack.describe() << " at "
                << res.geom.theta.real() * 1e3 << " mrad\n";
    } else if (auto* c = std::get_if<DesignSpectrumCommand>(&cfg.command)) {
        const auto param = cfg.parameterization();
        OptimizerOptions opt;
        opt.budget = c->budget;
        opt.seed = cfg.seed;
        const auto res = design_spectrum(param, c->goal, opt);
        write_json(dir / "result.json", result_json(res, param));
        std::ofstream(dir / "stack.yaml", std::ios::binary) << export_stack_yaml(res.stack, res.layers);
        write_spectrum_csv(dir / "spectrum.csv", res.scheme, FrequencyGrid::linspace(-100, 100, 4001));
        std::vector<std::string> pn;
        for (const auto& p : param.params) pn.push_back(p.name);
        write_trace_csv(dir / "cost_trace.csv", res.search, pn, true);
        files = {"result.json", "stack.yaml", "spectrum.csv", "cost_trace.csv"};
        summary << "spectral design: " << res.report << "\n  " << res.stack.describe() << " at "
                << res.geom.theta.real() * 1e3 << " mrad\n";
    }
    out << summary.str();
    return files;
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir(cfg.output_dir);
    try {
        fs::create_directories(dir);
        fs::remove(dir / "error.json");
        const auto files = execute(cfg, dir, out);
        const std::string materials = read_file(cfg.materials_path);
        json m;
        m["tool"] = "nucav";
        m["version"] = kVersion;
        m["command"] = command_name(cfg.command);
        m["seed"] = cfg.seed;
        m["config"] = cfg.source_path;
        m["materials"] = cfg.materials_path;
        m["inputs_sha256"] = sha256_hex(cfg.source_text + '\0' + materials + '\0' +
                                        std::to_string(cfg.seed) + '\0' + cfg.overrides);
        m["config_sha256"] = sha256_hex(cfg.source_text);
        m["materials_sha256"] = sha256_hex(materials);
        m["photon_energy_eV"] = cfg.photon_energy;
        m["units"] = {{"angle", "mrad"}, {"thickness", "nm"}, {"detuning_and_rates", "gamma0"}};
        m["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)},
                          {"boost", BOOST_LIB_VERSION}};
        m["outputs"] = files;
        write_json(dir / "manifest.json", m);
        out << "outputs written to " << dir.string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        write_error_json(dir.string(), e);
        out << "error: " << e.what() << "\n";
        return exit_status(e);
    }
}

}  // namespace nucav
