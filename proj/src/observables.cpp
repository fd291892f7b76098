#include "nucav/observables.hpp"

#include <algorithm>
#include <cmath>

#include "nucav/errors.hpp"

namespace nucav {

void CavityParameterization::validate() const {
    base.validate();
    layers.validate(base);
    if (params.empty()) throw DomainError("parameterization has no free parameters");
    for (const auto& p : params) {
        if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || p.lo > p.hi)
            throw DomainError("parameter '" + p.name + "': bounds must be finite with lo <= hi");
        if (p.kind == FreeParameter::Kind::Thickness) {
            if (p.layer >= base.layers.size())
                throw DomainError("parameter '" + p.name + "': layer index out of range");
            if (p.lo < 0.0) throw DomainError("parameter '" + p.name + "': thickness must be >= 0");
        } else if (!(p.lo > 0.0) || !(p.hi < 100.0)) {
            throw DomainError("parameter '" + p.name + "': angle bounds must lie in (0, 100) mrad");
        }
    }
    if (max_top_cladding) {
        if (!std::isfinite(*max_top_cladding) || *max_top_cladding < 0.0)
            throw DomainError("top-cladding limit must be finite and >= 0");
        bool bounded = false;
        for (const auto& p : params)
            if (p.kind == FreeParameter::Kind::Thickness && p.layer == 0) {
                bounded = true;
                if (p.lo > *max_top_cladding)
                    throw DomainError("infeasible constraints: top-cladding limit below its lower bound");
            }
        if (!bounded && base.layers.front().thickness > *max_top_cladding)
            throw DomainError("infeasible constraints: fixed top cladding exceeds the limit");
    }
}

Box CavityParameterization::bounds() const {
    validate();
    Box box;
    for (const auto& p : params) {
        double hi = p.hi;
        if (max_top_cladding && p.kind == FreeParameter::Kind::Thickness && p.layer == 0)
            hi = std::min(hi, *max_top_cladding);
        box.lo.push_back(p.lo);
        box.hi.push_back(hi);
    }
    return box;
}

std::pair<CavityStack, IncidenceGeometry> CavityParameterization::build(
    const std::vector<double>& x) const {
    if (x.size() != params.size()) throw DomainError("parameter vector has the wrong size");
    CavityStack s = base;
    double theta = theta_mrad;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].kind == FreeParameter::Kind::Angle)
            theta = x[i];
        else
            s.layers[params[i].layer].thickness = x[i];
    }
    return {s, IncidenceGeometry::at_mrad(theta, photon_energy)};
}

LevelScheme CavityParameterization::scheme(const std::vector<double>& x) const {
    const auto [s, g] = build(x);
    return derive_level_scheme(s, g, layers);
}

CavityParameterization CavityParameterization::two_layer_family(const MaterialTable& materials,
                                                                const std::string& cladding) {
    CavityParameterization p;
    const Material& clad = materials.get(cladding);
    const Material& guide = materials.get("B4C");
    const Material& fe = materials.get("Fe57");
    p.base.layers = {{clad, 2.0}, {guide, 30.0}, {fe, 0.57}, {guide, 30.0},
                     {fe, 0.57},  {guide, 30.0}, {clad, 20.0}};
    p.base.bottom = materials.get("Si");
    p.layers = ResonantLayerSet::uniform({2, 4}, NuclearSpecies{});
    using K = FreeParameter::Kind;
    p.params = {{K::Thickness, 0, 0.0, 120.0, "d1"},  {K::Thickness, 1, 0.0, 150.0, "d2"},
                {K::Thickness, 3, 0.0, 150.0, "d4"},  {K::Thickness, 5, 0.0, 150.0, "d6"},
                {K::Thickness, 6, 0.0, 50.0, "d7"},   {K::Angle, 0, 1.5, 6.0, "theta"}};
    return p;
}

const std::vector<std::string>& observable_names() {
    static const std::vector<std::string> names{
        "cls1", "cls2", "sr1", "sr2", "delta12", "gamma12",
        "re_rabi1", "im_rabi1", "re_rabi2", "im_rabi2",
        "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2",
        "re_lambda_narrow", "im_lambda_narrow", "re_lambda_broad", "im_lambda_broad",
        "im_lambda_max", "scaled_weight1", "scaled_weight2", "scaled_weight_diff",
        "delta12_over_g1", "gamma12_over_g1", "delta12_over_g2", "gamma12_over_g2",
        "g2_over_g1", "g1_over_g2", "abs_r_el"};
    return names;
}

void validate_observables(const std::vector<std::string>& names) {
    if (names.empty()) throw DomainError("no observables requested");
    const auto& known = observable_names();
    for (const auto& n : names)
        if (std::find(known.begin(), known.end(), n) == known.end())
            throw DomainError("unknown observable '" + n + "'");
}

namespace {
bool needs_two(const std::string& n) {
    return n != "cls1" && n != "sr1" && n != "re_rabi1" && n != "im_rabi1" &&
           n != "re_lambda_narrow" && n != "im_lambda_narrow" && n != "re_lambda_broad" &&
           n != "im_lambda_broad" && n != "im_lambda_max" && n != "abs_r_el";
}
}  // namespace

ObservableValues evaluate_observables(const LevelScheme& scheme,
                                      const std::vector<std::string>& names) {
    validate_observables(names);
    ObservableValues out;
    const bool two = scheme.size() >= 2;
    bool have_decomp = false;
    SpectrumDecomposition dec;
    std::pair<cplx, cplx> cf;
    double w1 = 0.0, w2 = 0.0;
    auto decomp = [&] {
        if (have_decomp) return;
        dec = eigen_decompose(scheme);
        out.degenerate = dec.degenerate();
        if (two && scheme.size() == 2) {
            cf = closed_form_eigenvalues_2x2(scheme.E);
            const Eigen::VectorXd sw = scaled_weights(dec);
            // Attach weights to the closed-form labels by nearest eigenvalue.
            const bool same = std::abs(cf.first - dec.eigenvalues(0)) <=
                              std::abs(cf.first - dec.eigenvalues(1));
            w1 = same ? sw(0) : sw(1);
            w2 = same ? sw(1) : sw(0);
        }
        have_decomp = true;
    };

    for (const auto& n : names) {
        if (needs_two(n) && !two) throw DomainError("observable '" + n + "' needs two resonant layers");
        if ((n.find("lambda") != std::string::npos && n.find("lambda_") == std::string::npos) ||
            n.rfind("scaled_weight", 0) == 0)
            if (scheme.size() != 2)
                throw DomainError("observable '" + n + "' needs exactly two resonant layers");
        double v = 0.0;
        const double g1 = scheme.sr(0) + 1.0;
        const double g2 = two ? scheme.sr(1) + 1.0 : 0.0;
        if (n == "cls1") v = scheme.cls(0);
        else if (n == "cls2") v = scheme.cls(1);
        else if (n == "sr1") v = scheme.sr(0);
        else if (n == "sr2") v = scheme.sr(1);
        else if (n == "delta12") v = scheme.delta12();
        else if (n == "gamma12") v = scheme.gamma12();
        else if (n == "re_rabi1") v = scheme.rabi(0).real();
        else if (n == "im_rabi1") v = scheme.rabi(0).imag();
        else if (n == "re_rabi2") v = scheme.rabi(1).real();
        else if (n == "im_rabi2") v = scheme.rabi(1).imag();
        else if (n == "abs_r_el") v = std::abs(scheme.r_el);
        else if (n == "delta12_over_g1") v = scheme.delta12() / g1;
        else if (n == "gamma12_over_g1") v = scheme.gamma12() / g1;
        else if (n == "delta12_over_g2") v = scheme.delta12() / g2;
        else if (n == "gamma12_over_g2") v = scheme.gamma12() / g2;
        else if (n == "g2_over_g1") v = g2 / g1;
        else if (n == "g1_over_g2") v = g1 / g2;
        else {
            decomp();
            const auto& ev = dec.eigenvalues;
            if (n == "re_lambda1") v = cf.first.real();
            else if (n == "im_lambda1") v = cf.first.imag();
            else if (n == "re_lambda2") v = cf.second.real();
            else if (n == "im_lambda2") v = cf.second.imag();
            else if (n == "re_lambda_narrow") v = ev(0).real();
            else if (n == "im_lambda_narrow") v = ev(0).imag();
            else if (n == "re_lambda_broad") v = ev(ev.size() - 1).real();
            else if (n == "im_lambda_broad") v = ev(ev.size() - 1).imag();
            else if (n == "im_lambda_max") v = ev(ev.size() - 1).imag();
            else if (n == "scaled_weight1") v = w1;
            else if (n == "scaled_weight2") v = w2;
            else if (n == "scaled_weight_diff") v = w1 - w2;
        }
        if (!std::isfinite(v) || std::abs(v) > kObservableCap) {
            out.capped = true;
            v = std::isnan(v) ? kObservableCap : std::copysign(kObservableCap, v);
        }
        out.values.push_back(v);
    }
    return out;
}

}  // namespace nucav
