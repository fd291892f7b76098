#include "nucav/ensemble.hpp"

#include <cmath>
#include <set>

#include "nucav/errors.hpp"

namespace nucav {

namespace {
constexpr cplx I{0.0, 1.0};

bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

std::vector<double> strengths(const CavityStack& stack, const ResonantLayerSet& layers) {
    std::vector<double> s;
    for (std::size_t i = 0; i < layers.size(); ++i)
        s.push_back(layers.species[i].xi * stack.layers[layers.indices[i]].thickness);
    return s;
}

double reference_strength(const std::vector<double>& s) {
    for (double v : s)
        if (v > 0.0) return v;
    return 1.0;
}
}  // namespace

void NuclearSpecies::validate() const {
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) throw DomainError("gamma0 must be > 0");
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw DomainError("collective strength must be >= 0");
    if (!(transition_energy > 0.0)) throw DomainError("transition energy must be > 0");
    if (std::abs(std::abs(dipole_phase) - 1.0) > 1e-12)
        throw DomainError("dipole phase must have unit modulus");
}

double NuclearSpecies::collective_strength(double k, double density_nm3, double sigma0_nm2,
                                           double lamb_moessbauer) {
    return 0.5 * k * density_nm3 * sigma0_nm2 * lamb_moessbauer;
}

double NuclearSpecies::default_fe57_strength() {
    // Fully enriched alpha-iron: 84.9 nuclei/nm^3, sigma0 = 2.56e-18 cm^2, f = 0.8.
    const double k = IncidenceGeometry{}.k();
    return collective_strength(k, 84.9, 2.56e-4, 0.8);
}

ResonantLayerSet ResonantLayerSet::uniform(std::vector<std::size_t> indices,
                                           const NuclearSpecies& s) {
    ResonantLayerSet set;
    set.species.assign(indices.size(), s);
    set.indices = std::move(indices);
    return set;
}

std::vector<double> ResonantLayerSet::depths(const CavityStack& stack) const {
    std::vector<double> z;
    for (std::size_t i : indices) z.push_back(stack.layer_midpoint(i));
    return z;
}

void ResonantLayerSet::validate(const CavityStack& stack) const {
    if (indices.empty()) throw DomainError("no resonant layers given");
    if (species.size() != indices.size())
        throw DomainError("need exactly one species per resonant layer");
    std::set<std::size_t> seen;
    for (std::size_t i : indices) {
        if (i >= stack.layers.size())
            throw DomainError("resonant layer index " + std::to_string(i) + " out of range");
        if (!seen.insert(i).second) throw DomainError("resonant layer indices must be distinct");
    }
    for (std::size_t i = 1; i < indices.size(); ++i)
        if (!(indices[i] > indices[i - 1]))
            throw DomainError("resonant layers must be ordered by increasing depth");
    for (const auto& s : species) {
        s.validate();
        if (std::abs(s.gamma0 - species.front().gamma0) > 1e-12 * s.gamma0)
            throw DomainError("all resonant layers must share gamma0");
    }
}

void LevelScheme::validate() const {
    const Eigen::Index n = E.rows();
    if (E.cols() != n || rabi.size() != n || out_refl.size() != n || out_trans.size() != n)
        throw DomainError("level scheme dimensions are inconsistent");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            if (!finite(E(i, j))) throw NumericalError("level scheme has non-finite entries");
        if (!finite(rabi(i)) || !finite(out_refl(i)) || !finite(out_trans(i)))
            throw NumericalError("level scheme vectors have non-finite entries");
    }
}

LevelScheme level_scheme_from_solution(const StackSolution& sol, const CavityStack& stack,
                                       const ResonantLayerSet& layers) {
    layers.validate(stack);
    const std::size_t n = layers.size();
    const auto s = strengths(stack, layers);
    const double sref = reference_strength(s);
    LevelScheme ls;
    ls.depths = layers.depths(stack);
    ls.layer_indices = layers.indices;
    ls.gamma0 = layers.species.front().gamma0;
    ls.theta = 0.0;
    ls.E.resize(n, n);
    ls.rabi.resize(n);
    ls.out_refl.resize(n);
    ls.out_trans.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t m = l; m < n; ++m) {
            const cplx g = sol.green(ls.depths[l], ls.depths[m]);
            ls.E(l, m) = std::sqrt(s[l] * s[m]) * g;
            ls.E(m, l) = ls.E(l, m);
        }
        const cplx p = layers.species[l].dipole_phase;
        ls.rabi(l) = std::sqrt(s[l] / sref) * sol.field(ls.depths[l]) * std::conj(p);
        const double w = std::sqrt(s[l] * sref);
        ls.out_refl(l) = I * w * sol.green(0.0, ls.depths[l]) * p;
        ls.out_trans(l) = I * w * sol.green(sol.depth(), ls.depths[l]) * p;
    }
    ls.r_el = sol.r();
    ls.t_el = sol.t();
    return ls;
}

LevelScheme derive_level_scheme(const CavityStack& stack, const IncidenceGeometry& geom,
                                const ResonantLayerSet& layers) {
    geom.require_physical();
    const StackSolution sol(stack, geom);
    LevelScheme ls = level_scheme_from_solution(sol, stack, layers);
    ls.theta = geom.theta;
    ls.validate();
    return ls;
}

Eigen::MatrixXcd coupling_matrix(const CavityStack& stack, const IncidenceGeometry& geom,
                                 const ResonantLayerSet& layers) {
    return derive_level_scheme(stack, geom, layers).E;
}

Eigen::VectorXcd rabi_vector(const CavityStack& stack, const IncidenceGeometry& geom,
                             const ResonantLayerSet& layers) {
    return derive_level_scheme(stack, geom, layers).rabi;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> outcoupling_vectors(const CavityStack& stack,
                                                                  const IncidenceGeometry& geom,
                                                                  const ResonantLayerSet& layers) {
    const LevelScheme ls = derive_level_scheme(stack, geom, layers);
    return {ls.out_refl, ls.out_trans};
}

std::vector<cplx> semiclassical_reflectance(const CavityStack& stack,
                                            const IncidenceGeometry& geom,
                                            const std::vector<double>& detunings,
                                            const ResonantLayerSet& layers) {
    geom.require_physical();
    stack.validate();
    layers.validate(stack);
    std::vector<cplx> base;
    std::vector<double> thickness;
    base.push_back(stack.top.susceptibility());
    for (const auto& l : stack.layers) {
        base.push_back(l.material.susceptibility());
        thickness.push_back(l.thickness);
    }
    base.push_back(stack.bottom.susceptibility());
    const double k = geom.k();
    std::vector<cplx> out;
    out.reserve(detunings.size());
    for (double d : detunings) {
        if (!std::isfinite(d)) throw DomainError("detuning must be finite");
        auto eps = base;
        for (std::size_t i = 0; i < layers.size(); ++i)
            eps[layers.indices[i] + 1] += -(layers.species[i].xi / (k * k)) / cplx{d, 0.5};
        const cplx r = StackSolution(std::move(eps), thickness, geom.theta, geom.photon_energy).r();
        if (!finite(r)) throw NumericalError("semiclassical reflectance overflowed");
        out.push_back(r);
    }
    return out;
}

}  // namespace nucav
