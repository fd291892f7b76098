#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nucav/stratified.hpp"

namespace nucav {

// Collective strength xi (nm^-2) multiplies layer thickness and the Green's
// function to give level-scheme entries in units of gamma0:
//   E_ll' = sqrt(xi_l d_l xi_l' d_l') G(z_l, z_l').
// For a resonant medium of nuclear density n, resonant cross section sigma0
// and Lamb-Moessbauer factor f: xi = k n sigma0 f / 2.
struct NuclearSpecies {
    std::string name = "Fe57";
    double transition_energy = kFe57Energy_eV;  // eV
    double gamma0 = 4.66e-9;                    // eV
    double xi = default_fe57_strength();        // nm^-2, 0 switches the layer off
    cplx dipole_phase{1.0, 0.0};

    void validate() const;
    static double collective_strength(double k, double density_nm3, double sigma0_nm2,
                                      double lamb_moessbauer);
    static double default_fe57_strength();
};

struct ResonantLayerSet {
    std::vector<std::size_t> indices;       // into CavityStack::layers, top to bottom
    std::vector<NuclearSpecies> species;    // one per index

    static ResonantLayerSet uniform(std::vector<std::size_t> indices, const NuclearSpecies& s);
    std::size_t size() const { return indices.size(); }
    std::vector<double> depths(const CavityStack& stack) const;
    void validate(const CavityStack& stack) const;
};

// Level scheme in units of gamma0. Diagonal entries are -Delta_CLS + i Gamma_SR / 2,
// off-diagonal entries Delta_ll' + i gamma_ll' / 2.
//
// Rabi and outcoupling vectors follow the incident-field normalisation: with
// s_l = xi_l d_l and s_ref the first nonzero s_l,
//   rabi_l      = sqrt(s_l / s_ref) E_in(z_l) conj(p)
//   out_refl_l  = i sqrt(s_l s_ref) G(0, z_l) p
//   out_trans_l = i sqrt(s_l s_ref) G(D, z_l) p
// so that r = r_el - out_refl . Mt^{-1} rabi with Mt = i (delta + i/2 + E).
struct LevelScheme {
    Eigen::MatrixXcd E;
    Eigen::VectorXcd rabi;
    Eigen::VectorXcd out_refl;
    Eigen::VectorXcd out_trans;
    cplx r_el;
    cplx t_el;
    double gamma0 = 4.66e-9;
    cplx theta;
    std::vector<double> depths;
    std::vector<std::size_t> layer_indices;

    std::size_t size() const { return static_cast<std::size_t>(E.rows()); }
    double cls(std::size_t l) const { return -E(l, l).real(); }
    double sr(std::size_t l) const { return 2.0 * E(l, l).imag(); }
    double delta(std::size_t l, std::size_t m) const { return E(l, m).real(); }
    double gamma(std::size_t l, std::size_t m) const { return 2.0 * E(l, m).imag(); }
    double delta12() const { return delta(0, 1); }
    double gamma12() const { return gamma(0, 1); }
    void validate() const;
};

Eigen::MatrixXcd coupling_matrix(const CavityStack& stack, const IncidenceGeometry& geom,
                                 const ResonantLayerSet& layers);
Eigen::VectorXcd rabi_vector(const CavityStack& stack, const IncidenceGeometry& geom,
                             const ResonantLayerSet& layers);
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> outcoupling_vectors(const CavityStack& stack,
                                                                  const IncidenceGeometry& geom,
                                                                  const ResonantLayerSet& layers);
LevelScheme derive_level_scheme(const CavityStack& stack, const IncidenceGeometry& geom,
                                const ResonantLayerSet& layers);

// Same assembly without the physical-angle check; used for complex angles.
LevelScheme level_scheme_from_solution(const StackSolution& sol, const CavityStack& stack,
                                       const ResonantLayerSet& layers);

// Reflection spectrum from the resonant-index picture: each resonant layer gets
// chi(delta) = -(xi / k^2) / (delta + i/2) added to n^2 - 1, and the stack is
// re-solved at every detuning (units of gamma0).
std::vector<cplx> semiclassical_reflectance(const CavityStack& stack,
                                            const IncidenceGeometry& geom,
                                            const std::vector<double>& detunings,
                                            const ResonantLayerSet& layers);

}  // namespace nucav
