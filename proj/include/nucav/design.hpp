#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nucav/observables.hpp"
#include "nucav/optimize.hpp"
#include "nucav/spectra.hpp"

namespace nucav {

// Three-level EIT conditions for a two-layer scheme. The metastable layer plays
// |2>; with g_l = Gamma_SR,l + 1 the chain (g3/g2)^2 > |Omega_c|^2/g2^2 > g3/g2
// must hold, with Omega_c = Delta12 (or |Delta12 + i gamma12/2| when the
// incoherent coupling is included).
struct EITGoal {
    int metastable = 0;  // 1 or 2 (resonant-layer label); 0 picks the narrower layer
    double margin = 1.1;  // required factor between neighbouring terms of the chain
    double max_incoherent_ratio = 0.5;  // |gamma12 / Delta12|
    double min_rabi_suppression = 10.0;  // |Omega_probe|^2 / |Omega_metastable|^2
    bool include_incoherent = false;
    double max_dip_ratio = 0.1;  // transparency witness required of a designed cavity

    void validate() const;
};

struct EITReport {
    int metastable = 1;
    double g2 = 0.0;  // decay rate of the metastable state
    double g3 = 0.0;
    double outer = 0.0;  // (g3/g2)^2
    double middle = 0.0;  // |Omega_c|^2 / g2^2
    double inner = 0.0;  // g3/g2
    double middle_incoherent = 0.0;  // middle with |Delta12 + i gamma12/2|
    double rabi_suppression = 0.0;
    double incoherent_ratio = 0.0;
    bool chain_holds = false;  // strict inequalities, margins ignored
    bool margins_met = false;
    bool chain_holds_incoherent = false;
    bool incoherent_ok = false;
    bool probe_isolation = false;

    bool pass() const { return margins_met && incoherent_ok && probe_isolation; }
};

EITReport check_eit_conditions(const LevelScheme& scheme, const EITGoal& goal);

// Smooth search score (lower is better): squared log-hinge penalties on every
// condition plus small secondary terms for |gamma12/Delta12| and Rabi suppression.
double eit_penalty(const EITReport& report, const EITGoal& goal);

struct TransparencyWitness {
    FrequencyGrid grid;
    std::vector<cplx> chi;    // normalized so that max Im chi = 1
    double dip_ratio = 1.0;   // Im chi at the deepest interior minimum / peak
    double dip_detuning = 0.0;
    bool found = false;       // an interior minimum flanked by two maxima exists
};

TransparencyWitness transparency_witness(const LevelScheme& scheme, int probe_layer,
                                         double half_width = 40.0, std::size_t points = 4001);

// lambda_1 is the eigenvalue with the smaller real part.
struct SpectralGoal {
    double separation = 10.0;
    double alpha = 0.0;
    std::optional<double> shift;
    double w_separation = 2.0;
    double w_balance = 15.0;
    double w_resolution = 2.0;
    double w_width = 1.5;
    double w_background = 0.05;
    double w_shift = 4.0;

    void validate() const;
};

struct CostTerms {
    double separation = 0.0;
    double balance = 0.0;
    double resolution = 0.0;
    double width = 0.0;
    double background = 0.0;
    double shift = 0.0;

    double total() const { return separation + balance + resolution + width + background + shift; }
};

CostTerms spectral_cost_terms(const SpectrumDecomposition& decomp, cplx r_el,
                              const SpectralGoal& goal);
double spectral_cost(const SpectrumDecomposition& decomp, cplx r_el, const SpectralGoal& goal);

struct DipAnalysis {
    std::vector<double> positions;  // local minima of |r|^2, ascending detuning
    std::vector<double> depths;     // |r_el|^2 - |r|^2 at each minimum
    double separation = 0.0;        // between the two deepest minima (0 if fewer than two)
    double right_depth = 0.0;       // deeper-pair member at larger detuning
    double left_depth = 0.0;
};

DipAnalysis analyze_dips(const LevelScheme& scheme, double half_width = 100.0,
                         std::size_t points = 10001);

struct OptimizationResult {
    std::vector<double> params;
    CavityStack stack;
    IncidenceGeometry geom;
    ResonantLayerSet layers;
    LevelScheme scheme;
    std::vector<std::string> metric_names;
    std::vector<double> metrics;
    OptimizeOutcome search;
    bool feasible = true;
    std::string report;
};

OptimizationResult design_eit(const CavityParameterization& param, const EITGoal& goal,
                              const OptimizerOptions& options);

OptimizationResult design_spectrum(const CavityParameterization& param, const SpectralGoal& goal,
                                   const OptimizerOptions& options);

// Re-derives the metrics of a result from its stack; used for round-trip checks.
std::vector<double> rederive_metrics(const OptimizationResult& result, const EITGoal& goal);
std::vector<double> rederive_metrics(const OptimizationResult& result, const SpectralGoal& goal);

}  // namespace nucav
