#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nucav/ensemble.hpp"

namespace nucav {

using AngleFunction = std::function<cplx(cplx theta)>;

// Rectangle in the complex angle plane (rad).
struct PoleWindow {
    double re_min = 1e-3;
    double re_max = 6e-3;
    double im_min = -1e-3;
    double im_max = 0.0;
    std::size_t n_re = 2000;
    std::size_t n_im = 24;

    void validate() const;
    // Rows are graded geometrically toward im_max, where high-Q poles sit.
    std::vector<double> im_rows() const;
    bool contains(cplx theta) const;
};

struct PoleCandidate {
    cplx start;
    cplx theta;
    bool converged = false;
    int iterations = 0;
};

struct PoleSet {
    PoleWindow window;
    std::vector<cplx> poles;                  // sorted by real part
    std::vector<std::string> observables;
    std::vector<cplx> constants;              // observable at theta = 0
    std::vector<std::vector<cplx>> residues;  // [observable][pole]
    std::vector<PoleCandidate> failed;        // candidates whose polishing did not converge
};

// Level-scheme entry E(i, j) as an analytic function of the complex angle.
AngleFunction level_scheme_entry(const CavityStack& stack, const ResonantLayerSet& layers,
                                 std::size_t i, std::size_t j,
                                 double photon_energy = kFe57Energy_eV);

// Observable names: "coupling12" = E(0,1), "level1" = E(0,0), "level2" = E(1,1).
// On the real axis |E_ll| = |Delta_CLS,l + i Gamma_SR,l / 2|.
AngleFunction named_observable(const CavityStack& stack, const ResonantLayerSet& layers,
                               const std::string& name, double photon_energy = kFe57Energy_eV);

// Grid scan of |f| for local maxima, then Newton iteration on 1/f.
std::vector<PoleCandidate> locate_poles(const AngleFunction& f, const PoleWindow& window);
// Newton iteration on 1/f from one starting angle.
PoleCandidate polish_pole(const AngleFunction& f, cplx start, double max_step = 1e-4);

struct ResidueEstimate {
    cplx value;
    double radius = 0.0;
    bool converged = false;
};

// Trapezoidal contour quadrature on circles of shrinking radius until two
// successive estimates agree to rel_tol.
ResidueEstimate contour_residue(const AngleFunction& f, cplx pole, double initial_radius,
                                double rel_tol = 1e-8);
// Least-squares fit of a truncated Laurent series on scattered points near the pole.
cplx laurent_residue(const AngleFunction& f, cplx pole, double radius);

// Poles of the first observable; residues for every observable.
PoleSet find_poles(const CavityStack& stack, const ResonantLayerSet& layers,
                   const PoleWindow& window,
                   const std::vector<std::string>& observables = {"coupling12", "level1", "level2"},
                   double photon_energy = kFe57Energy_eV);

// Residues and theta = 0 constants of an arbitrary function at known poles.
void attach_observable(PoleSet& set, const std::string& name, const AngleFunction& f);

// f(0) + sum_poles Res (1/theta0 + 1/(theta - theta0)).
cplx mittag_leffler_approx(const PoleSet& set, std::size_t observable, cplx theta);
cplx single_mode_approx(cplx constant, cplx residue, cplx pole, cplx theta);

struct CircleFit {
    cplx center;
    double radius = 0.0;
    double residual = 0.0;  // RMS radial deviation
    bool flagged = false;   // residual above flag_ratio * radius
};

CircleFit single_mode_circle_fit(const std::vector<cplx>& trajectory, double flag_ratio = 0.05);

}  // namespace nucav
