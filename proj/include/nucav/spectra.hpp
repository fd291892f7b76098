#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nucav/ensemble.hpp"

namespace nucav {

inline constexpr double kDegeneracyThreshold = 1e8;

// Detunings (omega - omega_nuc) / gamma0.
struct FrequencyGrid {
    std::vector<double> detunings;

    static FrequencyGrid linspace(double lo, double hi, std::size_t n);
    void validate() const;
};

// Mt = i (delta + i/2 + E), all in units of gamma0.
Eigen::MatrixXcd response_matrix(const LevelScheme& scheme, double detuning);

std::vector<cplx> reflectance(const LevelScheme& scheme, const FrequencyGrid& grid);
std::vector<cplx> transmittance(const LevelScheme& scheme, const FrequencyGrid& grid);

// r(delta) = r_el + sum_l i g_l / (delta + i/2 + lambda_l), likewise for t.
// Modes are ordered by increasing Im(lambda).
struct SpectrumDecomposition {
    cplx r_el;
    cplx t_el;
    Eigen::VectorXcd eigenvalues;
    Eigen::VectorXcd weights_r;
    Eigen::VectorXcd weights_t;
    Eigen::MatrixXcd S;
    Eigen::MatrixXcd S_inv;
    double condition_number = 1.0;

    bool degenerate() const { return !(condition_number < kDegeneracyThreshold); }
    cplx reflectance(double detuning) const;
    cplx transmittance(double detuning) const;
    cplx reflectance_derivative(double detuning) const;
};

SpectrumDecomposition eigen_decompose(const LevelScheme& scheme);

// lambda_{1,2} = (E1 + E2)/2 -/+ sqrt((E1 - E2)^2 + 4 E12^2)/2 with the principal root.
std::pair<cplx, cplx> closed_form_eigenvalues_2x2(const Eigen::MatrixXcd& E);

// Labels eigenvalues along a parameter path so that each label follows the
// eigenvector with maximal overlap at the previous point. Row p holds the
// labelled eigenvalues at path point p.
std::vector<std::vector<cplx>> track_eigenvalues(const std::vector<Eigen::MatrixXcd>& path);

// Relabels the closed-form pair along a path: the labels are exchanged wherever
// the principal square root crosses its branch cut.
std::vector<std::pair<cplx, cplx>> track_closed_form_2x2(const std::vector<Eigen::MatrixXcd>& path);

// |g_l| / (Im lambda_l + 1/2).
Eigen::VectorXd scaled_weights(const SpectrumDecomposition& decomp);

// chi proportional to -i (Mt^{-1})_pp, scaled so that max Im chi over the grid is 1.
std::vector<cplx> susceptibility(const LevelScheme& scheme, const FrequencyGrid& grid,
                                 std::size_t probe_layer);

// Delta-kick response of the linear equations of motion dh/dt = (-1/2 + iE) h,
// h(0) = rabi, time in 1/gamma0. Classical RK4 with a fixed step.
struct TimeDomainResult {
    std::vector<double> times;
    Eigen::MatrixXcd amplitudes;  // L x T
};

TimeDomainResult time_domain_oracle(const LevelScheme& scheme, const std::vector<double>& t_grid,
                                    double max_step = 2e-3);

// int_0^inf e^{i delta t} h(t) dt, obtained by integrating the Fourier
// integrals alongside the equations of motion. Equals -Mt^{-1} rabi.
Eigen::MatrixXcd time_domain_spectrum(const LevelScheme& scheme,
                                      const std::vector<double>& detunings,
                                      double tolerance = 1e-13);

}  // namespace nucav
