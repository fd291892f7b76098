#pragma once

#include <complex>
#include <vector>

#include "nucav/stack.hpp"

namespace nucav {

// Normal wavevector component with the branch cut of k_z^2 placed on the
// negative imaginary axis. Agrees with the principal root for every passive
// medium at real angles and continues analytically into Im(theta) < 0.
cplx normal_wavenumber(cplx kz_squared);

// Wave state at one depth: down-going amplitude A, and the reflection
// coefficients looking down (rho) and looking up (sigma), both referred to z.
struct LocalWave {
    std::size_t medium = 0;  // 0 = top half-space, layers 1..N, N+1 = bottom
    cplx kz;
    cplx log_amplitude;      // log A(z), relative to unit incidence at z = 0
    cplx rho;
    cplx sigma;
};

// Layer-local Parratt solution for one angle. Builds the down-looking and
// up-looking reflection recursions plus log-domain down amplitudes, so deep
// evanescent stacks never overflow.
//
// Green's function convention: G solves (d^2/dz^2 + k_z(z)^2) G = -delta(z - z')
// with outgoing conditions, so a homogeneous medium gives G = i e^{i k_z |z - z'|} / (2 k_z).
class StackSolution {
public:
    StackSolution(const CavityStack& stack, const IncidenceGeometry& geom);
    // Raw media: susceptibilities (n^2 - 1) of top, layers..., bottom, and the
    // thicknesses of the finite layers.
    StackSolution(std::vector<cplx> susceptibility, std::vector<double> thickness, cplx theta,
                  double photon_energy);

    cplx r() const { return r_; }
    cplx t() const;
    double depth() const { return depth_; }
    double k() const { return k_; }
    cplx kz(std::size_t medium) const { return kz_[medium]; }
    std::size_t media() const { return kz_.size(); }

    std::size_t medium_at(double z) const;
    LocalWave local(double z) const;
    cplx field(double z) const;
    cplx green(double z, double z_prime) const;

private:
    void solve();
    cplx relative_log_amplitude(std::size_t medium, double z) const;

    std::vector<cplx> eps_;    // n^2 - 1 per medium
    std::vector<double> d_;    // per medium; zero for half-spaces
    std::vector<double> top_;  // top depth per medium
    std::vector<cplx> kz_;
    std::vector<cplx> rho_bottom_, rho_top_;
    std::vector<cplx> sigma_top_, sigma_bottom_;
    std::vector<cplx> log_a_top_;
    cplx log_entry_;
    cplx theta_;
    double k_ = 0.0;
    double depth_ = 0.0;
    cplx r_;
};

struct Coefficients {
    cplx r;
    cplx t;
};

Coefficients parratt_coefficients(const CavityStack& stack, const IncidenceGeometry& geom);
cplx field_at_depth(const CavityStack& stack, const IncidenceGeometry& geom, double z);
cplx greens_function(const CavityStack& stack, const IncidenceGeometry& geom, double z,
                     double z_prime);
std::vector<double> rocking_curve(const CavityStack& stack, const std::vector<double>& theta_rad,
                                  double photon_energy = kFe57Energy_eV);

}  // namespace nucav
