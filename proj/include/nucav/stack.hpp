#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "nucav/materials.hpp"

namespace nucav {

inline constexpr double kHc_eVnm = 1239.841984;
inline constexpr double kFe57Energy_eV = 14412.5;

struct Layer {
    Material material;
    double thickness = 0.0;  // nm
};

// Depth z = 0 at the top surface, increasing downward.
struct CavityStack {
    Material top = vacuum();
    std::vector<Layer> layers;
    Material bottom = vacuum();

    void validate() const;
    double total_thickness() const;
    double layer_top(std::size_t i) const;
    double layer_midpoint(std::size_t i) const;
    // Reverses the layer order and swaps the half-spaces.
    CavityStack mirrored() const;
    std::string describe() const;
};

struct IncidenceGeometry {
    cplx theta{0.0, 0.0};  // rad
    double photon_energy = kFe57Energy_eV;  // eV

    static IncidenceGeometry at_mrad(double theta_mrad, double energy = kFe57Energy_eV) {
        return {cplx{theta_mrad * 1e-3, 0.0}, energy};
    }
    double k() const;  // nm^-1
    cplx k_par() const;
    bool physical() const;
    // Throws DomainError unless the angle is real and inside (0, 0.1) rad.
    void require_physical() const;
};

}  // namespace nucav
