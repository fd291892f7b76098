#include "nucav/stack.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "nucav/errors.hpp"

namespace nucav {

void CavityStack::validate() const {
    if (layers.empty()) throw DomainError("stack needs at least one layer");
    top.validate();
    bottom.validate();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].material.validate();
        const double d = layers[i].thickness;
        if (!std::isfinite(d) || d < 0.0)
            throw DomainError("layer " + std::to_string(i) + ": thickness must be finite and >= 0");
    }
}

double CavityStack::total_thickness() const {
    double d = 0.0;
    for (const auto& l : layers) d += l.thickness;
    return d;
}

double CavityStack::layer_top(std::size_t i) const {
    double z = 0.0;
    for (std::size_t j = 0; j < i; ++j) z += layers.at(j).thickness;
    return z;
}

double CavityStack::layer_midpoint(std::size_t i) const {
    return layer_top(i) + 0.5 * layers.at(i).thickness;
}

CavityStack CavityStack::mirrored() const {
    CavityStack m;
    m.top = bottom;
    m.bottom = top;
    m.layers.assign(layers.rbegin(), layers.rend());
    return m;
}

std::string CavityStack::describe() const {
    std::ostringstream os;
    os << top.name << " | ";
    for (std::size_t i = 0; i < layers.size(); ++i)
        os << (i ? " / " : "") << layers[i].material.name << "(" << layers[i].thickness << ")";
    os << " | " << bottom.name;
    return os.str();
}

double IncidenceGeometry::k() const { return 2.0 * std::numbers::pi * photon_energy / kHc_eVnm; }

cplx IncidenceGeometry::k_par() const { return k() * std::cos(theta); }

bool IncidenceGeometry::physical() const {
    return theta.imag() == 0.0 && theta.real() > 0.0 && theta.real() < 0.1 &&
           std::isfinite(photon_energy) && photon_energy > 0.0;
}

void IncidenceGeometry::require_physical() const {
    if (!physical())
        throw DomainError("incidence angle must be real and in (0, 0.1) rad, photon energy > 0");
}

}  // namespace nucav
