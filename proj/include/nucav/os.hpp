#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nucav/hull.hpp"
#include "nucav/observables.hpp"

namespace nucav {

struct OSSample {
    std::vector<double> params;
    std::vector<double> observables;
    bool evaluated = true;  // false when the forward model threw
    bool capped = false;
    bool degenerate = false;
    bool boundary = false;  // best point of a boundary push
};

struct OSOptions {
    std::size_t budget = 2000;
    std::uint64_t seed = 1;
    double interior_fraction = 0.5;
    std::size_t directions = 0;  // 0: 2*dim(observables) axis pushes plus random ones
};

struct ObservableSpace {
    std::vector<std::string> param_names;
    std::vector<std::string> observable_names;
    std::vector<OSSample> samples;

    std::size_t observable_index(const std::string& name) const;
};

// Sobol interior sampling followed by boundary pushes: each push maximizes a
// linear functional of the (range-normalized) observable vector with
// Nelder-Mead, started from the interior sample that scores best on it.
// Every evaluation is kept as a sample. Bitwise reproducible for a fixed seed.
ObservableSpace sample_os(const CavityParameterization& param,
                          const std::vector<std::string>& observables, const OSOptions& options);

struct OSSlice {
    double lo = 0.0;
    double hi = 0.0;
    Boundary2D outline;
};

struct OSBoundary {
    std::vector<std::string> axes;
    Boundary2D outline;            // two axes
    std::vector<OSSlice> slices;   // three axes: outlines of the first two per slab of the third
    bool degenerate = false;
};

OSBoundary os_boundary(const ObservableSpace& space, const std::vector<std::string>& axes,
                       std::size_t slabs = 8);

// Observable vectors along an angle sweep (angles in mrad).
std::vector<std::vector<double>> angle_trajectory(const CavityStack& stack,
                                                  const ResonantLayerSet& layers,
                                                  const std::vector<std::string>& observables,
                                                  const std::vector<double>& theta_mrad,
                                                  double photon_energy = kFe57Energy_eV);

}  // namespace nucav
