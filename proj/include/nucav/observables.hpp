#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nucav/optimize.hpp"
#include "nucav/spectra.hpp"

namespace nucav {

inline constexpr double kObservableCap = 1e4;

struct FreeParameter {
    enum class Kind { Thickness, Angle };
    Kind kind = Kind::Thickness;
    std::size_t layer = 0;  // for thicknesses
    double lo = 0.0;        // nm or mrad
    double hi = 0.0;
    std::string name;
};

// Template stack with free thicknesses and/or angle. max_top_cladding (nm)
// bounds the thickness of layer 0.
struct CavityParameterization {
    CavityStack base;
    ResonantLayerSet layers;
    double theta_mrad = 3.0;  // used when the angle is not free
    double photon_energy = kFe57Energy_eV;
    std::vector<FreeParameter> params;
    std::optional<double> max_top_cladding;

    void validate() const;
    std::size_t dim() const { return params.size(); }
    Box bounds() const;  // after constraints
    std::pair<CavityStack, IncidenceGeometry> build(const std::vector<double>& x) const;
    LevelScheme scheme(const std::vector<double>& x) const;

    // cladding / B4C / Fe57 / B4C / Fe57 / B4C / cladding on Si, Fe layers 0.57 nm;
    // free: the five non-resonant thicknesses and the angle.
    static CavityParameterization two_layer_family(const MaterialTable& materials,
                                                   const std::string& cladding = "Pd");
};

struct ObservableValues {
    std::vector<double> values;
    bool capped = false;
    bool degenerate = false;  // eigen decomposition near an exceptional point
};

// Named scalar functionals of a level scheme (units of gamma0):
//   cls1 cls2 sr1 sr2 delta12 gamma12
//   re_rabi1 im_rabi1 re_rabi2 im_rabi2
//   re_lambda1 im_lambda1 re_lambda2 im_lambda2   (closed-form labels, 2x2 only)
//   re_lambda_narrow im_lambda_narrow re_lambda_broad im_lambda_broad im_lambda_max
//   scaled_weight1 scaled_weight2 scaled_weight_diff   (closed-form labels)
//   delta12_over_g1 gamma12_over_g1 delta12_over_g2 gamma12_over_g2 g2_over_g1 g1_over_g2
//   abs_r_el
// with g_l = Gamma_SR,l + 1. Values beyond kObservableCap are clipped and flagged.
const std::vector<std::string>& observable_names();
void validate_observables(const std::vector<std::string>& names);
ObservableValues evaluate_observables(const LevelScheme& scheme,
                                      const std::vector<std::string>& names);

}  // namespace nucav
