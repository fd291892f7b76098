#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nucav/ensemble.hpp"
#include "nucav/materials.hpp"
#include "nucav/stack.hpp"

namespace nucav::test {

inline const MaterialTable& materials() {
    static const MaterialTable table = MaterialTable::load_csv(std::string(NUCAV_DATA_DIR) + "/materials.csv");
    return table;
}

inline CavityStack make_stack(const std::vector<std::pair<std::string, double>>& layers,
                              const std::string& bottom = "vacuum") {
    CavityStack s;
    for (const auto& [name, d] : layers) s.layers.push_back({materials().get(name), d});
    s.bottom = materials().get(bottom);
    return s;
}

// Pt/C cavity with two resonant layers and an Fe-56 spacer; (b) is its mirror image.
inline CavityStack cavity_a() {
    return make_stack({{"Pt", 2.0}, {"C", 13}, {"Fe57", 0.57}, {"C", 8.0}, {"Fe57", 0.57},
                       {"C", 8.0}, {"Fe56", 0.57}, {"C", 13}, {"Pt", 2.0}});
}
inline CavityStack cavity_b() { return cavity_a().mirrored(); }
inline ResonantLayerSet cavity_a_layers() { return ResonantLayerSet::uniform({2, 4}, NuclearSpecies{}); }
inline ResonantLayerSet cavity_b_layers() { return ResonantLayerSet::uniform({4, 6}, NuclearSpecies{}); }
inline constexpr double kTheta3 = 3.39;

inline CavityStack eit_cavity() {
    return make_stack({{"Pd", 1.5}, {"B4C", 49.8}, {"Fe57", 0.57}, {"B4C", 97.1}, {"Fe57", 0.57},
                       {"B4C", 35.4}, {"Pd", 43.7}},
                      "Si");
}
inline CavityStack leaky_cavity() {
    return make_stack({{"Pd", 3.0}, {"B4C", 42.5}, {"Fe57", 0.57}, {"B4C", 143.4}, {"Fe57", 0.57},
                       {"B4C", 72.9}, {"Pd", 43.4}},
                      "Si");
}
inline CavityStack pole_cavity() {
    return make_stack({{"Pd", 105.1}, {"B4C", 27.7}, {"Fe57", 0.57}, {"B4C", 23.8}, {"Fe57", 0.57},
                       {"B4C", 28.8}, {"Pd", 12.5}},
                      "Si");
}
inline ResonantLayerSet two_layer() { return ResonantLayerSet::uniform({2, 4}, NuclearSpecies{}); }

// Resonant sets are ordered by depth, so level l of a mirrored cavity is level
// L-1-l of the original; this reverses the labels of a scheme.
inline LevelScheme reverse_levels(LevelScheme s) {
    s.E = s.E.reverse().eval();
    s.rabi = s.rabi.reverse().eval();
    s.out_refl = s.out_refl.reverse().eval();
    s.out_trans = s.out_trans.reverse().eval();
    std::reverse(s.depths.begin(), s.depths.end());
    std::reverse(s.layer_indices.begin(), s.layer_indices.end());
    return s;
}

// Random stack of 1-6 layers drawn from the table, optionally lossless.
inline CavityStack random_stack(std::mt19937_64& rng, bool lossless, bool same_halfspaces) {
    static const std::vector<std::string> names = {"Pt", "Pd", "C", "B4C", "Si", "Fe56", "Fe57"};
    std::uniform_int_distribution<int> count(1, 6), pick(0, static_cast<int>(names.size()) - 1);
    std::uniform_real_distribution<double> thick(0.0, 40.0);
    CavityStack s;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        Material m = materials().get(names[static_cast<std::size_t>(pick(rng))]);
        if (lossless) m.beta = 0.0;
        s.layers.push_back({m, thick(rng)});
    }
    if (!same_halfspaces) {
        Material b = materials().get("Si");
        if (lossless) b.beta = 0.0;
        s.bottom = b;
    }
    return s;
}

// Random stack with two 0.57 nm Fe-57 layers inserted at random positions.
inline std::pair<CavityStack, ResonantLayerSet> random_cavity(std::mt19937_64& rng) {
    CavityStack s = random_stack(rng, false, rng() % 2 == 0);
    for (auto& l : s.layers)
        if (l.material.name == "Fe57") l.material = materials().get("Fe56");
    for (int k = 0; k < 2; ++k) {
        std::uniform_int_distribution<std::size_t> at(0, s.layers.size());
        s.layers.insert(s.layers.begin() + static_cast<long>(at(rng)), {materials().get("Fe57"), 0.57});
    }
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.layers.size(); ++i)
        if (s.layers[i].material.name == "Fe57") idx.push_back(i);
    return {s, ResonantLayerSet::uniform(idx, NuclearSpecies{})};
}

// Closed-form single-interface amplitude reflectance, s polarization.
inline std::complex<double> fresnel_r(std::complex<double> n1, std::complex<double> n2, double theta,
                                      double k) {
    const std::complex<double> c = std::cos(theta);
    const auto k1 = k * std::sqrt(n1 * n1 - c * c);
    const auto k2 = k * std::sqrt(n2 * n2 - c * c);
    return (k1 - k2) / (k1 + k2);
}

// Green's function of (d^2/dz^2 + kz(z)^2) G = -delta(z - zs) for a stack, by
// solving the dense interface-matching system directly. Media are the top
// half-space, each layer and the bottom half-space; the source splits its medium.
inline std::complex<double> brute_force_green(const CavityStack& stack, double theta, double k,
                                              double z, double zs) {
    using C = std::complex<double>;
    const C sn = std::sin(theta);
    std::vector<C> kz;
    std::vector<double> tops;  // top depth of each medium; top half-space uses 0
    auto kz_of = [&](const Material& m) {
        C v = std::sqrt(k * k * (m.susceptibility() + sn * sn));
        if (v.imag() < 0.0) v = -v;
        return v;
    };
    kz.push_back(kz_of(stack.top));
    tops.push_back(0.0);
    double acc = 0.0;
    for (const auto& l : stack.layers) {
        kz.push_back(kz_of(l.material));
        tops.push_back(acc);
        acc += l.thickness;
    }
    kz.push_back(kz_of(stack.bottom));
    tops.push_back(acc);

    // Interfaces: physical ones at each layer boundary, plus the source plane.
    struct Piece {
        C kz;
        double top;
    };
    std::vector<Piece> pieces;
    std::vector<double> iface;
    std::size_t src_iface = 0;
    bool inserted = false;
    for (std::size_t m = 0; m < kz.size(); ++m) {
        const double top = tops[m];
        const double bot = m + 1 < kz.size() ? tops[m + 1] : 1e300;
        if (m > 0) iface.push_back(top);
        pieces.push_back({kz[m], m == 0 ? 0.0 : top});
        if (!inserted && zs > (m == 0 ? -1e300 : top) && zs < bot) {
            src_iface = iface.size();
            iface.push_back(zs);
            pieces.push_back({kz[m], zs});
            inserted = true;
        } else if (!inserted && zs == bot && m + 1 < kz.size()) {
            // Source exactly on an interface: place it just above.
            src_iface = iface.size();
            iface.push_back(zs);
            pieces.push_back({kz[m], zs});
            inserted = true;
        }
    }
    // Sort pieces and interfaces by depth (source insertion keeps order already).
    const std::size_t P = pieces.size();
    const std::size_t N = 2 * P;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(N));
    // Unknowns: a_p, b_p with u_p(z) = a e^{i kz (z - ref_p)} + b e^{-i kz (z - ref_p)}.
    auto ref = [&](std::size_t p) { return pieces[p].top; };
    auto ia = [](std::size_t p) { return static_cast<Eigen::Index>(2 * p); };
    auto ib = [](std::size_t p) { return static_cast<Eigen::Index>(2 * p + 1); };
    Eigen::Index row = 0;
    A(row, ia(0)) = 1.0;  // nothing incident from above
    ++row;
    A(row, ib(P - 1)) = 1.0;  // nothing incident from below
    ++row;
    for (std::size_t j = 0; j < iface.size(); ++j) {
        const double zi = iface[j];
        const std::size_t up = j, dn = j + 1;
        const C ku = pieces[up].kz, kd = pieces[dn].kz;
        const C eu = std::exp(C(0, 1) * ku * (zi - ref(up))), ed = std::exp(C(0, 1) * kd * (zi - ref(dn)));
        // continuity of u
        A(row, ia(up)) = eu;
        A(row, ib(up)) = 1.0 / eu;
        A(row, ia(dn)) = -ed;
        A(row, ib(dn)) = -1.0 / ed;
        ++row;
        // derivative: u'(dn) - u'(up) = -1 at the source, 0 elsewhere
        A(row, ia(up)) = -C(0, 1) * ku * eu;
        A(row, ib(up)) = C(0, 1) * ku / eu;
        A(row, ia(dn)) = C(0, 1) * kd * ed;
        A(row, ib(dn)) = -C(0, 1) * kd / ed;
        rhs(row) = j == src_iface ? -1.0 : 0.0;
        ++row;
    }
    const Eigen::VectorXcd x = A.fullPivLu().solve(rhs);
    // Piece containing z.
    std::size_t p = 0;
    while (p + 1 < P && z > pieces[p + 1].top) ++p;
    if (p + 1 < P && z == pieces[p + 1].top) ++p;
    return x(ia(p)) * std::exp(C(0, 1) * pieces[p].kz * (z - ref(p))) +
           x(ib(p)) * std::exp(-C(0, 1) * pieces[p].kz * (z - ref(p)));
}

}  // namespace nucav::test
