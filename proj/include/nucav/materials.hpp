#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

namespace nucav {

using cplx = std::complex<double>;

// Refractive index n = 1 - delta + i*beta at a single photon energy.
struct Material {
    std::string name;
    double delta = 0.0;
    double beta = 0.0;

    cplx index() const { return {1.0 - delta, beta}; }
    cplx permittivity() const { return index() * index(); }
    // n^2 - 1 without cancellation.
    cplx susceptibility() const { return cplx{-delta, beta} * cplx{2.0 - delta, beta}; }
    void validate() const;
};

Material vacuum();

class MaterialTable {
public:
    MaterialTable() = default;

    // CSV with header name,energy_eV,delta,beta.
    static MaterialTable load_csv(const std::string& path);
    // Bundled table; NUCAV_MATERIALS overrides the path.
    static MaterialTable load_default();
    static std::string default_path();

    void add(const Material& m, double energy_eV);
    bool contains(const std::string& name) const;
    const Material& get(const std::string& name) const;
    std::vector<std::string> names() const;
    double energy_eV() const { return energy_eV_; }
    const std::string& source() const { return source_; }

private:
    std::map<std::string, Material> materials_;
    double energy_eV_ = 0.0;
    std::string source_;
};

}  // namespace nucav
