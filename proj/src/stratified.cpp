#include "nucav/stratified.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nucav/errors.hpp"

namespace nucav {

namespace {
constexpr cplx I{0.0, 1.0};

}  // namespace

cplx normal_wavenumber(cplx kz_squared) {
    const cplx s = std::sqrt(kz_squared);
    return std::arg(kz_squared) <= -0.5 * std::numbers::pi ? -s : s;
}

StackSolution::StackSolution(const CavityStack& stack, const IncidenceGeometry& geom) {
    stack.validate();
    eps_.push_back(stack.top.susceptibility());
    d_.push_back(0.0);
    for (const auto& l : stack.layers) {
        eps_.push_back(l.material.susceptibility());
        d_.push_back(l.thickness);
    }
    eps_.push_back(stack.bottom.susceptibility());
    d_.push_back(0.0);
    theta_ = geom.theta;
    k_ = geom.k();
    solve();
}

StackSolution::StackSolution(std::vector<cplx> susceptibility, std::vector<double> thickness,
                             cplx theta, double photon_energy)
    : eps_(std::move(susceptibility)), theta_(theta) {
    if (eps_.size() != thickness.size() + 2)
        throw DomainError("need one susceptibility per layer plus two half-spaces");
    d_.push_back(0.0);
    for (double t : thickness) {
        if (!std::isfinite(t) || t < 0.0) throw DomainError("layer thickness must be >= 0");
        d_.push_back(t);
    }
    d_.push_back(0.0);
    k_ = IncidenceGeometry{theta, photon_energy}.k();
    solve();
}

void StackSolution::solve() {
    const std::size_t m = eps_.size();
    const cplx s = std::sin(theta_);
    kz_.resize(m);
    for (std::size_t j = 0; j < m; ++j) kz_[j] = normal_wavenumber(k_ * k_ * (eps_[j] + s * s));

    top_.assign(m, 0.0);
    for (std::size_t j = 2; j < m; ++j) top_[j] = top_[j - 1] + d_[j - 1];
    depth_ = top_[m - 1];

    rho_bottom_.assign(m, 0.0);
    rho_top_.assign(m, 0.0);
    for (std::size_t n = m - 1; n-- > 0;) {
        const cplx r = (kz_[n] - kz_[n + 1]) / (kz_[n] + kz_[n + 1]);
        rho_bottom_[n] = (r + rho_top_[n + 1]) / (1.0 + r * rho_top_[n + 1]);
        rho_top_[n] = n > 0 ? rho_bottom_[n] * std::exp(2.0 * I * kz_[n] * d_[n]) : rho_bottom_[n];
    }
    r_ = rho_bottom_[0];

    sigma_top_.assign(m, 0.0);
    sigma_bottom_.assign(m, 0.0);
    for (std::size_t n = 1; n < m; ++n) {
        const cplx r = (kz_[n] - kz_[n - 1]) / (kz_[n] + kz_[n - 1]);
        sigma_top_[n] = (r + sigma_bottom_[n - 1]) / (1.0 + r * sigma_bottom_[n - 1]);
        sigma_bottom_[n] =
            n + 1 < m ? sigma_top_[n] * std::exp(2.0 * I * kz_[n] * d_[n]) : sigma_top_[n];
    }

    // Down amplitudes in log form, relative to the top of medium 1; the entry
    // factor into medium 1 is kept apart so it may vanish (theta = 0).
    log_a_top_.assign(m, 0.0);
    {
        const cplx r = (kz_[0] - kz_[1]) / (kz_[0] + kz_[1]);
        log_entry_ = std::log((1.0 + r) / (1.0 + r * rho_top_[1]));
    }
    for (std::size_t n = 1; n + 1 < m; ++n) {
        const cplx r = (kz_[n] - kz_[n + 1]) / (kz_[n] + kz_[n + 1]);
        log_a_top_[n + 1] =
            log_a_top_[n] + I * kz_[n] * d_[n] + std::log((1.0 + r) / (1.0 + r * rho_top_[n + 1]));
    }
}

cplx StackSolution::t() const { return std::exp(log_entry_ + log_a_top_.back()); }

std::size_t StackSolution::medium_at(double z) const {
    if (!std::isfinite(z)) throw DomainError("depth must be finite");
    const std::size_t m = eps_.size();
    if (z < 0.0) return 0;
    if (z >= depth_) return m - 1;
    const auto first = top_.begin() + 1;
    const auto last = top_.end() - 1;
    return static_cast<std::size_t>(std::upper_bound(first, last, z) - first);
}

cplx StackSolution::relative_log_amplitude(std::size_t medium, double z) const {
    return log_a_top_[medium] + I * kz_[medium] * (z - top_[medium]);
}

LocalWave StackSolution::local(double z) const {
    LocalWave w;
    w.medium = medium_at(z);
    const std::size_t n = w.medium;
    w.kz = kz_[n];
    if (n == 0) {
        w.log_amplitude = I * kz_[0] * z;
        w.rho = r_ * std::exp(-2.0 * I * kz_[0] * z);
        w.sigma = 0.0;
        return w;
    }
    w.log_amplitude = log_entry_ + relative_log_amplitude(n, z);
    w.rho = n + 1 == eps_.size() ? cplx{0.0}
                                 : rho_bottom_[n] * std::exp(2.0 * I * kz_[n] * (top_[n] + d_[n] - z));
    w.sigma = sigma_top_[n] * std::exp(2.0 * I * kz_[n] * (z - top_[n]));
    return w;
}

cplx StackSolution::field(double z) const {
    const LocalWave w = local(z);
    return std::exp(w.log_amplitude) * (1.0 + w.rho);
}

cplx StackSolution::green(double z1, double z2) const {
    const double zp = std::min(z1, z2);
    const double z = std::max(z1, z2);
    const LocalWave src = local(zp);
    const LocalWave obs = local(z);
    cplx log_ratio;
    if (src.medium > 0)
        log_ratio = relative_log_amplitude(obs.medium, z) - relative_log_amplitude(src.medium, zp);
    else if (obs.medium == 0)
        log_ratio = I * kz_[0] * (z - zp);
    else
        log_ratio = log_entry_ + relative_log_amplitude(obs.medium, z) - I * kz_[0] * zp;
    const cplx g = I / (2.0 * src.kz) * (1.0 + src.sigma) * (1.0 + obs.rho) * std::exp(log_ratio) /
                   (1.0 - src.sigma * src.rho);
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
        throw NumericalError("Green's function evaluation is not finite");
    return g;
}

Coefficients parratt_coefficients(const CavityStack& stack, const IncidenceGeometry& geom) {
    geom.require_physical();
    const StackSolution sol(stack, geom);
    const Coefficients c{sol.r(), sol.t()};
    for (cplx v : {c.r, c.t})
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericalError("Parratt coefficients overflowed");
    return c;
}

cplx field_at_depth(const CavityStack& stack, const IncidenceGeometry& geom, double z) {
    geom.require_physical();
    if (!std::isfinite(z)) throw DomainError("depth must be finite");
    return StackSolution(stack, geom).field(z);
}

cplx greens_function(const CavityStack& stack, const IncidenceGeometry& geom, double z,
                     double z_prime) {
    geom.require_physical();
    if (!std::isfinite(z) || !std::isfinite(z_prime)) throw DomainError("depth must be finite");
    return StackSolution(stack, geom).green(z, z_prime);
}

std::vector<double> rocking_curve(const CavityStack& stack, const std::vector<double>& theta_rad,
                                  double photon_energy) {
    std::vector<double> out;
    out.reserve(theta_rad.size());
    for (double th : theta_rad)
        out.push_back(std::norm(parratt_coefficients(stack, {cplx{th, 0.0}, photon_energy}).r));
    return out;
}

}  // namespace nucav
