#include "nucav/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "nucav/errors.hpp"

namespace nucav {

namespace {
constexpr cplx I{0.0, 1.0};

bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

cplx through_inverse(const LevelScheme& scheme, const Eigen::VectorXcd& out, double detuning) {
    const Eigen::MatrixXcd m = response_matrix(scheme, detuning);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    const Eigen::VectorXcd x = lu.solve(scheme.rabi);
    const cplx v = out.transpose() * x;
    if (!finite(v)) throw NumericalError("response matrix is singular");
    return v;
}

// Eigenvalues/eigenvectors sorted by increasing imaginary part.
std::pair<Eigen::VectorXcd, Eigen::MatrixXcd> sorted_eigen(const Eigen::MatrixXcd& E) {
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(E);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    const Eigen::Index n = E.rows();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return es.eigenvalues()(a).imag() < es.eigenvalues()(b).imag();
    });
    Eigen::VectorXcd vals(n);
    Eigen::MatrixXcd vecs(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        vals(i) = es.eigenvalues()(order[i]);
        vecs.col(i) = es.eigenvectors().col(order[i]).normalized();
    }
    return {vals, vecs};
}
}  // namespace

FrequencyGrid FrequencyGrid::linspace(double lo, double hi, std::size_t n) {
    FrequencyGrid g;
    if (n == 0 || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
        throw DomainError("frequency grid needs n >= 1 and finite lo <= hi");
    if (n == 1) {
        g.detunings = {lo};
        return g;
    }
    for (std::size_t i = 0; i < n; ++i)
        g.detunings.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return g;
}

void FrequencyGrid::validate() const {
    if (detunings.empty()) throw DomainError("frequency grid is empty");
    for (std::size_t i = 0; i < detunings.size(); ++i) {
        if (!std::isfinite(detunings[i])) throw DomainError("detunings must be finite");
        if (i > 0 && !(detunings[i] > detunings[i - 1]))
            throw DomainError("detunings must be strictly increasing");
    }
}

Eigen::MatrixXcd response_matrix(const LevelScheme& scheme, double detuning) {
    if (!std::isfinite(detuning)) throw DomainError("detuning must be finite");
    Eigen::MatrixXcd m = scheme.E;
    m.diagonal().array() += cplx{detuning, 0.5};
    return I * m;
}

std::vector<cplx> reflectance(const LevelScheme& scheme, const FrequencyGrid& grid) {
    grid.validate();
    std::vector<cplx> out;
    out.reserve(grid.detunings.size());
    for (double d : grid.detunings)
        out.push_back(scheme.r_el - through_inverse(scheme, scheme.out_refl, d));
    return out;
}

std::vector<cplx> transmittance(const LevelScheme& scheme, const FrequencyGrid& grid) {
    grid.validate();
    std::vector<cplx> out;
    out.reserve(grid.detunings.size());
    for (double d : grid.detunings)
        out.push_back(scheme.t_el - through_inverse(scheme, scheme.out_trans, d));
    return out;
}

cplx SpectrumDecomposition::reflectance(double detuning) const {
    cplx r = r_el;
    for (Eigen::Index l = 0; l < eigenvalues.size(); ++l)
        r += I * weights_r(l) / (cplx{detuning, 0.5} + eigenvalues(l));
    return r;
}

cplx SpectrumDecomposition::transmittance(double detuning) const {
    cplx t = t_el;
    for (Eigen::Index l = 0; l < eigenvalues.size(); ++l)
        t += I * weights_t(l) / (cplx{detuning, 0.5} + eigenvalues(l));
    return t;
}

cplx SpectrumDecomposition::reflectance_derivative(double detuning) const {
    cplx d = 0.0;
    for (Eigen::Index l = 0; l < eigenvalues.size(); ++l) {
        const cplx den = cplx{detuning, 0.5} + eigenvalues(l);
        d -= I * weights_r(l) / (den * den);
    }
    return d;
}

SpectrumDecomposition eigen_decompose(const LevelScheme& scheme) {
    scheme.validate();
    SpectrumDecomposition dec;
    dec.r_el = scheme.r_el;
    dec.t_el = scheme.t_el;
    auto [vals, vecs] = sorted_eigen(scheme.E);
    dec.eigenvalues = vals;
    dec.S = vecs;
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vecs);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    dec.condition_number = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    dec.S_inv = vecs.fullPivLu().inverse();
    const Eigen::RowVectorXcd gr = scheme.out_refl.transpose() * dec.S;
    const Eigen::RowVectorXcd gt = scheme.out_trans.transpose() * dec.S;
    const Eigen::VectorXcd drive = dec.S_inv * scheme.rabi;
    dec.weights_r = gr.transpose().cwiseProduct(drive);
    dec.weights_t = gt.transpose().cwiseProduct(drive);
    return dec;
}

std::pair<cplx, cplx> closed_form_eigenvalues_2x2(const Eigen::MatrixXcd& E) {
    if (E.rows() != 2 || E.cols() != 2) throw DomainError("closed form needs a 2x2 matrix");
    const cplx e1 = E(0, 0), e2 = E(1, 1), e12 = E(0, 1);
    const cplx root = std::sqrt((e1 - e2) * (e1 - e2) + 4.0 * e12 * e12);
    return {0.5 * (e1 + e2) - 0.5 * root, 0.5 * (e1 + e2) + 0.5 * root};
}

std::vector<std::vector<cplx>> track_eigenvalues(const std::vector<Eigen::MatrixXcd>& path) {
    std::vector<std::vector<cplx>> out;
    Eigen::MatrixXcd prev_vecs;
    for (const auto& E : path) {
        auto [vals, vecs] = sorted_eigen(E);
        const Eigen::Index n = vals.size();
        std::vector<Eigen::Index> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        if (prev_vecs.size() == vecs.size()) {
            const Eigen::MatrixXd overlap = (prev_vecs.adjoint() * vecs).cwiseAbs();
            if (n <= 7) {
                std::vector<Eigen::Index> p = perm;
                double best = -1.0;
                do {
                    double s = 0.0;
                    for (Eigen::Index i = 0; i < n; ++i) s += overlap(i, p[i]);
                    if (s > best) {
                        best = s;
                        perm = p;
                    }
                } while (std::next_permutation(p.begin(), p.end()));
            } else {
                std::vector<bool> used(n, false);
                for (Eigen::Index i = 0; i < n; ++i) {
                    Eigen::Index arg = -1;
                    for (Eigen::Index j = 0; j < n; ++j)
                        if (!used[j] && (arg < 0 || overlap(i, j) > overlap(i, arg))) arg = j;
                    used[arg] = true;
                    perm[i] = arg;
                }
            }
        }
        std::vector<cplx> row(n);
        Eigen::MatrixXcd labelled(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            row[i] = vals(perm[i]);
            labelled.col(i) = vecs.col(perm[i]);
        }
        prev_vecs = labelled;
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<std::pair<cplx, cplx>> track_closed_form_2x2(const std::vector<Eigen::MatrixXcd>& path) {
    std::vector<std::pair<cplx, cplx>> out;
    bool swapped = false;
    cplx prev_w;
    for (std::size_t p = 0; p < path.size(); ++p) {
        const auto& E = path[p];
        const cplx w = (E(0, 0) - E(1, 1)) * (E(0, 0) - E(1, 1)) + 4.0 * E(0, 1) * E(0, 1);
        if (p > 0 && std::signbit(w.imag()) != std::signbit(prev_w.imag())) {
            // Crossing of the negative real axis: interpolate to where Im w = 0.
            const double f = prev_w.imag() / (prev_w.imag() - w.imag());
            if (prev_w.real() + f * (w.real() - prev_w.real()) < 0.0) swapped = !swapped;
        }
        prev_w = w;
        auto pair = closed_form_eigenvalues_2x2(E);
        if (swapped) std::swap(pair.first, pair.second);
        out.push_back(pair);
    }
    return out;
}

Eigen::VectorXd scaled_weights(const SpectrumDecomposition& decomp) {
    Eigen::VectorXd w(decomp.eigenvalues.size());
    for (Eigen::Index l = 0; l < w.size(); ++l)
        w(l) = std::abs(decomp.weights_r(l)) / (decomp.eigenvalues(l).imag() + 0.5);
    return w;
}

std::vector<cplx> susceptibility(const LevelScheme& scheme, const FrequencyGrid& grid,
                                 std::size_t probe_layer) {
    grid.validate();
    if (probe_layer >= scheme.size()) throw DomainError("probe layer index out of range");
    std::vector<cplx> chi;
    chi.reserve(grid.detunings.size());
    double peak = 0.0;
    for (double d : grid.detunings) {
        const Eigen::MatrixXcd inv = response_matrix(scheme, d).inverse();
        const cplx v = -I * inv(probe_layer, probe_layer);
        peak = std::max(peak, v.imag());
        chi.push_back(v);
    }
    if (peak > 0.0)
        for (auto& v : chi) v /= peak;
    return chi;
}

namespace {
struct Rk4 {
    Eigen::MatrixXcd K;
    void step(Eigen::VectorXcd& h, double dt) const {
        const Eigen::VectorXcd k1 = K * h;
        const Eigen::VectorXcd k2 = K * (h + 0.5 * dt * k1);
        const Eigen::VectorXcd k3 = K * (h + 0.5 * dt * k2);
        const Eigen::VectorXcd k4 = K * (h + dt * k3);
        h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

Eigen::MatrixXcd generator(const LevelScheme& scheme) {
    const Eigen::Index n = scheme.E.rows();
    return -0.5 * Eigen::MatrixXcd::Identity(n, n) + I * scheme.E;
}
}  // namespace

TimeDomainResult time_domain_oracle(const LevelScheme& scheme, const std::vector<double>& t_grid,
                                    double max_step) {
    scheme.validate();
    if (!(max_step > 0.0)) throw DomainError("step size must be positive");
    const Rk4 rk{generator(scheme)};
    TimeDomainResult res;
    res.times = t_grid;
    res.amplitudes.resize(scheme.E.rows(), static_cast<Eigen::Index>(t_grid.size()));
    Eigen::VectorXcd h = scheme.rabi;
    double t = 0.0;
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        if (!(t_grid[j] >= t)) throw DomainError("time grid must be non-negative and sorted");
        const double span = t_grid[j] - t;
        const auto steps = static_cast<long>(std::ceil(span / max_step));
        for (long s = 0; s < steps; ++s) rk.step(h, span / static_cast<double>(steps));
        t = t_grid[j];
        if (!h.allFinite()) throw NumericalError("time integration diverged");
        res.amplitudes.col(static_cast<Eigen::Index>(j)) = h;
    }
    return res;
}

Eigen::MatrixXcd time_domain_spectrum(const LevelScheme& scheme,
                                      const std::vector<double>& detunings, double tolerance) {
    scheme.validate();
    const Eigen::MatrixXcd K = generator(scheme);
    const Eigen::Index n = K.rows();
    const auto nd = static_cast<Eigen::Index>(detunings.size());
    double max_detuning = 0.0;
    for (double d : detunings) {
        if (!std::isfinite(d)) throw DomainError("detuning must be finite");
        max_detuning = std::max(max_detuning, std::abs(d));
    }
    const double fastest = K.cwiseAbs().rowwise().sum().maxCoeff() + max_detuning;
    const double dt = std::min(0.01, 0.01 / fastest);
    // Every mode decays at least as e^{-t/2}.
    const double t_end = 2.0 * std::log(1.0 / tolerance) + 10.0;
    const auto steps = static_cast<long>(std::ceil(t_end / dt));

    Eigen::VectorXcd h = scheme.rabi;
    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(n, nd);
    Eigen::RowVectorXcd w0 = Eigen::RowVectorXcd::Ones(nd);
    Eigen::RowVectorXcd half(nd);
    for (Eigen::Index j = 0; j < nd; ++j)
        half(j) = std::exp(I * (0.5 * dt * detunings[static_cast<std::size_t>(j)]));
    for (long s = 0; s < steps; ++s) {
        const Eigen::VectorXcd k1 = K * h;
        const Eigen::VectorXcd h2 = h + 0.5 * dt * k1;
        const Eigen::VectorXcd k2 = K * h2;
        const Eigen::VectorXcd h3 = h + 0.5 * dt * k2;
        const Eigen::VectorXcd k3 = K * h3;
        const Eigen::VectorXcd h4 = h + dt * k3;
        const Eigen::VectorXcd k4 = K * h4;
        const Eigen::RowVectorXcd wm = w0.cwiseProduct(half);
        const Eigen::RowVectorXcd w1 = wm.cwiseProduct(half);
        F.noalias() += (dt / 6.0) * (h * w0 + (2.0 * (h2 + h3)) * wm + h4 * w1);
        h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        w0 = w1;
    }
    if (!F.allFinite()) throw NumericalError("time integration diverged");
    return F;
}

}  // namespace nucav
