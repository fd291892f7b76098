#include "nucav/poles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "nucav/errors.hpp"
#include "nucav/parallel.hpp"

namespace nucav {

namespace {
constexpr cplx I{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

cplx reciprocal(const AngleFunction& f, cplx theta) {
    const cplx v = f(theta);
    return finite(v) ? 1.0 / v : cplx{0.0};
}
}  // namespace

void PoleWindow::validate() const {
    if (!(re_max > re_min) || !(im_max > im_min) || n_re < 3 || n_im < 2)
        throw DomainError("pole window must be a non-empty rectangle with at least a 3x2 grid");
    if (re_min <= 0.0 && re_max >= 0.0 && im_min <= 0.0 && im_max >= 0.0)
        throw DomainError("pole window must avoid theta = 0");
}

std::vector<double> PoleWindow::im_rows() const {
    const double h = im_max - im_min;
    std::vector<double> rows{im_min};
    const std::size_t n = n_im - 1;
    for (std::size_t j = 1; j < n; ++j) {
        const double frac = std::pow(1e-4, static_cast<double>(j) / static_cast<double>(n - 1));
        rows.push_back(im_max - h * frac);
    }
    rows.push_back(im_max);
    return rows;
}

bool PoleWindow::contains(cplx theta) const {
    return theta.real() >= re_min && theta.real() <= re_max && theta.imag() >= im_min &&
           theta.imag() <= im_max;
}

AngleFunction level_scheme_entry(const CavityStack& stack, const ResonantLayerSet& layers,
                                 std::size_t i, std::size_t j, double photon_energy) {
    stack.validate();
    layers.validate(stack);
    if (i >= layers.size() || j >= layers.size()) throw DomainError("entry index out of range");
    const auto depths = layers.depths(stack);
    const double si = layers.species[i].xi * stack.layers[layers.indices[i]].thickness;
    const double sj = layers.species[j].xi * stack.layers[layers.indices[j]].thickness;
    const double scale = std::sqrt(si * sj);
    const double zi = depths[i], zj = depths[j];
    return [stack, scale, zi, zj, photon_energy](cplx theta) {
        return scale * StackSolution(stack, {theta, photon_energy}).green(zi, zj);
    };
}

AngleFunction named_observable(const CavityStack& stack, const ResonantLayerSet& layers,
                               const std::string& name, double photon_energy) {
    if (name == "coupling12") return level_scheme_entry(stack, layers, 0, 1, photon_energy);
    if (name == "level1") return level_scheme_entry(stack, layers, 0, 0, photon_energy);
    if (name == "level2") return level_scheme_entry(stack, layers, 1, 1, photon_energy);
    throw DomainError("unknown pole observable '" + name + "'");
}

std::vector<PoleCandidate> locate_poles(const AngleFunction& f, const PoleWindow& window) {
    window.validate();
    const std::size_t nr = window.n_re, ni = window.n_im;
    const double dre = (window.re_max - window.re_min) / static_cast<double>(nr - 1);
    const auto rows = window.im_rows();
    auto node = [&](std::size_t a, std::size_t b) {
        return cplx{window.re_min + dre * static_cast<double>(a), rows[b]};
    };
    std::vector<double> mag(nr * ni, 0.0);
    parallel_for(nr, [&](std::size_t a) {
        for (std::size_t b = 0; b < ni; ++b) {
            const cplx v = f(node(a, b));
            mag[a * ni + b] = finite(v) ? std::abs(v) : std::numeric_limits<double>::infinity();
        }
    });

    std::vector<cplx> starts;
    for (std::size_t a = 0; a < nr; ++a)
        for (std::size_t b = 0; b < ni; ++b) {
            const double m = mag[a * ni + b];
            bool peak = true;
            for (int da = -1; da <= 1 && peak; ++da)
                for (int db = -1; db <= 1 && peak; ++db) {
                    if (da == 0 && db == 0) continue;
                    const long aa = static_cast<long>(a) + da, bb = static_cast<long>(b) + db;
                    if (aa < 0 || bb < 0 || aa >= static_cast<long>(nr) || bb >= static_cast<long>(ni))
                        continue;
                    if (mag[static_cast<std::size_t>(aa) * ni + static_cast<std::size_t>(bb)] > m)
                        peak = false;
                }
            if (peak) starts.push_back(node(a, b));
        }

    std::vector<PoleCandidate> out(starts.size());
    const double max_step =
        0.25 * std::max(window.re_max - window.re_min, window.im_max - window.im_min);
    parallel_for(starts.size(), [&](std::size_t c) { out[c] = polish_pole(f, starts[c], max_step); });
    return out;
}

PoleCandidate polish_pole(const AngleFunction& f, cplx start, double max_step) {
    PoleCandidate cand;
    cand.start = start;
    cplx th = start;
    for (int it = 0; it < 80; ++it) {
        cand.iterations = it + 1;
        const double h = std::max(1e-12, 1e-5 * std::abs(th));
        const cplx g = reciprocal(f, th);
        const cplx dg = (reciprocal(f, th + h) - reciprocal(f, th - h)) / (2.0 * h);
        if (!finite(dg) || std::abs(dg) == 0.0) break;
        cplx step = g / dg;
        if (std::abs(step) > max_step) step *= max_step / std::abs(step);
        th -= step;
        if (std::abs(step) < 1e-15 + 1e-13 * std::abs(th)) {
            cand.converged = true;
            break;
        }
    }
    cand.theta = th;
    return cand;
}

ResidueEstimate contour_residue(const AngleFunction& f, cplx pole, double initial_radius,
                                double rel_tol) {
    constexpr int kNodes = 64;
    auto estimate = [&](double rho) {
        cplx sum = 0.0;
        for (int k = 0; k < kNodes; ++k) {
            const cplx u = std::polar(1.0, kTwoPi * (k + 0.5) / kNodes);
            sum += f(pole + rho * u) * u;
        }
        return sum * rho / static_cast<double>(kNodes);
    };
    ResidueEstimate res;
    double rho = initial_radius;
    cplx prev = estimate(rho);
    for (int it = 0; it < 40; ++it) {
        rho *= 0.5;
        const cplx cur = estimate(rho);
        if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) {
            res.value = cur;
            res.radius = rho;
            res.converged = true;
            return res;
        }
        prev = cur;
    }
    res.value = prev;
    res.radius = rho;
    return res;
}

cplx laurent_residue(const AngleFunction& f, cplx pole, double radius) {
    // f(u) ~ a_{-2}/u^2 + a_{-1}/u + a_0 + a_1 u + a_2 u^2 on points along two
    // rays and an inner circle, solved in least squares.
    std::vector<cplx> us;
    for (int k = 1; k <= 6; ++k) {
        const double t = radius * (0.4 + 0.1 * k);
        us.push_back(t * std::polar(1.0, 0.3));
        us.push_back(t * std::polar(1.0, 2.4));
    }
    for (int k = 0; k < 6; ++k) us.push_back(0.6 * radius * std::polar(1.0, 4.0 + 0.35 * k));
    Eigen::MatrixXcd A(static_cast<Eigen::Index>(us.size()), 5);
    Eigen::VectorXcd b(static_cast<Eigen::Index>(us.size()));
    for (std::size_t k = 0; k < us.size(); ++k) {
        const cplx u = us[k] / radius;
        const auto r = static_cast<Eigen::Index>(k);
        A(r, 0) = 1.0 / (u * u);
        A(r, 1) = 1.0 / u;
        A(r, 2) = 1.0;
        A(r, 3) = u;
        A(r, 4) = u * u;
        b(r) = f(pole + us[k]);
    }
    const Eigen::VectorXcd c = A.colPivHouseholderQr().solve(b);
    return c(1) * radius;
}

namespace {
double initial_radius(const std::vector<cplx>& poles, std::size_t p) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < poles.size(); ++q)
        if (q != p) nearest = std::min(nearest, std::abs(poles[q] - poles[p]));
    const double scale = std::max(std::abs(poles[p].imag()), 1e-7);
    return std::min(0.25 * nearest, 0.5 * scale);
}
}  // namespace

void attach_observable(PoleSet& set, const std::string& name, const AngleFunction& f) {
    set.observables.push_back(name);
    set.constants.push_back(f(cplx{0.0, 0.0}));
    std::vector<cplx> res(set.poles.size());
    parallel_for(set.poles.size(), [&](std::size_t p) {
        res[p] = contour_residue(f, set.poles[p], initial_radius(set.poles, p)).value;
    });
    set.residues.push_back(std::move(res));
}

PoleSet find_poles(const CavityStack& stack, const ResonantLayerSet& layers,
                   const PoleWindow& window, const std::vector<std::string>& observables,
                   double photon_energy) {
    if (observables.empty()) throw DomainError("need at least one observable");
    PoleSet set;
    set.window = window;
    const AngleFunction primary = named_observable(stack, layers, observables.front(), photon_energy);
    for (const auto& c : locate_poles(primary, window)) {
        if (!c.converged) {
            set.failed.push_back(c);
            continue;
        }
        if (!window.contains(c.theta)) continue;
        const bool seen = std::any_of(set.poles.begin(), set.poles.end(), [&](cplx p) {
            return std::abs(p - c.theta) < 1e-10 + 1e-7 * std::abs(c.theta.imag());
        });
        if (!seen) set.poles.push_back(c.theta);
    }
    std::sort(set.poles.begin(), set.poles.end(),
              [](cplx a, cplx b) { return a.real() < b.real(); });
    for (const auto& name : observables)
        attach_observable(set, name, named_observable(stack, layers, name, photon_energy));
    return set;
}

cplx mittag_leffler_approx(const PoleSet& set, std::size_t observable, cplx theta) {
    if (observable >= set.observables.size()) throw DomainError("observable index out of range");
    cplx v = set.constants[observable];
    for (std::size_t p = 0; p < set.poles.size(); ++p)
        v += set.residues[observable][p] * (1.0 / set.poles[p] + 1.0 / (theta - set.poles[p]));
    return v;
}

cplx single_mode_approx(cplx constant, cplx residue, cplx pole, cplx theta) {
    return constant + residue / (theta - pole);
}

CircleFit single_mode_circle_fit(const std::vector<cplx>& trajectory, double flag_ratio) {
    if (trajectory.size() < 3) throw DomainError("circle fit needs at least 3 samples");
    cplx mean = 0.0;
    for (cplx p : trajectory) mean += p;
    mean /= static_cast<double>(trajectory.size());
    double extent = 0.0;
    for (cplx p : trajectory) extent = std::max(extent, std::abs(p - mean));
    if (!(extent > 0.0)) throw DomainError("circle fit: samples coincide");

    const auto n = static_cast<Eigen::Index>(trajectory.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx p = (trajectory[static_cast<std::size_t>(i)] - mean) / extent;
        A(i, 0) = p.real();
        A(i, 1) = p.imag();
        A(i, 2) = 1.0;
        b(i) = -std::norm(p);
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 3) throw DomainError("circle fit: samples are collinear");
    const Eigen::Vector3d c = qr.solve(b);
    double cx = -0.5 * c(0), cy = -0.5 * c(1);
    double r = std::sqrt(std::max(0.0, cx * cx + cy * cy - c(2)));
    if (!(r < 1e6)) throw DomainError("circle fit: samples are collinear");

    // Geometric refinement (Gauss-Newton on radial distances).
    for (int it = 0; it < 50; ++it) {
        Eigen::MatrixXd J(n, 3);
        Eigen::VectorXd res(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const cplx p = (trajectory[static_cast<std::size_t>(i)] - mean) / extent;
            const double dx = p.real() - cx, dy = p.imag() - cy;
            const double dist = std::max(std::hypot(dx, dy), 1e-300);
            res(i) = dist - r;
            J(i, 0) = -dx / dist;
            J(i, 1) = -dy / dist;
            J(i, 2) = -1.0;
        }
        const Eigen::Vector3d step = J.colPivHouseholderQr().solve(-res);
        cx += step(0);
        cy += step(1);
        r += step(2);
        if (step.norm() < 1e-15) break;
    }
    double ss = 0.0;
    for (cplx q : trajectory) {
        const cplx p = (q - mean) / extent;
        const double d = std::hypot(p.real() - cx, p.imag() - cy) - r;
        ss += d * d;
    }
    CircleFit fit;
    fit.center = mean + extent * cplx{cx, cy};
    fit.radius = extent * std::abs(r);
    fit.residual = extent * std::sqrt(ss / static_cast<double>(n));
    fit.flagged = fit.residual > flag_ratio * fit.radius;
    return fit;
}

}  // namespace nucav
