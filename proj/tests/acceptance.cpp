// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed here.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "nucav/design.hpp"
#include "nucav/os.hpp"
#include "nucav/poles.hpp"
#include "nucav/spectra.hpp"
#include "support.hpp"

using namespace nucav;
using namespace nucav::test;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }
bool within(double value, double target, double tol) { return std::abs(value - target) <= tol * std::abs(target); }

LevelScheme scheme_a() {
    return derive_level_scheme(cavity_a(), IncidenceGeometry::at_mrad(kTheta3), cavity_a_layers());
}
LevelScheme scheme_b() {
    return reverse_levels(derive_level_scheme(cavity_b(), IncidenceGeometry::at_mrad(kTheta3), cavity_b_layers()));
}

void level_scheme_pair(Outcome& o) {
    const auto t0 = Clock::now();
    const auto a = scheme_a();
    const auto b = scheme_b();
    const double runtime = seconds_since(t0);
    const double mirror = (a.E - b.E).cwiseAbs().maxCoeff();
    const double e11 = rel(a.E(0, 0), {-0.040, 0.22});
    const double e12 = rel(a.E(0, 1), {-0.86, 0.012});
    const double e22 = rel(a.E(1, 1), {0.64, 3.5});
    const bool flip = std::signbit(a.rabi(0).real()) != std::signbit(b.rabi(0).real()) &&
                      std::signbit(a.rabi(0).imag()) != std::signbit(b.rabi(0).imag());
    o.detail << "max|E_a - E_b| = " << mirror << ", rel dev " << e11 << "/" << e12 << "/" << e22
             << ", rabi1 a=" << a.rabi(0) << " b=" << b.rabi(0) << ", runtime " << runtime << " s";
    o.require(mirror < 1e-8, "mirror agreement 1e-8");
    o.require(e11 < 0.2 && e12 < 0.2 && e22 < 0.2, "entries within 20%");
    o.require(flip, "first Rabi entry sign flip");
    o.require(runtime < 1.0, "runtime < 1 s");
}

void eigenmode_pair(Outcome& o) {
    const auto da = eigen_decompose(scheme_a());
    const auto db = eigen_decompose(scheme_b());
    const double l1 = rel(da.eigenvalues(0), {-0.090, 0.45});
    const double l2 = rel(da.eigenvalues(1), {0.69, 3.2});
    const double wt = (da.weights_t - db.weights_t).cwiseAbs().maxCoeff();
    const double supp = std::abs(da.weights_r(0)) / std::abs(db.weights_r(0));
    o.detail << "lambda " << da.eigenvalues(0) << ", " << da.eigenvalues(1) << " (rel dev " << l1 << ", " << l2
             << "), max|g_t(a) - g_t(b)| = " << wt << ", narrow-mode g_r suppression " << supp;
    o.require(l1 < 0.2 && l2 < 0.2, "eigenvalues within 20%");
    o.require(wt < 1e-8, "transmission weights 1e-8");
    o.require(supp >= 100.0, "suppression >= 1e2");
}

void transmission_theorem(Outcome& o) {
    const auto a = scheme_a();
    const auto b = scheme_b();
    const auto g = FrequencyGrid::linspace(-20, 20, 2001);
    const auto ta = transmittance(a, g), tb = transmittance(b, g);
    const auto ra = reflectance(a, g), rb = reflectance(b, g);
    double dt = 0.0, dr = 0.0;
    for (std::size_t i = 0; i < g.detunings.size(); ++i) {
        dt = std::max(dt, std::abs(ta[i] - tb[i]));
        dr = std::max(dr, std::abs(std::norm(ra[i]) - std::norm(rb[i])));
    }
    o.detail << "max|t_a - t_b| = " << dt << ", max||r_a|^2 - |r_b|^2| = " << dr;
    o.require(dt < 1e-8, "transmission agreement 1e-8");
    o.require(dr > 0.1, "reflection difference > 0.1");
}

void eit_reference(Outcome& o) {
    EITGoal goal;
    goal.metastable = 1;
    const auto s = derive_level_scheme(eit_cavity(), IncidenceGeometry::at_mrad(2.28), two_layer());
    const auto r = check_eit_conditions(s, goal);
    const auto w = transparency_witness(s, 2);
    o.detail << "chain " << r.outer << " > " << r.middle << " > " << r.inner << ", Rabi ratio " << r.rabi_suppression
             << ", transparency Im chi min/peak " << w.dip_ratio << " at " << w.dip_detuning << " gamma0";
    o.require(r.outer > r.middle && r.middle > r.inner, "ordered chain");
    o.require(within(r.outer, 58, 0.25) && within(r.middle, 13, 0.25) && within(r.inner, 7.6, 0.25),
              "ratios within 25%");
    o.require(within(r.rabi_suppression, 279, 0.3), "Rabi ratio within 30%");
    o.require(w.found && w.dip_ratio < 0.1, "transparency point < 10% of peak");
}

void eit_leaky(Outcome& o) {
    EITGoal goal;
    goal.metastable = 2;
    const auto s = derive_level_scheme(leaky_cavity(), IncidenceGeometry::at_mrad(2.23), two_layer());
    const auto r = check_eit_conditions(s, goal);
    o.detail << "ratios " << r.outer << ", " << r.middle << ", " << r.inner << ", Rabi ratio " << r.rabi_suppression
             << ", probe isolation " << (r.probe_isolation ? "passes" : "fails");
    o.require(within(r.outer, 10, 0.25) && within(r.middle, 7.6, 0.25) && within(r.inner, 3.2, 0.25),
              "ratios within 25%");
    o.require(within(r.rabi_suppression, 4.4, 0.3), "Rabi ratio within 30%");
    o.require(!r.probe_isolation && !r.pass(), "flagged as failing probe isolation");
}

void oracles(Outcome& o) {
    const auto g = IncidenceGeometry::at_mrad(kTheta3);
    const auto s = scheme_a();
    const auto grid = FrequencyGrid::linspace(-200, 200, 4001);
    const auto ab = reflectance(s, grid);
    const auto sc = semiclassical_reflectance(cavity_a(), g, grid.detunings, cavity_a_layers());
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < ab.size(); ++i) {
        worst = std::max(worst, std::abs(ab[i] - sc[i]));
        scale = std::max(scale, std::abs(sc[i]));
    }
    std::vector<double> det;
    for (int i = -40; i <= 40; ++i) det.push_back(5.0 * i);
    const Eigen::MatrixXcd td = time_domain_spectrum(s, det);
    double td_worst = 0.0;
    const auto n = static_cast<Eigen::Index>(s.size());
    for (std::size_t i = 0; i < det.size(); ++i) {
        const Eigen::MatrixXcd Mt = cplx(0, 1) * (Eigen::MatrixXcd::Identity(n, n) * cplx(det[i], 0.5) + s.E);
        const Eigen::VectorXcd fd = -Mt.fullPivLu().solve(s.rabi);
        td_worst = std::max(td_worst, (td.col(static_cast<Eigen::Index>(i)) - fd).norm() / fd.norm());
    }
    o.detail << "ab initio vs semiclassical rel Linf " << worst / scale << ", time-domain vs frequency-domain "
             << td_worst;
    o.require(worst / scale < 1e-3, "reflectance oracle < 1e-3");
    o.require(td_worst < 1e-6, "time-domain oracle < 1e-6");
}

void properties(Outcome& o) {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240917);
    auto angle = [&] { return IncidenceGeometry::at_mrad(std::uniform_real_distribution<double>(1.0, 6.0)(rng)); };
    double unit = 0.0, recip = 0.0, sym = 0.0, esum = 0.0, min_sr = 1e300, cs = -1e300;
    for (int i = 0; i < 1000; ++i) {
        const auto lossless = random_stack(rng, true, rng() % 2 == 0);
        const auto g1 = angle();
        const StackSolution a(lossless, g1);
        unit = std::max(unit, std::abs(std::norm(a.r()) +
                                       (a.kz(a.media() - 1) / a.kz(0)).real() * std::norm(a.t()) - 1.0));

        const auto lossy = random_stack(rng, false, rng() % 2 == 0);
        const auto g2 = angle();
        const StackSolution f(lossy, g2), m(lossy.mirrored(), g2);
        recip = std::max(recip, rel(m.t() / m.kz(0), f.t() / f.kz(0)));
        const double D = f.depth();
        std::uniform_real_distribution<double> z(0.0, D);
        const double z1 = z(rng), z2 = z(rng);
        sym = std::max(sym, rel(m.green(D - z2, D - z1), f.green(z1, z2)));

        const auto [cav, layers] = random_cavity(rng);
        const auto s = derive_level_scheme(cav, angle(), layers);
        const auto d = eigen_decompose(s);
        if (!d.degenerate())
            for (double x = -50.0; x <= 50.0; x += 2.5) {
                const cplx r = reflectance(s, FrequencyGrid{{x}})[0];
                esum = std::max(esum, std::abs(d.reflectance(x) - r) / std::max(1.0, std::abs(r)));
            }
        min_sr = std::min({min_sr, s.sr(0), s.sr(1)});
        cs = std::max(cs, std::abs(s.gamma12()) - std::sqrt(s.sr(0) * s.sr(1)));
    }
    const double runtime = seconds_since(t0);
    o.detail << "unitarity " << unit << ", reciprocity " << recip << ", G symmetry " << sym << ", eigen-sum " << esum
             << ", min Gamma_SR " << min_sr << ", max |gamma12| - sqrt(G1 G2) " << cs << ", runtime " << runtime
             << " s";
    o.require(unit < 1e-10, "unitarity 1e-10");
    o.require(recip < 1e-10, "reciprocity 1e-10");
    o.require(sym < 1e-12, "G symmetry 1e-12");
    o.require(esum < 1e-10, "eigen-sum 1e-10");
    o.require(min_sr >= 0.0, "Gamma_SR >= 0");
    o.require(cs <= 1e-6, "|gamma12| <= sqrt(G1 G2) + 1e-6");
    o.require(runtime < 60.0, "runtime < 60 s");
}

Boundary2D coupling_outline(const ObservableSpace& s) { return os_boundary(s, {"delta12", "gamma12"}).outline; }

void observable_space(Outcome& o) {
    const auto t0 = Clock::now();
    OSOptions opt;
    opt.budget = 100000;
    opt.seed = 1;
    const std::vector<std::string> names = {"delta12", "gamma12", "im_lambda_max"};
    const auto pd = sample_os(CavityParameterization::two_layer_family(materials(), "Pd"), names, opt);
    const auto pt = sample_os(CavityParameterization::two_layer_family(materials(), "Pt"), names, opt);
    double max_pd = 0.0, max_pt = 0.0;
    std::size_t excluded = 0;
    for (const auto& s : pd.samples) {
        if (!s.evaluated || s.capped || s.degenerate) {
            ++excluded;
            continue;
        }
        max_pd = std::max(max_pd, s.observables[2]);
    }
    for (const auto& s : pt.samples)
        if (s.evaluated && !s.capped && !s.degenerate) max_pt = std::max(max_pt, s.observables[2]);
    const auto outer = coupling_outline(pd);
    const auto inner = coupling_outline(pt);
    double ext = 0.0;
    for (const auto& p : outer.ring) ext = std::max({ext, std::abs(p.x), std::abs(p.y)});
    const double frac = containment_fraction(inner, outer, 0.02 * ext);
    o.detail << "Pd max Im lambda " << max_pd << " (" << excluded << " capped/degenerate excluded), Pt " << max_pt
             << ", Pt-in-Pd hull containment " << frac << " (tol 2% of extent), areas " << inner.area << " / "
             << outer.area << ", runtime " << seconds_since(t0) << " s";
    o.require(within(max_pd, 135.0, 0.15), "max Im lambda 135 +- 15%");
    o.require(frac >= 0.95, "Pt OS inside Pd OS");
}

void spectral_design(Outcome& o) {
    const auto param = CavityParameterization::two_layer_family(materials(), "Pd");
    OptimizerOptions opt;
    opt.budget = 30000;
    opt.seed = 1;
    auto eigen_sep = [](const LevelScheme& s) {
        const auto d = eigen_decompose(s);
        return std::abs(d.eigenvalues(0).real() - d.eigenvalues(1).real());
    };
    o.detail << "separations (eigenmode centres / |r|^2 minima):";
    for (double target : {10.0, 20.0, 30.0, 40.0}) {
        SpectralGoal g;
        g.separation = target;
        const auto r = design_spectrum(param, g, opt);
        const double sep = eigen_sep(r.scheme);
        o.detail << " " << target << " -> " << sep << " / " << analyze_dips(r.scheme).separation << ";";
        if (target < 35.0)
            o.require(within(sep, target, 0.1), "separation " + std::to_string(int(target)) + " within 10%");
        else
            o.require(sep > 30.0 && sep < target, "shortfall 30 < separation < 40");
    }
    o.detail << " right-dip depth at Delta = 15:";
    double prev = 1e300;
    for (double alpha : {0.2, 0.5, 0.7}) {
        SpectralGoal g;
        g.separation = 15.0;
        g.alpha = alpha;
        const auto r = design_spectrum(param, g, opt);
        const double depth = analyze_dips(r.scheme).right_depth;
        o.detail << " alpha " << alpha << " -> " << depth << ";";
        o.require(depth < prev, "right-dip depth decreases with alpha");
        prev = depth;
    }
}

void pole_analysis(Outcome& o) {
    PoleWindow w;
    w.re_min = 2.0e-3;
    w.re_max = 4.5e-3;
    w.im_min = -1.0e-3;
    w.im_max = 0.0;
    const auto stack = pole_cavity();
    const auto layers = two_layer();
    std::vector<std::vector<cplx>> sets;
    for (const auto* name : {"coupling12", "level1", "level2"}) {
        std::vector<cplx> poles;
        for (const auto& c : locate_poles(named_observable(stack, layers, name), w))
            if (c.converged && w.contains(c.theta)) {
                bool dup = false;
                for (const auto& q : poles) dup = dup || std::abs(q - c.theta) < 1e-10;
                if (!dup) poles.push_back(c.theta);
            }
        sets.push_back(poles);
    }
    auto nearest = [](const std::vector<cplx>& set, cplx z) {
        double best = 1e300;
        for (const auto& p : set) best = std::min(best, std::abs(p - z));
        return best;
    };
    double worst = 0.0;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            if (a != b)
                for (const auto& p : sets[a]) worst = std::max(worst, nearest(sets[b], p));

    const auto set = find_poles(stack, layers, w);
    std::size_t best = 0;
    double iso = 0.0;
    for (std::size_t k = 0; k < set.poles.size(); ++k) {
        double gap = 1e300;
        for (std::size_t j = 0; j < set.poles.size(); ++j)
            if (j != k) gap = std::min(gap, std::abs(set.poles[j] - set.poles[k]));
        if (gap / std::abs(set.poles[k].imag()) > iso) iso = gap / std::abs(set.poles[k].imag()), best = k;
    }
    const cplx p = set.poles.empty() ? cplx(3e-3, -1e-5) : set.poles[best];
    const auto f = named_observable(stack, layers, "coupling12");
    std::vector<cplx> traj;
    for (int i = -100; i <= 100; ++i) traj.push_back(f(p.real() + 3.0 * std::abs(p.imag()) * i / 100.0));
    const auto fit = single_mode_circle_fit(traj);
    o.detail << "poles per observable " << sets[0].size() << "/" << sets[1].size() << "/" << sets[2].size()
             << ", max mismatch " << worst << " rad, circle fit at " << p << ": residual/radius "
             << fit.residual / fit.radius;
    o.require(sets[0].size() >= 3 && !sets[1].empty() && !sets[2].empty(), "poles found");
    o.require(worst < 1e-8, "pole sets coincide to 1e-8 rad");
    o.require(fit.residual < 0.05 * fit.radius, "circle fit residual < 5%");
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria = {
        {1, level_scheme_pair},       {2, eigenmode_pair},       {3, transmission_theorem},
        {4, eit_reference},   {5, eit_leaky},   {6, oracles},
        {7, properties},   {8, observable_space}, {9, spectral_design},
        {10, pole_analysis}};
    int failures = 0;
    for (const auto& [id, run] : criteria) {
        Outcome o;
        try {
            run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        failures += !o.pass;
        std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
