#include "nucav/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nucav/errors.hpp"
#include "nucav/parallel.hpp"

namespace nucav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_log(double x) { return std::log(std::max(x, 1e-300)); }

// Squared shortfall of log(value) below log(target).
double hinge(double value, double target) {
    const double s = std::max(0.0, safe_log(target) - safe_log(value));
    return s * s;
}

int resolve_metastable(const LevelScheme& scheme, int requested) {
    if (requested == 1 || requested == 2) return requested;
    return scheme.sr(0) <= scheme.sr(1) ? 1 : 2;
}

}  // namespace

void EITGoal::validate() const {
    std::vector<std::string> problems;
    if (metastable < 0 || metastable > 2) problems.push_back("metastable must be 0, 1 or 2");
    if (!(margin > 1.0) || !std::isfinite(margin)) problems.push_back("margin must be > 1");
    if (!(max_incoherent_ratio >= 0.0)) problems.push_back("max_incoherent_ratio must be >= 0");
    if (!(min_rabi_suppression > 0.0)) problems.push_back("min_rabi_suppression must be > 0");
    if (!(max_dip_ratio > 0.0)) problems.push_back("max_dip_ratio must be > 0");
    if (!problems.empty()) throw ConfigError(problems);
}

EITReport check_eit_conditions(const LevelScheme& scheme, const EITGoal& goal) {
    if (scheme.size() != 2) throw DomainError("EIT conditions need a two-layer scheme");
    EITReport r;
    r.metastable = resolve_metastable(scheme, goal.metastable);
    const std::size_t meta = static_cast<std::size_t>(r.metastable - 1);
    const std::size_t probe = 1 - meta;
    r.g2 = scheme.sr(meta) + 1.0;
    r.g3 = scheme.sr(probe) + 1.0;
    const double d12 = scheme.delta12();
    const double c12 = scheme.gamma12();
    r.outer = (r.g3 / r.g2) * (r.g3 / r.g2);
    r.middle = d12 * d12 / (r.g2 * r.g2);
    r.middle_incoherent = (d12 * d12 + 0.25 * c12 * c12) / (r.g2 * r.g2);
    r.inner = r.g3 / r.g2;
    r.rabi_suppression = std::norm(scheme.rabi(static_cast<Eigen::Index>(probe))) /
                         std::norm(scheme.rabi(static_cast<Eigen::Index>(meta)));
    r.incoherent_ratio = d12 != 0.0 ? std::abs(c12 / d12) : kInf;
    r.chain_holds = r.outer > r.middle && r.middle > r.inner;
    r.chain_holds_incoherent = r.outer > r.middle_incoherent && r.middle_incoherent > r.inner;
    const double mid = goal.include_incoherent ? r.middle_incoherent : r.middle;
    r.margins_met = r.outer > goal.margin * mid && mid > goal.margin * r.inner;
    r.incoherent_ok = r.incoherent_ratio <= goal.max_incoherent_ratio;
    r.probe_isolation = r.rabi_suppression >= goal.min_rabi_suppression;
    return r;
}

double eit_penalty(const EITReport& r, const EITGoal& goal) {
    const double mid = goal.include_incoherent ? r.middle_incoherent : r.middle;
    double p = hinge(r.outer / std::max(mid, 1e-300), goal.margin) +
               hinge(mid / r.inner, goal.margin) +
               hinge(r.rabi_suppression, goal.min_rabi_suppression);
    if (goal.max_incoherent_ratio > 0.0)
        p += hinge(goal.max_incoherent_ratio, std::min(r.incoherent_ratio, 1e6));
    else
        p += std::min(r.incoherent_ratio, 1e6);
    const double secondary = std::min(r.incoherent_ratio, 10.0);
    const double tertiary = std::log10(std::clamp(r.rabi_suppression, 1e-6, 1e6));
    return 100.0 * p + 0.1 * secondary - 0.01 * tertiary;
}

TransparencyWitness transparency_witness(const LevelScheme& scheme, int probe_layer,
                                         double half_width, std::size_t points) {
    if (probe_layer < 1 || static_cast<std::size_t>(probe_layer) > scheme.size())
        throw DomainError("probe layer out of range");
    TransparencyWitness w;
    w.grid = FrequencyGrid::linspace(-half_width, half_width, points);
    w.chi = susceptibility(scheme, w.grid, static_cast<std::size_t>(probe_layer - 1));
    const std::size_t n = w.chi.size();
    std::vector<double> im(n);
    for (std::size_t i = 0; i < n; ++i) im[i] = w.chi[i].imag();
    const double peak = *std::max_element(im.begin(), im.end());
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(im[i] <= im[i - 1] && im[i] < im[i + 1])) continue;
        const double left = *std::max_element(im.begin(), im.begin() + static_cast<long>(i));
        const double right = *std::max_element(im.begin() + static_cast<long>(i) + 1, im.end());
        if (left <= im[i] || right <= im[i]) continue;
        const double ratio = im[i] / peak;
        if (!w.found || ratio < w.dip_ratio) {
            w.found = true;
            w.dip_ratio = ratio;
            w.dip_detuning = w.grid.detunings[i];
        }
    }
    return w;
}

void SpectralGoal::validate() const {
    std::vector<std::string> problems;
    if (!(separation >= 0.0) || !std::isfinite(separation)) problems.push_back("separation must be >= 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) problems.push_back("alpha must lie in [0, 1]");
    if (shift && !std::isfinite(*shift)) problems.push_back("shift must be finite");
    for (double w : {w_separation, w_balance, w_resolution, w_width, w_background, w_shift})
        if (!std::isfinite(w)) problems.push_back("cost weights must be finite");
    if (!problems.empty()) throw ConfigError(problems);
}

CostTerms spectral_cost_terms(const SpectrumDecomposition& decomp, cplx r_el,
                              const SpectralGoal& goal) {
    if (decomp.eigenvalues.size() != 2) throw DomainError("spectral cost needs two eigenmodes");
    const Eigen::VectorXd sw = scaled_weights(decomp);
    std::size_t a = 0, b = 1;
    if (decomp.eigenvalues(1).real() < decomp.eigenvalues(0).real()) std::swap(a, b);
    const cplx l1 = decomp.eigenvalues(static_cast<Eigen::Index>(a));
    const cplx l2 = decomp.eigenvalues(static_cast<Eigen::Index>(b));
    auto capped = [](double v) { return std::isfinite(v) ? std::min(v, kObservableCap) : kObservableCap; };
    const double g1 = capped(sw(static_cast<Eigen::Index>(a)));
    const double g2 = capped(sw(static_cast<Eigen::Index>(b)));
    const double s = std::sqrt(std::max(1.0 - std::sqrt(goal.alpha), 1e-6));

    CostTerms t;
    t.separation = -goal.w_separation * std::abs(std::abs(l1.real() - l2.real()) - goal.separation);
    t.balance = -goal.w_balance * std::abs(g1 / s - g2 * s);
    t.resolution = goal.w_resolution * (g1 + g2) *
                   std::abs(l1.real() / (l1.imag() + 0.5) - l2.real() / (l2.imag() + 0.5));
    t.width = -goal.w_width * std::abs(l1.imag() - l2.imag());
    t.background = goal.w_background * std::abs(r_el);
    if (goal.shift) t.shift = -goal.w_shift * std::abs(0.5 * (l1.real() + l2.real()) + *goal.shift);
    return t;
}

double spectral_cost(const SpectrumDecomposition& decomp, cplx r_el, const SpectralGoal& goal) {
    return spectral_cost_terms(decomp, r_el, goal).total();
}

DipAnalysis analyze_dips(const LevelScheme& scheme, double half_width, std::size_t points) {
    const auto grid = FrequencyGrid::linspace(-half_width, half_width, points);
    const auto r = reflectance(scheme, grid);
    const double bg = std::norm(scheme.r_el);
    DipAnalysis d;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double v = std::norm(r[i]);
        if (v < std::norm(r[i - 1]) && v <= std::norm(r[i + 1])) {
            d.positions.push_back(grid.detunings[i]);
            d.depths.push_back(bg - v);
        }
    }
    if (d.positions.size() >= 2) {
        std::vector<std::size_t> order(d.positions.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t x, std::size_t y) { return d.depths[x] > d.depths[y]; });
        std::size_t lo = order[0], hi = order[1];
        if (d.positions[lo] > d.positions[hi]) std::swap(lo, hi);
        d.separation = d.positions[hi] - d.positions[lo];
        d.left_depth = d.depths[lo];
        d.right_depth = d.depths[hi];
    } else if (d.positions.size() == 1) {
        d.left_depth = d.right_depth = d.depths[0];
    }
    return d;
}

namespace {

const std::vector<std::string> kEITMetrics = {
    "outer", "middle", "inner", "middle_incoherent", "rabi_suppression", "incoherent_ratio",
    "delta12", "gamma12", "g2", "g3", "metastable", "dip_ratio"};

const std::vector<std::string> kSpectralMetrics = {
    "cost", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "scaled_weight1",
    "scaled_weight2", "abs_r_el", "dip_separation", "left_depth", "right_depth", "condition"};

std::vector<double> eit_metrics(const LevelScheme& scheme, const EITGoal& goal) {
    const auto r = check_eit_conditions(scheme, goal);
    const auto w = transparency_witness(scheme, 3 - r.metastable);
    return {r.outer, r.middle, r.inner, r.middle_incoherent, r.rabi_suppression,
            r.incoherent_ratio, scheme.delta12(), scheme.gamma12(), r.g2, r.g3,
            static_cast<double>(r.metastable), w.dip_ratio};
}

std::vector<double> spectral_metrics(const LevelScheme& scheme, const SpectralGoal& goal) {
    const auto dec = eigen_decompose(scheme);
    const auto sw = scaled_weights(dec);
    std::size_t a = 0, b = 1;
    if (dec.eigenvalues(1).real() < dec.eigenvalues(0).real()) std::swap(a, b);
    const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
    const auto dips = analyze_dips(scheme);
    return {spectral_cost(dec, scheme.r_el, goal), dec.eigenvalues(ia).real(),
            dec.eigenvalues(ia).imag(), dec.eigenvalues(ib).real(), dec.eigenvalues(ib).imag(),
            sw(ia), sw(ib), std::abs(scheme.r_el), dips.separation, dips.left_depth,
            dips.right_depth, dec.condition_number};
}

OptimizationResult finish(const CavityParameterization& param, std::vector<double> x,
                          OptimizeOutcome search) {
    OptimizationResult res;
    res.params = std::move(x);
    auto built = param.build(res.params);
    res.stack = std::move(built.first);
    res.geom = built.second;
    res.layers = param.layers;
    res.scheme = derive_level_scheme(res.stack, res.geom, res.layers);
    res.search = std::move(search);
    return res;
}

}  // namespace

OptimizationResult design_eit(const CavityParameterization& param, const EITGoal& goal,
                              const OptimizerOptions& options) {
    goal.validate();
    param.validate();
    if (param.layers.size() != 2) throw DomainError("EIT design needs two resonant layers");
    const Objective f = [&](const std::vector<double>& x) {
        return eit_penalty(check_eit_conditions(param.scheme(x), goal), goal);
    };
    OptimizerOptions opts = options;
    opts.keep_trace = true;
    auto outcome = minimize(f, param.bounds(), opts);

    // Lexicographic pick over everything evaluated: feasibility (hard conditions
    // plus a coarse transparency witness), then the smallest incoherent ratio,
    // then the strongest Rabi suppression.
    const auto& trace = outcome.trace;
    std::vector<EITReport> reports(trace.size());
    std::vector<double> dip(trace.size(), 1.0);
    std::vector<char> ok(trace.size(), 0);
    parallel_for(trace.size(), [&](std::size_t i) {
        if (!std::isfinite(trace[i].value)) return;
        try {
            const auto scheme = param.scheme(trace[i].x);
            reports[i] = check_eit_conditions(scheme, goal);
            if (!reports[i].pass()) return;
            dip[i] = transparency_witness(scheme, 3 - reports[i].metastable, 40.0, 801).dip_ratio;
            ok[i] = dip[i] <= goal.max_dip_ratio;
        } catch (const std::exception&) {
        }
    });
    std::size_t best = trace.size();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!ok[i]) continue;
        if (best == trace.size()) {
            best = i;
            continue;
        }
        const auto& a = reports[i];
        const auto& b = reports[best];
        const double tie = 1e-3;
        if (a.incoherent_ratio < b.incoherent_ratio - tie ||
            (std::abs(a.incoherent_ratio - b.incoherent_ratio) <= tie &&
             a.rabi_suppression > b.rabi_suppression))
            best = i;
    }
    const bool feasible = best != trace.size();
    std::vector<double> x = feasible ? trace[best].x : outcome.x;
    auto res = finish(param, std::move(x), std::move(outcome));
    res.metric_names = kEITMetrics;
    res.metrics = eit_metrics(res.scheme, goal);
    res.feasible = feasible && res.metrics.back() <= goal.max_dip_ratio;
    const auto rep = check_eit_conditions(res.scheme, goal);
    std::ostringstream os;
    os << (res.feasible ? "feasible" : "INFEASIBLE (best effort)") << "; metastable layer "
       << rep.metastable << "; chain " << rep.outer << " > " << rep.middle << " > " << rep.inner
       << (rep.margins_met ? " (margins met)" : " (margins NOT met)") << "; Rabi suppression "
       << rep.rabi_suppression << (rep.probe_isolation ? " (ok)" : " (too weak)")
       << "; |gamma12/Delta12| " << rep.incoherent_ratio << "; transparency dip "
       << res.metrics.back() << " of peak";
    res.report = os.str();
    return res;
}

OptimizationResult design_spectrum(const CavityParameterization& param, const SpectralGoal& goal,
                                   const OptimizerOptions& options) {
    goal.validate();
    param.validate();
    if (param.layers.size() != 2) throw DomainError("spectral design needs two resonant layers");
    const Objective f = [&](const std::vector<double>& x) {
        const auto scheme = param.scheme(x);
        return -spectral_cost(eigen_decompose(scheme), scheme.r_el, goal);
    };
    auto outcome = minimize(f, param.bounds(), options);
    auto x = outcome.x;
    auto res = finish(param, std::move(x), std::move(outcome));
    res.metric_names = kSpectralMetrics;
    res.metrics = spectral_metrics(res.scheme, goal);
    const auto& m = res.metrics;
    std::ostringstream os;
    os << "cost " << m[0] << "; lambda1 " << m[1] << (m[2] < 0 ? "" : "+") << m[2] << "i, lambda2 "
       << m[3] << (m[4] < 0 ? "" : "+") << m[4] << "i; dip separation " << m[8] << " (target "
       << goal.separation << "); dip depths " << m[9] << " / " << m[10];
    res.report = os.str();
    return res;
}

std::vector<double> rederive_metrics(const OptimizationResult& result, const EITGoal& goal) {
    return eit_metrics(derive_level_scheme(result.stack, result.geom, result.layers), goal);
}

std::vector<double> rederive_metrics(const OptimizationResult& result, const SpectralGoal& goal) {
    return spectral_metrics(derive_level_scheme(result.stack, result.geom, result.layers), goal);
}

}  // namespace nucav
