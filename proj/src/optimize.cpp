#include "nucav/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "nucav/errors.hpp"
#include "nucav/parallel.hpp"

namespace nucav {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double guarded(const Objective& f, const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

struct Tracker {
    OptimizeOutcome& out;
    bool keep;
    void record(const std::vector<double>& x, double v) {
        ++out.evaluations;
        if (!std::isfinite(v)) ++out.rejected;
        if (keep) out.trace.push_back({x, v});
        if (out.x.empty() || v < out.value) {
            out.x = x;
            out.value = v;
        }
    }
};
}  // namespace

void Box::validate() const {
    if (lo.empty() || lo.size() != hi.size()) throw DomainError("box bounds are inconsistent");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i])
            throw DomainError("box bounds must be finite with lo <= hi");
}

std::vector<double> Box::clamp(std::vector<double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

OptimizeOutcome nelder_mead(const Objective& f, const Box& box, std::vector<double> x0,
                            std::size_t budget, double initial_step, double xtol,
                            bool keep_trace) {
    box.validate();
    OptimizeOutcome out;
    out.value = kInf;
    Tracker track{out, keep_trace};
    const std::size_t n = box.dim();
    std::vector<double> scale(n);
    for (std::size_t i = 0; i < n; ++i) scale[i] = box.hi[i] - box.lo[i];
    auto eval = [&](const std::vector<double>& x) {
        const double v = guarded(f, x);
        track.record(x, v);
        return v;
    };

    std::vector<double> start = box.clamp(std::move(x0));
    double step = initial_step;
    while (out.evaluations + n + 1 <= budget) {
        std::vector<std::vector<double>> simplex{start};
        for (std::size_t i = 0; i < n; ++i) {
            auto p = start;
            const double h = std::max(step * scale[i], 1e-12);
            p[i] = p[i] + h <= box.hi[i] ? p[i] + h : p[i] - h;
            simplex.push_back(box.clamp(p));
        }
        std::vector<double> fv;
        for (const auto& p : simplex) fv.push_back(eval(p));

        bool collapsed = false;
        while (out.evaluations + 2 <= budget) {
            std::vector<std::size_t> idx(n + 1);
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
            std::vector<std::vector<double>> s2;
            std::vector<double> f2;
            for (auto i : idx) {
                s2.push_back(simplex[i]);
                f2.push_back(fv[i]);
            }
            simplex.swap(s2);
            fv.swap(f2);

            double size = 0.0;
            for (std::size_t i = 1; i <= n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    size = std::max(size, std::abs(simplex[i][j] - simplex[0][j]) /
                                              std::max(scale[j], 1e-300));
            if (size < xtol) {
                collapsed = true;
                break;
            }

            std::vector<double> centroid(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
            auto along = [&](double t) {
                std::vector<double> p(n);
                for (std::size_t j = 0; j < n; ++j)
                    p[j] = centroid[j] + t * (simplex[n][j] - centroid[j]);
                return box.clamp(p);
            };
            const auto xr = along(-1.0);
            const double fr = eval(xr);
            if (fr < fv[0]) {
                const auto xe = along(-2.0);
                const double fe = eval(xe);
                if (fe < fr) {
                    simplex[n] = xe;
                    fv[n] = fe;
                } else {
                    simplex[n] = xr;
                    fv[n] = fr;
                }
            } else if (fr < fv[n - 1]) {
                simplex[n] = xr;
                fv[n] = fr;
            } else {
                const bool outside = fr < fv[n];
                const auto xc = along(outside ? -0.5 : 0.5);
                const double fc = eval(xc);
                if (fc < (outside ? fr : fv[n])) {
                    simplex[n] = xc;
                    fv[n] = fc;
                } else {
                    if (out.evaluations + n > budget) break;
                    for (std::size_t i = 1; i <= n; ++i) {
                        for (std::size_t j = 0; j < n; ++j)
                            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                        simplex[i] = box.clamp(simplex[i]);
                        fv[i] = eval(simplex[i]);
                    }
                }
            }
        }
        if (!collapsed) break;
        // Restart around the best point with a smaller simplex.
        start = out.x;
        step *= 0.1;
        if (step * 1e-3 < xtol) break;
    }
    return out;
}

OptimizeOutcome minimize(const Objective& f, const Box& box, const OptimizerOptions& options) {
    box.validate();
    if (options.budget < 1) throw DomainError("optimizer budget must be >= 1");
    const std::size_t n = box.dim();
    std::size_t pop = options.population;
    if (pop == 0) pop = std::clamp<std::size_t>(10 * n, 20, 80);
    pop = std::max<std::size_t>(pop, 4);

    OptimizeOutcome out;
    out.value = kInf;
    Tracker track{out, options.keep_trace};
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto global_budget = static_cast<std::size_t>(
        std::floor(options.global_fraction * static_cast<double>(options.budget)));
    std::vector<std::vector<double>> members;
    std::vector<double> values;

    auto evaluate_batch = [&](const std::vector<std::vector<double>>& xs) {
        std::vector<double> v(xs.size());
        parallel_for(xs.size(), [&](std::size_t i) { v[i] = guarded(f, xs[i]); });
        for (std::size_t i = 0; i < xs.size(); ++i) track.record(xs[i], v[i]);
        return v;
    };

    if (global_budget >= pop) {
        std::vector<std::vector<double>> init(pop, std::vector<double>(n));
        for (auto& x : init)
            for (std::size_t j = 0; j < n; ++j) x[j] = box.lo[j] + unit(rng) * (box.hi[j] - box.lo[j]);
        values = evaluate_batch(init);
        members = std::move(init);
        while (out.evaluations + pop <= global_budget) {
            std::vector<std::vector<double>> trial(pop, std::vector<double>(n));
            for (std::size_t i = 0; i < pop; ++i) {
                std::size_t a, b, c;
                do a = rng() % pop; while (a == i);
                do b = rng() % pop; while (b == i || b == a);
                do c = rng() % pop; while (c == i || c == a || c == b);
                const std::size_t forced = rng() % n;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == forced || unit(rng) < options.crossover) {
                        double v = members[a][j] + options.mutation * (members[b][j] - members[c][j]);
                        // Bounce back inside the box.
                        if (v < box.lo[j]) v = box.lo[j] + unit(rng) * (members[a][j] - box.lo[j]);
                        if (v > box.hi[j]) v = box.hi[j] - unit(rng) * (box.hi[j] - members[a][j]);
                        trial[i][j] = v;
                    } else {
                        trial[i][j] = members[i][j];
                    }
                }
            }
            const auto tv = evaluate_batch(trial);
            for (std::size_t i = 0; i < pop; ++i)
                if (tv[i] <= values[i]) {
                    members[i] = trial[i];
                    values[i] = tv[i];
                }
        }
    }

    std::vector<double> start = out.x;
    if (start.empty()) {
        start.resize(n);
        for (std::size_t j = 0; j < n; ++j) start[j] = 0.5 * (box.lo[j] + box.hi[j]);
    }
    if (options.budget > out.evaluations) {
        const OptimizeOutcome local = nelder_mead(f, box, start, options.budget - out.evaluations,
                                                  0.02, 1e-12, options.keep_trace);
        for (const auto& rec : local.trace) out.trace.push_back(rec);
        out.evaluations += local.evaluations;
        out.rejected += local.rejected;
        if (!local.x.empty() && local.value < out.value) {
            out.x = local.x;
            out.value = local.value;
        }
    }
    return out;
}

}  // namespace nucav
