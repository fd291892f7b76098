#include "nucav/os.hpp"

#include <algorithm>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "nucav/errors.hpp"
#include "nucav/parallel.hpp"

namespace nucav {

std::size_t ObservableSpace::observable_index(const std::string& name) const {
    const auto it = std::find(observable_names.begin(), observable_names.end(), name);
    if (it == observable_names.end()) throw DomainError("observable not sampled: " + name);
    return static_cast<std::size_t>(it - observable_names.begin());
}

namespace {

OSSample evaluate(const CavityParameterization& param, const std::vector<std::string>& names,
                  const std::vector<double>& x) {
    OSSample s;
    s.params = x;
    try {
        const auto obs = evaluate_observables(param.scheme(x), names);
        s.observables = obs.values;
        s.capped = obs.capped;
        s.degenerate = obs.degenerate;
    } catch (const std::exception&) {
        s.evaluated = false;
        s.observables.assign(names.size(), std::numeric_limits<double>::quiet_NaN());
    }
    return s;
}

}  // namespace

ObservableSpace sample_os(const CavityParameterization& param,
                          const std::vector<std::string>& observables, const OSOptions& options) {
    if (options.budget < 1) throw DomainError("budget >= 1 required");
    if (observables.empty()) throw DomainError("no observables requested");
    if (!(options.interior_fraction > 0.0 && options.interior_fraction <= 1.0))
        throw DomainError("interior_fraction must lie in (0, 1]");
    validate_observables(observables);
    param.validate();
    const Box box = param.bounds();
    const std::size_t dim = box.dim();
    const std::size_t m = observables.size();

    ObservableSpace space;
    space.observable_names = observables;
    for (const auto& p : param.params) space.param_names.push_back(p.name);

    auto n_interior = static_cast<std::size_t>(
        std::ceil(options.interior_fraction * static_cast<double>(options.budget)));
    n_interior = std::clamp<std::size_t>(n_interior, 1, options.budget);

    std::vector<std::vector<double>> points(n_interior, std::vector<double>(dim));
    if (dim > 0) {
        boost::random::sobol qrng(dim);
        qrng.seed(options.seed);  // skips ahead; keeps runs with different seeds distinct
        const double scale = std::ldexp(1.0, -64);
        for (auto& x : points)
            for (std::size_t j = 0; j < dim; ++j) {
                const double u = static_cast<double>(qrng()) * scale;
                x[j] = box.lo[j] + u * (box.hi[j] - box.lo[j]);
            }
    }
    space.samples.resize(n_interior);
    parallel_for(n_interior, [&](std::size_t i) {
        space.samples[i] = evaluate(param, observables, points[i]);
    });

    const std::size_t remaining = options.budget - n_interior;
    if (remaining == 0 || dim == 0) return space;

    // Range normalization from the interior cloud.
    std::vector<double> lo(m, std::numeric_limits<double>::infinity());
    std::vector<double> hi(m, -std::numeric_limits<double>::infinity());
    for (const auto& s : space.samples) {
        if (!s.evaluated) continue;
        for (std::size_t j = 0; j < m; ++j) {
            lo[j] = std::min(lo[j], s.observables[j]);
            hi[j] = std::max(hi[j], s.observables[j]);
        }
    }
    std::vector<double> scale(m, 1.0);
    for (std::size_t j = 0; j < m; ++j)
        if (std::isfinite(lo[j]) && hi[j] > lo[j]) scale[j] = hi[j] - lo[j];

    std::size_t n_dir = options.directions;
    if (n_dir == 0) n_dir = std::max<std::size_t>(2 * m, std::min<std::size_t>(256, remaining / 200));
    n_dir = std::min(n_dir, remaining);
    const std::size_t per_dir = remaining / n_dir;
    if (per_dir < 2) n_dir = std::max<std::size_t>(1, remaining / 2);

    std::vector<std::vector<double>> dirs(n_dir, std::vector<double>(m, 0.0));
    {
        std::mt19937_64 rng(options.seed);
        std::normal_distribution<double> normal;
        for (std::size_t d = 0; d < n_dir; ++d) {
            if (d < 2 * m) {
                dirs[d][d / 2] = (d % 2 == 0) ? 1.0 : -1.0;
                continue;
            }
            double norm = 0.0;
            for (auto& v : dirs[d]) {
                v = normal(rng);
                norm += v * v;
            }
            norm = std::sqrt(norm);
            for (auto& v : dirs[d]) v /= norm;
        }
    }

    std::vector<std::vector<OSSample>> pushed(n_dir);
    const std::size_t base = remaining / n_dir, extra = remaining % n_dir;
    parallel_for(n_dir, [&](std::size_t d) {
        const auto& dir = dirs[d];
        auto score = [&](const OSSample& s) {
            if (!s.evaluated) return -std::numeric_limits<double>::infinity();
            double v = 0.0;
            for (std::size_t j = 0; j < m; ++j) v += dir[j] * s.observables[j] / scale[j];
            return v;
        };
        std::size_t seed_index = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_interior; ++i) {
            const double v = score(space.samples[i]);
            if (v > best) {
                best = v;
                seed_index = i;
            }
        }
        auto& local = pushed[d];
        const Objective f = [&](const std::vector<double>& x) {
            local.push_back(evaluate(param, observables, x));
            const double v = score(local.back());
            return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
        };
        const std::size_t budget = base + (d < extra ? 1 : 0);
        const auto outcome =
            nelder_mead(f, box, space.samples[seed_index].params, budget, 0.1, 1e-10, false);
        for (auto& s : local)
            if (s.params == outcome.x) {
                s.boundary = true;
                break;
            }
    });
    for (auto& batch : pushed)
        for (auto& s : batch) space.samples.push_back(std::move(s));
    return space;
}

OSBoundary os_boundary(const ObservableSpace& space, const std::vector<std::string>& axes,
                       std::size_t slabs) {
    if (axes.size() != 2 && axes.size() != 3)
        throw DomainError("boundary projection needs 2 or 3 observables");
    std::vector<std::size_t> idx;
    for (const auto& a : axes) idx.push_back(space.observable_index(a));
    std::vector<const OSSample*> valid;
    for (const auto& s : space.samples)
        if (s.evaluated) valid.push_back(&s);
    if (valid.size() < 10) throw DomainError("boundary needs at least 10 evaluated samples");

    OSBoundary out;
    out.axes = axes;
    auto project = [&](const std::vector<const OSSample*>& pts) {
        std::vector<Point2> p;
        p.reserve(pts.size());
        for (const auto* s : pts) p.push_back({s->observables[idx[0]], s->observables[idx[1]]});
        return p;
    };
    out.outline = alpha_shape(project(valid));
    out.degenerate = out.outline.degenerate;
    if (axes.size() == 2) return out;

    if (slabs == 0) throw DomainError("slab count must be positive");
    double zlo = std::numeric_limits<double>::infinity(), zhi = -zlo;
    for (const auto* s : valid) {
        zlo = std::min(zlo, s->observables[idx[2]]);
        zhi = std::max(zhi, s->observables[idx[2]]);
    }
    if (!(zhi > zlo)) {
        out.degenerate = true;
        return out;
    }
    const double w = (zhi - zlo) / static_cast<double>(slabs);
    for (std::size_t k = 0; k < slabs; ++k) {
        OSSlice slice;
        slice.lo = zlo + w * static_cast<double>(k);
        slice.hi = (k + 1 == slabs) ? zhi : slice.lo + w;
        std::vector<const OSSample*> in;
        for (const auto* s : valid) {
            const double z = s->observables[idx[2]];
            if (z >= slice.lo && (z < slice.hi || (k + 1 == slabs && z <= slice.hi))) in.push_back(s);
        }
        if (in.size() >= 10) slice.outline = alpha_shape(project(in));
        else slice.outline.degenerate = true;
        out.slices.push_back(std::move(slice));
    }
    return out;
}

std::vector<std::vector<double>> angle_trajectory(const CavityStack& stack,
                                                  const ResonantLayerSet& layers,
                                                  const std::vector<std::string>& observables,
                                                  const std::vector<double>& theta_mrad,
                                                  double photon_energy) {
    validate_observables(observables);
    std::vector<std::vector<double>> out(theta_mrad.size());
    parallel_for(theta_mrad.size(), [&](std::size_t i) {
        const IncidenceGeometry geom{cplx(theta_mrad[i] * 1e-3, 0.0), photon_energy};
        out[i] = evaluate_observables(derive_level_scheme(stack, geom, layers), observables).values;
    });
    return out;
}

}  // namespace nucav
