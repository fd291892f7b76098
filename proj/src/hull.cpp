#include "nucav/hull.hpp"

#include <algorithm>
#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "nucav/errors.hpp"

namespace nucav {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false>;  // counter-clockwise

namespace {

BgPolygon to_polygon(const std::vector<Point2>& ring) {
    BgPolygon poly;
    for (const auto& p : ring) bg::append(poly.outer(), BgPoint(p.x, p.y));
    if (!ring.empty()) bg::append(poly.outer(), BgPoint(ring.front().x, ring.front().y));
    bg::correct(poly);
    return poly;
}

struct Circle {
    double cx, cy, r2;
};

Circle circumcircle(const Point2& a, const Point2& b, const Point2& c) {
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if (std::abs(d) < 1e-300) return {0.0, 0.0, std::numeric_limits<double>::infinity()};
    const double a2 = a.x * a.x + a.y * a.y, b2 = b.x * b.x + b.y * b.y, c2 = c.x * c.x + c.y * c.y;
    const double ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    const double uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    return {ux, uy, (a.x - ux) * (a.x - ux) + (a.y - uy) * (a.y - uy)};
}

using Edge = std::pair<std::size_t, std::size_t>;
Edge edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

}  // namespace

std::vector<std::array<std::size_t, 3>> delaunay(const std::vector<Point2>& points) {
    const std::size_t n = points.size();
    if (n < 3) return {};
    double minx = points[0].x, maxx = minx, miny = points[0].y, maxy = miny;
    for (const auto& p : points) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double span = std::max({maxx - minx, maxy - miny, 1e-300});
    const double mx = 0.5 * (minx + maxx), my = 0.5 * (miny + maxy);
    std::vector<Point2> pts = points;
    pts.push_back({mx - 20.0 * span, my - span});
    pts.push_back({mx, my + 20.0 * span});
    pts.push_back({mx + 20.0 * span, my - span});

    struct Tri {
        std::array<std::size_t, 3> v;
        Circle c;
    };
    std::vector<Tri> tris{{{n, n + 1, n + 2}, circumcircle(pts[n], pts[n + 1], pts[n + 2])}};
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = pts[i];
        std::map<Edge, int> boundary;
        std::vector<Tri> keep;
        keep.reserve(tris.size() + 2);
        for (const auto& t : tris) {
            const double dx = p.x - t.c.cx, dy = p.y - t.c.cy;
            if (dx * dx + dy * dy < t.c.r2) {
                for (int e = 0; e < 3; ++e) ++boundary[edge(t.v[e], t.v[(e + 1) % 3])];
            } else {
                keep.push_back(t);
            }
        }
        for (const auto& [e, count] : boundary) {
            if (count != 1) continue;
            keep.push_back({{e.first, e.second, i}, circumcircle(pts[e.first], pts[e.second], p)});
        }
        tris.swap(keep);
    }
    std::vector<std::array<std::size_t, 3>> out;
    for (const auto& t : tris)
        if (t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back(t.v);
    return out;
}

double ring_area(const std::vector<Point2>& ring) {
    if (ring.size() < 3) return 0.0;
    return std::abs(bg::area(to_polygon(ring)));
}

bool ring_covers(const std::vector<Point2>& ring, Point2 p) {
    if (ring.size() < 3) return false;
    return bg::covered_by(BgPoint(p.x, p.y), to_polygon(ring));
}

double distance_to_ring(const std::vector<Point2>& ring, Point2 p) {
    if (ring.empty()) return std::numeric_limits<double>::infinity();
    bg::model::linestring<BgPoint> line;
    for (const auto& q : ring) bg::append(line, BgPoint(q.x, q.y));
    bg::append(line, BgPoint(ring.front().x, ring.front().y));
    return bg::distance(BgPoint(p.x, p.y), line);
}

double containment_fraction(const Boundary2D& inner, const Boundary2D& outer, double tol) {
    if (inner.ring.empty()) return 1.0;
    const BgPolygon poly = to_polygon(outer.ring);
    std::size_t inside = 0;
    for (const auto& p : inner.ring)
        if (bg::covered_by(BgPoint(p.x, p.y), poly) || distance_to_ring(outer.ring, p) <= tol)
            ++inside;
    return static_cast<double>(inside) / static_cast<double>(inner.ring.size());
}

Boundary2D alpha_shape(const std::vector<Point2>& points, double alpha_radius,
                       std::size_t max_points) {
    if (points.size() < 3) throw DomainError("alpha shape needs at least 3 points");
    double minx = points[0].x, maxx = minx, miny = points[0].y, maxy = miny;
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DomainError("non-finite point");
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double sx = std::max(maxx - minx, 1e-300), sy = std::max(maxy - miny, 1e-300);

    // Thin onto a grid (one point per cell, the first seen) to bound the cost.
    const auto cells = static_cast<std::size_t>(
        std::max(8.0, std::floor(std::sqrt(static_cast<double>(max_points)) * 1.2)));
    std::unordered_map<std::size_t, std::size_t> occupied;
    std::vector<Point2> unit;
    for (const auto& p : points) {
        const Point2 u{(p.x - minx) / sx, (p.y - miny) / sy};
        const auto cx = std::min(cells - 1, static_cast<std::size_t>(u.x * static_cast<double>(cells)));
        const auto cy = std::min(cells - 1, static_cast<std::size_t>(u.y * static_cast<double>(cells)));
        if (occupied.emplace(cx * cells + cy, unit.size()).second) unit.push_back(u);
    }

    Boundary2D out;
    auto to_world = [&](const Point2& u) { return Point2{minx + u.x * sx, miny + u.y * sy}; };

    // Collinearity check on the normalized cloud.
    double mxu = 0, myu = 0;
    for (const auto& u : unit) {
        mxu += u.x;
        myu += u.y;
    }
    mxu /= static_cast<double>(unit.size());
    myu /= static_cast<double>(unit.size());
    double cxx = 0, cyy = 0, cxy = 0;
    for (const auto& u : unit) {
        cxx += (u.x - mxu) * (u.x - mxu);
        cyy += (u.y - myu) * (u.y - myu);
        cxy += (u.x - mxu) * (u.y - myu);
    }
    const double tr = cxx + cyy, det = cxx * cyy - cxy * cxy;
    const double lmin = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    if (unit.size() < 3 || maxx - minx <= 0.0 || maxy - miny <= 0.0 || lmin < 1e-12 * tr) {
        out.degenerate = true;
        std::size_t lo = 0, hi = 0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double a = points[i].x + points[i].y, b = points[lo].x + points[lo].y,
                         c = points[hi].x + points[hi].y;
            if (a < b) lo = i;
            if (a > c) hi = i;
        }
        out.ring = {points[lo], points[hi]};
        return out;
    }

    const auto tris = delaunay(unit);
    std::vector<double> radius(tris.size());
    std::vector<double> edges;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto& v = tris[t];
        radius[t] = std::sqrt(circumcircle(unit[v[0]], unit[v[1]], unit[v[2]]).r2);
        for (int e = 0; e < 3; ++e) {
            const auto& a = unit[v[e]];
            const auto& b = unit[v[(e + 1) % 3]];
            edges.push_back(std::hypot(a.x - b.x, a.y - b.y));
        }
    }
    std::nth_element(edges.begin(), edges.begin() + static_cast<long>(edges.size() / 2), edges.end());
    const double median = edges[edges.size() / 2];

    // Triangle adjacency through shared edges.
    std::map<Edge, std::vector<std::size_t>> by_edge;
    for (std::size_t t = 0; t < tris.size(); ++t)
        for (int e = 0; e < 3; ++e) by_edge[edge(tris[t][e], tris[t][(e + 1) % 3])].push_back(t);

    auto select = [&](double r) {
        std::vector<bool> keep(tris.size());
        for (std::size_t t = 0; t < tris.size(); ++t) keep[t] = radius[t] <= r;
        return keep;
    };
    auto acceptable = [&](const std::vector<bool>& keep) {
        std::vector<int> comp(tris.size(), -1);
        int ncomp = 0;
        std::size_t largest = 0, largest_size = 0;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (!keep[t] || comp[t] >= 0) continue;
            std::vector<std::size_t> stack{t};
            comp[t] = ncomp;
            std::size_t size = 0;
            while (!stack.empty()) {
                const auto u = stack.back();
                stack.pop_back();
                ++size;
                for (int e = 0; e < 3; ++e)
                    for (auto w : by_edge[edge(tris[u][e], tris[u][(e + 1) % 3])])
                        if (keep[w] && comp[w] < 0) {
                            comp[w] = ncomp;
                            stack.push_back(w);
                        }
            }
            if (size > largest_size) {
                largest_size = size;
                largest = static_cast<std::size_t>(ncomp);
            }
            ++ncomp;
        }
        if (ncomp == 0) return false;
        std::vector<bool> covered(unit.size(), false);
        for (std::size_t t = 0; t < tris.size(); ++t)
            if (keep[t] && comp[t] == static_cast<int>(largest))
                for (auto v : tris[t]) covered[v] = true;
        const auto n_cov = static_cast<double>(std::count(covered.begin(), covered.end(), true));
        return ncomp == 1 && n_cov >= 0.99 * static_cast<double>(unit.size());
    };

    std::vector<bool> keep;
    double chosen = alpha_radius;
    if (alpha_radius > 0.0) {
        keep = select(alpha_radius);
    } else {
        chosen = std::numeric_limits<double>::infinity();
        for (double c : {1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 64.0}) {
            auto k = select(c * median);
            if (acceptable(k)) {
                keep = std::move(k);
                chosen = c * median;
                break;
            }
        }
        if (keep.empty()) keep.assign(tris.size(), true);
    }
    out.alpha_radius = chosen;

    // Boundary edges: used by exactly one kept triangle, oriented with the triangle.
    std::map<Edge, int> count;
    std::map<std::size_t, std::vector<std::size_t>> next;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        if (!keep[t]) continue;
        auto v = tris[t];
        const auto& a = unit[v[0]];
        const auto& b = unit[v[1]];
        const auto& c = unit[v[2]];
        if ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) < 0.0) std::swap(v[1], v[2]);
        for (int e = 0; e < 3; ++e) ++count[edge(v[e], v[(e + 1) % 3])];
    }
    for (std::size_t t = 0; t < tris.size(); ++t) {
        if (!keep[t]) continue;
        auto v = tris[t];
        const auto& a = unit[v[0]];
        const auto& b = unit[v[1]];
        const auto& c = unit[v[2]];
        if ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) < 0.0) std::swap(v[1], v[2]);
        for (int e = 0; e < 3; ++e)
            if (count[edge(v[e], v[(e + 1) % 3])] == 1) next[v[e]].push_back(v[(e + 1) % 3]);
    }
    std::set<Edge> used;
    std::vector<std::vector<std::size_t>> rings;
    for (const auto& [start, outs] : next) {
        for (auto first : outs) {
            if (used.count({start, first})) continue;
            std::vector<std::size_t> ring{start};
            used.insert({start, first});
            std::size_t cur = first;
            std::size_t guard = 0;
            while (cur != start && guard++ < unit.size() + 5) {
                ring.push_back(cur);
                std::size_t nxt = cur;
                for (auto cand : next[cur])
                    if (!used.count({cur, cand})) {
                        nxt = cand;
                        break;
                    }
                if (nxt == cur) break;
                used.insert({cur, nxt});
                cur = nxt;
            }
            if (ring.size() >= 3) rings.push_back(std::move(ring));
        }
    }
    out.rings = rings.size();
    double best_area = -1.0;
    for (const auto& r : rings) {
        std::vector<Point2> world;
        for (auto v : r) world.push_back(to_world(unit[v]));
        double a = 0.0;
        for (std::size_t i = 0; i < world.size(); ++i) {
            const auto& p = world[i];
            const auto& q = world[(i + 1) % world.size()];
            a += 0.5 * (p.x * q.y - q.x * p.y);
        }
        if (a < 0.0) {
            out.holes.push_back(std::move(world));
        } else if (a > best_area) {
            best_area = a;
            out.ring = std::move(world);
        }
    }
    out.area = std::max(0.0, best_area);
    return out;
}

}  // namespace nucav
