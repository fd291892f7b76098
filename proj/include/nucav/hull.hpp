#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace nucav {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Boundary2D {
    std::vector<Point2> ring;  // outer boundary, counter-clockwise, not closed
    std::vector<std::vector<Point2>> holes;  // inner boundaries, clockwise
    double area = 0.0;         // enclosed by ring, holes not subtracted
    double alpha_radius = 0.0;  // in normalized (unit box) coordinates
    std::size_t rings = 0;      // boundary loops found (holes or separate pieces when > 1)
    bool degenerate = false;    // cloud is (nearly) collinear; ring holds the extreme points
};

// Delaunay triangulation (Bowyer-Watson); triangles index into points.
std::vector<std::array<std::size_t, 3>> delaunay(const std::vector<Point2>& points);

// Alpha shape of a planar cloud. Coordinates are scaled to the unit box before
// triangulating. alpha_radius <= 0 selects the smallest radius, from a ladder of
// multiples of the median Delaunay edge, whose triangles form a single
// connected region covering at least 99% of the points.
Boundary2D alpha_shape(const std::vector<Point2>& points, double alpha_radius = 0.0,
                       std::size_t max_points = 4000);

double ring_area(const std::vector<Point2>& ring);
bool ring_covers(const std::vector<Point2>& ring, Point2 p);
double distance_to_ring(const std::vector<Point2>& ring, Point2 p);

// Fraction of the vertices of inner that lie inside outer or within tol of it.
double containment_fraction(const Boundary2D& inner, const Boundary2D& outer, double tol);

}  // namespace nucav
