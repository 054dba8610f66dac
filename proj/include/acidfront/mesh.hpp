#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace acidfront {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Conforming triangulation of the unit square. Triangles are stored
/// counter-clockwise; edges carry adjacency back-references so flux jumps
/// and refinement closure can walk the mesh in O(1) per edge.
class Mesh {
public:
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;   // ccw node indices
    std::vector<std::array<int, 2>> edges;       // node pairs, lo < hi
    std::vector<std::array<int, 2>> edge_tris;   // adjacent triangles, second = -1 on boundary
    std::vector<bool> boundary_edge;
    std::vector<std::array<int, 3>> tri_edges;   // edge index of local edge k = (v_k, v_{k+1})
    std::vector<int> refinement_edge;            // local edge index, per triangle

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }

    double signed_area(int t) const;
    double area(int t) const { return signed_area(t); }
    /// Gradient of the P1 basis function attached to local vertex k of triangle t.
    Vec2 basis_gradient(int t, int k) const;
    /// Longest edge length of triangle t.
    double diameter(int t) const;
    double edge_length(int e) const;
    /// Outward unit normal of local edge k of triangle t.
    Vec2 edge_normal(int t, int k) const;

    /// Rebuilds edges, adjacency and boundary flags from the triangle list.
    void build_connectivity();
    /// Sets every triangle's refinement edge to its longest edge
    /// (ties broken by lowest local index).
    void assign_longest_refinement_edges();

    /// Throws if any structural invariant is violated (positive areas,
    /// conformity, consistent back-references, coordinates inside [0,1]^2).
    void check_invariants() const;
};

/// n x n grid of squares on [0,1]^2, each split along the lower-left to
/// upper-right diagonal. 2n^2 triangles, (n+1)^2 nodes.
Mesh make_uniform_mesh(int n);

/// Greedy bulk (Doerfler) marking: smallest set of triangles, by descending
/// eta^2 with ties broken by ascending index, whose squared indicators sum
/// to at least theta times the total.
std::set<int> bulk_mark(const std::vector<double>& eta_sq, double theta);

/// Red-green-blue refinement of the marked triangles with conforming
/// closure. All input nodes persist with identical coordinates.
Mesh rgb_refine(const Mesh& mesh, const std::set<int>& marked);

}  // namespace acidfront
