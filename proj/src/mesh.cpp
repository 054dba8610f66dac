#include "acidfront/mesh.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace acidfront {

double Mesh::signed_area(int t) const {
    const auto& tri = triangles[t];
    Vec2 a = nodes[tri[0]], b = nodes[tri[1]], c = nodes[tri[2]];
    return 0.5 * cross(b - a, c - a);
}

Vec2 Mesh::basis_gradient(int t, int k) const {
    const auto& tri = triangles[t];
    // grad phi_k = rot90(opposite edge) / (2 |T|)
    Vec2 p = nodes[tri[(k + 1) % 3]];
    Vec2 q = nodes[tri[(k + 2) % 3]];
    double inv = 1.0 / (2.0 * signed_area(t));
    return {inv * (p.y - q.y), inv * (q.x - p.x)};
}

double Mesh::diameter(int t) const {
    const auto& tri = triangles[t];
    double d = 0.0;
    for (int k = 0; k < 3; ++k)
        d = std::max(d, norm(nodes[tri[(k + 1) % 3]] - nodes[tri[k]]));
    return d;
}

double Mesh::edge_length(int e) const {
    return norm(nodes[edges[e][1]] - nodes[edges[e][0]]);
}

Vec2 Mesh::edge_normal(int t, int k) const {
    const auto& tri = triangles[t];
    Vec2 a = nodes[tri[k]], b = nodes[tri[(k + 1) % 3]];
    Vec2 tang = b - a;
    double len = norm(tang);
    // ccw triangle: outward normal is the tangent rotated -90 degrees
    return {tang.y / len, -tang.x / len};
}

void Mesh::build_connectivity() {
    edges.clear();
    edge_tris.clear();
    boundary_edge.clear();
    tri_edges.assign(triangles.size(), {-1, -1, -1});

    std::map<std::pair<int, int>, int> lookup;
    for (int t = 0; t < num_triangles(); ++t) {
        for (int k = 0; k < 3; ++k) {
            int a = triangles[t][k], b = triangles[t][(k + 1) % 3];
            auto key = std::minmax(a, b);
            auto it = lookup.find(key);
            int e;
            if (it == lookup.end()) {
                e = num_edges();
                lookup.emplace(key, e);
                edges.push_back({key.first, key.second});
                edge_tris.push_back({t, -1});
            } else {
                e = it->second;
                if (edge_tris[e][1] != -1)
                    throw std::runtime_error("mesh: edge shared by more than two triangles");
                edge_tris[e][1] = t;
            }
            tri_edges[t][k] = e;
        }
    }
    boundary_edge.resize(edges.size());
    for (int e = 0; e < num_edges(); ++e) boundary_edge[e] = (edge_tris[e][1] == -1);
}

void Mesh::assign_longest_refinement_edges() {
    refinement_edge.assign(triangles.size(), 0);
    for (int t = 0; t < num_triangles(); ++t) {
        double best = -1.0;
        for (int k = 0; k < 3; ++k) {
            double len = norm(nodes[triangles[t][(k + 1) % 3]] - nodes[triangles[t][k]]);
            if (len > best + 1e-14) {
                best = len;
                refinement_edge[t] = k;
            }
        }
    }
}

void Mesh::check_invariants() const {
    for (const auto& p : nodes)
        if (p.x < -1e-12 || p.x > 1.0 + 1e-12 || p.y < -1e-12 || p.y > 1.0 + 1e-12)
            throw std::runtime_error("mesh: node outside the unit square");
    for (int t = 0; t < num_triangles(); ++t)
        if (signed_area(t) <= 0.0)
            throw std::runtime_error("mesh: non-positive triangle area");
    for (int t = 0; t < num_triangles(); ++t) {
        for (int k = 0; k < 3; ++k) {
            int e = tri_edges[t][k];
            if (e < 0 || e >= num_edges())
                throw std::runtime_error("mesh: dangling edge reference");
            if (edge_tris[e][0] != t && edge_tris[e][1] != t)
                throw std::runtime_error("mesh: edge does not reference triangle back");
        }
    }
    for (int e = 0; e < num_edges(); ++e) {
        int count = (edge_tris[e][0] != -1) + (edge_tris[e][1] != -1);
        if (boundary_edge[e] ? count != 1 : count != 2)
            throw std::runtime_error("mesh: conformity violated");
    }
    // hanging nodes: every node must coincide with an edge endpoint wherever
    // it touches an edge
    for (int e = 0; e < num_edges(); ++e) {
        Vec2 a = nodes[edges[e][0]], b = nodes[edges[e][1]];
        double len = norm(b - a);
        for (int v = 0; v < num_nodes(); ++v) {
            if (v == edges[e][0] || v == edges[e][1]) continue;
            Vec2 p = nodes[v];
            double t = dot(p - a, b - a) / (len * len);
            if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
            double dist = std::abs(cross(b - a, p - a)) / len;
            if (dist < 1e-12)
                throw std::runtime_error("mesh: hanging node detected");
        }
    }
}

Mesh make_uniform_mesh(int n) {
    if (n < 1) throw std::invalid_argument("make_uniform_mesh: n must be positive");
    Mesh m;
    m.nodes.reserve(static_cast<size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            m.nodes.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            // diagonal from lower-left to upper-right
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    m.build_connectivity();
    m.assign_longest_refinement_edges();
    return m;
}

std::set<int> bulk_mark(const std::vector<double>& eta_sq, double theta) {
    if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("bulk_mark: theta outside [0,1]");
    double total = std::accumulate(eta_sq.begin(), eta_sq.end(), 0.0);
    std::vector<int> order(eta_sq.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (eta_sq[a] != eta_sq[b]) return eta_sq[a] > eta_sq[b];
        return a < b;
    });
    std::set<int> marked;
    double acc = 0.0;
    for (int t : order) {
        if (acc >= theta * total) break;
        if (eta_sq[t] <= 0.0) break;
        marked.insert(t);
        acc += eta_sq[t];
    }
    return marked;
}

namespace {

// child triangle with an optional precomputed refinement edge (-1 = recompute)
struct Child {
    std::array<int, 3> tri;
    int ref_edge;
};

}  // namespace

Mesh rgb_refine(const Mesh& mesh, const std::set<int>& marked) {
    for (int t : marked)
        if (t < 0 || t >= mesh.num_triangles())
            throw std::invalid_argument("rgb_refine: marked index out of range");
    if (marked.empty()) return mesh;

    std::vector<bool> edge_marked(mesh.num_edges(), false);
    for (int t : marked)
        for (int k = 0; k < 3; ++k) edge_marked[mesh.tri_edges[t][k]] = true;

    // closure: a triangle with any marked edge must have its refinement edge marked
    bool changed = true;
    while (changed) {
        changed = false;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            bool any = edge_marked[mesh.tri_edges[t][0]] || edge_marked[mesh.tri_edges[t][1]] ||
                       edge_marked[mesh.tri_edges[t][2]];
            int ref = mesh.tri_edges[t][mesh.refinement_edge[t]];
            if (any && !edge_marked[ref]) {
                edge_marked[ref] = true;
                changed = true;
            }
        }
    }

    Mesh out;
    out.nodes = mesh.nodes;
    std::vector<int> midpoint(mesh.num_edges(), -1);
    for (int e = 0; e < mesh.num_edges(); ++e) {
        if (!edge_marked[e]) continue;
        Vec2 mid = 0.5 * (mesh.nodes[mesh.edges[e][0]] + mesh.nodes[mesh.edges[e][1]]);
        midpoint[e] = out.num_nodes();
        out.nodes.push_back(mid);
    }

    std::vector<Child> children;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        int r = mesh.refinement_edge[t];
        const auto& tri = mesh.triangles[t];
        int n_marked = 0;
        for (int k = 0; k < 3; ++k) n_marked += edge_marked[mesh.tri_edges[t][k]] ? 1 : 0;

        if (n_marked == 0) {
            children.push_back({tri, r});
            continue;
        }
        // relabel so the refinement edge is (a, b), opposite vertex o
        int a = tri[r], b = tri[(r + 1) % 3], o = tri[(r + 2) % 3];
        int m = midpoint[mesh.tri_edges[t][r]];
        int m_bo = midpoint[mesh.tri_edges[t][(r + 1) % 3]];
        int m_oa = midpoint[mesh.tri_edges[t][(r + 2) % 3]];

        if (n_marked == 3) {  // red
            children.push_back({{a, m, m_oa}, -1});
            children.push_back({{m, b, m_bo}, -1});
            children.push_back({{m_oa, m_bo, o}, -1});
            children.push_back({{m, m_bo, m_oa}, -1});
        } else if (n_marked == 2) {  // blue
            if (m_bo != -1) {
                children.push_back({{a, m, o}, -1});
                children.push_back({{m, b, m_bo}, -1});
                children.push_back({{m, m_bo, o}, -1});
            } else {
                children.push_back({{a, m, m_oa}, -1});
                children.push_back({{m, o, m_oa}, -1});
                children.push_back({{m, b, o}, -1});
            }
        } else {  // green: closure guarantees the single marked edge is (a, b)
            children.push_back({{a, m, o}, -1});
            children.push_back({{m, b, o}, -1});
        }
    }

    out.triangles.reserve(children.size());
    for (const auto& c : children) out.triangles.push_back(c.tri);
    out.build_connectivity();
    out.assign_longest_refinement_edges();
    for (size_t i = 0; i < children.size(); ++i)
        if (children[i].ref_edge >= 0) out.refinement_edge[i] = children[i].ref_edge;
    return out;
}

}  // namespace acidfront
