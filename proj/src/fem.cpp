#include "acidfront/fem.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace acidfront {

namespace {

SparseMatrix from_triplets(int n, std::vector<Eigen::Triplet<double>>& trip) {
    SparseMatrix A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
}

}  // namespace

SparseMatrix assemble_mass(const Mesh& mesh) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        double a = mesh.area(t);
        const auto& tri = mesh.triangles[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(tri[i], tri[j], (i == j ? 2.0 : 1.0) * a / 12.0);
    }
    return from_triplets(mesh.num_nodes(), trip);
}

SparseMatrix assemble_weighted_mass(const Mesh& mesh, const NodalField& coeff) {
    if (coeff.size() != mesh.num_nodes())
        throw std::invalid_argument("assemble_weighted_mass: coefficient size mismatch");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        double a = mesh.area(t);
        const auto& tri = mesh.triangles[t];
        double c = (coeff[tri[0]] + coeff[tri[1]] + coeff[tri[2]]) / 3.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(tri[i], tri[j], c * (i == j ? 2.0 : 1.0) * a / 12.0);
    }
    return from_triplets(mesh.num_nodes(), trip);
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const NodalField& coeff) {
    if (coeff.size() != mesh.num_nodes())
        throw std::invalid_argument("assemble_stiffness: coefficient size mismatch");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        double a = mesh.area(t);
        const auto& tri = mesh.triangles[t];
        double c = (coeff[tri[0]] + coeff[tri[1]] + coeff[tri[2]]) / 3.0;
        c = std::max(c, 0.0);
        Vec2 g[3];
        for (int k = 0; k < 3; ++k) g[k] = mesh.basis_gradient(t, k);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(tri[i], tri[j], c * a * dot(g[i], g[j]));
    }
    return from_triplets(mesh.num_nodes(), trip);
}

SparseMatrix assemble_stiffness_unit(const Mesh& mesh) {
    return assemble_stiffness(mesh, NodalField::Ones(mesh.num_nodes()));
}

NodalField solve_spd(const SparseMatrix& A, const NodalField& b, double tol, int max_iter) {
    const int n = static_cast<int>(A.rows());
    if (max_iter < 0) max_iter = 10 * n;
    NodalField inv_diag(n);
    for (int i = 0; i < n; ++i) {
        double d = A.coeff(i, i);
        inv_diag[i] = (d > 0.0) ? 1.0 / d : 1.0;
    }
    NodalField x = NodalField::Zero(n);
    double bnorm = b.norm();
    if (bnorm == 0.0) return x;

    NodalField r = b;
    NodalField z = inv_diag.cwiseProduct(r);
    NodalField p = z;
    double rz = r.dot(z);
    for (int it = 0; it < max_iter; ++it) {
        if (r.norm() <= tol * bnorm) return x;
        NodalField Ap = A * p;
        double alpha = rz / p.dot(Ap);
        x += alpha * p;
        r -= alpha * Ap;
        z = inv_diag.cwiseProduct(r);
        double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    if (r.norm() <= tol * bnorm) return x;
    throw std::runtime_error("solve_spd: CG failed to converge for " + std::to_string(n) +
                             "-dim system (relative residual " +
                             std::to_string(r.norm() / bnorm) + ")");
}

namespace {

// barycentric coordinates of p in triangle t
std::array<double, 3> barycentric(const Mesh& m, int t, Vec2 p) {
    const auto& tri = m.triangles[t];
    Vec2 a = m.nodes[tri[0]], b = m.nodes[tri[1]], c = m.nodes[tri[2]];
    double det = cross(b - a, c - a);
    double l1 = cross(p - a, c - a) / det;
    double l2 = cross(b - a, p - a) / det;
    return {1.0 - l1 - l2, l1, l2};
}

}  // namespace

NodalField transfer(const NodalField& field, const Mesh& from, const Mesh& to) {
    if (field.size() != from.num_nodes())
        throw std::invalid_argument("transfer: field size mismatch");
    NodalField out(to.num_nodes());
    int guess = 0;
    for (int v = 0; v < to.num_nodes(); ++v) {
        Vec2 p = to.nodes[v];
        int t = guess;
        int found = -1;
        std::array<double, 3> lam{};
        for (int steps = 0; steps <= from.num_triangles(); ++steps) {
            lam = barycentric(from, t, p);
            int worst = 0;
            for (int k = 1; k < 3; ++k)
                if (lam[k] < lam[worst]) worst = k;
            if (lam[worst] >= -1e-12) {
                found = t;
                break;
            }
            // step across the edge opposite the most negative coordinate
            int e = from.tri_edges[t][(worst + 1) % 3];
            int next = (from.edge_tris[e][0] == t) ? from.edge_tris[e][1] : from.edge_tris[e][0];
            if (next < 0) break;  // hit the boundary, fall back to scanning
            t = next;
        }
        if (found < 0) {
            double best = -1e300;
            for (int s = 0; s < from.num_triangles(); ++s) {
                auto l = barycentric(from, s, p);
                double m = std::min({l[0], l[1], l[2]});
                if (m > best) {
                    best = m;
                    found = s;
                    lam = l;
                }
            }
            if (best < -1e-10)
                throw std::runtime_error("transfer: target node outside source mesh");
        }
        const auto& tri = from.triangles[found];
        out[v] = lam[0] * field[tri[0]] + lam[1] * field[tri[1]] + lam[2] * field[tri[2]];
        guess = found;
    }
    return out;
}

}  // namespace acidfront
