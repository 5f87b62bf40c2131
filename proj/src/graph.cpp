#include "hsn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hsn {

GraphTopology GraphTopology::fromEdges(Eigen::Index n, std::vector<Edge> edges) {
    if (n < 0) throw ValueError("node count must be non-negative");
    for (auto& e : edges) {
        if (e.i == e.j) throw ValueError("self loop on node " + std::to_string(e.i));
        if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
            throw ValueError("edge endpoint out of range: (" + std::to_string(e.i) + "," +
                             std::to_string(e.j) + ")");
        if (e.i > e.j) std::swap(e.i, e.j);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    GraphTopology g;
    g.n_ = n;
    g.edges_ = std::move(edges);
    g.degrees_ = Eigen::VectorXi::Zero(n);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * g.edges_.size());
    for (const auto& e : g.edges_) {
        g.degrees_[e.i] += 1;
        g.degrees_[e.j] += 1;
        triplets.emplace_back(e.i, e.j, 1.0);
        triplets.emplace_back(e.j, e.i, 1.0);
    }
    g.adjacency_.resize(n, n);
    g.adjacency_.setFromTriplets(triplets.begin(), triplets.end());
    g.adjacency_.makeCompressed();
    return g;
}

GraphTopology GraphTopology::fromAdjacency(const Eigen::Ref<const Eigen::MatrixXd>& a) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("adjacency matrix must be square");
    std::vector<Edge> edges;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (a(i, i) != 0.0) throw ValueError("adjacency diagonal must be zero");
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = a(i, j);
            if (v != a(j, i)) throw ValueError("adjacency matrix must be symmetric");
            if (v == 1.0)
                edges.push_back({static_cast<int>(i), static_cast<int>(j)});
            else if (v != 0.0)
                throw ValueError("adjacency entries must be 0 or 1");
        }
    }
    return fromEdges(n, std::move(edges));
}

Eigen::SparseMatrix<double> laplacian(const GraphTopology& g) {
    const Eigen::Index n = g.nodeCount();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * g.edgeList().size() + n);
    for (Eigen::Index i = 0; i < n; ++i)
        if (g.degrees()[i] > 0) triplets.emplace_back(i, i, double(g.degrees()[i]));
    for (const auto& e : g.edgeList()) {
        triplets.emplace_back(e.i, e.j, -1.0);
        triplets.emplace_back(e.j, e.i, -1.0);
    }
    Eigen::SparseMatrix<double> l(n, n);
    l.setFromTriplets(triplets.begin(), triplets.end());
    l.makeCompressed();
    return l;
}

namespace {

Eigen::SparseMatrix<double> normalizedLaplacian(const GraphTopology& g) {
    const Eigen::Index n = g.nodeCount();
    Eigen::VectorXd inv_sqrt_deg(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (g.degrees()[i] == 0) throw IsolatedNode(long(i));
        inv_sqrt_deg[i] = 1.0 / std::sqrt(double(g.degrees()[i]));
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * g.edgeList().size() + n);
    for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0);
    for (const auto& e : g.edgeList()) {
        const double w = -inv_sqrt_deg[e.i] * inv_sqrt_deg[e.j];
        triplets.emplace_back(e.i, e.j, w);
        triplets.emplace_back(e.j, e.i, w);
    }
    Eigen::SparseMatrix<double> l(n, n);
    l.setFromTriplets(triplets.begin(), triplets.end());
    l.makeCompressed();
    return l;
}

double powerIterationLambdaMax(const Eigen::SparseMatrix<double>& l, long max_iterations) {
    const Eigen::Index n = l.rows();
    constexpr double kRelTol = 1e-8;

    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = double(rng() >> 11) * 0x1p-53 - 0.5;
    v.normalize();

    double lambda = 0.0;
    bool converged = false;
    for (long it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd lv = l * v;
        const double next = v.dot(lv);
        const double norm = lv.norm();
        if (norm == 0.0) return 0.0;
        if (it > 0 && std::abs(next - lambda) <= kRelTol * std::max(std::abs(next), 1e-300)) {
            lambda = next;
            converged = true;
            break;
        }
        v = lv / norm;
        lambda = next;
    }
    if (!converged)
        throw NonConvergence("power iteration on normalized Laplacian did not converge",
                             max_iterations, std::abs(lambda));

    // The Rayleigh quotient approaches lambda_max from below, and near-tied
    // top eigenvalues can stall it short of the true value. Refine until the
    // eigenpair residual is small, then pad the estimate by that residual so
    // the scaled spectrum is guaranteed to sit inside [-1, 1]; a slight
    // overestimate only compresses the spectrum.
    double residual = (l * v - lambda * v).norm();
    for (long it = 0; it < 2000 && residual > 5e-8 * lambda; ++it) {
        v = (l * v).normalized();
        lambda = v.dot(l * v);
        residual = (l * v - lambda * v).norm();
    }
    return lambda * (1.0 + 1e-9) + 4.0 * residual;
}

}  // namespace

SpectralOperator spectralOperator(const GraphTopology& g, LambdaMode mode, long max_iterations) {
    SpectralOperator op;
    op.n = g.nodeCount();
    op.laplacian_norm = normalizedLaplacian(g);
    op.lambda_max = mode == LambdaMode::fixed_two
                        ? 2.0
                        : powerIterationLambdaMax(op.laplacian_norm, max_iterations);

    Eigen::SparseMatrix<double> identity(op.n, op.n);
    identity.setIdentity();
    op.laplacian_scaled = (2.0 / op.lambda_max) * op.laplacian_norm - identity;
    op.laplacian_scaled.makeCompressed();
    return op;
}

std::vector<Eigen::MatrixXd> chebApply(const SpectralOperator& op, int order,
                                       const Eigen::Ref<const Eigen::MatrixXd>& x) {
    if (order < 0) throw ValueError("Chebyshev order must be >= 0");
    if (x.rows() != op.n)
        throw DimensionMismatch("signal has " + std::to_string(x.rows()) + " rows, operator has " +
                                std::to_string(op.n));
    std::vector<Eigen::MatrixXd> terms;
    terms.reserve(size_t(order) + 1);
    terms.emplace_back(x);
    if (order >= 1) terms.emplace_back(op.laplacian_scaled * x);
    for (int k = 2; k <= order; ++k)
        terms.emplace_back(2.0 * (op.laplacian_scaled * terms[k - 1]) - terms[k - 2]);
    return terms;
}

Eigen::MatrixXd chebBasisCat(const SpectralOperator& op, int order) {
    if (order < 0) throw ValueError("Chebyshev order must be >= 0");
    const Eigen::Index n = op.n;
    Eigen::MatrixXd cat(n, n * (order + 1));
    cat.block(0, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
    if (order >= 1) cat.block(0, n, n, n) = Eigen::MatrixXd(op.laplacian_scaled);
    for (int k = 2; k <= order; ++k)
        cat.block(0, k * n, n, n) = 2.0 * (op.laplacian_scaled * cat.block(0, (k - 1) * n, n, n)) -
                                    cat.block(0, (k - 2) * n, n, n);
    return cat;
}

}  // namespace hsn
