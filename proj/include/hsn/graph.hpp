#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

#include "hsn/errors.hpp"

namespace hsn {

/// Undirected unweighted edge, stored with i < j.
struct Edge {
    int i = 0;
    int j = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph: 0/1 adjacency, no self loops, no parallel edges.
/// Adjacency is kept sparse; denseAdjacency() is for small-n call sites.
class GraphTopology {
public:
    GraphTopology() = default;

    /// Builds from an edge list; edges are normalized to i < j, duplicates
    /// collapse, self loops are rejected.
    static GraphTopology fromEdges(Eigen::Index n, std::vector<Edge> edges);

    /// Builds from a symmetric 0/1 adjacency matrix with zero diagonal.
    static GraphTopology fromAdjacency(const Eigen::Ref<const Eigen::MatrixXd>& a);

    Eigen::Index nodeCount() const { return n_; }
    const std::vector<Edge>& edgeList() const { return edges_; }
    const Eigen::VectorXi& degrees() const { return degrees_; }
    const Eigen::SparseMatrix<double>& adjacency() const { return adjacency_; }
    Eigen::MatrixXd denseAdjacency() const { return Eigen::MatrixXd(adjacency_); }

private:
    Eigen::Index n_ = 0;
    std::vector<Edge> edges_;
    Eigen::VectorXi degrees_;
    Eigen::SparseMatrix<double> adjacency_;
};

enum class LambdaMode { power_iteration, fixed_two };

/// Normalized Laplacian together with its rescaled form
/// L_hat = (2 / lambda_max) * L_norm - I, whose spectrum sits in [-1, 1].
struct SpectralOperator {
    Eigen::Index n = 0;
    Eigen::SparseMatrix<double> laplacian_norm;
    double lambda_max = 0.0;
    Eigen::SparseMatrix<double> laplacian_scaled;
};

/// Combinatorial Laplacian D - A. Row sums are zero.
Eigen::SparseMatrix<double> laplacian(const GraphTopology& g);

/// Builds L_norm = I - D^{-1/2} A D^{-1/2} and the scaled operator.
/// lambda_max comes from power iteration (relative tolerance 1e-8) or is
/// fixed to the spectral bound 2. Throws IsolatedNode when any degree is zero.
SpectralOperator spectralOperator(const GraphTopology& g,
                                  LambdaMode mode = LambdaMode::power_iteration,
                                  long max_iterations = 10000);

/// Chebyshev basis applied to a signal block: returns
/// [T_0(L_hat) X, ..., T_K(L_hat) X] via the three-term recursion, using
/// K sparse matrix products; dense T_k are never formed here.
std::vector<Eigen::MatrixXd> chebApply(const SpectralOperator& op, int order,
                                       const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Dense concatenated basis [T_0 | T_1 | ... | T_K], an n x n*(K+1) matrix.
/// Intended for small graphs where caching the polynomials pays off.
Eigen::MatrixXd chebBasisCat(const SpectralOperator& op, int order);

}  // namespace hsn
