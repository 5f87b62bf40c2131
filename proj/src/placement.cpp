#include "hsn/placement.hpp"

#include <algorithm>
#include <numeric>

namespace hsn {

namespace {

Eigen::SparseMatrix<double> transitionMatrix(const GraphTopology& g) {
    const Eigen::Index n = g.nodeCount();
    Eigen::VectorXd inv_deg(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (g.degrees()[i] == 0) throw IsolatedNode(long(i));
        inv_deg[i] = 1.0 / double(g.degrees()[i]);
    }
    // M = A D^{-1}: column j of A scaled by 1/d_j, so M is column-stochastic.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * g.edgeList().size());
    for (const auto& e : g.edgeList()) {
        triplets.emplace_back(e.i, e.j, inv_deg[e.j]);
        triplets.emplace_back(e.j, e.i, inv_deg[e.i]);
    }
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

}  // namespace

PageRankResult pagerank(const GraphTopology& g, double alpha, double epsilon,
                        long max_iterations) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("pagerank alpha must be in (0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("pagerank epsilon must be positive");

    const Eigen::Index n = g.nodeCount();
    if (n == 0) throw EmptyGraph("pagerank needs a non-empty graph");
    const Eigen::SparseMatrix<double> m = transitionMatrix(g);

    const Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / double(n));
    Eigen::VectorXd p = v;

    PageRankResult result;
    result.alpha = alpha;
    result.epsilon = epsilon;

    for (long it = 1; it <= max_iterations; ++it) {
        Eigen::VectorXd next = alpha * (m * p) + (1.0 - alpha) * v;
        const double diff = (next - p).norm();
        p = next;
        result.iterations = it;
        if (diff <= epsilon) {
            const double residual = (alpha * (m * p) + (1.0 - alpha) * v - p).norm();
            if (residual <= epsilon) {
                result.p = p;
                return result;
            }
        }
    }
    throw NonConvergence("pagerank iteration did not converge", max_iterations, 0.0);
}

namespace {

SensorPlacement buildPlacement(Eigen::Index n, std::vector<int> sensors, PlacementMethod method) {
    SensorPlacement placement;
    placement.method = method;
    placement.mask = Eigen::VectorXd::Zero(n);
    for (int idx : sensors) placement.mask[idx] = 1.0;
    placement.sensors = std::move(sensors);
    return placement;
}

}  // namespace

SensorPlacement placePagerank(const GraphTopology& g, int sensor_count, double alpha,
                              double epsilon) {
    const Eigen::Index n = g.nodeCount();
    if (sensor_count < 1 || sensor_count > n)
        throw InvalidSensorCount("sensor count " + std::to_string(sensor_count) +
                                 " not in [1, " + std::to_string(n) + "]");
    const PageRankResult pr = pagerank(g, alpha, epsilon);

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (pr.p[a] != pr.p[b]) return pr.p[a] < pr.p[b];
        return a < b;
    });
    order.resize(size_t(sensor_count));
    return buildPlacement(n, std::move(order), PlacementMethod::pagerank);
}

SensorPlacement placeArbitrary(const GraphTopology& g, const std::vector<int>& indices) {
    const Eigen::Index n = g.nodeCount();
    if (indices.empty() || Eigen::Index(indices.size()) > n)
        throw InvalidSensorCount("explicit sensor set must have between 1 and " +
                                 std::to_string(n) + " entries");
    std::vector<int> seen;
    for (int idx : indices) {
        if (idx < 0 || idx >= n)
            throw IndexOutOfRange("sensor index " + std::to_string(idx) + " out of range");
        if (std::find(seen.begin(), seen.end(), idx) != seen.end())
            throw DuplicateIndex("sensor index " + std::to_string(idx) + " repeated");
        seen.push_back(idx);
    }
    return buildPlacement(n, indices, PlacementMethod::arbitrary);
}

nlohmann::json placementToJson(const SensorPlacement& placement, const JunctionIndex& index,
                               const PageRankResult* scores) {
    nlohmann::json doc;
    doc["method"] = placement.method == PlacementMethod::pagerank ? "pagerank" : "arbitrary";
    doc["alpha"] = nullptr;
    doc["epsilon"] = nullptr;
    doc["scores"] = nlohmann::json::array();
    if (scores) {
        doc["alpha"] = scores->alpha;
        doc["epsilon"] = scores->epsilon;
        for (int i = 0; i < index.size(); ++i)
            doc["scores"].push_back({{"label", index.labels[size_t(i)]}, {"p", scores->p[i]}});
    }
    doc["sensors"] = nlohmann::json::array();
    for (int idx : placement.sensors) doc["sensors"].push_back(index.labels[size_t(idx)]);
    return doc;
}

}  // namespace hsn
