#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include <json.hpp>

#include "hsn/graph.hpp"
#include "hsn/net_model.hpp"

namespace hsn {

struct PageRankResult {
    Eigen::VectorXd p;  // probability vector, sums to 1
    double alpha = 0.85;
    double epsilon = 1e-10;
    long iterations = 0;
};

enum class PlacementMethod { pagerank, arbitrary };

struct SensorPlacement {
    std::vector<int> sensors;  // junction indices in selection order
    Eigen::VectorXd mask;      // 0/1, length n, ones exactly at sensors
    PlacementMethod method = PlacementMethod::pagerank;
};

/// Damped random-walk centrality: iterates p <- alpha*M*p + (1-alpha)*v with
/// M = A D^{-1} and uniform v, from p = v, until ||p_{k+1} - p_k||_2 <= eps
/// and the fixed-point residual of the returned vector is itself <= eps.
PageRankResult pagerank(const GraphTopology& g, double alpha = 0.85, double epsilon = 1e-10,
                        long max_iterations = 100000);

/// Sensors sit at the s smallest PageRank scores; ties break by ascending
/// junction index so the selection is deterministic.
SensorPlacement placePagerank(const GraphTopology& g, int sensor_count, double alpha = 0.85,
                              double epsilon = 1e-10);

/// Baseline: an explicit, distinct, in-range index set taken verbatim.
SensorPlacement placeArbitrary(const GraphTopology& g, const std::vector<int>& indices);

/// Placement JSON: {method, alpha, epsilon, scores: [{label, p}], sensors: [labels]}.
/// scores is empty (and alpha/epsilon null) for arbitrary placements.
nlohmann::json placementToJson(const SensorPlacement& placement, const JunctionIndex& index,
                               const PageRankResult* scores = nullptr);

}  // namespace hsn
