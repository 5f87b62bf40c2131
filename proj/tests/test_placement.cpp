#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "generators.hpp"
#include "hsn/placement.hpp"

using namespace hsn;

namespace {

const std::vector<std::string> kNet1Labels = {"10", "11", "12", "13", "21",
                                              "22", "23", "31", "32"};

GraphTopology net1Graph() { return GraphTopology::fromAdjacency(testutil::net1Adjacency()); }

Eigen::VectorXd denseSolveOracle(const GraphTopology& g, double alpha) {
    const Eigen::Index n = g.nodeCount();
    const Eigen::MatrixXd a = g.denseAdjacency();
    Eigen::MatrixXd m = a;
    for (Eigen::Index j = 0; j < n; ++j) m.col(j) /= a.col(j).sum();
    const Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / double(n));
    return (Eigen::MatrixXd::Identity(n, n) - alpha * m).partialPivLu().solve((1.0 - alpha) * v);
}

std::vector<std::string> sensorLabels(const SensorPlacement& placement) {
    std::vector<std::string> labels;
    for (int idx : placement.sensors) labels.push_back(kNet1Labels[size_t(idx)]);
    return labels;
}

}  // namespace

TEST_CASE("Net1 PageRank reproduces the benchmark scores") {
    const auto g = net1Graph();
    const PageRankResult pr = pagerank(g, 0.85, 1e-10);

    // Scores by label order 10, 11, 12, 13, 21, 22, 23, 31, 32.
    const std::vector<double> expected = {0.056, 0.139, 0.132, 0.093, 0.132,
                                          0.1699, 0.092, 0.093, 0.092};
    REQUIRE(pr.p.size() == 9);
    for (int i = 0; i < 9; ++i)
        CHECK(std::abs(pr.p[i] - expected[size_t(i)]) < 5e-4);

    CHECK(std::abs(pr.p.sum() - 1.0) < 1e-9);
    CHECK(pr.p.minCoeff() > 0.0);

    // Fixed-point residual of the returned vector.
    Eigen::MatrixXd m = g.denseAdjacency();
    for (int j = 0; j < 9; ++j) m.col(j) /= double(g.degrees()[j]);
    const Eigen::VectorXd v = Eigen::VectorXd::Constant(9, 1.0 / 9.0);
    CHECK((pr.p - 0.85 * m * pr.p - 0.15 * v).norm() <= 1e-10);

    // Symmetric node pairs carry exactly tied scores.
    CHECK(pr.p[2] == doctest::Approx(pr.p[4]).epsilon(1e-12));   // 12 and 21
    CHECK(pr.p[3] == doctest::Approx(pr.p[7]).epsilon(1e-12));   // 13 and 31
    CHECK(pr.p[6] == doctest::Approx(pr.p[8]).epsilon(1e-12));   // 23 and 32
}

TEST_CASE("complete graphs rank uniformly") {
    for (int n : {2, 3, 6}) {
        std::vector<Edge> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
        const auto g = GraphTopology::fromEdges(n, std::move(edges));
        const PageRankResult pr = pagerank(g, 0.7, 1e-12);
        CHECK((pr.p - Eigen::VectorXd::Constant(n, 1.0 / n)).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("path graph matches the dense linear solve") {
    const auto p3 = GraphTopology::fromEdges(3, {{0, 1}, {1, 2}});
    const PageRankResult pr = pagerank(p3, 0.85, 1e-10);
    CHECK((pr.p - denseSolveOracle(p3, 0.85)).norm() < 1e-9);
}

TEST_CASE("iterative PageRank matches dense solve on random graphs") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        std::uniform_int_distribution<int> size(2, 50);
        const auto g = testutil::randomConnectedGraph(rng, size(rng));
        const double eps = 1e-10;
        const PageRankResult pr = pagerank(g, 0.85, eps);
        CHECK((pr.p - denseSolveOracle(g, 0.85)).norm() <= 10.0 * eps);
    }
}

TEST_CASE("PageRank is permutation-equivariant") {
    std::mt19937_64 rng(37);
    const auto g = testutil::randomConnectedGraph(rng, 12);
    const Eigen::VectorXd p = pagerank(g, 0.85, 1e-12).p;

    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    const Eigen::MatrixXd a = g.denseAdjacency();
    Eigen::MatrixXd pa(12, 12);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) pa(perm[size_t(i)], perm[size_t(j)]) = a(i, j);
    const Eigen::VectorXd pp = pagerank(GraphTopology::fromAdjacency(pa), 0.85, 1e-12).p;

    for (int i = 0; i < 12; ++i) CHECK(pp[perm[size_t(i)]] == doctest::Approx(p[i]).epsilon(1e-9));
}

TEST_CASE("Net1 sensor selection") {
    const auto g = net1Graph();

    SUBCASE("three sensors pick the benchmark set") {
        const SensorPlacement s = placePagerank(g, 3);
        CHECK(sensorLabels(s) == std::vector<std::string>{"10", "23", "32"});
        CHECK(s.mask.sum() == doctest::Approx(3.0));
        CHECK(s.mask[0] == 1.0);
        CHECK(s.mask[6] == 1.0);
        CHECK(s.mask[8] == 1.0);
    }
    SUBCASE("five sensors extend by the tie-break rule") {
        CHECK(sensorLabels(placePagerank(g, 5)) ==
              std::vector<std::string>{"10", "23", "32", "13", "31"});
    }
    SUBCASE("selection is stable across tolerance choices") {
        const auto s1 = placePagerank(g, 3, 0.85, 1e-8);
        const auto s2 = placePagerank(g, 3, 0.85, 1e-10);
        const auto s3 = placePagerank(g, 3, 0.85, 1e-12);
        CHECK(s1.sensors == s2.sensors);
        CHECK(s2.sensors == s3.sensors);
    }
    SUBCASE("all sensors when s = n") {
        const SensorPlacement s = placePagerank(g, 9);
        CHECK(s.mask == Eigen::VectorXd::Ones(9));
    }
    SUBCASE("monotone containment of selections") {
        std::vector<int> previous;
        for (int s = 1; s <= 9; ++s) {
            const auto sel = placePagerank(g, s).sensors;
            CHECK(std::equal(previous.begin(), previous.end(), sel.begin()));
            previous = sel;
        }
    }
    SUBCASE("invalid sensor counts") {
        CHECK_THROWS_AS(placePagerank(g, 0), InvalidSensorCount);
        CHECK_THROWS_AS(placePagerank(g, 10), InvalidSensorCount);
    }
}

TEST_CASE("arbitrary placement") {
    const auto g = net1Graph();

    SUBCASE("the comparison set is echoed verbatim") {
        const SensorPlacement s = placeArbitrary(g, {3, 5, 7});  // labels 13, 22, 31
        CHECK(sensorLabels(s) == std::vector<std::string>{"13", "22", "31"});
        CHECK(s.method == PlacementMethod::arbitrary);
    }
    SUBCASE("rejections") {
        CHECK_THROWS_AS(placeArbitrary(g, {}), InvalidSensorCount);
        CHECK_THROWS_AS(placeArbitrary(g, {0, 0, 6}), DuplicateIndex);
        CHECK_THROWS_AS(placeArbitrary(g, {0, 42}), IndexOutOfRange);
    }
}

TEST_CASE("placement serializes to the documented JSON shape") {
    const auto g = net1Graph();
    auto [graph, index] = junctionGraph(testutil::net1());
    const PageRankResult pr = pagerank(g);
    const SensorPlacement s = placePagerank(g, 3);
    const nlohmann::json doc = placementToJson(s, index, &pr);

    CHECK(doc["method"] == "pagerank");
    CHECK(doc["alpha"] == 0.85);
    CHECK(doc["scores"].size() == 9);
    CHECK(doc["scores"][0]["label"] == "10");
    CHECK(doc["sensors"] == nlohmann::json({"10", "23", "32"}));

    const nlohmann::json arb = placementToJson(placeArbitrary(g, {3, 5, 7}), index);
    CHECK(arb["method"] == "arbitrary");
    CHECK(arb["alpha"].is_null());
    CHECK(arb["scores"].empty());
}
