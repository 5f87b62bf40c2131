#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "hsn/hydraulics.hpp"

using namespace hsn;

namespace {

// Independent Hazen-Williams evaluation (pure power law, flow in m3/h).
double hwHeadloss(double flow_m3h, double length, double diameter, double roughness) {
    const double q = std::abs(flow_m3h) / 3600.0;
    return 10.67 * length * std::pow(q, 1.852) /
           (std::pow(roughness, 1.852) * std::pow(diameter, 4.87));
}

NetworkModel singlePipeModel(double demand, double emitter = 0.0) {
    std::string text = "[JUNCTIONS]\nJ1 90 " + std::to_string(demand) +
                       "\n[RESERVOIRS]\nR1 100\n[PIPES]\nP1 R1 J1 800 0.25 120\n";
    if (emitter > 0.0) text += "[EMITTERS]\nJ1 " + std::to_string(emitter) + "\n";
    return parseInp(text);
}

std::filesystem::path tempFile(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("zero-demand junction sits at reservoir head") {
    const NetworkModel m = singlePipeModel(0.0);
    const auto r = solveSteadyState(m, Eigen::VectorXd::Ones(1), Eigen::VectorXd(0));
    CHECK(r.junction_heads[0] == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(r.link_flows[0] == doctest::Approx(0.0).epsilon(1e-9));
    // pressure head = head - elevation = 10 m
    CHECK(r.junction_heads[0] - 90.0 == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("single-pipe demand case matches a bisection oracle") {
    const double demand = 10.0;  // m3/h
    const NetworkModel m = singlePipeModel(demand);
    const auto r = solveSteadyState(m, Eigen::VectorXd::Ones(1), Eigen::VectorXd(0));

    // Oracle: bisect the junction head h so that the headloss equation
    // balances: (100 - h) - hw(demand) = 0 with hw evaluated independently.
    double lo = 0.0, hi = 100.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double imbalance = (100.0 - mid) - hwHeadloss(demand, 800.0, 0.25, 120.0);
        if (imbalance > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double oracle_head = 0.5 * (lo + hi);
    CHECK(std::abs(r.junction_heads[0] - oracle_head) < 1e-6);
    CHECK(r.link_flows[0] == doctest::Approx(demand).epsilon(1e-9));
}

TEST_CASE("emitter withdrawal satisfies its defining law at the solution") {
    const NetworkModel m = singlePipeModel(0.0, 4.0);
    const auto r = solveSteadyState(m, Eigen::VectorXd::Ones(1), Eigen::VectorXd(0));
    const double pressure = r.junction_heads[0] - 90.0;
    REQUIRE(pressure > 0.0);
    const double leak_flow = 4.0 * std::sqrt(pressure);
    // Pipe inflow equals the emitter outflow.
    CHECK(r.link_flows[0] == doctest::Approx(leak_flow).epsilon(1e-8));
    // And the same flow reproduces the head drop along the pipe.
    CHECK(std::abs(100.0 - hwHeadloss(r.link_flows[0], 800.0, 0.25, 120.0) -
                   r.junction_heads[0]) < 1e-6);
}

TEST_CASE("pump delivers the curve head gain at the operating point") {
    const char* text = R"([JUNCTIONS]
J1 50 120
[RESERVOIRS]
R1 40
[CURVES]
c1 0 60
c1 200 40
c1 400 10
[PUMPS]
PU1 R1 J1 HEAD c1
)";
    const NetworkModel m = parseInp(text);
    const auto r = solveSteadyState(m, Eigen::VectorXd::Ones(1), Eigen::VectorXd(0));
    const double q = r.link_flows[0];
    CHECK(q == doctest::Approx(120.0).epsilon(1e-9));
    // gain interpolated on the first segment: 60 + (40-60)/200 * q
    const double gain = 60.0 + (40.0 - 60.0) / 200.0 * q;
    CHECK(r.junction_heads[0] == doctest::Approx(40.0 + gain).epsilon(1e-9));
}

TEST_CASE("net1 steady state conserves mass and loop energy") {
    const NetworkModel& m = testutil::net1();
    HydraulicSolver solver(m);
    Eigen::VectorXd tank_heads(1);
    tank_heads << 250.0 + 55.0;
    const Eigen::Index n = 9;
    Eigen::VectorXd emitter = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd gamma = Eigen::VectorXd::Constant(n, 0.5);

    for (double mult : {0.4, 1.0, 1.6}) {
        const auto r = solver.solve(Eigen::VectorXd::Constant(n, mult), tank_heads, emitter, gamma);

        // Mass balance at each junction from returned flows.
        Eigen::VectorXd imbalance = Eigen::VectorXd::Zero(n);
        for (size_t k = 0; k < m.pipes.size(); ++k) {
            const auto& p = m.pipes[k];
            const double q = r.link_flows[Eigen::Index(k)];
            if (auto it = solver.junctions().index_of.find(p.from_node);
                it != solver.junctions().index_of.end())
                imbalance[it->second] -= q;
            if (auto it = solver.junctions().index_of.find(p.to_node);
                it != solver.junctions().index_of.end())
                imbalance[it->second] += q;
        }
        // pump feeds junction 10 (model order: pumps after pipes)
        imbalance[solver.junctions().at("10")] += r.link_flows[Eigen::Index(m.pipes.size())];
        for (Eigen::Index i = 0; i < n; ++i)
            imbalance[i] -= m.junctions[size_t(i)].base_demand * mult;
        CHECK(imbalance.cwiseAbs().maxCoeff() < 1e-6);

        // Signed Hazen-Williams losses around the three internal loops.
        auto pipeByld = [&](const std::string& id) -> const Pipe& {
            for (const auto& p : m.pipes)
                if (p.id == id) return p;
            throw std::logic_error("no pipe " + id);
        };
        auto flowOf = [&](const std::string& id) {
            for (size_t k = 0; k < m.pipes.size(); ++k)
                if (m.pipes[k].id == id) return r.link_flows[Eigen::Index(k)];
            throw std::logic_error("no pipe " + id);
        };
        const std::vector<std::vector<std::pair<std::string, int>>> loops = {
            {{"11", +1}, {"112", +1}, {"21", -1}, {"111", -1}},
            {{"12", +1}, {"113", +1}, {"22", -1}, {"112", -1}},
            {{"21", +1}, {"122", +1}, {"31", -1}, {"121", -1}},
        };
        for (const auto& loop : loops) {
            double sum = 0.0;
            for (const auto& [id, orientation] : loop) {
                const Pipe& p = pipeByld(id);
                const double q = flowOf(id);
                const double loss = hwHeadloss(q, p.length, p.diameter, p.roughness);
                sum += orientation * (q >= 0.0 ? loss : -loss);
            }
            CHECK(std::abs(sum) < 1e-5);
        }
    }
}

TEST_CASE("raising an emitter coefficient never raises that junction's pressure") {
    std::mt19937_64 rng(99);
    const NetworkModel& m = testutil::net1();
    HydraulicSolver solver(m);
    Eigen::VectorXd tank_heads(1);
    tank_heads << 305.0;
    const Eigen::Index n = 9;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd gamma = Eigen::VectorXd::Constant(n, 0.5);

    for (int trial = 0; trial < 12; ++trial) {
        const Eigen::Index j = Eigen::Index(rng() % 9);
        std::uniform_real_distribution<double> coeff(0.0, 30.0);
        double c1 = coeff(rng), c2 = coeff(rng);
        if (c1 > c2) std::swap(c1, c2);

        Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n), e2 = Eigen::VectorXd::Zero(n);
        e1[j] = c1;
        e2[j] = c2;
        const auto r1 = solver.solve(ones, tank_heads, e1, gamma);
        const auto r2 = solver.solve(ones, tank_heads, e2, gamma);
        CHECK(r2.junction_heads[j] <= r1.junction_heads[j] + 1e-9);
    }
}

TEST_CASE("disconnected junction is rejected") {
    const char* text = R"([JUNCTIONS]
J1 10 0
J2 10 0
[RESERVOIRS]
R1 50
[PIPES]
P1 R1 J1 100 0.2 120
)";
    CHECK_THROWS_AS(HydraulicSolver(parseInp(text)), DisconnectedComponent);
}

TEST_CASE("simulation is deterministic and pattern-driven") {
    const NetworkModel& m = testutil::net1();
    SimulationConfig cfg;
    cfg.duration_hours = 2.0;
    cfg.timestep_s = 60.0;
    cfg.demand_noise = 0.1;
    cfg.seed = 4242;

    const PressureDataset a = simulate(m, cfg);
    const PressureDataset b = simulate(m, cfg);
    CHECK(a.pressures == b.pressures);
    CHECK(a.timestamps == b.timestamps);
    CHECK(a.config_hash == b.config_hash);
    CHECK(a.sampleCount() == 120);

    cfg.seed = 4243;
    const PressureDataset c = simulate(m, cfg);
    CHECK(a.pressures != c.pressures);
}

TEST_CASE("zero-demand no-leak run holds constant pressure") {
    const char* text = R"([JUNCTIONS]
J1 90 0
J2 92 0
[RESERVOIRS]
R1 100
[PIPES]
P1 R1 J1 100 0.2 120
P2 J1 J2 100 0.2 120
)";
    SimulationConfig cfg;
    cfg.duration_hours = 1.0;
    cfg.timestep_s = 60.0;
    const PressureDataset ds = simulate(parseInp(text), cfg);
    for (Eigen::Index t = 0; t < ds.sampleCount(); ++t) {
        CHECK(ds.pressures(t, 0) == doctest::Approx(10.0).epsilon(1e-12));
        CHECK(ds.pressures(t, 1) == doctest::Approx(8.0).epsilon(1e-12));
    }
}

TEST_CASE("leak event drops the head at the leaky junction") {
    const NetworkModel& m = testutil::net1();
    SimulationConfig healthy;
    healthy.duration_hours = 3.0;
    healthy.timestep_s = 60.0;

    SimulationConfig leaky = healthy;
    leaky.leak_events.push_back({"21", 2.0, 18.0, 0.5});

    const PressureDataset base = simulate(m, healthy);
    const PressureDataset with_leak = simulate(m, leaky);
    const Eigen::Index j21 = base.labels.at("21");

    // Identical before the leak starts, clearly lower afterwards.
    CHECK(base.pressures(60, j21) == doctest::Approx(with_leak.pressures(60, j21)).epsilon(1e-12));
    const double drop = base.pressures(150, j21) - with_leak.pressures(150, j21);
    CHECK(drop > 1.5);
}

TEST_CASE("tank mode fixed_head freezes the tank level") {
    const NetworkModel& m = testutil::net1();
    SimulationConfig cfg;
    cfg.duration_hours = 1.0;
    cfg.timestep_s = 60.0;
    cfg.tank_mode = TankMode::fixed_head;
    const PressureDataset fixed = simulate(m, cfg);

    cfg.tank_mode = TankMode::dynamic_level;
    const PressureDataset dynamic = simulate(m, cfg);
    // Dynamic tank levels move, so late-sample pressures must differ.
    CHECK(fixed.pressures.row(0) == dynamic.pressures.row(0));
    CHECK(fixed.pressures.row(59) != dynamic.pressures.row(59));
}

TEST_CASE("config validation") {
    const NetworkModel& m = testutil::net1();
    SimulationConfig cfg;
    cfg.duration_hours = 1.0;
    SUBCASE("timestep must divide the pattern step") {
        cfg.timestep_s = 7.0;
        CHECK_THROWS_AS(simulate(m, cfg), ConfigError);
    }
    SUBCASE("leak start inside the duration") {
        cfg.leak_events.push_back({"21", 5.0, 1.0, 0.5});
        CHECK_THROWS_AS(simulate(m, cfg), ConfigError);
    }
    SUBCASE("leak junction must exist") {
        cfg.leak_events.push_back({"zz", 0.5, 1.0, 0.5});
        CHECK_THROWS_AS(simulate(m, cfg), ReferenceError);
    }
    SUBCASE("duration must be positive") {
        cfg.duration_hours = 0.0;
        CHECK_THROWS_AS(simulate(m, cfg), ConfigError);
    }
}

TEST_CASE("dataset CSV round trip and import validation") {
    const NetworkModel& m = testutil::net1();
    SimulationConfig cfg;
    cfg.duration_hours = 1.0;
    cfg.timestep_s = 60.0;
    const PressureDataset ds = simulate(m, cfg);

    const auto csv = tempFile("hsn_dataset_test.csv");
    writePressureCsv(ds, csv.string());
    writeDatasetMeta(ds, csv.string() + ".meta.json");

    const PressureDataset loaded = importCsv(csv.string(), &ds.labels);
    CHECK(loaded.sampleCount() == ds.sampleCount());
    CHECK(loaded.labels.labels == ds.labels.labels);
    CHECK((loaded.pressures - ds.pressures).cwiseAbs().maxCoeff() < 1e-8);

    SUBCASE("label mismatch is rejected") {
        JunctionIndex other;
        other.labels = {"a", "b"};
        CHECK_THROWS_AS(importCsv(csv.string(), &other), LabelMismatch);
    }
    SUBCASE("non-finite cells are rejected with row/col context") {
        const auto bad = tempFile("hsn_dataset_bad.csv");
        std::ofstream out(bad);
        out << "time_s,J1\n0,1.5\n60,nan\n";
        out.close();
        CHECK_THROWS_WITH_AS(importCsv(bad.string()),
                             doctest::Contains("row 2"), ValueError);
    }
    std::filesystem::remove(csv);
}
