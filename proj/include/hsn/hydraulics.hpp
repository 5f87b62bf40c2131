#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsn/net_model.hpp"

namespace hsn {

struct LeakEvent {
    std::string junction_label;
    double start_hours = 0.0;
    double emitter_coeff = 0.0;  // m3/h per m^gamma
    double gamma = 0.5;
    friend bool operator==(const LeakEvent&, const LeakEvent&) = default;
};

enum class TankMode { dynamic_level, fixed_head };

struct SimulationConfig {
    double duration_hours = 0.0;
    double timestep_s = 60.0;
    double demand_noise = 0.0;       // multiplicative sigma on demands
    double measurement_noise = 0.0;  // additive sigma on recorded pressures, m
    TankMode tank_mode = TankMode::dynamic_level;
    std::vector<LeakEvent> leak_events;
    std::uint64_t seed = 0;
};

struct SteadyStateResult {
    Eigen::VectorXd junction_heads;  // total head, m, JunctionIndex order
    Eigen::VectorXd link_flows;      // m3/h, pipes then pumps in model order
    int iterations = 0;
    double residual = 0.0;  // max nodal imbalance at exit, m3/h
};

/// Quasi-static network solver: Newton iteration on nodal continuity with
/// Hazen-Williams pipe headloss, interpolated pump curves and
/// pressure-dependent emitter outflow. Construction resolves topology once;
/// solve() may then be called per timestep.
class HydraulicSolver {
public:
    explicit HydraulicSolver(const NetworkModel& model);

    const JunctionIndex& junctions() const { return index_; }

    /// demand_multipliers scales each junction's base demand; tank_heads gives
    /// the total head per tank in model order; emitter_coeff/gamma are the
    /// effective per-junction emitter parameters for this step. initial_heads,
    /// when given, warm-starts the Newton iteration (sequential timesteps).
    SteadyStateResult solve(const Eigen::VectorXd& demand_multipliers,
                            const Eigen::VectorXd& tank_heads,
                            const Eigen::VectorXd& emitter_coeff,
                            const Eigen::VectorXd& emitter_gamma,
                            const Eigen::VectorXd* initial_heads = nullptr) const;

    /// Net flow into each tank (m3/h, model order) implied by a solution.
    Eigen::VectorXd tankInflows(const SteadyStateResult& r) const;

    int linkCount() const { return int(links_.size()); }

private:
    struct Endpoint {
        enum class Type { junction, reservoir, tank } type;
        int index = 0;
    };
    struct Link {
        bool is_pump = false;
        Endpoint from, to;
        double resistance = 0.0;           // pipes: R in h = R * s(q), q in m3/s
        std::vector<CurvePoint> curve;     // pumps: head gain vs flow (m3/h)
    };

    double headOf(const Endpoint& e, const Eigen::VectorXd& h,
                  const Eigen::VectorXd& tank_heads) const;

    const NetworkModel& model_;
    JunctionIndex index_;
    std::vector<Link> links_;
    std::vector<double> reservoir_heads_;
    Eigen::VectorXd junction_elevation_;
    Eigen::VectorXd base_demand_;
};

/// One-call form of the solver; emitters come from the model's junctions
/// with the default exponent 0.5.
SteadyStateResult solveSteadyState(const NetworkModel& model,
                                   const Eigen::VectorXd& demand_multipliers,
                                   const Eigen::VectorXd& tank_heads);

struct PressureDataset {
    Eigen::VectorXd timestamps;  // s
    Eigen::MatrixXd pressures;   // T x n pressure heads, m
    JunctionIndex labels;
    std::string config_hash;
    std::vector<LeakEvent> leak_events;

    Eigen::Index sampleCount() const { return pressures.rows(); }
};

/// Extended-period simulation: per step, evaluate pattern multipliers,
/// activate leaks whose start time has passed, solve the steady state and
/// (in dynamic mode) advance tank levels by explicit volume balance.
PressureDataset simulate(const NetworkModel& model, const SimulationConfig& cfg);

/// Dataset CSV: header `time_s,<label...>`, one row per timestep.
void writePressureCsv(const PressureDataset& ds, const std::string& path);

/// Metadata sidecar next to the CSV: config hash and leak events.
void writeDatasetMeta(const PressureDataset& ds, const std::string& path);

/// Reads a dataset CSV back; when expected is given, the header labels must
/// match it exactly.
PressureDataset importCsv(const std::string& path, const JunctionIndex* expected = nullptr);

nlohmann::json simulationConfigToJson(const SimulationConfig& cfg);

}  // namespace hsn
