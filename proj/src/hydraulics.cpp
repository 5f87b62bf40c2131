#include "hsn/hydraulics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

#include "hsn/hashing.hpp"
#include "hsn/random.hpp"

namespace hsn {

namespace {

constexpr double kHwCoeff = 10.67;   // SI Hazen-Williams, q in m3/s
constexpr double kHwExp = 1.852;
constexpr double kFlowEps = 1e-5;    // m3/s, smooth linearization of q^1.852 at 0
constexpr double kEmitterPLin = 0.01;  // m, linearized emitter below this pressure
constexpr double kFlowTol = 1e-8;    // m3/h, nodal imbalance at convergence
constexpr double kPumpClampSlope = 1e-6 / 3600.0;  // m3/s per m outside the curve
constexpr int kMaxNewton = 400;

// Smoothed odd power law s(q) = q (q^2 + eps^2)^((n-1)/2) and derivative.
double pipeHeadloss(double q, double resistance) {
    return resistance * q * std::pow(q * q + kFlowEps * kFlowEps, (kHwExp - 1.0) / 2.0);
}

double pipeHeadlossSlope(double q, double resistance) {
    const double m = q * q + kFlowEps * kFlowEps;
    return resistance * std::pow(m, (kHwExp - 3.0) / 2.0) * (kHwExp * q * q + kFlowEps * kFlowEps);
}

// Inverts pipeHeadloss: flow (m3/s) producing headloss dh (m).
double flowFromHeadloss(double dh, double resistance) {
    if (dh == 0.0) return 0.0;
    const double target = std::abs(dh);
    const double sign = dh > 0.0 ? 1.0 : -1.0;

    double q = std::pow(target / resistance, 1.0 / kHwExp);
    if (q < kFlowEps) q = target / (resistance * std::pow(kFlowEps, kHwExp - 1.0));

    double lo = 0.0;
    double hi = std::max(2.0 * q, 4.0 * kFlowEps);
    while (pipeHeadloss(hi, resistance) < target) hi *= 2.0;

    for (int it = 0; it < 100; ++it) {
        const double f = pipeHeadloss(q, resistance) - target;
        if (std::abs(f) <= 1e-13 * std::max(1.0, target)) break;
        if (f > 0.0)
            hi = q;
        else
            lo = q;
        const double step = f / pipeHeadlossSlope(q, resistance);
        q -= step;
        if (!(q > lo && q < hi)) q = 0.5 * (lo + hi);
    }
    return sign * q;
}

// Piecewise-linear pump curve lookup: flow (m3/h) delivered at a head gain,
// clamped outside the point range (with a vestigial slope that keeps the
// relation invertible). Returns flow and d(flow)/d(gain).
std::pair<double, double> pumpFlowFromGain(const std::vector<CurvePoint>& curve, double gain) {
    constexpr double clamp_slope = -kPumpClampSlope * 3600.0;  // m3/h per m
    if (gain >= curve.front().head)
        return {curve.front().flow + clamp_slope * (gain - curve.front().head), clamp_slope};
    if (gain <= curve.back().head)
        return {curve.back().flow + clamp_slope * (gain - curve.back().head), clamp_slope};
    for (size_t k = 0; k + 1 < curve.size(); ++k) {
        if (gain <= curve[k].head && gain >= curve[k + 1].head) {
            const double slope = (curve[k + 1].flow - curve[k].flow) /
                                 (curve[k + 1].head - curve[k].head);  // < 0
            return {curve[k].flow + slope * (gain - curve[k].head), slope};
        }
    }
    return {curve.back().flow, 0.0};
}

std::vector<CurvePoint> preparePumpCurve(const Pump& pump) {
    std::vector<CurvePoint> curve = pump.curve;
    if (curve.size() == 1) {
        // EPANET's synthesized shape for one-point curves.
        const CurvePoint design = curve[0];
        if (design.flow <= 0.0)
            throw ValueError("pump '" + pump.id + "' one-point curve needs positive flow");
        curve = {{0.0, 4.0 / 3.0 * design.head}, design, {2.0 * design.flow, 0.0}};
    }
    return curve;
}

struct EmitterLaw {
    // Outflow (m3/h) and slope w.r.t. head for pressure p = h - elevation.
    static std::pair<double, double> eval(double coeff, double gamma, double pressure) {
        if (coeff <= 0.0) return {0.0, 0.0};
        if (pressure <= 0.0) return {0.0, 0.0};
        if (pressure < kEmitterPLin) {
            const double slope = coeff * std::pow(kEmitterPLin, gamma - 1.0);
            return {slope * pressure, slope};
        }
        return {coeff * std::pow(pressure, gamma),
                coeff * gamma * std::pow(pressure, gamma - 1.0)};
    }
};

}  // namespace

HydraulicSolver::HydraulicSolver(const NetworkModel& model) : model_(model) {
    for (const auto& j : model.junctions) {
        index_.index_of.emplace(j.id, int(index_.labels.size()));
        index_.labels.push_back(j.id);
    }

    std::unordered_map<std::string, Endpoint> endpoint_of;
    for (size_t k = 0; k < model.junctions.size(); ++k)
        endpoint_of[model.junctions[k].id] = {Endpoint::Type::junction, int(k)};
    for (size_t k = 0; k < model.reservoirs.size(); ++k) {
        endpoint_of[model.reservoirs[k].id] = {Endpoint::Type::reservoir, int(k)};
        reservoir_heads_.push_back(model.reservoirs[k].total_head);
    }
    for (size_t k = 0; k < model.tanks.size(); ++k)
        endpoint_of[model.tanks[k].id] = {Endpoint::Type::tank, int(k)};

    for (const auto& p : model.pipes) {
        Link link;
        link.is_pump = false;
        link.from = endpoint_of.at(p.from_node);
        link.to = endpoint_of.at(p.to_node);
        link.resistance = kHwCoeff * p.length /
                          (std::pow(p.roughness, kHwExp) * std::pow(p.diameter, 4.87));
        links_.push_back(std::move(link));
    }
    for (const auto& p : model.pumps) {
        Link link;
        link.is_pump = true;
        link.from = endpoint_of.at(p.from_node);
        link.to = endpoint_of.at(p.to_node);
        link.curve = preparePumpCurve(p);
        links_.push_back(std::move(link));
    }

    const Eigen::Index n = Eigen::Index(model.junctions.size());
    junction_elevation_.resize(n);
    base_demand_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        junction_elevation_[i] = model.junctions[size_t(i)].elevation;
        base_demand_[i] = model.junctions[size_t(i)].base_demand;
    }

    if (n > 0) {
        if (model.reservoirs.empty() && model.tanks.empty())
            throw DataError("network has no fixed-head node (reservoir or tank)");
        // Every junction must reach a fixed-head node through the link set.
        std::vector<char> seen(size_t(n), 0);
        std::deque<int> frontier;
        auto push = [&](const Endpoint& e) {
            if (e.type == Endpoint::Type::junction && !seen[size_t(e.index)]) {
                seen[size_t(e.index)] = 1;
                frontier.push_back(e.index);
            }
        };
        for (const auto& link : links_) {
            const bool from_fixed = link.from.type != Endpoint::Type::junction;
            const bool to_fixed = link.to.type != Endpoint::Type::junction;
            if (from_fixed) push(link.to);
            if (to_fixed) push(link.from);
        }
        while (!frontier.empty()) {
            const int i = frontier.front();
            frontier.pop_front();
            for (const auto& link : links_) {
                if (link.from.type == Endpoint::Type::junction && link.from.index == i)
                    push(link.to);
                if (link.to.type == Endpoint::Type::junction && link.to.index == i)
                    push(link.from);
            }
        }
        for (Eigen::Index i = 0; i < n; ++i)
            if (!seen[size_t(i)])
                throw DisconnectedComponent("junction '" + index_.labels[size_t(i)] +
                                            "' is unreachable from any fixed-head node");
    }
}

double HydraulicSolver::headOf(const Endpoint& e, const Eigen::VectorXd& h,
                               const Eigen::VectorXd& tank_heads) const {
    switch (e.type) {
        case Endpoint::Type::junction:
            return h[e.index];
        case Endpoint::Type::reservoir:
            return reservoir_heads_[size_t(e.index)];
        case Endpoint::Type::tank:
            return tank_heads[e.index];
    }
    return 0.0;
}

SteadyStateResult HydraulicSolver::solve(const Eigen::VectorXd& demand_multipliers,
                                         const Eigen::VectorXd& tank_heads,
                                         const Eigen::VectorXd& emitter_coeff,
                                         const Eigen::VectorXd& emitter_gamma,
                                         const Eigen::VectorXd* initial_heads) const {
    const Eigen::Index n = junction_elevation_.size();
    if (demand_multipliers.size() != n || emitter_coeff.size() != n || emitter_gamma.size() != n)
        throw DimensionMismatch("per-junction vectors must have length " + std::to_string(n));
    if (tank_heads.size() != Eigen::Index(model_.tanks.size()))
        throw DimensionMismatch("tank_heads must have one entry per tank");

    const Eigen::VectorXd demand_s = (base_demand_.cwiseProduct(demand_multipliers)) / 3600.0;

    // Flows per link (m3/s) and conductances (m3/s per m) at heads h.
    auto evalLinks = [&](const Eigen::VectorXd& h, Eigen::VectorXd& flows,
                         Eigen::VectorXd* conductance) {
        for (size_t k = 0; k < links_.size(); ++k) {
            const Link& link = links_[k];
            const double ha = headOf(link.from, h, tank_heads);
            const double hb = headOf(link.to, h, tank_heads);
            if (link.is_pump) {
                auto [q_m3h, dq_dgain] = pumpFlowFromGain(link.curve, hb - ha);
                flows[Eigen::Index(k)] = q_m3h / 3600.0;
                if (conductance)
                    (*conductance)[Eigen::Index(k)] = std::max(-dq_dgain / 3600.0, 1e-10);
            } else {
                const double q = flowFromHeadloss(ha - hb, link.resistance);
                flows[Eigen::Index(k)] = q;
                if (conductance)
                    (*conductance)[Eigen::Index(k)] = 1.0 / pipeHeadlossSlope(q, link.resistance);
            }
        }
    };

    // Continuity residual per junction (m3/s): inflow - demand - emitter.
    auto evalResidual = [&](const Eigen::VectorXd& h, const Eigen::VectorXd& flows,
                            Eigen::VectorXd& res, Eigen::VectorXd* emitter_slope) {
        res = -demand_s;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto [outflow, slope] = EmitterLaw::eval(emitter_coeff[i], emitter_gamma[i],
                                                     h[i] - junction_elevation_[i]);
            res[i] -= outflow / 3600.0;
            if (emitter_slope) (*emitter_slope)[i] = slope / 3600.0;
        }
        for (size_t k = 0; k < links_.size(); ++k) {
            const Link& link = links_[k];
            const double q = flows[Eigen::Index(k)];
            if (link.from.type == Endpoint::Type::junction) res[link.from.index] -= q;
            if (link.to.type == Endpoint::Type::junction) res[link.to.index] += q;
        }
    };

    double init_head = 0.0;
    for (double v : reservoir_heads_) init_head = std::max(init_head, v);
    for (Eigen::Index k = 0; k < tank_heads.size(); ++k)
        init_head = std::max(init_head, tank_heads[k]);

    Eigen::VectorXd h = initial_heads && initial_heads->size() == n
                            ? *initial_heads
                            : Eigen::VectorXd::Constant(n, init_head);
    Eigen::VectorXd flows(links_.size());
    Eigen::VectorXd conductance(links_.size());
    Eigen::VectorXd residual(n), emitter_slope(n);

    double res_m3h = 0.0;
    double best_seen = std::numeric_limits<double>::infinity();
    Eigen::VectorXd h_best = h;
    int stalled_steps = 0;
    for (int iter = 0; iter <= kMaxNewton; ++iter) {
        evalLinks(h, flows, &conductance);
        evalResidual(h, flows, residual, &emitter_slope);
        res_m3h = n > 0 ? residual.cwiseAbs().maxCoeff() * 3600.0 : 0.0;
        if (res_m3h < best_seen) {
            best_seen = res_m3h;
            h_best = h;
        }
        if (res_m3h <= kFlowTol) {
            SteadyStateResult out;
            out.junction_heads = h;
            out.link_flows = flows * 3600.0;
            out.iterations = iter;
            out.residual = res_m3h;
            return out;
        }
        if (iter == kMaxNewton) break;

        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) g(i, i) = emitter_slope[i];
        for (size_t k = 0; k < links_.size(); ++k) {
            const Link& link = links_[k];
            const double w = conductance[Eigen::Index(k)];
            const bool fa = link.from.type == Endpoint::Type::junction;
            const bool fb = link.to.type == Endpoint::Type::junction;
            if (fa) g(link.from.index, link.from.index) += w;
            if (fb) g(link.to.index, link.to.index) += w;
            if (fa && fb) {
                g(link.from.index, link.to.index) -= w;
                g(link.to.index, link.from.index) -= w;
            }
        }

        const Eigen::VectorXd delta = g.ldlt().solve(residual);

        // Armijo backtracking on the squared residual norm; delta is an exact
        // Newton direction, so sufficient decrease is available away from the
        // pump-curve kinks.
        const double merit0 = residual.squaredNorm();
        Eigen::VectorXd trial_flows(links_.size()), trial_res(n);
        double alpha = 1.0;
        double best_alpha = 1.0;
        double best_merit = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 45; ++ls, alpha *= 0.5) {
            const Eigen::VectorXd h_try = h + alpha * delta;
            evalLinks(h_try, trial_flows, nullptr);
            evalResidual(h_try, trial_flows, trial_res, nullptr);
            const double merit = trial_res.squaredNorm();
            if (merit < best_merit) {
                best_merit = merit;
                best_alpha = alpha;
            }
            if (merit <= (1.0 - 1e-4 * alpha) * merit0) {
                accepted = true;
                break;
            }
        }
        if (!accepted && best_merit >= merit0) {
            if (++stalled_steps >= 3) break;
        } else {
            stalled_steps = 0;
        }
        h += (accepted ? alpha : best_alpha) * delta;
    }
    // Newton can ring between pump-curve segments at sub-tolerance imbalances;
    // accept the best iterate if it already satisfies the mass-balance
    // contract (<= 1e-6 m3/h) with margin.
    if (best_seen <= 5e-7) {
        evalLinks(h_best, flows, nullptr);
        SteadyStateResult out;
        out.junction_heads = h_best;
        out.link_flows = flows * 3600.0;
        out.iterations = kMaxNewton;
        out.residual = best_seen;
        return out;
    }
    throw NonConvergence("hydraulic solver stalled", kMaxNewton, best_seen);
}

Eigen::VectorXd HydraulicSolver::tankInflows(const SteadyStateResult& r) const {
    Eigen::VectorXd inflow = Eigen::VectorXd::Zero(Eigen::Index(model_.tanks.size()));
    for (size_t k = 0; k < links_.size(); ++k) {
        const Link& link = links_[k];
        if (link.from.type == Endpoint::Type::tank)
            inflow[link.from.index] -= r.link_flows[Eigen::Index(k)];
        if (link.to.type == Endpoint::Type::tank)
            inflow[link.to.index] += r.link_flows[Eigen::Index(k)];
    }
    return inflow;
}

SteadyStateResult solveSteadyState(const NetworkModel& model,
                                   const Eigen::VectorXd& demand_multipliers,
                                   const Eigen::VectorXd& tank_heads) {
    HydraulicSolver solver(model);
    const Eigen::Index n = Eigen::Index(model.junctions.size());
    Eigen::VectorXd coeff(n), gamma = Eigen::VectorXd::Constant(n, 0.5);
    for (Eigen::Index i = 0; i < n; ++i) coeff[i] = model.junctions[size_t(i)].emitter_coeff;
    return solver.solve(demand_multipliers, tank_heads, coeff, gamma);
}

namespace {

void validateConfig(const NetworkModel& model, const SimulationConfig& cfg) {
    if (!(cfg.duration_hours > 0.0)) throw ConfigError("simulation duration must be positive");
    if (!(cfg.timestep_s > 0.0)) throw ConfigError("simulation timestep must be positive");
    const double ratio_a = model.pattern_timestep_s / cfg.timestep_s;
    const double ratio_b = cfg.timestep_s / model.pattern_timestep_s;
    const bool divides = std::abs(ratio_a - std::round(ratio_a)) < 1e-9 ||
                         std::abs(ratio_b - std::round(ratio_b)) < 1e-9;
    if (!divides)
        throw ConfigError("timestep must divide the pattern timestep or vice versa");
    for (const auto& leak : cfg.leak_events) {
        if (!model.findJunction(leak.junction_label))
            throw ReferenceError("leak event references unknown junction '" +
                                 leak.junction_label + "'");
        if (leak.start_hours < 0.0 || leak.start_hours >= cfg.duration_hours)
            throw ConfigError("leak start must lie within the simulation duration");
        if (leak.emitter_coeff < 0.0) throw ConfigError("leak emitter coefficient must be >= 0");
    }
    if (cfg.demand_noise < 0.0 || cfg.measurement_noise < 0.0)
        throw ConfigError("noise levels must be >= 0");
}

}  // namespace

nlohmann::json simulationConfigToJson(const SimulationConfig& cfg) {
    nlohmann::json doc;
    doc["duration_hours"] = cfg.duration_hours;
    doc["timestep_s"] = cfg.timestep_s;
    doc["demand_noise"] = cfg.demand_noise;
    doc["measurement_noise"] = cfg.measurement_noise;
    doc["tank_mode"] = cfg.tank_mode == TankMode::dynamic_level ? "dynamic" : "fixed_head";
    doc["seed"] = cfg.seed;
    doc["leak_events"] = nlohmann::json::array();
    for (const auto& leak : cfg.leak_events)
        doc["leak_events"].push_back({{"junction", leak.junction_label},
                                      {"start_hours", leak.start_hours},
                                      {"emitter_coeff", leak.emitter_coeff},
                                      {"gamma", leak.gamma}});
    return doc;
}

PressureDataset simulate(const NetworkModel& model, const SimulationConfig& cfg) {
    validateConfig(model, cfg);
    HydraulicSolver solver(model);
    const Eigen::Index n = Eigen::Index(model.junctions.size());
    const auto steps = static_cast<Eigen::Index>(
        std::llround(cfg.duration_hours * 3600.0 / cfg.timestep_s));
    if (steps < 1) throw ConfigError("simulation must cover at least one timestep");

    // Pattern lookup per junction; junctions without a pattern stay at 1.
    std::vector<const Pattern*> pattern_of(size_t(n), nullptr);
    for (Eigen::Index i = 0; i < n; ++i)
        if (model.junctions[size_t(i)].demand_pattern_id)
            pattern_of[size_t(i)] = &model.patterns.at(*model.junctions[size_t(i)].demand_pattern_id);

    Eigen::VectorXd base_emitter(n), base_gamma = Eigen::VectorXd::Constant(n, 0.5);
    Eigen::VectorXd elevations(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        base_emitter[i] = model.junctions[size_t(i)].emitter_coeff;
        elevations[i] = model.junctions[size_t(i)].elevation;
    }

    std::vector<double> tank_level;
    std::vector<double> tank_area;
    for (const auto& t : model.tanks) {
        tank_level.push_back(t.init_level);
        tank_area.push_back(M_PI * t.diameter * t.diameter / 4.0);
    }

    GaussianSampler demand_rng(cfg.seed);
    GaussianSampler measure_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    PressureDataset ds;
    ds.timestamps.resize(steps);
    ds.pressures.resize(steps, n);
    ds.labels = solver.junctions();
    ds.leak_events = cfg.leak_events;
    ds.config_hash = hashHex(serializeInp(model) + simulationConfigToJson(cfg).dump());

    Eigen::VectorXd multipliers(n), emitter(n), gamma(n), tank_heads(Eigen::Index(model.tanks.size()));
    Eigen::VectorXd warm_start;
    for (Eigen::Index t = 0; t < steps; ++t) {
        const double time_s = double(t) * cfg.timestep_s;
        const double time_h = time_s / 3600.0;
        ds.timestamps[t] = time_s;

        for (Eigen::Index i = 0; i < n; ++i) {
            double m = 1.0;
            if (const Pattern* pat = pattern_of[size_t(i)]) {
                const auto idx = static_cast<size_t>(std::floor(time_s / model.pattern_timestep_s));
                m = pat->multipliers[idx % pat->multipliers.size()];
            }
            multipliers[i] = m;
        }
        if (cfg.demand_noise > 0.0)
            for (Eigen::Index i = 0; i < n; ++i)
                multipliers[i] *= std::max(0.0, 1.0 + cfg.demand_noise * demand_rng.next());

        emitter = base_emitter;
        gamma = base_gamma;
        for (const auto& leak : cfg.leak_events) {
            if (time_h + 1e-12 >= leak.start_hours) {
                const Eigen::Index i = solver.junctions().at(leak.junction_label);
                emitter[i] += leak.emitter_coeff;
                gamma[i] = leak.gamma;
            }
        }

        for (size_t k = 0; k < model.tanks.size(); ++k) {
            const double level = cfg.tank_mode == TankMode::fixed_head
                                     ? model.tanks[k].init_level
                                     : tank_level[k];
            tank_heads[Eigen::Index(k)] = model.tanks[k].elevation + level;
        }

        SteadyStateResult r;
        try {
            r = solver.solve(multipliers, tank_heads, emitter, gamma,
                             warm_start.size() == n ? &warm_start : nullptr);
        } catch (const NumericError& e) {
            throw NonConvergence("timestep " + std::to_string(t) + ": " + e.what(), 0, 0.0);
        }
        warm_start = r.junction_heads;
        ds.pressures.row(t) = (r.junction_heads - elevations).transpose();
        if (cfg.measurement_noise > 0.0)
            for (Eigen::Index i = 0; i < n; ++i)
                ds.pressures(t, i) += cfg.measurement_noise * measure_rng.next();

        if (cfg.tank_mode == TankMode::dynamic_level && !model.tanks.empty()) {
            const Eigen::VectorXd inflow = solver.tankInflows(r);
            for (size_t k = 0; k < model.tanks.size(); ++k) {
                tank_level[k] += inflow[Eigen::Index(k)] * (cfg.timestep_s / 3600.0) / tank_area[k];
                tank_level[k] = std::clamp(tank_level[k], model.tanks[k].min_level,
                                           model.tanks[k].max_level);
            }
        }
    }
    return ds;
}

void writePressureCsv(const PressureDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "time_s";
    for (const auto& label : ds.labels.labels) out << "," << label;
    out << "\n";
    char buf[40];
    for (Eigen::Index t = 0; t < ds.pressures.rows(); ++t) {
        std::snprintf(buf, sizeof(buf), "%.10g", ds.timestamps[t]);
        out << buf;
        for (Eigen::Index i = 0; i < ds.pressures.cols(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.10g", ds.pressures(t, i));
            out << "," << buf;
        }
        out << "\n";
    }
}

void writeDatasetMeta(const PressureDataset& ds, const std::string& path) {
    nlohmann::json doc;
    doc["config_hash"] = ds.config_hash;
    doc["leak_events"] = nlohmann::json::array();
    for (const auto& leak : ds.leak_events)
        doc["leak_events"].push_back({{"junction", leak.junction_label},
                                      {"start_hours", leak.start_hours},
                                      {"emitter_coeff", leak.emitter_coeff},
                                      {"gamma", leak.gamma}});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << doc.dump(2) << "\n";
}

PressureDataset importCsv(const std::string& path, const JunctionIndex* expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ValueError("'" + path + "' is empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.empty() || header[0] != "time_s")
        throw ValueError("'" + path + "': first column must be time_s");

    PressureDataset ds;
    for (size_t k = 1; k < header.size(); ++k) {
        ds.labels.index_of.emplace(header[k], int(ds.labels.labels.size()));
        ds.labels.labels.push_back(header[k]);
    }
    if (ds.labels.labels.empty()) throw ValueError("'" + path + "': no junction columns");
    if (expected && expected->labels != ds.labels.labels)
        throw LabelMismatch("'" + path + "': header labels do not match the network model");

    const size_t n = ds.labels.labels.size();
    std::vector<double> times;
    std::vector<double> values;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            try {
                v = std::stod(cell);
            } catch (const std::exception&) {
                throw ValueError(path + ": row " + std::to_string(row) + " col " +
                                 std::to_string(col + 1) + " is not numeric");
            }
            if (!std::isfinite(v))
                throw ValueError(path + ": row " + std::to_string(row) + " col " +
                                 std::to_string(col + 1) + " is not finite");
            if (col == 0)
                times.push_back(v);
            else
                values.push_back(v);
            ++col;
        }
        if (col != n + 1)
            throw ValueError(path + ": row " + std::to_string(row) + " has " +
                             std::to_string(col) + " columns, expected " + std::to_string(n + 1));
    }

    const auto rows = Eigen::Index(times.size());
    ds.timestamps = Eigen::Map<Eigen::VectorXd>(times.data(), rows);
    ds.pressures.resize(rows, Eigen::Index(n));
    for (Eigen::Index t = 0; t < rows; ++t)
        for (Eigen::Index i = 0; i < Eigen::Index(n); ++i)
            ds.pressures(t, i) = values[size_t(t) * n + size_t(i)];
    return ds;
}

}  // namespace hsn
