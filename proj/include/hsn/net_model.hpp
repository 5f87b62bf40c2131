#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hsn/errors.hpp"
#include "hsn/graph.hpp"

namespace hsn {

// All quantities are SI: lengths and heads in m, flows in m3/h.

struct Junction {
    std::string id;
    double elevation = 0.0;
    double base_demand = 0.0;
    std::optional<std::string> demand_pattern_id;
    double emitter_coeff = 0.0;  // m3/h per m^gamma
    friend bool operator==(const Junction&, const Junction&) = default;
};

struct Reservoir {
    std::string id;
    double total_head = 0.0;
    friend bool operator==(const Reservoir&, const Reservoir&) = default;
};

struct Tank {
    std::string id;
    double elevation = 0.0;
    double init_level = 0.0;
    double min_level = 0.0;
    double max_level = 0.0;
    double diameter = 0.0;
    friend bool operator==(const Tank&, const Tank&) = default;
};

struct Pipe {
    std::string id;
    std::string from_node;
    std::string to_node;
    double length = 0.0;
    double diameter = 0.0;
    double roughness = 0.0;  // Hazen-Williams C
    friend bool operator==(const Pipe&, const Pipe&) = default;
};

struct CurvePoint {
    double flow = 0.0;  // m3/h
    double head = 0.0;  // m
    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct Pump {
    std::string id;
    std::string from_node;
    std::string to_node;
    std::string curve_id;
    std::vector<CurvePoint> curve;
    friend bool operator==(const Pump&, const Pump&) = default;
};

struct Pattern {
    std::vector<double> multipliers;
    friend bool operator==(const Pattern&, const Pattern&) = default;
};

struct NetworkModel {
    std::string title;
    std::vector<Junction> junctions;
    std::vector<Reservoir> reservoirs;
    std::vector<Tank> tanks;
    std::vector<Pipe> pipes;
    std::vector<Pump> pumps;
    std::map<std::string, Pattern> patterns;
    double pattern_timestep_s = 3600.0;

    const Junction* findJunction(const std::string& id) const;
    friend bool operator==(const NetworkModel&, const NetworkModel&) = default;
};

/// Stable label <-> row index mapping in [JUNCTIONS] file order.
struct JunctionIndex {
    std::vector<std::string> labels;
    std::unordered_map<std::string, int> index_of;

    int at(const std::string& label) const;
    int size() const { return int(labels.size()); }
};

/// Parses the documented INP subset. Section headers are case-insensitive,
/// ';' starts a comment, columns are whitespace separated. Known EPANET
/// sections outside the subset are skipped (one warning per section);
/// unknown headers are an error. The returned model satisfies all
/// invariants or an exception is thrown.
NetworkModel parseInp(std::string_view text, std::vector<std::string>* warnings = nullptr);

/// Reads a file and parses it with parseInp.
NetworkModel loadInpFile(const std::string& path, std::vector<std::string>* warnings = nullptr);

/// Emits the model as INP text; parseInp(serializeInp(m)) == m.
std::string serializeInp(const NetworkModel& model);

/// Junction-only undirected graph: an edge exists iff a pipe connects two
/// junctions directly. Pipes touching tanks/reservoirs and all pumps are
/// boundary links and contribute nothing. Parallel pipes collapse.
std::pair<GraphTopology, JunctionIndex> junctionGraph(const NetworkModel& model);

}  // namespace hsn
