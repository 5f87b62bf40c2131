#include "hsn/net_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace hsn {

namespace {

enum class Section {
    none,
    title,
    junctions,
    reservoirs,
    tanks,
    pipes,
    pumps,
    curves,
    patterns,
    emitters,
    times,
    options,
    skipped,
    end,
};

std::string toUpper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return char(std::toupper(c)); });
    return s;
}

// EPANET sections we recognize but do not model; rows are skipped.
const std::set<std::string>& knownSkippedSections() {
    static const std::set<std::string> sections = {
        "[QUALITY]",   "[VALVES]",  "[CONTROLS]", "[RULES]",    "[DEMANDS]",
        "[SOURCES]",   "[STATUS]",  "[ENERGY]",   "[REACTIONS]", "[MIXING]",
        "[REPORT]",    "[COORDINATES]", "[VERTICES]", "[LABELS]", "[BACKDROP]",
        "[TAGS]",      "[ROUGHNESS]"};
    return sections;
}

Section sectionFromHeader(const std::string& upper, int line_no) {
    if (upper == "[TITLE]") return Section::title;
    if (upper == "[JUNCTIONS]") return Section::junctions;
    if (upper == "[RESERVOIRS]") return Section::reservoirs;
    if (upper == "[TANKS]") return Section::tanks;
    if (upper == "[PIPES]") return Section::pipes;
    if (upper == "[PUMPS]") return Section::pumps;
    if (upper == "[CURVES]") return Section::curves;
    if (upper == "[PATTERNS]") return Section::patterns;
    if (upper == "[EMITTERS]") return Section::emitters;
    if (upper == "[TIMES]") return Section::times;
    if (upper == "[OPTIONS]") return Section::options;
    if (upper == "[END]") return Section::end;
    if (knownSkippedSections().count(upper)) return Section::skipped;
    throw SyntaxError(line_no, "unknown section header " + upper);
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

double parseNumber(const std::string& tok, int line_no, const char* what) {
    double value = 0.0;
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw SyntaxError(line_no, std::string("bad numeric value for ") + what + ": '" + tok + "'");
    return value;
}

// Accepts H:MM[:SS], a plain number (hours), or a number with a
// HOURS/MINUTES/SECONDS suffix. Returns seconds.
double parseDuration(const std::vector<std::string>& toks, size_t first, int line_no) {
    if (first >= toks.size()) throw SyntaxError(line_no, "missing time value");
    const std::string& v = toks[first];
    if (v.find(':') != std::string::npos) {
        int h = 0, m = 0, s = 0;
        const int fields = std::sscanf(v.c_str(), "%d:%d:%d", &h, &m, &s);
        if (fields < 2) throw SyntaxError(line_no, "bad clock time '" + v + "'");
        return h * 3600.0 + m * 60.0 + s;
    }
    const double value = parseNumber(v, line_no, "time");
    std::string unit = first + 1 < toks.size() ? toUpper(toks[first + 1]) : "HOURS";
    if (unit == "HOURS" || unit == "HR" || unit == "H") return value * 3600.0;
    if (unit == "MINUTES" || unit == "MIN" || unit == "M") return value * 60.0;
    if (unit == "SECONDS" || unit == "SEC" || unit == "S") return value;
    throw SyntaxError(line_no, "bad time unit '" + toks[first + 1] + "'");
}

struct ParseState {
    NetworkModel model;
    std::map<std::string, std::vector<CurvePoint>> curves;
    std::map<std::string, int> node_line;  // id -> defining line
    std::map<std::string, int> link_line;
    std::vector<std::pair<std::string, int>> pending_emitters_lines;
    std::map<std::string, double> pending_emitters;
    std::vector<std::string> warnings;
};

void requireNewNodeId(ParseState& st, const std::string& id, int line_no) {
    if (!st.node_line.emplace(id, line_no).second)
        throw SyntaxError(line_no, "duplicate node id '" + id + "'");
}

void requireNewLinkId(ParseState& st, const std::string& id, int line_no) {
    if (!st.link_line.emplace(id, line_no).second)
        throw SyntaxError(line_no, "duplicate link id '" + id + "'");
}

void parseRow(ParseState& st, Section section, const std::string& line, int line_no) {
    auto toks = tokenize(line);
    auto& model = st.model;
    switch (section) {
        case Section::title:
            model.title += model.title.empty() ? line : "\n" + line;
            break;
        case Section::junctions: {
            if (toks.size() < 2 || toks.size() > 4)
                throw SyntaxError(line_no, "junction row needs: id elevation [demand] [pattern]");
            Junction j;
            j.id = toks[0];
            requireNewNodeId(st, j.id, line_no);
            j.elevation = parseNumber(toks[1], line_no, "elevation");
            if (toks.size() >= 3) j.base_demand = parseNumber(toks[2], line_no, "demand");
            if (toks.size() == 4) j.demand_pattern_id = toks[3];
            model.junctions.push_back(std::move(j));
            break;
        }
        case Section::reservoirs: {
            if (toks.size() != 2) throw SyntaxError(line_no, "reservoir row needs: id head");
            Reservoir r;
            r.id = toks[0];
            requireNewNodeId(st, r.id, line_no);
            r.total_head = parseNumber(toks[1], line_no, "head");
            model.reservoirs.push_back(std::move(r));
            break;
        }
        case Section::tanks: {
            if (toks.size() != 6)
                throw SyntaxError(line_no, "tank row needs: id elev initlvl minlvl maxlvl diam");
            Tank t;
            t.id = toks[0];
            requireNewNodeId(st, t.id, line_no);
            t.elevation = parseNumber(toks[1], line_no, "elevation");
            t.init_level = parseNumber(toks[2], line_no, "init level");
            t.min_level = parseNumber(toks[3], line_no, "min level");
            t.max_level = parseNumber(toks[4], line_no, "max level");
            t.diameter = parseNumber(toks[5], line_no, "diameter");
            model.tanks.push_back(std::move(t));
            break;
        }
        case Section::pipes: {
            if (toks.size() != 6)
                throw SyntaxError(line_no, "pipe row needs: id n1 n2 length diam roughness");
            Pipe p;
            p.id = toks[0];
            requireNewLinkId(st, p.id, line_no);
            p.from_node = toks[1];
            p.to_node = toks[2];
            p.length = parseNumber(toks[3], line_no, "length");
            p.diameter = parseNumber(toks[4], line_no, "diameter");
            p.roughness = parseNumber(toks[5], line_no, "roughness");
            model.pipes.push_back(std::move(p));
            break;
        }
        case Section::pumps: {
            if (toks.size() != 5 || toUpper(toks[3]) != "HEAD")
                throw SyntaxError(line_no, "pump row needs: id n1 n2 HEAD curveid");
            Pump p;
            p.id = toks[0];
            requireNewLinkId(st, p.id, line_no);
            p.from_node = toks[1];
            p.to_node = toks[2];
            p.curve_id = toks[4];
            model.pumps.push_back(std::move(p));
            break;
        }
        case Section::curves: {
            if (toks.size() != 3) throw SyntaxError(line_no, "curve row needs: id flow head");
            CurvePoint pt;
            pt.flow = parseNumber(toks[1], line_no, "curve flow");
            pt.head = parseNumber(toks[2], line_no, "curve head");
            st.curves[toks[0]].push_back(pt);
            break;
        }
        case Section::patterns: {
            if (toks.size() < 2)
                throw SyntaxError(line_no, "pattern row needs: id multiplier...");
            auto& pattern = model.patterns[toks[0]];
            for (size_t k = 1; k < toks.size(); ++k) {
                const double m = parseNumber(toks[k], line_no, "pattern multiplier");
                if (m < 0.0) throw ValueError("line " + std::to_string(line_no) +
                                              ": pattern multiplier must be >= 0");
                pattern.multipliers.push_back(m);
            }
            break;
        }
        case Section::emitters: {
            if (toks.size() != 2) throw SyntaxError(line_no, "emitter row needs: id coeff");
            if (!st.pending_emitters.emplace(toks[0], parseNumber(toks[1], line_no, "emitter coeff"))
                     .second)
                throw SyntaxError(line_no, "duplicate emitter for '" + toks[0] + "'");
            st.pending_emitters_lines.emplace_back(toks[0], line_no);
            break;
        }
        case Section::times: {
            if (toks.size() >= 3 && toUpper(toks[0]) == "PATTERN" && toUpper(toks[1]) == "TIMESTEP") {
                model.pattern_timestep_s = parseDuration(toks, 2, line_no);
                if (model.pattern_timestep_s <= 0.0)
                    throw ValueError("line " + std::to_string(line_no) +
                                     ": pattern timestep must be positive");
            } else {
                st.warnings.push_back("line " + std::to_string(line_no) +
                                      ": ignored [TIMES] row '" + toks[0] + "'");
            }
            break;
        }
        case Section::options: {
            // Only the unit system is checked; everything else is ignored.
            if (!toks.empty() && (toUpper(toks[0]) == "UNITS" || toUpper(toks[0]) == "FLOWUNITS")) {
                if (toks.size() < 2 || toUpper(toks[1]) != "CMH")
                    throw ValueError("line " + std::to_string(line_no) +
                                     ": only SI units (CMH) are supported");
            } else {
                st.warnings.push_back("line " + std::to_string(line_no) +
                                      ": ignored [OPTIONS] row");
            }
            break;
        }
        case Section::none:
            throw SyntaxError(line_no, "content before any section header");
        case Section::skipped:
        case Section::end:
            break;
    }
}

void validate(ParseState& st) {
    auto& model = st.model;

    std::set<std::string> node_ids;
    for (const auto& j : model.junctions) node_ids.insert(j.id);
    for (const auto& r : model.reservoirs) node_ids.insert(r.id);
    for (const auto& t : model.tanks) node_ids.insert(t.id);

    for (const auto& p : model.pipes) {
        if (!node_ids.count(p.from_node))
            throw ReferenceError("pipe '" + p.id + "' references unknown node '" + p.from_node + "'");
        if (!node_ids.count(p.to_node))
            throw ReferenceError("pipe '" + p.id + "' references unknown node '" + p.to_node + "'");
        if (p.from_node == p.to_node)
            throw ValueError("pipe '" + p.id + "' connects a node to itself");
        if (p.length <= 0.0) throw ValueError("pipe '" + p.id + "' has non-positive length");
        if (p.diameter <= 0.0) throw ValueError("pipe '" + p.id + "' has non-positive diameter");
        if (p.roughness <= 0.0) throw ValueError("pipe '" + p.id + "' has non-positive roughness");
    }
    for (auto& p : model.pumps) {
        if (!node_ids.count(p.from_node))
            throw ReferenceError("pump '" + p.id + "' references unknown node '" + p.from_node + "'");
        if (!node_ids.count(p.to_node))
            throw ReferenceError("pump '" + p.id + "' references unknown node '" + p.to_node + "'");
        if (p.from_node == p.to_node)
            throw ValueError("pump '" + p.id + "' connects a node to itself");
        auto it = st.curves.find(p.curve_id);
        if (it == st.curves.end())
            throw ReferenceError("pump '" + p.id + "' references unknown curve '" + p.curve_id + "'");
        p.curve = it->second;
        std::sort(p.curve.begin(), p.curve.end(),
                  [](const CurvePoint& a, const CurvePoint& b) { return a.flow < b.flow; });
        for (size_t k = 0; k < p.curve.size(); ++k) {
            if (p.curve[k].flow < 0.0 || p.curve[k].head < 0.0)
                throw ValueError("pump '" + p.id + "' curve values must be non-negative");
            if (k > 0 && p.curve[k].flow == p.curve[k - 1].flow)
                throw ValueError("pump '" + p.id + "' curve has duplicate flow values");
            if (k > 0 && p.curve[k].head >= p.curve[k - 1].head)
                throw ValueError("pump '" + p.id + "' curve head must decrease with flow");
        }
    }
    for (const auto& t : model.tanks) {
        if (t.diameter <= 0.0) throw ValueError("tank '" + t.id + "' has non-positive diameter");
        if (!(t.min_level <= t.init_level && t.init_level <= t.max_level))
            throw ValueError("tank '" + t.id + "' levels must satisfy min <= init <= max");
    }
    for (const auto& j : model.junctions) {
        if (j.demand_pattern_id && !model.patterns.count(*j.demand_pattern_id))
            throw ReferenceError("junction '" + j.id + "' references unknown pattern '" +
                                 *j.demand_pattern_id + "'");
    }
    for (const auto& [id, pattern] : model.patterns)
        if (pattern.multipliers.empty())
            throw ValueError("pattern '" + id + "' has no multipliers");

    for (const auto& [id, coeff] : st.pending_emitters) {
        auto it = std::find_if(model.junctions.begin(), model.junctions.end(),
                               [&](const Junction& j) { return j.id == id; });
        if (it == model.junctions.end())
            throw ReferenceError("emitter references unknown junction '" + id + "'");
        if (coeff < 0.0) throw ValueError("emitter at '" + id + "' must be non-negative");
        it->emitter_coeff = coeff;
    }
}

}  // namespace

const Junction* NetworkModel::findJunction(const std::string& id) const {
    auto it = std::find_if(junctions.begin(), junctions.end(),
                           [&](const Junction& j) { return j.id == id; });
    return it == junctions.end() ? nullptr : &*it;
}

int JunctionIndex::at(const std::string& label) const {
    auto it = index_of.find(label);
    if (it == index_of.end()) throw LabelMismatch("unknown junction label '" + label + "'");
    return it->second;
}

NetworkModel parseInp(std::string_view text, std::vector<std::string>* warnings) {
    ParseState st;
    Section section = Section::none;

    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size() && section != Section::end) {
        const size_t nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        std::string line(raw);
        if (auto comment = line.find(';'); comment != std::string::npos) line.resize(comment);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            const std::string upper = toUpper(line);
            section = sectionFromHeader(upper, line_no);
            if (section == Section::skipped)
                st.warnings.push_back("line " + std::to_string(line_no) + ": skipped section " +
                                      upper);
            continue;
        }
        parseRow(st, section, line, line_no);
    }

    validate(st);
    if (warnings) *warnings = std::move(st.warnings);
    return std::move(st.model);
}

NetworkModel loadInpFile(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open network file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseInp(buf.str(), warnings);
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string serializeInp(const NetworkModel& model) {
    std::ostringstream out;
    if (!model.title.empty()) out << "[TITLE]\n" << model.title << "\n\n";

    out << "[JUNCTIONS]\n";
    for (const auto& j : model.junctions) {
        out << j.id << " " << fmt(j.elevation) << " " << fmt(j.base_demand);
        if (j.demand_pattern_id) out << " " << *j.demand_pattern_id;
        out << "\n";
    }
    out << "\n[RESERVOIRS]\n";
    for (const auto& r : model.reservoirs) out << r.id << " " << fmt(r.total_head) << "\n";
    out << "\n[TANKS]\n";
    for (const auto& t : model.tanks)
        out << t.id << " " << fmt(t.elevation) << " " << fmt(t.init_level) << " "
            << fmt(t.min_level) << " " << fmt(t.max_level) << " " << fmt(t.diameter) << "\n";
    out << "\n[PIPES]\n";
    for (const auto& p : model.pipes)
        out << p.id << " " << p.from_node << " " << p.to_node << " " << fmt(p.length) << " "
            << fmt(p.diameter) << " " << fmt(p.roughness) << "\n";
    out << "\n[PUMPS]\n";
    for (const auto& p : model.pumps)
        out << p.id << " " << p.from_node << " " << p.to_node << " HEAD " << p.curve_id << "\n";
    out << "\n[CURVES]\n";
    std::set<std::string> written_curves;
    for (const auto& p : model.pumps) {
        if (!written_curves.insert(p.curve_id).second) continue;
        for (const auto& pt : p.curve)
            out << p.curve_id << " " << fmt(pt.flow) << " " << fmt(pt.head) << "\n";
    }
    out << "\n[PATTERNS]\n";
    for (const auto& [id, pattern] : model.patterns) {
        out << id;
        for (double m : pattern.multipliers) out << " " << fmt(m);
        out << "\n";
    }
    out << "\n[EMITTERS]\n";
    for (const auto& j : model.junctions)
        if (j.emitter_coeff != 0.0) out << j.id << " " << fmt(j.emitter_coeff) << "\n";
    out << "\n[TIMES]\nPattern Timestep " << fmt(model.pattern_timestep_s) << " SECONDS\n";
    out << "\n[END]\n";
    return out.str();
}

std::pair<GraphTopology, JunctionIndex> junctionGraph(const NetworkModel& model) {
    if (model.junctions.empty()) throw EmptyGraph("model has no junctions");

    JunctionIndex index;
    index.labels.reserve(model.junctions.size());
    for (const auto& j : model.junctions) {
        index.index_of.emplace(j.id, int(index.labels.size()));
        index.labels.push_back(j.id);
    }

    std::vector<Edge> edges;
    for (const auto& p : model.pipes) {
        auto a = index.index_of.find(p.from_node);
        auto b = index.index_of.find(p.to_node);
        if (a == index.index_of.end() || b == index.index_of.end()) continue;  // boundary link
        edges.push_back({a->second, b->second});
    }
    return {GraphTopology::fromEdges(Eigen::Index(index.labels.size()), std::move(edges)), index};
}

}  // namespace hsn
