#include "ramiflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ramiflow::io {

using nlohmann::json;

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(what + ": malformed JSON: " + e.what());
    }
}

double checked_number(const json& j, const std::string& field) {
    if (!j.is_number())
        throw std::runtime_error("field '" + field + "' must be a number");
    double x = j.get<double>();
    if (!std::isfinite(x))
        throw std::runtime_error("field '" + field + "' must be finite (NaN/Inf rejected)");
    return x;
}

Vec checked_point(const json& j, int dim, const std::string& field) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw std::runtime_error("field '" + field + "' must be an array of " +
                                 std::to_string(dim) + " numbers");
    Vec p(dim);
    for (int k = 0; k < dim; ++k) p[k] = checked_number(j[k], field + "[" + std::to_string(k) + "]");
    return p;
}

int checked_dim(const json& j, const std::string& what) {
    if (!j.contains("dim") || !j["dim"].is_number_integer())
        throw std::runtime_error(what + ": field 'dim' must be an integer");
    int dim = j["dim"].get<int>();
    if (dim < 1) throw std::runtime_error(what + ": field 'dim' must be at least 1");
    return dim;
}

void emit_point(std::string& out, const Vec& p) {
    out += '[';
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k) out += ',';
        out += format_double(p[k]);
    }
    out += ']';
}

}  // namespace

DiscreteMeasure parse_measure(const std::string& text) {
    json j = parse_json(text, "measure");
    int dim = checked_dim(j, "measure");
    if (!j.contains("atoms") || !j["atoms"].is_array())
        throw std::runtime_error("measure: field 'atoms' must be an array");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < j["atoms"].size(); ++i) {
        const json& ja = j["atoms"][i];
        std::string field = "atoms[" + std::to_string(i) + "]";
        if (!ja.is_object() || !ja.contains("pos") || !ja.contains("mass"))
            throw std::runtime_error("field '" + field + "' must have 'pos' and 'mass'");
        Atom a;
        a.pos = checked_point(ja["pos"], dim, field + ".pos");
        a.mass = checked_number(ja["mass"], field + ".mass");
        if (!(a.mass > 0.0))
            throw std::runtime_error("field '" + field + ".mass' must be positive");
        atoms.push_back(std::move(a));
    }
    return DiscreteMeasure(dim, std::move(atoms));
}

FluxGraph parse_graph(const std::string& text) {
    json j = parse_json(text, "graph");
    int dim = checked_dim(j, "graph");
    if (!j.contains("vertices") || !j["vertices"].is_array())
        throw std::runtime_error("graph: field 'vertices' must be an array");
    if (!j.contains("edges") || !j["edges"].is_array())
        throw std::runtime_error("graph: field 'edges' must be an array");
    std::vector<Vec> verts;
    for (std::size_t i = 0; i < j["vertices"].size(); ++i)
        verts.push_back(checked_point(j["vertices"][i], dim, "vertices[" + std::to_string(i) + "]"));
    std::vector<FluxEdge> edges;
    for (std::size_t i = 0; i < j["edges"].size(); ++i) {
        const json& je = j["edges"][i];
        std::string field = "edges[" + std::to_string(i) + "]";
        if (!je.is_object() || !je.contains("tail") || !je.contains("head") || !je.contains("w"))
            throw std::runtime_error("field '" + field + "' must have 'tail', 'head' and 'w'");
        if (!je["tail"].is_number_unsigned() || !je["head"].is_number_unsigned())
            throw std::runtime_error("field '" + field + "': 'tail'/'head' must be vertex indices");
        FluxEdge e;
        e.tail = je["tail"].get<std::size_t>();
        e.head = je["head"].get<std::size_t>();
        e.weight = checked_number(je["w"], field + ".w");
        if (e.tail >= verts.size() || e.head >= verts.size())
            throw std::runtime_error("field '" + field + "': vertex index out of range");
        if (e.weight < 0.0)
            throw std::runtime_error("field '" + field + ".w' must be non-negative");
        edges.push_back(e);
    }
    return FluxGraph(dim, std::move(verts), std::move(edges));
}

IrrigationPattern parse_pattern(const std::string& text) {
    json j = parse_json(text, "pattern");
    int dim = checked_dim(j, "pattern");
    if (!j.contains("fibres") || !j["fibres"].is_array())
        throw std::runtime_error("pattern: field 'fibres' must be an array");
    std::vector<Fibre> fibres;
    for (std::size_t i = 0; i < j["fibres"].size(); ++i) {
        const json& jf = j["fibres"][i];
        std::string field = "fibres[" + std::to_string(i) + "]";
        if (!jf.is_object() || !jf.contains("mass") || !jf.contains("polyline"))
            throw std::runtime_error("field '" + field + "' must have 'mass' and 'polyline'");
        Fibre f;
        f.mass = checked_number(jf["mass"], field + ".mass");
        if (!(f.mass > 0.0))
            throw std::runtime_error("field '" + field + ".mass' must be positive");
        if (!jf["polyline"].is_array() || jf["polyline"].empty())
            throw std::runtime_error("field '" + field + ".polyline' must be a nonempty array");
        for (std::size_t k = 0; k < jf["polyline"].size(); ++k)
            f.polyline.push_back(checked_point(jf["polyline"][k], dim,
                                               field + ".polyline[" + std::to_string(k) + "]"));
        fibres.push_back(std::move(f));
    }
    return IrrigationPattern(dim, std::move(fibres));
}

NetworkSet parse_network(const std::string& text) {
    json j = parse_json(text, "network");
    int dim = checked_dim(j, "network");
    if (!j.contains("segments") || !j["segments"].is_array())
        throw std::runtime_error("network: field 'segments' must be an array");
    std::vector<Segment> segments;
    for (std::size_t i = 0; i < j["segments"].size(); ++i) {
        const json& js = j["segments"][i];
        std::string field = "segments[" + std::to_string(i) + "]";
        if (!js.is_array() || js.size() != 2)
            throw std::runtime_error("field '" + field + "' must be a pair of points");
        Segment s;
        s.a = checked_point(js[0], dim, field + "[0]");
        s.b = checked_point(js[1], dim, field + "[1]");
        segments.push_back(std::move(s));
    }
    return NetworkSet(dim, std::move(segments));
}

DiscreteMeasure read_measure(const std::string& path) { return parse_measure(read_text(path)); }
FluxGraph read_graph(const std::string& path) { return parse_graph(read_text(path)); }
IrrigationPattern read_pattern(const std::string& path) { return parse_pattern(read_text(path)); }
NetworkSet read_network(const std::string& path) { return parse_network(read_text(path)); }

std::string measure_to_json(const DiscreteMeasure& mu) {
    std::string out = "{\"dim\":" + std::to_string(mu.dim()) + ",\"atoms\":[";
    for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
        if (i) out += ',';
        out += "{\"pos\":";
        emit_point(out, mu.atoms()[i].pos);
        out += ",\"mass\":" + format_double(mu.atoms()[i].mass) + "}";
    }
    out += "]}\n";
    return out;
}

std::string graph_to_json(const FluxGraph& g) {
    std::string out = "{\"dim\":" + std::to_string(g.dim()) + ",\"vertices\":[";
    for (std::size_t i = 0; i < g.vertices().size(); ++i) {
        if (i) out += ',';
        emit_point(out, g.vertices()[i]);
    }
    out += "],\"edges\":[";
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        if (i) out += ',';
        const FluxEdge& e = g.edges()[i];
        out += "{\"tail\":" + std::to_string(e.tail) + ",\"head\":" + std::to_string(e.head) +
               ",\"w\":" + format_double(e.weight) + "}";
    }
    out += "]}\n";
    return out;
}

std::string pattern_to_json(const IrrigationPattern& chi) {
    std::string out = "{\"dim\":" + std::to_string(chi.dim()) + ",\"fibres\":[";
    for (std::size_t i = 0; i < chi.fibres().size(); ++i) {
        if (i) out += ',';
        const Fibre& f = chi.fibres()[i];
        out += "{\"mass\":" + format_double(f.mass) + ",\"polyline\":[";
        for (std::size_t k = 0; k < f.polyline.size(); ++k) {
            if (k) out += ',';
            emit_point(out, f.polyline[k]);
        }
        out += "]}";
    }
    out += "]}\n";
    return out;
}

std::string network_to_json(const NetworkSet& sigma) {
    std::string out = "{\"dim\":" + std::to_string(sigma.dim()) + ",\"segments\":[";
    for (std::size_t i = 0; i < sigma.segments().size(); ++i) {
        if (i) out += ',';
        out += '[';
        emit_point(out, sigma.segments()[i].a);
        out += ',';
        emit_point(out, sigma.segments()[i].b);
        out += ']';
    }
    out += "]}\n";
    return out;
}

std::string path_measure_to_json(const TransportPathMeasure& tpm) {
    std::string out = "{\"paths\":[";
    for (std::size_t i = 0; i < tpm.paths.size(); ++i) {
        if (i) out += ',';
        out += "{\"vertices\":[";
        for (std::size_t k = 0; k < tpm.paths[i].vertices.size(); ++k) {
            if (k) out += ',';
            emit_point(out, tpm.paths[i].vertices[k]);
        }
        out += "],\"w\":" + format_double(tpm.paths[i].weight) + "}";
    }
    out += "]}\n";
    return out;
}

std::string plan_to_json(const TransportPlan& plan) {
    std::string out = "{\"entries\":[";
    for (std::size_t i = 0; i < plan.entries.size(); ++i) {
        if (i) out += ',';
        out += "{\"source\":" + std::to_string(plan.entries[i].source) +
               ",\"sink\":" + std::to_string(plan.entries[i].sink) +
               ",\"mass\":" + format_double(plan.entries[i].mass) + "}";
    }
    out += "]}\n";
    return out;
}

std::string report_to_json(const EquivalenceReport& report) {
    std::string out = "{\"costs\":{\"flux\":" + format_double(report.flux_cost) +
                      ",\"pattern\":" + format_double(report.pattern_cost);
    if (report.sigma_cost) out += ",\"sigma\":" + format_double(*report.sigma_cost);
    out += "},\"delta\":" + format_double(report.delta);
    out += ",\"tol_delta\":" + format_double(report.tol_delta);
    if (report.single_path) {
        out += std::string(",\"single_path\":") + (*report.single_path ? "true" : "false");
        out += ",\"single_path_cost_change\":" + format_double(report.single_path_cost_change);
    }
    out += ",\"inequalities\":[";
    for (std::size_t i = 0; i < report.inequalities.size(); ++i) {
        if (i) out += ',';
        const InequalityCheck& c = report.inequalities[i];
        out += "{\"name\":\"" + c.name + "\",\"lhs\":" + format_double(c.lhs) +
               ",\"rhs\":" + format_double(c.rhs) + ",\"tol\":" + format_double(c.tol) +
               ",\"ok\":" + (c.ok ? "true" : "false") + "}";
    }
    out += std::string("],\"pass\":") + (report.pass ? "true" : "false") + "}\n";
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string trace_to_csv(const std::vector<TraceEntry>& trace) {
    std::string out = "restart,step,cost\n";
    int step = 0, last_restart = -1;
    for (const TraceEntry& t : trace) {
        if (t.restart != last_restart) {
            step = 0;
            last_restart = t.restart;
        }
        out += std::to_string(t.restart) + "," + std::to_string(step++) + "," +
               format_double(t.cost) + "\n";
    }
    return out;
}

std::string edges_to_csv(const FluxGraph& g, const CostSpec& spec) {
    std::string out = "tail,head,weight,length,edge_cost\n";
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        const FluxEdge& fe = g.edges()[e];
        double len = g.edge_length(e);
        out += std::to_string(fe.tail) + "," + std::to_string(fe.head) + "," +
               format_double(fe.weight) + "," + format_double(len) + "," +
               format_double(edge_cost(fe.weight, spec) * len) + "\n";
    }
    return out;
}

std::string render_svg(const FluxGraph& g, const CostSpec& spec) {
    // 2D projection: first two coordinates.
    double minx = 0, miny = 0, maxx = 1, maxy = 1;
    bool first = true;
    for (const Vec& v : g.vertices()) {
        double x = v.size() > 0 ? v[0] : 0.0, y = v.size() > 1 ? v[1] : 0.0;
        if (first) {
            minx = maxx = x;
            miny = maxy = y;
            first = false;
        }
        minx = std::min(minx, x);
        maxx = std::max(maxx, x);
        miny = std::min(miny, y);
        maxy = std::max(maxy, y);
    }
    double w = std::max(maxx - minx, 1e-9), h = std::max(maxy - miny, 1e-9);
    double pad = 0.05 * std::max(w, h);
    double max_cost = 1e-300;
    for (const FluxEdge& e : g.edges()) max_cost = std::max(max_cost, edge_cost(e.weight, spec));

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_double(minx - pad)
        << " " << format_double(miny - pad) << " " << format_double(w + 2 * pad) << " "
        << format_double(h + 2 * pad) << "\">\n";
    double stroke_scale = 0.02 * std::max(w, h);
    for (const FluxEdge& e : g.edges()) {
        const Vec& a = g.vertices()[e.tail];
        const Vec& b = g.vertices()[e.head];
        double width = stroke_scale * edge_cost(e.weight, spec) / max_cost;
        svg << "  <line x1=\"" << format_double(a[0]) << "\" y1=\""
            << format_double(a.size() > 1 ? a[1] : 0.0) << "\" x2=\"" << format_double(b[0])
            << "\" y2=\"" << format_double(b.size() > 1 ? b[1] : 0.0)
            << "\" stroke=\"#1f3a93\" stroke-width=\"" << format_double(width)
            << "\" stroke-linecap=\"round\"/>\n";
    }
    auto [mp, mm] = divergence(g);
    double r = 0.012 * std::max(w, h);
    for (const Atom& a : mp.atoms())
        svg << "  <circle cx=\"" << format_double(a.pos[0]) << "\" cy=\""
            << format_double(a.pos.size() > 1 ? a.pos[1] : 0.0) << "\" r=\"" << format_double(r)
            << "\" fill=\"#c0392b\"/>\n";
    for (const Atom& a : mm.atoms())
        svg << "  <circle cx=\"" << format_double(a.pos[0]) << "\" cy=\""
            << format_double(a.pos.size() > 1 ? a.pos[1] : 0.0) << "\" r=\"" << format_double(r)
            << "\" fill=\"#27ae60\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace ramiflow::io
