#pragma once

#include <string>

#include "ramiflow/equivalence.hpp"
#include "ramiflow/flux_graph.hpp"
#include "ramiflow/graph_reduce.hpp"
#include "ramiflow/measure.hpp"
#include "ramiflow/network.hpp"
#include "ramiflow/pattern.hpp"
#include "ramiflow/solver.hpp"

namespace ramiflow::io {

// Readers throw std::runtime_error with a message naming the offending field.
DiscreteMeasure read_measure(const std::string& path);
FluxGraph read_graph(const std::string& path);
IrrigationPattern read_pattern(const std::string& path);
NetworkSet read_network(const std::string& path);

DiscreteMeasure parse_measure(const std::string& text);
FluxGraph parse_graph(const std::string& text);
IrrigationPattern parse_pattern(const std::string& text);
NetworkSet parse_network(const std::string& text);

// All numbers serialised with 17 significant digits, so doubles round-trip
// bit-faithfully and identical inputs produce byte-identical files.
std::string measure_to_json(const DiscreteMeasure& mu);
std::string graph_to_json(const FluxGraph& g);
std::string pattern_to_json(const IrrigationPattern& chi);
std::string network_to_json(const NetworkSet& sigma);
std::string path_measure_to_json(const TransportPathMeasure& tpm);
std::string plan_to_json(const TransportPlan& plan);
std::string report_to_json(const EquivalenceReport& report);

void write_file(const std::string& path, const std::string& content);

std::string trace_to_csv(const std::vector<TraceEntry>& trace);
std::string edges_to_csv(const FluxGraph& g, const CostSpec& spec);
std::string render_svg(const FluxGraph& g, const CostSpec& spec);

std::string format_double(double x);

}  // namespace ramiflow::io
