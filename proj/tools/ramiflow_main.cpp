// ramiflow command line: solve, eval, convert, verify, dsigma, wasserstein,
// render. Exit codes: 0 success, 2 validation error, 3 verification failure.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <future>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ramiflow/equivalence.hpp"
#include "ramiflow/io.hpp"

namespace rf = ramiflow;

namespace {

struct CostFlags {
    std::optional<double> alpha;
    std::optional<double> eps;
    std::optional<double> a;

    void attach(CLI::App* app) {
        app->add_option("--alpha", alpha, "branched transport exponent in (0,1]");
        app->add_option("--eps", eps, "urban planning maintenance cost (> 0)");
        app->add_option("--a", a, "urban planning off-network rate (> 1)");
    }

    rf::CostSpec spec() const {
        if (alpha && (eps || a))
            throw std::runtime_error("choose either --alpha or --eps/--a, not both");
        if (alpha) return rf::CostSpec::branched(*alpha);
        if (eps && a) return rf::CostSpec::urban(*eps, *a);
        throw std::runtime_error("a cost family is required: --alpha or --eps with --a");
    }
};

rf::Vec parse_point(const std::string& text) {
    rf::Vec p;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            p.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw std::runtime_error("cannot parse coordinate '" + item + "'");
        }
    }
    if (p.empty()) throw std::runtime_error("empty point");
    return p;
}

int thread_budget() {
    if (const char* env = std::getenv("RAMIFLOW_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Seeded random instance used by `verify --suite`.
std::pair<rf::DiscreteMeasure, rf::DiscreteMeasure> suite_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> natoms(1, 3);
    std::uniform_real_distribution<double> coord(0.0, 2.0);
    std::uniform_int_distribution<int> mass_ticks(1, 64);
    int k = natoms(rng), l = natoms(rng);
    std::vector<rf::Atom> plus, minus;
    double total = 0;
    for (int i = 0; i < k; ++i) {
        double m = mass_ticks(rng) / 32.0;
        plus.push_back({{coord(rng), coord(rng)}, m});
        total += m;
    }
    double left = total;
    for (int j = 0; j < l; ++j) {
        double m = (j + 1 == l) ? left : left * (mass_ticks(rng) / 128.0);
        m = std::min(m, left);
        if (m <= 0) m = left > 0 ? left : 0.25;
        minus.push_back({{coord(rng), coord(rng)}, m});
        left -= m;
        if (left <= 0 && j + 1 < l) {
            l = j + 1;
            break;
        }
    }
    return {rf::DiscreteMeasure(2, plus), rf::DiscreteMeasure(2, minus)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ramiflow: discrete branched transport and urban planning networks"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "minimise the flux cost between two measures");
    CostFlags solve_cost;
    solve_cost.attach(solve);
    std::string solve_mu_plus, solve_mu_minus, solve_out, solve_trace;
    std::uint64_t solve_seed = 0;
    int solve_restarts = 6, solve_max_steiner = 6;
    solve->add_option("--mu-plus", solve_mu_plus, "source measure JSON")->required();
    solve->add_option("--mu-minus", solve_mu_minus, "sink measure JSON")->required();
    solve->add_option("--seed", solve_seed, "deterministic seed");
    solve->add_option("--restarts", solve_restarts, "number of restarts");
    solve->add_option("--max-steiner", solve_max_steiner, "cap on free branch vertices");
    solve->add_option("-o,--out", solve_out, "output graph JSON")->required();
    solve->add_option("--trace", solve_trace, "cost trace CSV");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate the cost of a stored object");
    CostFlags eval_cost;
    eval_cost.attach(eval);
    std::string eval_graph, eval_pattern, eval_sigma, eval_mu_plus, eval_mu_minus;
    double eval_refine = 0.01;
    eval->add_option("--graph", eval_graph, "graph JSON");
    eval->add_option("--pattern", eval_pattern, "pattern JSON");
    eval->add_option("--sigma", eval_sigma, "network JSON (needs --mu-plus/--mu-minus)");
    eval->add_option("--mu-plus", eval_mu_plus, "source measure JSON");
    eval->add_option("--mu-minus", eval_mu_minus, "sink measure JSON");
    eval->add_option("--refine", eval_refine, "d_sigma sampling step");

    // convert
    auto* convert = app.add_subcommand("convert", "convert between formulations");
    CostFlags convert_cost;
    convert_cost.attach(convert);
    std::string convert_graph, convert_pattern, convert_to, convert_out;
    convert->add_option("--graph", convert_graph, "input graph JSON");
    convert->add_option("--pattern", convert_pattern, "input pattern JSON");
    convert->add_option("--to", convert_to, "target: pattern | graph | sigma | paths")->required();
    convert->add_option("-o,--out", convert_out, "output file")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "verify the equivalence chain on an instance");
    CostFlags verify_cost;
    verify_cost.attach(verify);
    std::string verify_mu_plus, verify_mu_minus, verify_out;
    std::uint64_t verify_seed = 0;
    int verify_restarts = 6, verify_suite = 0;
    double verify_refine = 1e-3;
    verify->add_option("--mu-plus", verify_mu_plus, "source measure JSON");
    verify->add_option("--mu-minus", verify_mu_minus, "sink measure JSON");
    verify->add_option("--seed", verify_seed, "deterministic seed");
    verify->add_option("--restarts", verify_restarts, "solver restarts");
    verify->add_option("--refine", verify_refine, "d_sigma sampling step");
    verify->add_option("--suite", verify_suite, "run N seeded random instances instead");
    verify->add_option("-o,--out", verify_out, "report JSON");

    // dsigma
    auto* dsig = app.add_subcommand("dsigma", "two-speed metric between two points");
    std::string dsig_sigma, dsig_from, dsig_to;
    double dsig_a = 2.0, dsig_refine = 0.01;
    dsig->add_option("--sigma", dsig_sigma, "network JSON")->required();
    dsig->add_option("--a", dsig_a, "off-network rate (> 1)")->required();
    dsig->add_option("--refine", dsig_refine, "sampling step");
    dsig->add_option("--from", dsig_from, "start point, comma separated")->required();
    dsig->add_option("--to", dsig_to, "end point, comma separated")->required();

    // wasserstein
    auto* wass = app.add_subcommand("wasserstein", "plain 1-Wasserstein distance");
    std::string wass_mu_plus, wass_mu_minus, wass_plan;
    wass->add_option("--mu-plus", wass_mu_plus, "source measure JSON")->required();
    wass->add_option("--mu-minus", wass_mu_minus, "sink measure JSON")->required();
    wass->add_option("--plan", wass_plan, "optional output plan JSON");

    // render
    auto* render = app.add_subcommand("render", "emit SVG (and CSV) for a graph");
    CostFlags render_cost;
    render_cost.attach(render);
    std::string render_graph, render_out, render_csv;
    render->add_option("--graph", render_graph, "graph JSON")->required();
    render->add_option("-o,--out", render_out, "output SVG")->required();
    render->add_option("--csv", render_csv, "optional edge list CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed()) {
            rf::CostSpec spec = solve_cost.spec();
            rf::DiscreteMeasure mp = rf::io::read_measure(solve_mu_plus);
            rf::DiscreteMeasure mm = rf::io::read_measure(solve_mu_minus);
            rf::SolveConfig cfg;
            cfg.seed = solve_seed;
            cfg.restarts = solve_restarts;
            cfg.max_steiner = solve_max_steiner;
            rf::SolveResult res = rf::solve_discrete(mp, mm, spec, cfg);
            rf::io::write_file(solve_out, rf::io::graph_to_json(res.graph));
            if (!solve_trace.empty())
                rf::io::write_file(solve_trace, rf::io::trace_to_csv(res.trace));
            std::cout << rf::io::format_double(res.cost) << "\n";
            if (res.budget_exhausted)
                std::cerr << "warning: iteration budget exhausted, best-so-far returned\n";
            return 0;
        }
        if (eval->parsed()) {
            rf::CostSpec spec = eval_cost.spec();
            int given = (!eval_graph.empty()) + (!eval_pattern.empty()) + (!eval_sigma.empty());
            if (given != 1)
                throw std::runtime_error("eval needs exactly one of --graph, --pattern, --sigma");
            double value = 0;
            if (!eval_graph.empty()) {
                value = rf::graph_cost(rf::io::read_graph(eval_graph), spec);
            } else if (!eval_pattern.empty()) {
                value = rf::pattern_cost(rf::io::read_pattern(eval_pattern), spec);
            } else {
                if (!spec.is_urban())
                    throw std::runtime_error("eval --sigma needs the urban planning family");
                if (eval_mu_plus.empty() || eval_mu_minus.empty())
                    throw std::runtime_error("eval --sigma needs --mu-plus and --mu-minus");
                value = rf::cost_sigma(rf::io::read_network(eval_sigma),
                                       rf::io::read_measure(eval_mu_plus),
                                       rf::io::read_measure(eval_mu_minus), spec.eps, spec.a,
                                       eval_refine);
            }
            std::cout << rf::io::format_double(value) << "\n";
            return 0;
        }
        if (convert->parsed()) {
            if (convert_graph.empty() == convert_pattern.empty())
                throw std::runtime_error("convert needs exactly one of --graph, --pattern");
            if (convert_to == "pattern") {
                if (convert_graph.empty()) throw std::runtime_error("--to pattern needs --graph");
                rf::io::write_file(convert_out, rf::io::pattern_to_json(rf::flux_to_pattern(
                                                    rf::io::read_graph(convert_graph))));
            } else if (convert_to == "graph") {
                if (convert_pattern.empty()) throw std::runtime_error("--to graph needs --pattern");
                rf::io::write_file(convert_out, rf::io::graph_to_json(rf::pattern_to_flux(
                                                    rf::io::read_pattern(convert_pattern))));
            } else if (convert_to == "paths") {
                if (convert_graph.empty()) throw std::runtime_error("--to paths needs --graph");
                rf::FluxGraph g = rf::io::read_graph(convert_graph);
                rf::io::write_file(convert_out,
                                   rf::io::path_measure_to_json(rf::path_decompose(g)));
            } else if (convert_to == "sigma") {
                rf::CostSpec spec = convert_cost.spec();
                if (!spec.is_urban())
                    throw std::runtime_error("--to sigma needs the urban planning family");
                if (!convert_pattern.empty()) {
                    rf::io::write_file(convert_out,
                                       rf::io::network_to_json(rf::extract_sigma(
                                           rf::io::read_pattern(convert_pattern), spec.eps,
                                           spec.a)));
                } else {
                    rf::FluxGraph g = rf::io::read_graph(convert_graph);
                    std::vector<rf::Segment> segs;
                    for (std::size_t e : rf::extract_network_subgraph(g, spec.eps, spec.a))
                        segs.push_back({g.vertices()[g.edges()[e].tail],
                                        g.vertices()[g.edges()[e].head]});
                    rf::io::write_file(convert_out,
                                       rf::io::network_to_json(rf::NetworkSet(g.dim(), segs)));
                }
            } else {
                throw std::runtime_error("unknown conversion target '" + convert_to + "'");
            }
            return 0;
        }
        if (verify->parsed()) {
            rf::CostSpec spec = verify_cost.spec();
            rf::SolveConfig cfg;
            cfg.seed = verify_seed;
            cfg.restarts = verify_restarts;
            if (verify_suite > 0) {
                std::vector<rf::EquivalenceReport> reports(verify_suite);
                int workers = std::min(thread_budget(), verify_suite);
                std::vector<std::future<void>> futures;
                std::atomic<int> next{0};
                for (int wkr = 0; wkr < workers; ++wkr)
                    futures.push_back(std::async(std::launch::async, [&]() {
                        for (int i = next.fetch_add(1); i < verify_suite; i = next.fetch_add(1)) {
                            auto [mp, mm] = suite_instance(verify_seed * 7919 + i);
                            reports[i] = rf::verify_equivalence(mp, mm, spec, cfg, verify_refine);
                        }
                    }));
                for (auto& f : futures) f.get();
                std::string out = "[";
                bool all_pass = true;
                for (int i = 0; i < verify_suite; ++i) {
                    if (i) out += ',';
                    std::string one = rf::io::report_to_json(reports[i]);
                    if (!one.empty() && one.back() == '\n') one.pop_back();
                    out += one;
                    all_pass = all_pass && reports[i].pass;
                }
                out += "]\n";
                if (!verify_out.empty())
                    rf::io::write_file(verify_out, out);
                else
                    std::cout << out;
                return all_pass ? 0 : 3;
            }
            if (verify_mu_plus.empty() || verify_mu_minus.empty())
                throw std::runtime_error("verify needs --mu-plus and --mu-minus (or --suite N)");
            rf::EquivalenceReport report =
                rf::verify_equivalence(rf::io::read_measure(verify_mu_plus),
                                       rf::io::read_measure(verify_mu_minus), spec, cfg,
                                       verify_refine);
            std::string out = rf::io::report_to_json(report);
            if (!verify_out.empty())
                rf::io::write_file(verify_out, out);
            else
                std::cout << out;
            return report.pass ? 0 : 3;
        }
        if (dsig->parsed()) {
            rf::NetworkSet sigma = rf::io::read_network(dsig_sigma);
            double value = rf::d_sigma(parse_point(dsig_from), parse_point(dsig_to), sigma, dsig_a,
                                       dsig_refine);
            std::cout << rf::io::format_double(value) << "\n";
            return 0;
        }
        if (wass->parsed()) {
            rf::TransportResult res = rf::wasserstein1(rf::io::read_measure(wass_mu_plus),
                                                       rf::io::read_measure(wass_mu_minus));
            if (!wass_plan.empty()) rf::io::write_file(wass_plan, rf::io::plan_to_json(res.plan));
            std::cout << rf::io::format_double(res.value) << "\n";
            return 0;
        }
        if (render->parsed()) {
            rf::CostSpec spec = render_cost.spec();
            rf::FluxGraph g = rf::io::read_graph(render_graph);
            rf::io::write_file(render_out, rf::io::render_svg(g, spec));
            if (!render_csv.empty())
                rf::io::write_file(render_csv, rf::io::edges_to_csv(g, spec));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
