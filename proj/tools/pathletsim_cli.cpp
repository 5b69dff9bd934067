#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "pathlet/engine.hpp"
#include "pathlet/experiment.hpp"
#include "pathlet/stats.hpp"
#include "pathlet/topo_gen.hpp"

using namespace pathlet;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNonConvergent = 3;
constexpr int kExitInvariantBreach = 4;

struct TimeoutFlags {
    Ms hello = 1000, dead = 3000, tf = 2000, pathlet = 30000, history = 60000;

    void attach(CLI::App* cmd) {
        cmd->add_option("--hello-ms", hello, "Hello period (ms)");
        cmd->add_option("--dead-ms", dead, "Neighbor dead interval (ms)");
        cmd->add_option("--tf-ms", tf, "Forwarding-clear grace T_f (ms)");
        cmd->add_option("--pathlet-timeout-ms", pathlet, "Pathlet expiry T_p (ms)");
        cmd->add_option("--history-timeout-ms", history, "Negative history timeout (ms)");
    }

    NodeConfig node_config(const std::string& rule, std::size_t cap) const {
        NodeConfig nc;
        nc.hello_interval = hello;
        nc.dead_interval = dead;
        nc.forwarding_grace = tf;
        nc.pathlet_timeout = pathlet;
        nc.history_timeout = history;
        if (auto r = parse_rule(rule)) nc.policy.rule = *r;
        nc.policy.chain_cap = cap;
        return nc;
    }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::vector<std::map<std::string, std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path);
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ',')) header.push_back(col);
    }
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::map<std::string, std::string> row;
        std::size_t i = 0;
        while (std::getline(ls, cell, ',') && i < header.size()) row[header[i++]] = cell;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathletsim: hierarchical pathlet routing simulator"};
    app.require_subcommand(1);

    // ---- generate ----------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "Generate a random hierarchical topology");
    GenParams gp;
    std::string gen_out = "-";
    gen->add_option("--stack-len", gp.stack_len, "Label stack length incl. the root");
    gen->add_option("--routers-min", gp.routers_min, "Routers per bottom area (min)");
    gen->add_option("--routers-max", gp.routers_max, "Routers per bottom area (max)");
    gen->add_option("--areas-min", gp.areas_min, "Subareas per area (min)");
    gen->add_option("--areas-max", gp.areas_max, "Subareas per area (max)");
    gen->add_option("--edge-prob", gp.edge_prob, "Edge probability P");
    gen->add_option("--border-frac", gp.border_frac, "Border fraction B in (0,1]");
    gen->add_option("--seed", gp.seed, "Generator seed");
    gen->add_option("-o,--out", gen_out, "Output scenario file ('-' for stdout)");

    // ---- run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Run one scenario to quiescence");
    std::string run_scenario, run_trace, run_csv, run_rule = "all";
    std::string probe_src, probe_dest;
    std::uint64_t run_seed = 1;
    std::size_t run_cap = 16;
    Ms run_horizon = 300000;
    bool run_assert = false;
    TimeoutFlags run_timeouts;
    run->add_option("scenario", run_scenario, "Scenario file")->required();
    run->add_option("--seed", run_seed, "Run seed (link delay draws)");
    run->add_option("--trace", run_trace, "Write the event trace here");
    run->add_option("--csv", run_csv, "Append the metrics row here");
    run->add_option("--rule", run_rule, "Composition rule: all|shortest_hops|shortest_weight|avoid_areas");
    run->add_option("--cap", run_cap, "Chain enumeration cap");
    run->add_option("--horizon-ms", run_horizon, "Abort horizon (ms)");
    run->add_flag("--assert-invariants", run_assert, "Check invariants after every event");
    run->add_option("--probe", probe_src, "Probe source vertex (with --dest)");
    run->add_option("--dest", probe_dest, "Probe destination token");
    run_timeouts.attach(run);

    // ---- experiment --------------------------------------------------------
    auto* exp = app.add_subcommand("experiment", "Reproduce the scalability sweeps");
    std::string exp_variant = "exp1", exp_out = "experiment.csv";
    int exp_lo = -1, exp_hi = -1, exp_seeds = -1;
    bool exp_full = false;
    std::uint64_t exp_seed = 1;
    TimeoutFlags exp_timeouts;
    exp->add_option("--variant", exp_variant, "exp1 (sweep areas) or exp2 (sweep stack length)");
    exp->add_option("--sweep-lo", exp_lo, "Sweep lower bound");
    exp->add_option("--sweep-hi", exp_hi, "Sweep upper bound");
    exp->add_option("--seeds", exp_seeds, "Topologies per sweep point");
    exp->add_option("--seed", exp_seed, "Base seed");
    exp->add_flag("--full-size", exp_full, "Paper-sized sweep instead of desk scale");
    exp->add_option("-o,--out", exp_out, "Runs CSV path (summary lands beside it)");
    exp_timeouts.attach(exp);

    // ---- stats -------------------------------------------------------------
    auto* st = app.add_subcommand("stats", "OLS and dispersion report over a runs CSV");
    std::string st_csv, st_x = "edges", st_y = "avg_pathlets", st_part, st_out;
    st->add_option("csv", st_csv, "Runs CSV produced by run/experiment")->required();
    st->add_option("--x", st_x, "X column");
    st->add_option("--y", st_y, "Y column");
    st->add_option("--partition", st_part, "Column to partition c_v by");
    st->add_option("-o,--out", st_out, "Write the report CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            auto topo = generate(gp);
            std::string text = topo.to_scenario().text();
            if (gen_out == "-")
                std::cout << text;
            else
                write_file(gen_out, text);
            return 0;
        }

        if (*run) {
            Scenario sc = Scenario::load(run_scenario);
            EngineConfig cfg;
            cfg.node = run_timeouts.node_config(run_rule, run_cap);
            cfg.horizon = run_horizon;
            cfg.assert_invariants = run_assert;
            cfg.collect_trace = !run_trace.empty();
            Engine engine(std::move(sc), run_seed, cfg);
            bool converged = engine.run();
            if (!run_trace.empty()) write_file(run_trace, engine.trace());

            if (!probe_src.empty()) {
                if (probe_dest.empty()) {
                    std::cerr << "--probe needs --dest\n";
                    return kExitValidation;
                }
                auto r = engine.probe(probe_src, probe_dest);
                std::cout << "probe " << probe_src << "->" << probe_dest
                          << " routes=" << r.routes << " delivered=" << r.delivered << '\n';
                for (std::size_t i = 0; i < r.walks.size(); ++i) {
                    std::cout << "  header=(";
                    for (std::size_t j = 0; j < r.headers[i].size(); ++j)
                        std::cout << (j ? " " : "") << r.headers[i][j];
                    std::cout << ") " << (r.walks[i].delivered ? "delivered at " : "failed: ")
                              << (r.walks[i].delivered ? r.walks[i].final_vertex
                                                       : r.walks[i].error)
                              << '\n';
                }
            }

            const Metrics& m = engine.metrics();
            std::string row = metrics_csv_row(run_scenario, run_seed, m);
            if (!run_csv.empty()) {
                std::ifstream probe_file(run_csv);
                bool fresh = !probe_file.good();
                std::ofstream out(run_csv, std::ios::app);
                if (fresh) out << metrics_csv_header() << '\n';
                out << row << '\n';
            }
            std::cout << metrics_csv_header() << '\n' << row << '\n';

            if (!engine.invariant_violations().empty()) {
                std::cerr << "invariant violations:\n";
                for (const auto& v : engine.invariant_violations()) std::cerr << "  " << v << '\n';
                return kExitInvariantBreach;
            }
            if (!converged) {
                std::cerr << "did not converge before the horizon\n";
                return kExitNonConvergent;
            }
            return 0;
        }

        if (*exp) {
            ExperimentSpec spec;
            if (exp_variant == "exp1")
                spec = exp_full ? ExperimentSpec::exp1_full() : ExperimentSpec::exp1_desk();
            else if (exp_variant == "exp2")
                spec = exp_full ? ExperimentSpec::exp2_full() : ExperimentSpec::exp2_desk();
            else {
                std::cerr << "unknown variant " << exp_variant << '\n';
                return kExitValidation;
            }
            if (exp_lo >= 0) spec.sweep_lo = exp_lo;
            if (exp_hi >= 0) spec.sweep_hi = exp_hi;
            if (exp_seeds > 0) spec.seeds = exp_seeds;
            spec.base_seed = exp_seed;
            spec.engine.node = exp_timeouts.node_config("all", 16);

            auto result = run_experiment(spec);
            write_file(exp_out, result.runs_csv());
            std::string summary_path = exp_out;
            auto dot = summary_path.rfind(".csv");
            if (dot != std::string::npos) summary_path = summary_path.substr(0, dot);
            summary_path += "_summary.csv";
            write_file(summary_path, result.summary_csv());
            std::cout << result.summary_table();
            if (!result.all_converged) {
                std::cerr << "some runs did not converge\n";
                return kExitNonConvergent;
            }
            return 0;
        }

        if (*st) {
            auto rows = read_csv(st_csv);
            std::vector<std::pair<double, double>> pts;
            std::map<std::string, std::vector<double>> parts;
            for (const auto& r : rows) {
                if (!r.count(st_x) || !r.count(st_y)) continue;
                double x = std::stod(r.at(st_x));
                double y = std::stod(r.at(st_y));
                pts.emplace_back(x, y);
                if (!st_part.empty() && r.count(st_part)) parts[r.at(st_part)].push_back(y);
            }
            if (pts.size() < 2) {
                std::cerr << "need at least two rows for a regression\n";
                return kExitValidation;
            }
            Regression r = ols(pts);
            std::ostringstream report;
            report << "metric,slope,intercept,r_squared,ser,n\n";
            report << st_y << "_vs_" << st_x << ',' << r.slope << ',' << r.intercept << ','
                   << r.r_squared << ',' << r.ser << ',' << r.n << '\n';
            for (const auto& [k, vs] : parts)
                if (vs.size() >= 2)
                    report << "cv_" << st_y << "_at_" << k << ',' << coeff_variation(vs)
                           << ",,,,\n";
            if (!st_out.empty()) write_file(st_out, report.str());
            std::cout << report.str();
            std::cout << "slope=" << r.slope << " intercept=" << r.intercept
                      << " R2=" << r.r_squared << " SER=" << r.ser << " n=" << r.n << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
