#include "pathlet/experiment.hpp"

#include <iomanip>
#include <sstream>

#include "pathlet/rng.hpp"

namespace pathlet {

namespace {

GenParams fixed_params() {
    GenParams p;
    p.routers_min = p.routers_max = 10;
    p.edge_prob = 0.1;
    p.border_frac = 0.5; // the reported experiments use B=5, read as one half
    return p;
}

} // namespace

ExperimentSpec ExperimentSpec::exp1_desk() {
    ExperimentSpec s;
    s.variant = ExperimentVariant::Exp1;
    s.sweep_lo = 2;
    s.sweep_hi = 5;
    s.seeds = 5;
    s.base = fixed_params();
    s.base.stack_len = 2;
    return s;
}

ExperimentSpec ExperimentSpec::exp2_desk() {
    ExperimentSpec s;
    s.variant = ExperimentVariant::Exp2;
    s.sweep_lo = 1;
    s.sweep_hi = 3;
    s.seeds = 5;
    s.base = fixed_params();
    s.base.areas_min = s.base.areas_max = 2;
    return s;
}

ExperimentSpec ExperimentSpec::exp1_full() {
    ExperimentSpec s = exp1_desk();
    s.sweep_hi = 7;
    s.seeds = 10;
    return s;
}

ExperimentSpec ExperimentSpec::exp2_full() {
    ExperimentSpec s = exp2_desk();
    s.sweep_hi = 4;
    s.seeds = 10;
    return s;
}

std::string metrics_csv_header() {
    return "run_id,seed,nodes,edges,max_pathlets,avg_pathlets,max_msgs,avg_msgs,"
           "convergence_ms";
}

std::string metrics_csv_row(const std::string& run_id, std::uint64_t seed, const Metrics& m) {
    std::ostringstream out;
    out << run_id << ',' << seed << ',' << m.nodes << ',' << m.edges << ',' << m.max_pathlets
        << ',' << std::setprecision(10) << m.avg_pathlets << ',' << m.max_msgs << ','
        << std::setprecision(10) << m.avg_msgs << ',' << m.convergence_ms;
    return out.str();
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentResult result;
    std::vector<std::pair<double, double>> avg_pts, max_pts, msg_pts, conv_pts;
    std::map<int, std::vector<double>> per_value;

    for (int v = spec.sweep_lo; v <= spec.sweep_hi; ++v) {
        for (int i = 0; i < spec.seeds; ++i) {
            GenParams params = spec.base;
            if (spec.variant == ExperimentVariant::Exp1)
                params.areas_min = params.areas_max = v;
            else
                params.stack_len = v;
            std::uint64_t seed =
                Rng::mix(spec.base_seed, static_cast<std::uint64_t>(v) * 1000 +
                                             static_cast<std::uint64_t>(i));
            params.seed = seed;

            Scenario sc = generate(params).to_scenario();
            Engine engine(std::move(sc), seed, spec.engine);
            engine.run();
            const Metrics& m = engine.metrics();

            RunRow row;
            std::string prefix = spec.variant == ExperimentVariant::Exp1 ? "exp1_A" : "exp2_N";
            row.run_id = prefix + std::to_string(v) + "_s" + std::to_string(i);
            row.seed = seed;
            row.sweep_value = v;
            row.metrics = m;
            result.rows.push_back(row);
            if (!m.converged) result.all_converged = false;

            double edges = static_cast<double>(m.edges);
            avg_pts.emplace_back(edges, m.avg_pathlets);
            max_pts.emplace_back(edges, static_cast<double>(m.max_pathlets));
            msg_pts.emplace_back(edges, m.avg_msgs);
            conv_pts.emplace_back(edges, static_cast<double>(m.convergence_ms));
            per_value[v].push_back(m.avg_pathlets);
        }
    }

    result.avg_pathlets_vs_edges = ols(avg_pts);
    result.max_pathlets_vs_edges = ols(max_pts);
    result.avg_msgs_vs_edges = ols(msg_pts);
    result.convergence_vs_edges = ols(conv_pts);
    for (const auto& [v, values] : per_value)
        result.cv_avg_pathlets.emplace_back(v, coeff_variation(values));
    return result;
}

std::string ExperimentResult::runs_csv() const {
    std::ostringstream out;
    out << metrics_csv_header() << '\n';
    for (const auto& r : rows) out << metrics_csv_row(r.run_id, r.seed, r.metrics) << '\n';
    return out.str();
}

std::string ExperimentResult::summary_csv() const {
    std::ostringstream out;
    out << "metric,slope,intercept,r_squared,ser,n\n";
    auto line = [&](const char* name, const Regression& r) {
        out << name << ',' << std::setprecision(10) << r.slope << ',' << r.intercept << ','
            << r.r_squared << ',' << r.ser << ',' << r.n << '\n';
    };
    line("avg_pathlets_vs_edges", avg_pathlets_vs_edges);
    line("max_pathlets_vs_edges", max_pathlets_vs_edges);
    line("avg_msgs_vs_edges", avg_msgs_vs_edges);
    line("convergence_ms_vs_edges", convergence_vs_edges);
    for (const auto& [v, cv] : cv_avg_pathlets)
        out << "cv_avg_pathlets_at_" << v << ',' << std::setprecision(10) << cv << ",,,,\n";
    return out.str();
}

std::string ExperimentResult::summary_table() const {
    std::ostringstream out;
    auto line = [&](const char* name, const Regression& r) {
        out << std::left << std::setw(28) << name << " slope=" << std::setw(10)
            << std::setprecision(4) << r.slope << " R2=" << std::setw(8) << r.r_squared
            << " SER=" << std::setw(10) << r.ser << " n=" << r.n << '\n';
    };
    line("avg pathlets vs edges", avg_pathlets_vs_edges);
    line("max pathlets vs edges", max_pathlets_vs_edges);
    line("avg messages vs edges", avg_msgs_vs_edges);
    line("convergence ms vs edges", convergence_vs_edges);
    out << "coefficient of variation of avg pathlets per sweep value:\n";
    for (const auto& [v, cv] : cv_avg_pathlets)
        out << "  value " << v << ": c_v=" << std::setprecision(4) << cv << '\n';
    return out.str();
}

} // namespace pathlet
