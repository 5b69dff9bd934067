#pragma once

#include <string>
#include <vector>

#include "pathlet/engine.hpp"
#include "pathlet/stats.hpp"
#include "pathlet/topo_gen.hpp"

namespace pathlet {

enum class ExperimentVariant { Exp1, Exp2 }; // sweep areas-per-area / stack length

struct ExperimentSpec {
    ExperimentVariant variant = ExperimentVariant::Exp1;
    int sweep_lo = 2;
    int sweep_hi = 5;
    int seeds = 5;
    GenParams base;           // fixed parameters; the swept one is overwritten
    EngineConfig engine;
    std::uint64_t base_seed = 1;

    static ExperimentSpec exp1_desk();
    static ExperimentSpec exp2_desk();
    static ExperimentSpec exp1_full();
    static ExperimentSpec exp2_full();
};

struct RunRow {
    std::string run_id;
    std::uint64_t seed = 0;
    int sweep_value = 0;
    Metrics metrics;
};

struct ExperimentResult {
    std::vector<RunRow> rows;
    Regression avg_pathlets_vs_edges;
    Regression max_pathlets_vs_edges;
    Regression avg_msgs_vs_edges;
    Regression convergence_vs_edges;
    std::vector<std::pair<int, double>> cv_avg_pathlets; // per sweep value
    bool all_converged = true;

    std::string runs_csv() const;
    std::string summary_csv() const;
    std::string summary_table() const;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// CSV header shared by `run` and `experiment` outputs.
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& run_id, std::uint64_t seed, const Metrics& m);

} // namespace pathlet
