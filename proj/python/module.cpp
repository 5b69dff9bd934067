#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pathlet/chains.hpp"
#include "pathlet/engine.hpp"
#include "pathlet/experiment.hpp"
#include "pathlet/label_stack.hpp"
#include "pathlet/stats.hpp"
#include "pathlet/topo_gen.hpp"

namespace py = pybind11;
using namespace pathlet;

namespace {

LabelStack to_stack(const std::vector<Label>& labels) { return LabelStack(labels); }

std::vector<Label> from_stack(const LabelStack& s) { return s.labels(); }

Pathlet make_pathlet(Fid fid, const VertexId& start, const VertexId& end,
                     const std::vector<Label>& scope, const std::set<std::string>& dests,
                     double weight) {
    Pathlet p;
    p.fid = fid;
    p.start = start;
    p.end = end;
    p.scope = to_stack(scope);
    p.dests = DestSet(dests.begin(), dests.end());
    p.weight = weight;
    return p;
}

py::dict metrics_dict(const Metrics& m) {
    py::dict d;
    d["nodes"] = m.nodes;
    d["edges"] = m.edges;
    d["max_pathlets"] = m.max_pathlets;
    d["avg_pathlets"] = m.avg_pathlets;
    d["max_msgs"] = m.max_msgs;
    d["avg_msgs"] = m.avg_msgs;
    d["convergence_ms"] = m.convergence_ms;
    d["converged"] = m.converged;
    d["deliveries_scheduled"] = m.deliveries_scheduled;
    return d;
}

} // namespace

PYBIND11_MODULE(_pathletsim, m) {
    m.doc() = "Hierarchical pathlet routing: label-stack algebra, control-plane "
              "simulation, topology generation and the statistics harness.";

    m.attr("BOTTOM") = kBottom;

    m.def("concat", [](const std::vector<Label>& a, const std::vector<Label>& b) {
        return from_stack(concat(to_stack(a), to_stack(b)));
    });
    m.def("extends_", [](const std::vector<Label>& a, const std::vector<Label>& b) {
        return extends(to_stack(a), to_stack(b));
    });
    m.def("strictly_extends", [](const std::vector<Label>& a, const std::vector<Label>& b) {
        return strictly_extends(to_stack(a), to_stack(b));
    });
    m.def("join", [](const std::vector<Label>& a, const std::vector<Label>& b) {
        return from_stack(join(to_stack(a), to_stack(b)));
    });
    m.def("project", [](const std::vector<Label>& a, const std::vector<Label>& b) {
        return from_stack(project(to_stack(a), to_stack(b)));
    });
    m.def("in_area", [](const std::vector<Label>& stack, const std::vector<Label>& area) {
        return in_area(to_stack(stack), to_stack(area));
    });
    m.def("stack_text",
          [](const std::vector<Label>& s) { return to_stack(s).text(); });

    py::class_<Pathlet>(m, "Pathlet")
        .def(py::init(&make_pathlet), py::arg("fid"), py::arg("start"), py::arg("end"),
             py::arg("scope"), py::arg("dests") = std::set<std::string>{},
             py::arg("weight") = 0.0)
        .def_readonly("fid", &Pathlet::fid)
        .def_readonly("start", &Pathlet::start)
        .def_readonly("end", &Pathlet::end)
        .def_property_readonly("scope", [](const Pathlet& p) { return from_stack(p.scope); })
        .def_property_readonly("dests",
                               [](const Pathlet& p) {
                                   return std::set<std::string>(p.dests.begin(), p.dests.end());
                               })
        .def_readonly("weight", &Pathlet::weight)
        .def("text", &Pathlet::text)
        .def("__repr__", &Pathlet::text);

    m.def("classify", [](const Pathlet& p) { return std::string(to_string(classify(p))); });
    m.def("validate", [](const Pathlet& p) { return std::string(to_string(validate(p))); });

    m.def(
        "chains",
        [](const std::vector<Pathlet>& pool, const VertexId& u, const VertexId& v,
           const std::vector<Label>& area, std::size_t cap) {
            return chains(pool, u, v, to_stack(area), cap);
        },
        py::arg("pool"), py::arg("u"), py::arg("v"), py::arg("area"), py::arg("cap") = 16);

    m.def(
        "ols",
        [](const std::vector<std::pair<double, double>>& pts) {
            Regression r = ols(pts);
            py::dict d;
            d["slope"] = r.slope;
            d["intercept"] = r.intercept;
            d["r_squared"] = r.r_squared;
            d["ser"] = r.ser;
            d["n"] = r.n;
            d["y_constant"] = r.y_constant;
            return d;
        },
        py::arg("points"));
    m.def("coeff_variation", &coeff_variation, py::arg("values"));

    m.def(
        "generate",
        [](int stack_len, int routers_min, int routers_max, int areas_min, int areas_max,
           double edge_prob, double border_frac, std::uint64_t seed) {
            GenParams p;
            p.stack_len = stack_len;
            p.routers_min = routers_min;
            p.routers_max = routers_max;
            p.areas_min = areas_min;
            p.areas_max = areas_max;
            p.edge_prob = edge_prob;
            p.border_frac = border_frac;
            p.seed = seed;
            return generate(p).to_scenario().text();
        },
        py::arg("stack_len") = 2, py::arg("routers_min") = 10, py::arg("routers_max") = 10,
        py::arg("areas_min") = 2, py::arg("areas_max") = 2, py::arg("edge_prob") = 0.1,
        py::arg("border_frac") = 0.5, py::arg("seed") = 1);

    py::class_<WalkResult>(m, "WalkResult")
        .def_readonly("delivered", &WalkResult::delivered)
        .def_readonly("final_vertex", &WalkResult::final_vertex)
        .def_readonly("hops", &WalkResult::hops)
        .def_readonly("final_header", &WalkResult::final_header)
        .def_readonly("error", &WalkResult::error);

    py::class_<ProbeReport>(m, "ProbeReport")
        .def_readonly("routes", &ProbeReport::routes)
        .def_readonly("delivered", &ProbeReport::delivered)
        .def_readonly("walks", &ProbeReport::walks)
        .def_readonly("headers", &ProbeReport::headers);

    py::class_<Engine>(m, "Engine")
        .def(py::init([](const std::string& scenario_text, std::uint64_t seed, bool trace,
                         bool assert_invariants, const std::string& rule, std::size_t cap) {
                 EngineConfig cfg;
                 cfg.collect_trace = trace;
                 cfg.assert_invariants = assert_invariants;
                 if (auto r = parse_rule(rule)) cfg.node.policy.rule = *r;
                 cfg.node.policy.chain_cap = cap;
                 return new Engine(Scenario::parse(scenario_text), seed, cfg);
             }),
             py::arg("scenario"), py::arg("seed") = 1, py::arg("trace") = false,
             py::arg("assert_invariants") = false, py::arg("rule") = "all",
             py::arg("cap") = 16)
        .def("run", &Engine::run)
        .def("metrics", [](const Engine& e) { return metrics_dict(e.metrics()); })
        .def("trace", [](const Engine& e) { return e.trace(); })
        .def("probe", &Engine::probe, py::arg("source"), py::arg("dest"))
        .def("invariant_violations", &Engine::invariant_violations)
        .def("stored_pathlets", [](const Engine& e, const VertexId& v) {
            return e.nodes().at(v).stored_pathlets();
        })
        .def("pathlets_at", [](const Engine& e, const VertexId& v) {
            return e.nodes().at(v).pool_with_composed();
        })
        .def("node_info", [](const Engine& e, const VertexId& v) {
            const Node& n = e.nodes().at(v);
            py::dict d;
            d["stack"] = n.stack().text();
            py::dict borders;
            for (const auto& [a, bs] : n.borders())
                borders[py::str(a.text())] = std::vector<VertexId>(bs.begin(), bs.end());
            d["borders"] = borders;
            py::dict hist;
            for (const auto& [k, h] : n.history())
                hist[py::str(k.start + "/" + std::to_string(k.fid))] =
                    py::make_tuple(h.scope.text(), h.t, h.positive);
            d["history"] = hist;
            std::vector<std::string> known;
            for (const auto& [k, kp] : n.known())
                known.push_back(kp.p.text() +
                                (kp.expiry ? " expiry=" + std::to_string(*kp.expiry) : ""));
            d["known"] = known;
            py::dict fwd;
            for (const auto& [f, exp] : n.forwarding_fids()) {
                auto nh = n.nh_of(f);
                fwd[py::int_(f)] = py::make_tuple(exp, nh ? *nh : VertexId("?"));
            }
            d["forwarding"] = fwd;
            return d;
        });

    m.def("run_scenario",
          [](const std::string& text, std::uint64_t seed) {
              Engine e(Scenario::parse(text), seed, {});
              e.run();
              return metrics_dict(e.metrics());
          },
          py::arg("scenario"), py::arg("seed") = 1);
}
