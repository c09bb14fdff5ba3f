#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "iig/cli_io.hpp"

namespace py = pybind11;
using namespace iig;

namespace {

RunConfig make_config(const std::string& world_file, const std::string& info,
                      std::uint64_t seed) {
  RunConfig rc;
  rc.world_file = world_file;
  rc.info_function = info;
  rc.seed = seed;
  return rc;
}

py::dict tree_to_dict(const Tree& tree) {
  py::list nodes;
  for (const NodeRecord& node : tree.nodes) {
    py::dict n;
    n["id"] = node.id;
    n["x"] = node.position.x;
    n["y"] = node.position.y;
    n["cost"] = node.cost;
    n["info"] = node.info;
    n["parent"] = node.parent;
    nodes.append(n);
  }
  py::list trace;
  for (const ConvergenceSample& row : tree.trace) {
    py::dict t;
    t["samples"] = row.samples;
    t["iric"] = row.iric;
    t["mean"] = row.mean;
    trace.append(t);
  }
  py::dict out;
  out["nodes"] = nodes;
  out["trace"] = trace;
  return out;
}

py::dict path_to_dict(const Path& path) {
  py::dict out;
  out["node_ids"] = path.node_ids;
  out["cost"] = path.cost;
  out["info"] = path.info;
  return out;
}

py::dict plan(const std::string& world_file, const std::string& info, std::uint64_t seed,
              int samples, double budget) {
  RunConfig rc = make_config(world_file, info, seed);
  rc.budget = budget;
  const GridWorld world = GridWorld::load(rc.world_file);
  BeliefState belief = BeliefState::from_world(world, rc.p_occ, rc.p_free);
  const InfoFunctionConfig config = rc.info(false);
  PlannerConfig pc = rc.planner(false);
  pc.max_gain_hint = max_information_gain_hint(config, world.resolution());
  const InformationFn fn = make_information_fn(config, world, belief);
  const Tree tree =
      samples > 0 ? rig_tree(world, fn, pc, samples, &belief) : iig_tree(world, fn, pc, &belief);
  py::dict out = tree_to_dict(tree);
  out["path"] = path_to_dict(select_path(tree, rc.selection()));
  return out;
}

py::dict mission_summary(const MissionLog& log) {
  py::dict out;
  out["steps"] = log.steps.size();
  out["terminated"] = log.terminated;
  out["total_distance"] = log.total_distance;
  out["final_entropy"] = log.final_entropy;
  out["total_info"] = log.total_info;
  out["auc"] = log.auc;
  out["rmse"] = log.rmse;
  out["abort_reason"] = log.abort_reason;
  py::list entropy;
  for (const StepRecord& step : log.steps) entropy.append(step.average_entropy);
  out["entropy_trace"] = entropy;
  return out;
}

py::dict explore(const std::string& world_file, std::uint64_t seed, int max_steps) {
  RunConfig rc = make_config(world_file, "miub", seed);
  if (max_steps > 0) rc.max_steps = max_steps;
  const GridWorld world = GridWorld::load(rc.world_file);
  ExplorationConfig ec{world,          rc.planner(true), rc.info(true), rc.inverse_model(false),
                       rc.selection(), rc.p_sat_term,    rc.max_steps,  std::nullopt};
  return mission_summary(run_exploration(ec));
}

py::dict monitor(double radius, std::uint64_t seed, const std::string& dataset, bool uncertain) {
  RunConfig rc;
  rc.seed = seed;
  rc.sensing_radius = radius;
  rc.dataset = dataset;
  rc.info_function = uncertain ? "ugpvr" : "gpvr";
  return mission_summary(run_monitoring(rc.monitoring(uncertain)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Incremental informative motion planning toolkit";

  py::class_<Point2>(m, "Point2")
      .def(py::init<>())
      .def(py::init([](double x, double y) { return Point2{x, y}; }))
      .def_readwrite("x", &Point2::x)
      .def_readwrite("y", &Point2::y);

  py::class_<GridWorld>(m, "GridWorld")
      .def(py::init<int, int, double, Point2>(), py::arg("width"), py::arg("height"),
           py::arg("resolution"), py::arg("origin") = Point2{0.0, 0.0})
      .def_static("from_text", &GridWorld::from_text)
      .def_static("load", &GridWorld::load)
      .def("to_text", &GridWorld::to_text)
      .def_property_readonly("width", &GridWorld::width)
      .def_property_readonly("height", &GridWorld::height)
      .def_property_readonly("resolution", &GridWorld::resolution)
      .def("occupied", py::overload_cast<int, int>(&GridWorld::occupied, py::const_))
      .def("set_occupied", &GridWorld::set_occupied);

  m.def("cell_entropy", &cell_entropy, py::arg("p"),
        "Bernoulli entropy in nats for an occupancy probability.");
  m.def("bcm_fuse", &bcm_fuse, py::arg("sigma_a"), py::arg("sigma_b"),
        "Precision-sum fusion of two variances.");
  m.def("haversine_distance", &haversine_distance, py::arg("lat_a"), py::arg("lon_a"),
        py::arg("lat_b"), py::arg("lon_b"), "Great-circle distance in meters.");

  m.def(
      "mi_gaussian_exact",
      [](const Eigen::MatrixXd& prior, const Eigen::MatrixXd& posterior) {
        GaussianBelief p, q;
        p.mean = Eigen::VectorXd::Zero(prior.rows());
        p.covariance = prior;
        q.mean = p.mean;
        q.covariance = posterior;
        return mi_gaussian_exact(p, q);
      },
      py::arg("prior_cov"), py::arg("posterior_cov"));
  m.def(
      "mi_gaussian_marginal",
      [](const Eigen::MatrixXd& prior, const Eigen::MatrixXd& posterior) {
        GaussianBelief p, q;
        p.mean = Eigen::VectorXd::Zero(prior.rows());
        p.covariance = prior;
        q.mean = p.mean;
        q.covariance = posterior;
        return mi_gaussian_marginal(p, q);
      },
      py::arg("prior_cov"), py::arg("posterior_cov"));

  m.def(
      "gp_predict",
      [](const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
         const Eigen::MatrixXd& queries, double lengthscale, double signal_variance,
         double noise_variance, const std::string& family) {
        TrainingSet data;
        data.inputs = inputs;
        data.targets = targets;
        data.noise_variance = noise_variance;
        KernelSpec spec;
        spec.family = family == "se" ? KernelFamily::SquaredExponential : KernelFamily::Matern52;
        spec.lengthscales = Eigen::VectorXd::Constant(1, lengthscale);
        spec.signal_variance = signal_variance;
        const GpPrediction prediction = gp_predict(data, queries, spec);
        return std::make_pair(prediction.means, prediction.variances);
      },
      py::arg("inputs"), py::arg("targets"), py::arg("queries"), py::arg("lengthscale") = 1.0,
      py::arg("signal_variance") = 1.0, py::arg("noise_variance") = 0.1,
      py::arg("family") = "matern52",
      "Predictive means and variances; inputs are d x n, queries d x m.");

  m.def("plan", &plan, py::arg("world_file"), py::arg("info") = "miub", py::arg("seed") = 1,
        py::arg("samples") = 0, py::arg("budget") = 30.0,
        "Grow one planning tree; samples=0 runs the convergence-terminated variant.");
  m.def("explore", &explore, py::arg("world_file"), py::arg("seed") = 1,
        py::arg("max_steps") = 0, "Entropy-terminated exploration mission summary.");
  m.def("monitor", &monitor, py::arg("radius") = 10.0, py::arg("seed") = 1,
        py::arg("dataset") = "", py::arg("uncertain") = false,
        "Signal-strength monitoring mission summary.");

  m.def("cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("iig");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
  });
}
