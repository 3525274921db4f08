#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rearrange/benchmark.hpp"
#include "rearrange/error.hpp"
#include "rearrange/interaction_graph.hpp"
#include "rearrange/io.hpp"
#include "rearrange/kinematics.hpp"
#include "rearrange/rewards.hpp"
#include "rearrange/sim.hpp"
#include "rearrange/task_planner.hpp"

namespace py = pybind11;
using namespace rearrange;

namespace {

py::array_t<double> samples_array(const Trajectory& traj) {
  const auto& s = traj.samples();
  py::array_t<double> out({static_cast<py::ssize_t>(s.size()), py::ssize_t{6}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const py::ssize_t r = static_cast<py::ssize_t>(i);
    a(r, 0) = s[i].t;
    a(r, 1) = s[i].pose.x;
    a(r, 2) = s[i].pose.y;
    a(r, 3) = s[i].pose.theta;
    a(r, 4) = s[i].v;
    a(r, 5) = s[i].omega;
  }
  return out;
}

py::dict episode_dict(const EpisodeResult& r) {
  py::dict d;
  d["completion_time"] = r.completion_time;
  d["tracking_time"] = r.tracking_time;
  d["dwell_time"] = r.dwell_time;
  d["total_distance"] = r.total_distance;
  d["collisions"] = r.collision_events;
  d["max_error"] = r.max_tracking_error;
  d["mean_error"] = r.mean_tracking_error;
  d["successes"] = r.successes();
  d["replans"] = r.replans;
  py::list objects;
  for (const ObjectOutcome& o : r.per_object) {
    py::dict od;
    od["id"] = o.id;
    od["position_error"] = o.position_error;
    od["heading_error"] = o.heading_error;
    od["success"] = o.success;
    objects.append(od);
  }
  d["objects"] = objects;
  return d;
}

}  // namespace

PYBIND11_MODULE(rearrange, m) {
  m.doc() = "Object rearrangement planning, simulation and graph encoding";

  static py::handle error_type = py::exception<Error>(m, "RearrangeError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error_type)(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), instance.ptr());
    }
  });

  py::class_<Pose2>(m, "Pose2")
      .def(py::init<>())
      .def(py::init([](double x, double y, double theta) { return Pose2{x, y, theta}; }),
           py::arg("x"), py::arg("y"), py::arg("theta") = 0.0)
      .def_readwrite("x", &Pose2::x)
      .def_readwrite("y", &Pose2::y)
      .def_readwrite("theta", &Pose2::theta)
      .def("__repr__", [](const Pose2& p) {
        return "Pose2(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " +
               std::to_string(p.theta) + ")";
      });

  py::class_<MotionLimits>(m, "MotionLimits")
      .def(py::init<>())
      .def_readwrite("v_max", &MotionLimits::v_max)
      .def_readwrite("omega_max", &MotionLimits::omega_max)
      .def_readwrite("a_max", &MotionLimits::a_max)
      .def_readwrite("alpha_max", &MotionLimits::alpha_max);

  m.def("integrate_unicycle", &integrate_unicycle, py::arg("pose"), py::arg("v"),
        py::arg("omega"), py::arg("dt"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("duration", &Trajectory::duration)
      .def_property_readonly("path_length", &Trajectory::path_length)
      .def_property_readonly("start", &Trajectory::start)
      .def_property_readonly("end", &Trajectory::end)
      .def("pose_at", &Trajectory::pose_at, py::arg("t"))
      .def("samples", &samples_array, "Rows of (t, x, y, theta, v, omega)")
      .def("__len__", &Trajectory::size);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("seed", &Scenario::seed)
      .def_readonly("robot_start", &Scenario::robot_start)
      .def_readonly("targets", &Scenario::targets)
      .def_readonly("limits", &Scenario::limits)
      .def_property_readonly("object_ids",
                             [](const Scenario& s) {
                               std::vector<std::string> ids;
                               for (const ObjectSpec& o : s.objects) ids.push_back(o.id);
                               return ids;
                             })
      .def("__len__", &Scenario::size)
      .def("__eq__", [](const Scenario& a, const Scenario& b) { return a == b; });

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); },
        py::arg("text"));
  m.def("serialize_scenario", &serialize_scenario, py::arg("scenario"));

  py::class_<CostMatrices>(m, "CostMatrices")
      .def_static("from_values", &CostMatrices::from_values, py::arg("travel"),
                  py::arg("manipulate"))
      .def_readonly("travel", &CostMatrices::travel)
      .def_readonly("manipulate", &CostMatrices::manipulate)
      .def("__len__", &CostMatrices::size);

  m.def(
      "build_cost_matrices",
      [](const Scenario& sc) { return build_cost_matrices(sc, TrajectoryPlanner(sc.limits)); },
      py::arg("scenario"));

  py::class_<TaskPlan>(m, "TaskPlan")
      .def_readonly("order", &TaskPlan::order)
      .def_readonly("assignment", &TaskPlan::assignment)
      .def_readonly("total_cost", &TaskPlan::total_cost)
      .def("target_of", &TaskPlan::target_of);

  m.def("sequence_cost", &sequence_cost, py::arg("costs"), py::arg("order"),
        py::arg("assignment"));
  m.def("greedy_plan", &greedy_plan, py::arg("costs"));
  m.def(
      "branch_and_bound",
      [](const CostMatrices& costs, const std::string& bound, bool verify) {
        BnbOptions opts;
        opts.bound = parse_bound_mode(bound);
        opts.verify_bounds = verify;
        std::optional<TaskPlan> warm;
        try {
          warm = greedy_plan(costs);
        } catch (const Error&) {
        }
        const BnbResult r = branch_and_bound(costs, warm, opts);
        return py::make_tuple(r.plan, r.expansions);
      },
      py::arg("costs"), py::arg("bound") = "mst", py::arg("verify_bounds") = false,
      "Returns (plan, expansions); warm-started from the greedy plan when one exists.");
  m.def(
      "hungarian_assign",
      [](const CostMatrix& cost) {
        const Assignment a = hungarian_assign(cost);
        return py::make_tuple(a.column_of_row, a.cost);
      },
      py::arg("cost"));
  m.def("prim_mst_weight", &prim_mst_weight, py::arg("weights"));

  m.def(
      "plan_scenario",
      [](const Scenario& sc, const std::string& method, const std::string& bound) {
        BnbOptions opts;
        opts.bound = parse_bound_mode(bound);
        const PlanOutcome out = plan_scenario(sc, parse_plan_method(method), opts);
        return py::make_tuple(out.plan, out.expansions);
      },
      py::arg("scenario"), py::arg("method") = "bnb", py::arg("bound") = "mst");

  m.def(
      "run_episode",
      [](const Scenario& sc, const TaskPlan& plan, std::uint64_t seed, double noise_mae) {
        return episode_dict(
            run_episode(sc, plan, TrackerConfig{}, noise_for_run(noise_mae, sc.seed, seed)));
      },
      py::arg("scenario"), py::arg("plan"), py::arg("seed") = 0,
      py::arg("noise_mae") = NoiseModel{}.mae_v);

  m.def(
      "benchmark_csv",
      [](const std::vector<std::string>& paths, std::vector<std::uint64_t> seeds,
         double noise_mae) {
        std::vector<Scenario> scenarios;
        for (const std::string& p : paths) scenarios.push_back(load_scenario(p));
        BenchmarkOptions opts;
        opts.seeds = std::move(seeds);
        opts.noise_mae = noise_mae;
        return run_benchmark(scenarios, opts).to_csv();
      },
      py::arg("paths"), py::arg("seeds"), py::arg("noise_mae") = NoiseModel{}.mae_v);

  m.def("figure_eight", &figure_eight, py::arg("width") = 12.0, py::arg("height") = 6.0,
        py::arg("speed") = 0.3, py::arg("dt") = 0.1);
  m.def("figure_eight_length", &figure_eight_length, py::arg("width") = 12.0,
        py::arg("height") = 6.0);
  m.def(
      "track_trajectory",
      [](const Trajectory& traj, std::uint64_t seed, double mae_v) {
        NoiseModel noise;
        noise.seed = seed;
        if (mae_v != noise.mae_v) noise = noise_for_run(mae_v, 0, seed);
        const TrackingResult r =
            track_trajectory(traj, traj.start(), TrackerConfig{}, noise, MotionLimits{});
        py::dict d;
        d["mean_error"] = r.metrics.mean_error;
        d["max_error"] = r.metrics.max_error;
        d["completion_time"] = r.metrics.completion_time;
        d["executed"] = r.executed;
        return d;
      },
      py::arg("trajectory"), py::arg("seed") = 0, py::arg("noise_mae") = NoiseModel{}.mae_v);
  m.def(
      "apply_noise",
      [](double v_x, double v_y, double omega, std::uint64_t seed, int draws) {
        NoiseModel model;
        model.seed = seed;
        NoiseStream stream(model);
        py::array_t<double> out({static_cast<py::ssize_t>(draws), py::ssize_t{3}});
        auto a = out.mutable_unchecked<2>();
        for (int k = 0; k < draws; ++k) {
          const VelocityCommand c = apply_noise({v_x, v_y, omega}, stream);
          a(k, 0) = c.v_x;
          a(k, 1) = c.v_y;
          a(k, 2) = c.omega;
        }
        return out;
      },
      py::arg("v_x"), py::arg("v_y"), py::arg("omega"), py::arg("seed") = 0,
      py::arg("draws") = 1);
  m.def("is_success", &is_success, py::arg("position_error"), py::arg("heading_error"));

  py::class_<RewardInput>(m, "RewardInput")
      .def(py::init<>())
      .def_readwrite("v_cmd", &RewardInput::v_cmd)
      .def_readwrite("v_actual", &RewardInput::v_actual)
      .def_readwrite("omega_cmd", &RewardInput::omega_cmd)
      .def_readwrite("omega_actual", &RewardInput::omega_actual)
      .def_readwrite("yaw_object", &RewardInput::yaw_object)
      .def_readwrite("yaw_robot", &RewardInput::yaw_robot)
      .def_readwrite("d_x", &RewardInput::d_x)
      .def_readwrite("contact_forces", &RewardInput::contact_forces)
      .def_readwrite("joint_torques", &RewardInput::joint_torques)
      .def_readwrite("joint_accels", &RewardInput::joint_accels)
      .def_readwrite("ee_wrench", &RewardInput::ee_wrench)
      .def_readwrite("action", &RewardInput::action)
      .def_readwrite("action_prev", &RewardInput::action_prev)
      .def_readwrite("action_prev2", &RewardInput::action_prev2)
      .def_readwrite("v_z", &RewardInput::v_z)
      .def_readwrite("omega_xy", &RewardInput::omega_xy)
      .def_readwrite("gravity_xy", &RewardInput::gravity_xy)
      .def_readwrite("joint_angles", &RewardInput::joint_angles)
      .def_readwrite("default_joint_angles", &RewardInput::default_joint_angles);

  m.def(
      "total_reward",
      [](const RewardInput& in) {
        const RewardBreakdown b = total_reward(in);
        py::dict rows;
        for (const auto& [name, value] : b.rows) rows[py::str(name)] = value;
        return py::make_tuple(b.total, rows);
      },
      py::arg("input"), "Returns (total, {row name: value}) with the default weights.");
  m.def("tracking_reward", [](const RewardInput& in) { return tracking_reward(in); });
  m.def("collision_reward", [](const RewardInput& in) { return collision_reward(in); });
  m.def("effort_reward", [](const RewardInput& in) { return effort_reward(in); });
  m.def("smoothness_pose_reward", [](const RewardInput& in) { return smoothness_pose_reward(in); });

  py::class_<Pose3>(m, "Pose3")
      .def(py::init<>())
      .def(py::init([](Eigen::Vector3d p, Eigen::Vector4d q) { return Pose3{p, q}; }),
           py::arg("position"), py::arg("orientation"))
      .def_readwrite("position", &Pose3::position)
      .def_readwrite("orientation", &Pose3::orientation);
  py::class_<BaseState>(m, "BaseState")
      .def(py::init<>())
      .def_readwrite("planar_orientation", &BaseState::planar_orientation)
      .def_readwrite("angular_velocity", &BaseState::angular_velocity);
  py::class_<JointState>(m, "JointState")
      .def(py::init<>())
      .def_readwrite("link", &JointState::link)
      .def_readwrite("angle", &JointState::angle)
      .def_readwrite("default_angle", &JointState::default_angle)
      .def_readwrite("velocity", &JointState::velocity);
  py::class_<EndEffectorState>(m, "EndEffectorState")
      .def(py::init<>())
      .def_readwrite("pose", &EndEffectorState::pose)
      .def_readwrite("contact", &EndEffectorState::contact);
  py::class_<ObjectState>(m, "ObjectState")
      .def(py::init<>())
      .def_readwrite("pose", &ObjectState::pose)
      .def_readwrite("v_x", &ObjectState::v_x)
      .def_readwrite("v_y", &ObjectState::v_y)
      .def_readwrite("omega_z", &ObjectState::omega_z);
  py::class_<RobotObjectState>(m, "RobotObjectState")
      .def(py::init<>())
      .def_readwrite("base", &RobotObjectState::base)
      .def_readwrite("joints", &RobotObjectState::joints)
      .def_readwrite("end_effector", &RobotObjectState::end_effector)
      .def_readwrite("object", &RobotObjectState::object);

  py::class_<InteractionGraph>(m, "InteractionGraph")
      .def_property_readonly("nodes", [](const InteractionGraph& g) { return g.nodes; })
      .def_property_readonly("edges",
                             [](const InteractionGraph& g) {
                               py::list out;
                               for (const DirectedEdge& e : g.edges) {
                                 out.append(py::make_tuple(e.src, e.dst, e.feature));
                               }
                               return out;
                             })
      .def("incoming_neighbors",
           [](const InteractionGraph& g, int node) { return incoming_neighbors(g, node); });

  m.def("build_graph", &build_graph, py::arg("state"));
  m.def(
      "graph_embed",
      [](const InteractionGraph& g, std::uint64_t seed) {
        return graph_embed(g, GnnWeights::random(seed));
      },
      py::arg("graph"), py::arg("weights_seed") = 0,
      "Embedding with Glorot-initialized weights drawn from the seed.");
  m.attr("EMBEDDING_DIM") = kEmbeddingDim;
  m.attr("GRAPH_NODES") = kGraphNodes;
}
