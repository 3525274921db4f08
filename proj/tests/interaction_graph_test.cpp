#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "rearrange/error.hpp"
#include "rearrange/interaction_graph.hpp"

namespace rearrange {
namespace {

Eigen::Vector4d random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector4d q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized();
}

Pose3 random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {Eigen::Vector3d(u(rng), u(rng), u(rng)), random_quat(rng)};
}

RobotObjectState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RobotObjectState s;
  const double yaw = 3.0 * u(rng);
  s.base.planar_orientation = {std::cos(yaw), std::sin(yaw)};
  s.base.angular_velocity = {u(rng), u(rng), u(rng)};
  for (int i = 0; i < 6; ++i) {
    s.joints.push_back({random_pose(rng), u(rng), u(rng), u(rng)});
  }
  s.end_effector = {random_pose(rng), u(rng) > 0.0};
  s.object = {random_pose(rng), 0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
  return s;
}

TEST(Quaternion, RelativeRotationMatchesHamiltonProduct) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector4d a = random_quat(rng), b = random_quat(rng);
    const Eigen::Vector4d expected = quat_multiply(a, quat_conjugate(b));
    EXPECT_LT((relative_rotation(a, b) - expected).norm(), 1e-15);
  }
  // i * j = k
  const Eigen::Vector4d k = quat_multiply({0, 1, 0, 0}, {0, 0, 1, 0});
  EXPECT_EQ(k, Eigen::Vector4d(0, 0, 0, 1));
}

TEST(Graph, ShapesForRandomStates) {
  std::mt19937_64 rng(2);
  const GnnWeights w = GnnWeights::random(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const InteractionGraph g = build_graph(random_state(rng));
    ASSERT_EQ(g.nodes.rows(), kGraphNodes);
    ASSERT_EQ(g.nodes.cols(), kNodeFeatureDim);
    ASSERT_EQ(static_cast<int>(g.edges.size()), kDirectedEdges);
    for (const DirectedEdge& e : g.edges) ASSERT_EQ(e.feature.size(), kEdgeFeatureDim);
    if (trial % 10 == 0) {
      const Eigen::VectorXd l = graph_embed(g, w);
      ASSERT_EQ(l.size(), kEmbeddingDim);
      ASSERT_TRUE(l.allFinite());
    }
  }
}

TEST(Graph, EdgeSetMatchesCouplings) {
  std::mt19937_64 rng(3);
  const InteractionGraph g = build_graph(random_state(rng));
  EXPECT_EQ(incoming_neighbors(g, 4), (std::vector<int>{0, 3, 5}));
  EXPECT_EQ(incoming_neighbors(g, 0), (std::vector<int>{1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(incoming_neighbors(g, 8), (std::vector<int>{7}));
  EXPECT_EQ(incoming_neighbors(g, 7), (std::vector<int>{0, 6, 8}));
  EXPECT_EQ(coupling_edges().size(), 14u);
}

TEST(Graph, NodeFeatureLayout) {
  std::mt19937_64 rng(4);
  RobotObjectState s = random_state(rng);
  s.joints[2].angle = s.joints[2].default_angle = 0.7;
  const InteractionGraph g = build_graph(s);
  // Base: [phi(2), omega(3)], zeros, one-hot base.
  EXPECT_EQ(g.nodes(0, 0), s.base.planar_orientation[0]);
  EXPECT_EQ(g.nodes(0, 4), s.base.angular_velocity[2]);
  for (int c = 5; c < 11; ++c) EXPECT_EQ(g.nodes(0, c), 0.0);
  // Joint: [r(7), q, q_def, q - q_def, qdot].
  EXPECT_EQ(g.nodes(3, 0), s.joints[2].link.position[0]);
  EXPECT_EQ(g.nodes(3, 3), s.joints[2].link.orientation[0]);
  EXPECT_EQ(g.nodes(3, 7), 0.7);
  EXPECT_EQ(g.nodes(3, 9), 0.0);
  EXPECT_EQ(g.nodes(3, 10), s.joints[2].velocity);
  // End effector: [r(7), contact].
  EXPECT_EQ(g.nodes(7, 7), s.end_effector.contact ? 1.0 : 0.0);
  EXPECT_EQ(g.nodes(7, 8), 0.0);
  // Object: [r(7), vx, vy, wz].
  EXPECT_EQ(g.nodes(8, 9), s.object.omega_z);
  const int expected_type[] = {0, 1, 1, 1, 1, 1, 1, 2, 3};
  for (int i = 0; i < kGraphNodes; ++i) {
    for (int t = 0; t < 4; ++t) {
      EXPECT_EQ(g.nodes(i, 11 + t), t == expected_type[i] ? 1.0 : 0.0);
    }
  }
}

TEST(Graph, EdgeFeaturesAreExactlyAntisymmetric) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const InteractionGraph g = build_graph(random_state(rng));
    for (std::size_t k = 0; k < g.edges.size(); k += 2) {
      const DirectedEdge& a = g.edges[k];
      const DirectedEdge& b = g.edges[k + 1];
      ASSERT_EQ(a.src, b.dst);
      ASSERT_EQ(a.dst, b.src);
      for (int c = 0; c < 3; ++c) EXPECT_EQ(a.feature[c], -b.feature[c]);
      EXPECT_EQ(a.feature[3], b.feature[3]);
      for (int c = 4; c < 7; ++c) EXPECT_EQ(a.feature[c], -b.feature[c]);
    }
  }
}

TEST(Graph, EdgeFeatureIsDestinationRelativeToSource) {
  std::mt19937_64 rng(6);
  const RobotObjectState s = random_state(rng);
  const InteractionGraph g = build_graph(s);
  for (const DirectedEdge& e : g.edges) {
    if (e.src == 7 && e.dst == 8) {
      const Eigen::Vector3d dp = s.object.pose.position - s.end_effector.pose.position;
      EXPECT_EQ(e.feature.head<3>(), dp);
      const Eigen::Vector4d dq =
          quat_multiply(s.object.pose.orientation, quat_conjugate(s.end_effector.pose.orientation));
      EXPECT_LT((e.feature.tail<4>() - dq).norm(), 1e-15);
    }
    if (e.src == 0) {
      EXPECT_EQ(e.feature.head<3>(), g.poses[e.dst].position);
    }
  }
}

TEST(Graph, MalformedStatesRejected) {
  std::mt19937_64 rng(7);
  RobotObjectState s = random_state(rng);
  s.joints.pop_back();
  EXPECT_THROW(build_graph(s), Error);
  s = random_state(rng);
  s.object.pose.orientation *= 1.001;
  try {
    build_graph(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedState);
  }
  s = random_state(rng);
  s.joints[0].velocity = std::nan("");
  EXPECT_THROW(build_graph(s), Error);
}

Mlp zero_mlp(int in, int hidden, int out) {
  Mlp m;
  m.layers.push_back({Eigen::MatrixXd::Zero(hidden, in), Eigen::VectorXd::Zero(hidden)});
  m.layers.push_back({Eigen::MatrixXd::Zero(out, hidden), Eigen::VectorXd::Zero(out)});
  return m;
}

TEST(EdgeConv, ZeroWeightsGiveZeroFeatures) {
  std::mt19937_64 rng(8);
  const InteractionGraph g = build_graph(random_state(rng));
  const Eigen::MatrixXd h = edge_conv(g, g.nodes, zero_mlp(37, 8, 5));
  EXPECT_EQ(h.rows(), 9);
  EXPECT_EQ(h.cols(), 5);
  EXPECT_TRUE((h.array() == 0.0).all());
}

TEST(EdgeConv, SingleIncomingNeighborPassesMessageThrough) {
  std::mt19937_64 rng(9);
  const InteractionGraph g = build_graph(random_state(rng));
  const GnnWeights w = GnnWeights::random(3);
  const Eigen::MatrixXd h = edge_conv(g, g.nodes, w.conv1);
  for (const DirectedEdge& e : g.edges) {
    if (e.dst != 8) continue;
    Eigen::VectorXd x(37);
    x << g.nodes.row(8).transpose(), g.nodes.row(7).transpose(), e.feature;
    EXPECT_EQ(h.row(8).transpose(), w.conv1.forward(x));
  }
}

TEST(EdgeConv, HandComputedFixture) {
  std::ifstream in(std::string(REARRANGE_FIXTURE_DIR) + "/edge_conv_2node.txt");
  ASSERT_TRUE(in.good());
  std::map<int, double> node_values, expected;
  Graph graph;
  Mlp mlp;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key) || key[0] == '#') continue;
    if (key == "node") {
      int i;
      double v;
      ss >> i >> v;
      node_values[i] = v;
    } else if (key == "edge") {
      DirectedEdge e;
      double f;
      ss >> e.src >> e.dst >> f;
      e.feature = Eigen::VectorXd::Constant(1, f);
      graph.edges.push_back(e);
    } else if (key == "layer") {
      int rows, cols;
      ss >> rows >> cols;
      Dense d{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
      for (int r = 0; r < rows; ++r) for (int c = 0; c < cols; ++c) ss >> d.weight(r, c);
      std::string bias;
      ss >> bias;
      for (int r = 0; r < rows; ++r) ss >> d.bias[r];
      mlp.layers.push_back(d);
    } else if (key == "expect") {
      int i;
      double v;
      ss >> i >> v;
      expected[i] = v;
    }
  }
  graph.nodes.resize(static_cast<int>(node_values.size()), 1);
  for (const auto& [i, v] : node_values) graph.nodes(i, 0) = v;
  const Eigen::MatrixXd h = edge_conv(graph, graph.nodes, mlp);
  ASSERT_EQ(expected.size(), 2u);
  for (const auto& [i, v] : expected) EXPECT_DOUBLE_EQ(h(i, 0), v);
  EXPECT_DOUBLE_EQ(h(1, 0), 5.25 + 2.0 * std::expm1(-1.5));
}

TEST(EdgeConv, MaxAggregationIsMonotone) {
  // Raising one message component raises (weakly) the aggregate.
  Graph g;
  g.nodes = Eigen::MatrixXd::Zero(3, 1);
  g.nodes(0, 0) = 1.0;
  g.nodes(1, 0) = -2.0;
  g.edges = {{0, 2, Eigen::VectorXd::Zero(1)}, {1, 2, Eigen::VectorXd::Zero(1)}};
  Mlp m;
  m.activation = Activation::kIdentity;
  Eigen::MatrixXd w(2, 3);
  w << 0, 1, 0,
       0, -1, 0;
  m.layers.push_back({w, Eigen::VectorXd::Zero(2)});
  const Eigen::MatrixXd base = edge_conv(g, g.nodes, m);
  EXPECT_EQ(base(2, 0), 1.0);
  EXPECT_EQ(base(2, 1), 2.0);
  for (double bump : {0.5, 3.0, 10.0}) {
    Graph raised = g;
    raised.nodes(1, 0) += bump;
    const Eigen::MatrixXd h = edge_conv(raised, raised.nodes, m);
    EXPECT_GE(h(2, 0), base(2, 0));
  }
}

TEST(EdgeConv, DimensionMismatchThrows) {
  std::mt19937_64 rng(10);
  const InteractionGraph g = build_graph(random_state(rng));
  try {
    edge_conv(g, g.nodes, zero_mlp(36, 4, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  GnnWeights w = GnnWeights::random(1);
  w.readout.layers.back().weight.conservativeResize(64, Eigen::NoChange);
  w.readout.layers.back().bias.conservativeResize(64);
  EXPECT_THROW(w.validate(), Error);
}

TEST(Embed, RelabelingInvariance) {
  std::mt19937_64 rng(11);
  const GnnWeights w = GnnWeights::random(5);
  for (int trial = 0; trial < 100; ++trial) {
    const InteractionGraph g = build_graph(random_state(rng));
    std::vector<int> perm(kGraphNodes);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Graph relabeled;
    relabeled.nodes.resize(kGraphNodes, kNodeFeatureDim);
    for (int i = 0; i < kGraphNodes; ++i) relabeled.nodes.row(perm[i]) = g.nodes.row(i);
    for (const DirectedEdge& e : g.edges) {
      relabeled.edges.push_back({perm[e.src], perm[e.dst], e.feature});
    }
    std::shuffle(relabeled.edges.begin(), relabeled.edges.end(), rng);
    const Eigen::VectorXd a = graph_embed(g, w);
    const Eigen::VectorXd b = graph_embed(relabeled, w);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Embed, DeterministicForSeed) {
  std::mt19937_64 rng(12);
  const InteractionGraph g = build_graph(random_state(rng));
  const Eigen::VectorXd a = graph_embed(g, GnnWeights::random(42));
  const Eigen::VectorXd b = graph_embed(g, GnnWeights::random(42));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, graph_embed(g, GnnWeights::random(43)));
}

TEST(Embed, RegimesSeparate) {
  // Three interaction regimes: object distance and commands typical of a
  // small bin, a chair and a long table.
  struct Regime {
    double reach, height, speed;
  };
  const Regime regimes[] = {{0.4, 0.3, 0.1}, {0.8, 0.5, 0.3}, {1.4, 0.7, 0.5}};
  const GnnWeights w = GnnWeights::random(2024);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> jitter(0.0, 0.02);
  std::vector<std::vector<Eigen::VectorXd>> clusters(3);
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 30; ++k) {
      RobotObjectState s;
      for (int j = 0; j < 6; ++j) {
        JointState js;
        js.link.position = {0.1 * j + jitter(rng), jitter(rng), 0.3 + jitter(rng)};
        js.angle = 0.1 * j + jitter(rng);
        js.default_angle = 0.1 * j;
        s.joints.push_back(js);
      }
      s.end_effector.pose.position = {regimes[r].reach - 0.2 + jitter(rng), jitter(rng),
                                      regimes[r].height};
      s.end_effector.contact = true;
      s.object.pose.position = {regimes[r].reach + jitter(rng), jitter(rng),
                                regimes[r].height / 2.0};
      s.object.v_x = regimes[r].speed + jitter(rng);
      s.object.omega_z = -regimes[r].speed + jitter(rng);
      clusters[r].push_back(graph_embed(build_graph(s), w));
    }
  }
  std::vector<Eigen::VectorXd> centroid(3, Eigen::VectorXd::Zero(kEmbeddingDim));
  double spread = 0.0;
  for (int r = 0; r < 3; ++r) {
    for (const auto& v : clusters[r]) centroid[r] += v / 30.0;
    double ss = 0.0;
    for (const auto& v : clusters[r]) ss += (v - centroid[r]).squaredNorm();
    spread = std::max(spread, std::sqrt(ss / 30.0));
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) EXPECT_GT((centroid[a] - centroid[b]).norm(), spread);
  }
}

TEST(Weights, FileRoundTrip) {
  const GnnWeights w = GnnWeights::random(77);
  const std::string path =
      (std::filesystem::temp_directory_path() / "rearrange_weights_test.bin").string();
  write_weights(path, w);
  const GnnWeights back = read_weights(path);
  const Mlp* ma[] = {&w.conv1, &w.conv2, &w.readout};
  const Mlp* mb[] = {&back.conv1, &back.conv2, &back.readout};
  for (int b = 0; b < 3; ++b) {
    ASSERT_EQ(ma[b]->layers.size(), mb[b]->layers.size());
    for (std::size_t k = 0; k < ma[b]->layers.size(); ++k) {
      const Eigen::MatrixXd expected =
          ma[b]->layers[k].weight.cast<float>().cast<double>();
      EXPECT_EQ(mb[b]->layers[k].weight, expected);
    }
  }
  EXPECT_EQ(std::filesystem::file_size(path),
            4u + 4u + 4u + 8u * 8u +
                4u * (37 * 64 + 64 + 64 * 64 + 64 + 64 * 64 + 64 + 135 * 64 + 64 +
                      64 * 64 + 64 + 64 * 64 + 64 + 64 * 64 + 64 + 64 * 128 + 128));
  {
    std::ofstream bad(path, std::ios::binary);
    bad << "NOPE";
  }
  EXPECT_THROW(read_weights(path), Error);
  std::filesystem::remove(path);
  EXPECT_THROW(read_weights(path), Error);
}

}  // namespace
}  // namespace rearrange
