#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace rearrange {

/// Position plus unit quaternion (w, x, y, z).
struct Pose3 {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector4d orientation{1.0, 0.0, 0.0, 0.0};

  static Pose3 identity() { return {}; }
};

/// Hamilton product a ⊗ b, quaternions as (w, x, y, z).
Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b);
Eigen::Vector4d quat_conjugate(const Eigen::Vector4d& q);

/// q_i ⊗ q_j^-1 for unit quaternions. Grouped so that swapping i and j
/// yields the exact conjugate.
Eigen::Vector4d relative_rotation(const Eigen::Vector4d& qi, const Eigen::Vector4d& qj);

struct BaseState {
  Eigen::Vector2d planar_orientation = Eigen::Vector2d(1.0, 0.0);
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
};

struct JointState {
  Pose3 link;  // relative to the base
  double angle = 0.0;
  double default_angle = 0.0;
  double velocity = 0.0;
};

struct EndEffectorState {
  Pose3 pose;
  bool contact = false;
};

struct ObjectState {
  Pose3 pose;  // geometric center in the base frame
  double v_x = 0.0;
  double v_y = 0.0;
  double omega_z = 0.0;
};

struct RobotObjectState {
  BaseState base;
  std::vector<JointState> joints;  // exactly six
  EndEffectorState end_effector;
  ObjectState object;
};

enum class NodeType { kBase = 0, kJoint = 1, kEndEffector = 2, kObject = 3 };

struct DirectedEdge {
  int src = 0;
  int dst = 0;
  Eigen::VectorXd feature;
};

/// Node features as rows plus directed edges. Messages flow src -> dst.
struct Graph {
  Eigen::MatrixXd nodes;
  std::vector<DirectedEdge> edges;
};

inline constexpr int kGraphNodes = 9;
inline constexpr int kRawFeatureWidth = 11;
inline constexpr int kNodeFeatureDim = 15;
inline constexpr int kEdgeFeatureDim = 7;
inline constexpr int kDirectedEdges = 28;
inline constexpr int kEmbeddingDim = 128;

struct InteractionGraph : Graph {
  std::vector<NodeType> types;
  std::vector<Pose3> poses;  // node poses in the base frame; base is identity
};

/// Nine nodes (base, six joints, end effector, object), 15-dim features and
/// both directions of the 14 physical couplings. The edge feature of
/// src -> dst is [p_dst - p_src, q_dst ⊗ q_src^-1]. Throws MALFORMED_STATE.
InteractionGraph build_graph(const RobotObjectState& state);

/// Undirected couplings: base to joints 1..6 and end effector, the joint
/// chain, end effector to object.
std::vector<std::pair<int, int>> coupling_edges();

/// Incoming neighbors of `node`, ascending.
std::vector<int> incoming_neighbors(const Graph& graph, int node);

enum class Activation { kElu, kRelu, kTanh, kIdentity };

double activate(Activation act, double x);

struct Dense {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Dense layers with the activation after every layer but the last.
struct Mlp {
  std::vector<Dense> layers;
  Activation activation = Activation::kElu;

  int input_dim() const;
  int output_dim() const;
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
};

struct GnnWeights {
  Mlp conv1;
  Mlp conv2;
  Mlp readout;

  /// Glorot-uniform weights, zero biases. Each EdgeConv perceptron has two
  /// hidden layers of width `hidden`; the readout has one.
  static GnnWeights random(std::uint64_t seed, int hidden = 64,
                           int node_dim = kNodeFeatureDim,
                           int edge_dim = kEdgeFeatureDim,
                           int output_dim = kEmbeddingDim);

  /// Throws DIMENSION_MISMATCH unless the blocks chain together.
  void validate(int node_dim = kNodeFeatureDim, int edge_dim = kEdgeFeatureDim) const;
};

/// One EdgeConv layer: message m = mlp([h_dst, h_src, f_e]) per edge, then
/// element-wise max over each node's incoming messages (zero without any).
Eigen::MatrixXd edge_conv(const Graph& graph, const Eigen::MatrixXd& hidden,
                          const Mlp& mlp);

/// Two EdgeConv layers, mean pooling over nodes, readout.
Eigen::VectorXd graph_embed(const Graph& graph, const GnnWeights& weights);

/// Flat binary: "RGNN", uint32 version, uint32 layer count, per layer
/// uint32 rows and cols, then per layer row-major float32 weights followed
/// by float32 biases, all little endian. Layers are conv1, conv2, readout
/// with 3, 3 and 2 layers.
void write_weights(const std::string& path, const GnnWeights& weights);
GnnWeights read_weights(const std::string& path);

}  // namespace rearrange
