#include "rearrange/interaction_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "rearrange/error.hpp"

namespace rearrange {
namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr char kMagic[4] = {'R', 'G', 'N', 'N'};
constexpr std::uint32_t kWeightsVersion = 1;

void check_pose(const Pose3& pose, const std::string& field) {
  if (!pose.position.allFinite() || !pose.orientation.allFinite()) {
    throw Error(ErrorCode::kMalformedState, field + ": non-finite value");
  }
  if (std::abs(pose.orientation.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kMalformedState, field + ": quaternion is not unit length");
  }
}

Eigen::VectorXd node_row(const std::vector<double>& raw, NodeType type) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kNodeFeatureDim);
  for (std::size_t i = 0; i < raw.size(); ++i) f[static_cast<int>(i)] = raw[i];
  f[kRawFeatureWidth + static_cast<int>(type)] = 1.0;
  return f;
}

void append_pose(std::vector<double>& out, const Pose3& p) {
  out.insert(out.end(), p.position.data(), p.position.data() + 3);
  out.insert(out.end(), p.orientation.data(), p.orientation.data() + 4);
}

Mlp random_mlp(std::mt19937_64& rng, const std::vector<int>& dims) {
  Mlp mlp;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const int in = dims[k], out = dims[k + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Dense layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layer.weight(r, c) = dist(rng);
    }
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f32(std::ostream& out, double x) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
  write_u32(out, bits);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw Error(ErrorCode::kParseError, path + ": truncated weight file");
  }
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  return v;
}

}  // namespace

Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

Eigen::Vector4d quat_conjugate(const Eigen::Vector4d& q) {
  return {q[0], -q[1], -q[2], -q[3]};
}

Eigen::Vector4d relative_rotation(const Eigen::Vector4d& qi, const Eigen::Vector4d& qj) {
  // w = wi wj + vi.vj ; v = wj vi - wi vj - vi x vj
  const double w = (qi[0] * qj[0] + qi[1] * qj[1]) + (qi[2] * qj[2] + qi[3] * qj[3]);
  const double cx = qi[2] * qj[3] - qi[3] * qj[2];
  const double cy = qi[3] * qj[1] - qi[1] * qj[3];
  const double cz = qi[1] * qj[2] - qi[2] * qj[1];
  return {w, (qj[0] * qi[1] - qi[0] * qj[1]) - cx,
          (qj[0] * qi[2] - qi[0] * qj[2]) - cy,
          (qj[0] * qi[3] - qi[0] * qj[3]) - cz};
}

std::vector<std::pair<int, int>> coupling_edges() {
  std::vector<std::pair<int, int>> out;
  for (int j = 1; j <= 7; ++j) out.emplace_back(0, j);
  for (int j = 1; j <= 6; ++j) out.emplace_back(j, j + 1);
  out.emplace_back(7, 8);
  return out;
}

InteractionGraph build_graph(const RobotObjectState& state) {
  if (state.joints.size() != 6) {
    throw Error(ErrorCode::kMalformedState,
                "joints: expected 6, got " + std::to_string(state.joints.size()));
  }
  if (!state.base.planar_orientation.allFinite() || !state.base.angular_velocity.allFinite()) {
    throw Error(ErrorCode::kMalformedState, "base: non-finite value");
  }
  for (std::size_t i = 0; i < 6; ++i) {
    const JointState& j = state.joints[i];
    check_pose(j.link, "joints[" + std::to_string(i) + "].link");
    if (!std::isfinite(j.angle) || !std::isfinite(j.default_angle) || !std::isfinite(j.velocity)) {
      throw Error(ErrorCode::kMalformedState,
                  "joints[" + std::to_string(i) + "]: non-finite value");
    }
  }
  check_pose(state.end_effector.pose, "end_effector.pose");
  check_pose(state.object.pose, "object.pose");
  if (!std::isfinite(state.object.v_x) || !std::isfinite(state.object.v_y) ||
      !std::isfinite(state.object.omega_z)) {
    throw Error(ErrorCode::kMalformedState, "object: non-finite command");
  }

  InteractionGraph g;
  g.nodes.resize(kGraphNodes, kNodeFeatureDim);
  g.types.resize(kGraphNodes);
  g.poses.resize(kGraphNodes);

  std::vector<double> raw = {state.base.planar_orientation[0], state.base.planar_orientation[1]};
  raw.insert(raw.end(), state.base.angular_velocity.data(), state.base.angular_velocity.data() + 3);
  g.types[0] = NodeType::kBase;
  g.poses[0] = Pose3::identity();
  g.nodes.row(0) = node_row(raw, NodeType::kBase);

  for (int i = 1; i <= 6; ++i) {
    const JointState& j = state.joints[i - 1];
    raw.clear();
    append_pose(raw, j.link);
    raw.push_back(j.angle);
    raw.push_back(j.default_angle);
    raw.push_back(j.angle - j.default_angle);
    raw.push_back(j.velocity);
    g.types[i] = NodeType::kJoint;
    g.poses[i] = j.link;
    g.nodes.row(i) = node_row(raw, NodeType::kJoint);
  }

  raw.clear();
  append_pose(raw, state.end_effector.pose);
  raw.push_back(state.end_effector.contact ? 1.0 : 0.0);
  g.types[7] = NodeType::kEndEffector;
  g.poses[7] = state.end_effector.pose;
  g.nodes.row(7) = node_row(raw, NodeType::kEndEffector);

  raw.clear();
  append_pose(raw, state.object.pose);
  raw.push_back(state.object.v_x);
  raw.push_back(state.object.v_y);
  raw.push_back(state.object.omega_z);
  g.types[8] = NodeType::kObject;
  g.poses[8] = state.object.pose;
  g.nodes.row(8) = node_row(raw, NodeType::kObject);

  auto edge = [&](int src, int dst) {
    DirectedEdge e{src, dst, Eigen::VectorXd(kEdgeFeatureDim)};
    e.feature.head<3>() = g.poses[dst].position - g.poses[src].position;
    e.feature.tail<4>() = relative_rotation(g.poses[dst].orientation, g.poses[src].orientation);
    return e;
  };
  for (const auto& [a, b] : coupling_edges()) {
    g.edges.push_back(edge(a, b));
    g.edges.push_back(edge(b, a));
  }
  return g;
}

std::vector<int> incoming_neighbors(const Graph& graph, int node) {
  std::vector<int> out;
  for (const DirectedEdge& e : graph.edges) {
    if (e.dst == node) out.push_back(e.src);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double activate(Activation act, double x) {
  switch (act) {
    case Activation::kElu: return x > 0.0 ? x : std::expm1(x);
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kTanh: return std::tanh(x);
    case Activation::kIdentity: return x;
  }
  return x;
}

int Mlp::input_dim() const {
  return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols());
}

int Mlp::output_dim() const {
  return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows());
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "perceptron expects " + std::to_string(input_dim()) + " inputs, got " +
                    std::to_string(x.size()));
  }
  Eigen::VectorXd h = x;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    h = layers[k].weight * h + layers[k].bias;
    if (k + 1 < layers.size()) h = h.unaryExpr([this](double v) { return activate(activation, v); });
  }
  return h;
}

GnnWeights GnnWeights::random(std::uint64_t seed, int hidden, int node_dim,
                              int edge_dim, int output_dim) {
  std::mt19937_64 rng(seed);
  GnnWeights w;
  w.conv1 = random_mlp(rng, {2 * node_dim + edge_dim, hidden, hidden, hidden});
  w.conv2 = random_mlp(rng, {2 * hidden + edge_dim, hidden, hidden, hidden});
  w.readout = random_mlp(rng, {hidden, hidden, output_dim});
  return w;
}

void GnnWeights::validate(int node_dim, int edge_dim) const {
  auto check_chain = [](const Mlp& m, const char* name) {
    if (m.layers.empty()) {
      throw Error(ErrorCode::kDimensionMismatch, std::string(name) + ": no layers");
    }
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
      const Dense& d = m.layers[k];
      if (d.bias.size() != d.weight.rows() ||
          (k > 0 && d.weight.cols() != m.layers[k - 1].weight.rows())) {
        throw Error(ErrorCode::kDimensionMismatch,
                    std::string(name) + ".layers[" + std::to_string(k) + "]: shape mismatch");
      }
    }
  };
  check_chain(conv1, "conv1");
  check_chain(conv2, "conv2");
  check_chain(readout, "readout");
  if (conv1.input_dim() != 2 * node_dim + edge_dim ||
      conv2.input_dim() != 2 * conv1.output_dim() + edge_dim ||
      readout.input_dim() != conv2.output_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "weight blocks do not chain");
  }
  if (readout.output_dim() != kEmbeddingDim) {
    throw Error(ErrorCode::kDimensionMismatch, "readout must produce 128 features");
  }
}

Eigen::MatrixXd edge_conv(const Graph& graph, const Eigen::MatrixXd& hidden,
                          const Mlp& mlp) {
  const int n = static_cast<int>(hidden.rows());
  const int d = static_cast<int>(hidden.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, mlp.output_dim());
  std::vector<bool> seen(n, false);
  for (const DirectedEdge& e : graph.edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw Error(ErrorCode::kDimensionMismatch, "edge endpoint out of range");
    }
    const int in = 2 * d + static_cast<int>(e.feature.size());
    if (in != mlp.input_dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "message input has " + std::to_string(in) + " features, perceptron expects " +
                      std::to_string(mlp.input_dim()));
    }
    Eigen::VectorXd x(in);
    x << hidden.row(e.dst).transpose(), hidden.row(e.src).transpose(), e.feature;
    const Eigen::VectorXd m = mlp.forward(x);
    if (!seen[e.dst]) {
      out.row(e.dst) = m.transpose();
      seen[e.dst] = true;
    } else {
      out.row(e.dst) = out.row(e.dst).cwiseMax(m.transpose());
    }
  }
  return out;
}

Eigen::VectorXd graph_embed(const Graph& graph, const GnnWeights& weights) {
  const Eigen::MatrixXd h1 = edge_conv(graph, graph.nodes, weights.conv1);
  const Eigen::MatrixXd h2 = edge_conv(graph, h1, weights.conv2);
  const Eigen::VectorXd pooled = h2.colwise().mean().transpose();
  return weights.readout.forward(pooled);
}

void write_weights(const std::string& path, const GnnWeights& weights) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path + " for writing");
  std::vector<const Dense*> layers;
  for (const Mlp* m : {&weights.conv1, &weights.conv2, &weights.readout}) {
    for (const Dense& d : m->layers) layers.push_back(&d);
  }
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kWeightsVersion);
  write_u32(out, static_cast<std::uint32_t>(layers.size()));
  for (const Dense* d : layers) {
    write_u32(out, static_cast<std::uint32_t>(d->weight.rows()));
    write_u32(out, static_cast<std::uint32_t>(d->weight.cols()));
  }
  for (const Dense* d : layers) {
    for (int r = 0; r < d->weight.rows(); ++r) {
      for (int c = 0; c < d->weight.cols(); ++c) write_f32(out, d->weight(r, c));
    }
    for (int r = 0; r < d->bias.size(); ++r) write_f32(out, d->bias[r]);
  }
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path);
}

GnnWeights read_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::kParseError, path + ": bad magic");
  }
  if (read_u32(in, path) != kWeightsVersion) {
    throw Error(ErrorCode::kParseError, path + ": unsupported version");
  }
  const std::uint32_t count = read_u32(in, path);
  if (count != 8) {
    throw Error(ErrorCode::kParseError,
                path + ": expected 8 layers, found " + std::to_string(count));
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t rows = read_u32(in, path);
    const std::uint32_t cols = read_u32(in, path);
    if (rows == 0 || cols == 0 || rows > 65536 || cols > 65536) {
      throw Error(ErrorCode::kParseError, path + ": implausible layer shape");
    }
    shapes.emplace_back(rows, cols);
  }
  GnnWeights w;
  Mlp* blocks[] = {&w.conv1, &w.conv2, &w.readout};
  const int per_block[] = {3, 3, 2};
  std::size_t k = 0;
  for (int b = 0; b < 3; ++b) {
    for (int l = 0; l < per_block[b]; ++l, ++k) {
      const auto [rows, cols] = shapes[k];
      Dense d{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
      for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
          d.weight(r, c) = std::bit_cast<float>(read_u32(in, path));
        }
      }
      for (std::uint32_t r = 0; r < rows; ++r) d.bias[r] = std::bit_cast<float>(read_u32(in, path));
      blocks[b]->layers.push_back(std::move(d));
    }
  }
  w.validate();
  return w;
}

}  // namespace rearrange
