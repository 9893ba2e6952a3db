#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>

#include "mmreach/errors.hpp"

namespace mmreach {

// One stage of the vector-field network: either an affine map x -> W x + b or
// an elementwise tanh. tanh is the only activation the benchmark models use;
// adding another activation requires only its derivative-range counterpart in
// jacobian_bounds.
enum class LayerKind { linear, tanh };

struct Layer {
  LayerKind kind{LayerKind::tanh};
  Eigen::MatrixXd W;  // linear only
  Eigen::VectorXd b;  // linear only

  static Layer make_linear(Eigen::MatrixXd W, Eigen::VectorXd b) {
    Layer l;
    l.kind = LayerKind::linear;
    l.W = std::move(W);
    l.b = std::move(b);
    return l;
  }
  static Layer make_tanh() { return Layer{}; }
};

// Autonomous neural ODE vector field
//   f(x) = layers(x) + tau * x        (tau term optional)
// where layers(x) is the forward composition of the layer stack. The tau term
// is kept out of the layer list so the closed-form Jacobian of the
// tau*x + W*tanh(x) benchmark stays structurally explicit.
struct NeuralOdeModel {
  std::string name;
  int state_dim{0};
  std::optional<double> tau;
  std::vector<Layer> layers;
};

// Checks the layer dimension chain: input of the first layer and output of
// the last must both equal state_dim (the field maps R^n -> R^n), and all
// weights must be finite.
inline void validate_model(const NeuralOdeModel& m) {
  if (m.state_dim <= 0) throw ModelParseError("model: state_dim must be positive");
  Eigen::Index cur = m.state_dim;
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    const Layer& l = m.layers[k];
    if (l.kind == LayerKind::linear) {
      if (l.W.cols() != cur)
        throw ModelParseError("model: layer " + std::to_string(k) + " expects input dim " +
                              std::to_string(l.W.cols()) + " but receives " + std::to_string(cur));
      if (l.b.size() != l.W.rows())
        throw ModelParseError("model: layer " + std::to_string(k) + " bias length " +
                              std::to_string(l.b.size()) + " does not match " +
                              std::to_string(l.W.rows()) + " rows");
      if (!l.W.allFinite() || !l.b.allFinite())
        throw ModelParseError("model: layer " + std::to_string(k) + " has non-finite weights");
      cur = l.W.rows();
    }
  }
  if (cur != m.state_dim)
    throw ModelParseError("model: layer stack ends with dim " + std::to_string(cur) +
                          ", expected state_dim " + std::to_string(m.state_dim));
  if (m.tau && !std::isfinite(*m.tau)) throw ModelParseError("model: non-finite tau");
}

inline Eigen::VectorXd eval_field(const NeuralOdeModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.state_dim)
    throw DimensionError("eval_field: state dimension " + std::to_string(x.size()) +
                         ", model expects " + std::to_string(m.state_dim));
  Eigen::VectorXd cur = x;
  for (const Layer& l : m.layers) {
    if (l.kind == LayerKind::linear)
      cur = (l.W * cur + l.b).eval();
    else
      cur = cur.array().tanh().matrix();
  }
  if (m.tau) cur += *m.tau * x;
  return cur;
}

// Exact pointwise Jacobian by the chain rule: linear layers contribute W,
// tanh layers contribute diag(sech^2(pre-activation)), plus tau*I.
inline Eigen::MatrixXd eval_jacobian(const NeuralOdeModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.state_dim)
    throw DimensionError("eval_jacobian: state dimension " + std::to_string(x.size()) +
                         ", model expects " + std::to_string(m.state_dim));
  Eigen::VectorXd cur = x;
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(m.state_dim, m.state_dim);
  for (const Layer& l : m.layers) {
    if (l.kind == LayerKind::linear) {
      J = l.W * J;
      cur = (l.W * cur + l.b).eval();
    } else {
      // d tanh(u)/du = 1 - tanh(u)^2 = sech^2(u), evaluated at the layer input.
      Eigen::VectorXd s(cur.size());
      for (Eigen::Index i = 0; i < cur.size(); ++i) {
        const double c = 1.0 / std::cosh(cur[i]);
        s[i] = c * c;
      }
      J = s.asDiagonal() * J;
      cur = cur.array().tanh().matrix();
    }
  }
  if (m.tau) J += *m.tau * Eigen::MatrixXd::Identity(m.state_dim, m.state_dim);
  return J;
}

// ---------------------------------------------------------------------------
// Built-in fixed-point attractor (FPA) benchmark:
//   f(x) = tau*x + W*tanh(x),  n = 5,  tau = -1e-6,
// with the composite weight
//   W = [ 0_{2x2}  A   ]
//       [ 0_{3x2}  B*A ]
// assembled from the 2x3 block A and 3x2 block B below.
// ---------------------------------------------------------------------------
inline NeuralOdeModel fpa_model() {
  Eigen::MatrixXd A(2, 3);
  A << -1.20327, -0.07202, -0.93635,
        1.18810, -1.50015,  0.93519;
  Eigen::MatrixXd B(3, 2);
  B <<  1.21464, -0.10502,
        0.12023,  0.19387,
       -1.36695,  0.12201;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(5, 5);
  W.block(0, 2, 2, 3) = A;
  W.block(2, 2, 3, 3) = B * A;

  NeuralOdeModel m;
  m.name = "fpa";
  m.state_dim = 5;
  m.tau = -1e-6;
  m.layers.push_back(Layer::make_tanh());
  m.layers.push_back(Layer::make_linear(W, Eigen::VectorXd::Zero(5)));
  validate_model(m);
  return m;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization. Schema:
//   { "state_dim": n, "tau": <optional real>, "name": <optional string>,
//     "layers": [ {"kind":"linear","W":[[...],...],"b":[...]},
//                 {"kind":"tanh"}, ... ] }
// Weights are row-major, full-precision decimal (round-trips bitwise).
// ---------------------------------------------------------------------------
inline nlohmann::json model_to_json(const NeuralOdeModel& m) {
  nlohmann::json j;
  if (!m.name.empty()) j["name"] = m.name;
  j["state_dim"] = m.state_dim;
  if (m.tau) j["tau"] = *m.tau;
  j["layers"] = nlohmann::json::array();
  for (const Layer& l : m.layers) {
    nlohmann::json jl;
    if (l.kind == LayerKind::linear) {
      jl["kind"] = "linear";
      auto rows = nlohmann::json::array();
      for (Eigen::Index i = 0; i < l.W.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < l.W.cols(); ++k) row.push_back(l.W(i, k));
        rows.push_back(std::move(row));
      }
      jl["W"] = std::move(rows);
      auto bias = nlohmann::json::array();
      for (Eigen::Index i = 0; i < l.b.size(); ++i) bias.push_back(l.b[i]);
      jl["b"] = std::move(bias);
    } else {
      jl["kind"] = "tanh";
    }
    j["layers"].push_back(std::move(jl));
  }
  return j;
}

inline NeuralOdeModel model_from_json(const nlohmann::json& j) {
  NeuralOdeModel m;
  try {
    m.name = j.value("name", std::string{});
    m.state_dim = j.at("state_dim").get<int>();
    if (j.contains("tau")) m.tau = j.at("tau").get<double>();
    for (const auto& jl : j.at("layers")) {
      const std::string kind = jl.at("kind").get<std::string>();
      if (kind == "linear") {
        const auto& jw = jl.at("W");
        const auto rows = static_cast<Eigen::Index>(jw.size());
        if (rows == 0) throw ModelParseError("model: empty weight matrix");
        const auto cols = static_cast<Eigen::Index>(jw.at(0).size());
        Eigen::MatrixXd W(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
          if (static_cast<Eigen::Index>(jw.at(i).size()) != cols)
            throw ModelParseError("model: ragged weight matrix");
          for (Eigen::Index k = 0; k < cols; ++k) W(i, k) = jw.at(i).at(k).get<double>();
        }
        const auto& jb = jl.at("b");
        Eigen::VectorXd b(static_cast<Eigen::Index>(jb.size()));
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = jb.at(i).get<double>();
        m.layers.push_back(Layer::make_linear(std::move(W), std::move(b)));
      } else if (kind == "tanh") {
        m.layers.push_back(Layer::make_tanh());
      } else {
        throw ModelParseError("model: unknown layer kind '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelParseError(std::string("model: malformed JSON document: ") + e.what());
  }
  validate_model(m);
  return m;
}

// Loads a model by reference: the built-in name "fpa" or a path to a JSON
// weight file in the schema above.
inline NeuralOdeModel load_model(const std::string& ref) {
  if (ref == "fpa") return fpa_model();
  std::ifstream in(ref);
  if (!in) throw ModelParseError("load_model: cannot open '" + ref + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ModelParseError("load_model: parse error in '" + ref + "': " + e.what());
  }
  NeuralOdeModel m = model_from_json(j);
  if (m.name.empty()) m.name = ref;
  return m;
}

inline void save_model(const NeuralOdeModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_model: cannot write '" + path + "'");
  out << model_to_json(m).dump(2) << "\n";
  if (!out) throw IoError("save_model: write failed for '" + path + "'");
}

}  // namespace mmreach
