// Copyright 2026 The tfdiff Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "tfdiff/rng.hpp"

namespace tfd::nn {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

/// A named trainable tensor. Every complex entry counts as two independent
/// real coordinates; real_only pins the imaginary coordinate at zero.
struct Parameter {
  std::string name;
  CMatrix value;
  bool real_only = false;
};

/// Owns parameters in registration order. References stay valid as
/// parameters are added.
class ParameterSet {
 public:
  std::size_t add(std::string name, CMatrix init, bool real_only = false);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;

  /// Number of real coordinates (two per complex entry, one if real_only).
  std::size_t scalar_count() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::deque<Parameter> params_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

/// Per-parameter gradients aligned with ParameterSet order.
using Gradients = std::vector<CMatrix>;

class Graph;

/// Handle to a node recorded in a Graph.
class Var {
 public:
  Var() = default;
  const CMatrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, int id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  int id_ = -1;
};

struct GraphOptions {
  bool record_gradients = true;
  bool training = false;  // enables dropout
  std::uint64_t dropout_seed = 0;
};

/// Dynamically recorded computation for reverse-mode differentiation.
///
/// Gradients follow the convention grad = dL/dRe + i dL/dIm for a real loss
/// L, so for y = x W the input gradient is G_y W^H. A graph is single-use and
/// must not be shared between threads.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const CMatrix& out_grad)>;

  explicit Graph(const ParameterSet* params = nullptr, GraphOptions options = {});
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(CMatrix value);
  /// Leaf that receives a gradient; used to differentiate w.r.t. inputs.
  Var input(CMatrix value);
  /// Leaf bound to parameter i of the attached ParameterSet; one node per
  /// parameter per graph.
  Var param(std::size_t i);

  /// Records a node. `inputs` decide whether the node needs a gradient;
  /// `backward` is dropped when none of them do.
  Var record(CMatrix value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(CMatrix value, const std::vector<Var>& inputs, BackwardFn backward);

  bool needs_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  void accumulate(Var v, const CMatrix& grad);

  /// Back-propagates from a 1x1 node with seed gradient 1.
  void backward(Var root);

  /// Gradient of a node after backward(); zeros if none reached it.
  CMatrix grad(Var v) const;
  /// Gradients of every parameter of the attached set (zeros if unused).
  Gradients parameter_gradients() const;

  bool training() const { return options_.training; }
  Rng& rng() { return rng_; }
  const CMatrix& value(int id) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    CMatrix own;
    const CMatrix* external = nullptr;
    CMatrix grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Node node);

  const ParameterSet* params_;
  GraphOptions options_;
  Rng rng_;
  std::vector<Node> nodes_;
  std::vector<int> param_nodes_;
};

inline const CMatrix& Var::value() const { return graph_->value(id_); }

}  // namespace tfd::nn
