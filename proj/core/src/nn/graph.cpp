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

#include "tfdiff/nn/graph.hpp"

#include "tfdiff/error.hpp"

namespace tfd::nn {

std::size_t ParameterSet::add(std::string name, CMatrix init, bool real_only) {
  if (by_name_.contains(name)) throw InvalidArgument("duplicate parameter name " + name);
  if (real_only) init = init.real().cast<cplx>();
  const std::size_t index = params_.size();
  by_name_.emplace(name, index);
  params_.push_back(Parameter{std::move(name), std::move(init), real_only});
  return index;
}

std::optional<std::size_t> ParameterSet::find(std::string_view name) const {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  return std::nullopt;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size()) * (p.real_only ? 1 : 2);
  return n;
}

Graph::Graph(const ParameterSet* params, GraphOptions options)
    : params_(params), options_(options), rng_(options.dropout_seed) {
  if (params_) param_nodes_.assign(params_->size(), -1);
  nodes_.reserve(256);
}

const CMatrix& Graph::value(int id) const {
  const auto& n = nodes_[static_cast<std::size_t>(id)];
  return n.external ? *n.external : n.own;
}

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::constant(CMatrix value) {
  Node n;
  n.own = std::move(value);
  return push(std::move(n));
}

Var Graph::input(CMatrix value) {
  Node n;
  n.own = std::move(value);
  n.requires_grad = options_.record_gradients;
  return push(std::move(n));
}

Var Graph::param(std::size_t i) {
  if (!params_ || i >= params_->size()) throw InvalidArgument("graph: parameter index out of range");
  if (param_nodes_[i] >= 0) return Var(this, param_nodes_[i]);
  Node n;
  n.external = &(*params_)[i].value;
  n.requires_grad = options_.record_gradients;
  auto v = push(std::move(n));
  param_nodes_[i] = v.id();
  return v;
}

Var Graph::record(CMatrix value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node n;
  n.own = std::move(value);
  for (const auto& in : inputs) {
    if (in.graph() != this) throw InvalidArgument("graph: mixing nodes from different graphs");
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

Var Graph::record(CMatrix value, const std::vector<Var>& inputs, BackwardFn backward) {
  Node n;
  n.own = std::move(value);
  for (const auto& in : inputs) {
    if (in.graph() != this) throw InvalidArgument("graph: mixing nodes from different graphs");
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

void Graph::accumulate(Var v, const CMatrix& grad) {
  auto& n = nodes_[v.id()];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = grad;
    n.has_grad = true;
  } else {
    n.grad += grad;
  }
}

void Graph::backward(Var root) {
  if (root.graph() != this) throw InvalidArgument("graph: backward root from another graph");
  if (root.rows() != 1 || root.cols() != 1) throw InvalidArgument("graph: backward root must be 1x1");
  if (!nodes_[root.id()].requires_grad) return;
  accumulate(root, CMatrix::Constant(1, 1, cplx(1.0, 0.0)));
  for (int id = root.id(); id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, n.grad);
    // Free intermediates that are no longer needed.
    n.backward = nullptr;
  }
}

CMatrix Graph::grad(Var v) const {
  const auto& n = nodes_[v.id()];
  if (n.has_grad) return n.grad;
  const auto& val = value(v.id());
  return CMatrix::Zero(val.rows(), val.cols());
}

Gradients Graph::parameter_gradients() const {
  Gradients out;
  if (!params_) return out;
  out.reserve(params_->size());
  for (std::size_t i = 0; i < params_->size(); ++i) {
    const auto& p = (*params_)[i];
    if (param_nodes_[i] >= 0 && nodes_[param_nodes_[i]].has_grad) {
      CMatrix g = nodes_[param_nodes_[i]].grad;
      if (p.real_only) g = g.real().cast<cplx>();
      out.push_back(std::move(g));
    } else {
      out.push_back(CMatrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  return out;
}

}  // namespace tfd::nn
