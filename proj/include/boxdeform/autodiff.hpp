// Copyright 2026 The boxdeform Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "boxdeform/mesh.hpp"

namespace boxdeform::ad {

class Tape;

/// Handle to a value recorded on a Tape.
///
/// Cheap to copy. Valid only while its tape is alive; the tape owns the value
/// and, after backward(), the gradient.
class Tensor {
 public:
  Tensor() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;

  // Gradient accumulated by the last backward() on this tensor's tape.
  const Matrix& grad() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

enum class OpKind {
  kLeaf,
  kMatmul,
  kSparseMatmul,
  kAdd,
  kSub,
  kScalarMul,
  kRelu,
  kAddRowBroadcast,
  kGatherRows,
  kConcatRows,
  kConcatCols,
  kReduceSum,
  kSquare,
  kSqrt,
  kMinRows,
};

std::string_view op_name(OpKind kind);

/// Append-only record of operations for reverse-mode differentiation.
///
/// Inputs of every node precede it, so a single reverse sweep over node ids
/// visits each node once after all of its consumers. A tape is single-threaded;
/// independent tapes may be used concurrently, including over the same
/// borrowed parameter matrices.
class Tape {
 public:
  // Receives the upstream gradient of the node's output and pushes
  // contributions to its inputs via accumulate().
  using BackwardFn = std::function<void(Tape&, const Matrix& upstream)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor constant(Matrix value);
  Tensor variable(Matrix value);
  // Leaf that refers to `value` without copying; `value` must outlive the tape.
  Tensor borrow(const Matrix& value, bool requires_grad);

  // Throws DimensionError unless `loss` is 1 x 1. Clears previous gradients.
  // Afterwards every requires-grad leaf holds a gradient of its own shape.
  void backward(const Tensor& loss);

  const Matrix& value(int id) const;
  const Matrix& grad(int id) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  OpKind kind(int id) const { return nodes_[id].kind; }
  const std::vector<int>& inputs(int id) const { return nodes_[id].inputs; }
  size_t size() const { return nodes_.size(); }

  // Used by operation implementations.
  Tensor record(OpKind kind, std::vector<int> inputs, Matrix value,
                BackwardFn backward);
  void accumulate(int id, const Matrix& contribution);

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::vector<int> inputs;
    Matrix owned;
    const Matrix* borrowed = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
};

enum class Activation { kRelu, kIdentity };

Tensor matmul(const Tensor& a, const Tensor& b);
// Constant sparse matrix times tensor; the gradient flows to `x` only.
Tensor spmm(std::shared_ptr<const SparseMatrix> s, const Tensor& x);
Tensor spmm(const SparseMatrix& s, const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scalar_mul(double c, const Tensor& a);
Tensor relu(const Tensor& a);
Tensor activate(const Tensor& a, Activation f);
// a + 1 * b for a row vector b (1 x cols(a)).
Tensor add_row_broadcast(const Tensor& a, const Tensor& b);
Tensor gather_rows(const Tensor& a, std::vector<int> indices);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor reduce_sum(const Tensor& a);
Tensor square(const Tensor& a);
Tensor sqrt(const Tensor& a);

struct MinRows {
  Tensor values;             // rows x 1
  std::vector<int> argmin;   // lowest column index on ties
};
// Row-wise minimum of a nonnegative matrix. The selected indices are constants
// for the backward pass; the gradient reaches only the chosen entries.
MinRows min_index_rows(const Tensor& d);

}  // namespace boxdeform::ad
