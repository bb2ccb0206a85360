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

#include "boxdeform/autodiff.hpp"

#include <string>

#include "boxdeform/errors.hpp"

namespace boxdeform::ad {

namespace {

std::string shape(const Matrix& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

[[noreturn]] void shape_error(std::string_view op, const Matrix& a,
                              const Matrix& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape(a) +
                       " and " + shape(b));
}

void same_tape(const Tensor& a, const Tensor& b, std::string_view op) {
  if (!a.valid() || !b.valid()) {
    throw std::invalid_argument(std::string(op) + ": uninitialized tensor");
  }
  if (&a.tape() != &b.tape()) {
    throw std::invalid_argument(std::string(op) + ": operands on different tapes");
  }
}

void require_valid(const Tensor& a, std::string_view op) {
  if (!a.valid()) {
    throw std::invalid_argument(std::string(op) + ": uninitialized tensor");
  }
}

const Matrix kEmpty;

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kSparseMatmul: return "spmm";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kScalarMul: return "scalar_mul";
    case OpKind::kRelu: return "relu";
    case OpKind::kAddRowBroadcast: return "add_row_broadcast";
    case OpKind::kGatherRows: return "gather_rows";
    case OpKind::kConcatRows: return "concat_rows";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kReduceSum: return "reduce_sum";
    case OpKind::kSquare: return "square";
    case OpKind::kSqrt: return "sqrt";
    case OpKind::kMinRows: return "min_index_rows";
  }
  return "?";
}

const Matrix& Tensor::value() const { return tape_->value(id_); }
bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }
const Matrix& Tensor::grad() const { return tape_->grad(id_); }

Tensor Tape::constant(Matrix value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::variable(Matrix value) {
  Tensor t = constant(std::move(value));
  nodes_.back().requires_grad = true;
  return t;
}

Tensor Tape::borrow(const Matrix& value, bool requires_grad) {
  Node n;
  n.borrowed = &value;
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

const Matrix& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.borrowed ? *n.borrowed : n.owned;
}

const Matrix& Tape::grad(int id) const {
  if (static_cast<size_t>(id) >= grads_.size()) return kEmpty;
  return grads_[id];
}

Tensor Tape::record(OpKind kind, std::vector<int> inputs, Matrix value,
                    BackwardFn backward) {
  Node n;
  n.kind = kind;
  for (int in : inputs) n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  n.inputs = std::move(inputs);
  n.owned = std::move(value);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& contribution) {
  if (!nodes_[id].requires_grad) return;
  Matrix& g = grads_[id];
  if (g.size() == 0) {
    g = contribution;
  } else {
    g += contribution;
  }
}

void Tape::backward(const Tensor& loss) {
  if (&loss.tape() != this) {
    throw std::invalid_argument("backward: loss recorded on another tape");
  }
  const Matrix& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw DimensionError("backward: loss must be scalar (1x1), got " + shape(lv));
  }
  grads_.assign(nodes_.size(), Matrix());
  if (nodes_[loss.id()].requires_grad) grads_[loss.id()] = Matrix::Ones(1, 1);

  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward || grads_[id].size() == 0) continue;
    n.backward(*this, grads_[id]);
  }
  for (size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (n.kind == OpKind::kLeaf && n.requires_grad && grads_[id].size() == 0) {
      const Matrix& v = value(static_cast<int>(id));
      grads_[id] = Matrix::Zero(v.rows(), v.cols());
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  same_tape(a, b, "matmul");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  const int ia = a.id();
  const int ib = b.id();
  return a.tape().record(OpKind::kMatmul, {ia, ib}, av * bv,
                         [ia, ib](Tape& t, const Matrix& g) {
                           if (t.requires_grad(ia))
                             t.accumulate(ia, g * t.value(ib).transpose());
                           if (t.requires_grad(ib))
                             t.accumulate(ib, t.value(ia).transpose() * g);
                         });
}

Tensor spmm(std::shared_ptr<const SparseMatrix> s, const Tensor& x) {
  require_valid(x, "spmm");
  const Matrix& xv = x.value();
  if (s->cols() != xv.rows()) {
    throw DimensionError("spmm: incompatible shapes (" + std::to_string(s->rows()) +
                         "x" + std::to_string(s->cols()) + ") and " + shape(xv));
  }
  const int ix = x.id();
  Matrix out = (*s) * xv;
  return x.tape().record(OpKind::kSparseMatmul, {ix}, std::move(out),
                         [ix, s](Tape& t, const Matrix& g) {
                           t.accumulate(ix, s->transpose() * g);
                         });
}

Tensor spmm(const SparseMatrix& s, const Tensor& x) {
  return spmm(std::make_shared<const SparseMatrix>(s), x);
}

Tensor add(const Tensor& a, const Tensor& b) {
  same_tape(a, b, "add");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error("add", av, bv);
  const int ia = a.id();
  const int ib = b.id();
  return a.tape().record(OpKind::kAdd, {ia, ib}, av + bv,
                         [ia, ib](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g);
                           t.accumulate(ib, g);
                         });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  same_tape(a, b, "sub");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error("sub", av, bv);
  const int ia = a.id();
  const int ib = b.id();
  return a.tape().record(OpKind::kSub, {ia, ib}, av - bv,
                         [ia, ib](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g);
                           if (t.requires_grad(ib)) t.accumulate(ib, -g);
                         });
}

Tensor scalar_mul(double c, const Tensor& a) {
  require_valid(a, "scalar_mul");
  const int ia = a.id();
  return a.tape().record(OpKind::kScalarMul, {ia}, c * a.value(),
                         [ia, c](Tape& t, const Matrix& g) { t.accumulate(ia, c * g); });
}

Tensor relu(const Tensor& a) {
  require_valid(a, "relu");
  const int ia = a.id();
  Matrix out = a.value().cwiseMax(0.0);
  return a.tape().record(OpKind::kRelu, {ia}, std::move(out),
                         [ia](Tape& t, const Matrix& g) {
                           const Matrix& x = t.value(ia);
                           t.accumulate(ia, (x.array() > 0.0).select(g, 0.0));
                         });
}

Tensor activate(const Tensor& a, Activation f) {
  return f == Activation::kRelu ? relu(a) : a;
}

Tensor add_row_broadcast(const Tensor& a, const Tensor& b) {
  same_tape(a, b, "add_row_broadcast");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    shape_error("add_row_broadcast", av, bv);
  }
  const int ia = a.id();
  const int ib = b.id();
  Matrix out = av.rowwise() + bv.row(0);
  return a.tape().record(OpKind::kAddRowBroadcast, {ia, ib}, std::move(out),
                         [ia, ib](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g);
                           if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
                         });
}

Tensor gather_rows(const Tensor& a, std::vector<int> indices) {
  require_valid(a, "gather_rows");
  const Matrix& av = a.value();
  Matrix out(static_cast<Eigen::Index>(indices.size()), av.cols());
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= av.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(indices[i]) +
                           " out of range for " + shape(av));
    }
    out.row(static_cast<Eigen::Index>(i)) = av.row(indices[i]);
  }
  const int ia = a.id();
  return a.tape().record(
      OpKind::kGatherRows, {ia}, std::move(out),
      [ia, idx = std::move(indices)](Tape& t, const Matrix& g) {
        const Matrix& x = t.value(ia);
        Matrix d = Matrix::Zero(x.rows(), x.cols());
        for (size_t i = 0; i < idx.size(); ++i) {
          d.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
        }
        t.accumulate(ia, d);
      });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  for (const Tensor& p : parts) {
    same_tape(parts.front(), p, "concat_rows");
    if (p.cols() != cols) shape_error("concat_rows", parts.front().value(), p.value());
    ids.push_back(p.id());
    offsets.push_back(rows);
    rows += p.rows();
  }
  Matrix out(rows, cols);
  for (size_t i = 0; i < parts.size(); ++i) {
    out.middleRows(offsets[i], parts[i].rows()) = parts[i].value();
  }
  return parts.front().tape().record(
      OpKind::kConcatRows, ids, std::move(out),
      [ids, offsets](Tape& t, const Matrix& g) {
        for (size_t i = 0; i < ids.size(); ++i) {
          if (!t.requires_grad(ids[i])) continue;
          t.accumulate(ids[i], g.middleRows(offsets[i], t.value(ids[i]).rows()));
        }
      });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts.front().rows();
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  for (const Tensor& p : parts) {
    same_tape(parts.front(), p, "concat_cols");
    if (p.rows() != rows) shape_error("concat_cols", parts.front().value(), p.value());
    ids.push_back(p.id());
    offsets.push_back(cols);
    cols += p.cols();
  }
  Matrix out(rows, cols);
  for (size_t i = 0; i < parts.size(); ++i) {
    out.middleCols(offsets[i], parts[i].cols()) = parts[i].value();
  }
  return parts.front().tape().record(
      OpKind::kConcatCols, ids, std::move(out),
      [ids, offsets](Tape& t, const Matrix& g) {
        for (size_t i = 0; i < ids.size(); ++i) {
          if (!t.requires_grad(ids[i])) continue;
          t.accumulate(ids[i], g.middleCols(offsets[i], t.value(ids[i]).cols()));
        }
      });
}

Tensor reduce_sum(const Tensor& a) {
  require_valid(a, "reduce_sum");
  const int ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape().record(OpKind::kReduceSum, {ia}, std::move(out),
                         [ia](Tape& t, const Matrix& g) {
                           const Matrix& x = t.value(ia);
                           t.accumulate(ia, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
                         });
}

Tensor square(const Tensor& a) {
  require_valid(a, "square");
  const int ia = a.id();
  Matrix out = a.value().array().square().matrix();
  return a.tape().record(OpKind::kSquare, {ia}, std::move(out),
                         [ia](Tape& t, const Matrix& g) {
                           t.accumulate(ia, (2.0 * t.value(ia).array() * g.array()).matrix());
                         });
}

Tensor sqrt(const Tensor& a) {
  require_valid(a, "sqrt");
  const int ia = a.id();
  Matrix out = a.value().array().sqrt().matrix();
  return a.tape().record(OpKind::kSqrt, {ia}, std::move(out),
                         [ia](Tape& t, const Matrix& g) {
                           const auto root = t.value(ia).array().sqrt();
                           t.accumulate(ia, (0.5 * g.array() / root).matrix());
                         });
}

MinRows min_index_rows(const Tensor& d) {
  require_valid(d, "min_index_rows");
  const Matrix& dv = d.value();
  if (dv.cols() == 0) throw EmptyInputError("min_index_rows: matrix has no columns");
  MinRows result;
  result.argmin.resize(static_cast<size_t>(dv.rows()));
  Matrix values(dv.rows(), 1);
  for (Eigen::Index i = 0; i < dv.rows(); ++i) {
    Eigen::Index best = 0;
    double best_v = dv(i, 0);
    for (Eigen::Index j = 1; j < dv.cols(); ++j) {
      if (dv(i, j) < best_v) {
        best_v = dv(i, j);
        best = j;
      }
    }
    values(i, 0) = best_v;
    result.argmin[static_cast<size_t>(i)] = static_cast<int>(best);
  }
  const int id = d.id();
  result.values = d.tape().record(
      OpKind::kMinRows, {id}, std::move(values),
      [id, idx = result.argmin](Tape& t, const Matrix& g) {
        const Matrix& x = t.value(id);
        Matrix dd = Matrix::Zero(x.rows(), x.cols());
        for (size_t i = 0; i < idx.size(); ++i) {
          dd(static_cast<Eigen::Index>(i), idx[i]) += g(static_cast<Eigen::Index>(i), 0);
        }
        t.accumulate(id, dd);
      });
  return result;
}

}  // namespace boxdeform::ad
