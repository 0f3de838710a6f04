#include "dsetp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dsetp::nn {

template <class T>
ParamId ParamSet<T>::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("parameter " + name + " has an empty shape");
  names_.push_back(std::move(name));
  values_.push_back(Matrix<T>::Zero(rows, cols));
  return values_.size() - 1;
}

template <class T>
std::size_t ParamSet<T>::scalar_count() const {
  std::size_t total = 0;
  for (const auto& v : values_) total += static_cast<std::size_t>(v.size());
  return total;
}

template <class T>
Graph<T>::Graph(const ParamSet<T>& params) : params_(params), param_grads_(params.size()) {}

template <class T>
Expr Graph<T>::push(Node node, Mat value) {
  if (nodes_.size() >= std::numeric_limits<std::uint32_t>::max()) throw std::length_error("graph too large");
  nodes_.push_back(std::move(node));
  values_.push_back(std::move(value));
  extra_.emplace_back();
  return {static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <class T>
const typename Graph<T>::Mat& Graph<T>::value(Expr e) const {
  const auto& n = nodes_.at(e.id);
  if (n.op == Op::kParam) return params_.value(n.a);
  return values_[e.id];
}

template <class T>
Expr Graph<T>::param(ParamId id) {
  if (id >= params_.size()) throw std::out_of_range("unknown parameter id");
  return push({Op::kParam, static_cast<std::uint32_t>(id)}, Mat());
}

template <class T>
Expr Graph<T>::lookup(ParamId id, Eigen::Index column) {
  const auto& table = params_.value(id);
  if (column < 0 || column >= table.cols()) throw std::out_of_range("lookup column out of range");
  Node n{Op::kLookup, static_cast<std::uint32_t>(id)};
  n.i0 = column;
  return push(std::move(n), table.col(column));
}

template <class T>
Expr Graph<T>::constant(Mat v) {
  return push({Op::kConstant}, std::move(v));
}

template <class T>
Expr Graph<T>::matmul(Expr a, Expr b) {
  const auto& x = value(a);
  const auto& y = value(b);
  if (x.cols() != y.rows()) throw std::invalid_argument("matmul shape mismatch");
  Mat out(x.rows(), y.cols());
  out.noalias() = x * y;
  return push({Op::kMatmul, a.id, b.id}, std::move(out));
}

template <class T>
Expr Graph<T>::add(Expr a, Expr b) {
  const auto& x = value(a);
  const auto& y = value(b);
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw std::invalid_argument("add shape mismatch");
  return push({Op::kAdd, a.id, b.id}, x + y);
}

template <class T>
Expr Graph<T>::cmul(Expr a, Expr b) {
  const auto& x = value(a);
  const auto& y = value(b);
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw std::invalid_argument("cmul shape mismatch");
  return push({Op::kCmul, a.id, b.id}, x.cwiseProduct(y));
}

template <class T>
Expr Graph<T>::scale(Expr a, Mat factors) {
  const auto& x = value(a);
  if (x.rows() != factors.rows() || x.cols() != factors.cols())
    throw std::invalid_argument("scale shape mismatch");
  auto e = push({Op::kScale, a.id}, x.cwiseProduct(factors));
  extra_[e.id] = std::move(factors);
  return e;
}

template <class T>
Expr Graph<T>::tanh(Expr a) {
  return push({Op::kTanh, a.id}, value(a).array().tanh().matrix());
}

template <class T>
Expr Graph<T>::sigmoid(Expr a) {
  Mat out = (T(1) / (T(1) + (-value(a).array()).exp())).matrix();
  return push({Op::kSigmoid, a.id}, std::move(out));
}

template <class T>
Expr Graph<T>::rows(Expr a, Eigen::Index start, Eigen::Index count) {
  const auto& x = value(a);
  if (start < 0 || count <= 0 || start + count > x.rows()) throw std::out_of_range("row slice out of range");
  Node n{Op::kRows, a.id};
  n.i0 = start;
  n.i1 = count;
  return push(std::move(n), x.middleRows(start, count));
}

template <class T>
Expr Graph<T>::concat(std::span<const Expr> parts) {
  if (parts.empty()) throw std::invalid_argument("concat of nothing");
  Eigen::Index rows = 0;
  const Eigen::Index cols = value(parts.front()).cols();
  Node n{Op::kConcat};
  for (auto p : parts) {
    if (value(p).cols() != cols) throw std::invalid_argument("concat width mismatch");
    rows += value(p).rows();
    n.parts.push_back(p.id);
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (auto p : parts) {
    const auto& v = value(p);
    out.middleRows(at, v.rows()) = v;
    at += v.rows();
  }
  return push(std::move(n), std::move(out));
}

template <class T>
Expr Graph<T>::sum(std::span<const Expr> parts) {
  if (parts.empty()) throw std::invalid_argument("sum of nothing");
  Mat out = value(parts.front());
  Node n{Op::kSum};
  n.parts.push_back(parts.front().id);
  for (auto p : parts.subspan(1)) {
    const auto& v = value(p);
    if (v.rows() != out.rows() || v.cols() != out.cols()) throw std::invalid_argument("sum shape mismatch");
    out += v;
    n.parts.push_back(p.id);
  }
  return push(std::move(n), std::move(out));
}

template <class T>
std::vector<double> softmax(const Vector<T>& logits, const std::vector<bool>& allowed) {
  const auto k = logits.size();
  if (!allowed.empty() && static_cast<Eigen::Index>(allowed.size()) != k)
    throw std::invalid_argument("softmax mask size mismatch");
  auto ok = [&](Eigen::Index j) { return allowed.empty() || allowed[j]; };
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < k; ++j)
    if (ok(j)) top = std::max(top, static_cast<double>(logits[j]));
  if (!std::isfinite(top)) throw std::invalid_argument("softmax over no entries");
  std::vector<double> p(k, 0.0);
  double z = 0.0;
  for (Eigen::Index j = 0; j < k; ++j)
    if (ok(j)) z += p[j] = std::exp(static_cast<double>(logits[j]) - top);
  for (auto& v : p) v /= z;
  return p;
}

template <class T>
Expr Graph<T>::nll(Expr logits, Eigen::Index target, std::vector<bool> allowed) {
  const auto& x = value(logits);
  if (x.cols() != 1) throw std::invalid_argument("nll expects a column vector");
  if (target < 0 || target >= x.rows()) throw std::out_of_range("nll target out of range");
  if (!allowed.empty() && !allowed[target]) throw std::invalid_argument("nll target is masked");
  // log-sum-exp in the graph's scalar type
  auto ok = [&](Eigen::Index j) { return allowed.empty() || allowed[j]; };
  T top = -std::numeric_limits<T>::infinity();
  for (Eigen::Index j = 0; j < x.rows(); ++j)
    if (ok(j)) top = std::max(top, x(j, 0));
  Mat probs = Mat::Zero(x.rows(), 1);
  T z = 0;
  for (Eigen::Index j = 0; j < x.rows(); ++j)
    if (ok(j)) z += probs(j, 0) = std::exp(x(j, 0) - top);
  probs /= z;
  Mat out(1, 1);
  out(0, 0) = -(x(target, 0) - top - std::log(z));
  Node n{Op::kNll, logits.id};
  n.i0 = target;
  auto e = push(std::move(n), std::move(out));
  extra_[e.id] = std::move(probs);
  return e;
}

template <class T>
typename Graph<T>::Mat& Graph<T>::grad_of(std::uint32_t id, const Mat& like) {
  auto& g = grads_[id];
  if (g.size() == 0) g = Mat::Zero(like.rows(), like.cols());
  return g;
}

template <class T>
void Graph<T>::backward(Expr loss) {
  if (done_) throw std::logic_error("backward called twice on one graph");
  const auto& l = value(loss);
  if (l.rows() != 1 || l.cols() != 1) throw std::invalid_argument("loss must be a scalar");
  done_ = true;
  grads_.assign(nodes_.size(), Mat());
  grads_[loss.id] = Mat::Ones(1, 1);
  for (std::int64_t id = loss.id; id >= 0; --id) {
    const auto& g = grads_[id];
    if (g.size() == 0) continue;
    const auto& n = nodes_[id];
    switch (n.op) {
      case Op::kParam: {
        auto& pg = param_grads_[n.a];
        if (pg.size() == 0)
          pg = g;
        else
          pg += g;
        break;
      }
      case Op::kLookup: {
        auto& pg = param_grads_[n.a];
        const auto& table = params_.value(n.a);
        if (pg.size() == 0) pg = Mat::Zero(table.rows(), table.cols());
        pg.col(n.i0) += g;
        break;
      }
      case Op::kConstant:
        break;
      case Op::kMatmul: {
        const auto& x = value({n.a});
        const auto& y = value({n.b});
        grad_of(n.a, x).noalias() += g * y.transpose();
        grad_of(n.b, y).noalias() += x.transpose() * g;
        break;
      }
      case Op::kAdd:
        grad_of(n.a, g) += g;
        grad_of(n.b, g) += g;
        break;
      case Op::kCmul:
        grad_of(n.a, g) += g.cwiseProduct(value({n.b}));
        grad_of(n.b, g) += g.cwiseProduct(value({n.a}));
        break;
      case Op::kScale:
        grad_of(n.a, g) += g.cwiseProduct(extra_[id]);
        break;
      case Op::kTanh: {
        const auto& y = values_[id];
        grad_of(n.a, g).array() += g.array() * (T(1) - y.array().square());
        break;
      }
      case Op::kSigmoid: {
        const auto& y = values_[id];
        grad_of(n.a, g).array() += g.array() * y.array() * (T(1) - y.array());
        break;
      }
      case Op::kRows:
        grad_of(n.a, value({n.a})).middleRows(n.i0, n.i1) += g;
        break;
      case Op::kConcat: {
        Eigen::Index at = 0;
        for (auto p : n.parts) {
          const auto& v = value({p});
          grad_of(p, v) += g.middleRows(at, v.rows());
          at += v.rows();
        }
        break;
      }
      case Op::kSum:
        for (auto p : n.parts) grad_of(p, g) += g;
        break;
      case Op::kNll: {
        Mat d = extra_[id];
        d(n.i0, 0) -= T(1);
        grad_of(n.a, d) += g(0, 0) * d;
        break;
      }
    }
  }
}

template class ParamSet<float>;
template class ParamSet<double>;
template class Graph<float>;
template class Graph<double>;
template std::vector<double> softmax<float>(const Vector<float>&, const std::vector<bool>&);
template std::vector<double> softmax<double>(const Vector<double>&, const std::vector<bool>&);

}  // namespace dsetp::nn
