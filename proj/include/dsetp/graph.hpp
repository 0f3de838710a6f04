#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dsetp::nn {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using ParamId = std::size_t;

// Named dense parameter matrices. Embedding tables store one entry per column.
template <class T>
class ParamSet {
 public:
  ParamId add(std::string name, Eigen::Index rows, Eigen::Index cols);

  std::size_t size() const noexcept { return values_.size(); }
  Matrix<T>& value(ParamId id) { return values_.at(id); }
  const Matrix<T>& value(ParamId id) const { return values_.at(id); }
  const std::string& name(ParamId id) const { return names_.at(id); }
  // Total number of scalars.
  std::size_t scalar_count() const;

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    return a.names_ == b.names_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix<T>> values_;
};

struct Expr {
  std::uint32_t id = 0;
};

// Tape for reverse-mode differentiation over matrix values. One graph per
// forward pass; the parameter set is only read, gradients stay in the graph,
// so several graphs may share one ParamSet across threads.
template <class T>
class Graph {
 public:
  using Mat = Matrix<T>;

  explicit Graph(const ParamSet<T>& params);

  Expr param(ParamId id);
  // Column `column` of the parameter, as a column vector.
  Expr lookup(ParamId id, Eigen::Index column);
  Expr constant(Mat value);

  Expr matmul(Expr a, Expr b);
  Expr add(Expr a, Expr b);
  Expr cmul(Expr a, Expr b);
  // Elementwise product with a constant.
  Expr scale(Expr a, Mat factors);
  Expr tanh(Expr a);
  Expr sigmoid(Expr a);
  // Rows [start, start + count).
  Expr rows(Expr a, Eigen::Index start, Eigen::Index count);
  // Vertical concatenation of column vectors (or same-width matrices).
  Expr concat(std::span<const Expr> parts);
  // Sum of same-shape values.
  Expr sum(std::span<const Expr> parts);
  // -log softmax(logits)[target] over the entries with allowed[k] set.
  // An empty mask allows every entry.
  Expr nll(Expr logits, Eigen::Index target, std::vector<bool> allowed = {});

  const Mat& value(Expr e) const;
  const ParamSet<T>& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Accumulates d(loss)/d(param) for every parameter reached from `loss`,
  // which must be 1x1. May be called once per graph.
  void backward(Expr loss);
  // Per parameter; an empty matrix when the parameter was not reached.
  const std::vector<Mat>& param_gradients() const noexcept { return param_grads_; }

 private:
  enum class Op : std::uint8_t {
    kParam, kLookup, kConstant, kMatmul, kAdd, kCmul, kScale, kTanh, kSigmoid,
    kRows, kConcat, kSum, kNll
  };
  struct Node {
    Node(Op o, std::uint32_t x = 0, std::uint32_t y = 0) : op(o), a(x), b(y) {}
    Op op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    Eigen::Index i0 = 0;
    Eigen::Index i1 = 0;
    std::vector<std::uint32_t> parts;
  };

  Expr push(Node node, Mat value);
  Mat& grad_of(std::uint32_t id, const Mat& like);

  const ParamSet<T>& params_;
  std::vector<Node> nodes_;
  std::vector<Mat> values_;
  // kScale factors and kNll probabilities.
  std::vector<Mat> extra_;
  std::vector<Mat> grads_;
  std::vector<Mat> param_grads_;
  bool done_ = false;
};

// Numerically stable softmax over the allowed entries; others get 0.
template <class T>
std::vector<double> softmax(const Vector<T>& logits, const std::vector<bool>& allowed = {});

extern template class ParamSet<float>;
extern template class ParamSet<double>;
extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace dsetp::nn
