#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace biotac {

/// Dense row-major matrix of doubles. 64-bit floats throughout so
/// finite-difference gradient checks hold at 1e-4 relative error.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return a[static_cast<std::size_t>(r) * cols + c];
  }
  std::size_t size() const { return a.size(); }
};

enum class Act { kSigmoid, kRelu, kHardtanh, kTanh, kLeakyRelu, kElu, kIdentity };

Act act_from_name(const std::string& name);
std::string act_name(Act a);

/// Reverse-mode autodiff tape over Mat values. Nodes are appended during
/// the forward pass; backward() walks them in reverse. Reduction order is
/// fixed, so seeded runs are bit-reproducible.
class Tape {
 public:
  int leaf(Mat v) {
    nodes_.push_back({std::move(v), {}, nullptr});
    Node& n = nodes_.back();
    n.grad = Mat(n.val.rows, n.val.cols);
    return static_cast<int>(nodes_.size()) - 1;
  }

  const Mat& val(int i) const { return nodes_[static_cast<std::size_t>(i)].val; }
  Mat& grad(int i) { return nodes_[static_cast<std::size_t>(i)].grad; }

  int matmul(int x, int y);
  int add(int x, int y);          // same shape
  int add_rowvec(int x, int b);   // b: 1 x C, broadcast over rows
  int mul_rowvec(int x, int g);
  int scale(int x, double s);
  int mul_elem(int x, const Mat& m);  // constant elementwise factor
  int activation(int x, Act kind, double leaky_slope = 0.01);
  int softmax_rows(int x);
  int layernorm_rows(int x, double eps = 1e-5);
  int concat_cols(const std::vector<int>& xs);
  int concat_rows(const std::vector<int>& xs);
  int slice_cols(int x, int c0, int c1);
  int slice_rows(int x, int r0, int r1);
  int transpose(int x);

  /// Mean over all elements of |d| + d^2 with d = pred - target (1x1 node).
  int loss_eq1(int pred, const Mat& target);

  void backward(int root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat val;
    Mat grad;
    std::function<void(Tape&)> back;
  };
  std::vector<Node> nodes_;

  int push(Mat v, std::function<void(Tape&)> back) {
    nodes_.push_back({std::move(v), {}, std::move(back)});
    Node& n = nodes_.back();
    n.grad = Mat(n.val.rows, n.val.cols);
    return static_cast<int>(nodes_.size()) - 1;
  }
};

/// Standalone Eq.-style loss for evaluation paths without a tape.
double loss_eq1_value(const Mat& y, const Mat& yhat);

}  // namespace biotac
