#include "biotac/tensor.hpp"

#include <algorithm>

namespace biotac {

Act act_from_name(const std::string& name) {
  if (name == "sigmoid") return Act::kSigmoid;
  if (name == "relu") return Act::kRelu;
  if (name == "hardtanh") return Act::kHardtanh;
  if (name == "tanh") return Act::kTanh;
  if (name == "leakyrelu") return Act::kLeakyRelu;
  if (name == "elu") return Act::kElu;
  if (name == "identity") return Act::kIdentity;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string act_name(Act a) {
  switch (a) {
    case Act::kSigmoid: return "sigmoid";
    case Act::kRelu: return "relu";
    case Act::kHardtanh: return "hardtanh";
    case Act::kTanh: return "tanh";
    case Act::kLeakyRelu: return "leakyrelu";
    case Act::kElu: return "elu";
    case Act::kIdentity: return "identity";
  }
  return "identity";
}

int Tape::matmul(int x, int y) {
  const Mat& a = val(x);
  const Mat& b = val(y);
  if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
  Mat out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      double av = a.at(i, k);
      for (int j = 0; j < b.cols; ++j) out.at(i, j) += av * b.at(k, j);
    }
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back = [self, x, y](Tape& t) {
    const Mat& g = t.grad(self);
    const Mat& a_ = t.val(x);
    const Mat& b_ = t.val(y);
    Mat& ga = t.grad(x);
    Mat& gb = t.grad(y);
    // dA = G * B^T
    for (int i = 0; i < a_.rows; ++i)
      for (int k = 0; k < a_.cols; ++k) {
        double s = 0.0;
        for (int j = 0; j < b_.cols; ++j) s += g.at(i, j) * b_.at(k, j);
        ga.at(i, k) += s;
      }
    // dB = A^T * G
    for (int k = 0; k < b_.rows; ++k)
      for (int j = 0; j < b_.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < a_.rows; ++i) s += a_.at(i, k) * g.at(i, j);
        gb.at(k, j) += s;
      }
  };
  return self;
}

int Tape::add(int x, int y) {
  const Mat& a = val(x);
  const Mat& b = val(y);
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("add: shape mismatch");
  Mat out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.a[i] += b.a[i];
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back = [self, x, y](Tape& t) {
    const Mat& g = t.grad(self);
    Mat& ga = t.grad(x);
    Mat& gb = t.grad(y);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.a[i] += g.a[i];
      gb.a[i] += g.a[i];
    }
  };
  return self;
}

int Tape::add_rowvec(int x, int b) {
  const Mat& a = val(x);
  const Mat& v = val(b);
  if (v.rows != 1 || v.cols != a.cols)
    throw std::invalid_argument("add_rowvec: shape mismatch");
  Mat out = a;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(i, j) += v.at(0, j);
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back = [self, x, b](Tape& t) {
    const Mat& g = t.grad(self);
    Mat& ga = t.grad(x);
    Mat& gv = t.grad(b);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) {
        ga.at(i, j) += g.at(i, j);
        gv.at(0, j) += g.at(i, j);
      }
  };
  return self;
}

int Tape::mul_rowvec(int x, int gvec) {
  const Mat& a = val(x);
  const Mat& v = val(gvec);
  if (v.rows != 1 || v.cols != a.cols)
    throw std::invalid_argument("mul_rowvec: shape mismatch");
  Mat out = a;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(i, j) *= v.at(0, j);
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back = [self, x, gvec](Tape& t) {
    const Mat& g = t.grad(self);
    const Mat& a_ = t.val(x);
    const Mat& v_ = t.val(gvec);
    Mat& ga = t.grad(x);
    Mat& gv = t.grad(gvec);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) {
        ga.at(i, j) += g.at(i, j) * v_.at(0, j);
        gv.at(0, j) += g.at(i, j) * a_.at(i, j);
      }
  };
  return self;
}

int Tape::scale(int x, double s) {
  Mat out = val(x);
  for (double& v : out.a) v *= s;
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back = [self, x, s](Tape& t) {
    const Mat& g = t.grad(self);
    Mat& ga = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i] * s;
  };
  return self;
}

int Tape::mul_elem(int x, const Mat& m) {
  const Mat& a = val(x);
  if (a.rows != m.rows || a.cols != m.cols)
    throw std::invalid_argument("mul_elem: shape mismatch");
  Mat out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.a[i] *= m.a[i];
  int self = push(std::move(out), nullptr);
  Mat factor = m;
  nodes_[static_cast<std::size_t>(self)].back =
      [self, x, factor = std::move(factor)](Tape& t) {
        const Mat& g = t.grad(self);
        Mat& ga = t.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i] * factor.a[i];
      };
  return self;
}

int Tape::activation(int x, Act kind, double leaky_slope) {
  const Mat& a = val(x);
  Mat out = a;
  for (double& v : out.a) {
    switch (kind) {
      case Act::kSigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
      case Act::kRelu: v = v > 0.0 ? v : 0.0; break;
      case Act::kHardtanh: v = std::clamp(v, -1.0, 1.0); break;
      case Act::kTanh: v = std::tanh(v); break;
      case Act::kLeakyRelu: v = v > 0.0 ? v : leaky_slope * v; break;
      case Act::kElu: v = v > 0.0 ? v : std::expm1(v); break;
      case Act::kIdentity: break;
    }
  }
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back = [self, x, kind,
                                                 leaky_slope](Tape& t) {
    const Mat& g = t.grad(self);
    const Mat& in = t.val(x);
    const Mat& y = t.val(self);
    Mat& ga = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double d;
      switch (kind) {
        case Act::kSigmoid: d = y.a[i] * (1.0 - y.a[i]); break;
        case Act::kRelu: d = in.a[i] > 0.0 ? 1.0 : 0.0; break;
        case Act::kHardtanh:
          d = (in.a[i] > -1.0 && in.a[i] < 1.0) ? 1.0 : 0.0;
          break;
        case Act::kTanh: d = 1.0 - y.a[i] * y.a[i]; break;
        case Act::kLeakyRelu: d = in.a[i] > 0.0 ? 1.0 : leaky_slope; break;
        case Act::kElu: d = in.a[i] > 0.0 ? 1.0 : y.a[i] + 1.0; break;
        case Act::kIdentity: d = 1.0; break;
        default: d = 1.0; break;
      }
      ga.a[i] += g.a[i] * d;
    }
  };
  return self;
}

int Tape::softmax_rows(int x) {
  const Mat& a = val(x);
  Mat out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    double mx = a.at(i, 0);
    for (int j = 1; j < a.cols; ++j) mx = std::max(mx, a.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      out.at(i, j) = std::exp(a.at(i, j) - mx);
      sum += out.at(i, j);
    }
    for (int j = 0; j < a.cols; ++j) out.at(i, j) /= sum;
  }
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back = [self, x](Tape& t) {
    const Mat& g = t.grad(self);
    const Mat& y = t.val(self);
    Mat& ga = t.grad(x);
    for (int i = 0; i < g.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < g.cols; ++j) dot += g.at(i, j) * y.at(i, j);
      for (int j = 0; j < g.cols; ++j)
        ga.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
    }
  };
  return self;
}

int Tape::layernorm_rows(int x, double eps) {
  const Mat& a = val(x);
  Mat out(a.rows, a.cols);
  std::vector<double> inv_sigma(static_cast<std::size_t>(a.rows));
  for (int i = 0; i < a.rows; ++i) {
    double mu = 0.0;
    for (int j = 0; j < a.cols; ++j) mu += a.at(i, j);
    mu /= a.cols;
    double var = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      double c = a.at(i, j) - mu;
      var += c * c;
    }
    var /= a.cols;
    double is = 1.0 / std::sqrt(var + eps);
    inv_sigma[static_cast<std::size_t>(i)] = is;
    for (int j = 0; j < a.cols; ++j) out.at(i, j) = (a.at(i, j) - mu) * is;
  }
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back =
      [self, x, inv_sigma = std::move(inv_sigma)](Tape& t) {
        const Mat& g = t.grad(self);
        const Mat& y = t.val(self);
        Mat& ga = t.grad(x);
        for (int i = 0; i < g.rows; ++i) {
          double mean_g = 0.0, mean_gy = 0.0;
          for (int j = 0; j < g.cols; ++j) {
            mean_g += g.at(i, j);
            mean_gy += g.at(i, j) * y.at(i, j);
          }
          mean_g /= g.cols;
          mean_gy /= g.cols;
          double is = inv_sigma[static_cast<std::size_t>(i)];
          for (int j = 0; j < g.cols; ++j)
            ga.at(i, j) +=
                is * (g.at(i, j) - mean_g - y.at(i, j) * mean_gy);
        }
      };
  return self;
}

int Tape::concat_cols(const std::vector<int>& xs) {
  int rows = val(xs[0]).rows;
  int cols = 0;
  for (int x : xs) {
    if (val(x).rows != rows)
      throw std::invalid_argument("concat_cols: row mismatch");
    cols += val(x).cols;
  }
  Mat out(rows, cols);
  int off = 0;
  for (int x : xs) {
    const Mat& a = val(x);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < a.cols; ++j) out.at(i, off + j) = a.at(i, j);
    off += a.cols;
  }
  int self = push(std::move(out), nullptr);
  std::vector<int> parts = xs;
  nodes_[static_cast<std::size_t>(self)].back =
      [self, parts = std::move(parts)](Tape& t) {
        const Mat& g = t.grad(self);
        int off_ = 0;
        for (int x : parts) {
          Mat& ga = t.grad(x);
          for (int i = 0; i < ga.rows; ++i)
            for (int j = 0; j < ga.cols; ++j) ga.at(i, j) += g.at(i, off_ + j);
          off_ += ga.cols;
        }
      };
  return self;
}

int Tape::concat_rows(const std::vector<int>& xs) {
  int cols = val(xs[0]).cols;
  int rows = 0;
  for (int x : xs) {
    if (val(x).cols != cols)
      throw std::invalid_argument("concat_rows: column mismatch");
    rows += val(x).rows;
  }
  Mat out(rows, cols);
  int off = 0;
  for (int x : xs) {
    const Mat& a = val(x);
    for (int i = 0; i < a.rows; ++i)
      for (int j = 0; j < cols; ++j) out.at(off + i, j) = a.at(i, j);
    off += a.rows;
  }
  int self = push(std::move(out), nullptr);
  std::vector<int> parts = xs;
  nodes_[static_cast<std::size_t>(self)].back =
      [self, parts = std::move(parts)](Tape& t) {
        const Mat& g = t.grad(self);
        int off_ = 0;
        for (int x : parts) {
          Mat& ga = t.grad(x);
          for (int i = 0; i < ga.rows; ++i)
            for (int j = 0; j < ga.cols; ++j) ga.at(i, j) += g.at(off_ + i, j);
          off_ += ga.rows;
        }
      };
  return self;
}

int Tape::slice_cols(int x, int c0, int c1) {
  const Mat& a = val(x);
  if (c0 < 0 || c1 > a.cols || c0 >= c1)
    throw std::invalid_argument("slice_cols: bad range");
  Mat out(a.rows, c1 - c0);
  for (int i = 0; i < a.rows; ++i)
    for (int j = c0; j < c1; ++j) out.at(i, j - c0) = a.at(i, j);
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back = [self, x, c0](Tape& t) {
    const Mat& g = t.grad(self);
    Mat& ga = t.grad(x);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) ga.at(i, c0 + j) += g.at(i, j);
  };
  return self;
}

int Tape::slice_rows(int x, int r0, int r1) {
  const Mat& a = val(x);
  if (r0 < 0 || r1 > a.rows || r0 >= r1)
    throw std::invalid_argument("slice_rows: bad range");
  Mat out(r1 - r0, a.cols);
  for (int i = r0; i < r1; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(i - r0, j) = a.at(i, j);
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back = [self, x, r0](Tape& t) {
    const Mat& g = t.grad(self);
    Mat& ga = t.grad(x);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) ga.at(r0 + i, j) += g.at(i, j);
  };
  return self;
}

int Tape::transpose(int x) {
  const Mat& a = val(x);
  Mat out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
  int self = push(std::move(out), nullptr);
  nodes_[static_cast<std::size_t>(self)].back = [self, x](Tape& t) {
    const Mat& g = t.grad(self);
    Mat& ga = t.grad(x);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) ga.at(j, i) += g.at(i, j);
  };
  return self;
}

int Tape::loss_eq1(int pred, const Mat& target) {
  const Mat& p = val(pred);
  if (p.rows != target.rows || p.cols != target.cols)
    throw std::invalid_argument("loss_eq1: shape mismatch");
  Mat out(1, 1);
  double n = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    double d = p.a[i] - target.a[i];
    out.a[0] += std::fabs(d) + d * d;
  }
  out.a[0] /= n;
  int self = push(std::move(out), nullptr);
  Mat tgt = target;
  nodes_[static_cast<std::size_t>(self)].back =
      [self, pred, tgt = std::move(tgt), n](Tape& t) {
        double g = t.grad(self).a[0];
        const Mat& p_ = t.val(pred);
        Mat& gp = t.grad(pred);
        for (std::size_t i = 0; i < p_.size(); ++i) {
          double d = p_.a[i] - tgt.a[i];
          double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
          gp.a[i] += g * (sgn + 2.0 * d) / n;
        }
      };
  return self;
}

void Tape::backward(int root) {
  Mat& g = grad(root);
  if (g.size() != 1) throw std::invalid_argument("backward: root must be scalar");
  g.a[0] = 1.0;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    if (nodes_[static_cast<std::size_t>(i)].back)
      nodes_[static_cast<std::size_t>(i)].back(*this);
  }
}

double loss_eq1_value(const Mat& y, const Mat& yhat) {
  if (y.rows != yhat.rows || y.cols != yhat.cols)
    throw std::invalid_argument("loss_eq1: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double d = yhat.a[i] - y.a[i];
    sum += std::fabs(d) + d * d;
  }
  return sum / static_cast<double>(y.size());
}

}  // namespace biotac
