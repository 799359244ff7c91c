#include "gemesh/tape.hpp"

#include <cmath>
#include <utility>

#include "gemesh/errors.hpp"

namespace gemesh {

Tape::ScatterPlan Tape::ScatterPlan::build(std::vector<int> dst, int out_rows) {
  check(out_rows >= 0, Err::ShapeMismatch, "scatter plan with negative output rows");
  ScatterPlan plan;
  plan.out_rows = out_rows;
  plan.dst = std::move(dst);
  plan.offsets.assign(static_cast<size_t>(out_rows) + 1, 0);
  for (int d : plan.dst) {
    check(d >= 0 && d < out_rows, Err::IndexOutOfRange, "scatter destination out of range");
    ++plan.offsets[static_cast<size_t>(d) + 1];
  }
  for (int s = 0; s < out_rows; ++s) plan.offsets[s + 1] += plan.offsets[s];
  plan.order.resize(plan.dst.size());
  std::vector<int> cursor(plan.offsets.begin(), plan.offsets.end() - 1);
  for (int i = 0; i < static_cast<int>(plan.dst.size()); ++i) plan.order[cursor[plan.dst[i]]++] = i;
  return plan;
}

const Tape::Node& Tape::node(int id) const {
  check(id >= 0 && id < size(), Err::IndexOutOfRange, "tape node id out of range");
  return nodes_[id];
}

Tape::Node& Tape::node(int id) {
  check(id >= 0 && id < size(), Err::IndexOutOfRange, "tape node id out of range");
  return nodes_[id];
}

const RowMat& Tape::grad(int id) const { return node(id).grad; }

RowMat& Tape::grad_ref(int id) { return node(id).grad; }

int Tape::push(RowMat value, std::vector<int> parents, std::function<void(Tape&, int)> back) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  for (int p : n.parents) n.needs_grad = n.needs_grad || node(p).needs_grad;
  if (n.needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return size() - 1;
}

int Tape::constant(RowMat value) { return push(std::move(value), {}, nullptr); }

int Tape::leaf(RowMat value) {
  int id = push(std::move(value), {}, nullptr);
  nodes_[id].needs_grad = true;
  return id;
}

int Tape::add(int a, int b) {
  check(rows(a) == rows(b) && cols(a) == cols(b), Err::ShapeMismatch, "add shapes differ");
  return push(val(a) + val(b), {a, b}, [a, b](Tape& t, int id) {
    const RowMat& g = t.grad(id);
    if (t.needs_grad(a)) t.grad_ref(a) += g;
    if (t.needs_grad(b)) t.grad_ref(b) += g;
  });
}

int Tape::sub(int a, int b) {
  check(rows(a) == rows(b) && cols(a) == cols(b), Err::ShapeMismatch, "sub shapes differ");
  return push(val(a) - val(b), {a, b}, [a, b](Tape& t, int id) {
    const RowMat& g = t.grad(id);
    if (t.needs_grad(a)) t.grad_ref(a) += g;
    if (t.needs_grad(b)) t.grad_ref(b) -= g;
  });
}

int Tape::mul(int a, int b) {
  check(rows(a) == rows(b) && cols(a) == cols(b), Err::ShapeMismatch, "mul shapes differ");
  return push(val(a).cwiseProduct(val(b)), {a, b}, [a, b](Tape& t, int id) {
    const RowMat& g = t.grad(id);
    if (t.needs_grad(a)) t.grad_ref(a) += g.cwiseProduct(t.val(b));
    if (t.needs_grad(b)) t.grad_ref(b) += g.cwiseProduct(t.val(a));
  });
}

int Tape::scalar_mul(int a, double s) {
  return push(val(a) * s, {a}, [a, s](Tape& t, int id) {
    if (t.needs_grad(a)) t.grad_ref(a) += t.grad(id) * s;
  });
}

int Tape::matmul(int a, int b) {
  check(cols(a) == rows(b), Err::ShapeMismatch, "matmul inner dimensions differ");
  return push(val(a) * val(b), {a, b}, [a, b](Tape& t, int id) {
    const RowMat& g = t.grad(id);
    if (t.needs_grad(a)) t.grad_ref(a) += g * t.val(b).transpose();
    if (t.needs_grad(b)) t.grad_ref(b) += t.val(a).transpose() * g;
  });
}

int Tape::concat_rows(const std::vector<int>& parts) {
  check(!parts.empty(), Err::ShapeMismatch, "concat of nothing");
  long c = cols(parts[0]);
  long r = 0;
  for (int p : parts) {
    check(cols(p) == c, Err::ShapeMismatch, "concat_rows column counts differ");
    r += rows(p);
  }
  RowMat out(r, c);
  long at = 0;
  for (int p : parts) {
    out.middleRows(at, rows(p)) = val(p);
    at += rows(p);
  }
  return push(std::move(out), parts, [parts](Tape& t, int id) {
    const RowMat& g = t.grad(id);
    long at = 0;
    for (int p : parts) {
      if (t.needs_grad(p)) t.grad_ref(p) += g.middleRows(at, t.rows(p));
      at += t.rows(p);
    }
  });
}

int Tape::concat_cols(const std::vector<int>& parts) {
  check(!parts.empty(), Err::ShapeMismatch, "concat of nothing");
  long r = rows(parts[0]);
  long c = 0;
  for (int p : parts) {
    check(rows(p) == r, Err::ShapeMismatch, "concat_cols row counts differ");
    c += cols(p);
  }
  RowMat out(r, c);
  long at = 0;
  for (int p : parts) {
    out.middleCols(at, cols(p)) = val(p);
    at += cols(p);
  }
  return push(std::move(out), parts, [parts](Tape& t, int id) {
    const RowMat& g = t.grad(id);
    long at = 0;
    for (int p : parts) {
      if (t.needs_grad(p)) t.grad_ref(p) += g.middleCols(at, t.cols(p));
      at += t.cols(p);
    }
  });
}

int Tape::slice_rows(int a, long begin, long count) {
  check(begin >= 0 && count >= 0 && begin + count <= rows(a), Err::IndexOutOfRange,
        "slice_rows out of range");
  return push(val(a).middleRows(begin, count), {a}, [a, begin, count](Tape& t, int id) {
    if (t.needs_grad(a)) t.grad_ref(a).middleRows(begin, count) += t.grad(id);
  });
}

int Tape::slice_cols(int a, long begin, long count) {
  check(begin >= 0 && count >= 0 && begin + count <= cols(a), Err::IndexOutOfRange,
        "slice_cols out of range");
  return push(val(a).middleCols(begin, count), {a}, [a, begin, count](Tape& t, int id) {
    if (t.needs_grad(a)) t.grad_ref(a).middleCols(begin, count) += t.grad(id);
  });
}

int Tape::permute_cols(int a, std::vector<int> perm) {
  check(static_cast<long>(perm.size()) == cols(a), Err::ShapeMismatch,
        "permutation length differs from column count");
  std::vector<char> seen(perm.size(), 0);
  for (int j : perm) {
    check(j >= 0 && j < static_cast<int>(perm.size()) && !seen[j], Err::IndexOutOfRange,
          "not a permutation");
    seen[j] = 1;
  }
  RowMat out(rows(a), cols(a));
  for (long j = 0; j < out.cols(); ++j) out.col(j) = val(a).col(perm[j]);
  return push(std::move(out), {a}, [a, perm = std::move(perm)](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    const RowMat& g = t.grad(id);
    RowMat& ga = t.grad_ref(a);
    for (long j = 0; j < g.cols(); ++j) ga.col(perm[j]) += g.col(j);
  });
}

int Tape::reshape(int a, long r, long c) {
  check(r * c == rows(a) * cols(a), Err::ShapeMismatch, "reshape changes element count");
  RowMat out = Eigen::Map<const RowMat>(val(a).data(), r, c);
  return push(std::move(out), {a}, [a](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    const RowMat& g = t.grad(id);
    t.grad_ref(a) += Eigen::Map<const RowMat>(g.data(), t.rows(a), t.cols(a));
  });
}

int Tape::relu(int a) {
  return push(val(a).cwiseMax(0.0), {a}, [a](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    t.grad_ref(a) += t.grad(id).cwiseProduct((t.val(id).array() > 0.0).cast<double>().matrix());
  });
}

int Tape::sqrt_op(int a) {
  return push(val(a).cwiseSqrt(), {a}, [a](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    // subgradient 0 where the input is 0
    const RowMat& y = t.val(id);
    RowMat scale = (y.array() > 0.0).select(0.5 * y.cwiseInverse(), RowMat::Zero(y.rows(), y.cols()));
    t.grad_ref(a) += t.grad(id).cwiseProduct(scale);
  });
}

int Tape::softmax_rows(int a) {
  RowMat y = val(a);
  for (long i = 0; i < y.rows(); ++i) {
    y.row(i).array() -= y.row(i).maxCoeff();
    y.row(i) = y.row(i).array().exp();
    y.row(i) /= y.row(i).sum();
  }
  return push(std::move(y), {a}, [a](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    const RowMat& y = t.val(id);
    const RowMat& g = t.grad(id);
    RowMat& ga = t.grad_ref(a);
    for (long i = 0; i < y.rows(); ++i) {
      double dot = y.row(i).dot(g.row(i));
      ga.row(i) += y.row(i).cwiseProduct(g.row(i) - RowMat::Constant(1, y.cols(), dot));
    }
  });
}

int Tape::segment_softmax(int a, const ScatterPlan& plan) {
  check(cols(a) == 1, Err::ShapeMismatch, "segment_softmax expects a column vector");
  check(static_cast<long>(plan.dst.size()) == rows(a), Err::ShapeMismatch,
        "segment_softmax plan does not cover the rows");
  const RowMat& x = val(a);
  RowMat y = RowMat::Zero(x.rows(), 1);
  for (int s = 0; s < plan.out_rows; ++s) {
    int lo = plan.offsets[s], hi = plan.offsets[s + 1];
    if (lo == hi) continue;
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = lo; k < hi; ++k) mx = std::max(mx, x(plan.order[k], 0));
    double total = 0.0;
    for (int k = lo; k < hi; ++k) {
      double e = std::exp(x(plan.order[k], 0) - mx);
      y(plan.order[k], 0) = e;
      total += e;
    }
    for (int k = lo; k < hi; ++k) y(plan.order[k], 0) /= total;
  }
  return push(std::move(y), {a}, [a, &plan](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    const RowMat& y = t.val(id);
    const RowMat& g = t.grad(id);
    RowMat& ga = t.grad_ref(a);
    for (int s = 0; s < plan.out_rows; ++s) {
      int lo = plan.offsets[s], hi = plan.offsets[s + 1];
      double dot = 0.0;
      for (int k = lo; k < hi; ++k) dot += y(plan.order[k], 0) * g(plan.order[k], 0);
      for (int k = lo; k < hi; ++k) {
        int r = plan.order[k];
        ga(r, 0) += y(r, 0) * (g(r, 0) - dot);
      }
    }
  });
}

int Tape::gather_rows(int a, std::vector<int> idx) {
  RowMat out(static_cast<long>(idx.size()), cols(a));
  for (long i = 0; i < out.rows(); ++i) {
    check(idx[i] >= 0 && idx[i] < rows(a), Err::IndexOutOfRange, "gather index out of range");
    out.row(i) = val(a).row(idx[i]);
  }
  return push(std::move(out), {a}, [a, idx = std::move(idx)](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    const RowMat& g = t.grad(id);
    RowMat& ga = t.grad_ref(a);
    for (long i = 0; i < g.rows(); ++i) ga.row(idx[i]) += g.row(i);
  });
}

int Tape::scatter_sum(int a, const ScatterPlan& plan) {
  check(static_cast<long>(plan.dst.size()) == rows(a), Err::ShapeMismatch,
        "scatter_sum plan does not cover the rows");
  RowMat out = RowMat::Zero(plan.out_rows, cols(a));
  for (long i = 0; i < rows(a); ++i) out.row(plan.dst[i]) += val(a).row(i);
  return push(std::move(out), {a}, [a, &plan](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    const RowMat& g = t.grad(id);
    RowMat& ga = t.grad_ref(a);
    for (long i = 0; i < ga.rows(); ++i) ga.row(i) += g.row(plan.dst[i]);
  });
}

int Tape::row_scale(int a, int s) {
  check(cols(s) == 1 && rows(s) == rows(a), Err::ShapeMismatch, "row_scale expects one scale per row");
  return push(val(s).col(0).asDiagonal() * val(a), {a, s}, [a, s](Tape& t, int id) {
    const RowMat& g = t.grad(id);
    if (t.needs_grad(a)) t.grad_ref(a) += t.val(s).col(0).asDiagonal() * g;
    if (t.needs_grad(s)) t.grad_ref(s).col(0) += g.cwiseProduct(t.val(a)).rowwise().sum();
  });
}

int Tape::row_sum(int a) {
  return push(val(a).rowwise().sum(), {a}, [a](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    t.grad_ref(a) += t.grad(id) * RowMat::Ones(1, t.cols(a));
  });
}

int Tape::sum(int a) {
  return push(RowMat::Constant(1, 1, val(a).sum()), {a}, [a](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    t.grad_ref(a).array() += t.grad(id)(0, 0);
  });
}

int Tape::mean(int a) {
  double n = static_cast<double>(rows(a) * cols(a));
  return push(RowMat::Constant(1, 1, val(a).sum() / n), {a}, [a, n](Tape& t, int id) {
    if (!t.needs_grad(a)) return;
    t.grad_ref(a).array() += t.grad(id)(0, 0) / n;
  });
}

int Tape::mse(int pred, int target) {
  check(rows(pred) == rows(target) && cols(pred) == cols(target), Err::ShapeMismatch,
        "mse shapes differ");
  double n = static_cast<double>(rows(pred) * cols(pred));
  double v = (val(pred) - val(target)).squaredNorm() / n;
  return push(RowMat::Constant(1, 1, v), {pred, target}, [pred, target, n](Tape& t, int id) {
    RowMat diff = (2.0 * t.grad(id)(0, 0) / n) * (t.val(pred) - t.val(target));
    if (t.needs_grad(pred)) t.grad_ref(pred) += diff;
    if (t.needs_grad(target)) t.grad_ref(target) -= diff;
  });
}

int Tape::custom(std::vector<int> parents, RowMat value, std::function<void(Tape&, int)> backward) {
  return push(std::move(value), std::move(parents), std::move(backward));
}

void Tape::backward(int root) {
  check(rows(root) == 1 && cols(root) == 1, Err::ShapeMismatch, "backward root must be scalar");
  for (Node& n : nodes_) {
    if (n.needs_grad) n.grad = RowMat::Zero(n.value.rows(), n.value.cols());
  }
  check(node(root).needs_grad, Err::ShapeMismatch, "backward root does not depend on any leaf");
  nodes_[root].grad(0, 0) = 1.0;
  for (int id = root; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.needs_grad && n.back) n.back(*this, id);
  }
}

double grad_check(const GraphFn& f, const std::vector<RowMat>& leaves, double step) {
  std::vector<RowMat> analytic;
  {
    Tape tape;
    std::vector<int> ids;
    ids.reserve(leaves.size());
    for (const RowMat& m : leaves) ids.push_back(tape.leaf(m));
    int root = f(tape, ids);
    check(tape.rows(root) == 1 && tape.cols(root) == 1, Err::ShapeMismatch,
          "grad_check graph must produce a scalar");
    tape.backward(root);
    for (int id : ids) analytic.push_back(tape.grad(id));
  }
  auto eval = [&](const std::vector<RowMat>& xs) {
    Tape tape;
    std::vector<int> ids;
    ids.reserve(xs.size());
    for (const RowMat& m : xs) ids.push_back(tape.leaf(m));
    return tape.val(f(tape, ids))(0, 0);
  };
  double worst = 0.0;
  std::vector<RowMat> xs = leaves;
  for (size_t p = 0; p < xs.size(); ++p) {
    for (long i = 0; i < xs[p].rows(); ++i) {
      for (long j = 0; j < xs[p].cols(); ++j) {
        double keep = xs[p](i, j);
        xs[p](i, j) = keep + step;
        double up = eval(xs);
        xs[p](i, j) = keep - step;
        double down = eval(xs);
        xs[p](i, j) = keep;
        double numeric = (up - down) / (2.0 * step);
        double exact = analytic[p](i, j);
        double denom = std::max({std::abs(numeric), std::abs(exact), 1e-8});
        worst = std::max(worst, std::abs(numeric - exact) / denom);
      }
    }
  }
  return worst;
}

}  // namespace gemesh
