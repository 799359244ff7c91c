#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace gemesh {

// Row-major throughout: rows are mesh vertices or directed edges, and fused
// ops slice row blocks in place.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Reverse-mode autodiff over 2-D matrices. Values are computed eagerly as
// ops are recorded; backward() replays the tape in reverse creation order.
// Node ids are plain indices. Single-threaded.
class Tape {
 public:
  // Rows grouped by a destination id, CSR-style; shared by scatter_sum and
  // segment_softmax. Ops hold the plan by reference: it must outlive the tape.
  struct ScatterPlan {
    int out_rows = 0;
    std::vector<int> dst;      // destination of each input row
    std::vector<int> offsets;  // size out_rows + 1
    std::vector<int> order;    // input rows sorted by destination, stable
    static ScatterPlan build(std::vector<int> dst, int out_rows);
  };

  int constant(RowMat value);
  int leaf(RowMat value);

  long rows(int id) const { return node(id).value.rows(); }
  long cols(int id) const { return node(id).value.cols(); }
  const RowMat& val(int id) const { return node(id).value; }
  bool needs_grad(int id) const { return node(id).needs_grad; }
  // zero-initialized during backward(); meaningful afterwards
  const RowMat& grad(int id) const;
  RowMat& grad_ref(int id);
  int size() const { return static_cast<int>(nodes_.size()); }

  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);  // elementwise
  int scalar_mul(int a, double s);
  int matmul(int a, int b);
  int concat_rows(const std::vector<int>& parts);
  int concat_cols(const std::vector<int>& parts);
  int slice_rows(int a, long begin, long count);
  int slice_cols(int a, long begin, long count);
  int permute_cols(int a, std::vector<int> perm);  // out.col(j) = in.col(perm[j])
  int reshape(int a, long r, long c);              // row-major reinterpretation
  int relu(int a);                                 // subgradient 0 at 0
  int sqrt_op(int a);
  int softmax_rows(int a);
  // column vector input; softmax within each destination group
  int segment_softmax(int a, const ScatterPlan& plan);
  int gather_rows(int a, std::vector<int> idx);
  int scatter_sum(int a, const ScatterPlan& plan);
  int row_scale(int a, int s);  // row i of a scaled by s(i, 0)
  int row_sum(int a);
  int sum(int a);
  int mean(int a);
  int mse(int pred, int target);

  // Fused op escape hatch: the caller computes the value from parent values
  // and supplies the backward pass. backward(tape, id) must read grad(id)
  // and accumulate into grad_ref(parent) for differentiable parents.
  int custom(std::vector<int> parents, RowMat value, std::function<void(Tape&, int)> backward);

  // root must be 1x1; seeds with 1 and accumulates into every grad
  void backward(int root);

 private:
  struct Node {
    RowMat value;
    RowMat grad;
    std::vector<int> parents;
    std::function<void(Tape&, int)> back;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;

  const Node& node(int id) const;
  Node& node(int id);
  int push(RowMat value, std::vector<int> parents, std::function<void(Tape&, int)> back);
};

// Largest relative disagreement between reverse-mode and central-difference
// gradients of a scalar-valued graph, over every entry of every leaf.
using GraphFn = std::function<int(Tape&, const std::vector<int>&)>;
double grad_check(const GraphFn& f, const std::vector<RowMat>& leaves, double step = 1e-5);

}  // namespace gemesh
