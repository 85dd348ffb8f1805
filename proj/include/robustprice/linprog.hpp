#pragma once

// Dense linear programming for the small factor-revealing programs:
//
//   maximize  c^T x   subject to  A x <= b,  x >= 0.
//
// The default engine is a revised simplex that keeps the basis in bordered
// form: slack columns are unit vectors, so only the square block of basic
// structural columns on the rows they cover is inverted. Phase one minimizes
// the sum of infeasibilities, which lets it start from any basis, including
// a warm start carried over from a related problem.

#include <cstddef>
#include <vector>

namespace robustprice::linprog {

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LpModel {
  std::vector<double> objective;
  DenseMatrix constraints;
  std::vector<double> rhs;

  std::size_t rows() const { return constraints.rows(); }
  std::size_t cols() const { return constraints.cols(); }
  /// Throws std::invalid_argument on inconsistent dimensions or non-finite data.
  void validate() const;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(Status status);

/// Basic structural columns and the rows whose slacks they displace; both
/// lists have the same length. Every other row keeps its slack basic.
struct Basis {
  std::vector<std::size_t> columns;
  std::vector<std::size_t> rows;
};

struct LpSolution {
  Status status = Status::Infeasible;
  double objective_value = 0.0;
  std::vector<double> primal;
  /// One multiplier per constraint row (nonnegative at an optimum).
  std::vector<double> dual;
  Basis basis;
  std::size_t iterations = 0;
  std::size_t refactorizations = 0;
  /// False when a supplied starting basis was singular and ignored.
  bool warm_start_used = false;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  /// 0 selects max(10000, 20 (m + n)).
  std::size_t max_iterations = 0;
  /// Iterations between residual checks of the updated inverse.
  std::size_t check_period = 50;
  /// Refactor when the relative primal residual exceeds this.
  double refactor_residual = 1e-10;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  std::size_t bland_after = 50;
};

/// Adapter seam: any engine that honors the LpModel/LpSolution contract.
class Solver {
 public:
  virtual ~Solver() = default;
  virtual LpSolution solve(const LpModel& model) const = 0;
  /// Engines without warm starts ignore the basis.
  virtual LpSolution solve(const LpModel& model, const Basis& start) const {
    (void)start;
    return solve(model);
  }
};

class RevisedSimplex final : public Solver {
 public:
  explicit RevisedSimplex(SimplexOptions options = {}) : options_(options) {}
  LpSolution solve(const LpModel& model) const override;
  LpSolution solve(const LpModel& model, const Basis& start) const override;

 private:
  SimplexOptions options_;
};

/// Solves with the default engine.
LpSolution solve(const LpModel& model);

}  // namespace robustprice::linprog
