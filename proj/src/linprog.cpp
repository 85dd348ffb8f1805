#include "robustprice/linprog.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace robustprice::linprog {

void LpModel::validate() const {
  if (objective.size() != cols()) throw std::invalid_argument("LpModel: objective size != column count");
  if (rhs.size() != rows()) throw std::invalid_argument("LpModel: rhs size != row count");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(objective.begin(), objective.end(), finite) || !std::all_of(rhs.begin(), rhs.end(), finite)) {
    throw std::invalid_argument("LpModel: non-finite objective or rhs");
  }
  for (std::size_t i = 0; i < rows(); ++i) {
    if (!std::all_of(constraints.row(i), constraints.row(i) + cols(), finite)) {
      throw std::invalid_argument("LpModel: non-finite constraint coefficient");
    }
  }
}

const char* to_string(Status status) {
  switch (status) {
    case Status::Optimal:
      return "optimal";
    case Status::Infeasible:
      return "infeasible";
    case Status::Unbounded:
      return "unbounded";
    case Status::IterationLimit:
      return "iteration_limit";
  }
  return "unknown";
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinRcond = 1e-13;
// Relative pivot below which a warm-start column counts as dependent.
constexpr double kSubsetPivot = 1e-9;

std::size_t idx(Index i) { return static_cast<std::size_t>(i); }

// Basis B = [A_S | e_i for i in L]. With T the complement of L (|T| = |S| = k)
// and D = A[T, S], B^{-1} v is
//   z_S = D^{-1} v_T,   z_i = v_i - A[i, S] z_S  for i in L,
// so only D^{-1} is stored. Basic variables may be negative during phase one.
class Engine {
 public:
  Engine(const LpModel& model, const SimplexOptions& options) : opt_(options) {
    m_ = static_cast<Index>(model.rows());
    n_ = static_cast<Index>(model.cols());
    a_.resize(m_, n_);
    b_.resize(m_);
    c_ = Eigen::Map<const VectorXd>(model.objective.data(), n_);
    row_scale_.resize(m_);
    for (Index i = 0; i < m_; ++i) {
      const double* src = model.constraints.row(idx(i));
      double peak = 0.0;
      for (Index j = 0; j < n_; ++j) peak = std::max(peak, std::abs(src[j]));
      const double s = peak > 0.0 ? 1.0 / peak : 1.0;
      row_scale_[i] = s;
      for (Index j = 0; j < n_; ++j) a_(i, j) = s * src[j];
      b_[i] = s * model.rhs[idx(i)];
    }
    b_norm_ = std::max(1.0, b_.cwiseAbs().maxCoeff());
    max_iter_ = opt_.max_iterations ? opt_.max_iterations
                                    : std::max<std::size_t>(10000, 20 * static_cast<std::size_t>(m_ + n_));
    cold_start();
  }

  // Installs the given basis. A numerically singular one is first cut down to
  // an independent subset of its pairs. Returns false, leaving the slack
  // basis in place, when the basis is malformed or nothing usable remains.
  bool warm_start(const Basis& start) {
    const std::size_t k = start.columns.size();
    if (k == 0 || k != start.rows.size() || k > idx(std::min(m_, n_))) return false;
    std::vector<char> seen_col(idx(n_), 0);
    std::vector<char> seen_row(idx(m_), 0);
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t j = start.columns[t];
      const std::size_t r = start.rows[t];
      if (j >= idx(n_) || r >= idx(m_) || seen_col[j] || seen_row[r]) return false;
      seen_col[j] = seen_row[r] = 1;
    }
    std::vector<std::size_t> cols = start.columns;
    std::vector<std::size_t> rows = start.rows;
    if (!install(cols, rows)) {
      cold_start();
      independent_subset(cols, rows);
      if (cols.empty() || !install(cols, rows)) {
        cold_start();
        return false;
      }
    }
    return true;
  }

  LpSolution run() {
    LpSolution out;
    const Status status = iterate();
    out.status = status;
    out.iterations = iterations_;
    out.primal.assign(idx(n_), 0.0);
    out.dual.assign(idx(m_), 0.0);
    if (status == Status::Optimal) {
      for (Index b = 0; b < k_; ++b) out.primal[idx(s_[idx(b)])] = std::max(xs_[b], 0.0);
      compute_duals(false);
      for (Index i = 0; i < m_; ++i) out.dual[idx(i)] = std::max(y_[i] * row_scale_[i], 0.0);
      double obj = 0.0;
      for (Index j = 0; j < n_; ++j) obj += c_[j] * out.primal[idx(j)];
      out.objective_value = obj;
    }
    for (Index b = 0; b < k_; ++b) {
      out.basis.columns.push_back(idx(s_[idx(b)]));
      out.basis.rows.push_back(idx(t_[idx(b)]));
    }
    out.refactorizations = refactorizations_;
    return out;
  }

 private:
  // ---- storage -----------------------------------------------------------

  void cold_start() {
    k_ = 0;
    s_.clear();
    t_.clear();
    s_pos_.assign(idx(n_), -1);
    t_pos_.assign(idx(m_), -1);
    slack_basic_.assign(idx(m_), 1);
    xl_ = b_;
    reserve(std::min<Index>(std::max<Index>(std::min(m_, n_), 1), 64));
  }

  // Installs the pairs as the basis and factors it; false if D is singular.
  bool install(const std::vector<std::size_t>& cols, const std::vector<std::size_t>& rows) {
    reserve(static_cast<Index>(cols.size()));
    k_ = static_cast<Index>(cols.size());
    for (Index t = 0; t < k_; ++t) {
      const Index j = static_cast<Index>(cols[idx(t)]);
      const Index r = static_cast<Index>(rows[idx(t)]);
      s_.push_back(j);
      t_.push_back(r);
      s_pos_[idx(j)] = t;
      t_pos_[idx(r)] = t;
      slack_basic_[idx(r)] = 0;
      as_.col(t) = a_.col(j);
    }
    return refactor();
  }

  // Shrinks the candidate pairs to a nonsingular D: Gaussian elimination with
  // partial pivoting that skips columns whose best remaining pivot is
  // negligible. The pivot columns and pivot rows are kept.
  void independent_subset(std::vector<std::size_t>& cols, std::vector<std::size_t>& rows) const {
    const Index k = static_cast<Index>(cols.size());
    MatrixXd w(k, k);
    for (Index p = 0; p < k; ++p) {
      for (Index c = 0; c < k; ++c) w(p, c) = a_(static_cast<Index>(rows[idx(p)]), static_cast<Index>(cols[idx(c)]));
    }
    const VectorXd col_peak = w.cwiseAbs().colwise().maxCoeff();
    std::vector<Index> order(idx(k));
    for (Index p = 0; p < k; ++p) order[idx(p)] = p;
    std::vector<std::size_t> kept_cols;
    std::vector<std::size_t> kept_rows;
    Index rank = 0;
    for (Index c = 0; c < k && rank < k; ++c) {
      Index best = 0;
      const double pivot = w.col(c).segment(rank, k - rank).cwiseAbs().maxCoeff(&best);
      if (!(pivot > kSubsetPivot * col_peak[c])) continue;
      best += rank;
      if (best != rank) {
        w.row(best).swap(w.row(rank));
        std::swap(order[idx(best)], order[idx(rank)]);
      }
      const Index below = k - rank - 1;
      if (below > 0) {
        w.col(c).segment(rank + 1, below) /= w(rank, c);
        w.block(rank + 1, c + 1, below, k - c - 1).noalias() -=
            w.col(c).segment(rank + 1, below) * w.row(rank).segment(c + 1, k - c - 1);
      }
      kept_cols.push_back(cols[idx(c)]);
      kept_rows.push_back(rows[idx(order[idx(rank)])]);
      ++rank;
    }
    cols = std::move(kept_cols);
    rows = std::move(kept_rows);
  }

  void reserve(Index want) {
    if (want <= cap_) return;
    const Index cap = std::min(std::max(want, 2 * cap_), std::max<Index>(std::min(m_, n_), 1));
    MatrixXd as(m_, cap);
    MatrixXd kinv(cap, cap);
    if (k_ > 0) {
      as.leftCols(k_) = as_.leftCols(k_);
      kinv.topLeftCorner(k_, k_) = kinv_.topLeftCorner(k_, k_);
    }
    as_.swap(as);
    kinv_.swap(kinv);
    xs_.conservativeResize(cap);
    cap_ = cap;
  }

  auto kinv() { return kinv_.topLeftCorner(k_, k_); }
  auto as() { return as_.leftCols(k_); }

  bool infeasible(double x) const { return x < -opt_.feasibility_tol; }

  bool any_infeasible() const {
    for (Index b = 0; b < k_; ++b) {
      if (infeasible(xs_[b])) return true;
    }
    for (Index i = 0; i < m_; ++i) {
      if (slack_basic_[idx(i)] && infeasible(xl_[i])) return true;
    }
    return false;
  }

  // ---- pricing -----------------------------------------------------------

  // y = B^{-T} c_B. Phase one prices the sum of infeasibilities: cost 1 on
  // every negative basic variable and 0 elsewhere.
  void compute_duals(bool phase_one) {
    y_.setZero(m_);
    VectorXd rhs(k_);
    for (Index b = 0; b < k_; ++b) {
      rhs[b] = phase_one ? (infeasible(xs_[b]) ? 1.0 : 0.0) : c_[s_[idx(b)]];
    }
    if (phase_one) {
      bool any = false;
      for (Index i = 0; i < m_; ++i) {
        if (slack_basic_[idx(i)] && infeasible(xl_[i])) {
          y_[i] = 1.0;
          any = true;
        }
      }
      if (any && k_ > 0) rhs.noalias() -= as().transpose() * y_;
    }
    if (k_ > 0) {
      const VectorXd yt = kinv().transpose() * rhs;
      for (Index p = 0; p < k_; ++p) y_[t_[idx(p)]] = yt[p];
    }
  }

  struct Candidate {
    bool structural = true;
    Index index = -1;  // column for structurals, row for slacks
    double reduced_cost = 0.0;
  };

  Candidate choose_entering(bool phase_one, bool bland) {
    compute_duals(phase_one);
    if (phase_one) {
      d_.setZero(n_);
    } else {
      d_ = c_;
    }
    for (Index i = 0; i < m_; ++i) {
      if (y_[i] != 0.0) d_.noalias() -= y_[i] * a_.row(i).transpose();
    }
    Candidate best;
    double best_score = opt_.optimality_tol;
    for (Index j = 0; j < n_; ++j) {
      if (s_pos_[idx(j)] >= 0) continue;
      const double dj = d_[j];
      if (dj > opt_.optimality_tol) {
        if (bland) return {true, j, dj};
        if (dj > best_score) {
          best_score = dj;
          best = {true, j, dj};
        }
      }
    }
    // Slack of a covered row r: column e_r, reduced cost -y_r.
    for (Index p = 0; p < k_; ++p) {
      const Index r = t_[idx(p)];
      const double dr = -y_[r];
      if (dr > opt_.optimality_tol) {
        if (bland) {
          if (best.index < 0 || (!best.structural && r < best.index)) best = {false, r, dr};
        } else if (dr > best_score) {
          best_score = dr;
          best = {false, r, dr};
        }
      }
    }
    return best;
  }

  // ---- FTRAN -------------------------------------------------------------

  // z = B^{-1} v for the entering column; zs over S positions, zl over rows
  // (meaningful on L only).
  void ftran(const Candidate& e) {
    zl_.setZero(m_);
    if (e.structural) {
      VectorXd vt(k_);
      for (Index p = 0; p < k_; ++p) vt[p] = a_(t_[idx(p)], e.index);
      zs_ = kinv() * vt;
      const VectorXd az = as() * zs_;
      for (Index i = 0; i < m_; ++i) {
        if (slack_basic_[idx(i)]) zl_[i] = a_(i, e.index) - az[i];
      }
    } else {
      zs_ = kinv().col(t_pos_[idx(e.index)]);
      const VectorXd az = as() * zs_;
      for (Index i = 0; i < m_; ++i) {
        if (slack_basic_[idx(i)]) zl_[i] = -az[i];
      }
    }
  }

  // ---- ratio test --------------------------------------------------------

  struct Leaving {
    bool structural = true;
    Index pos = -1;  // S position for structurals, row for slacks
    double theta = 0.0;
  };

  struct Entry {
    bool structural;
    Index pos;
    double x;
    double z;
    Index key;  // Bland order: structural columns first, then slack rows
  };

  template <typename F>
  void for_each_basic(F&& f) const {
    for (Index b = 0; b < k_; ++b) f(Entry{true, b, xs_[b], zs_[b], s_[idx(b)]});
    for (Index i = 0; i < m_; ++i) {
      if (slack_basic_[idx(i)]) f(Entry{false, i, xl_[i], zl_[i], n_ + i});
    }
  }

  // Harris two-pass test over the feasible basics. In phase one, negative
  // basics rising towards zero are breakpoints of the piecewise-linear
  // infeasibility; the step passes them while the slope stays positive.
  Leaving ratio_test(bool phase_one, double slope, bool bland) {
    const double ptol = opt_.pivot_tol;
    const double ftol = opt_.feasibility_tol;
    double theta_max = kInf;
    for_each_basic([&](const Entry& e) {
      if (!infeasible(e.x) && e.z > ptol) theta_max = std::min(theta_max, (std::max(e.x, 0.0) + ftol) / e.z);
    });

    Leaving out;
    if (phase_one) {
      std::vector<Entry> breaks;
      for_each_basic([&](const Entry& e) {
        if (infeasible(e.x) && e.z < -ptol && e.x / e.z <= theta_max) breaks.push_back(e);
      });
      std::sort(breaks.begin(), breaks.end(), [](const Entry& l, const Entry& r) {
        const double tl = l.x / l.z;
        const double tr = r.x / r.z;
        return tl != tr ? tl < tr : l.key < r.key;
      });
      for (const Entry& e : breaks) {
        slope += e.z;  // this variable stops contributing once it reaches zero
        if (slope <= opt_.optimality_tol * 1e-3) return {e.structural, e.pos, e.x / e.z};
      }
    }
    if (!std::isfinite(theta_max)) return out;

    double best_pivot = 0.0;
    Index best_key = std::numeric_limits<Index>::max();
    for_each_basic([&](const Entry& e) {
      if (infeasible(e.x) || e.z <= ptol) return;
      const double ratio = std::max(e.x, 0.0) / e.z;
      if (ratio > theta_max) return;
      const bool better = bland ? (e.key < best_key) : (e.z > best_pivot);
      if (better) {
        best_pivot = e.z;
        best_key = e.key;
        out = {e.structural, e.pos, ratio};
      }
    });
    return out;
  }

  // ---- basis update ------------------------------------------------------

  void pivot(const Candidate& e, const Leaving& l) {
    const double theta = l.theta;
    if (k_ > 0) xs_.head(k_) -= theta * zs_;
    for (Index i = 0; i < m_; ++i) {
      if (slack_basic_[idx(i)]) xl_[i] -= theta * zl_[i];
    }
    if (e.structural && !l.structural) {
      border_in(e.index, l.pos, theta);
    } else if (e.structural && l.structural) {
      replace_column(e.index, l.pos, theta);
    } else if (!e.structural && !l.structural) {
      replace_row(e.index, l.pos, theta);
    } else {
      shrink(e.index, l.pos, theta);
    }
  }

  // Structural j enters, slack of row r leaves: k grows by one. With
  // u = A[T, j], v = A[r, S], s = A(r, j) - v^T D^{-1} u (= z_r):
  //   [D u; v^T A(r,j)]^{-1} = [D^{-1} + z rho^T / s, -z / s; -rho^T / s, 1 / s],
  // where z = D^{-1} u and rho^T = v^T D^{-1}.
  void border_in(Index j, Index r, double theta) {
    if (k_ == cap_) reserve(k_ + 1);
    const Index k = k_;
    const double s = zl_[r];
    if (k > 0) {
      const VectorXd rho = kinv_.topLeftCorner(k, k).transpose() * as_.row(r).head(k).transpose();
      kinv_.topLeftCorner(k, k).noalias() += (zs_ / s) * rho.transpose();
      kinv_.col(k).head(k) = -zs_ / s;
      kinv_.row(k).head(k) = -rho.transpose() / s;
    }
    kinv_(k, k) = 1.0 / s;
    as_.col(k) = a_.col(j);
    s_.push_back(j);
    t_.push_back(r);
    s_pos_[idx(j)] = k;
    t_pos_[idx(r)] = k;
    xs_[k] = theta;
    slack_basic_[idx(r)] = 0;
    xl_[r] = 0.0;
    ++k_;
  }

  // Structural j replaces the structural at S position b (column b of D).
  void replace_column(Index j, Index b, double theta) {
    auto kinv_k = kinv();
    kinv_k.row(b) /= zs_[b];
    const Eigen::RowVectorXd rb = kinv_k.row(b);
    VectorXd z = zs_;
    z[b] = 0.0;
    kinv_k.noalias() -= z * rb;
    s_pos_[idx(s_[idx(b)])] = -1;
    s_[idx(b)] = j;
    s_pos_[idx(j)] = b;
    as_.col(b) = a_.col(j);
    xs_[b] = theta;
  }

  // Slack of covered row r enters, slack of row i leaves: row i takes r's
  // place in T (row p of D changes by delta), a Sherman-Morrison update.
  void replace_row(Index r, Index i, double theta) {
    const Index p = t_pos_[idx(r)];
    auto kinv_k = kinv();
    const Eigen::RowVectorXd delta = as_.row(i).head(k_) - as_.row(r).head(k_);
    const Eigen::RowVectorXd dk = delta * kinv_k;
    const VectorXd col = kinv_k.col(p);
    kinv_k.noalias() -= (col / (1.0 + dk[p])) * dk;
    t_[idx(p)] = i;
    t_pos_[idx(i)] = p;
    t_pos_[idx(r)] = -1;
    slack_basic_[idx(i)] = 0;
    xl_[i] = 0.0;
    slack_basic_[idx(r)] = 1;
    xl_[r] = theta;
  }

  // Slack of covered row r enters, structural at S position b leaves: drop
  // row p = pos(r) and column b from D, then compact the last position into
  // the gap.
  void shrink(Index r, Index b, double theta) {
    const Index p = t_pos_[idx(r)];
    const Index last = k_ - 1;
    auto kinv_k = kinv();
    const double piv = kinv_k(b, p);
    const VectorXd col = kinv_k.col(p);
    const Eigen::RowVectorXd row = kinv_k.row(b);
    kinv_k.noalias() -= (col / piv) * row;
    if (b != last) {
      kinv_k.row(b) = kinv_k.row(last);
      as_.col(b) = as_.col(last);
      xs_[b] = xs_[last];
    }
    if (p != last) kinv_k.col(p) = kinv_k.col(last);
    s_pos_[idx(s_[idx(b)])] = -1;
    if (b != last) {
      s_[idx(b)] = s_[idx(last)];
      s_pos_[idx(s_[idx(b)])] = b;
    }
    s_.pop_back();
    t_pos_[idx(r)] = -1;
    if (p != last) {
      t_[idx(p)] = t_[idx(last)];
      t_pos_[idx(t_[idx(p)])] = p;
    }
    t_.pop_back();
    --k_;
    slack_basic_[idx(r)] = 1;
    xl_[r] = theta;
  }

  // ---- numerics ----------------------------------------------------------

  void recompute_values() {
    if (k_ > 0) {
      VectorXd bt(k_);
      for (Index p = 0; p < k_; ++p) bt[p] = b_[t_[idx(p)]];
      xs_.head(k_) = kinv() * bt;
    }
    const VectorXd ax = k_ > 0 ? VectorXd(as() * xs_.head(k_)) : VectorXd::Zero(m_);
    for (Index i = 0; i < m_; ++i) {
      if (slack_basic_[idx(i)]) xl_[i] = b_[i] - ax[i];
    }
  }

  // Fresh inverse of D and basic values from B x_B = b. False if D is
  // numerically singular.
  bool refactor() {
    ++refactorizations_;
    iterations_since_check_ = 0;
    if (k_ > 0) {
      MatrixXd d(k_, k_);
      for (Index p = 0; p < k_; ++p) d.row(p) = as_.row(t_[idx(p)]).head(k_);
      const Eigen::PartialPivLU<MatrixXd> lu(d);
      if (!(lu.rcond() > kMinRcond)) return false;
      kinv() = lu.inverse();
    }
    recompute_values();
    return xs_.head(k_).allFinite() && xl_.allFinite();
  }

  // Relative residual of the covered rows, D x_S = b_T, which the inverse
  // updates must keep.
  double residual() {
    if (k_ == 0) return 0.0;
    double worst = 0.0;
    for (Index p = 0; p < k_; ++p) {
      const Index r = t_[idx(p)];
      worst = std::max(worst, std::abs(as_.row(r).head(k_).dot(xs_.head(k_)) - b_[r]));
    }
    return worst / b_norm_;
  }

  void maybe_refactor() {
    if (++iterations_since_check_ < opt_.check_period) return;
    iterations_since_check_ = 0;
    if (residual() > opt_.refactor_residual) {
      refactor();
    } else {
      recompute_values();
    }
  }

  Status iterate() {
    std::size_t degenerate_run = 0;
    bool confirmed = false;
    while (true) {
      if (iterations_ >= max_iter_) return Status::IterationLimit;
      const bool phase_one = any_infeasible();
      const bool bland = degenerate_run >= opt_.bland_after;
      const Candidate e = choose_entering(phase_one, bland);
      if (e.index < 0) {
        // Re-derive the basic values before concluding.
        if (!confirmed) {
          if (residual() > opt_.refactor_residual) {
            refactor();
          } else {
            recompute_values();
          }
          confirmed = true;
          continue;
        }
        return phase_one ? Status::Infeasible : Status::Optimal;
      }
      confirmed = false;
      ftran(e);
      const Leaving l = ratio_test(phase_one, e.reduced_cost, bland);
      if (l.pos < 0) {
        if (!phase_one) return Status::Unbounded;
        return Status::Infeasible;  // unreachable in exact arithmetic
      }
      degenerate_run = l.theta <= 1e-12 ? degenerate_run + 1 : 0;
      pivot(e, l);
      ++iterations_;
      maybe_refactor();
    }
  }

  SimplexOptions opt_;
  Index m_ = 0;
  Index n_ = 0;
  RowMatrix a_;
  VectorXd b_;
  VectorXd c_;
  VectorXd row_scale_;
  double b_norm_ = 1.0;

  std::vector<char> slack_basic_;
  VectorXd xl_;

  Index k_ = 0;
  Index cap_ = 0;
  std::vector<Index> s_;
  std::vector<Index> t_;
  std::vector<Index> s_pos_;
  std::vector<Index> t_pos_;
  MatrixXd as_;
  MatrixXd kinv_;
  VectorXd xs_;

  VectorXd y_;
  VectorXd d_;
  VectorXd zs_;
  VectorXd zl_;

  std::size_t max_iter_ = 0;
  std::size_t iterations_ = 0;
  std::size_t refactorizations_ = 0;
  std::size_t iterations_since_check_ = 0;
};

LpSolution solve_empty(const LpModel& model) {
  LpSolution out;
  out.primal.assign(model.cols(), 0.0);
  const bool unbounded = std::any_of(model.objective.begin(), model.objective.end(), [](double v) { return v > 0.0; });
  out.status = unbounded ? Status::Unbounded : Status::Optimal;
  return out;
}

}  // namespace

LpSolution RevisedSimplex::solve(const LpModel& model) const {
  model.validate();
  if (model.rows() == 0) return solve_empty(model);
  Engine engine(model, options_);
  return engine.run();
}

LpSolution RevisedSimplex::solve(const LpModel& model, const Basis& start) const {
  model.validate();
  if (model.rows() == 0) return solve_empty(model);
  Engine engine(model, options_);
  const bool used = engine.warm_start(start);
  LpSolution out = engine.run();
  out.warm_start_used = used;
  return out;
}

LpSolution solve(const LpModel& model) { return RevisedSimplex{}.solve(model); }

}  // namespace robustprice::linprog
