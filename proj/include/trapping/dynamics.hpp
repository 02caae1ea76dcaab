#ifndef TRAPPING_DYNAMICS_HPP
#define TRAPPING_DYNAMICS_HPP

// Learning operators F: R^N -> R^N and the concrete models shipped with the
// library. A model is pure and reentrant; evaluate() may be called from many
// threads at once.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trapping/error.hpp"
#include "trapping/geometry.hpp"

namespace trapping {

using Matrix = std::vector<Point>;  // row-major, rows of equal length

class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;

  /// Writes F(x) into `out`. Both spans have length dim(). May throw
  /// EvaluationError.
  virtual void evaluate(std::span<const double> x, std::span<double> out) const = 0;

  /// Upper bound on the Lipschitz constant of every component F_d over `box`
  /// with respect to the Euclidean norm. Absent for black boxes.
  virtual std::optional<double> lipschitz_upper(const HyperBox&) const { return std::nullopt; }

  /// Upper bound on max_{x in box} ||F(x)||_max. Absent for black boxes.
  virtual std::optional<double> sup_norm_upper(const HyperBox&) const { return std::nullopt; }

  /// Checked evaluation into a caller-owned buffer.
  void eval_into(std::span<const double> x, std::span<double> out) const {
    if (x.size() != dim() || out.size() != dim()) {
      throw EvaluationError(name() + ": expected a point of dimension " + std::to_string(dim()) +
                            ", got " + std::to_string(x.size()));
    }
    evaluate(x, out);
    for (double v : out) {
      if (!std::isfinite(v)) throw EvaluationError(name() + ": non-finite value in F(x)");
    }
  }

  Point eval(std::span<const double> x) const {
    Point out(dim());
    eval_into(x, out);
    return out;
  }
};

using ModelPtr = std::shared_ptr<const DynamicsModel>;

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

// --- Dirac-GAN --------------------------------------------------------------

struct DiracGanParams {
  double epsilon = 0.1;
};

/// Gradient descent on L1 = psi^4 + eps psi theta and L2 = theta^4 - eps psi theta:
/// F(psi, theta) = (-4 psi^3 - eps theta, -4 theta^3 + eps psi).
class DiracGan final : public DynamicsModel {
 public:
  explicit DiracGan(DiracGanParams p) : eps_(p.epsilon) {
    if (!(eps_ > 0.0) || !std::isfinite(eps_)) throw InvalidArgument("dirac_gan: epsilon must be positive");
  }

  double epsilon() const { return eps_; }
  std::size_t dim() const override { return 2; }
  std::string name() const override { return "dirac_gan"; }

  void evaluate(std::span<const double> x, std::span<double> out) const override {
    const double psi = x[0], theta = x[1];
    out[0] = -4.0 * psi * psi * psi - eps_ * theta;
    out[1] = -4.0 * theta * theta * theta + eps_ * psi;
  }

  // Jacobian [[-12 psi^2, -eps], [eps, -12 theta^2]]; row and column abs-sums
  // are both bounded by 12 R^2 + eps.
  std::optional<double> lipschitz_upper(const HyperBox& box) const override {
    check_box(box);
    double rp = reach(box, 0), rt = reach(box, 1);
    return 12.0 * std::max(rp * rp, rt * rt) + eps_;
  }

  std::optional<double> sup_norm_upper(const HyperBox& box) const override {
    check_box(box);
    double rp = reach(box, 0), rt = reach(box, 1);
    return std::max(4.0 * rp * rp * rp + eps_ * rt, 4.0 * rt * rt * rt + eps_ * rp);
  }

 private:
  static double reach(const HyperBox& box, std::size_t d) {
    return std::max(std::abs(box.lower(d)), std::abs(box.upper(d)));
  }
  void check_box(const HyperBox& box) const {
    if (box.dim() != 2) throw InvalidArgument("dirac_gan: box must be 2-dimensional");
  }

  double eps_;
};

inline ModelPtr make_dirac_gan(DiracGanParams p) { return std::make_shared<DiracGan>(p); }

// --- Affine -----------------------------------------------------------------

/// F(x) = A x + b. The Jacobian is constant, so both bounds are exact.
class AffineModel : public DynamicsModel {
 public:
  AffineModel(Matrix a, Point b) : a_(std::move(a)), b_(std::move(b)) {
    const std::size_t n = b_.size();
    if (n == 0) throw InvalidArgument("affine: empty system");
    if (a_.size() != n) throw InvalidArgument("affine: A has " + std::to_string(a_.size()) +
                                              " rows, b has " + std::to_string(n) + " entries");
    for (const auto& row : a_) {
      if (row.size() != n) throw InvalidArgument("affine: A must be square");
      for (double v : row) {
        if (!std::isfinite(v)) throw InvalidArgument("affine: non-finite entry in A");
      }
    }
    for (double v : b_) {
      if (!std::isfinite(v)) throw InvalidArgument("affine: non-finite entry in b");
    }
    double col = 0.0, row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double c = 0.0, r = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        c += std::abs(a_[i][j]);
        r += std::abs(a_[j][i]);
      }
      col = std::max(col, c);
      row = std::max(row, r);
    }
    norm1_ = col;
    norm_inf_ = row;
  }

  const Matrix& matrix() const { return a_; }
  const Point& offset() const { return b_; }

  std::size_t dim() const override { return b_.size(); }
  std::string name() const override { return "affine"; }

  void evaluate(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < b_.size(); ++i) {
      double s = b_[i];
      for (std::size_t j = 0; j < b_.size(); ++j) s += a_[i][j] * x[j];
      out[i] = s;
    }
  }

  /// Induced L1 norm (max column abs-sum).
  double induced_l1() const { return norm1_; }
  /// Induced L-infinity norm (max row abs-sum).
  double induced_linf() const { return norm_inf_; }

  // max(||A||_1, ||A||_inf) >= ||A||_2 >= every row's Euclidean norm.
  std::optional<double> lipschitz_upper(const HyperBox& box) const override {
    check_box(box);
    return std::max(norm1_, norm_inf_);
  }

  // Each component is extremal at a corner; the corner is picked per term.
  std::optional<double> sup_norm_upper(const HyperBox& box) const override {
    check_box(box);
    double m = 0.0;
    for (std::size_t i = 0; i < b_.size(); ++i) {
      double hi = b_[i], lo = b_[i];
      for (std::size_t j = 0; j < b_.size(); ++j) {
        double p = a_[i][j] * box.lower(j), q = a_[i][j] * box.upper(j);
        hi += std::max(p, q);
        lo += std::min(p, q);
      }
      m = std::max({m, std::abs(hi), std::abs(lo)});
    }
    return m;
  }

 protected:
  void check_box(const HyperBox& box) const {
    if (box.dim() != dim()) throw InvalidArgument(name() + ": box dimension does not match model");
  }

 private:
  Matrix a_;
  Point b_;
  double norm1_ = 0.0;
  double norm_inf_ = 0.0;
};

inline ModelPtr make_affine(Matrix a, Point b) {
  return std::make_shared<AffineModel>(std::move(a), std::move(b));
}

// --- Cournot oligopoly ------------------------------------------------------

/// Price d_i(x) = a - b_ii x^i - sum_{j != i} b_ij x^j, payoff u_i = x^i d_i - c_i x^i.
struct CournotParams {
  double a = 1.0;
  Matrix b;
  Point c;

  /// b11 = b22 = 1, b12 = 0.2, b21 = 0.1, c = 0.5, a = 1.
  static CournotParams reference_duopoly() { return {1.0, {{1.0, 0.2}, {0.1, 1.0}}, {0.5, 0.5}}; }

  void validate() const {
    const std::size_t n = c.size();
    if (n == 0) throw InvalidArgument("cournot: need at least one firm");
    if (!std::isfinite(a)) throw InvalidArgument("cournot: a must be finite");
    if (b.size() != n) throw InvalidArgument("cournot: b must be an n x n matrix with n = len(c)");
    for (std::size_t i = 0; i < n; ++i) {
      if (b[i].size() != n) throw InvalidArgument("cournot: b must be square");
      for (double v : b[i]) {
        if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("cournot: b entries must be finite and >= 0");
      }
      if (!(b[i][i] > 0.0)) throw InvalidArgument("cournot: b_ii must be positive");
      if (!std::isfinite(c[i]) || c[i] < 0.0) throw InvalidArgument("cournot: costs must be finite and >= 0");
    }
  }

  double price(std::size_t i, std::span<const double> x) const {
    double d = a;
    for (std::size_t j = 0; j < c.size(); ++j) d -= b[i][j] * x[j];
    return d;
  }

  double payoff(std::size_t i, std::span<const double> x) const { return x[i] * price(i, x) - c[i] * x[i]; }
};

/// Individual gradient ascent on the Cournot payoffs:
/// F_i(x) = a - 2 b_ii x^i - sum_{j != i} b_ij x^j - c_i.
class CournotModel final : public AffineModel {
 public:
  explicit CournotModel(const CournotParams& p) : AffineModel(jacobian(p), offset(p)), params_(p) {}

  const CournotParams& params() const { return params_; }
  std::string name() const override { return "cournot"; }

 private:
  static Matrix jacobian(const CournotParams& p) {
    p.validate();
    const std::size_t n = p.c.size();
    Matrix a(n, Point(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a[i][j] = i == j ? -2.0 * p.b[i][i] : -p.b[i][j];
    }
    return a;
  }
  static Point offset(const CournotParams& p) {
    Point o(p.c.size());
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = p.a - p.c[i];
    return o;
  }

  CournotParams params_;
};

inline ModelPtr make_cournot(const CournotParams& p) { return std::make_shared<CournotModel>(p); }

// --- Finite-difference adapter ----------------------------------------------

/// Black-box rewards for all agents at a joint strategy. One call returns
/// R_1(x), ..., R_n(x).
struct PayoffOracle {
  AgentLayout layout = AgentLayout::scalar_agents(1);
  std::function<Point(std::span<const double>)> rewards;
  double delta = 0.1;
};

/// Forward differences of each agent's own reward:
/// F_d(x) = (R_i(x + delta e_d) - R_i(x)) / delta, with d owned by agent i.
class FiniteDifferenceModel final : public DynamicsModel {
 public:
  explicit FiniteDifferenceModel(PayoffOracle oracle) : oracle_(std::move(oracle)) {
    if (!(oracle_.delta > 0.0) || !std::isfinite(oracle_.delta)) {
      throw InvalidArgument("finite_difference: delta must be positive");
    }
    if (!oracle_.rewards) throw InvalidArgument("finite_difference: missing reward function");
  }

  std::size_t dim() const override { return oracle_.layout.total_dim(); }
  std::string name() const override { return "finite_difference"; }
  double delta() const { return oracle_.delta; }

  void evaluate(std::span<const double> x, std::span<double> out) const override {
    const Point base = call(x);
    Point shifted(x.begin(), x.end());
    for (std::size_t d = 0; d < dim(); ++d) {
      const std::size_t agent = oracle_.layout.unflatten(d).first;
      shifted[d] = x[d] + oracle_.delta;
      const Point moved = call(shifted);
      shifted[d] = x[d];
      out[d] = (moved[agent] - base[agent]) / oracle_.delta;
    }
  }

 private:
  Point call(std::span<const double> x) const {
    Point r;
    try {
      r = oracle_.rewards(x);
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(std::string("finite_difference: reward oracle failed: ") + e.what());
    }
    if (r.size() != oracle_.layout.agents()) {
      throw EvaluationError("finite_difference: oracle returned " + std::to_string(r.size()) +
                            " rewards for " + std::to_string(oracle_.layout.agents()) + " agents");
    }
    for (double v : r) {
      if (std::isnan(v)) throw EvaluationError("finite_difference: reward is NaN");
    }
    return r;
  }

  PayoffOracle oracle_;
};

inline ModelPtr make_finite_difference(PayoffOracle oracle) {
  return std::make_shared<FiniteDifferenceModel>(std::move(oracle));
}

// --- Ad-hoc models ----------------------------------------------------------

/// Wraps a callable. Bounds are optional constants valid on every box the
/// caller intends to verify.
class FunctionModel final : public DynamicsModel {
 public:
  using Fn = std::function<void(std::span<const double>, std::span<double>)>;

  FunctionModel(std::size_t n, Fn fn, std::optional<double> lipschitz = std::nullopt,
                std::optional<double> sup_norm = std::nullopt, std::string name = "function")
      : n_(n), fn_(std::move(fn)), lipschitz_(lipschitz), sup_(sup_norm), name_(std::move(name)) {
    if (n_ == 0) throw InvalidArgument("function model needs dimension >= 1");
    if (!fn_) throw InvalidArgument("function model needs a callable");
  }

  std::size_t dim() const override { return n_; }
  std::string name() const override { return name_; }
  void evaluate(std::span<const double> x, std::span<double> out) const override { fn_(x, out); }
  std::optional<double> lipschitz_upper(const HyperBox&) const override { return lipschitz_; }
  std::optional<double> sup_norm_upper(const HyperBox&) const override { return sup_; }

 private:
  std::size_t n_;
  Fn fn_;
  std::optional<double> lipschitz_;
  std::optional<double> sup_;
  std::string name_;
};

/// Tabulated F on a rectilinear grid, multilinear interpolation in between.
/// `values` is row-major over the axes (last axis fastest). Points outside
/// the grid cannot be evaluated.
class TableModel final : public DynamicsModel {
 public:
  TableModel(std::vector<Point> axes, std::vector<Point> values)
      : axes_(std::move(axes)), values_(std::move(values)) {
    if (axes_.empty()) throw InvalidArgument("external_table: need at least one axis");
    std::size_t total = 1;
    for (std::size_t d = 0; d < axes_.size(); ++d) {
      const Point& ax = axes_[d];
      if (ax.size() < 2) throw InvalidArgument("external_table: axis " + std::to_string(d + 1) + " needs >= 2 nodes");
      for (std::size_t k = 0; k < ax.size(); ++k) {
        if (!std::isfinite(ax[k]) || (k > 0 && !(ax[k] > ax[k - 1]))) {
          throw InvalidArgument("external_table: axis " + std::to_string(d + 1) + " must be finite and increasing");
        }
      }
      total *= ax.size();
    }
    if (values_.size() != total) {
      throw InvalidArgument("external_table: expected " + std::to_string(total) + " value rows, got " +
                            std::to_string(values_.size()));
    }
    for (const auto& v : values_) {
      if (v.size() != axes_.size()) throw InvalidArgument("external_table: every value row needs N entries");
      for (double e : v) {
        if (!std::isfinite(e)) throw InvalidArgument("external_table: non-finite value");
      }
    }
  }

  std::size_t dim() const override { return axes_.size(); }
  std::string name() const override { return "external_table"; }

  void evaluate(std::span<const double> x, std::span<double> out) const override {
    const std::size_t n = dim();
    std::vector<std::size_t> cell(n);
    std::vector<double> t(n);
    for (std::size_t d = 0; d < n; ++d) {
      const Point& ax = axes_[d];
      if (x[d] < ax.front() || x[d] > ax.back()) {
        throw EvaluationError("external_table: coordinate " + std::to_string(d + 1) + " outside the table");
      }
      auto it = std::upper_bound(ax.begin(), ax.end(), x[d]);
      std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - ax.begin() - 1, 0));
      k = std::min(k, ax.size() - 2);
      cell[d] = k;
      t[d] = (x[d] - ax[k]) / (ax[k + 1] - ax[k]);
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
      double w = 1.0;
      std::size_t flat = 0;
      for (std::size_t d = 0; d < n; ++d) {
        const bool up = (corner >> d) & 1U;
        w *= up ? t[d] : 1.0 - t[d];
        flat = flat * axes_[d].size() + cell[d] + (up ? 1 : 0);
      }
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) out[i] += w * values_[flat][i];
    }
  }

 private:
  std::vector<Point> axes_;
  std::vector<Point> values_;
};

}  // namespace trapping

#endif  // TRAPPING_DYNAMICS_HPP
