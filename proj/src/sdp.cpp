#include "probedesign/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "probedesign/errors.hpp"

namespace probedesign {

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kInfeasible:
      return "infeasible";
    case SolverStatus::kUnbounded:
      return "unbounded";
    case SolverStatus::kMaxIterations:
      return "max_iterations";
    case SolverStatus::kNumerical:
      return "numerical";
  }
  return "unknown";
}

double QuadForm::evaluate(const VectorXd& u) const {
  const Eigen::Index T = M.rows() - 1;
  if (u.size() != T) throw DimensionMismatch("QuadForm: input length mismatch");
  return u.dot(M.topLeftCorner(T, T) * u) + 2.0 * u.dot(M.col(T).head(T)) +
         M(T, T);
}

double QuadForm::trace_with(const MatrixXd& U) const {
  return M.cwiseProduct(U).sum();
}

Eigen::Index SdpProblem::dim() const {
  return objective.empty() ? 0 : objective.front().M.rows();
}

void SdpProblem::validate() const {
  if (objective.empty()) {
    throw InvalidParameter("SDP needs at least one objective piece");
  }
  const Eigen::Index n = dim();
  if (n < 1) throw InvalidParameter("SDP dimension must be >= 1");
  auto check = [n](const QuadForm& q) {
    if (q.M.rows() != n || q.M.cols() != n) {
      throw DimensionMismatch("SDP pieces must all be (T+1)x(T+1)");
    }
    const double scale = std::max(1.0, q.M.cwiseAbs().maxCoeff());
    if ((q.M - q.M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw InvalidParameter("SDP pieces must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(q.M, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-9 * scale) {
      throw InvalidParameter("SDP pieces must be positive semidefinite");
    }
  };
  for (const auto& q : objective) check(q);
  for (const auto& q : constraints) check(q);
}

double SdpProblem::objective_value(const MatrixXd& U) const {
  double best = objective.front().trace_with(U);
  for (const auto& p : objective) {
    const double v = p.trace_with(U);
    best = minimize() ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

double SdpProblem::objective_value_at(const VectorXd& u) const {
  double best = objective.front().evaluate(u);
  for (const auto& p : objective) {
    const double v = p.evaluate(u);
    best = minimize() ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

std::size_t SdpProblem::active_objective(const MatrixXd& U) const {
  std::size_t arg = 0;
  double best = objective.front().trace_with(U);
  for (std::size_t l = 1; l < objective.size(); ++l) {
    const double v = objective[l].trace_with(U);
    if (minimize() ? v > best : v < best) {
      best = v;
      arg = l;
    }
  }
  return arg;
}

double SdpProblem::min_constraint_slack(const MatrixXd& U) const {
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& r : constraints) {
    const double v = r.trace_with(U);
    slack = std::min(slack, minimize() ? v - bound : bound - v);
  }
  return slack;
}

double SdpProblem::min_constraint_slack_at(const VectorXd& u) const {
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& r : constraints) {
    const double v = r.evaluate(u);
    slack = std::min(slack, minimize() ? v - bound : bound - v);
  }
  return slack;
}

int numerical_rank(const MatrixXd& U, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(U, Eigen::EigenvaluesOnly);
  const VectorXd& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  if (top <= 0.0) return 0;
  return static_cast<int>((ev.array() > rel_tol * top).count());
}

void factor_solution(SdpSolution& sol) {
  const Eigen::Index T = sol.U.rows() - 1;
  sol.rank = numerical_rank(sol.U);
  sol.q_star = sol.U.col(T).head(T);
  const MatrixXd S =
      sol.U.topLeftCorner(T, T) - sol.q_star * sol.q_star.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  // A rank-r U leaves a rank-(r-1) Schur complement; anything beyond that is
  // solver noise.
  const int keep_max = std::max(0, sol.rank - 1);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = T - 1; i >= 0 && static_cast<int>(cols.size()) < keep_max;
       --i) {
    if (es.eigenvalues()(i) > 1e-10) cols.push_back(i);
  }
  sol.Q_star.resize(T, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    sol.Q_star.col(static_cast<Eigen::Index>(c)) =
        es.eigenvectors().col(cols[c]) * std::sqrt(es.eigenvalues()(cols[c]));
  }
}

namespace {

// One equality row <A_i, Xs> + <al_i, xl> = b_i of the standard-form problem.
// A_i is kept both dense and as a factor F with A_i = F F'.
struct Row {
  MatrixXd dense;
  MatrixXd factor;
};

MatrixXd psd_factor(const MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  const VectorXd& ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 1e-14 * top && ev(i) > 0.0) cols.push_back(i);
  }
  MatrixXd F(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    F.col(static_cast<Eigen::Index>(c)) =
        es.eigenvectors().col(cols[c]) * std::sqrt(ev(cols[c]));
  }
  return F;
}

// min <C, X> s.t. <A_i, Xs> + Al(i,:) xl = b_i,  Xs psd, xl >= 0.
struct StandardForm {
  std::vector<Row> rows;
  MatrixXd Al;  // m x nl
  VectorXd b;
  VectorXd cl;  // the semidefinite block has zero cost
  Eigen::Index n = 0;
};

struct IpmResult {
  MatrixXd X;
  VectorXd xl;
  VectorXd y;
  double pobj = 0.0;
  double dobj = 0.0;
  double gap = 0.0;
  double pinf = 0.0;
  double dinf = 0.0;
  int iterations = 0;
};

// Largest step alpha with X + alpha dX psd (infinity if unrestricted).
double max_step_psd(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& dX) {
  MatrixXd W = chol.matrixL().solve(dX);
  W = chol.matrixL().solve(W.transpose()).transpose();
  W = (0.5 * (W + W.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(W, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double max_step_lp(const VectorXd& x, const VectorXd& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  }
  return a;
}

class InteriorPoint {
 public:
  InteriorPoint(const StandardForm& sf, const SdpOptions& opt)
      : sf_(sf), opt_(opt), m_(static_cast<Eigen::Index>(sf.rows.size())) {}

  IpmResult run() {
    const Eigen::Index n = sf_.n;
    const Eigen::Index nl = sf_.cl.size();
    const double total_dim = static_cast<double>(n + nl);

    double max_a = 0.0;
    double max_ratio = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double na = std::sqrt(sf_.rows[i].dense.squaredNorm() +
                                  sf_.Al.row(i).squaredNorm());
      max_a = std::max(max_a, na);
      max_ratio = std::max(max_ratio, (1.0 + std::abs(sf_.b(i))) / (1.0 + na));
    }
    const double xi = std::max({10.0, std::sqrt(static_cast<double>(n)),
                                static_cast<double>(n) * max_ratio});
    const double eta = std::max({10.0, std::sqrt(static_cast<double>(n)), max_a,
                                 sf_.cl.norm()});

    MatrixXd X = xi * MatrixXd::Identity(n, n);
    VectorXd xl = VectorXd::Constant(nl, xi);
    MatrixXd Z = eta * MatrixXd::Identity(n, n);
    VectorXd zl = VectorXd::Constant(nl, eta);
    VectorXd y = VectorXd::Zero(m_);

    const double bnorm = sf_.b.norm();
    const double cnorm = sf_.cl.norm();
    IpmResult res;
    int stalled = 0;

    for (int iter = 0; iter <= opt_.max_iterations; ++iter) {
      // Residuals.
      const VectorXd AX = apply(X) + sf_.Al * xl;
      const VectorXd rp = sf_.b - AX;
      MatrixXd Rd = -Z - adjoint(y);
      const VectorXd rdl = sf_.cl - zl - sf_.Al.transpose() * y;
      const double pobj = sf_.cl.dot(xl);
      const double dobj = sf_.b.dot(y);
      const double mu = (X.cwiseProduct(Z).sum() + xl.dot(zl)) / total_dim;

      res.pobj = pobj;
      res.dobj = dobj;
      res.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      res.pinf = rp.norm() / (1.0 + bnorm);
      res.dinf = std::sqrt(Rd.squaredNorm() + rdl.squaredNorm()) / (1.0 + cnorm);
      res.iterations = iter;
      const double compl_gap =
          mu * total_dim / (1.0 + std::abs(pobj) + std::abs(dobj));
      if (res.gap <= opt_.gap_tol && compl_gap <= opt_.gap_tol &&
          res.pinf <= opt_.feas_tol && res.dinf <= opt_.feas_tol) {
        res.X = X;
        res.xl = xl;
        res.y = y;
        return res;
      }
      if (iter == opt_.max_iterations) break;
      if (!X.allFinite() || !Z.allFinite() || X.norm() > 1e14 * xi) {
        throw SolverError(SolverStatus::kUnbounded,
                          "interior-point iterates diverged");
      }

      Eigen::LLT<MatrixXd> zchol(Z);
      Eigen::LLT<MatrixXd> xchol(X);
      if (zchol.info() != Eigen::Success || xchol.info() != Eigen::Success) {
        throw SolverError(SolverStatus::kNumerical,
                          "iterate lost positive definiteness");
      }
      const MatrixXd Zinv = zchol.solve(MatrixXd::Identity(n, n));

      // Schur complement M_ij = Tr(A_i X A_j Z^-1) + LP part.
      MatrixXd M = schur(X, Zinv);
      const VectorXd d = xl.cwiseQuotient(zl);
      M += sf_.Al * d.asDiagonal() * sf_.Al.transpose();
      Eigen::LDLT<MatrixXd> ldlt(M);
      if (ldlt.info() != Eigen::Success) {
        throw SolverError(SolverStatus::kNumerical,
                          "Schur complement factorization failed");
      }

      const MatrixXd XRdZ = X * Rd * Zinv;
      const VectorXd xrdl = xl.cwiseProduct(rdl).cwiseQuotient(zl);

      // Predictor (affine scaling) direction.
      auto direction = [&](const MatrixXd& compl_s, const VectorXd& compl_l,
                           MatrixXd& dX, VectorXd& dxl, VectorXd& dy,
                           MatrixXd& dZ, VectorXd& dzl) {
        // compl_s stands for (sigma mu I - corrections) Z^-1.
        const MatrixXd Ws = compl_s - X - XRdZ;
        const VectorXd wl = compl_l - xl - xrdl;
        const VectorXd h = rp - apply(Ws) - sf_.Al * wl;
        dy = ldlt.solve(h);
        dZ = Rd - adjoint(dy);
        dzl = rdl - sf_.Al.transpose() * dy;
        dX = compl_s - X - X * dZ * Zinv;
        dX = (0.5 * (dX + dX.transpose())).eval();
        dxl = compl_l - xl - xl.cwiseProduct(dzl).cwiseQuotient(zl);
      };

      MatrixXd dXp, dZp;
      VectorXd dxlp, dyp, dzlp;
      direction(MatrixXd::Zero(n, n), VectorXd::Zero(nl), dXp, dxlp, dyp, dZp,
                dzlp);
      const double ap = std::min(
          {1.0, max_step_psd(xchol, dXp), max_step_lp(xl, dxlp)});
      const double ad = std::min(
          {1.0, max_step_psd(zchol, dZp), max_step_lp(zl, dzlp)});
      const double mu_aff = ((X + ap * dXp).cwiseProduct(Z + ad * dZp).sum() +
                             (xl + ap * dxlp).dot(zl + ad * dzlp)) /
                            total_dim;
      const double ratio = std::clamp(mu_aff / mu, 0.0, 1.0);
      const double sigma = std::min(1.0, ratio * ratio * ratio);

      // Corrector.
      const MatrixXd compl_s =
          (sigma * mu * MatrixXd::Identity(n, n) - dXp * dZp) * Zinv;
      const VectorXd compl_l =
          (VectorXd::Constant(nl, sigma * mu) - dxlp.cwiseProduct(dzlp))
              .cwiseQuotient(zl);
      MatrixXd dX, dZ;
      VectorXd dxl, dy, dzl;
      direction(compl_s, compl_l, dX, dxl, dy, dZ, dzl);

      const double step_p_max =
          std::min(max_step_psd(xchol, dX), max_step_lp(xl, dxl));
      const double step_d_max =
          std::min(max_step_psd(zchol, dZ), max_step_lp(zl, dzl));
      const double tau = 0.9 + 0.09 * std::min(ap, ad);
      const double step_p = std::min(1.0, tau * step_p_max);
      const double step_d = std::min(1.0, tau * step_d_max);

      stalled = (step_p < 1e-8 && step_d < 1e-8) ? stalled + 1 : 0;
      if (stalled >= 3) {
        throw SolverError(SolverStatus::kNumerical,
                          "interior-point steps stalled");
      }

      X += step_p * dX;
      xl += step_p * dxl;
      y += step_d * dy;
      Z += step_d * dZ;
      zl += step_d * dzl;
      X = (0.5 * (X + X.transpose())).eval();
      Z = (0.5 * (Z + Z.transpose())).eval();
    }
    std::ostringstream msg;
    msg << "no convergence in " << opt_.max_iterations
        << " iterations (gap " << res.gap << ", primal infeasibility "
        << res.pinf << ", dual infeasibility " << res.dinf << ")";
    throw SolverError(SolverStatus::kMaxIterations, msg.str());
  }

 private:
  VectorXd apply(const MatrixXd& W) const {
    VectorXd out(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      out(i) = sf_.rows[i].dense.cwiseProduct(W).sum();
    }
    return out;
  }

  MatrixXd adjoint(const VectorXd& y) const {
    MatrixXd S = MatrixXd::Zero(sf_.n, sf_.n);
    for (Eigen::Index i = 0; i < m_; ++i) S += y(i) * sf_.rows[i].dense;
    return S;
  }

  MatrixXd schur(const MatrixXd& X, const MatrixXd& Zinv) const {
    std::vector<MatrixXd> XF(m_), ZF(m_);
    for (Eigen::Index j = 0; j < m_; ++j) {
      XF[j] = X * sf_.rows[j].factor;
      ZF[j] = Zinv * sf_.rows[j].factor;
    }
    MatrixXd M(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const MatrixXd& Fi = sf_.rows[i].factor;
      for (Eigen::Index j = 0; j <= i; ++j) {
        // Tr(Fi' X Fj Fj' Zinv Fi) = <Fi' X Fj, Fi' Zinv Fj>.
        const double v = (Fi.transpose() * XF[j])
                             .cwiseProduct(Fi.transpose() * ZF[j])
                             .sum();
        M(i, j) = v;
        M(j, i) = v;
      }
    }
    return M;
  }

  const StandardForm& sf_;
  const SdpOptions& opt_;
  Eigen::Index m_;
};

struct Reduction {
  MatrixXd basis;  // (T+1) x (s+1), last column e_{T+1}
  SdpProblem problem;
};

// Restricts every piece to the input directions some piece depends on.
Reduction reduce_problem(const SdpProblem& p) {
  const Eigen::Index n = p.dim();
  const Eigen::Index T = n - 1;
  MatrixXd W = MatrixXd::Zero(T, T);
  auto add = [&](const QuadForm& q) {
    const double s = q.M.norm();
    if (s > 0.0) W += q.M.topLeftCorner(T, T) / s;
  };
  for (const auto& q : p.objective) add(q);
  for (const auto& q : p.constraints) add(q);

  std::vector<Eigen::Index> keep;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  if (T > 0) {
    es.compute(W);
    const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < T; ++i) {
      if (es.eigenvalues()(i) > 1e-12 * top && es.eigenvalues()(i) > 0.0) {
        keep.push_back(i);
      }
    }
  }
  const auto s = static_cast<Eigen::Index>(keep.size());
  Reduction r;
  r.basis = MatrixXd::Zero(n, s + 1);
  if (s == T) {
    r.basis.topLeftCorner(T, T).setIdentity();
  } else {
    for (Eigen::Index c = 0; c < s; ++c) {
      r.basis.col(c).head(T) = es.eigenvectors().col(keep[c]);
    }
  }
  r.basis(T, s) = 1.0;

  r.problem.sense = p.sense;
  r.problem.bound = p.bound;
  auto project = [&](const QuadForm& q) {
    MatrixXd M = r.basis.transpose() * q.M * r.basis;
    return QuadForm{0.5 * (M + M.transpose())};
  };
  for (const auto& q : p.objective) r.problem.objective.push_back(project(q));
  for (const auto& q : p.constraints) r.problem.constraints.push_back(project(q));
  return r;
}

bool is_constant_piece(const QuadForm& q) {
  const Eigen::Index s = q.M.rows() - 1;
  return q.M.topLeftCorner(s, s).norm() <= 1e-13 * std::max(1.0, q.M.norm());
}

// Sum of the input blocks of `pieces` is positive definite on the reduced
// space.
bool controls_every_direction(const std::vector<QuadForm>& pieces,
                              Eigen::Index s) {
  if (s == 0) return true;
  MatrixXd W = MatrixXd::Zero(s, s);
  for (const auto& q : pieces) {
    const double nq = q.M.norm();
    if (nq > 0.0) W += q.M.topLeftCorner(s, s) / nq;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(W, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) > 1e-10 * std::max(1.0, es.eigenvalues()(s - 1));
}

SdpSolution solve_reduced(const SdpProblem& p, const SdpOptions& opt);

SdpSolution solve_impl(const SdpProblem& problem, const SdpOptions& opt) {
  Reduction red = reduce_problem(problem);
  SdpProblem& p = red.problem;
  const Eigen::Index s = red.basis.cols() - 1;

  // Constraints that do not depend on u are either always met or never met.
  std::vector<QuadForm> live;
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    const QuadForm& q = p.constraints[k];
    if (!is_constant_piece(q)) {
      live.push_back(q);
      continue;
    }
    const double value = q.M(s, s);
    const bool ok = p.minimize() ? value >= p.bound : value <= p.bound;
    if (!ok) {
      std::ostringstream msg;
      msg << "constraint " << k << " is independent of the input and has value "
          << value << (p.minimize() ? " < " : " > ") << p.bound;
      throw SolverError(SolverStatus::kInfeasible, msg.str());
    }
  }
  p.constraints = std::move(live);

  const std::vector<QuadForm>& cost_side =
      p.minimize() ? p.objective : p.constraints;
  if (!controls_every_direction(cost_side, s)) {
    throw SolverError(
        SolverStatus::kUnbounded,
        p.minimize()
            ? "objective does not penalize every input direction the "
              "constraints use; the optimum is not attained"
            : "constraints do not bound every input direction the objective "
              "rewards");
  }

  if (!p.minimize()) {
    // U = e e' is strictly feasible unless some constraint already binds at
    // u = 0; otherwise certify feasibility with a phase-one problem.
    bool strict = true;
    for (const auto& q : p.constraints) strict &= q.M(s, s) < p.bound;
    if (!strict) {
      SdpProblem phase1;
      phase1.sense = SdpSense::kMinimizeMax;
      phase1.objective = p.constraints;
      const SdpSolution ph = solve_reduced(phase1, opt);
      if (ph.dual_objective > p.bound * (1.0 + 1e-7) + 1e-12) {
        std::ostringstream msg;
        msg << "constraints cannot hold simultaneously: the smallest "
               "achievable max constraint value is at least "
            << ph.dual_objective << " > " << p.bound;
        throw SolverError(SolverStatus::kInfeasible, msg.str());
      }
    }
  }

  SdpSolution sol = solve_reduced(p, opt);
  MatrixXd U = red.basis * sol.U * red.basis.transpose();
  sol.U = 0.5 * (U + U.transpose());
  sol.objective = problem.objective_value(sol.U);
  return sol;
}

SdpSolution solve_reduced(const SdpProblem& p, const SdpOptions& opt) {
  const Eigen::Index n = p.dim();
  const auto L = static_cast<Eigen::Index>(p.objective.size());
  const auto K = static_cast<Eigen::Index>(p.constraints.size());
  const Eigen::Index nl = 1 + L + K;
  const Eigen::Index m = L + K + 1;

  double obj_scale = 0.0;
  for (const auto& q : p.objective) obj_scale = std::max(obj_scale, q.M.norm());
  obj_scale = obj_scale > 0.0 ? 1.0 / obj_scale : 1.0;

  StandardForm sf;
  sf.n = n;
  sf.rows.resize(static_cast<std::size_t>(m));
  sf.Al = MatrixXd::Zero(m, nl);
  sf.b = VectorXd::Zero(m);
  sf.cl = VectorXd::Zero(nl);
  const double sign = p.minimize() ? 1.0 : -1.0;
  sf.cl(0) = sign;  // t

  for (Eigen::Index l = 0; l < L; ++l) {
    sf.rows[l].dense = p.objective[l].M * obj_scale;
    sf.Al(l, 0) = -1.0;
    sf.Al(l, 1 + l) = sign;
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    const double nk = p.constraints[k].M.norm();
    const double scale = nk > 0.0 ? 1.0 / nk : 1.0;
    sf.rows[L + k].dense = p.constraints[k].M * scale;
    sf.Al(L + k, 1 + L + k) = -sign;
    sf.b(L + k) = p.bound * scale;
  }
  sf.rows[m - 1].dense = MatrixXd::Zero(n, n);
  sf.rows[m - 1].dense(n - 1, n - 1) = 1.0;
  sf.b(m - 1) = 1.0;
  for (auto& row : sf.rows) row.factor = psd_factor(row.dense);

  InteriorPoint ipm(sf, opt);
  const IpmResult r = ipm.run();

  SdpSolution sol;
  sol.U = 0.5 * (r.X + r.X.transpose());
  sol.objective = sign * r.pobj / obj_scale;
  sol.dual_objective = sign * r.dobj / obj_scale;
  sol.duality_gap = r.gap;
  sol.primal_infeasibility = r.pinf;
  sol.dual_infeasibility = r.dinf;
  sol.iterations = r.iterations;
  return sol;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
  problem.validate();
  SdpSolution sol = solve_impl(problem, options);
  factor_solution(sol);
  sol.rank_history = {sol.rank};
  return sol;
}

}  // namespace probedesign
