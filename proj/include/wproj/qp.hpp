#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

namespace wproj {

// minimize 1/2 x'Px + a'x  subject to  Cx >= b.
struct QuadraticProgram {
  Eigen::SparseMatrix<double> P;  // n x n, symmetric PSD
  Eigen::VectorXd a;              // n
  Eigen::SparseMatrix<double> C;  // m x n (m may be 0)
  Eigen::VectorXd b;              // m
};

enum class SolveStatus { Optimal, MaxIter, Infeasible };
const char* to_string(SolveStatus s);

struct SolverReport {
  int iterations = 0;
  double primal_residual = 0;
  double dual_residual = 0;
  double objective = 0;
  SolveStatus status = SolveStatus::MaxIter;
};

struct SolverConfig {
  double tol = 1e-9;
  int max_iter = 50000;
  double rho0 = 0.1;       // initial ADMM penalty
  double sigma = 1e-6;     // proximal regularization
  double alpha = 1.6;      // over-relaxation
  bool polish = true;      // active-set KKT refinement of the ADMM point
  // Warm start (sizes must match n and m when non-empty).
  std::vector<double> warm_x;
  std::vector<double> warm_y;
  // Optional initial guess of the active rows (size m).  When given, the
  // polish step runs once before the splitting iterations; an exact KKT
  // solution from the guessed set returns immediately.
  std::vector<char> warm_active;
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // multipliers of Cx >= b, y >= 0
  SolverReport report;
};

// Operator-splitting (ADMM) solve with adaptive penalty and a final
// active-set polish.  Deterministic; exploits sparsity of P and C, so the
// banded cone constraints of the fitting problems factor in O(n).
QpSolution solve_qp(const QuadraticProgram& qp, const SolverConfig& cfg = {});

}  // namespace wproj
