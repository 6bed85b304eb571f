#pragma once

#include <vector>

#include "qoc/controls.hpp"
#include "qoc/model.hpp"
#include "qoc/objective.hpp"
#include "qoc/propagation.hpp"

namespace qoc {

/// Everything fixed during one optimization run: operators, control layout,
/// time grid, target gate, penalty coefficient and regularization. Immutable
/// after construction and safe to share across worker threads.
struct Problem {
  Model model;
  ControlParameterization param;
  WindowGrid grid;
  ComplexMatrix target;
  double mu = 0.0;
  Regularization reg;
  AdjointStorage storage = AdjointStorage::Store;
  int columns_per_block = 0;  // 0 means one block spanning all n columns

  int dim() const { return model.dim; }
  int num_blocks() const {
    const int b = columns_per_block > 0 ? columns_per_block : model.dim;
    return model.dim / b;
  }
  int block_width() const { return columns_per_block > 0 ? columns_per_block : model.dim; }
};

/// Assembles an ObjectiveReport from the final-window infidelity and the
/// per-window constraint norms (ordered m ascending); shared by the
/// sequential and the task-parallel evaluation paths so both produce
/// identical floating-point results.
ObjectiveReport finalize_report(const Problem& problem, const RealVector& alpha, double j_final,
                                std::vector<double> constraint_norms);

/// Quadratic-penalty objective
///   J_V(U^M) + (mu/2) sum ||U^m - W^m||_F^2 + gamma_tik ||a||^2 + gamma_E E(a),
/// evaluated by plain single-threaded window-by-window propagation. This is
/// the brute-force reference path the parallel evaluator is tested against.
ObjectiveReport penalty_objective(const Problem& problem, const RealVector& alpha,
                                  const std::vector<ComplexMatrix>& windows);

}  // namespace qoc
