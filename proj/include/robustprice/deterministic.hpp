#pragma once

// Optimal deterministic posted prices: closed forms for the regular and mhr
// classes, and a one-dimensional search for any alpha in [0,1].

#include "robustprice/worstcase.hpp"

namespace robustprice {

enum class Regime { LowQ, MidQ, HighQ };
enum class SolveMethod { ClosedForm, Search };

const char* to_string(Regime regime);
const char* to_string(SolveMethod method);

struct DeterministicSolution {
  double price;
  double ratio;
  Regime regime;
  SolveMethod method;
};

DeterministicSolution solve_regular(double w, double q);

DeterministicSolution solve_mhr(double w, double q);

/// Searches p in [r_l/w, 1] for the best minimum of the three worst-case
/// regimes. Validated against the closed forms, not proven globally optimal.
DeterministicSolution solve_general(const PricingContext& ctx, double tol = 1e-10);

/// Dispatches to the closed form for alpha in {0,1} and to the search otherwise.
DeterministicSolution solve_deterministic(const PricingContext& ctx);

/// Minimizer over r in [r_l, p] of p * hbar(p | (r,1), (1,q)) / r, normalized w = 1.
double mu(Alpha alpha, double q, double p);

/// Threshold between the low and middle mhr regimes, where
/// W(1/log(1/q)) * W(e/q) = 1. Computed once.
double mhr_q_hat();

/// beta_q(x) = 1 - (W(x) + 1/W(x) - 2) / log(1/q).
double mhr_beta(double q, double x);

}  // namespace robustprice
