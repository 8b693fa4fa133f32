#pragma once

#include "vrsg/problem.hpp"

namespace vrsg {

/// Euclidean projection onto {w : ||w||_1 <= tau} by sort-and-threshold.
/// Returns v unchanged (bitwise) when it is already inside the ball.
Vector project_l1_ball(const Vector& v, double tau);

Vector project_box(const Vector& v, const Vector& lower, const Vector& upper);

// sign(v_i) * max(|v_i| - threshold, 0)
Vector prox_l1(const Vector& v, double threshold);

Vector project(const ConstraintSpec& constraint, const Vector& v);

bool is_feasible(const ConstraintSpec& constraint, const Vector& w, double tolerance = 1e-10);

// Euclidean diameter of the set (2 tau for the l1 ball, ||u - l|| for the box).
double diameter(const ConstraintSpec& constraint);

/// The projection (constrained) or proximal (regularized) step
/// w <- P(w - eta * v) used by every first-order solver here.
Vector proximal_step(const Problem& problem, const Vector& point, double eta);

}  // namespace vrsg
