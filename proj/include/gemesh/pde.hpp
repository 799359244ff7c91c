#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "gemesh/cotan.hpp"
#include "gemesh/mesh.hpp"

namespace gemesh {

// Time-stacked scalar fields: row t holds the field after t steps, so a run
// of num_steps steps yields num_steps + 1 rows.
using Frames = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct StableDt {
  double dt = 0.0;
  double lambda_max = 0.0;  // top eigenvalue of -L, via its symmetrization
  bool stalled = false;     // power iteration had not settled after 100 steps
};

// Largest explicit-Euler step scaled by the safety factor:
// diffusion dt = safety * 2 / (alpha * lambda_max),
// wave dt = safety * 2 / (speed * sqrt(lambda_max)).
// A stalled estimate is flagged, not fatal; the dt is still returned.
StableDt stable_dt_heat(const CotanOperator& op, double alpha, double safety = 0.5);
StableDt stable_dt_wave(const CotanOperator& op, double speed, double safety = 0.5);

// Background plus Gaussian bumps centered on round(fraction * V) distinct
// vertices: u_i = background + sum_c amplitude * exp(-|x_i - x_c|^2 / (2 w^2)).
// width <= 0 selects twice the mean edge length.
Vec gaussian_bump_init(const Mesh& mesh, double fraction, uint64_t seed,
                       double amplitude = 1.0, double width = 0.0,
                       double background = 0.0);

// u^{t+1} = u^t + dt * alpha * L u^t
Frames simulate_heat(const CotanOperator& op, const Vec& u0, double alpha,
                     double dt, int num_steps);

// v^{t+1} = v^t + dt * speed^2 * L u^t; u^{t+1} = u^t + dt * v^t.
// The displacement update uses the stale velocity (plain forward Euler);
// leapfrog = true uses the fresh one instead. final_velocity, when given,
// receives v after the last step so a caller can reverse the integration.
Frames simulate_wave(const CotanOperator& op, const Vec& u0, const Vec& v0,
                     double speed, double dt, int num_steps,
                     bool leapfrog = false, Vec* final_velocity = nullptr);

// Phase separation c_t = M * L(f'(c) - lambda * L c) with the double-well
// derivative f'(c) = 200 c - 400 c^3. The stiff biharmonic term is implicit:
//   (I + dt M lambda L^2) c^{t+1} = c^t + dt M L f'(c^t),
// solved in the area-scaled symmetric positive definite form
//   (D + dt M lambda W D^{-1} W) c^{t+1} = D c^t + dt M W f'(c^t),
// D = diag(2 A_i), by conjugate gradients (relative tolerance 1e-10, at most
// 10 |V| iterations). Conserves sum A_i c_i to the solver tolerance.
Frames simulate_cahn_hilliard(const CotanOperator& op, const Vec& c0,
                              double mobility, double lambda, double dt,
                              int num_steps);

}  // namespace gemesh
