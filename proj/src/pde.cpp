#include "gemesh/pde.hpp"

#include <cmath>
#include <string>

#include "gemesh/errors.hpp"
#include "gemesh/rng.hpp"

namespace gemesh {

namespace {

// A frame counts as diverged well before producing inf/nan so the failing
// step is reported, not the step after it.
void check_finite(const Vec& u, int step) {
  check(u.allFinite() && u.cwiseAbs().maxCoeff() < 1e100, Err::Diverged,
        "field blew up at step " + std::to_string(step));
}

StableDt estimate_lambda_max(const CotanOperator& op) {
  // power iteration on -D^{-1/2} W D^{-1/2}, which is symmetric positive
  // semidefinite and similar to -L, so the top eigenvalue matches
  const Vec sqrt_d = (2.0 * op.vertex_areas().array()).sqrt();
  Rng rng(0x9e3779b97f4a7c15ull);
  Vec x(op.num_vertices());
  for (int i = 0; i < x.size(); ++i) x(i) = rng.normal();
  x /= x.norm();

  StableDt out;
  out.stalled = true;
  double prev = 0.0;
  for (int it = 0; it < 100; ++it) {
    Vec y = -op.apply_weights((x.array() / sqrt_d.array()).matrix());
    y.array() /= sqrt_d.array();
    const double lambda = x.dot(y);
    const double norm = y.norm();
    if (!(norm > 0.0) || !std::isfinite(lambda)) break;
    x = y / norm;
    out.lambda_max = lambda;
    if (it + 1 == 100) out.stalled = std::abs(lambda - prev) > 1e-2 * std::abs(lambda);
    prev = lambda;
  }
  return out;
}

}  // namespace

StableDt stable_dt_heat(const CotanOperator& op, double alpha, double safety) {
  StableDt out = estimate_lambda_max(op);
  check(alpha > 0.0 && out.lambda_max > 0.0, Err::Diverged,
        "no stable step: alpha and lambda_max must be positive");
  out.dt = safety * 2.0 / (alpha * out.lambda_max);
  return out;
}

StableDt stable_dt_wave(const CotanOperator& op, double speed, double safety) {
  StableDt out = estimate_lambda_max(op);
  check(speed > 0.0 && out.lambda_max > 0.0, Err::Diverged,
        "no stable step: speed and lambda_max must be positive");
  out.dt = safety * 2.0 / (speed * std::sqrt(out.lambda_max));
  return out;
}

Vec gaussian_bump_init(const Mesh& mesh, double fraction, uint64_t seed,
                       double amplitude, double width, double background) {
  const int V = mesh.num_vertices();
  check(fraction >= 0.0 && fraction <= 1.0, Err::BadConfig,
        "bump fraction must lie in [0, 1]");
  if (width <= 0.0) width = 2.0 * mesh.mean_edge_length();
  const int count = static_cast<int>(std::lround(fraction * V));

  Rng rng(seed);
  const std::vector<int> centers = rng.sample_without_replacement(V, count);

  Vec u = Vec::Constant(V, background);
  const double inv = 1.0 / (2.0 * width * width);
  for (int c : centers) {
    const Eigen::Vector3d xc = mesh.vertices.row(c);
    for (int i = 0; i < V; ++i) {
      const double d2 = (mesh.vertices.row(i).transpose() - xc).squaredNorm();
      u(i) += amplitude * std::exp(-d2 * inv);
    }
  }
  return u;
}

Frames simulate_heat(const CotanOperator& op, const Vec& u0, double alpha,
                     double dt, int num_steps) {
  check(num_steps >= 0, Err::BadConfig, "negative step count");
  check(dt > 0.0, Err::BadConfig, "time step must be positive");
  Frames frames(num_steps + 1, op.num_vertices());
  Vec u = u0;
  check_finite(u, 0);
  frames.row(0) = u;
  for (int t = 1; t <= num_steps; ++t) {
    u += dt * alpha * op.apply(u);
    check_finite(u, t);
    frames.row(t) = u;
  }
  return frames;
}

Frames simulate_wave(const CotanOperator& op, const Vec& u0, const Vec& v0,
                     double speed, double dt, int num_steps, bool leapfrog,
                     Vec* final_velocity) {
  check(num_steps >= 0, Err::BadConfig, "negative step count");
  check(dt > 0.0, Err::BadConfig, "time step must be positive");
  Frames frames(num_steps + 1, op.num_vertices());
  Vec u = u0;
  Vec v = v0;
  check_finite(u, 0);
  frames.row(0) = u;
  const double c2 = speed * speed;
  for (int t = 1; t <= num_steps; ++t) {
    const Vec v_old = v;
    v += dt * c2 * op.apply(u);
    u += dt * (leapfrog ? v : v_old);
    check_finite(u, t);
    frames.row(t) = u;
  }
  if (final_velocity) *final_velocity = v;
  return frames;
}

Frames simulate_cahn_hilliard(const CotanOperator& op, const Vec& c0,
                              double mobility, double lambda, double dt,
                              int num_steps) {
  check(num_steps >= 0, Err::BadConfig, "negative step count");
  check(dt > 0.0 && lambda > 0.0, Err::BadConfig,
        "time step and interface coefficient must be positive");
  const int V = op.num_vertices();
  const Vec d = 2.0 * op.vertex_areas();
  const double scale = dt * mobility * lambda;
  const auto system_apply = [&](const Vec& x) -> Vec {
    const Vec wx = op.apply_weights(x);
    return (d.array() * x.array()).matrix() +
           scale * op.apply_weights((wx.array() / d.array()).matrix());
  };

  Frames frames(num_steps + 1, V);
  Vec c = c0;
  check_finite(c, 0);
  frames.row(0) = c;
  const int max_iters = 10 * V;
  for (int t = 1; t <= num_steps; ++t) {
    const Vec fprime = 200.0 * c.array() - 400.0 * c.array().cube();
    const Vec rhs =
        (d.array() * c.array()).matrix() + dt * mobility * op.apply_weights(fprime);

    // conjugate gradients, warm-started from the previous frame
    Vec x = c;
    Vec r = rhs - system_apply(x);
    Vec p = r;
    double rr = r.squaredNorm();
    const double tol2 = 1e-20 * rhs.squaredNorm();
    int it = 0;
    while (rr > tol2) {
      check(it < max_iters, Err::CGNoConvergence,
            "step " + std::to_string(t) + ": residual " +
                std::to_string(std::sqrt(rr / rhs.squaredNorm())) + " after " +
                std::to_string(it) + " iterations");
      const Vec ap = system_apply(p);
      const double alpha = rr / p.dot(ap);
      x += alpha * p;
      r -= alpha * ap;
      const double rr_next = r.squaredNorm();
      p = r + (rr_next / rr) * p;
      rr = rr_next;
      ++it;
    }
    c = x;
    check_finite(c, t);
    frames.row(t) = c;
  }
  return frames;
}

}  // namespace gemesh
