#include "modeseek/mode_seek.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "detail.hpp"
#include "modeseek/error.hpp"

namespace modeseek {

namespace {

constexpr double kStationaryThreshold = 1e-10;
constexpr int kMaxHalvings = 20;


/// Largest eigenvalue of the Hessian rescaled to sigma^2 H / p, which is
/// dimensionless (J - I at stationary points).
double scaled_hessian_max_eigenvalue(const KdeModel& model, const VectorCRef& x) {
  const double p = model.density(x);
  if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
  const double s = model.bandwidth().min();
  const Matrix h = model.hessian(x) * (s * s / p);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

void classify_converged(const KdeModel& model, ModeTrace& trace) {
  trace.status = detail::classify_end_point(model, trace.mode);
}

}  // namespace

namespace detail {

bool small_step(double step, const VectorCRef& x, double tol) { return step <= tol * (1.0 + x.norm()); }

ModeStatus classify_end_point(const KdeModel& model, const VectorCRef& x) {
  if (!model.kernel().is_gaussian()) return ModeStatus::Converged;
  return scaled_hessian_max_eigenvalue(model, x) > kStationaryThreshold ? ModeStatus::StationaryNonMode
                                                                        : ModeStatus::Converged;
}

}  // namespace detail

std::string to_string(ModeStatus s) {
  switch (s) {
    case ModeStatus::Converged: return "converged";
    case ModeStatus::MaxIter: return "max_iter";
    case ModeStatus::StationaryNonMode: return "stationary_non_mode";
  }
  return "unknown";
}

Vector ms_weights(const KdeModel& model, const VectorCRef& x) {
  const Bandwidth& bw = model.bandwidth();
  if (model.kernel().is_gaussian()) {
    Vector w = model.posteriors(x);
    if (!bw.is_scalar()) {
      for (Eigen::Index n = 0; n < w.size(); ++n) w[n] /= bw[n] * bw[n];
      w /= w.sum();
    }
    return w;
  }
  const Vector t = model.scaled_distances(x);
  Vector w(model.size());
  for (Eigen::Index n = 0; n < w.size(); ++n)
    w[n] = model.weights()[n] * -model.kernel().derivative(t[n]) / (bw[n] * bw[n]);
  const double total = w.sum();
  if (!(total > 0.0)) throw IsolatedPointError("no data point inside the kernel window of the query");
  return w / total;
}

Vector ms_step(const KdeModel& model, const VectorCRef& x) { return model.data() * ms_weights(model, x); }

Vector ms_step_adaptive(const KdeModel& model, const VectorCRef& x) {
  model.require_gaussian("adaptive mean-shift");
  if (model.bandwidth().is_scalar())
    throw InputError("adaptive mean-shift needs per-point bandwidths; use ms_step");
  return ms_step(model, x);
}

ModeTrace find_mode(const KdeModel& model, const VectorCRef& x0, const MsConfig& cfg) {
  model.check_point(x0);
  ModeTrace trace;
  trace.start = x0;
  Vector x = x0;
  const bool exact = !model.kernel().is_gaussian();
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Vector y = ms_step(model, x);
    const double step = (y - x).norm();
    trace.iterations = it;
    trace.last_step = step;
    if (cfg.record_path) trace.path.push_back(y);
    const bool done = exact ? step == 0.0 : detail::small_step(step, y, cfg.tol);
    x = std::move(y);
    if (done) {
      trace.mode = x;
      classify_converged(model, trace);
      return trace;
    }
  }
  trace.mode = x;
  trace.status = ModeStatus::MaxIter;
  return trace;
}

ModeTrace find_mode_newton(const KdeModel& model, const VectorCRef& x0, const MsConfig& cfg) {
  model.require_gaussian("Newton mode search");
  model.check_point(x0);
  ModeTrace trace;
  trace.start = x0;
  Vector x = x0;
  const double sigma = model.bandwidth().min();
  bool newton = false;

  auto accept = [&](Vector y) {
    trace.last_step = (y - x).norm();
    ++trace.iterations;
    if (cfg.record_path) trace.path.push_back(y);
    x = std::move(y);
  };

  while (trace.iterations < cfg.max_iter) {
    if (!newton) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(model.hessian(x), Eigen::EigenvaluesOnly);
      newton = eig.eigenvalues().maxCoeff() < 0.0;
    }
    if (!newton) {
      accept(ms_step(model, x));
      if (detail::small_step(trace.last_step, x, cfg.tol)) {
        trace.mode = x;
        classify_converged(model, trace);
        return trace;
      }
      continue;
    }

    const double p = model.density(x);
    const Vector g = model.gradient(x) / p;
    if (g.norm() * sigma < cfg.tol) {
      trace.mode = x;
      classify_converged(model, trace);
      return trace;
    }
    const Matrix h = model.hessian(x) / p - g * g.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    Vector lambda = eig.eigenvalues();
    const double floor = 1e-8 * lambda.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = std::min(lambda[i], -floor);
    const Matrix& v = eig.eigenvectors();
    const Vector direction = -(v * (v.transpose() * g).cwiseQuotient(lambda));

    double alpha = 1.0;
    bool accepted = false;
    for (int r = 0; r < kMaxHalvings; ++r, alpha *= 0.5) {
      Vector y = x + alpha * direction;
      if (model.density(y) >= p) {
        accept(std::move(y));
        ++trace.newton_steps;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      accept(ms_step(model, x));
      newton = false;
    }
    if (detail::small_step(trace.last_step, x, cfg.tol)) {
      trace.mode = x;
      classify_converged(model, trace);
      return trace;
    }
  }
  trace.mode = x;
  trace.status = ModeStatus::MaxIter;
  return trace;
}

Matrix ms_jacobian(const KdeModel& model, const VectorCRef& x) {
  model.require_gaussian("mean-shift Jacobian");
  const double sigma = model.bandwidth().scalar_value();
  const Vector post = model.posteriors(x);
  const Vector f = model.data() * post;
  Matrix second = model.data() * post.asDiagonal() * model.data().transpose();
  Matrix j = (second - f * f.transpose()) / (sigma * sigma);
  return 0.5 * (j + j.transpose());
}

}  // namespace modeseek
