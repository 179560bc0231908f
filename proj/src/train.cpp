#include "netreduce/train.hpp"

#include <cmath>

#include "netreduce/optimize.hpp"

namespace netreduce {

PseudoInverse pseudo_inverse(const Matrix& m, double rtol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("pseudo-inverse needs a square matrix");
  PseudoInverse out;
  out.inverse = Matrix::Zero(m.rows(), m.cols());
  if (m.size() == 0) return out;
  const double scale = m.norm();
  if ((m - m.transpose()).norm() > 1e-10 * scale) throw std::invalid_argument("pseudo-inverse: matrix is not symmetric");
  if (scale == 0.0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector& ev = es.eigenvalues();
  const double cutoff = rtol * ev.maxCoeff();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (!(ev[k] > cutoff) || ev[k] <= 0.0) continue;
    const auto v = es.eigenvectors().col(k);
    out.inverse.noalias() += (1.0 / ev[k]) * v * v.transpose();
    out.log_det += std::log(ev[k]);
    ++out.rank;
  }
  return out;
}

namespace {

Matrix restrict(const Matrix& m, const IndexSet& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Matrix out(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index s = 0; s < n; ++s)
      out(r, s) = m(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]), static_cast<Eigen::Index>(idx[static_cast<std::size_t>(s)]));
  return out;
}

}  // namespace

LossEvaluator::LossEvaluator(const ReducedModel& reduced, const Network& full, ConstVectorRef c, const TimeSeries& ts,
                             double rtol)
    : reduced_(reduced.network), rtol_(rtol) {
  if (ts.num_species() != full.num_species())
    throw std::invalid_argument("time series has " + std::to_string(ts.num_species()) + " species, full model has " +
                                std::to_string(full.num_species()));
  if (ts.num_records() < 2) throw std::invalid_argument("time series needs at least two records");
  const ReductionMaps& maps = reduced.maps;
  bool any_rank = false;
  for (std::size_t i = 1; i < ts.num_records(); ++i) {
    const Vector x = ts.state(i - 1);
    Sample s;
    s.x_bar = maps.project_state(x);
    s.target = maps.project_state(full.drift(x, c));
    s.proj_diffusion = restrict(full.diffusion_matrix(x, c), maps.pi);
    const PseudoInverse pinv = pseudo_inverse(s.proj_diffusion, rtol);
    s.metric = pinv.inverse;
    s.rank = pinv.rank;
    s.dt = ts.dt(i);
    any_rank = any_rank || s.rank > 0;
    samples_.push_back(std::move(s));
  }
  if (!any_rank) throw DegenerateMetricError("degenerate metric: projected diffusion vanishes at every sample");
}

Vector LossEvaluator::reduced_drift(const Sample& s, ConstVectorRef theta) const { return reduced_.drift(s.x_bar, theta); }

double LossEvaluator::loss(ConstVectorRef theta) const {
  double total = 0.0;
  for (const Sample& s : samples_) {
    if (s.rank == 0) continue;
    const Vector r = reduced_drift(s, theta) - s.target;
    total += 0.5 * r.dot(s.metric * r) * s.dt;
  }
  return total;
}

double LossEvaluator::loss_and_gradient(ConstVectorRef theta, Eigen::Ref<Vector> grad) const {
  grad.setZero();
  double total = 0.0;
  SparseGradient g;
  for (const Sample& s : samples_) {
    if (s.rank == 0) continue;
    const Vector r = reduced_drift(s, theta) - s.target;
    const Vector w = s.metric * r;
    total += 0.5 * r.dot(w) * s.dt;
    for (std::size_t j = 0; j < reduced_.num_reactions(); ++j) {
      double along = 0.0;
      for (const StoichEntry& e : reduced_.reaction(j).change) along += w[static_cast<Eigen::Index>(e.species)] * e.count;
      if (along == 0.0) continue;
      reduced_.propensity_gradient(j, s.x_bar, theta, g);
      for (std::size_t n = 0; n < g.index.size(); ++n)
        grad[static_cast<Eigen::Index>(g.index[n])] += s.dt * along * g.value[n];
    }
  }
  return total;
}

FullLoss LossEvaluator::loss_full(ConstVectorRef theta) const {
  FullLoss out;
  for (const Sample& s : samples_) {
    const Matrix B = reduced_.diffusion_matrix(s.x_bar, theta);
    if (B.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> es(B);
    const Vector& ev = es.eigenvalues();
    const double cutoff = rtol_ * ev.maxCoeff();
    std::vector<Eigen::Index> kept;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
      if (ev[k] > cutoff && ev[k] > 0.0) kept.push_back(k);
    if (kept.empty()) continue;
    const auto r = static_cast<Eigen::Index>(kept.size());
    Matrix V(B.rows(), r);
    Vector inv_sqrt(r);
    for (Eigen::Index n = 0; n < r; ++n) {
      V.col(n) = es.eigenvectors().col(kept[static_cast<std::size_t>(n)]);
      inv_sqrt[n] = 1.0 / std::sqrt(ev[kept[static_cast<std::size_t>(n)]]);
    }
    // B^{+1/2} A B^{+1/2} expressed in B's eigenbasis
    const Matrix C = inv_sqrt.asDiagonal() * (V.transpose() * s.proj_diffusion * V) * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> ec(0.5 * (C + C.transpose()), Eigen::EigenvaluesOnly);
    const Vector& mu = ec.eigenvalues();
    const double mu_cut = rtol_ * std::max(mu.maxCoeff(), 0.0);
    double R = 0.0;
    for (Eigen::Index n = 0; n < mu.size(); ++n)
      if (mu[n] > mu_cut && mu[n] > 0.0) R += mu[n] - std::log(mu[n]);
    out.relative_entropy += 0.5 * R;

    const Vector resid = reduced_drift(s, theta) - s.target;
    const Vector proj = V.transpose() * resid;
    out.drift += 0.5 * proj.cwiseProduct(inv_sqrt).squaredNorm() * s.dt;
  }
  return out;
}

double loss_simplified(const ReducedModel& reduced, const Network& full, ConstVectorRef c, const TimeSeries& ts,
                       ConstVectorRef theta) {
  return LossEvaluator(reduced, full, c, ts).loss(theta);
}

FullLoss loss_full(const ReducedModel& reduced, const Network& full, ConstVectorRef c, const TimeSeries& ts,
                   ConstVectorRef theta) {
  return LossEvaluator(reduced, full, c, ts).loss_full(theta);
}

std::string to_string(Optimizer o) { return o == Optimizer::nelder_mead ? "nelder-mead" : "gd"; }

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "nelder-mead") return Optimizer::nelder_mead;
  if (s == "gd") return Optimizer::gradient_descent;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected nelder-mead or gd)");
}

TrainingResult train(const ReducedModel& reduced, const Network& full, ConstVectorRef c, const TimeSeries& ts,
                     const TrainOptions& opts) {
  if (opts.lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  const LossEvaluator eval(reduced, full, c, ts);
  TrainingResult res;
  res.theta0 = reduced.theta0();
  res.optimizer = opts.optimizer;
  res.lambda = opts.lambda;
  for (Eigen::Index k = 0; k < res.theta0.size(); ++k)
    if (!(res.theta0[k] > 0.0))
      throw std::invalid_argument("parameter " + reduced.network.parameter_names()[static_cast<std::size_t>(k)] +
                                  " has nonpositive initial value; log coordinates need positive values");
  const Vector theta0 = res.theta0;
  // y = log(theta / theta0), so y = 0 reproduces theta0 exactly.
  const Vector y0 = Vector::Zero(theta0.size());
  auto to_theta = [&](const Eigen::VectorXd& y) -> Vector { return theta0.cwiseProduct(y.array().exp().matrix()); };

  auto penalty = [&](const Vector& theta) { return opts.lambda * (theta - theta0).squaredNorm(); };
  auto objective = [&](const Eigen::VectorXd& y) {
    const Vector theta = to_theta(y);
    return eval.loss(theta) + penalty(theta);
  };

  const double f0 = objective(y0);
  if (!std::isfinite(f0)) throw std::runtime_error("loss is not finite at the initial parameters");

  OptimizeResult opt;
  if (opts.optimizer == Optimizer::nelder_mead) {
    NelderMeadOptions nm;
    nm.ftol = opts.tol;
    nm.max_iter = opts.max_iter;
    opt = nelder_mead(objective, y0, nm);
  } else {
    GradientDescentOptions gd;
    gd.tol = opts.tol;
    gd.max_iter = opts.max_iter;
    auto fg = [&](const Eigen::VectorXd& y, Eigen::VectorXd& grad) {
      const Vector theta = to_theta(y);
      Vector g(theta.size());
      const double f = eval.loss_and_gradient(theta, g) + penalty(theta);
      g += 2.0 * opts.lambda * (theta - theta0);
      grad = g.cwiseProduct(theta);  // chain rule into log coordinates
      return f;
    };
    opt = gradient_descent(fg, y0, gd);
  }
  res.theta_star = to_theta(opt.x);
  res.loss_value = eval.loss(res.theta_star);
  res.objective = res.loss_value + penalty(res.theta_star);
  res.iterations = opt.iterations;
  res.converged = opt.converged;
  res.history = std::move(opt.history);
  if (opts.compute_full_loss) res.full_loss = eval.loss_full(res.theta_star);
  return res;
}

ReducedModel apply_fit(const ReducedModel& reduced, const TrainingResult& fit) {
  ReducedModel out = reduced;
  out.network = reduced.network.with_parameters(fit.theta_star);
  return out;
}

Json fitted_to_json(const Network& full, const ReducedModel& fitted, const TrainingResult& fit) {
  Json doc = reduced_to_json(full, fitted);
  doc["kind"] = "fitted";
  Json t;
  t["optimizer"] = to_string(fit.optimizer);
  t["lambda"] = fit.lambda;
  t["iterations"] = fit.iterations;
  t["converged"] = fit.converged;
  t["loss"] = fit.loss_value;
  t["objective"] = fit.objective;
  if (fit.full_loss)
    t["loss_full"] = {{"relative_entropy", fit.full_loss->relative_entropy},
                      {"drift", fit.full_loss->drift},
                      {"total", fit.full_loss->total()}};
  t["theta0"] = to_std(fit.theta0);
  t["theta_star"] = to_std(fit.theta_star);
  doc["training"] = t;
  return doc;
}

}  // namespace netreduce
