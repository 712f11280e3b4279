#include "past/theory.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace past {

namespace {

double mean_of(std::span<const double> v) { return parallel::pairwise_sum(v) / static_cast<double>(v.size()); }

double std_error_of(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - mean) * (v[i] - mean);
  const double var = parallel::pairwise_sum(dev) / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

LinearClass identity_linear_class(Index d) {
  LinearClass c;
  c.map = FeatureMap::identity(d);
  c.second_moment = Matrix::Identity(d, d);
  c.sample_x = [d](Rng& rng) {
    Vector x(d);
    for (Index i = 0; i < d; ++i) x(i) = standard_normal(rng);
    return x;
  };
  return c;
}

LinearClass linear_class_from_samples(const FeatureMap& map, XSampler sample_x, std::size_t draws, Rng& rng) {
  if (draws < 1) throw InvalidArgument("linear_class_from_samples: need draws");
  const Index p = map.output_dim();
  Matrix s = Matrix::Zero(p, p);
  for (std::size_t k = 0; k < draws; ++k) {
    const Vector f = map.expand(sample_x(rng));
    s.noalias() += f * f.transpose();
  }
  return LinearClass{map, s / static_cast<double>(draws), std::move(sample_x)};
}

UnitComplexity rademacher_unit(const LinearClass& cls, std::size_t n, std::size_t mc_draws, Rng& rng,
                               parallel::Backend backend) {
  if (n < 1 || mc_draws < 2) throw InvalidArgument("rademacher_unit: need n >= 1 and at least 2 draws");
  UnitComplexity out;
  const Index p = cls.map.output_dim();
  if (cls.second_moment.rows() != p || cls.second_moment.cols() != p)
    throw InvalidArgument("rademacher_unit: second moment has the wrong shape");
  Eigen::LLT<Matrix> llt(cls.second_moment);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-10 * std::max(cls.second_moment.trace() / static_cast<double>(p), 1.0);
    llt.compute(cls.second_moment + jitter * Matrix::Identity(p, p));
    out.warnings.push_back("second-moment matrix is singular; added ridge jitter " + std::to_string(jitter));
    if (llt.info() != Eigen::Success) throw NumericalError("rademacher_unit: second-moment matrix is not usable");
  }
  const std::uint64_t base = rng();
  out.draws = parallel::map_indices(
      mc_draws,
      [&](std::size_t k) {
        Rng r(derive_seed(base, {k}));
        Vector v = Vector::Zero(p);
        for (std::size_t i = 0; i < n; ++i) {
          const Vector f = cls.map.expand(cls.sample_x(r));
          if (bernoulli(r, 0.5)) v += f; else v -= f;
        }
        v /= static_cast<double>(n);
        return llt.matrixL().solve(v).norm();
      },
      backend);
  out.mean = mean_of(out.draws);
  out.std_error = std_error_of(out.draws, out.mean);
  return out;
}

UnitComplexity rademacher_unit(const LinearClass& cls, std::size_t n, std::size_t mc_draws, Rng& rng) {
  return rademacher_unit(cls, n, mc_draws, rng, parallel::default_backend());
}

ComplexityEstimate complexity_at(const UnitComplexity& unit, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("complexity: t must be non-negative");
  return ComplexityEstimate{t, t * unit.mean, unit.draws.size(), t * unit.std_error};
}

ComplexityEstimate rademacher_complexity_mc(const LinearClass& cls, double t, std::size_t n, std::size_t mc_draws,
                                            Rng& rng) {
  return complexity_at(rademacher_unit(cls, n, mc_draws, rng), t);
}

CriticalRadius critical_radius_from(const UnitComplexity& unit, double B) {
  if (!(B > 0.0)) throw InvalidArgument("critical_radius: B must be positive");
  const auto holds = [&](double t) { return t / 16.0 >= complexity_at(unit, t).value / t; };
  const double lo_end = 1e-4, hi_end = 4.0 * B;
  double prev = 0.0, hit = -1.0;
  for (int k = 0;; ++k) {
    const double t = lo_end * std::exp2(k / 8.0);
    if (t > hi_end * (1.0 + 1e-12)) break;
    if (holds(t)) {
      hit = t;
      break;
    }
    prev = t;
  }
  if (hit < 0.0) {
    throw NumericalError("critical_radius: no crossing on [1e-4, " + std::to_string(hi_end) +
                         "]; R_n(t)/t at endpoints = " + std::to_string(complexity_at(unit, lo_end).value / lo_end) +
                         ", " + std::to_string(complexity_at(unit, hi_end).value / hi_end));
  }
  double lo = prev, hi = hit;
  if (lo > 0.0) {
    while ((hi - lo) > 1e-3 * hi) {
      const double mid = 0.5 * (lo + hi);
      (holds(mid) ? hi : lo) = mid;
    }
  }
  return CriticalRadius{hi, unit};
}

CriticalRadius critical_radius(const LinearClass& cls, std::size_t n, std::size_t mc_draws, Rng& rng, double B) {
  return critical_radius_from(rademacher_unit(cls, n, mc_draws, rng), B);
}

void validate(const TheoryInputs& in) {
  if (!(in.delta > 0.0 && in.delta < 1.0)) throw InvalidArgument("theory: delta must lie in (0, 1)");
  if (!(in.r_n > 0.0)) throw InvalidArgument("theory: r_n must be positive");
  if (in.n < 1) throw InvalidArgument("theory: n must be positive");
  if (!(in.sigma > 0.0) || !(in.B > 0.0)) throw InvalidArgument("theory: sigma and B must be positive");
  if (!(in.L > 0.0) || !(in.gamma > 0.0)) throw InvalidArgument("theory: L and gamma must be positive");
}

double tau_sqloss(const TheoryInputs& in) {
  validate(in);
  const double phi = std::log2(4.0 * in.sigma / in.r_n);
  if (!(phi > 0.0)) throw InvalidArgument("tau_sqloss: phi(r_n) <= 0; need r_n < 4 sigma");
  const double lg = std::log(4.0 * phi / in.delta);
  const double n = static_cast<double>(in.n);
  return std::max(20.0, 10.0 * in.sigma) * std::sqrt(2.0 * lg / n) +
         std::max(640.0, 80.0 * in.sigma) * lg / (in.r_n * n);
}

double tau_glm(const TheoryInputs& in) {
  validate(in);
  const double phi = std::log2(4.0 * in.B / in.r_n);
  if (!(phi > 0.0)) throw InvalidArgument("tau_glm: phi(r_n) <= 0; need r_n < 4 B");
  const double lg = std::log(phi / in.delta);
  if (!(lg > 0.0)) throw InvalidArgument("tau_glm: log(phi/delta) <= 0");
  return 12.0 / std::sqrt(static_cast<double>(in.n)) * std::sqrt(in.L / in.gamma) * std::sqrt(lg);
}

double bound_thm1(const TheoryInputs& in, double smoothed_defect, std::optional<double> tau) {
  validate(in);
  if (!(smoothed_defect >= 0.0)) throw InvalidArgument("bound_thm1: defect must be non-negative");
  const double t = tau ? *tau : tau_sqloss(in);
  return (11.0 + 10.0 * in.sigma) * in.r_n + 3.0 * smoothed_defect + 2.0 * t;
}

double bound_thm2(const TheoryInputs& in, Thm2Variant variant, double defect, std::optional<double> tau) {
  validate(in);
  if (!(defect >= 0.0)) throw InvalidArgument("bound_thm2: defect must be non-negative");
  const double ratio = in.L / in.gamma;
  const double lead = (2.0 * ratio + 1.0) * in.r_n;
  if (variant == Thm2Variant::Slow) {
    const double t = tau ? *tau : tau_glm(in);
    return lead + std::sqrt(8.0 * ratio * defect) + t;
  }
  TheoryInputs half = in;
  half.delta = in.delta / 2.0;
  const double t = tau ? *tau : tau_glm(half);
  return lead + (2.0 / in.gamma) * defect + (1.0 + std::sqrt(ratio)) * t;
}

double guarantee_ensemble_one(double sigma, double lambda, double d1, double n, double n_L) {
  return sigma * std::sqrt(d1 / n) + sigma * (1.0 - lambda) * std::sqrt(d1 / n_L);
}

double guarantee_ensemble_two(double sigma, double lambda, double d1, double d2, double n, double n_L) {
  return sigma * std::sqrt(d1 / n) + sigma * (1.0 - lambda) * (std::sqrt(d1 / n_L) + (d1 + d2) / n_L);
}

double fit_overlay_constant(std::span<const double> theory, std::span<const double> empirical) {
  if (theory.size() != empirical.size() || theory.empty())
    throw InvalidArgument("fit_overlay_constant: lengths must match and be non-zero");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < theory.size(); ++i) {
    num += theory[i] * empirical[i];
    den += theory[i] * theory[i];
  }
  if (den == 0.0) throw InvalidArgument("fit_overlay_constant: theory curve is identically zero");
  return num / den;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("pearson_correlation: need two equal-length series");
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

DecompositionTerms decomposition_terms(const XFunction& f_hat, const EnsembleSpec& spec,
                                       const AuxiliaryPredictor& g_tilde, const XFunction& f_tilde,
                                       const HybridDataset& data, std::size_t mc_draws, Rng& rng) {
  if (mc_draws < 2) throw InvalidArgument("decomposition_terms: need at least 2 Monte-Carlo draws");
  DecompositionTerms out;
  out.mc_draws = mc_draws;
  const double n = static_cast<double>(data.n());
  const double nL = static_cast<double>(data.n_labeled());
  const double nU = static_cast<double>(data.n_unlabeled());

  // Population side.
  std::vector<double> fg_mc(mc_draws), sg_mc(mc_draws), ff_mc(mc_draws), cross(mc_draws);
  for (std::size_t k = 0; k < mc_draws; ++k) {
    const LabeledTriple t = spec.sample(rng);
    const double fh = f_hat(t.x), fs = spec.f_star(t.x), gs = spec.g_star(t.x, t.w);
    fg_mc[k] = (fh - gs) * (fh - gs);
    sg_mc[k] = (fs - gs) * (fs - gs);
    ff_mc[k] = (fh - fs) * (fh - fs);
    cross[k] = 2.0 * (fh - fs) * (fs - gs);
  }
  const double fg_pop = mean_of(fg_mc), sg_pop = mean_of(sg_mc);
  out.lhs_mc = mean_of(ff_mc);
  out.mc_std_error = std_error_of(cross, mean_of(cross));

  // Empirical side over all n rows.
  std::vector<double> fg_n, sg_n, ff_n, cross_n;
  const auto add_row = [&](const Vector& x, const Vector& w) {
    const double fh = f_hat(x), fs = spec.f_star(x), gs = spec.g_star(x, w);
    fg_n.push_back((fh - gs) * (fh - gs));
    sg_n.push_back((fs - gs) * (fs - gs));
    ff_n.push_back((fh - fs) * (fh - fs));
    cross_n.push_back((fh - fs) * (fs - gs));
  };
  for (const auto& l : data.labeled()) add_row(l.x, l.w);
  for (const auto& u : data.unlabeled()) add_row(u.x, u.w);
  const double fg_emp = mean_of(fg_n), sg_emp = mean_of(sg_n);
  out.lhs_n = mean_of(ff_n);
  out.t1 = (fg_pop - fg_emp) - (sg_pop - sg_emp);
  out.t5 = fg_emp - sg_emp;
  out.t5_identity = out.lhs_n + 2.0 * mean_of(cross_n);

  std::vector<double> t2;
  for (const auto& l : data.labeled()) t2.push_back((f_hat(l.x) - spec.f_star(l.x)) * (l.y - spec.g_star(l.x, l.w)));
  out.t2 = 2.0 * nL / n * mean_of(t2);

  if (nU > 0) {
    std::vector<double> t3, a2, b2;
    for (const auto& u : data.unlabeled()) {
      const double fh = f_hat(u.x), fs = spec.f_star(u.x), ft = f_tilde(u.x);
      t3.push_back((fh - fs) * (g_tilde.predict(u.x, u.w) - ft + fs - spec.g_star(u.x, u.w)));
      a2.push_back((fh - fs) * (fh - fs));
      b2.push_back((ft - fs) * (ft - fs));
    }
    out.t3 = 2.0 * nU / n * mean_of(t3);
    out.t4 = 2.0 * nU / n * std::sqrt(mean_of(a2)) * std::sqrt(mean_of(b2));
  }
  return out;
}

std::vector<McEstimate> orthogonality_check(const EnsembleSpec& spec, std::span<const XFunction> probes,
                                            std::size_t mc_draws, Rng& rng) {
  if (mc_draws < 2) throw InvalidArgument("orthogonality_check: need at least 2 draws");
  std::vector<LabeledTriple> draws = spec.generate(mc_draws, rng);
  std::vector<McEstimate> out;
  for (const XFunction& f : probes) {
    std::vector<double> v(mc_draws);
    for (std::size_t k = 0; k < mc_draws; ++k) {
      const double fs = spec.f_star(draws[k].x);
      v[k] = (f(draws[k].x) - fs) * (fs - spec.g_star(draws[k].x, draws[k].w));
    }
    const double m = mean_of(v);
    out.push_back({m, std_error_of(v, m)});
  }
  return out;
}

double empirical_sup(const XFunction& f, const XSampler& sample_x, std::size_t draws, Rng& rng) {
  double best = 0.0;
  for (std::size_t k = 0; k < draws; ++k) best = std::max(best, std::abs(f(sample_x(rng))));
  return best;
}

}  // namespace past
