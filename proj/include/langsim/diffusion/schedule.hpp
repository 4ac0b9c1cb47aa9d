// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Noise schedule and single-step diffusion operators on action fields.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/rng.hpp"
#include "langsim/core/types.hpp"
#include "langsim/model/ad.hpp"

namespace langsim {

struct NoiseSchedule {
  int K = 0;
  std::vector<double> beta;       // index 1..K (entry 0 unused, 0)
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // index 0..K, alpha_bar[0] = 1

  void check_step(int k, const char* who) const {
    if (k < 1 || k > K) throw InvalidInput(std::string(who) + ": diffusion step out of range");
  }
};

/// Cosine schedule: f(k) = cos^2(((k/K + s)/(1 + s)) * pi/2), beta_k = min(1 - f(k)/f(k-1), 0.999).
/// alpha_bar is the running product of (1 - beta) so the clipped last step stays consistent.
inline NoiseSchedule cosine_schedule(int K, double s = 0.008) {
  require(K >= 1, "cosine_schedule: K must be at least 1");
  require(s > 0.0 && std::isfinite(s), "cosine_schedule: offset must be positive");
  auto f = [&](int k) {
    const double c = std::cos((static_cast<double>(k) / K + s) / (1.0 + s) * kPi / 2.0);
    return c * c;
  };
  NoiseSchedule sch;
  sch.K = K;
  sch.beta.assign(static_cast<size_t>(K) + 1, 0.0);
  sch.alpha.assign(static_cast<size_t>(K) + 1, 1.0);
  sch.alpha_bar.assign(static_cast<size_t>(K) + 1, 1.0);
  const double f0 = f(0);
  for (int k = 1; k <= K; ++k) {
    const double ratio = (f(k) / f0) / (f(k - 1) / f0);
    sch.beta[k] = std::clamp(1.0 - ratio, 1e-12, 0.999);
    sch.alpha[k] = 1.0 - sch.beta[k];
    sch.alpha_bar[k] = sch.alpha_bar[k - 1] * sch.alpha[k];
  }
  return sch;
}

/// Standard normal field of the given shape.
inline ad::Mat normal_field(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  ad::Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

inline ad::Mat forward_noise(const ad::Mat& tau0, int k, const NoiseSchedule& s, const ad::Mat& eps) {
  s.check_step(k, "forward_noise");
  require_shape(tau0.rows() == eps.rows() && tau0.cols() == eps.cols(), "forward_noise: shape");
  return std::sqrt(s.alpha_bar[k]) * tau0 + std::sqrt(1.0 - s.alpha_bar[k]) * eps;
}

/// Mean of q(tau_{k-1} | tau_k, tau0_hat).
inline ad::Mat posterior_mean(const ad::Mat& tau_k, const ad::Mat& tau0_hat, int k,
                              const NoiseSchedule& s) {
  s.check_step(k, "posterior_mean");
  require_shape(tau_k.rows() == tau0_hat.rows() && tau_k.cols() == tau0_hat.cols(),
                "posterior_mean: shape");
  const double ab = s.alpha_bar[k];
  const double ab_prev = s.alpha_bar[k - 1];
  const double c0 = std::sqrt(ab_prev) * s.beta[k] / (1.0 - ab);
  const double ck = std::sqrt(s.alpha[k]) * (1.0 - ab_prev) / (1.0 - ab);
  return c0 * tau0_hat + ck * tau_k;
}

inline double posterior_variance(int k, const NoiseSchedule& s) {
  s.check_step(k, "posterior_variance");
  return s.beta[k] * (1.0 - s.alpha_bar[k - 1]) / (1.0 - s.alpha_bar[k]);
}

/// Ancestral step: posterior mean plus sqrt(beta_tilde) * z.
inline ad::Mat ddpm_step(const ad::Mat& tau_k, const ad::Mat& tau0_hat, int k,
                         const NoiseSchedule& s, const ad::Mat& z) {
  return posterior_mean(tau_k, tau0_hat, k, s) + std::sqrt(posterior_variance(k, s)) * z;
}

/// DDIM update; `z` is only read when eta > 0.
inline ad::Mat ddim_step(const ad::Mat& tau_k, const ad::Mat& tau0_hat, int k,
                         const NoiseSchedule& s, double eta = 0.0, const ad::Mat* z = nullptr) {
  s.check_step(k, "ddim_step");
  require_shape(tau_k.rows() == tau0_hat.rows() && tau_k.cols() == tau0_hat.cols(),
                "ddim_step: shape");
  require(eta >= 0.0 && std::isfinite(eta), "ddim_step: eta must be non-negative");
  const double ab = s.alpha_bar[k];
  const double ab_prev = s.alpha_bar[k - 1];
  const ad::Mat eps_hat = (tau_k - std::sqrt(ab) * tau0_hat) / std::sqrt(1.0 - ab);
  const double sigma =
      eta * std::sqrt((1.0 - ab_prev) / (1.0 - ab)) * std::sqrt(1.0 - ab / ab_prev);
  ad::Mat out = std::sqrt(ab_prev) * tau0_hat +
                std::sqrt(std::max(0.0, 1.0 - ab_prev - sigma * sigma)) * eps_hat;
  if (sigma > 0.0) {
    require(z != nullptr, "ddim_step: stochastic step needs a noise field");
    require_shape(z->rows() == tau_k.rows() && z->cols() == tau_k.cols(), "ddim_step: noise shape");
    out += sigma * *z;
  }
  return out;
}

/// (1 + w) * cond - w * uncond; w = 0 returns cond and w = -1 returns uncond exactly.
inline ad::Mat cfg_combine(const ad::Mat& cond, const ad::Mat& uncond, double w) {
  require_shape(cond.rows() == uncond.rows() && cond.cols() == uncond.cols(), "cfg_combine: shape");
  require(std::isfinite(w), "cfg_combine: non-finite weight");
  if (w == 0.0) return cond;
  if (w == -1.0) return uncond;
  return (1.0 + w) * cond - w * uncond;
}

}  // namespace langsim
