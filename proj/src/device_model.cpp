#include "spincim/device_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "spincim/errors.hpp"
#include "spincim/stats.hpp"

namespace spincim {

std::string_view to_string(MtjState s) { return s == MtjState::P ? "P" : "AP"; }

std::string_view pair_name(CellPair pair) {
  switch (pair.p_count()) {
    case 0:
      return "AP,AP";
    case 1:
      return "AP,P";
    default:
      return "P,P";
  }
}

CellPair parse_pair(std::string_view text) {
  if (text == "AP,AP") return kPairApAp;
  if (text == "AP,P") return kPairApP;
  if (text == "P,AP") return {MtjState::P, MtjState::AP};
  if (text == "P,P") return kPairPP;
  throw ConfigError("unknown cell pair '" + std::string(text) + "' (expected AP,AP | AP,P | P,AP | P,P)");
}

double CurrentLevelModel::pair_level(int p_count) const {
  switch (p_count) {
    case 0:
      return i_apap;
    case 1:
      return i_app;
    default:
      return i_pp;
  }
}

void CurrentLevelModel::validate_allow_zero_noise() const {
  if (!(i_ap < i_p)) throw ConfigError("current levels: require i_ap < i_p");
  if (!(i_apap < i_app && i_app < i_pp)) {
    throw ConfigError("current levels: require i_apap < i_app < i_pp");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("current levels: sigma must be >= 0");
}

void CurrentLevelModel::validate() const {
  validate_allow_zero_noise();
  if (!(sigma > 0.0)) throw ConfigError("current levels: sigma must be > 0");
}

double DisturbanceModel::collapse_probability(double ambient_temp) const {
  const auto* c = std::get_if<Collapse>(&kind);
  if (!c) return 0.0;
  const double delta = std::max(0.0, zone_temp - ambient_temp);
  return std::clamp(std::exp(c->a + c->b * delta), 0.0, 1.0);
}

double DisturbanceModel::level_shift(int p_count) const {
  const auto* m = std::get_if<MeanShift>(&kind);
  if (!m) return 0.0;
  switch (p_count) {
    case 0:
      return m->alpha;
    case 1:
      return m->beta;
    default:
      return m->gamma;
  }
}

void DisturbanceModel::validate() const {
  if (const auto* m = std::get_if<MeanShift>(&kind)) {
    if (!(0.0 < m->alpha && m->alpha < m->beta && m->beta < m->gamma)) {
      throw InvalidShift("mean shift requires 0 < alpha < beta < gamma");
    }
  }
}

double sample_single_current(MtjState state, const CurrentLevelModel& model,
                             const DisturbanceModel& disturbance, RandomStream& rng) {
  MtjState effective = state;
  if (state == MtjState::AP && std::holds_alternative<Collapse>(disturbance.kind)) {
    if (rng.bernoulli(disturbance.collapse_probability(model.ambient_temp))) effective = MtjState::P;
  }
  return model.single_level(effective) + model.sigma * rng.normal();
}

double sample_pair_current(CellPair pair, const CurrentLevelModel& model,
                           const DisturbanceModel& disturbance, RandomStream& rng) {
  int level = pair.p_count();
  if (std::holds_alternative<Collapse>(disturbance.kind)) {
    const double rho = disturbance.collapse_probability(model.ambient_temp);
    for (int i = 0; i < pair.ap_count(); ++i) {
      if (rng.bernoulli(rho)) ++level;
    }
  }
  const double mean = model.pair_level(level) + disturbance.level_shift(pair.p_count());
  return mean + model.sigma * rng.normal();
}

namespace {

// P(mean + sigma * Z > threshold); a step function at sigma == 0.
double gaussian_exceedance(double mean, double sigma, double threshold) {
  if (sigma <= 0.0) return mean > threshold ? 1.0 : 0.0;
  return normal_tail((threshold - mean) / sigma);
}

double binomial_pmf(int n, int k, double p) {
  static constexpr std::array<std::array<double, 3>, 3> choose = {{{1, 0, 0}, {1, 1, 0}, {1, 2, 1}}};
  return choose[n][k] * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

}  // namespace

double single_exceedance(MtjState state, const CurrentLevelModel& model,
                         const DisturbanceModel& disturbance, double threshold) {
  if (state == MtjState::P) return gaussian_exceedance(model.i_p, model.sigma, threshold);
  const double rho = disturbance.collapse_probability(model.ambient_temp);
  return (1.0 - rho) * gaussian_exceedance(model.i_ap, model.sigma, threshold) +
         rho * gaussian_exceedance(model.i_p, model.sigma, threshold);
}

double pair_exceedance(CellPair pair, const CurrentLevelModel& model,
                       const DisturbanceModel& disturbance, double threshold) {
  const int n = pair.ap_count();
  const double rho = disturbance.collapse_probability(model.ambient_temp);
  const double shift = disturbance.level_shift(pair.p_count());
  double p = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double weight = binomial_pmf(n, k, rho);
    if (weight == 0.0) continue;
    p += weight * gaussian_exceedance(model.pair_level(pair.p_count() + k) + shift, model.sigma, threshold);
  }
  return p;
}

double pair_window(CellPair pair, const CurrentLevelModel& model, const DisturbanceModel& disturbance,
                   double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  return std::max(0.0, pair_exceedance(pair, model, disturbance, lo) -
                           pair_exceedance(pair, model, disturbance, hi));
}

// ---- calibration ----

namespace {

struct HeatedCell {
  CellPair pair;
  double temp;
  double target;
};

std::array<double, 4> residuals(const std::array<HeatedCell, 4>& cells, const CurrentLevelModel& model,
                                double and_reference, Collapse c) {
  std::array<double, 4> r{};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto d = DisturbanceModel::collapse(c, cells[i].temp);
    r[i] = pair_exceedance(cells[i].pair, model, d, and_reference) - cells[i].target;
  }
  return r;
}

double sum_squares(const std::array<double, 4>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

// rho solving (1 - rho) * q_low + rho * q_high = target for the AP,P row.
double invert_app_rate(double target, double q_low, double q_high) {
  return (target - q_low) / (q_high - q_low);
}

}  // namespace

CalibrationResult calibrate(const FailureTargets& targets, const CurrentLevelModel& levels,
                            double and_reference, double residual_bound) {
  const double half_margin = and_reference - levels.i_app;
  if (!(targets.natural_app > 0.0 && targets.natural_app < 0.5)) {
    throw NonConvergence("calibrate: natural AP,P failure rate must lie in (0, 0.5) to fix sigma");
  }
  if (!(half_margin > 0.0)) throw NonConvergence("calibrate: CimAND reference must sit above I_AP,P");

  CurrentLevelModel model = levels;
  model.sigma = half_margin / normal_tail_inverse(targets.natural_app);

  const double q_low = normal_tail(half_margin / model.sigma);
  const double q_high = normal_tail((and_reference - levels.i_pp) / model.sigma);
  const double rho_warm = invert_app_rate(targets.warm_app, q_low, q_high);
  const double rho_hot = invert_app_rate(targets.hot_app, q_low, q_high);
  const double dt_warm = targets.warm_temp - levels.ambient_temp;
  const double dt_hot = targets.hot_temp - levels.ambient_temp;
  if (!(rho_warm > 0.0 && rho_hot > rho_warm && rho_hot < 1.0 && dt_hot > dt_warm && dt_warm > 0.0)) {
    throw NonConvergence("calibrate: heated rates must exceed the natural rate and grow with temperature");
  }

  // Log-linear fit through the two AP,P points seeds a Levenberg-Marquardt
  // refinement over all four heated cells.
  Collapse c;
  c.b = std::log(rho_hot / rho_warm) / (dt_hot - dt_warm);
  c.a = std::log(rho_warm) - c.b * dt_warm;

  const std::array<HeatedCell, 4> cells = {{
      {kPairApP, targets.warm_temp, targets.warm_app},
      {kPairApP, targets.hot_temp, targets.hot_app},
      {kPairApAp, targets.warm_temp, targets.warm_apap},
      {kPairApAp, targets.hot_temp, targets.hot_apap},
  }};

  auto r = residuals(cells, model, and_reference, c);
  double cost = sum_squares(r);
  double lambda = 1e-3;
  for (int iter = 0; iter < 200; ++iter) {
    std::array<std::array<double, 2>, 4> jac{};
    const std::array<double, 2> step = {1e-7, 1e-9};
    for (int j = 0; j < 2; ++j) {
      Collapse probe = c;
      (j == 0 ? probe.a : probe.b) += step[j];
      const auto rp = residuals(cells, model, and_reference, probe);
      for (std::size_t i = 0; i < 4; ++i) jac[i][j] = (rp[i] - r[i]) / step[j];
    }
    double h00 = 0, h01 = 0, h11 = 0, g0 = 0, g1 = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      h00 += jac[i][0] * jac[i][0];
      h01 += jac[i][0] * jac[i][1];
      h11 += jac[i][1] * jac[i][1];
      g0 += jac[i][0] * r[i];
      g1 += jac[i][1] * r[i];
    }
    bool improved = false;
    for (int attempt = 0; attempt < 20 && !improved; ++attempt) {
      const double a00 = h00 * (1.0 + lambda);
      const double a11 = h11 * (1.0 + lambda);
      const double det = a00 * a11 - h01 * h01;
      if (det == 0.0) break;
      Collapse next = c;
      next.a -= (a11 * g0 - h01 * g1) / det;
      next.b -= (a00 * g1 - h01 * g0) / det;
      const auto rn = residuals(cells, model, and_reference, next);
      const double next_cost = sum_squares(rn);
      if (next_cost < cost) {
        const double gain = cost - next_cost;
        c = next;
        r = rn;
        cost = next_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (gain < 1e-20) iter = 200;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }

  CalibrationResult out;
  out.sigma = model.sigma;
  out.collapse = c;
  out.residual = std::sqrt(cost / static_cast<double>(cells.size()));
  if (!std::isfinite(out.residual) || out.residual > residual_bound) {
    throw NonConvergence("calibrate: fit residual " + std::to_string(out.residual) +
                         " exceeds bound " + std::to_string(residual_bound));
  }
  return out;
}

}  // namespace spincim
