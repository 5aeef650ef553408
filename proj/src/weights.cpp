#include "knudsen/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "knudsen/quadrature.hpp"

namespace knudsen {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kE2 = 7.38905609893065;  // e^2
}

double bracket(const Domain& domain, double c4, const Vec& x, const Vec& v) {
  double speed = norm(v);
  if (speed == 0.0) return std::numeric_limits<double>::infinity();
  double back = domain.exit_time(x, -1.0 * v);
  return kE2 + domain.diameter() / (speed * c4) - back;
}

std::string WeightSpec::key() const {
  std::ostringstream os;
  auto num = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  switch (kind) {
    case Kind::BracketPowerLog: os << "blog_" << num(i) << "_" << num(log_exp); break;
    case Kind::Omega: os << "omega_" << num(i); break;
    case Kind::M: os << "m_" << num(i); break;
    case Kind::Tilde: os << "tilde_" << num(i); break;
    case Kind::W1Log: os << "w1log"; break;
    case Kind::W0Log: os << "w0log"; break;
    case Kind::RPoly: os << "rpoly_" << num(nu); break;
    case Kind::ExpSigma: os << "exp_sigma"; break;
  }
  return os.str();
}

double evaluate(const WeightSpec& spec, const Domain& domain, double c4, const Vec& x,
                const Vec& v) {
  switch (spec.kind) {
    case WeightSpec::Kind::RPoly: {
      double sigma = domain.exit_time(x, v);
      if (std::isinf(sigma)) {
        return spec.nu == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
      }
      return std::pow(1.0 + sigma, spec.nu);
    }
    case WeightSpec::Kind::ExpSigma: {
      double sigma = domain.exit_time(x, v);
      return std::exp(sigma);
    }
    default:
      break;
  }
  double br = bracket(domain, c4, x, v);
  if (std::isinf(br)) return br;
  double lb = std::log(br);
  switch (spec.kind) {
    case WeightSpec::Kind::BracketPowerLog:
      return std::pow(br, spec.i) * std::pow(lb, spec.log_exp);
    case WeightSpec::Kind::Omega:
      return std::pow(br, spec.i) * std::pow(lb, -spec.log_coeff);
    case WeightSpec::Kind::M: {
      int n = domain.dim();
      return std::pow(br, spec.i) * std::pow(lb, -spec.log_coeff * n / (n + 1.0));
    }
    case WeightSpec::Kind::Tilde:
      return std::pow(br, spec.i - 0.5);
    case WeightSpec::Kind::W1Log:
      return br * std::pow(lb, spec.w_exp);
    case WeightSpec::Kind::W0Log:
      return std::pow(lb, spec.w_exp);
    default:
      return 0.0;
  }
}

NormEstimate weighted_norm(const Ensemble& ens, const WeightSpec& spec, const Domain& domain,
                           double c4) {
  if (ens.size() == 0) throw std::invalid_argument("weighted_norm: empty ensemble");
  NormEstimate out;
  std::size_t n = ens.size();
  std::vector<double> contrib(n, 0.0);
  std::vector<double> values;
  values.reserve(n);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ens.weight[i] < 0.0)
      throw std::invalid_argument("weighted_norm: negative statistical weight");
    if (ens.weight[i] == 0.0) continue;
    double w = evaluate(spec, domain, c4, ens.x[i], ens.v[i]);
    if (std::isinf(w)) {
      out.n_infinite++;
      continue;
    }
    contrib[i] = ens.weight[i] * w;
    values.push_back(w);
    weight_sum += ens.weight[i];
  }
  out.flagged_infinite = out.n_infinite > 0;
  out.value = pairwise_sum(contrib);
  double mean = (weight_sum > 0.0) ? out.value / weight_sum : 0.0;
  std::vector<double> sq(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (contrib[i] == 0.0 && ens.weight[i] == 0.0) continue;
    double w = (ens.weight[i] > 0.0) ? contrib[i] / ens.weight[i] : 0.0;
    double d = w - mean;
    sq[i] = ens.weight[i] * ens.weight[i] * d * d;
  }
  out.std_error = std::sqrt(pairwise_sum(sq));

  // Hill tail-index on the largest sampled weight values
  std::size_t m = values.size();
  if (m >= 32) {
    std::size_t k = static_cast<std::size_t>(std::pow(static_cast<double>(m), 2.0 / 3.0));
    k = std::clamp<std::size_t>(k, 10, m / 2);
    std::nth_element(values.begin(), values.begin() + k, values.end(), std::greater<>());
    double pivot = values[k];
    if (pivot > 0.0) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += std::log(values[j] / pivot);
      out.tail_index = (acc > 0.0) ? static_cast<double>(k) / acc
                                   : std::numeric_limits<double>::infinity();
    } else {
      out.tail_index = std::numeric_limits<double>::infinity();
    }
  } else {
    out.tail_index = std::numeric_limits<double>::infinity();
  }
  out.mean_tail_ok = out.tail_index > 1.0;
  out.variance_tail_ok = out.tail_index > 2.0;
  return out;
}

namespace {

// Boundary positions with pairwise-distinct wall temperatures; enough to scan
// extrema of x -> M(x, s) for the registered field catalog.
std::vector<Vec> distinct_theta_points(const Domain& domain, const WallModel& wall) {
  std::vector<std::pair<double, Vec>> seen;
  for (const Vec& x : domain.boundary_samples(256)) {
    double t = wall.theta(x);
    bool dup = false;
    for (auto& [tt, _] : seen)
      if (std::abs(tt - t) < 1e-13) { dup = true; break; }
    if (!dup) seen.emplace_back(t, x);
  }
  std::vector<Vec> out;
  for (auto& [_, x] : seen) out.push_back(x);
  return out;
}

}  // namespace

LyapunovConstants lyapunov_constants(int lyapunov_case, double i, double eps,
                                     const Domain& domain, const WallModel& wall) {
  const int n = domain.dim();
  LyapunovConstants out;
  double log_power = 0.0;  // exponent of the ln factor in W(s): -(1+eps), 0, or +0.1

  switch (lyapunov_case) {
    case 1: {
      double ir = std::round(i);
      if (std::abs(i - ir) > 1e-12 || ir < 2 || ir > n + 1)
        throw std::invalid_argument("lyapunov case 1: integer i in [2, n+1] required");
      if (!(eps > 0.0 && eps < 3.0))
        throw std::invalid_argument("lyapunov case 1: eps in (0, 3) required");
      out.C = i - 0.5 * (1.0 + eps);
      out.m1 = WeightSpec::bracket_power_log(i, -(1.0 + eps));
      out.m0 = WeightSpec::bracket_power_log(i - 1.0, -(1.0 + eps));
      log_power = -(1.0 + eps);
      break;
    }
    case 2: {
      double two_i = 2.0 * i;
      if (std::abs(two_i - std::round(two_i)) > 1e-12 || two_i < 3.0 || two_i > 2.0 * n + 1.0)
        throw std::invalid_argument("lyapunov case 2: half-integer i in [3/2, n+1/2] required");
      out.C = i;
      out.m1 = WeightSpec::bracket_power_log(i, 0.0);
      out.m0 = WeightSpec::bracket_power_log(i - 1.0, 0.0);
      log_power = 0.0;
      break;
    }
    case 3: {
      out.C = 1.0;
      out.m1 = WeightSpec::w1_log();
      out.m0 = WeightSpec::w0_log();
      i = 1.0;
      log_power = 0.1;
      break;
    }
    default:
      throw std::invalid_argument("lyapunov case must be 1, 2 or 3");
  }

  const double d = domain.diameter();
  const double c4 = wall.c4();
  const double Dhat = d / c4;             // coefficient of 1/s in the bracket bound
  const double Dcheck = d * (1.0 / c4 - 1.0);  // same, inside the case-1 log

  const std::vector<Vec> theta_pts = distinct_theta_points(domain, wall);
  auto max_m = [&](double s) {
    double best = 0.0;
    for (const Vec& x : theta_pts) best = std::max(best, wall.maxwellian_speed(x, s, n));
    return best;
  };

  auto W = [&](double s) {
    double base = kE2 + Dhat / s;
    switch (lyapunov_case) {
      case 1:
        return std::pow(base, i) * std::pow(std::log(kE2 + Dcheck / s), log_power);
      case 2:
        return std::pow(base, i);
      default:
        return base * std::pow(std::log(base), 0.1);
    }
  };

  const double half_sphere = (n == 2) ? kPi : 2.0 * kPi;  // Omega_n / 2
  const double theta_max = wall.theta_max();
  const double s_max = 14.0 * std::sqrt(theta_max);
  const double delta_cut = 1e-6 * std::sqrt(wall.theta_min());

  // numeric part on [delta_cut, s_max], integrated in y = ln s
  auto integrand_y = [&](double y) {
    double s = std::exp(y);
    return max_m(s) * std::pow(s, n) * W(s) * s;  // ds = s dy
  };
  double coarse = 0.0;
  {
    int K = 200;
    double ylo = std::log(delta_cut), yhi = std::log(s_max);
    for (int k = 0; k < K; ++k)
      coarse += integrand_y(ylo + (k + 0.5) * (yhi - ylo) / K) * (yhi - ylo) / K;
  }
  double numeric = integrate(integrand_y, std::log(delta_cut), std::log(s_max),
                             1e-10 * (1.0 + std::abs(coarse)));

  // analytic bounds for the [0, delta_cut] tail
  double tail_hi = 0.0, tail_lo = 0.0;
  const double mm0 = max_m(0.0);
  const double mmd = max_m(delta_cut);
  const double inflate = std::pow(1.0 + kE2 * delta_cut / Dhat, i);
  if (lyapunov_case == 1) {
    if (std::abs(i - (n + 1.0)) < 1e-12) {
      // int_0^delta s^{-1} ln(c/s)^{-(1+eps)} ds = ln(c/delta)^{-eps} / eps
      tail_hi = mm0 * inflate * std::pow(Dhat, i) *
                std::pow(std::log(Dcheck / delta_cut), -eps) / eps;
      tail_lo = mmd * std::pow(Dhat, i) *
                std::pow(std::log((kE2 * delta_cut + Dcheck) / delta_cut), -eps) / eps;
    } else {
      double p = n - i + 1.0;  // >= 1 here
      tail_hi = mm0 * inflate * std::pow(Dhat, i) * std::pow(delta_cut, p) / p *
                std::pow(std::log(Dcheck / delta_cut), log_power);
      tail_lo = 0.0;
    }
  } else if (lyapunov_case == 2) {
    double p = n - i + 1.0;  // >= 1/2
    tail_hi = mm0 * inflate * std::pow(Dhat, i) * std::pow(delta_cut, p) / p;
    tail_lo = 0.0;
  } else {
    double C = kE2 * delta_cut + Dhat;
    double L = std::log(C / delta_cut);
    tail_hi = mm0 * C * std::pow(delta_cut, n - 1) * delta_cut * std::pow(L, 0.1) *
              (1.0 + 0.1 / L);
    tail_lo = 0.0;
  }

  out.a1_lo = half_sphere * (numeric + tail_lo);
  out.a1_hi = half_sphere * (numeric + tail_hi);

  // Delta = c0 min_x int_{v.n > 0, |v| <= 1} M(x, v) (v.n)^2 dv
  const double angular = (n == 2) ? kPi / 2.0 : 2.0 * kPi / 3.0;
  double min_flux = std::numeric_limits<double>::infinity();
  for (const Vec& xb : theta_pts) {
    double flux = integrate(
        [&](double s) { return wall.maxwellian_speed(xb, s, n) * std::pow(s, n + 1); }, 0.0,
        1.0, 1e-13);
    min_flux = std::min(min_flux, flux);
  }
  out.delta = wall.c0() * angular * min_flux;
  out.n_w1inf = domain.normal_field_w1inf();
  out.b = out.a1_hi / out.delta * std::max(2.0, out.n_w1inf);
  return out;
}

}  // namespace knudsen
