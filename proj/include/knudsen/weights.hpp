#pragma once

#include <string>

#include "knudsen/geometry.hpp"
#include "knudsen/transport.hpp"
#include "knudsen/wall.hpp"

namespace knudsen {

// <x,v> = e^2 + d(D) / (|v| c4) - sigma(x, -v). Always >= e^2; +infinity when
// v == 0 (the weight family blows up like |v|^{-i} there).
double bracket(const Domain& domain, double c4, const Vec& x, const Vec& v);

// Weight family over phase space. bracket_power_log covers the omega / m
// ladders; the log exponents are kept as configuration (defaults 1.6 and 0.1).
struct WeightSpec {
  enum class Kind {
    BracketPowerLog,  // <x,v>^i ln(<x,v>)^{log_exp}
    Omega,            // <x,v>^i ln(<x,v>)^{-log_coeff},   log_coeff default 1.6
    M,                // <x,v>^i ln(<x,v>)^{-log_coeff n/(n+1)}
    Tilde,            // <x,v>^{i - 1/2}
    W1Log,            // <x,v> ln(<x,v>)^{w_exp}
    W0Log,            // ln(<x,v>)^{w_exp}
    RPoly,            // (1 + sigma(x, v))^{nu}
    ExpSigma          // exp(sigma(x, v))
  };
  Kind kind = Kind::Omega;
  double i = 1.0;
  double log_exp = -1.6;    // BracketPowerLog only
  double nu = 1.0;          // RPoly only
  double log_coeff = 1.6;   // Omega / M families
  double w_exp = 0.1;       // W0Log / W1Log

  static WeightSpec bracket_power_log(double i, double log_exp) {
    WeightSpec w; w.kind = Kind::BracketPowerLog; w.i = i; w.log_exp = log_exp; return w;
  }
  static WeightSpec omega(int i) { WeightSpec w; w.kind = Kind::Omega; w.i = i; return w; }
  static WeightSpec m(int i) { WeightSpec w; w.kind = Kind::M; w.i = i; return w; }
  static WeightSpec tilde(int i) { WeightSpec w; w.kind = Kind::Tilde; w.i = i; return w; }
  static WeightSpec w1_log() { WeightSpec w; w.kind = Kind::W1Log; return w; }
  static WeightSpec w0_log() { WeightSpec w; w.kind = Kind::W0Log; return w; }
  static WeightSpec r_poly(double nu) { WeightSpec w; w.kind = Kind::RPoly; w.nu = nu; return w; }
  static WeightSpec exp_sigma() { WeightSpec w; w.kind = Kind::ExpSigma; return w; }

  std::string key() const;  // CSV column suffix, e.g. "omega_3", "rpoly_1.5"
};

double evaluate(const WeightSpec& spec, const Domain& domain, double c4, const Vec& x,
                const Vec& v);

// Monte Carlo estimate of |f|_w as the ensemble average of the weight.
// Particles with v == 0 carry an infinite weight; they are excluded from the
// moments and reported through n_infinite / flagged_infinite.
//
// tail_index is a Hill estimate on the k = n^{2/3} largest sampled weights;
// values at or below 1 indicate a diverging mean (the f_inf vs omega_{n+1}
// situation), below 2 a diverging variance.
struct NormEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_infinite = 0;
  bool flagged_infinite = false;
  double tail_index = 0.0;
  bool mean_tail_ok = true;      // tail_index > 1
  bool variance_tail_ok = true;  // tail_index > 2
};

NormEstimate weighted_norm(const Ensemble& ens, const WeightSpec& spec, const Domain& domain,
                           double c4);

// Explicit constants of the integrated Lyapunov inequality
//   |S_T f|_{m1} + C int_0^T |S_s f|_{m0} ds <= |f|_{m1} + b (1+T) |f|_{L1}
// for the three weight-couple cases:
//   case 1: (m1, m0) = (<>^i ln^{-(1+eps)}, <>^{i-1} ln^{-(1+eps)}),
//           integer i in [2, n+1], eps in (0,3);      C = i - (1+eps)/2
//   case 2: (<>^i, <>^{i-1}), half-integer i in [3/2, n+1/2];   C = i
//   case 3: (<> ln^{0.1}, ln^{0.1});                            C = 1
// b = a1 / Delta * max(2, |n.|_{W^{1,inf}}), with a1 the half-space flux bound
// evaluated by quadrature (certified interval: the weight tail near |v| = 0 is
// integrated analytically) and Delta the minimal quadratic wall flux.
struct LyapunovConstants {
  double C = 0.0;
  double b = 0.0;       // from the upper end of the a1 interval
  double a1_lo = 0.0;
  double a1_hi = 0.0;
  double delta = 0.0;   // the min flux constant
  double n_w1inf = 0.0;
  WeightSpec m1;
  WeightSpec m0;
};

LyapunovConstants lyapunov_constants(int lyapunov_case, double i, double eps,
                                     const Domain& domain, const WallModel& wall);

}  // namespace knudsen
