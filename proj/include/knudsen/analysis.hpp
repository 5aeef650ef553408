#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "knudsen/geometry.hpp"
#include "knudsen/stats.hpp"
#include "knudsen/transport.hpp"
#include "knudsen/weights.hpp"

namespace knudsen {

// Phase-space binning: regular spatial cells over the bounding box intersected
// with D, geometric speed shells on [0, v_cut], angular direction sectors
// (8 in 2D, octant x dominant-axis = 24 in 3D). Mass beyond v_cut goes to a
// single tail bucket.
struct Binning {
  int spatial_per_axis = 8;
  int n_shells = 8;
  int n_sectors = 8;
  double v_cut = 6.0;

  static Binning defaults(const Domain& domain, double theta_max);
  Binning halved() const;

  std::size_t n_cells(const Domain& domain) const;
  // flat cell index, or -1 for the speed tail
  long cell_index(const Domain& domain, const Vec& x, const Vec& v) const;
  double shell_edge(int k) const;  // k in [0, n_shells]
};

struct BinnedMass {
  std::vector<double> mass;
  double tail = 0.0;
  double total = 0.0;
  double n_effective = 0.0;  // (sum w)^2 / sum w^2; infinite for quadrature references
};

BinnedMass bin_ensemble(const Ensemble& ens, const Domain& domain, const Binning& bins);

// Reference stationary state: closed form for constant wall temperature
// (spatially uniform Maxwellian), or an empirical long-run snapshot.
class EquilibriumModel {
 public:
  static EquilibriumModel constant_theta(double theta);
  static EquilibriumModel empirical(Ensemble snapshot);

  bool is_empirical() const { return empirical_; }
  double theta() const { return theta_; }
  // density of the closed-form equilibrium at (x, v); requires !is_empirical()
  double density(const Domain& domain, const Vec& x, const Vec& v) const;
  BinnedMass binned(const Domain& domain, const Binning& bins) const;

 private:
  bool empirical_ = false;
  double theta_ = 1.0;
  Ensemble snapshot_;
};

struct L1Record {
  double distance = 0.0;
  double err_sampling = 0.0;
  double bias_proxy = 0.0;
  std::size_t n_cells = 0;
  bool over_resolved = false;
};

L1Record l1_distance(const Ensemble& ens, const EquilibriumModel& eq, const Domain& domain,
                     const Binning& bins);
L1Record l1_between(const Ensemble& a, const Ensemble& b, const Domain& domain,
                    const Binning& bins);

// --- decay curves ------------------------------------------------------------

struct CurvePoint {
  double t = 0.0;
  double mass = 0.0;
  double l1 = 0.0;
  double l1_err = 0.0;
  double l1_bias = 0.0;
  std::map<std::string, NormEstimate> norms;
};

struct FitModel {
  bool log_correction = false;
  double log_power = 0.0;
  static FitModel pure_power() { return {false, 0.0}; }
  static FitModel power_with_log(double p) { return {true, p}; }
};

struct FitResult {
  double exponent = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  bool log_correction = false;
  double log_power = 0.0;
  double window_lo = 0.0, window_hi = 0.0;  // actually used
  int n_points = 0;
  bool shrunk = false;   // noise floor removed requested points
  bool refused = false;  // too few points above the noise floor
  std::string note;
};

// Weighted least squares of ln d against ln(1+t) (optionally with a fixed
// p ln ln(1+t) offset); CI by residual bootstrap with 199 resamples.
// Points with d <= 3 err are treated as noise floor and dropped.
FitResult fit_decay(const std::vector<CurvePoint>& curve, double window_lo, double window_hi,
                    const FitModel& model);

// --- Lyapunov audit ----------------------------------------------------------

struct LyapunovAuditResult {
  LyapunovConstants constants;
  double lhs = 0.0, rhs = 0.0;
  double margin = 0.0;        // rhs - lhs
  double se_combined = 0.0;
  double norm_m1_initial = 0.0, norm_m1_final = 0.0, integral_m0 = 0.0;
  double sentinel_fraction = 0.0;
  bool aborted = false;
  std::string verdict;  // PASS / FAIL / ABORTED
  std::uint64_t seed = 0;
};

LyapunovAuditResult lyapunov_audit(const InitialData& initial, double T, int lyapunov_case,
                                   double i, double eps, std::size_t n_particles,
                                   std::uint64_t seed, const Domain& domain,
                                   const WallModel& wall, int n_checkpoints = 33,
                                   int workers = 1);

// --- Doeblin-Harris probe ----------------------------------------------------

struct DoeblinOptions {
  double R = 3.0;
  double kappa = 6.0;  // T(R) = kappa R; kappa = 2P + 2 with P = 2 for the disk
  int grid_spatial = 8;
  int grid_shells = 4;
  int grid_sectors = 8;
  int n_initial_cells = 10;
  std::size_t n_particles = 100000;
  std::uint64_t seed = 1;
  double tau_min = 0.0;            // PASS requires min density > tau_min
  double cell_jitter = 1e-3;       // radius of the point-mass-like initial cells
  double proxy_fraction_min = 0.1; // grid cell joins the probe if this fraction
                                   // of its volume lies in the support proxy
  int proxy_volume_samples = 256;
  int workers = 1;
};

struct DoeblinResult {
  std::string verdict;  // PASS / FAIL / INCONCLUSIVE
  double min_density = 0.0;
  double empirical_constant = 0.0;  // min density x probe volume
  std::size_t n_probe_cells = 0;
  std::size_t n_empty_all = 0;   // probe cells missed by every initial cell
  std::size_t n_empty_some = 0;  // probe cells missed by at least one
  double probe_volume = 0.0;
  std::uint64_t seed = 0;
  std::string note;
};

// Simulates point-mass-like initial data inside B_R = {sigma <= R} to
// T(R) = kappa R and checks that the evolved law has positive density on a
// coarse grid restricted to the support proxy {sigma(x, -v) in [R, 2R]}.
DoeblinResult doeblin_probe(const DoeblinOptions& opt, const Domain& domain,
                            const WallModel& wall);

// --- unit-disk h_P positivity ------------------------------------------------

struct HpResult {
  double min_hp = 0.0;
  double max_hp = 0.0;
  double min_measure = 0.0;  // Hausdorff measure of H_{a,b}
  double min_chord = 0.0, max_chord = 0.0;
  bool chords_ok = false;
  int n_pairs = 0;
  std::string verdict;
};

// Quadrature of the two-step visibility kernel h_P (P = 2) on the unit disk
// over H_{a,b} = {y on the boundary : y.a <= sqrt(2)/2 and y.b <= sqrt(2)/2},
// for random boundary pairs (a, b). On H both chords lie in
// [sqrt(2 - sqrt 2), d(D)] and the arc measure is at least pi.
HpResult hp_positivity_check(const Domain& disk, const WallModel& wall, double R, int n_pairs,
                             std::uint64_t seed, int nodes_per_arc = 256);

// --- stationarity ------------------------------------------------------------

struct StationarityResult {
  struct Test {
    std::string name;
    double statistic = 0.0;
    double critical = 0.0;
    bool pass = false;
  };
  std::vector<Test> tests;
  bool pass = false;
  std::uint64_t seed = 0;
};

// Samples the candidate, evolves burn_in, snapshots, evolves horizon more and
// compares the two snapshots: speed-marginal KS, spatial-sector chi^2 and
// direction-sector chi^2, all at level alpha.
StationarityResult stationarity_test(const InitialData& candidate, double burn_in,
                                     double horizon, std::size_t n_particles,
                                     std::uint64_t seed, const Domain& domain,
                                     const WallModel& wall, double alpha = 0.01,
                                     int workers = 1);

// --- absorbing bounds --------------------------------------------------------

struct AbsorbingBoundResult {
  std::string weight_key;
  double norm_value = 0.0;
  double norm_err = 0.0;
  struct Point {
    double t = 0.0;
    double mass = 0.0;
    double mass_err = 0.0;
    double bound = 0.0;
    bool pass = false;
  };
  std::vector<Point> points;
  bool pass = false;
};

// Theorem-style bound mass(t) <= Theta(t) |f0|_m with Theta = e^{-t} for the
// exp-sigma weight and (1+t)^{-nu} for r_nu; both sides by Halton quadrature.
AbsorbingBoundResult absorbing_bound_check(const InitialData& initial, const WeightSpec& weight,
                                           const std::vector<double>& times,
                                           const Domain& domain,
                                           std::uint64_t n_nodes = 1 << 20);

struct DecayShape {
  double poly_exponent = 0.0;     // log-log slope over the last two points
  double exp_extrapolation = 0.0; // exponential forecast of the last mass
  double last_mass = 0.0;
  bool polynomial = false;        // last mass far above the exponential forecast
};

DecayShape classify_mass_decay(const std::vector<double>& times,
                               const std::vector<double>& masses);

}  // namespace knudsen
