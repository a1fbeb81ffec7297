#ifndef SNSQKD_ORACLE_HPP
#define SNSQKD_ORACLE_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "snsqkd/estimator.hpp"
#include "snsqkd/model.hpp"
#include "snsqkd/photonics.hpp"

#include <json.hpp>

namespace snsqkd::oracle {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Two-mode state over |n_A, n_B>, n_A, n_B <= cutoff, index nA*(cutoff+1)+nB.
struct FockState {
    int cutoff = 0;
    Vector amp;

    int dim() const { return (cutoff + 1) * (cutoff + 1); }
    double norm() const { return amp.norm(); }
};

struct DensityOperator {
    int cutoff = 0;
    Matrix mat;

    double trace() const { return mat.trace().real(); }
};

// Truncated single-mode coherent state e^{-|a|^2/2} a^n/sqrt(n!). Errors out
// when the truncation is inadequate (|a|^2 > cutoff/4 or tail mass > 1e-12).
Vector coherent_single(Complex alpha, int cutoff);

FockState two_mode_product(const Vector& mode_a, const Vector& mode_b, int cutoff);

// |alpha~>: the non-vacuum part of a coherent state,
// (|alpha> - e^{-mu/2}|0>)/sqrt(1-e^{-mu}). Its vacuum component is zero by
// construction.
Vector alpha_tilde_single(Complex alpha, int cutoff);

// Named protocol states; alpha_A = sqrt(mu), alpha_B = sqrt(mu) e^{i delta}.
FockState vacuum_state(int cutoff);
FockState state_alpha_alpha(double mu, double delta, int cutoff);
FockState state_0_alpha(double mu, double delta, int cutoff);
FockState state_alpha_0(double mu, int cutoff);
FockState chi_state(int sign, double mu, double delta, int cutoff);

// Balanced beamsplitter exp((pi/4)(a^dag b - a b^dag)) on the truncated
// space, built block-diagonally over total photon number. Blocks N <= cutoff
// are exact; the clipped high blocks stay unitary but only matter for
// amplitudes beyond the truncation guard.
class Beamsplitter {
  public:
    explicit Beamsplitter(int cutoff);
    Vector apply(const Vector& in) const;
    int cutoff() const { return cutoff_; }

  private:
    int cutoff_;
    std::vector<Matrix> blocks_;           // per total photon number N
    std::vector<std::vector<int>> index_;  // flat indices of each block's basis states
};

// Honest interferometric detection: beamsplitter, then threshold detectors
// with per-photon detection probability eta, misalignment rerouting e_a and
// dark counts p_dark mixed in classically. The POVM elements for the four
// outcomes are the per-mode no-click effects conjugated by the beamsplitter.
struct DetectionModel {
    double eta = 1.0;
    double e_a = 0.0;
    double p_dark = 0.0;
};

ClickDistribution fock_click_distribution(const FockState& input, const DetectionModel& det,
                                          const Beamsplitter& bs);

// ||chi+_direct - (c0|0,0> + c1|aa> - c2|a~a~>)||; also enforces the
// vacuum-orthogonality of |alpha~> componentwise.
double verify_chi_decomposition(double mu, int cutoff);

// Trace distance between rho_Ztilde = (|0,a><0,a| + |a,0><a,0|)/2 and
// rho_X = (N+^2 rho_+ + N-^2 rho_-)/4.
double verify_rho_equality(double mu, int cutoff);

// Exhaustive trace-distance evaluation through a dense eigensolve, for
// cross-checking the production path at small cutoffs.
double verify_rho_equality_dense(double mu, int cutoff);

struct CauchyReport {
    std::int64_t trials = 0;
    std::int64_t checks = 0;
    std::int64_t violations = 0;
    double min_margin = 1.0;  // most negative = worst; >= 0 means contained
};

// Bound function signature: (s_o_d, s_b_d, mu) -> bounds. The default is
// s_xplus_bounds; tests inject mutated variants to prove sensitivity.
using BoundFn = YieldBounds (*)(double, double, double);

// Draws random two-outcome POVMs {M, 1-M} with M from a scaled Ginibre
// factor, computes exact Born-rule yields of |0,0>, |alpha,alpha> and
// |chi+>, and checks the |chi+> yield against the bounds computed from the
// other two. Deterministic given seed.
CauchyReport verify_cauchy_bounds(double mu, std::int64_t trials, std::uint64_t seed,
                                  int cutoff = 40, BoundFn bounds = &s_xplus_bounds);

// Exact asymptotic phase-flip error rate of the virtual X-window protocol
// under honest detection: (P+ pR(chi+) + P- pL(chi-)) / (P+ pEff(chi+) +
// P- pEff(chi-)).
double exact_eph(const ProtocolParams& params, const ChannelParams& ch, int cutoff = 40,
                 double delta = 0.0);

// Monte Carlo version: samples n_virtual_windows X windows (X+ with
// probability (1+e^-mu)/2) and counts (n_X+^R + n_X-^L)/n_X.
// n_virtual_windows = 0 falls back to the exact asymptotic value.
double brute_force_eph(const ProtocolParams& params, const ChannelParams& ch, std::uint64_t seed,
                       std::int64_t n_virtual_windows, int cutoff = 40, double delta = 0.0);

struct VerifyRow {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::vector<VerifyRow> rows;
    bool all_pass = true;

    void add(const std::string& name, double value, double tolerance, bool pass_condition);
};

// The full identity suite used by the verify CLI command.
VerifyReport run_verification_suite(int cutoff, std::int64_t cauchy_trials, std::uint64_t seed);

nlohmann::json to_json(const VerifyReport& r);

}  // namespace snsqkd::oracle

#endif  // SNSQKD_ORACLE_HPP
