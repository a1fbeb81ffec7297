#ifndef SNSQKD_ESTIMATOR_HPP
#define SNSQKD_ESTIMATOR_HPP

#include <cstdint>

#include "snsqkd/model.hpp"
#include "snsqkd/photonics.hpp"

#include <json.hpp>

namespace snsqkd {

class undefined_rate_error : public std::runtime_error {
  public:
    explicit undefined_rate_error(const std::string& what) : std::runtime_error(what) {}
};

// Binary entropy H(x) = -x log2 x - (1-x) log2 (1-x), extended by H(0)=H(1)=0.
double entropy(double x);

// Expansion coefficients of |chi+> over {|0,0>, |alpha_A,alpha_B>,
// |alpha~_A,alpha~_B>} together with the normalisation constants of the
// |chi+-> states. The third component enters the state with a minus sign;
// the bounds only use magnitudes.
struct ChiDecomposition {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double n_plus_sq = 0.0;   // |N+|^2 = 2(1+e^-mu)
    double n_minus_sq = 0.0;  // |N-|^2 = 2(1-e^-mu)
};

ChiDecomposition chi_plus_coefficients(double mu);

struct YieldBounds {
    double lower = 0.0;
    double upper = 0.0;
    bool clamped_lower = false;
    bool clamped_upper = false;
};

// Cauchy-inequality bounds on the yield of a state c0|phi0> + c1|phi1> +
// c2|phi2> given the observed yields of |phi0> and |phi1> under the same
// (arbitrary) measurement:
//   upper = c0^2 S0 + c1^2 S1 + c2^2 + cross,
//   lower = c0^2 S0 + c1^2 S1 - cross,
//   cross = 2|c0 c1| sqrt(S0 S1) + 2|c0 c2| sqrt(S0) + 2|c1 c2| sqrt(S1),
// clamped to [0,1].
YieldBounds yield_bounds_generic(double c0, double c1, double c2, double s_phi0, double s_phi1);

// Bounds on the |chi+> yield from the vacuum-window and both-send-window
// yields. Written out as the explicit closed form (an independent code path
// from yield_bounds_generic; the two must agree term by term).
YieldBounds s_xplus_bounds(double s_o_d, double s_b_d, double mu);

enum class PhaseFlipVariant {
    appendix,  // prefactor 1+e^-mu, from the derivation chain
    outline,   // prefactor 1+e^-2mu, as printed in the outline; comparison only
};

// Upper bound on the phase-flip error rate,
//   ebar = [(1+e^-mu)(S_X+^R_upper - S_X+^L_lower) + 2 S_Z^L] / (2(S_Z^L + S_Z^R)),
// clamped to [0,1].
double phase_flip_upper(double s_ztilde_l, double s_ztilde_r, double s_xplus_upper_r,
                        double s_xplus_lower_l, double mu,
                        PhaseFlipVariant variant = PhaseFlipVariant::appendix);

// Observed per-class, per-detector effective-event rates. These are
// class-level aggregates; nothing per-window (in particular nothing from the
// undisclosed u set) enters the estimator.
struct YieldSet {
    double s_ztilde_l = 0.0;
    double s_ztilde_r = 0.0;
    double s_b_l = 0.0;
    double s_b_r = 0.0;
    double s_o_l = 0.0;
    double s_o_r = 0.0;

    double s_ztilde() const { return s_ztilde_l + s_ztilde_r; }
    double s_b() const { return s_b_l + s_b_r; }
    double s_o() const { return s_o_l + s_o_r; }
};

struct BoundSet {
    double s_xplus_upper_r = 0.0;
    double s_xplus_lower_l = 0.0;
    double e_ph_upper = 0.0;
    int clamp_events = 0;
    // inputs echoed for provenance
    double mu = 0.0;
    YieldSet yields;
};

BoundSet derive_bounds(const YieldSet& yields, double mu,
                       PhaseFlipVariant variant = PhaseFlipVariant::appendix);

struct KeyRateReport {
    double e_z = 0.0;
    double e_ph_upper = 0.0;
    double s_ztilde = 0.0;       // effective fraction of Ztilde windows
    double s_total = 0.0;        // effective fraction over all windows
    double rate_per_window = 0.0;
    double n_f = 0.0;
    bool no_key = false;
    double acceptance = 1.0;     // post-selected fraction of windows (1 in compensation)
    ProtocolParams params;
};

// Tagged-model key rate:
//   rate = P(Ztilde) S_Z (1 - H(ebar_ph)) - f S_tot H(E_Z)
// per (accepted) window; ebar_ph >= 1/2 or E_Z >= 1/2 give no key. Negative
// rates report 0 with the no_key flag.
KeyRateReport key_rate(const YieldSet& yields, double e_z, double e_ph_upper,
                       const ProtocolParams& params);

// Closed-form yields for the protocol's observable classes.
YieldSet analytic_yields(const ProtocolParams& params, const ChannelParams& ch, PhaseMode mode,
                         int quad_nodes = 2048);

// Analytic bit-flip error rate implied by the yields and class priors.
double analytic_bit_flip(const YieldSet& yields, const ProtocolParams& params);

// Full analytic pipeline: yields -> E_Z -> bounds -> key rate. In
// post-selection mode the reported per-window rate includes the acceptance
// fraction.
KeyRateReport analytic_key_rate(const ProtocolParams& params, const ChannelParams& ch,
                                int quad_nodes = 2048);

struct OptimizationResult {
    double q = 0.0;
    double mu = 0.0;
    double lambda = 0.0;
    KeyRateReport report;
    std::int64_t evaluations = 0;
};

// Deterministic coarse-to-fine grid search over (q, mu) and, in
// post-selection mode, lambda. Ties break toward lexicographically smaller
// (q, mu, lambda).
OptimizationResult optimize(const ChannelParams& ch, double f, PhaseMode mode,
                            int quad_nodes = 512);

nlohmann::json to_json(const BoundSet& b);
nlohmann::json to_json(const KeyRateReport& r);
nlohmann::json to_json(const OptimizationResult& r);

}  // namespace snsqkd

#endif  // SNSQKD_ESTIMATOR_HPP
