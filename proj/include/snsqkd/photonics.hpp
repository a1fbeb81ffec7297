#ifndef SNSQKD_PHOTONICS_HPP
#define SNSQKD_PHOTONICS_HPP

#include "snsqkd/model.hpp"

namespace snsqkd {

// Joint outcome probabilities of Charlie's two threshold detectors for one
// time window.
struct ClickDistribution {
    double p_l_only = 0.0;
    double p_r_only = 0.0;
    double p_both = 0.0;
    double p_none = 1.0;

    double sum() const { return p_l_only + p_r_only + p_both + p_none; }
    double p_effective() const { return p_l_only + p_r_only; }
    ClickDistribution swapped() const { return {p_r_only, p_l_only, p_both, p_none}; }
};

// Detection model for two coherent inputs of the given post-loss
// intensities interfering on a balanced beamsplitter:
//   I_L = (I_A + I_B + 2*sqrt(I_A I_B) cos delta)/2, I_R likewise with -,
// misalignment mixes the branches, I_L' = (1-e_a) I_L + e_a I_R, and each
// detector clicks with 1 - (1-p_dark) exp(-I'). Detectors are independent
// threshold detectors.
ClickDistribution product_coherent_clicks(double intensity_a, double intensity_b, double delta,
                                          double e_a, double p_dark);

// Detection model for the oracle's superposed states
// |chi+-> = (|0,alpha_B> +- |alpha_A,0>)/N with |alpha|^2 = mu and relative
// phase delta. Arm loss and detector efficiency enter as the per-photon
// detection probability eta; misalignment reroutes a detected photon to the
// wrong detector with probability e_a. Exact for symmetric arms, where loss
// commutes with the beamsplitter.
ClickDistribution chi_clicks(int sign, double mu, double delta, double eta, double e_a,
                             double p_dark);

// Per-window click distribution for a window class at residual phase delta.
// Real classes use the coherent closed form with per-arm transmittances from
// the channel; the virtual x_plus/x_minus classes (oracle use) require the
// midpoint split.
ClickDistribution click_distribution(WindowClass c, double delta, const ProtocolParams& params,
                                     const ChannelParams& ch);

struct EffectiveRates {
    double s_l = 0.0;  // fraction of class windows with an L-only click
    double s_r = 0.0;
};

// Fraction of the accepted phase circle, 2*arccos(1-lambda)/pi.
double acceptance_fraction(double lambda);

// Effective-event rates per class. Compensation mode evaluates at delta = 0.
// Post-selection mode averages over the accepted set {1 - |cos d| <= lambda}
// by midpoint quadrature; on the anti-phase half (cos d < 0) the detector
// labels are logically relabelled (toggleable).
EffectiveRates effective_rates(WindowClass c, const ProtocolParams& params,
                               const ChannelParams& ch, PhaseMode mode, int quad_nodes = 2048,
                               bool relabel_antiphase = true);

}  // namespace snsqkd

#endif  // SNSQKD_PHOTONICS_HPP
