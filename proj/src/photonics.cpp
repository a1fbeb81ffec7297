#include "snsqkd/photonics.hpp"

#include <cmath>
#include <complex>

namespace snsqkd {

ClickDistribution product_coherent_clicks(double intensity_a, double intensity_b, double delta,
                                          double e_a, double p_dark) {
    if (intensity_a < 0.0 || intensity_b < 0.0) {
        throw validation_error("product_coherent_clicks: negative intensity");
    }
    const double interference = 2.0 * std::sqrt(intensity_a * intensity_b) * std::cos(delta);
    const double i_l = 0.5 * (intensity_a + intensity_b + interference);
    const double i_r = 0.5 * (intensity_a + intensity_b - interference);
    const double i_l_mix = (1.0 - e_a) * i_l + e_a * i_r;
    const double i_r_mix = (1.0 - e_a) * i_r + e_a * i_l;
    const double p_l = 1.0 - (1.0 - p_dark) * std::exp(-i_l_mix);
    const double p_r = 1.0 - (1.0 - p_dark) * std::exp(-i_r_mix);
    ClickDistribution d;
    d.p_l_only = p_l * (1.0 - p_r);
    d.p_r_only = p_r * (1.0 - p_l);
    d.p_both = p_l * p_r;
    d.p_none = (1.0 - p_l) * (1.0 - p_r);
    return d;
}

namespace {

// <b|(1-x)^n|a> for single-mode coherent amplitudes a (ket) and b (bra).
std::complex<double> attenuated_overlap(std::complex<double> b, std::complex<double> a,
                                        double x) {
    const double na = std::norm(a);
    const double nb = std::norm(b);
    return std::exp(-0.5 * (na + nb) + (1.0 - x) * std::conj(b) * a);
}

}  // namespace

ClickDistribution chi_clicks(int sign, double mu, double delta, double eta, double e_a,
                             double p_dark) {
    if (sign != 1 && sign != -1) throw validation_error("chi_clicks: sign must be +-1");
    if (mu <= 0.0) throw validation_error("chi_clicks: mu must be > 0");
    const std::complex<double> alpha_a{std::sqrt(mu), 0.0};
    const std::complex<double> alpha_b = std::sqrt(mu) * std::exp(std::complex<double>(0.0, delta));
    const double inv_sqrt2 = 0.70710678118654752440;
    // Balanced beamsplitter: L = (A+B)/sqrt2, R = (B-A)/sqrt2.
    const std::complex<double> u_l = alpha_b * inv_sqrt2;  // branch |0,alpha_B>
    const std::complex<double> u_r = alpha_b * inv_sqrt2;
    const std::complex<double> v_l = alpha_a * inv_sqrt2;  // branch |alpha_A,0>
    const std::complex<double> v_r = -alpha_a * inv_sqrt2;
    const double norm_sq = 2.0 * (1.0 + sign * std::exp(-mu));

    // Expectation of (1-x)^{n_L} (1-y)^{n_R} over |chi_sign>.
    const auto no_click = [&](double x, double y) {
        const double uu =
            std::real(attenuated_overlap(u_l, u_l, x) * attenuated_overlap(u_r, u_r, y));
        const double vv =
            std::real(attenuated_overlap(v_l, v_l, x) * attenuated_overlap(v_r, v_r, y));
        const std::complex<double> uv =
            attenuated_overlap(u_l, v_l, x) * attenuated_overlap(u_r, v_r, y);
        return (uu + vv + sign * 2.0 * std::real(uv)) / norm_sq;
    };

    const double x_direct = eta * (1.0 - e_a);  // photon reaches its own detector
    const double x_cross = eta * e_a;           // photon rerouted to the other detector
    const double nc_l = (1.0 - p_dark) * no_click(x_direct, x_cross);
    const double nc_r = (1.0 - p_dark) * no_click(x_cross, x_direct);
    const double nc_none = (1.0 - p_dark) * (1.0 - p_dark) * no_click(eta, eta);

    ClickDistribution d;
    d.p_l_only = nc_r - nc_none;
    d.p_r_only = nc_l - nc_none;
    d.p_none = nc_none;
    d.p_both = 1.0 - nc_l - nc_r + nc_none;
    return d;
}

ClickDistribution click_distribution(WindowClass c, double delta, const ProtocolParams& params,
                                     const ChannelParams& ch) {
    params.validate();
    switch (c) {
        case WindowClass::ztilde_a:
            return product_coherent_clicks(arm_transmittance(ch, 0) * params.mu, 0.0, delta,
                                           ch.e_a, ch.p_dark);
        case WindowClass::ztilde_b:
            return product_coherent_clicks(0.0, arm_transmittance(ch, 1) * params.mu, delta,
                                           ch.e_a, ch.p_dark);
        case WindowClass::both:
            return product_coherent_clicks(arm_transmittance(ch, 0) * params.mu,
                                           arm_transmittance(ch, 1) * params.mu, delta, ch.e_a,
                                           ch.p_dark);
        case WindowClass::neither:
            return product_coherent_clicks(0.0, 0.0, delta, ch.e_a, ch.p_dark);
        case WindowClass::x_plus:
        case WindowClass::x_minus: {
            if (ch.charlie_position != 0.5) {
                throw validation_error(
                    "click_distribution: x_plus/x_minus require the midpoint split");
            }
            const int sign = c == WindowClass::x_plus ? 1 : -1;
            return chi_clicks(sign, params.mu, delta, arm_transmittance(ch), ch.e_a, ch.p_dark);
        }
    }
    throw validation_error("click_distribution: bad window class");
}

double acceptance_fraction(double lambda) {
    if (lambda < 0.0 || lambda > 1.0) {
        throw validation_error("acceptance_fraction: lambda must be in [0,1]");
    }
    return 2.0 * std::acos(1.0 - lambda) / 3.14159265358979323846;
}

EffectiveRates effective_rates(WindowClass c, const ProtocolParams& params,
                               const ChannelParams& ch, PhaseMode mode, int quad_nodes,
                               bool relabel_antiphase) {
    if (mode == PhaseMode::compensation) {
        const ClickDistribution d = click_distribution(c, 0.0, params, ch);
        return {d.p_l_only, d.p_r_only};
    }
    if (quad_nodes < 1) throw validation_error("effective_rates: quad_nodes must be >= 1");
    const double lambda = params.lambda_ps;
    const double delta0 = std::acos(1.0 - lambda);
    if (delta0 <= 0.0) {
        throw validation_error(
            "effective_rates: post-selection acceptance set is empty (lambda = 0)");
    }
    if (c != WindowClass::both && c != WindowClass::x_plus && c != WindowClass::x_minus) {
        // One or both inputs are vacuum: no interference, so the rates carry
        // no delta dependence and the phase average is the delta=0 value.
        const ClickDistribution d = click_distribution(c, 0.0, params, ch);
        return {d.p_l_only, d.p_r_only};
    }
    // Accepted deltas are [-d0,d0] union [pi-d0,pi+d0]. With anti-phase
    // relabelling the pi side reproduces the 0 side exactly, so a midpoint
    // rule on [0,d0] covers the whole accepted measure.
    double acc_l = 0.0;
    double acc_r = 0.0;
    const double h = delta0 / quad_nodes;
    for (int k = 0; k < quad_nodes; ++k) {
        const double delta = (k + 0.5) * h;
        const ClickDistribution d = click_distribution(c, delta, params, ch);
        if (relabel_antiphase) {
            acc_l += d.p_l_only;
            acc_r += d.p_r_only;
        } else {
            const ClickDistribution anti = click_distribution(c, 3.14159265358979323846 - delta,
                                                              params, ch);
            acc_l += 0.5 * (d.p_l_only + anti.p_l_only);
            acc_r += 0.5 * (d.p_r_only + anti.p_r_only);
        }
    }
    return {acc_l / quad_nodes, acc_r / quad_nodes};
}

}  // namespace snsqkd
