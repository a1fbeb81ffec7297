#include "snsqkd/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace snsqkd {

double entropy(double x) {
    if (x < 0.0 || x > 1.0) {
        throw validation_error("entropy: argument must be in [0,1]");
    }
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

ChiDecomposition chi_plus_coefficients(double mu) {
    if (mu <= 0.0) throw validation_error("chi_plus_coefficients: mu must be > 0");
    const double em = std::exp(-mu);
    const double root = std::sqrt(2.0 * (1.0 + em));
    const double em_half = std::exp(-0.5 * mu);
    ChiDecomposition d;
    d.c0 = em_half / root;
    d.c1 = 1.0 / (em_half * root);
    d.c2 = (1.0 - em) / (em_half * root);
    d.n_plus_sq = 2.0 * (1.0 + em);
    d.n_minus_sq = 2.0 * (1.0 - em);
    return d;
}

namespace {

YieldBounds clamp_bounds(double lower, double upper) {
    YieldBounds b;
    b.clamped_lower = lower < 0.0;
    b.clamped_upper = upper > 1.0;
    b.lower = std::clamp(lower, 0.0, 1.0);
    b.upper = std::clamp(upper, 0.0, 1.0);
    return b;
}

void check_yield(double s, const char* name) {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw validation_error(std::string(name) + " must be a probability in [0,1]");
    }
}

}  // namespace

YieldBounds yield_bounds_generic(double c0, double c1, double c2, double s_phi0, double s_phi1) {
    check_yield(s_phi0, "yield_bounds_generic: s_phi0");
    check_yield(s_phi1, "yield_bounds_generic: s_phi1");
    const double a0 = std::abs(c0);
    const double a1 = std::abs(c1);
    const double a2 = std::abs(c2);
    const double diag = a0 * a0 * s_phi0 + a1 * a1 * s_phi1;
    const double cross = 2.0 * a0 * a1 * std::sqrt(s_phi0 * s_phi1) +
                         2.0 * a0 * a2 * std::sqrt(s_phi0) + 2.0 * a1 * a2 * std::sqrt(s_phi1);
    return clamp_bounds(diag - cross, diag + a2 * a2 + cross);
}

YieldBounds s_xplus_bounds(double s_o_d, double s_b_d, double mu) {
    check_yield(s_o_d, "s_xplus_bounds: s_o_d");
    check_yield(s_b_d, "s_xplus_bounds: s_b_d");
    if (mu <= 0.0) throw validation_error("s_xplus_bounds: mu must be > 0");
    // Explicit closed form with prefactor 1/(2(1+e^-mu)); kept independent of
    // yield_bounds_generic so the two routes can cross-check each other.
    const double em = std::exp(-mu);
    const double ep = std::exp(mu);
    const double pref = 1.0 / (2.0 * (1.0 + em));
    const double diag = em * s_o_d + ep * s_b_d;
    const double cross = 2.0 * std::sqrt(s_o_d * s_b_d) + 2.0 * (1.0 - em) * std::sqrt(s_o_d) +
                         2.0 * (1.0 - em) * ep * std::sqrt(s_b_d);
    const double constant = (1.0 - em) * (1.0 - em) * ep;
    return clamp_bounds(pref * (diag - cross), pref * (diag + constant + cross));
}

double phase_flip_upper(double s_ztilde_l, double s_ztilde_r, double s_xplus_upper_r,
                        double s_xplus_lower_l, double mu, PhaseFlipVariant variant) {
    check_yield(s_ztilde_l, "phase_flip_upper: s_ztilde_l");
    check_yield(s_ztilde_r, "phase_flip_upper: s_ztilde_r");
    check_yield(s_xplus_upper_r, "phase_flip_upper: s_xplus_upper_r");
    check_yield(s_xplus_lower_l, "phase_flip_upper: s_xplus_lower_l");
    const double denom = 2.0 * (s_ztilde_l + s_ztilde_r);
    if (denom <= 0.0) {
        throw undefined_rate_error("phase_flip_upper: no effective Ztilde windows");
    }
    const double pref = variant == PhaseFlipVariant::appendix ? 1.0 + std::exp(-mu)
                                                              : 1.0 + std::exp(-2.0 * mu);
    const double num = pref * (s_xplus_upper_r - s_xplus_lower_l) + 2.0 * s_ztilde_l;
    return std::clamp(num / denom, 0.0, 1.0);
}

BoundSet derive_bounds(const YieldSet& yields, double mu, PhaseFlipVariant variant) {
    BoundSet b;
    b.mu = mu;
    b.yields = yields;
    const YieldBounds r = s_xplus_bounds(yields.s_o_r, yields.s_b_r, mu);
    const YieldBounds l = s_xplus_bounds(yields.s_o_l, yields.s_b_l, mu);
    b.s_xplus_upper_r = r.upper;
    b.s_xplus_lower_l = l.lower;
    b.clamp_events = (r.clamped_lower ? 1 : 0) + (r.clamped_upper ? 1 : 0) +
                     (l.clamped_lower ? 1 : 0) + (l.clamped_upper ? 1 : 0);
    b.e_ph_upper = phase_flip_upper(yields.s_ztilde_l, yields.s_ztilde_r, b.s_xplus_upper_r,
                                    b.s_xplus_lower_l, mu, variant);
    return b;
}

KeyRateReport key_rate(const YieldSet& yields, double e_z, double e_ph_upper,
                       const ProtocolParams& params) {
    params.validate();
    check_yield(e_z, "key_rate: e_z");
    check_yield(e_ph_upper, "key_rate: e_ph_upper");
    KeyRateReport rep;
    rep.params = params;
    rep.e_z = e_z;
    rep.e_ph_upper = e_ph_upper;
    const double p_z = ztilde_prior(params);
    const double p_b = window_class_prior(params, WindowClass::both);
    const double p_o = window_class_prior(params, WindowClass::neither);
    rep.s_ztilde = yields.s_ztilde();
    rep.s_total = p_z * yields.s_ztilde() + p_b * yields.s_b() + p_o * yields.s_o();
    const double sifted = p_z * yields.s_ztilde();
    // H(x) turns back down past 1/2, so an error bound at or above 1/2 means
    // no distillable key rather than a small entropy penalty.
    if (e_ph_upper >= 0.5 || e_z >= 0.5) {
        rep.no_key = true;
        return rep;
    }
    double rate = sifted * (1.0 - entropy(e_ph_upper)) - params.f * rep.s_total * entropy(e_z);
    if (params.subtract_test_bits) rate *= 1.0 - params.test_fraction_v;
    if (rate <= 0.0) {
        rep.no_key = true;
        rate = 0.0;
    }
    rep.rate_per_window = rate;
    rep.n_f = rate * static_cast<double>(params.n_windows);
    return rep;
}

YieldSet analytic_yields(const ProtocolParams& params, const ChannelParams& ch, PhaseMode mode,
                         int quad_nodes) {
    YieldSet y;
    const EffectiveRates za = effective_rates(WindowClass::ztilde_a, params, ch, mode, quad_nodes);
    const EffectiveRates zb = effective_rates(WindowClass::ztilde_b, params, ch, mode, quad_nodes);
    y.s_ztilde_l = 0.5 * (za.s_l + zb.s_l);
    y.s_ztilde_r = 0.5 * (za.s_r + zb.s_r);
    const EffectiveRates b = effective_rates(WindowClass::both, params, ch, mode, quad_nodes);
    y.s_b_l = b.s_l;
    y.s_b_r = b.s_r;
    const EffectiveRates o = effective_rates(WindowClass::neither, params, ch, mode, quad_nodes);
    y.s_o_l = o.s_l;
    y.s_o_r = o.s_r;
    return y;
}

double analytic_bit_flip(const YieldSet& yields, const ProtocolParams& params) {
    const double p_z = ztilde_prior(params);
    const double p_b = window_class_prior(params, WindowClass::both);
    const double p_o = window_class_prior(params, WindowClass::neither);
    const double total =
        p_z * yields.s_ztilde() + p_b * yields.s_b() + p_o * yields.s_o();
    if (total <= 0.0) throw undefined_rate_error("analytic_bit_flip: no effective windows");
    return (p_b * yields.s_b() + p_o * yields.s_o()) / total;
}

KeyRateReport analytic_key_rate(const ProtocolParams& params, const ChannelParams& ch,
                                int quad_nodes) {
    const YieldSet y = analytic_yields(params, ch, params.phase_mode, quad_nodes);
    const double e_z = analytic_bit_flip(y, params);
    const BoundSet b = derive_bounds(y, params.mu);
    KeyRateReport rep = key_rate(y, e_z, b.e_ph_upper, params);
    if (params.phase_mode == PhaseMode::post_selection) {
        // Yields above are per accepted window; only the accepted fraction
        // of windows contributes to the key.
        rep.acceptance = acceptance_fraction(params.lambda_ps);
        rep.rate_per_window *= rep.acceptance;
        rep.n_f = rep.rate_per_window * static_cast<double>(params.n_windows);
    }
    return rep;
}

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    const double l0 = std::log(lo);
    const double l1 = std::log(hi);
    for (int i = 0; i < n; ++i) {
        g[i] = std::exp(l0 + (l1 - l0) * i / (n - 1));
    }
    return g;
}

struct Candidate {
    double rate = -1.0;
    double q = 0.0;
    double mu = 0.0;
    double lambda = 0.0;
    KeyRateReport report;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.rate != b.rate) return a.rate > b.rate;
    if (a.q != b.q) return a.q < b.q;
    if (a.mu != b.mu) return a.mu < b.mu;
    return a.lambda < b.lambda;
}

}  // namespace

OptimizationResult optimize(const ChannelParams& ch, double f, PhaseMode mode, int quad_nodes) {
    ch.validate();
    if (f < 1.0) throw validation_error("optimize: f must be >= 1");
    const bool ps = mode == PhaseMode::post_selection;

    // The optimum migrates to small q and mu at long distance (the constant
    // term of the upper yield bound must stay below the yield scale eta*mu),
    // so the grid floor sits well below the working range.
    std::vector<double> qs = log_grid(1e-3, 0.9, 44);
    std::vector<double> mus = log_grid(1e-4, 1.0, 52);
    std::vector<double> lambdas = ps ? log_grid(0.005, 0.3, 12) : std::vector<double>{0.0};

    Candidate best;
    std::int64_t evals = 0;
    // Yields and the phase-flip bound depend on (mu, lambda) only; q enters
    // through the priors. Hoisting the quadrature out of the q loop keeps the
    // post-selection search cheap.
    const auto sweep = [&](const std::vector<double>& q_grid, const std::vector<double>& mu_grid,
                           const std::vector<double>& lambda_grid) {
        for (double lambda : lambda_grid) {
            for (double mu : mu_grid) {
                ProtocolParams p;
                p.mu = mu;
                p.lambda_ps = ps ? lambda : 0.0;
                p.f = f;
                p.phase_mode = mode;
                const YieldSet y = analytic_yields(p, ch, mode, quad_nodes);
                const BoundSet b = derive_bounds(y, mu);
                const double acceptance = ps ? acceptance_fraction(lambda) : 1.0;
                for (double q : q_grid) {
                    p.q = q;
                    const double e_z = analytic_bit_flip(y, p);
                    KeyRateReport rep = key_rate(y, e_z, b.e_ph_upper, p);
                    rep.acceptance = acceptance;
                    rep.rate_per_window *= acceptance;
                    rep.n_f = rep.rate_per_window * static_cast<double>(p.n_windows);
                    ++evals;
                    Candidate cand{rep.rate_per_window, q, mu, ps ? lambda : 0.0, rep};
                    if (better(cand, best)) best = cand;
                }
            }
        }
    };

    sweep(qs, mus, lambdas);

    const double shrink[3] = {2.5, 1.5, 1.15};
    for (double s : shrink) {
        if (best.rate <= 0.0) break;
        qs = log_grid(std::max(best.q / s, 1e-6), std::min(best.q * s, 0.95), 15);
        mus = log_grid(std::max(best.mu / s, 1e-6), std::min(best.mu * s, 1.0), 15);
        if (ps) {
            lambdas = log_grid(std::max(best.lambda / s, 1e-4), std::min(best.lambda * s, 1.0), 7);
        }
        sweep(qs, mus, lambdas);
    }

    OptimizationResult res;
    res.q = best.q;
    res.mu = best.mu;
    res.lambda = best.lambda;
    res.report = best.report;
    res.evaluations = evals;
    return res;
}

nlohmann::json to_json(const BoundSet& b) {
    return {
        {"s_xplus_upper_r", b.s_xplus_upper_r},
        {"s_xplus_lower_l", b.s_xplus_lower_l},
        {"e_ph_upper", b.e_ph_upper},
        {"clamp_events", b.clamp_events},
        {"mu", b.mu},
        {"inputs",
         {{"s_ztilde_l", b.yields.s_ztilde_l},
          {"s_ztilde_r", b.yields.s_ztilde_r},
          {"s_b_l", b.yields.s_b_l},
          {"s_b_r", b.yields.s_b_r},
          {"s_o_l", b.yields.s_o_l},
          {"s_o_r", b.yields.s_o_r}}},
    };
}

nlohmann::json to_json(const KeyRateReport& r) {
    return {
        {"e_z", r.e_z},
        {"e_ph_upper", r.e_ph_upper},
        {"s_ztilde", r.s_ztilde},
        {"s_total", r.s_total},
        {"rate_per_window", r.rate_per_window},
        {"n_f", r.n_f},
        {"no_key", r.no_key},
        {"acceptance", r.acceptance},
        {"params", to_json(r.params)},
    };
}

nlohmann::json to_json(const OptimizationResult& r) {
    return {
        {"q", r.q},
        {"mu", r.mu},
        {"lambda", r.lambda},
        {"evaluations", r.evaluations},
        {"report", to_json(r.report)},
    };
}

}  // namespace snsqkd
