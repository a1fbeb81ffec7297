#include "snsqkd/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "snsqkd/rng.hpp"

namespace snsqkd::oracle {

Vector coherent_single(Complex alpha, int cutoff) {
    if (cutoff < 1) throw validation_error("coherent_single: cutoff must be >= 1");
    const double nbar = std::norm(alpha);
    if (nbar > cutoff / 4.0) {
        throw validation_error("coherent_single: |alpha|^2 exceeds cutoff/4, truncation too small");
    }
    Vector v(cutoff + 1);
    v[0] = std::exp(-0.5 * nbar);
    for (int n = 1; n <= cutoff; ++n) {
        v[n] = v[n - 1] * alpha / std::sqrt(static_cast<double>(n));
    }
    const double tail = 1.0 - v.squaredNorm();
    if (tail > 1e-12) {
        throw validation_error("coherent_single: truncated tail mass " + std::to_string(tail) +
                               " exceeds 1e-12; raise the cutoff");
    }
    return v;
}

FockState two_mode_product(const Vector& mode_a, const Vector& mode_b, int cutoff) {
    if (mode_a.size() != cutoff + 1 || mode_b.size() != cutoff + 1) {
        throw validation_error("two_mode_product: mode dimension mismatch");
    }
    FockState s;
    s.cutoff = cutoff;
    s.amp = Vector::Zero(s.dim());
    for (int na = 0; na <= cutoff; ++na) {
        for (int nb = 0; nb <= cutoff; ++nb) {
            s.amp[na * (cutoff + 1) + nb] = mode_a[na] * mode_b[nb];
        }
    }
    return s;
}

Vector alpha_tilde_single(Complex alpha, int cutoff) {
    const double mu = std::norm(alpha);
    if (mu <= 0.0) throw validation_error("alpha_tilde_single: needs |alpha|^2 > 0");
    Vector v = coherent_single(alpha, cutoff);
    v[0] -= std::exp(-0.5 * mu);  // cancels exactly: both are e^{-mu/2}
    v /= std::sqrt(1.0 - std::exp(-mu));
    return v;
}

FockState vacuum_state(int cutoff) {
    FockState s;
    s.cutoff = cutoff;
    s.amp = Vector::Zero((cutoff + 1) * (cutoff + 1));
    s.amp[0] = 1.0;
    return s;
}

namespace {

Complex alpha_a_of(double mu) { return Complex(std::sqrt(mu), 0.0); }
Complex alpha_b_of(double mu, double delta) {
    return std::sqrt(mu) * std::exp(Complex(0.0, delta));
}

}  // namespace

FockState state_alpha_alpha(double mu, double delta, int cutoff) {
    return two_mode_product(coherent_single(alpha_a_of(mu), cutoff),
                            coherent_single(alpha_b_of(mu, delta), cutoff), cutoff);
}

FockState state_0_alpha(double mu, double delta, int cutoff) {
    return two_mode_product(coherent_single(Complex(0.0, 0.0), cutoff),
                            coherent_single(alpha_b_of(mu, delta), cutoff), cutoff);
}

FockState state_alpha_0(double mu, int cutoff) {
    return two_mode_product(coherent_single(alpha_a_of(mu), cutoff),
                            coherent_single(Complex(0.0, 0.0), cutoff), cutoff);
}

FockState chi_state(int sign, double mu, double delta, int cutoff) {
    if (sign != 1 && sign != -1) throw validation_error("chi_state: sign must be +-1");
    if (mu <= 0.0) throw validation_error("chi_state: mu must be > 0");
    const FockState u = state_0_alpha(mu, delta, cutoff);
    const FockState v = state_alpha_0(mu, cutoff);
    FockState s;
    s.cutoff = cutoff;
    const double norm_sq = 2.0 * (1.0 + sign * std::exp(-mu));
    s.amp = (u.amp + static_cast<double>(sign) * v.amp) / std::sqrt(norm_sq);
    return s;
}

Beamsplitter::Beamsplitter(int cutoff) : cutoff_(cutoff) {
    const int modes = cutoff + 1;
    const double theta = 0.78539816339744830962;  // pi/4
    blocks_.reserve(2 * cutoff + 1);
    index_.reserve(2 * cutoff + 1);
    for (int total = 0; total <= 2 * cutoff; ++total) {
        const int lo = std::max(0, total - cutoff);
        const int hi = std::min(total, cutoff);
        const int dim = hi - lo + 1;
        std::vector<int> idx(dim);
        for (int k = 0; k < dim; ++k) {
            const int na = lo + k;
            idx[k] = na * modes + (total - na);
        }
        // i(a^dag b - a b^dag) restricted to the block is Hermitian
        // tridiagonal; exponentiate through its eigensystem.
        Matrix h = Matrix::Zero(dim, dim);
        for (int k = 0; k + 1 < dim; ++k) {
            const int na = lo + k;
            const double g = std::sqrt(static_cast<double>(na + 1) *
                                       static_cast<double>(total - na));
            h(k + 1, k) = Complex(0.0, 1.0) * g;
            h(k, k + 1) = Complex(0.0, -1.0) * g;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        Matrix b = Matrix::Zero(dim, dim);
        const auto& vecs = es.eigenvectors();
        const auto& vals = es.eigenvalues();
        for (int k = 0; k < dim; ++k) {
            const Complex phase = std::exp(Complex(0.0, -theta * vals[k]));
            b += phase * vecs.col(k) * vecs.col(k).adjoint();
        }
        blocks_.push_back(std::move(b));
        index_.push_back(std::move(idx));
    }
}

Vector Beamsplitter::apply(const Vector& in) const {
    if (in.size() != (cutoff_ + 1) * (cutoff_ + 1)) {
        throw validation_error("Beamsplitter::apply: dimension mismatch");
    }
    Vector out = Vector::Zero(in.size());
    for (std::size_t nblk = 0; nblk < blocks_.size(); ++nblk) {
        const auto& idx = index_[nblk];
        const int dim = static_cast<int>(idx.size());
        Vector x(dim);
        for (int k = 0; k < dim; ++k) x[k] = in[idx[k]];
        Vector y = blocks_[nblk] * x;
        for (int k = 0; k < dim; ++k) out[idx[k]] = y[k];
    }
    return out;
}

ClickDistribution fock_click_distribution(const FockState& input, const DetectionModel& det,
                                          const Beamsplitter& bs) {
    if (input.cutoff != bs.cutoff()) {
        throw validation_error("fock_click_distribution: cutoff mismatch");
    }
    const int modes = input.cutoff + 1;
    const Vector out = bs.apply(input.amp);

    // Per-mode no-click weights: a photon in output mode L escapes detector
    // L with probability 1 - eta(1-e_a) and escapes detector R with
    // probability 1 - eta*e_a; escaping both means it was lost (1 - eta).
    std::vector<double> w_direct(modes), w_cross(modes), w_lost(modes);
    for (int n = 0; n < modes; ++n) {
        w_direct[n] = std::pow(1.0 - det.eta * (1.0 - det.e_a), n);
        w_cross[n] = std::pow(1.0 - det.eta * det.e_a, n);
        w_lost[n] = std::pow(1.0 - det.eta, n);
    }

    double no_l = 0.0, no_r = 0.0, no_both = 0.0;
    for (int na = 0; na < modes; ++na) {
        for (int nb = 0; nb < modes; ++nb) {
            const double p = std::norm(out[na * modes + nb]);
            if (p == 0.0) continue;
            no_l += w_direct[na] * w_cross[nb] * p;
            no_r += w_cross[na] * w_direct[nb] * p;
            no_both += w_lost[na] * w_lost[nb] * p;
        }
    }
    const double nd = 1.0 - det.p_dark;
    no_l *= nd;
    no_r *= nd;
    no_both *= nd * nd;

    ClickDistribution d;
    d.p_l_only = no_r - no_both;
    d.p_r_only = no_l - no_both;
    d.p_none = no_both;
    d.p_both = 1.0 - no_l - no_r + no_both;
    return d;
}

double verify_chi_decomposition(double mu, int cutoff) {
    const FockState direct = chi_state(1, mu, 0.0, cutoff);

    const Vector tilde = alpha_tilde_single(alpha_a_of(mu), cutoff);
    if (std::abs(tilde[0]) > 1e-15) {
        throw validation_error("verify_chi_decomposition: |alpha~> has a vacuum component");
    }
    const FockState vac = vacuum_state(cutoff);
    const FockState aa = state_alpha_alpha(mu, 0.0, cutoff);
    const FockState tt = two_mode_product(tilde, tilde, cutoff);

    const ChiDecomposition c = chi_plus_coefficients(mu);
    const Vector rhs = c.c0 * vac.amp + c.c1 * aa.amp - c.c2 * tt.amp;
    return (direct.amp - rhs).norm();
}

namespace {

DensityOperator rho_ztilde(double mu, int cutoff) {
    const FockState u = state_0_alpha(mu, 0.0, cutoff);
    const FockState v = state_alpha_0(mu, cutoff);
    DensityOperator r;
    r.cutoff = cutoff;
    r.mat = 0.5 * (u.amp * u.amp.adjoint()) + 0.5 * (v.amp * v.amp.adjoint());
    return r;
}

DensityOperator rho_x(double mu, int cutoff) {
    const FockState cp = chi_state(1, mu, 0.0, cutoff);
    const FockState cm = chi_state(-1, mu, 0.0, cutoff);
    const double np = 2.0 * (1.0 + std::exp(-mu));
    const double nm = 2.0 * (1.0 - std::exp(-mu));
    DensityOperator r;
    r.cutoff = cutoff;
    r.mat = (np / 4.0) * (cp.amp * cp.amp.adjoint()) + (nm / 4.0) * (cm.amp * cm.amp.adjoint());
    return r;
}

}  // namespace

double verify_rho_equality(double mu, int cutoff) {
    // Both operators live on span{|0,a>, |a,0>}; the trace distance follows
    // from their 2x2 representations in an orthonormal basis of that span.
    const FockState u = state_0_alpha(mu, 0.0, cutoff);
    const FockState v = state_alpha_0(mu, cutoff);
    const Vector e1 = u.amp / u.amp.norm();
    Vector e2 = v.amp - (e1.adjoint() * v.amp)(0) * e1;
    e2 /= e2.norm();

    const DensityOperator rz = rho_ztilde(mu, cutoff);
    const DensityOperator rx = rho_x(mu, cutoff);
    const Matrix delta = rz.mat - rx.mat;

    Eigen::Matrix2cd d2;
    const Vector de1 = delta * e1;
    const Vector de2 = delta * e2;
    d2(0, 0) = (e1.adjoint() * de1)(0);
    d2(0, 1) = (e1.adjoint() * de2)(0);
    d2(1, 0) = (e2.adjoint() * de1)(0);
    d2(1, 1) = (e2.adjoint() * de2)(0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(d2);
    return 0.5 * (std::abs(es.eigenvalues()[0]) + std::abs(es.eigenvalues()[1]));
}

double verify_rho_equality_dense(double mu, int cutoff) {
    if (cutoff > 24) {
        throw validation_error("verify_rho_equality_dense: dense eigensolve capped at cutoff 24");
    }
    const Matrix delta = rho_ztilde(mu, cutoff).mat - rho_x(mu, cutoff).mat;
    Eigen::SelfAdjointEigenSolver<Matrix> es(delta);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

CauchyReport verify_cauchy_bounds(double mu, std::int64_t trials, std::uint64_t seed, int cutoff,
                                  BoundFn bounds) {
    if (trials < 1) throw validation_error("verify_cauchy_bounds: trials must be >= 1");
    const FockState vac = vacuum_state(cutoff);
    const FockState aa = state_alpha_alpha(mu, 0.0, cutoff);
    const FockState chi = chi_state(1, mu, 0.0, cutoff);
    const int dim = vac.dim();
    // Floating-point slack only; genuine bound violations show up orders of
    // magnitude above this.
    const double eps = 1e-9;

    CauchyReport rep;
    rep.trials = trials;
    static constexpr int kRanks[] = {1, 2, 4, 8, 16};
    for (std::int64_t t = 0; t < trials; ++t) {
        RngStream rng(seed, /*stream=*/static_cast<std::uint64_t>(t) + 1);
        const int rank = kRanks[t % 5];
        // M = s A^dag A with A a rank x dim Ginibre factor, s chosen so
        // 0 <= M <= 1: a random effect of Charlie's instrument.
        Eigen::MatrixXcd a(rank, dim);
        for (int r = 0; r < rank; ++r) {
            for (int c = 0; c < dim; ++c) a(r, c) = Complex(rng.gaussian(), rng.gaussian());
        }
        Eigen::MatrixXcd gram = a * a.adjoint();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
        const double lmax = es.eigenvalues().maxCoeff();
        const double scale = rng.uniform() / lmax;

        const double s_vac = scale * (a * vac.amp).squaredNorm();
        const double s_aa = scale * (a * aa.amp).squaredNorm();
        const double s_chi = scale * (a * chi.amp).squaredNorm();

        const auto check = [&](double so, double sb, double sx) {
            const YieldBounds yb = bounds(so, sb, mu);
            rep.checks += 1;
            const double margin = std::min(sx - yb.lower, yb.upper - sx);
            rep.min_margin = std::min(rep.min_margin, margin);
            if (sx < yb.lower - eps || sx > yb.upper + eps) rep.violations += 1;
        };
        check(s_vac, s_aa, s_chi);
        // Complementary outcome 1 - M.
        check(1.0 - s_vac, 1.0 - s_aa, 1.0 - s_chi);
    }
    return rep;
}

namespace {

struct EphModel {
    ClickDistribution plus;
    ClickDistribution minus;
    double p_plus = 0.0;
};

EphModel eph_model(const ProtocolParams& params, const ChannelParams& ch, int cutoff,
                   double delta) {
    params.validate();
    ch.validate();
    if (ch.charlie_position != 0.5) {
        throw validation_error("oracle: virtual X windows require the midpoint split");
    }
    const Beamsplitter bs(cutoff);
    const DetectionModel det{arm_transmittance(ch), ch.e_a, ch.p_dark};
    EphModel m;
    m.plus = fock_click_distribution(chi_state(1, params.mu, delta, cutoff), det, bs);
    m.minus = fock_click_distribution(chi_state(-1, params.mu, delta, cutoff), det, bs);
    m.p_plus = 0.5 * (1.0 + std::exp(-params.mu));
    return m;
}

}  // namespace

double exact_eph(const ProtocolParams& params, const ChannelParams& ch, int cutoff, double delta) {
    const EphModel m = eph_model(params, ch, cutoff, delta);
    const double num = m.p_plus * m.plus.p_r_only + (1.0 - m.p_plus) * m.minus.p_l_only;
    const double den =
        m.p_plus * m.plus.p_effective() + (1.0 - m.p_plus) * m.minus.p_effective();
    if (den <= 0.0) throw undefined_rate_error("exact_eph: no effective X windows");
    return num / den;
}

double brute_force_eph(const ProtocolParams& params, const ChannelParams& ch, std::uint64_t seed,
                       std::int64_t n_virtual_windows, int cutoff, double delta) {
    if (n_virtual_windows == 0) return exact_eph(params, ch, cutoff, delta);
    if (n_virtual_windows < 0) {
        throw validation_error("brute_force_eph: n_virtual_windows must be >= 0");
    }
    const EphModel m = eph_model(params, ch, cutoff, delta);
    std::int64_t n_eff = 0;
    std::int64_t n_err = 0;  // X+ heralded by R, X- heralded by L
    RngStream rng(seed, /*stream=*/0);
    for (std::int64_t i = 0; i < n_virtual_windows; ++i) {
        const bool plus = rng.uniform() < m.p_plus;
        const ClickDistribution& d = plus ? m.plus : m.minus;
        const double u = rng.uniform();
        if (u < d.p_l_only) {
            n_eff += 1;
            if (!plus) n_err += 1;
        } else if (u < d.p_l_only + d.p_r_only) {
            n_eff += 1;
            if (plus) n_err += 1;
        }
    }
    if (n_eff == 0) throw undefined_rate_error("brute_force_eph: no effective X windows sampled");
    return static_cast<double>(n_err) / static_cast<double>(n_eff);
}

void VerifyReport::add(const std::string& name, double value, double tolerance,
                       bool pass_condition) {
    rows.push_back({name, value, tolerance, pass_condition});
    all_pass = all_pass && pass_condition;
}

VerifyReport run_verification_suite(int cutoff, std::int64_t cauchy_trials, std::uint64_t seed) {
    VerifyReport rep;

    for (double mu : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
        const double res = verify_chi_decomposition(mu, cutoff);
        rep.add("chi_decomposition_residual mu=" + std::to_string(mu), res, 1e-10, res < 1e-10);
    }
    for (double mu : {0.1, 0.3, 0.5, 0.8, 1.0}) {
        const double td = verify_rho_equality(mu, cutoff);
        rep.add("rho_ztilde_vs_rho_x_trace_distance mu=" + std::to_string(mu), td, 1e-10,
                td < 1e-10);
    }
    for (double mu : {0.2, 0.5, 1.0}) {
        // <0,a_B|a_A,0> = e^-mu in the truncated space.
        const FockState u = state_0_alpha(mu, 0.0, cutoff);
        const FockState v = state_alpha_0(mu, cutoff);
        const Complex ov = (u.amp.adjoint() * v.amp)(0);
        const double err = std::abs(ov - std::exp(-mu));
        rep.add("coherent_overlap_error mu=" + std::to_string(mu), err, 1e-12, err < 1e-12);

        const ChiDecomposition c = chi_plus_coefficients(mu);
        const double psum = c.n_plus_sq / 4.0 + c.n_minus_sq / 4.0;
        const double perr = std::abs(psum - 1.0);
        rep.add("x_window_probabilities_sum_error mu=" + std::to_string(mu), perr, 1e-15,
                perr <= 1e-15);
    }
    for (double mu : {0.2, 0.5, 1.0}) {
        const CauchyReport cr = verify_cauchy_bounds(mu, cauchy_trials, seed, cutoff);
        rep.add("cauchy_bound_violations mu=" + std::to_string(mu),
                static_cast<double>(cr.violations), 0.0, cr.violations == 0);
    }
    {
        // Sensitivity: a sign flip in one cross term must break containment,
        // otherwise the containment checks above have no teeth.
        const BoundFn mutant = [](double so, double sb, double mu) {
            const double em = std::exp(-mu);
            const double ep = std::exp(mu);
            const double pref = 1.0 / (2.0 * (1.0 + em));
            const double diag = em * so + ep * sb;
            const double cross = -2.0 * std::sqrt(so * sb) + 2.0 * (1.0 - em) * std::sqrt(so) +
                                 2.0 * (1.0 - em) * ep * std::sqrt(sb);
            YieldBounds b;
            b.lower = std::max(pref * (diag + cross), 0.0);
            b.upper = std::min(pref * (diag + (1.0 - em) * (1.0 - em) * ep - cross), 1.0);
            return b;
        };
        const CauchyReport cr = verify_cauchy_bounds(0.5, std::min<std::int64_t>(cauchy_trials, 500),
                                                     seed, cutoff, mutant);
        rep.add("mutated_bound_detected_violations", static_cast<double>(cr.violations), 1.0,
                cr.violations > 0);
    }
    {
        // Cutoff convergence of the phase-flip oracle.
        ProtocolParams p;
        p.mu = 0.5;
        ChannelParams ch;
        ch.distance_km = 100.0;
        ch.e_a = 0.05;
        const int lo = std::max(20, cutoff - 10);
        const double e1 = exact_eph(p, ch, lo);
        const double e2 = exact_eph(p, ch, cutoff);
        rep.add("eph_cutoff_convergence", std::abs(e1 - e2), 1e-8, std::abs(e1 - e2) < 1e-8);
    }
    return rep;
}

nlohmann::json to_json(const VerifyReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"name", row.name},
                        {"value", row.value},
                        {"tolerance", row.tolerance},
                        {"pass", row.pass}});
    }
    return {{"all_pass", r.all_pass}, {"rows", rows}};
}

}  // namespace snsqkd::oracle
