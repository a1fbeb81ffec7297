#include "snsqkd/simulator.hpp"

#include <cmath>
#include <ostream>
#include <thread>

#include "snsqkd/photonics.hpp"
#include "snsqkd/rng.hpp"

namespace snsqkd {

const char* to_string(Subset s) { return s == Subset::v ? "v" : "u"; }

CellCounts& CellCounts::operator+=(const CellCounts& o) {
    n_windows += o.n_windows;
    n_eff_l += o.n_eff_l;
    n_eff_r += o.n_eff_r;
    n_acc_windows += o.n_acc_windows;
    n_acc_l += o.n_acc_l;
    n_acc_r += o.n_acc_r;
    return *this;
}

CellCounts WindowTally::class_total(WindowClass c) const {
    CellCounts t = at(c, Subset::v);
    t += at(c, Subset::u);
    return t;
}

std::int64_t WindowTally::n_windows_total() const {
    std::int64_t n = 0;
    for (const auto& row : cells) {
        for (const auto& cell : row) n += cell.n_windows;
    }
    return n;
}

bool WindowTally::is_identity() const { return provenance == 0 && n_windows_total() == 0; }

WindowTally merge(const WindowTally& a, const WindowTally& b) {
    if (a.is_identity()) return b;
    if (b.is_identity()) return a;
    if (a.provenance != b.provenance) {
        throw validation_error("merge: tallies come from different runs (provenance mismatch)");
    }
    WindowTally out = a;
    for (int c = 0; c < kNumClasses; ++c) {
        for (int s = 0; s < 2; ++s) out.cells[c][s] += b.cells[c][s];
    }
    return out;
}

std::uint64_t tally_provenance(const ProtocolParams& p, const ChannelParams& c,
                               std::uint64_t seed) {
    const std::string canon = to_json(p).dump() + to_json(c).dump() + std::to_string(seed);
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h == 0 ? 1 : h;  // 0 is reserved for the identity tally
}

void write_tally_csv(std::ostream& os, const WindowTally& t) {
    os << "class,detector,n_windows,n_effective,subset\n";
    for (int ci = 0; ci < kNumClasses; ++ci) {
        const auto c = static_cast<WindowClass>(ci);
        if (ci >= kNumRealClasses && t.class_total(c).n_windows == 0) continue;
        for (int si = 0; si < 2; ++si) {
            const auto s = static_cast<Subset>(si);
            const CellCounts& cell = t.at(c, s);
            os << to_string(c) << ",L," << cell.n_acc_windows << ',' << cell.n_acc_l << ','
               << to_string(s) << '\n';
            os << to_string(c) << ",R," << cell.n_acc_windows << ',' << cell.n_acc_r << ','
               << to_string(s) << '\n';
        }
    }
}

nlohmann::json to_json(const WindowTally& t) {
    nlohmann::json classes = nlohmann::json::object();
    for (int ci = 0; ci < kNumClasses; ++ci) {
        const auto c = static_cast<WindowClass>(ci);
        if (ci >= kNumRealClasses && t.class_total(c).n_windows == 0) continue;
        nlohmann::json subsets = nlohmann::json::object();
        for (int si = 0; si < 2; ++si) {
            const CellCounts& cell = t.at(c, static_cast<Subset>(si));
            subsets[to_string(static_cast<Subset>(si))] = {
                {"n_windows", cell.n_windows},     {"n_eff_l", cell.n_eff_l},
                {"n_eff_r", cell.n_eff_r},         {"n_acc_windows", cell.n_acc_windows},
                {"n_acc_l", cell.n_acc_l},         {"n_acc_r", cell.n_acc_r},
            };
        }
        classes[to_string(c)] = subsets;
    }
    return {{"provenance", t.provenance}, {"classes", classes}};
}

namespace {

Outcome sample_outcome(const ClickDistribution& d, double u) {
    // Cumulative order (l_only, r_only, both, none); none last so the tiny
    // click probabilities keep full precision near 0.
    if (u < d.p_l_only) return Outcome::l_only;
    if (u < d.p_l_only + d.p_r_only) return Outcome::r_only;
    if (u < d.p_l_only + d.p_r_only + d.p_both) return Outcome::both;
    return Outcome::none;
}

WindowClass classify(bool alice_sends, bool bob_sends) {
    if (alice_sends && !bob_sends) return WindowClass::ztilde_a;
    if (!alice_sends && bob_sends) return WindowClass::ztilde_b;
    if (alice_sends && bob_sends) return WindowClass::both;
    return WindowClass::neither;
}

struct ShardOutput {
    WindowTally tally;
    std::vector<WindowRecord> records;
};

void simulate_range(const ProtocolParams& params, const ChannelParams& ch, std::uint64_t seed,
                    std::int64_t begin, std::int64_t end, const SimulationOptions& opts,
                    ShardOutput& out) {
    const bool ps = params.phase_mode == PhaseMode::post_selection;
    const bool jitter = params.intensity_jitter > 0.0;
    const double eta_a = arm_transmittance(ch, 0);
    const double eta_b = arm_transmittance(ch, 1);
    const double two_pi = 6.283185307179586476925286766559;

    // Fixed distributions for the closed-form fast path (compensation mode,
    // exact intensity).
    std::array<ClickDistribution, kNumRealClasses> fixed{};
    const bool fast = !ps && !jitter;
    if (fast) {
        for (int c = 0; c < kNumRealClasses; ++c) {
            fixed[c] = click_distribution(static_cast<WindowClass>(c), 0.0, params, ch);
        }
    }

    for (std::int64_t i = begin; i < end; ++i) {
        const WindowDraws d = WindowDraws::at(seed, 0, static_cast<std::uint64_t>(i), ps, jitter);
        const bool alice = d.alice_send < params.q;
        const bool bob = d.bob_send < params.q;
        const WindowClass cls = classify(alice, bob);
        const Subset subset = d.subset < params.test_fraction_v ? Subset::v : Subset::u;
        const double delta = ps ? two_pi * (d.gamma_b - d.gamma_a) : 0.0;

        ClickDistribution dist;
        if (fast) {
            dist = fixed[static_cast<int>(cls)];
        } else {
            const double mu_a = params.mu * (1.0 - params.intensity_jitter * d.jitter_a);
            const double mu_b = params.mu * (1.0 - params.intensity_jitter * d.jitter_b);
            dist = product_coherent_clicks(alice ? eta_a * mu_a : 0.0, bob ? eta_b * mu_b : 0.0,
                                           delta, ch.e_a, ch.p_dark);
        }
        const Outcome outcome = sample_outcome(dist, d.outcome);

        CellCounts& cell = out.tally.at(cls, subset);
        cell.n_windows += 1;
        if (outcome == Outcome::l_only) cell.n_eff_l += 1;
        if (outcome == Outcome::r_only) cell.n_eff_r += 1;

        const double cd = std::cos(delta);
        const bool accepted = !ps || 1.0 - std::abs(cd) <= params.lambda_ps;
        if (accepted) {
            const bool swap = ps && opts.relabel_antiphase && cd < 0.0;
            cell.n_acc_windows += 1;
            Outcome acc = outcome;
            if (swap && outcome == Outcome::l_only) acc = Outcome::r_only;
            else if (swap && outcome == Outcome::r_only) acc = Outcome::l_only;
            if (acc == Outcome::l_only) cell.n_acc_l += 1;
            if (acc == Outcome::r_only) cell.n_acc_r += 1;
        }

        if (opts.retain_records && ps) {
            out.records.push_back({delta, cls, subset, outcome});
        }
    }
}

YieldSet yields_from_cells(const WindowTally& t, bool merged, Subset subset) {
    const auto cell = [&](WindowClass c) -> CellCounts {
        return merged ? t.class_total(c) : t.at(c, subset);
    };
    const auto ratio = [](std::int64_t num, std::int64_t den) {
        return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
    };
    YieldSet y;
    const CellCounts za = cell(WindowClass::ztilde_a);
    const CellCounts zb = cell(WindowClass::ztilde_b);
    y.s_ztilde_l = ratio(za.n_acc_l + zb.n_acc_l, za.n_acc_windows + zb.n_acc_windows);
    y.s_ztilde_r = ratio(za.n_acc_r + zb.n_acc_r, za.n_acc_windows + zb.n_acc_windows);
    const CellCounts b = cell(WindowClass::both);
    y.s_b_l = ratio(b.n_acc_l, b.n_acc_windows);
    y.s_b_r = ratio(b.n_acc_r, b.n_acc_windows);
    const CellCounts o = cell(WindowClass::neither);
    y.s_o_l = ratio(o.n_acc_l, o.n_acc_windows);
    y.s_o_r = ratio(o.n_acc_r, o.n_acc_windows);
    return y;
}

}  // namespace

YieldSet yields_from_tally(const WindowTally& tally, Subset subset) {
    return yields_from_cells(tally, false, subset);
}

YieldSet yields_from_tally(const WindowTally& tally) {
    return yields_from_cells(tally, true, Subset::v);
}

double bit_flip_error(const WindowTally& tally, Subset subset) {
    const auto eff = [&](WindowClass c) {
        const CellCounts& cell = tally.at(c, subset);
        return cell.n_acc_l + cell.n_acc_r;
    };
    const std::int64_t agree = eff(WindowClass::ztilde_a) + eff(WindowClass::ztilde_b);
    const std::int64_t disagree = eff(WindowClass::both) + eff(WindowClass::neither);
    if (agree + disagree == 0) {
        throw undefined_rate_error("bit_flip_error: no effective events in subset");
    }
    return static_cast<double>(disagree) / static_cast<double>(agree + disagree);
}

WindowTally post_select(const std::vector<WindowRecord>& records, double lambda_ps,
                        std::uint64_t provenance, bool relabel_antiphase) {
    if (lambda_ps < 0.0 || lambda_ps > 1.0) {
        throw validation_error("post_select: lambda must be in [0,1]");
    }
    WindowTally t;
    t.provenance = provenance;
    for (const WindowRecord& r : records) {
        CellCounts& cell = t.at(r.cls, r.subset);
        cell.n_windows += 1;
        if (r.outcome == Outcome::l_only) cell.n_eff_l += 1;
        if (r.outcome == Outcome::r_only) cell.n_eff_r += 1;
        const double cd = std::cos(r.delta);
        if (1.0 - std::abs(cd) <= lambda_ps) {
            cell.n_acc_windows += 1;
            Outcome acc = r.outcome;
            if (relabel_antiphase && cd < 0.0) {
                if (acc == Outcome::l_only) acc = Outcome::r_only;
                else if (acc == Outcome::r_only) acc = Outcome::l_only;
            }
            if (acc == Outcome::l_only) cell.n_acc_l += 1;
            if (acc == Outcome::r_only) cell.n_acc_r += 1;
        }
    }
    return t;
}

SimulationResult run(const ProtocolParams& params, const ChannelParams& ch, std::uint64_t seed,
                     const SimulationOptions& opts) {
    params.validate();
    ch.validate();
    const int threads = std::max(1, opts.threads);
    const std::int64_t n = params.n_windows;

    std::vector<ShardOutput> shards(threads);
    if (threads == 1) {
        simulate_range(params, ch, seed, 0, n, opts, shards[0]);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const std::int64_t begin = std::min<std::int64_t>(t * chunk, n);
            const std::int64_t end = std::min<std::int64_t>(begin + chunk, n);
            pool.emplace_back(simulate_range, std::cref(params), std::cref(ch), seed, begin, end,
                              std::cref(opts), std::ref(shards[t]));
        }
        for (auto& th : pool) th.join();
    }

    SimulationResult res;
    res.params = params;
    res.channel = ch;
    res.seed = seed;
    res.shards = threads;
    const std::uint64_t prov = tally_provenance(params, ch, seed);
    for (auto& s : shards) {
        s.tally.provenance = prov;
        res.tally = merge(res.tally, s.tally);
        if (opts.retain_records) {
            res.records.insert(res.records.end(), s.records.begin(), s.records.end());
        }
    }

    res.yields_v = yields_from_tally(res.tally, Subset::v);
    res.yields_all = yields_from_tally(res.tally);
    std::int64_t acc = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        acc += res.tally.class_total(static_cast<WindowClass>(c)).n_acc_windows;
    }
    res.accepted_fraction = n > 0 ? static_cast<double>(acc) / static_cast<double>(n) : 1.0;
    try {
        res.e_z_observed = bit_flip_error(res.tally, Subset::v);
    } catch (const undefined_rate_error&) {
        res.e_z_observed.reset();
    }
    return res;
}

nlohmann::json to_json(const SimulationResult& r) {
    nlohmann::json j{
        {"rng", {{"algorithm", "philox4x32-10"}, {"seed", r.seed}, {"stream", 0}}},
        {"seed", r.seed},
        {"shards", r.shards},
        {"accepted_fraction", r.accepted_fraction},
        {"params", to_json(r.params)},
        {"channel", to_json(r.channel)},
        {"tally", to_json(r.tally)},
        {"yields_v",
         {{"s_ztilde_l", r.yields_v.s_ztilde_l},
          {"s_ztilde_r", r.yields_v.s_ztilde_r},
          {"s_b_l", r.yields_v.s_b_l},
          {"s_b_r", r.yields_v.s_b_r},
          {"s_o_l", r.yields_v.s_o_l},
          {"s_o_r", r.yields_v.s_o_r}}},
        {"yields_all",
         {{"s_ztilde_l", r.yields_all.s_ztilde_l},
          {"s_ztilde_r", r.yields_all.s_ztilde_r},
          {"s_b_l", r.yields_all.s_b_l},
          {"s_b_r", r.yields_all.s_b_r},
          {"s_o_l", r.yields_all.s_o_l},
          {"s_o_r", r.yields_all.s_o_r}}},
    };
    if (r.e_z_observed) {
        j["e_z_observed"] = *r.e_z_observed;
    } else {
        j["e_z_observed"] = nullptr;
    }
    return j;
}

}  // namespace snsqkd
