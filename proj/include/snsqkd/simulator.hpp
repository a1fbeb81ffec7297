#ifndef SNSQKD_SIMULATOR_HPP
#define SNSQKD_SIMULATOR_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "snsqkd/estimator.hpp"
#include "snsqkd/model.hpp"
#include "snsqkd/tally.hpp"

#include <json.hpp>

namespace snsqkd {

enum class Outcome : std::uint8_t { none = 0, l_only = 1, r_only = 2, both = 3 };

// One simulated window, kept only when records are retained (post-selection
// re-analysis at other lambda values).
struct WindowRecord {
    double delta = 0.0;  // residual phase gamma_B - gamma_A
    WindowClass cls = WindowClass::neither;
    Subset subset = Subset::u;
    Outcome outcome = Outcome::none;
};

struct SimulationOptions {
    int threads = 1;
    bool retain_records = false;   // only honoured in post-selection mode
    bool relabel_antiphase = true;
};

struct SimulationResult {
    WindowTally tally;
    YieldSet yields_v;       // accepted v-subset yields (estimator input)
    YieldSet yields_all;     // accepted yields over all windows
    std::optional<double> e_z_observed;  // absent when v saw no effective event
    double accepted_fraction = 1.0;
    std::uint64_t seed = 0;
    int shards = 1;
    ProtocolParams params;
    ChannelParams channel;
    std::vector<WindowRecord> records;  // empty unless retained
};

// Monte Carlo run of the real protocol. Deterministic given
// (params, channel, seed): per-window draws are addressed by window index in
// a counter-based stream, so the thread count never changes the result.
SimulationResult run(const ProtocolParams& params, const ChannelParams& ch, std::uint64_t seed,
                     const SimulationOptions& opts = {});

// Bit-flip error rate of one subset: effective both/neither windows disagree
// under the bit convention (Alice send->1, Bob send->0), Ztilde windows
// agree. Throws undefined_rate_error when the subset saw no effective event.
double bit_flip_error(const WindowTally& tally, Subset subset = Subset::v);

// Re-tallies retained records under a different acceptance lambda.
WindowTally post_select(const std::vector<WindowRecord>& records, double lambda_ps,
                        std::uint64_t provenance = 0, bool relabel_antiphase = true);

// Accepted per-class yields of one subset (merged Ztilde halves kept
// separate in the tally, merged here).
YieldSet yields_from_tally(const WindowTally& tally, Subset subset);

// Accepted per-class yields over both subsets.
YieldSet yields_from_tally(const WindowTally& tally);

nlohmann::json to_json(const SimulationResult& r);

}  // namespace snsqkd

#endif  // SNSQKD_SIMULATOR_HPP
