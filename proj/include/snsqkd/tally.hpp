#ifndef SNSQKD_TALLY_HPP
#define SNSQKD_TALLY_HPP

#include <array>
#include <cstdint>
#include <iosfwd>

#include "snsqkd/model.hpp"

#include <json.hpp>

namespace snsqkd {

enum class Subset : std::uint8_t { v = 0, u = 1 };

const char* to_string(Subset s);

// Counts for one (window class, subset) cell. Raw counts cover every window
// of the cell; accepted counts are the post-selection survivors (identical
// to raw in compensation mode, where every window is accepted).
struct CellCounts {
    std::int64_t n_windows = 0;
    std::int64_t n_eff_l = 0;
    std::int64_t n_eff_r = 0;
    std::int64_t n_acc_windows = 0;
    std::int64_t n_acc_l = 0;
    std::int64_t n_acc_r = 0;

    CellCounts& operator+=(const CellCounts& o);
    bool operator==(const CellCounts& o) const = default;
};

// Additive window statistics. Merging is associative and commutative with
// the default-constructed tally as identity; tallies from different
// parameter sets refuse to merge (provenance check).
struct WindowTally {
    std::array<std::array<CellCounts, 2>, kNumClasses> cells{};
    std::uint64_t provenance = 0;  // 0 marks the identity tally

    CellCounts& at(WindowClass c, Subset s) {
        return cells[static_cast<int>(c)][static_cast<int>(s)];
    }
    const CellCounts& at(WindowClass c, Subset s) const {
        return cells[static_cast<int>(c)][static_cast<int>(s)];
    }

    // Class totals over both subsets.
    CellCounts class_total(WindowClass c) const;
    std::int64_t n_windows_total() const;
    bool is_identity() const;

    bool operator==(const WindowTally& o) const = default;
};

WindowTally merge(const WindowTally& a, const WindowTally& b);

// Parameter fingerprint used as merge provenance (FNV-1a over the canonical
// parameter JSON plus the seed).
std::uint64_t tally_provenance(const ProtocolParams& p, const ChannelParams& c,
                               std::uint64_t seed);

// CSV with columns (class,detector,n_windows,n_effective,subset); accepted
// statistics, one row per real class x subset x detector.
void write_tally_csv(std::ostream& os, const WindowTally& t);

nlohmann::json to_json(const WindowTally& t);

}  // namespace snsqkd

#endif  // SNSQKD_TALLY_HPP
