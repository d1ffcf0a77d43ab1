#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "chiralflat/lattice.hpp"

namespace chiralflat {

/// Truncation radius: keep modes with max(|m|,|n|) <= N, then close the set
/// under the order-3 rotation so subspace projections stay exact.
struct TruncationParams {
    int N{16};

    friend bool operator==(const TruncationParams& a, const TruncationParams& b) {
        return a.N == b.N;
    }
};

/// Enumerated mode set of one sector with index lookup and the rotation
/// permutation. Modes are listed orbit-contiguously: indices 3r, 3r+1, 3r+2
/// hold [nu, omega nu, conj(omega) nu] of orbit r.
class SectorModes {
public:
    SectorModes(Sector s, TruncationParams t) : sector_(s) {
        const std::int64_t N = t.N;
        std::map<std::pair<std::int64_t, std::int64_t>, int> seen;
        for (std::int64_t m = -N; m <= N; ++m)
            for (std::int64_t n = -N; n <= N; ++n) {
                ModeIndex mi{s, m, n};
                if (seen.count({m, n})) continue;
                auto orb = mi.orbit();
                for (const auto& o : orb) seen[{o.m, o.n}] = 0;
                orbit_reps_.push_back(mi);
            }
        modes_.reserve(orbit_reps_.size() * 3);
        for (std::size_t r = 0; r < orbit_reps_.size(); ++r) {
            auto orb = orbit_reps_[r].orbit();
            for (const auto& o : orb) {
                index_[{o.m, o.n}] = static_cast<int>(modes_.size());
                modes_.push_back(o);
            }
        }
    }

    Sector sector() const { return sector_; }
    int dim() const { return static_cast<int>(modes_.size()); }
    int orbit_count() const { return static_cast<int>(orbit_reps_.size()); }
    const std::vector<ModeIndex>& modes() const { return modes_; }
    const ModeIndex& mode(int i) const { return modes_[static_cast<std::size_t>(i)]; }

    /// -1 when the index fell outside the truncation.
    int find(std::int64_t m, std::int64_t n) const {
        auto it = index_.find({m, n});
        return it == index_.end() ? -1 : it->second;
    }

    /// Index of conj(omega) * mode(i).
    int rotated_index(int i) const {
        const int r = i / 3, o = i % 3;
        // orbit layout [nu, w nu, wbar nu]: wbar*nu -> 2, wbar*(w nu) -> 0, wbar*(wbar nu) -> 1
        static constexpr int nxt[3] = {2, 0, 1};
        return 3 * r + nxt[o];
    }

private:
    Sector sector_;
    std::vector<ModeIndex> modes_;
    std::vector<ModeIndex> orbit_reps_;
    std::map<std::pair<std::int64_t, std::int64_t>, int> index_;
};

/// Shared mode enumeration for the two spinor components.
struct SectorPair {
    SectorModes minus;  // component 1, sector -K
    SectorModes plus;   // component 2, sector +K

    explicit SectorPair(TruncationParams t)
        : minus(Sector::minusK, t), plus(Sector::plusK, t) {}

    int dim() const { return minus.dim() + plus.dim(); }
};

} // namespace chiralflat
