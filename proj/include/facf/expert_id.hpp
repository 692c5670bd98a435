#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "facf/error.hpp"

namespace facf {

/// Feature pool slots in their fixed total order.
enum class FeatureKind : std::uint8_t { HOG = 0, L5 = 1, L10 = 2, L19 = 3, L28 = 4, L37 = 5 };

inline constexpr int kFeatureKindCount = 6;
inline constexpr int kPoolSize = (1 << kFeatureKindCount) - 1;  // 63

inline constexpr std::array<FeatureKind, kFeatureKindCount> kAllFeatureKinds{
    FeatureKind::HOG, FeatureKind::L5, FeatureKind::L10, FeatureKind::L19, FeatureKind::L28, FeatureKind::L37};

inline constexpr std::string_view to_string(FeatureKind k) noexcept
{
    constexpr std::array<std::string_view, kFeatureKindCount> names{"HOG", "L5", "L10", "L19", "L28", "L37"};
    return names[static_cast<std::size_t>(k)];
}

inline FeatureKind feature_kind_from_string(std::string_view s)
{
    for (auto k : kAllFeatureKinds)
        if (to_string(k) == s)
            return k;
    throw InvalidArgument("unknown feature kind: " + std::string(s));
}

/// Non-empty subset of the feature pool encoded as a 6-bit mask (bit i = kind i).
class ExpertId {
public:
    constexpr ExpertId() = default;
    constexpr explicit ExpertId(std::uint8_t mask) : mask_(mask)
    {
        if (mask == 0 || mask > kPoolSize)
            throw InvalidArgument("expert mask must lie in [1, 63]");
    }

    constexpr std::uint8_t mask() const noexcept { return mask_; }
    /// Position in the canonical pool order (ascending mask).
    constexpr int index() const noexcept { return static_cast<int>(mask_) - 1; }
    static constexpr ExpertId from_index(int index) { return ExpertId(static_cast<std::uint8_t>(index + 1)); }

    constexpr int size() const noexcept { return std::popcount(mask_); }
    constexpr bool contains(FeatureKind k) const noexcept { return (mask_ >> static_cast<int>(k)) & 1u; }

    std::vector<FeatureKind> members() const
    {
        std::vector<FeatureKind> out;
        for (auto k : kAllFeatureKinds)
            if (contains(k))
                out.push_back(k);
        return out;
    }

    std::string name() const
    {
        std::string s;
        for (auto k : members()) {
            if (!s.empty())
                s += '+';
            s += to_string(k);
        }
        return s;
    }

    friend constexpr auto operator<=>(const ExpertId&, const ExpertId&) = default;

private:
    std::uint8_t mask_ = 1;
};

/// The 63 experts in canonical order.
inline std::vector<ExpertId> enumerate_pool()
{
    std::vector<ExpertId> ids;
    ids.reserve(kPoolSize);
    for (int m = 1; m <= kPoolSize; ++m)
        ids.emplace_back(static_cast<std::uint8_t>(m));
    return ids;
}

} // namespace facf
