#pragma once

// Precomputed per-frame feature maps ("channel-map files").
//
// Layout, all integers u32 little-endian, payload float32 little-endian:
//   magic       4 bytes  "FACF"
//   version     u32      1
//   frame_count u32
//   kind_count  u32
//   kind_count x { kind u32 (0=HOG .. 5=L37), channels u32, rows u32, cols u32 }
//   payload: for each frame, for each kind in header order, for each channel,
//            rows*cols floats in row-major order
// The file size must equal header size + payload size exactly. Each map
// covers the whole frame; rows/cols are the map resolution.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facf/features.hpp"

namespace facf {

static_assert(std::endian::native == std::endian::little, "channel-map I/O assumes a little-endian host");

inline constexpr std::array<char, 4> kChannelMapMagic{'F', 'A', 'C', 'F'};
inline constexpr std::uint32_t kChannelMapVersion = 1;

struct ChannelMapEntry {
    FeatureKind kind;
    int channels;
    int rows;
    int cols;

    std::size_t floats_per_frame() const noexcept
    {
        return static_cast<std::size_t>(channels) * static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }
    friend bool operator==(const ChannelMapEntry&, const ChannelMapEntry&) = default;
};

/// Immutable once loaded; safe to share across threads.
class ChannelMapFile {
public:
    ChannelMapFile(std::vector<ChannelMapEntry> entries, int frame_count, std::vector<float> payload)
        : entries_(std::move(entries)), frame_count_(frame_count), payload_(std::move(payload))
    {
        detail::require<FormatError>(frame_count_ >= 0, "negative frame count");
        std::array<bool, kFeatureKindCount> seen{};
        frame_stride_ = 0;
        for (const auto& e : entries_) {
            detail::require<FormatError>(e.channels > 0 && e.rows > 0 && e.cols > 0, "empty channel-map entry");
            auto& s = seen[static_cast<std::size_t>(e.kind)];
            detail::require<FormatError>(!s, "duplicate feature kind in channel-map header");
            s = true;
            frame_stride_ += e.floats_per_frame();
        }
        detail::require<FormatError>(payload_.size() == frame_stride_ * static_cast<std::size_t>(frame_count_),
                                     "channel-map payload length does not match header");
        for (float v : payload_)
            detail::require<FormatError>(std::isfinite(v), "channel-map contains a non-finite value");
    }

    static ChannelMapFile read(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw IoError("cannot open channel-map file " + path.string());
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return parse(bytes);
    }

    static ChannelMapFile parse(std::span<const char> bytes)
    {
        std::size_t pos = 0;
        auto u32 = [&]() {
            detail::require<FormatError>(pos + 4 <= bytes.size(), "truncated channel-map header");
            std::uint32_t v;
            std::memcpy(&v, bytes.data() + pos, 4);
            pos += 4;
            return v;
        };
        detail::require<FormatError>(bytes.size() >= 4 && std::equal(kChannelMapMagic.begin(), kChannelMapMagic.end(),
                                                                      bytes.begin()),
                                     "bad channel-map magic");
        pos = 4;
        detail::require<FormatError>(u32() == kChannelMapVersion, "unsupported channel-map version");
        const std::uint32_t frames = u32();
        const std::uint32_t kinds = u32();
        detail::require<FormatError>(kinds <= kFeatureKindCount, "too many kinds in channel-map header");
        detail::require<FormatError>(frames <= static_cast<std::uint32_t>(INT32_MAX), "frame count overflow");
        std::vector<ChannelMapEntry> entries;
        for (std::uint32_t i = 0; i < kinds; ++i) {
            const std::uint32_t kind = u32(), ch = u32(), rows = u32(), cols = u32();
            detail::require<FormatError>(kind < kFeatureKindCount, "unknown feature kind in channel-map header");
            detail::require<FormatError>(ch <= 1u << 16 && rows <= 1u << 16 && cols <= 1u << 16,
                                         "implausible channel-map dimensions");
            entries.push_back({static_cast<FeatureKind>(kind), static_cast<int>(ch), static_cast<int>(rows),
                               static_cast<int>(cols)});
        }
        const std::size_t rest = bytes.size() - pos;
        detail::require<FormatError>(rest % sizeof(float) == 0, "channel-map payload is not a whole number of floats");
        std::vector<float> payload(rest / sizeof(float));
        std::memcpy(payload.data(), bytes.data() + pos, rest);
        return ChannelMapFile(std::move(entries), static_cast<int>(frames), std::move(payload));
    }

    std::vector<char> serialize() const
    {
        std::vector<char> out(kChannelMapMagic.begin(), kChannelMapMagic.end());
        auto put = [&](std::uint32_t v) {
            char b[4];
            std::memcpy(b, &v, 4);
            out.insert(out.end(), b, b + 4);
        };
        put(kChannelMapVersion);
        put(static_cast<std::uint32_t>(frame_count_));
        put(static_cast<std::uint32_t>(entries_.size()));
        for (const auto& e : entries_) {
            put(static_cast<std::uint32_t>(e.kind));
            put(static_cast<std::uint32_t>(e.channels));
            put(static_cast<std::uint32_t>(e.rows));
            put(static_cast<std::uint32_t>(e.cols));
        }
        const auto* p = reinterpret_cast<const char*>(payload_.data());
        out.insert(out.end(), p, p + payload_.size() * sizeof(float));
        return out;
    }

    void write(const std::filesystem::path& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw IoError("cannot write channel-map file " + path.string());
        const auto bytes = serialize();
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw IoError("short write to " + path.string());
    }

    int frame_count() const noexcept { return frame_count_; }
    const std::vector<ChannelMapEntry>& entries() const noexcept { return entries_; }

    std::optional<ChannelMapEntry> entry(FeatureKind kind) const noexcept
    {
        for (const auto& e : entries_)
            if (e.kind == kind)
                return e;
        return std::nullopt;
    }

    /// Native-resolution floats of one kind in one frame (channel-major, row-major).
    std::span<const float> raw(FeatureKind kind, int frame) const
    {
        if (frame < 0 || frame >= frame_count_)
            throw NotFound("channel-map frame " + std::to_string(frame) + " out of range");
        std::size_t offset = frame_stride_ * static_cast<std::size_t>(frame);
        for (const auto& e : entries_) {
            if (e.kind == kind)
                return std::span<const float>(payload_).subspan(offset, e.floats_per_frame());
            offset += e.floats_per_frame();
        }
        throw NotFound("feature kind " + std::string(to_string(kind)) + " not in channel-map file");
    }

private:
    std::vector<ChannelMapEntry> entries_;
    int frame_count_ = 0;
    std::vector<float> payload_;
    std::size_t frame_stride_ = 0;
};

/// Assembles a file from per-frame stacks; frames[f][i] belongs to kinds[i].
inline ChannelMapFile make_channel_map(std::span<const FeatureKind> kinds,
                                       const std::vector<std::vector<FeatureStack>>& frames)
{
    std::vector<ChannelMapEntry> entries;
    std::vector<float> payload;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        detail::require<InvalidArgument>(frames[f].size() == kinds.size(), "frame has wrong number of stacks");
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            const auto& s = frames[f][i];
            ChannelMapEntry e{kinds[i], s.depth(), s.rows(), s.cols()};
            if (f == 0)
                entries.push_back(e);
            else
                detail::require<InvalidArgument>(entries[i] == e, "stack shape changes between frames");
            for (const auto& ch : s.channels())
                for (double v : ch)
                    payload.push_back(static_cast<float>(v));
        }
    }
    if (frames.empty())
        for (auto k : kinds)
            entries.push_back({k, 1, 1, 1});
    return ChannelMapFile(std::move(entries), static_cast<int>(frames.size()), std::move(payload));
}

/// Stored channels of one kind and frame, bilinearly resampled to rows x cols
/// (0 keeps the native resolution).
inline FeatureStack load_channel_map(const ChannelMapFile& file, FeatureKind kind, int frame, int rows = 0,
                                     int cols = 0)
{
    const auto e = file.entry(kind);
    if (!e)
        throw NotFound("feature kind " + std::string(to_string(kind)) + " not in channel-map file");
    const auto data = file.raw(kind, frame);
    std::vector<RealGrid> channels;
    const std::size_t plane = static_cast<std::size_t>(e->rows) * static_cast<std::size_t>(e->cols);
    for (int c = 0; c < e->channels; ++c) {
        RealGrid g(e->rows, e->cols);
        for (std::size_t i = 0; i < plane; ++i)
            g.data()[i] = data[static_cast<std::size_t>(c) * plane + i];
        channels.push_back(rows > 0 && cols > 0 ? resample_bilinear(g, rows, cols) : std::move(g));
    }
    return FeatureStack(std::move(channels));
}

/// HOG from pixels; layer kinds cropped from full-frame channel maps at the
/// patch's grid-cell centers.
class ChannelMapFeatureSource final : public FeatureSource {
public:
    explicit ChannelMapFeatureSource(std::shared_ptr<const ChannelMapFile> file) : file_(std::move(file)) {}

    std::vector<FeatureStack> extract(const FrameView& frame, const PatchSpec& patch, std::span<const FeatureKind> kinds,
                                      const GridShape& grid) const override
    {
        std::vector<FeatureStack> out;
        out.reserve(kinds.size());
        for (auto k : kinds) {
            if (k == FeatureKind::HOG && !file_->entry(k)) {
                out.push_back(extract_hog(frame.image, patch, grid));
                continue;
            }
            out.push_back(crop(frame, patch, k, grid));
        }
        return out;
    }

private:
    FeatureStack crop(const FrameView& frame, const PatchSpec& patch, FeatureKind kind, const GridShape& grid) const
    {
        const auto e = file_->entry(kind);
        if (!e)
            throw NotFound("feature kind " + std::string(to_string(kind)) + " not in channel-map file");
        const auto data = file_->raw(kind, frame.index);
        const auto m = patch_mapping(patch, grid.rows(), grid.cols());
        const double sx = static_cast<double>(e->cols) / frame.image.cols;
        const double sy = static_cast<double>(e->rows) / frame.image.rows;
        const std::size_t plane = static_cast<std::size_t>(e->rows) * static_cast<std::size_t>(e->cols);
        std::vector<RealGrid> channels;
        for (int c = 0; c < e->channels; ++c) {
            const float* p = data.data() + static_cast<std::size_t>(c) * plane;
            RealGrid g(grid.rows(), grid.cols());
            for (int r = 0; r < grid.rows(); ++r) {
                const double y = std::clamp(m.image_y(r) * sy - 0.5, 0.0, e->rows - 1.0);
                const int y0 = static_cast<int>(y), y1 = std::min(y0 + 1, e->rows - 1);
                const double fy = y - y0;
                for (int col = 0; col < grid.cols(); ++col) {
                    const double x = std::clamp(m.image_x(col) * sx - 0.5, 0.0, e->cols - 1.0);
                    const int x0 = static_cast<int>(x), x1 = std::min(x0 + 1, e->cols - 1);
                    const double fx = x - x0;
                    auto at = [&](int yy, int xx) { return static_cast<double>(p[yy * e->cols + xx]); };
                    const double top = at(y0, x0) + (at(y0, x1) - at(y0, x0)) * fx;
                    const double bot = at(y1, x0) + (at(y1, x1) - at(y1, x0)) * fx;
                    g(r, col) = top + (bot - top) * fy;
                }
            }
            channels.push_back(std::move(g));
        }
        return FeatureStack(std::move(channels));
    }

    std::shared_ptr<const ChannelMapFile> file_;
};

} // namespace facf
