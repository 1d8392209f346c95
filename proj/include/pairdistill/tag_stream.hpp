#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pairdistill/emission_config.hpp"

namespace pairdistill {

enum class Channel : std::uint8_t { Det1 = 0, Det2 = 1, Trigger = 2 };

/// Ground-truth origin of a detector tag. Triggers and tags read from
/// external data carry Unknown.
enum class Origin : std::uint8_t { Unknown = 0, Spdc = 1, Pl = 2, Dark = 3 };

std::string_view channel_name(Channel channel) noexcept;
std::string_view origin_name(Origin origin) noexcept;

struct Tag {
    Picoseconds time_ps = 0;
    Channel channel = Channel::Det1;
    Origin origin = Origin::Unknown;

    friend bool operator==(const Tag&, const Tag&) = default;
};

/// Total order used for every stream: time, then channel, then origin.
inline bool tag_less(const Tag& a, const Tag& b) noexcept {
    if (a.time_ps != b.time_ps) return a.time_ps < b.time_ps;
    if (a.channel != b.channel) return a.channel < b.channel;
    return a.origin < b.origin;
}

/// Photon bookkeeping of a simulation before losses, for model checks.
struct EmissionTally {
    std::int64_t spdc_pairs = 0;
    std::int64_t pl_photons = 0;
    std::int64_t dark_counts = 0;

    std::int64_t emitted_photons() const noexcept { return 2 * spdc_pairs + pl_photons; }
};

/// Immutable, time-ordered detection record.
class TagStream {
public:
    TagStream() = default;

    /// Sorts `events` into canonical order.
    TagStream(std::vector<Tag> events, EmissionConfig meta, bool has_truth, EmissionTally tally = {});

    std::span<const Tag> events() const noexcept { return events_; }
    const EmissionConfig& meta() const noexcept { return meta_; }
    bool has_truth() const noexcept { return has_truth_; }
    const EmissionTally& tally() const noexcept { return tally_; }

    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    std::size_t count(Channel channel) const noexcept;
    std::size_t count(Channel channel, Origin origin) const noexcept;

    /// Times of one channel, ascending.
    std::vector<Picoseconds> times(Channel channel) const;

    /// Same record with every timestamp shifted by `offset`.
    TagStream shifted(Picoseconds offset) const;

    friend bool operator==(const TagStream& a, const TagStream& b) {
        return a.events_ == b.events_ && a.has_truth_ == b.has_truth_;
    }

private:
    std::vector<Tag> events_;
    EmissionConfig meta_;
    bool has_truth_ = false;
    EmissionTally tally_;
};

/// Partitions detector tags by origin into (SPDC, background). Dark counts
/// go to the background partition. Triggers are copied to both.
/// Throws Error{MissingTruth} for streams without origin labels.
std::pair<TagStream, TagStream> split_truth(const TagStream& stream);

/// Order-preserving merge of two streams that share metadata.
TagStream merge(const TagStream& a, const TagStream& b);

// Binary format: "PSFT1", u32 LE header length, JSON header (config echo,
// event count, truth flag, tally), then packed 10-byte LE records
// (u8 channel, i64 time_ps, u8 origin).
void write_binary(const TagStream& stream, std::ostream& out);
TagStream read_binary(std::istream& in);

// CSV: optional "# PSFT1 <json header>" line, then "channel,time_ps,origin".
void write_csv(const TagStream& stream, std::ostream& out);
TagStream read_csv(std::istream& in);

/// Dispatch on extension: ".csv" is CSV, everything else binary.
void save_stream(const TagStream& stream, const std::string& path);
TagStream load_stream(const std::string& path);

}  // namespace pairdistill
