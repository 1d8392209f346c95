#pragma once

// Histogramming kernel and time gating over tag streams.
//
// All bins are half-open [start, start + width). Detector tags are assigned to
// the nearest preceding trigger; tags before the first trigger are dropped and
// counted in `unassigned`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "pairdistill/tag_stream.hpp"

namespace pairdistill::tags {

enum class AxisLabel : std::uint8_t { DetectorDelay, TriggerDelay };

std::string_view axis_name(AxisLabel axis) noexcept;

struct Histogram1D {
    Picoseconds bin_width = 50;
    Picoseconds origin = 0;  // start of bin 0
    std::vector<std::int64_t> counts;
    AxisLabel axis = AxisLabel::DetectorDelay;
    std::int64_t unassigned = 0;    // tags before the first trigger
    std::int64_t out_of_range = 0;  // tags or pairs falling outside the bins

    std::size_t size() const noexcept { return counts.size(); }
    Picoseconds bin_start(std::size_t i) const noexcept { return origin + static_cast<Picoseconds>(i) * bin_width; }
    double bin_center(std::size_t i) const noexcept {
        return static_cast<double>(bin_start(i)) + 0.5 * static_cast<double>(bin_width);
    }
    std::int64_t total() const noexcept;

    /// Bin holding `t`, or nullopt when outside.
    std::optional<std::size_t> bin_of(Picoseconds t) const noexcept;

    friend bool operator==(const Histogram1D&, const Histogram1D&) = default;
};

/// Axis x is Det1 delay from its trigger, axis y Det2 delay; counts are row-major in x.
struct Histogram2D {
    Picoseconds bin_width_x = 50;
    Picoseconds bin_width_y = 50;
    Picoseconds origin_x = 0;
    Picoseconds origin_y = 0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<std::int64_t> counts;

    std::int64_t at(std::size_t ix, std::size_t iy) const noexcept { return counts[ix * ny + iy]; }
    std::int64_t total() const noexcept;

    /// Sum over Det1 delay in [x0, x1) and Det2 delay in [y0, y1), by bins
    /// whose start lies inside the interval.
    std::int64_t sum_region(Picoseconds x0, Picoseconds x1, Picoseconds y0, Picoseconds y1) const noexcept;

    Histogram1D marginal_x() const;  // summed over Det2 delay
    Histogram1D marginal_y() const;  // summed over Det1 delay

    friend bool operator==(const Histogram2D&, const Histogram2D&) = default;
};

/// Per-trigger acceptance window [offset, offset + width) relative to the trigger.
struct GateWindow {
    Picoseconds offset = 0;
    Picoseconds width = 1;

    bool contains(Picoseconds delay) const noexcept { return delay >= offset && delay - offset < width; }
    void validate() const;

    friend bool operator==(const GateWindow&, const GateWindow&) = default;
};

enum class PairingRule : std::uint8_t {
    MultiStop,  // every Det1/Det2 pair inside the range
    StartStop,  // Det1 starts, the first later Det2 stops
};

/// Histogram of t2 - t1 over [-range, range).
/// Throws Error{EmptyStream} when either detector has no tags.
Histogram1D coincidence_histogram(const TagStream& stream, Picoseconds bin_width, Picoseconds range,
                                  PairingRule rule = PairingRule::MultiStop, unsigned threads = 1);

/// Histogram of (tag time - preceding trigger) over [0, range) for one detector.
/// Throws Error{NoTrigger} when the stream has no triggers.
Histogram1D sync_histogram(const TagStream& stream, Channel channel, Picoseconds bin_width, Picoseconds range);

/// Sum of both detectors' synchronous histograms.
Histogram1D combined_sync_histogram(const TagStream& stream, Picoseconds bin_width, Picoseconds range);

/// For each pulse, every (Det1, Det2) tag pair populates the bin at their
/// trigger delays, both in [0, range). Throws Error{NoTrigger}.
Histogram2D threefold_histogram(const TagStream& stream, Picoseconds bin_width, Picoseconds range);

/// Window around the global maximum where counts stay above
/// floor + threshold_fraction * (peak - floor). The floor is the median of
/// bins farther than 10% of the axis length from the peak. Crossings are
/// interpolated between bin centers and the window is symmetrized about the
/// peak using the narrower side, so a one-sided tail does not widen it.
/// Throws Error{NoPeak} if peak < floor + 5 sqrt(floor) or the histogram is empty.
GateWindow find_gate(const Histogram1D& sync_hist, double threshold_fraction);

/// Keeps detector tags whose delay from the preceding trigger lies inside
/// the gate; triggers are kept, tags before the first trigger dropped.
TagStream apply_gate(const TagStream& stream, const GateWindow& gate);

// Export: CSV rows "bin_start_ps,count"; JSON with metadata and counts.
void write_csv(const Histogram1D& hist, std::ostream& out);
Histogram1D read_histogram_csv(std::istream& in, AxisLabel axis = AxisLabel::DetectorDelay);
nlohmann::json to_json(const Histogram1D& hist);
Histogram1D histogram_from_json(const nlohmann::json& doc);
/// Rows "det1_delay_ps,det2_delay_ps,count" for non-empty bins.
void write_csv(const Histogram2D& hist, std::ostream& out);
nlohmann::json to_json(const GateWindow& gate);

}  // namespace pairdistill::tags
