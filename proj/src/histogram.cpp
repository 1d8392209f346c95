#include "pairdistill/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "pairdistill/error.hpp"
#include "pairdistill/parallel.hpp"

namespace pairdistill::tags {

namespace {

constexpr std::size_t kCoincidenceBlock = 1 << 16;

void check_binning(Picoseconds bin_width, Picoseconds range) {
    if (bin_width <= 0) throw Error(ErrorCategory::Domain, "bin width must be > 0");
    if (range <= 0) throw Error(ErrorCategory::Domain, "histogram range must be > 0");
}

std::size_t bins_for(Picoseconds span, Picoseconds bin_width) {
    return static_cast<std::size_t>((span + bin_width - 1) / bin_width);
}

std::vector<Picoseconds> trigger_times(const TagStream& stream) {
    std::vector<Picoseconds> out = stream.times(Channel::Trigger);
    if (out.empty()) throw Error(ErrorCategory::NoTrigger, "stream has no trigger events");
    return out;
}

constexpr std::size_t kNoPulse = static_cast<std::size_t>(-1);

/// Walks detector tags in time order and reports (tag, pulse, delay) against
/// the latest trigger at or before the tag. Tags before the first trigger
/// are reported with pulse kNoPulse.
template <typename Fn>
void for_each_assigned(const TagStream& stream, const std::vector<Picoseconds>& triggers, Fn&& fn) {
    std::size_t next = 0;  // first trigger strictly after the current tag
    for (const Tag& tag : stream.events()) {
        if (tag.channel == Channel::Trigger) continue;
        while (next < triggers.size() && triggers[next] <= tag.time_ps) ++next;
        if (next == 0) {
            fn(tag, kNoPulse, Picoseconds{0});
        } else {
            fn(tag, next - 1, tag.time_ps - triggers[next - 1]);
        }
    }
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace

std::string_view axis_name(AxisLabel axis) noexcept {
    return axis == AxisLabel::DetectorDelay ? "detector_delay" : "trigger_delay";
}

std::int64_t Histogram1D::total() const noexcept { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

std::optional<std::size_t> Histogram1D::bin_of(Picoseconds t) const noexcept {
    if (t < origin) return std::nullopt;
    const auto i = static_cast<std::size_t>((t - origin) / bin_width);
    if (i >= counts.size()) return std::nullopt;
    return i;
}

std::int64_t Histogram2D::total() const noexcept { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

std::int64_t Histogram2D::sum_region(Picoseconds x0, Picoseconds x1, Picoseconds y0, Picoseconds y1) const noexcept {
    std::int64_t sum = 0;
    for (std::size_t ix = 0; ix < nx; ++ix) {
        const Picoseconds xs = origin_x + static_cast<Picoseconds>(ix) * bin_width_x;
        if (xs < x0 || xs >= x1) continue;
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const Picoseconds ys = origin_y + static_cast<Picoseconds>(iy) * bin_width_y;
            if (ys >= y0 && ys < y1) sum += at(ix, iy);
        }
    }
    return sum;
}

Histogram1D Histogram2D::marginal_x() const {
    Histogram1D h{bin_width_x, origin_x, std::vector<std::int64_t>(nx, 0), AxisLabel::TriggerDelay};
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) h.counts[ix] += at(ix, iy);
    }
    return h;
}

Histogram1D Histogram2D::marginal_y() const {
    Histogram1D h{bin_width_y, origin_y, std::vector<std::int64_t>(ny, 0), AxisLabel::TriggerDelay};
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) h.counts[iy] += at(ix, iy);
    }
    return h;
}

void GateWindow::validate() const {
    if (width <= 0) throw Error(ErrorCategory::Domain, "gate width must be > 0");
}

Histogram1D coincidence_histogram(const TagStream& stream, Picoseconds bin_width, Picoseconds range,
                                  PairingRule rule, unsigned threads) {
    check_binning(bin_width, range);
    const std::vector<Picoseconds> t1 = stream.times(Channel::Det1);
    const std::vector<Picoseconds> t2 = stream.times(Channel::Det2);
    if (t1.empty() || t2.empty()) {
        throw Error(ErrorCategory::EmptyStream, "coincidence histogram needs tags on both detectors");
    }
    const std::size_t n_bins = bins_for(2 * range, bin_width);
    const auto n_blocks = static_cast<std::int64_t>((t1.size() + kCoincidenceBlock - 1) / kCoincidenceBlock);

    struct Partial {
        std::vector<std::int64_t> counts;
        std::int64_t out_of_range = 0;
    };
    std::vector<Partial> partials(static_cast<std::size_t>(n_blocks));

    parallel_blocks(n_blocks, threads, [&](std::int64_t b) {
        Partial& part = partials[static_cast<std::size_t>(b)];
        part.counts.assign(n_bins, 0);
        const std::size_t begin = static_cast<std::size_t>(b) * kCoincidenceBlock;
        const std::size_t end = std::min(t1.size(), begin + kCoincidenceBlock);
        auto lo = std::lower_bound(t2.begin(), t2.end(), t1[begin] - range);
        for (std::size_t i = begin; i < end; ++i) {
            const Picoseconds start = t1[i];
            if (rule == PairingRule::MultiStop) {
                while (lo != t2.end() && *lo < start - range) ++lo;
                for (auto it = lo; it != t2.end() && *it - start < range; ++it) {
                    const auto bin = static_cast<std::size_t>((*it - start + range) / bin_width);
                    ++part.counts[bin];
                }
            } else {
                auto stop = std::lower_bound(t2.begin(), t2.end(), start);
                if (stop == t2.end()) continue;
                const Picoseconds delta = *stop - start;
                if (delta < range) {
                    ++part.counts[static_cast<std::size_t>((delta + range) / bin_width)];
                } else {
                    ++part.out_of_range;
                }
            }
        }
    });

    Histogram1D hist{bin_width, -range, std::vector<std::int64_t>(n_bins, 0), AxisLabel::DetectorDelay};
    for (const Partial& part : partials) {
        for (std::size_t k = 0; k < n_bins; ++k) hist.counts[k] += part.counts[k];
        hist.out_of_range += part.out_of_range;
    }
    return hist;
}

Histogram1D sync_histogram(const TagStream& stream, Channel channel, Picoseconds bin_width, Picoseconds range) {
    check_binning(bin_width, range);
    if (channel == Channel::Trigger) throw Error(ErrorCategory::Domain, "sync histogram needs a detector channel");
    const std::vector<Picoseconds> triggers = trigger_times(stream);
    Histogram1D hist{bin_width, 0, std::vector<std::int64_t>(bins_for(range, bin_width), 0), AxisLabel::TriggerDelay};
    for_each_assigned(stream, triggers, [&](const Tag& tag, std::size_t pulse, Picoseconds delay) {
        if (tag.channel != channel) return;
        if (pulse == kNoPulse) {
            ++hist.unassigned;
        } else if (delay < range) {
            ++hist.counts[static_cast<std::size_t>(delay / bin_width)];
        } else {
            ++hist.out_of_range;
        }
    });
    return hist;
}

Histogram1D combined_sync_histogram(const TagStream& stream, Picoseconds bin_width, Picoseconds range) {
    Histogram1D sum = sync_histogram(stream, Channel::Det1, bin_width, range);
    const Histogram1D other = sync_histogram(stream, Channel::Det2, bin_width, range);
    for (std::size_t k = 0; k < sum.counts.size(); ++k) sum.counts[k] += other.counts[k];
    sum.unassigned += other.unassigned;
    sum.out_of_range += other.out_of_range;
    return sum;
}

Histogram2D threefold_histogram(const TagStream& stream, Picoseconds bin_width, Picoseconds range) {
    check_binning(bin_width, range);
    const std::vector<Picoseconds> triggers = trigger_times(stream);
    const std::size_t n = bins_for(range, bin_width);
    Histogram2D hist{bin_width, bin_width, 0, 0, n, n, std::vector<std::int64_t>(n * n, 0)};

    std::vector<std::size_t> bins1, bins2;
    std::size_t current = kNoPulse;
    auto flush = [&] {
        for (std::size_t i : bins1) {
            for (std::size_t j : bins2) ++hist.counts[i * n + j];
        }
        bins1.clear();
        bins2.clear();
    };
    for_each_assigned(stream, triggers, [&](const Tag& tag, std::size_t pulse, Picoseconds delay) {
        if (pulse == kNoPulse) return;
        if (pulse != current) {
            flush();
            current = pulse;
        }
        if (delay >= range) return;
        const auto bin = static_cast<std::size_t>(delay / bin_width);
        (tag.channel == Channel::Det1 ? bins1 : bins2).push_back(bin);
    });
    flush();
    return hist;
}

GateWindow find_gate(const Histogram1D& hist, double threshold_fraction) {
    if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
        throw Error(ErrorCategory::Domain, "threshold_fraction must lie in (0, 1)");
    }
    const auto& y = hist.counts;
    if (y.empty() || hist.total() == 0) throw Error(ErrorCategory::NoPeak, "histogram is empty");
    const std::size_t n = y.size();
    const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double peak_value = static_cast<double>(y[peak]);

    const double exclusion = 0.1 * static_cast<double>(n);
    std::vector<double> outside;
    for (std::size_t i = 0; i < n; ++i) {
        const double dist = std::abs(static_cast<double>(i) - static_cast<double>(peak));
        if (dist > exclusion) outside.push_back(static_cast<double>(y[i]));
    }
    if (outside.empty()) {
        for (auto v : y) outside.push_back(static_cast<double>(v));
    }
    const double floor = median(std::move(outside));
    if (!(peak_value > floor) || peak_value < floor + 5.0 * std::sqrt(floor)) {
        throw Error(ErrorCategory::NoPeak, "no significant peak above the floor");
    }

    const double level = floor + threshold_fraction * (peak_value - floor);
    const double w = static_cast<double>(hist.bin_width);
    auto value = [&](std::size_t i) { return static_cast<double>(y[i]); };

    std::size_t left = peak;
    while (left > 0 && value(left - 1) >= level) --left;
    std::size_t right = peak;
    while (right + 1 < n && value(right + 1) >= level) ++right;

    double x_left = static_cast<double>(hist.bin_start(0));
    if (left > 0) {
        const double y0 = value(left - 1), y1 = value(left);
        x_left = hist.bin_center(left - 1) + (level - y0) / (y1 - y0) * w;
    }
    double x_right = static_cast<double>(hist.bin_start(n - 1)) + w;
    if (right + 1 < n) {
        const double y0 = value(right), y1 = value(right + 1);
        x_right = hist.bin_center(right) + (y0 - level) / (y0 - y1) * w;
    }

    // Sub-bin peak position from a Gaussian through the top three bins.
    double center = hist.bin_center(peak);
    if (peak > 0 && peak + 1 < n) {
        const double a = value(peak - 1) - floor, b = peak_value - floor, c = value(peak + 1) - floor;
        if (a > 0.0 && b > 0.0 && c > 0.0) {
            const double la = std::log(a), lb = std::log(b), lc = std::log(c);
            const double curvature = la - 2.0 * lb + lc;
            if (curvature < 0.0) center += std::clamp(0.5 * (la - lc) / curvature, -0.5, 0.5) * w;
        }
    }

    const double half = std::max(0.5, std::min(center - x_left, x_right - center));
    GateWindow gate;
    gate.offset = static_cast<Picoseconds>(std::llround(center - half));
    gate.width = std::max<Picoseconds>(1, static_cast<Picoseconds>(std::llround(2.0 * half)));
    return gate;
}

TagStream apply_gate(const TagStream& stream, const GateWindow& gate) {
    gate.validate();
    const std::vector<Picoseconds> triggers = stream.times(Channel::Trigger);
    std::vector<Tag> kept;
    kept.reserve(stream.size());
    std::size_t next = 0;
    for (const Tag& tag : stream.events()) {
        if (tag.channel == Channel::Trigger) {
            kept.push_back(tag);
            continue;
        }
        while (next < triggers.size() && triggers[next] <= tag.time_ps) ++next;
        if (next == 0) continue;
        if (gate.contains(tag.time_ps - triggers[next - 1])) kept.push_back(tag);
    }
    return TagStream(std::move(kept), stream.meta(), stream.has_truth(), stream.tally());
}

void write_csv(const Histogram1D& hist, std::ostream& out) {
    out << "bin_start_ps,count\n";
    for (std::size_t i = 0; i < hist.size(); ++i) out << hist.bin_start(i) << ',' << hist.counts[i] << '\n';
}

Histogram1D read_histogram_csv(std::istream& in, AxisLabel axis) {
    std::string line;
    std::vector<std::pair<Picoseconds, std::int64_t>> rows;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#' || line.rfind("bin_start", 0) == 0) continue;
        const auto comma = line.find(',');
        try {
            if (comma == std::string::npos) throw std::invalid_argument("no comma");
            rows.emplace_back(std::stoll(line.substr(0, comma)), std::stoll(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw Error(ErrorCategory::FileFormat, "histogram CSV line " + std::to_string(line_no) + " is malformed");
        }
    }
    if (rows.size() < 2) throw Error(ErrorCategory::FileFormat, "histogram CSV needs at least two bins");
    Histogram1D hist;
    hist.axis = axis;
    hist.origin = rows.front().first;
    hist.bin_width = rows[1].first - rows[0].first;
    if (hist.bin_width <= 0) throw Error(ErrorCategory::FileFormat, "histogram bins must be ascending");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].first != hist.bin_start(i)) {
            throw Error(ErrorCategory::FileFormat, "histogram bins must be uniformly spaced");
        }
        hist.counts.push_back(rows[i].second);
    }
    return hist;
}

nlohmann::json to_json(const Histogram1D& hist) {
    return nlohmann::json{
        {"axis", axis_name(hist.axis)},       {"bin_width_ps", hist.bin_width}, {"origin_ps", hist.origin},
        {"unassigned", hist.unassigned},      {"out_of_range", hist.out_of_range},
        {"total", hist.total()},              {"counts", hist.counts},
    };
}

Histogram1D histogram_from_json(const nlohmann::json& doc) {
    try {
        Histogram1D hist;
        hist.axis = doc.at("axis").get<std::string>() == "trigger_delay" ? AxisLabel::TriggerDelay
                                                                         : AxisLabel::DetectorDelay;
        hist.bin_width = doc.at("bin_width_ps").get<Picoseconds>();
        hist.origin = doc.at("origin_ps").get<Picoseconds>();
        hist.unassigned = doc.value("unassigned", std::int64_t{0});
        hist.out_of_range = doc.value("out_of_range", std::int64_t{0});
        hist.counts = doc.at("counts").get<std::vector<std::int64_t>>();
        return hist;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCategory::FileFormat, std::string("bad histogram JSON: ") + e.what());
    }
}

void write_csv(const Histogram2D& hist, std::ostream& out) {
    out << "det1_delay_ps,det2_delay_ps,count\n";
    for (std::size_t ix = 0; ix < hist.nx; ++ix) {
        for (std::size_t iy = 0; iy < hist.ny; ++iy) {
            const auto c = hist.at(ix, iy);
            if (c == 0) continue;
            out << hist.origin_x + static_cast<Picoseconds>(ix) * hist.bin_width_x << ','
                << hist.origin_y + static_cast<Picoseconds>(iy) * hist.bin_width_y << ',' << c << '\n';
        }
    }
}

nlohmann::json to_json(const GateWindow& gate) {
    return nlohmann::json{{"offset_ps", gate.offset}, {"width_ps", gate.width}};
}

}  // namespace pairdistill::tags
