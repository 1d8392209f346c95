#include "pairdistill/tag_stream.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pairdistill/config_io.hpp"
#include "pairdistill/error.hpp"

namespace pairdistill {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "PSFT1";
constexpr std::size_t kRecordSize = 10;

[[noreturn]] void format_error(const std::string& what) { throw Error(ErrorCategory::FileFormat, what); }

json header_json(const TagStream& stream) {
    return json{
        {"format", kMagic},
        {"config", config_to_json(stream.meta())},
        {"event_count", stream.size()},
        {"has_truth", stream.has_truth()},
        {"tally",
         {{"spdc_pairs", stream.tally().spdc_pairs},
          {"pl_photons", stream.tally().pl_photons},
          {"dark_counts", stream.tally().dark_counts}}},
    };
}

struct Header {
    EmissionConfig config;
    std::size_t event_count = 0;
    bool has_truth = false;
    EmissionTally tally;
};

Header parse_header(std::string_view text) {
    json doc = parse_json_text(text, "tag-file header");
    Header h;
    try {
        if (doc.contains("config")) h.config = config_from_json(doc.at("config"));
        h.event_count = doc.value("event_count", std::size_t{0});
        h.has_truth = doc.value("has_truth", false);
        if (doc.contains("tally")) {
            const auto& t = doc.at("tally");
            h.tally.spdc_pairs = t.value("spdc_pairs", std::int64_t{0});
            h.tally.pl_photons = t.value("pl_photons", std::int64_t{0});
            h.tally.dark_counts = t.value("dark_counts", std::int64_t{0});
        }
    } catch (const json::exception& e) {
        format_error(std::string("bad tag-file header: ") + e.what());
    } catch (const Error& e) {
        format_error(std::string("bad tag-file header: ") + e.what());
    }
    return h;
}

Channel channel_from_byte(std::uint8_t b) {
    if (b > 2) format_error("invalid channel byte " + std::to_string(b));
    return static_cast<Channel>(b);
}

Origin origin_from_byte(std::uint8_t b) {
    if (b > 3) format_error("invalid origin byte " + std::to_string(b));
    return static_cast<Origin>(b);
}

Channel channel_from_text(std::string_view s) {
    if (s == "det1" || s == "0") return Channel::Det1;
    if (s == "det2" || s == "1") return Channel::Det2;
    if (s == "trigger" || s == "2") return Channel::Trigger;
    format_error("invalid channel '" + std::string(s) + "'");
}

Origin origin_from_text(std::string_view s) {
    if (s.empty() || s == "unknown" || s == "0") return Origin::Unknown;
    if (s == "spdc" || s == "1") return Origin::Spdc;
    if (s == "pl" || s == "2") return Origin::Pl;
    if (s == "dark" || s == "3") return Origin::Dark;
    format_error("invalid origin '" + std::string(s) + "'");
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string_view channel_name(Channel channel) noexcept {
    switch (channel) {
        case Channel::Det1: return "det1";
        case Channel::Det2: return "det2";
        case Channel::Trigger: return "trigger";
    }
    return "?";
}

std::string_view origin_name(Origin origin) noexcept {
    switch (origin) {
        case Origin::Unknown: return "unknown";
        case Origin::Spdc: return "spdc";
        case Origin::Pl: return "pl";
        case Origin::Dark: return "dark";
    }
    return "?";
}

TagStream::TagStream(std::vector<Tag> events, EmissionConfig meta, bool has_truth, EmissionTally tally)
    : events_(std::move(events)), meta_(meta), has_truth_(has_truth), tally_(tally) {
    if (!std::is_sorted(events_.begin(), events_.end(), tag_less)) {
        std::sort(events_.begin(), events_.end(), tag_less);
    }
}

std::size_t TagStream::count(Channel channel) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(events_.begin(), events_.end(), [channel](const Tag& t) { return t.channel == channel; }));
}

std::size_t TagStream::count(Channel channel, Origin origin) const noexcept {
    return static_cast<std::size_t>(std::count_if(events_.begin(), events_.end(), [&](const Tag& t) {
        return t.channel == channel && t.origin == origin;
    }));
}

std::vector<Picoseconds> TagStream::times(Channel channel) const {
    std::vector<Picoseconds> out;
    for (const Tag& t : events_) {
        if (t.channel == channel) out.push_back(t.time_ps);
    }
    return out;
}

TagStream TagStream::shifted(Picoseconds offset) const {
    std::vector<Tag> moved = events_;
    for (Tag& t : moved) t.time_ps += offset;
    return TagStream(std::move(moved), meta_, has_truth_, tally_);
}

std::pair<TagStream, TagStream> split_truth(const TagStream& stream) {
    if (!stream.has_truth()) throw Error(ErrorCategory::MissingTruth, "stream carries no origin labels");
    std::vector<Tag> spdc, background;
    for (const Tag& t : stream.events()) {
        if (t.channel == Channel::Trigger) {
            spdc.push_back(t);
            background.push_back(t);
        } else if (t.origin == Origin::Spdc) {
            spdc.push_back(t);
        } else {
            background.push_back(t);
        }
    }
    return {TagStream(std::move(spdc), stream.meta(), true, stream.tally()),
            TagStream(std::move(background), stream.meta(), true, stream.tally())};
}

TagStream merge(const TagStream& a, const TagStream& b) {
    std::vector<Tag> out;
    out.reserve(a.size() + b.size());
    std::merge(a.events().begin(), a.events().end(), b.events().begin(), b.events().end(), std::back_inserter(out),
               tag_less);
    return TagStream(std::move(out), a.meta(), a.has_truth() && b.has_truth(), a.tally());
}

void write_binary(const TagStream& stream, std::ostream& out) {
    const std::string header = header_json(stream).dump();
    out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
    const auto len = static_cast<std::uint32_t>(header.size());
    std::array<unsigned char, 4> len_bytes{};
    for (int i = 0; i < 4; ++i) len_bytes[i] = static_cast<unsigned char>((len >> (8 * i)) & 0xFFu);
    out.write(reinterpret_cast<const char*>(len_bytes.data()), 4);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    std::vector<unsigned char> buffer;
    buffer.reserve(stream.size() * kRecordSize);
    for (const Tag& t : stream.events()) {
        buffer.push_back(static_cast<unsigned char>(t.channel));
        const auto bits = static_cast<std::uint64_t>(t.time_ps);
        for (int i = 0; i < 8; ++i) buffer.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu));
        buffer.push_back(static_cast<unsigned char>(t.origin));
    }
    out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw Error(ErrorCategory::Io, "write failed");
}

TagStream read_binary(std::istream& in) {
    std::array<char, 5> magic{};
    in.read(magic.data(), 5);
    if (!in || std::string_view(magic.data(), 5) != kMagic) format_error("missing PSFT1 magic");
    std::array<unsigned char, 4> len_bytes{};
    in.read(reinterpret_cast<char*>(len_bytes.data()), 4);
    if (!in) format_error("truncated header length");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(len_bytes[i]) << (8 * i);
    std::string header(len, '\0');
    in.read(header.data(), len);
    if (!in) format_error("truncated header");
    const Header h = parse_header(header);

    std::vector<unsigned char> buffer(h.event_count * kRecordSize);
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
    if (static_cast<std::size_t>(in.gcount()) != buffer.size()) format_error("truncated record block");

    std::vector<Tag> events(h.event_count);
    for (std::size_t k = 0; k < h.event_count; ++k) {
        const unsigned char* rec = buffer.data() + k * kRecordSize;
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(rec[1 + i]) << (8 * i);
        events[k] = Tag{static_cast<Picoseconds>(bits), channel_from_byte(rec[0]), origin_from_byte(rec[9])};
    }
    return TagStream(std::move(events), h.config, h.has_truth, h.tally);
}

void write_csv(const TagStream& stream, std::ostream& out) {
    out << "# " << kMagic << ' ' << header_json(stream).dump() << '\n';
    out << "channel,time_ps,origin\n";
    for (const Tag& t : stream.events()) {
        out << channel_name(t.channel) << ',' << t.time_ps << ',' << origin_name(t.origin) << '\n';
    }
    if (!out) throw Error(ErrorCategory::Io, "write failed");
}

TagStream read_csv(std::istream& in) {
    Header h;
    bool saw_header_line = false;
    bool saw_column_line = false;
    bool any_truth = false;
    std::vector<Tag> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const std::string prefix = "# " + std::string(kMagic) + ' ';
            if (line.rfind(prefix, 0) == 0) {
                h = parse_header(std::string_view(line).substr(prefix.size()));
                saw_header_line = true;
            }
            continue;
        }
        if (!saw_column_line) {
            if (line != "channel,time_ps,origin" && line != "channel,time_ps") {
                format_error("line " + std::to_string(line_no) + ": expected column header channel,time_ps,origin");
            }
            saw_column_line = true;
            continue;
        }
        std::string_view view(line);
        const auto c1 = view.find(',');
        if (c1 == std::string_view::npos) format_error("line " + std::to_string(line_no) + ": expected 2-3 fields");
        const auto c2 = view.find(',', c1 + 1);
        const std::string_view ch = view.substr(0, c1);
        const std::string_view tm = view.substr(c1 + 1, c2 == std::string_view::npos ? std::string_view::npos : c2 - c1 - 1);
        const std::string_view org = c2 == std::string_view::npos ? std::string_view{} : view.substr(c2 + 1);
        Tag t;
        t.channel = channel_from_text(ch);
        try {
            std::size_t used = 0;
            t.time_ps = std::stoll(std::string(tm), &used);
            if (used != tm.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            format_error("line " + std::to_string(line_no) + ": bad time_ps '" + std::string(tm) + "'");
        }
        t.origin = origin_from_text(org);
        any_truth = any_truth || t.origin != Origin::Unknown;
        events.push_back(t);
    }
    if (!saw_column_line) format_error("empty CSV tag file");
    if (!saw_header_line) {
        // Without a config echo, infer the regime from the presence of triggers.
        const bool has_trigger =
            std::any_of(events.begin(), events.end(), [](const Tag& t) { return t.channel == Channel::Trigger; });
        h.config.regime = has_trigger ? Regime::Pulsed : Regime::Cw;
        h.has_truth = any_truth;
    }
    return TagStream(std::move(events), h.config, h.has_truth, h.tally);
}

void save_stream(const TagStream& stream, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::Io, "cannot open '" + path + "' for writing");
    if (ends_with(path, ".csv")) {
        write_csv(stream, out);
    } else {
        write_binary(stream, out);
    }
}

TagStream load_stream(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::Io, "cannot open '" + path + "'");
    return ends_with(path, ".csv") ? read_csv(in) : read_binary(in);
}

}  // namespace pairdistill
