#include "smilecnn/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "smilecnn/rng.hpp"

namespace smilecnn {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

long parse_int(const std::string& field, size_t line, const char* what) {
    long value = 0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError("line " + std::to_string(line) + ": " + what +
                         " is not an integer: '" + field + "'");
    return value;
}

}  // namespace

std::vector<AnnotationRecord> parse_annotations(std::istream& in) {
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line))
        throw ParseError("line 1: missing header row");
    ++line_no;
    auto header = split_fields(strip(line));
    for (auto& f : header) f = strip(f);
    const std::vector<std::string> expected = {"video_id", "frame", "au",
                                               "intensity"};
    if (header != expected)
        throw ParseError("line 1: header must be video_id,frame,au,intensity");
    std::vector<AnnotationRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = strip(line);
        if (s.empty()) continue;
        auto fields = split_fields(s);
        if (fields.size() != 4)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        for (auto& f : fields) f = strip(f);
        AnnotationRecord r;
        r.video_id = fields[0];
        const long frame = parse_int(fields[1], line_no, "frame");
        if (frame < 0)
            throw ParseError("line " + std::to_string(line_no) +
                             ": frame must be >= 0");
        r.frame_index = uint32_t(frame);
        r.au = fields[2];
        if (r.au.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty au");
        const long intensity = parse_int(fields[3], line_no, "intensity");
        if (intensity < 0 || intensity > 5)
            throw ParseError("line " + std::to_string(line_no) +
                             ": intensity must be 0..5, got " +
                             std::to_string(intensity));
        r.intensity = uint8_t(intensity);
        records.push_back(std::move(r));
    }
    return records;
}

void write_annotations_csv(std::ostream& out,
                           const std::vector<AnnotationRecord>& records) {
    out << "video_id,frame,au,intensity\n";
    for (const AnnotationRecord& r : records)
        out << r.video_id << "," << r.frame_index << "," << r.au << ","
            << int(r.intensity) << "\n";
}

static bool in_scope(const AnnotationRecord& r, const StatsScope& scope) {
    return !scope.video || r.video_id == *scope.video;
}

std::map<std::string, long> binary_counts(
    const std::vector<AnnotationRecord>& records, const StatsScope& scope) {
    std::map<std::string, long> counts;
    for (const AnnotationRecord& r : records) {
        if (!in_scope(r, scope)) continue;
        if (r.intensity > 0) ++counts[r.au];
    }
    return counts;
}

std::array<long, 6> intensity_histogram(
    const std::vector<AnnotationRecord>& records, const std::string& au,
    const StatsScope& scope) {
    std::array<long, 6> hist{};
    for (const AnnotationRecord& r : records)
        if (r.au == au && in_scope(r, scope)) ++hist[r.intensity];
    return hist;
}

std::array<long, 5> positive_histogram(const std::array<long, 6>& hist) {
    return {hist[1], hist[2], hist[3], hist[4], hist[5]};
}

StatsReport StatsReport::build(const std::vector<AnnotationRecord>& records,
                               const StatsScope& scope,
                               const std::vector<std::string>& au_filter) {
    StatsReport report;
    report.scope = scope;
    std::set<std::string> aus;
    for (const AnnotationRecord& r : records)
        if (in_scope(r, scope)) aus.insert(r.au);
    auto wanted = [&](const std::string& au) {
        return au_filter.empty() ||
               std::find(au_filter.begin(), au_filter.end(), au) != au_filter.end();
    };
    for (const std::string& au : aus) {
        if (!wanted(au)) continue;
        report.histograms[au] = intensity_histogram(records, au, scope);
        long set = 0;
        for (int k = 1; k <= 5; ++k) set += report.histograms[au][size_t(k)];
        report.binary[au] = set;
    }
    for (const std::string& au : au_filter)
        if (!aus.count(au)) report.missing.push_back(au);
    std::sort(report.missing.begin(), report.missing.end());
    return report;
}

std::string render_report(const StatsReport& report) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %10s %8s %8s %8s %8s %8s %8s\n",
                  "au", "set", "i0", "i1", "i2", "i3", "i4", "i5");
    out << buf;
    // merged view: present rows plus '-' rows for requested-but-absent units
    std::set<std::string> rows;
    for (const auto& [au, _] : report.binary) rows.insert(au);
    for (const std::string& au : report.missing) rows.insert(au);
    for (const std::string& au : rows) {
        if (report.binary.count(au)) {
            const auto& h = report.histograms.at(au);
            std::snprintf(buf, sizeof(buf),
                          "%-12s %10ld %8ld %8ld %8ld %8ld %8ld %8ld\n",
                          au.c_str(), report.binary.at(au), h[0], h[1], h[2],
                          h[3], h[4], h[5]);
        } else {
            std::snprintf(buf, sizeof(buf),
                          "%-12s %10s %8s %8s %8s %8s %8s %8s\n", au.c_str(),
                          "-", "-", "-", "-", "-", "-", "-");
        }
        out << buf;
    }
    return out.str();
}

std::string render_report_csv(const StatsReport& report) {
    std::ostringstream out;
    out << "au,set,i0,i1,i2,i3,i4,i5\n";
    std::set<std::string> rows;
    for (const auto& [au, _] : report.binary) rows.insert(au);
    for (const std::string& au : report.missing) rows.insert(au);
    for (const std::string& au : rows) {
        if (report.binary.count(au)) {
            const auto& h = report.histograms.at(au);
            out << au << "," << report.binary.at(au);
            for (long v : h) out << "," << v;
            out << "\n";
        } else {
            out << au << ",-,-,-,-,-,-,-\n";
        }
    }
    return out.str();
}

std::vector<AnnotationRecord> disfa_count_fixture() {
    constexpr size_t kVideos = 27;
    constexpr size_t kFramesPerVideo = 4844;
    constexpr size_t kTotal = kVideos * kFramesPerVideo;  // 130,788
    constexpr long kAu12Counts[6] = {99996, 13942, 6868, 7233, 2577, 172};
    constexpr size_t kFramesWithAnyAu = 82176;

    std::vector<uint8_t> au12;
    au12.reserve(kTotal);
    for (int level = 1; level <= 5; ++level)
        au12.insert(au12.end(), size_t(kAu12Counts[level]), uint8_t(level));
    au12.resize(kTotal, 0);

    Rng rng(20140811);  // fixed: the fixture must be byte-stable across runs
    rng.shuffle(au12);

    // pad the any-AU count with AU4 rows on frames where AU12 is unset
    size_t au12_set = 0;
    for (uint8_t v : au12)
        if (v > 0) ++au12_set;
    const size_t aux_needed = kFramesWithAnyAu - au12_set;  // 51,384
    std::vector<size_t> zero_frames;
    zero_frames.reserve(kTotal - au12_set);
    for (size_t i = 0; i < kTotal; ++i)
        if (au12[i] == 0) zero_frames.push_back(i);
    rng.shuffle(zero_frames);
    std::vector<uint8_t> au4(kTotal, 0);
    for (size_t k = 0; k < aux_needed; ++k)
        au4[zero_frames[k]] = uint8_t(1 + zero_frames[k] % 3);

    std::vector<AnnotationRecord> records;
    records.reserve(kTotal + aux_needed);
    for (size_t v = 0; v < kVideos; ++v) {
        char vid[8];
        std::snprintf(vid, sizeof(vid), "%03zu", v + 1);
        for (size_t f = 0; f < kFramesPerVideo; ++f) {
            const size_t i = v * kFramesPerVideo + f;
            records.push_back({vid, uint32_t(f), "AU12", au12[i]});
            if (au4[i] > 0)
                records.push_back({vid, uint32_t(f), "AU4", au4[i]});
        }
    }
    return records;
}

}  // namespace smilecnn
