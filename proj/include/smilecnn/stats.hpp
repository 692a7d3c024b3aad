#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smilecnn/errors.hpp"

namespace smilecnn {

/// One (video, frame, action unit, intensity) annotation row.
struct AnnotationRecord {
    std::string video_id;
    uint32_t frame_index = 0;
    std::string au;
    uint8_t intensity = 0;  // 0..5

    bool operator==(const AnnotationRecord&) const = default;
};

/// Restricts counting to one video; empty means all videos.
struct StatsScope {
    std::optional<std::string> video;
};

/// Reads `video_id,frame,au,intensity` rows. Throws ParseError with the
/// 1-based line number on any malformed row.
std::vector<AnnotationRecord> parse_annotations(std::istream& in);

void write_annotations_csv(std::ostream& out,
                           const std::vector<AnnotationRecord>& records);

/// Frames with intensity > 0, per action unit.
std::map<std::string, long> binary_counts(
    const std::vector<AnnotationRecord>& records, const StatsScope& scope);

/// Exact counts per intensity level 0..5 for one action unit.
std::array<long, 6> intensity_histogram(
    const std::vector<AnnotationRecord>& records, const std::string& au,
    const StatsScope& scope);

/// Bins 1..5 of a histogram (the set-frames-only view).
std::array<long, 5> positive_histogram(const std::array<long, 6>& hist);

struct StatsReport {
    StatsScope scope;
    std::map<std::string, long> binary;
    std::map<std::string, std::array<long, 6>> histograms;
    // action units requested but absent from the records; rendered as "-"
    std::vector<std::string> missing;

    static StatsReport build(const std::vector<AnnotationRecord>& records,
                             const StatsScope& scope,
                             const std::vector<std::string>& au_filter = {});
};

/// Fixed-width text table, one row per action unit, sorted lexicographically.
/// Byte-identical output for identical input.
std::string render_report(const StatsReport& report);
std::string render_report_csv(const StatsReport& report);

/// Annotation fixture mirroring the aggregate counts of the DISFA database
/// (whose imagery is licensed and cannot ship): 27 videos x 4,844 frames, an
/// AU12 row for every frame with intensity counts
/// {0:99996, 1:13942, 2:6868, 3:7233, 4:2577, 5:172}, plus AU4 rows placed so
/// that exactly 82,176 frames have some unit set. Fully deterministic.
std::vector<AnnotationRecord> disfa_count_fixture();

}  // namespace smilecnn
