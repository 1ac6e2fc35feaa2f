#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "driftwatch/dates.hpp"
#include "driftwatch/record.hpp"

namespace driftwatch {

/// One UTC calendar day of records, in timestamp order.
struct TemporalBin {
    std::int64_t day = 0; ///< days since the Unix epoch
    std::vector<PredictionRecord> records;

    std::string label() const { return format_day(day); }
    std::size_t size() const { return records.size(); }
};

/// Window layout around a known or suspected event.
struct EventConfig {
    std::string name = "event";
    std::int64_t event_start = 0; ///< first event day (inclusive)
    std::int64_t event_end = 0;   ///< last event day (inclusive)
    int pre_days = 14;            ///< nominal baseline span before event_start
    int post_days = 14;           ///< nominal recovery span after event_end
};

/// Day bins split into baseline / during / recovery windows.
struct EventWindows {
    EventConfig config;
    std::vector<TemporalBin> pre;
    std::vector<TemporalBin> during;
    std::vector<TemporalBin> post;
    bool pre_truncated = false;  ///< data starts after the nominal window opens
    bool post_truncated = false; ///< data ends before the nominal window closes
};

/// Groups records by UTC day. Bins are returned in day order and only
/// for days that actually contain records (gaps stay gaps).
inline std::vector<TemporalBin> assign_bins(const Dataset& dataset) {
    std::map<std::int64_t, TemporalBin> by_day;
    for (const auto& r : dataset.records()) {
        const auto day = day_of_timestamp(r.timestamp);
        auto& bin = by_day[day];
        bin.day = day;
        bin.records.push_back(r);
    }
    std::vector<TemporalBin> bins;
    bins.reserve(by_day.size());
    for (auto& [day, bin] : by_day) bins.push_back(std::move(bin));
    return bins;
}

/// Splits day bins around an event. The during window is the inclusive
/// day span [event_start, event_end]; baseline is the pre_days days
/// before it; recovery is the post_days days after it. Days outside all
/// three windows are dropped. Throws if the during window or the
/// baseline window ends up empty — there is nothing to compare then.
inline EventWindows window_partition(const std::vector<TemporalBin>& bins,
                                     const EventConfig& config) {
    if (config.event_end < config.event_start) {
        fail_config("event '" + config.name + "': event_end before event_start");
    }
    if (config.pre_days < 1) fail_config("event '" + config.name + "': pre_days must be >= 1");
    if (config.post_days < 0) fail_config("event '" + config.name + "': post_days must be >= 0");

    const std::int64_t pre_open = config.event_start - config.pre_days;
    const std::int64_t post_close = config.event_end + config.post_days;

    EventWindows windows;
    windows.config = config;
    for (const auto& bin : bins) {
        if (bin.day < pre_open || bin.day > post_close) continue;
        if (bin.day < config.event_start) windows.pre.push_back(bin);
        else if (bin.day <= config.event_end) windows.during.push_back(bin);
        else windows.post.push_back(bin);
    }
    if (windows.during.empty()) fail("event '" + config.name + "': no during-event data");
    if (windows.pre.empty()) fail("event '" + config.name + "': no baseline data");
    windows.pre_truncated = windows.pre.front().day > pre_open;
    windows.post_truncated =
        config.post_days > 0 && (windows.post.empty() || windows.post.back().day < post_close);
    return windows;
}

} // namespace driftwatch
