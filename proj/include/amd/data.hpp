// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amd/errors.hpp"

namespace amd {

// Multichannel series, row-major (num_timesteps x channels). Values are
// guaranteed finite after ingestion; missing data is a hard error.
struct Series {
    std::vector<double> values;
    std::size_t num_steps = 0;
    std::size_t channels = 0;
    std::vector<std::string> channel_names;

    double at(std::size_t t, std::size_t c) const { return values[t * channels + c]; }
    double& at(std::size_t t, std::size_t c) { return values[t * channels + c]; }
};

// CSV: comma-separated, UTF-8, optional single header row, optional leading
// date column (content ignored). date_column < 0 means "no date column".
Series load_csv(const std::string& path, bool has_header, int date_column);
void write_csv(const Series& s, const std::string& path);

struct ChannelStats {
    std::vector<double> mean, stddev;  // per channel
};

// Z-scores every channel using statistics over rows [stats_lo, stats_hi) —
// the train partition. Channels with zero spread keep stddev 1.
std::pair<Series, ChannelStats> standardize(const Series& s, std::size_t stats_lo,
                                            std::size_t stats_hi);
Series apply_standardize(const Series& s, const ChannelStats& stats);
Series destandardize(const Series& s, const ChannelStats& stats);

struct SplitSpec {
    enum class Mode { Ratio, Counts };
    Mode mode = Mode::Ratio;
    double train_frac = 0.7, val_frac = 0.1, test_frac = 0.2;
    std::size_t train_count = 0, val_count = 0, test_count = 0;
};

struct SplitBounds {
    std::size_t train_end = 0;  // [0, train_end)
    std::size_t val_end = 0;    // [train_end, val_end)
    std::size_t test_end = 0;   // [val_end, test_end)
};

// Chronological, disjoint partitions. Fixed counts may leave a tail of the
// series unused (benchmark CSVs ship more rows than the canonical splits);
// counts that exceed the series length are an error.
SplitBounds resolve_split(const SplitSpec& spec, std::size_t total);

// Sliding (input L x C, target T x C) pairs over a contiguous segment of a
// series. Window i starts at segment_lo + i*stride; the target follows the
// input immediately.
class WindowDataset {
public:
    WindowDataset() = default;
    WindowDataset(const Series* source, std::size_t lookback, std::size_t horizon,
                  std::size_t stride, std::size_t segment_lo, std::size_t segment_hi);

    std::size_t size() const { return count_; }
    std::size_t lookback() const { return lookback_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t channels() const { return source_ ? source_->channels : 0; }
    std::size_t window_start(std::size_t i) const;

    // Row-major copies: input (L x C) and target (T x C).
    void materialize(std::size_t i, std::vector<double>& input, std::vector<double>& target) const;

private:
    const Series* source_ = nullptr;
    std::size_t lookback_ = 0, horizon_ = 0, stride_ = 1;
    std::size_t segment_lo_ = 0;
    std::size_t count_ = 0;
};

WindowDataset make_windows(const Series& s, std::size_t lookback, std::size_t horizon,
                           std::size_t stride, std::size_t segment_lo, std::size_t segment_hi);

struct SplitDatasets {
    WindowDataset train, val, test;
};

// Train windows live strictly inside the train partition. Validation and
// test windows may reach back into the preceding partition for look-back
// context, but their targets stay inside their own partition.
SplitDatasets split_windows(const Series& s, const SplitBounds& b, std::size_t lookback,
                            std::size_t horizon, std::size_t stride);

// Deterministic synthetic generators. "sine" is amplitude*sin(2*pi*t/period);
// "sine-plus-trend" adds slope*t; "multi-scale-mix" blends a fine and a
// coarse periodicity whose dominance alternates slowly, so windows differ in
// which scale drives them.
Series gen_synthetic(const std::string& kind, std::size_t length, std::size_t channels,
                     std::size_t period, double amplitude, double trend_slope, double noise_sigma,
                     std::uint64_t seed);

}  // namespace amd
