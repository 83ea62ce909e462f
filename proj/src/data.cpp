// SPDX-License-Identifier: Apache-2.0
#include "amd/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace amd {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    const char* b = cell.data();
    const char* e = b + cell.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t' || *(e - 1) == '\r')) --e;
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || ptr != e)
        throw DataError("csv: cannot parse cell '" + cell + "' at row " + std::to_string(row) +
                        ", column " + std::to_string(col));
    if (!std::isfinite(out))
        throw DataError("csv: non-finite value at row " + std::to_string(row) + ", column " +
                        std::to_string(col));
    return out;
}

}  // namespace

Series load_csv(const std::string& path, bool has_header, int date_column) {
    std::ifstream in(path);
    if (!in) throw DataError("csv: cannot open " + path);

    Series s;
    std::string line;
    std::size_t row = 0;
    std::size_t columns = 0;
    bool saw_header = false;
    std::vector<std::string> header;

    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (has_header && !saw_header) {
            saw_header = true;
            header = cells;
            columns = cells.size();
            continue;
        }
        if (columns == 0) columns = cells.size();
        if (cells.size() != columns)
            throw DataError("csv: ragged row " + std::to_string(row) + ": expected " +
                            std::to_string(columns) + " cells, got " +
                            std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (date_column >= 0 && c == static_cast<std::size_t>(date_column)) continue;
            s.values.push_back(parse_cell(cells[c], row, c));
        }
        ++s.num_steps;
    }
    if (columns == 0) throw DataError("csv: " + path + " is empty");
    std::size_t dropped = (date_column >= 0 && static_cast<std::size_t>(date_column) < columns) ? 1 : 0;
    if (date_column >= 0 && dropped == 0)
        throw DataError("csv: date column " + std::to_string(date_column) + " out of range");
    s.channels = columns - dropped;
    if (s.channels == 0) throw DataError("csv: no value columns in " + path);

    if (!header.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (date_column >= 0 && c == static_cast<std::size_t>(date_column)) continue;
            s.channel_names.push_back(header[c]);
        }
    } else {
        for (std::size_t c = 0; c < s.channels; ++c)
            s.channel_names.push_back("ch" + std::to_string(c));
    }
    return s;
}

void write_csv(const Series& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("csv: cannot write " + path);
    for (std::size_t c = 0; c < s.channels; ++c) {
        if (c) out << ",";
        out << (c < s.channel_names.size() ? s.channel_names[c] : "ch" + std::to_string(c));
    }
    out << "\n";
    char buf[64];
    for (std::size_t t = 0; t < s.num_steps; ++t) {
        for (std::size_t c = 0; c < s.channels; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", s.at(t, c));
            if (c) out << ",";
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw DataError("csv: write failed for " + path);
}

std::pair<Series, ChannelStats> standardize(const Series& s, std::size_t stats_lo,
                                            std::size_t stats_hi) {
    if (stats_hi <= stats_lo || stats_hi > s.num_steps)
        throw DataError("standardize: empty or invalid stats range");
    ChannelStats st;
    st.mean.assign(s.channels, 0.0);
    st.stddev.assign(s.channels, 0.0);
    double n = static_cast<double>(stats_hi - stats_lo);
    for (std::size_t t = stats_lo; t < stats_hi; ++t)
        for (std::size_t c = 0; c < s.channels; ++c) st.mean[c] += s.at(t, c);
    for (auto& m : st.mean) m /= n;
    for (std::size_t t = stats_lo; t < stats_hi; ++t)
        for (std::size_t c = 0; c < s.channels; ++c) {
            double d = s.at(t, c) - st.mean[c];
            st.stddev[c] += d * d;
        }
    for (auto& v : st.stddev) {
        v = std::sqrt(v / n);
        if (v <= 0.0) v = 1.0;  // constant channel
    }
    return {apply_standardize(s, st), st};
}

Series apply_standardize(const Series& s, const ChannelStats& stats) {
    if (stats.mean.size() != s.channels)
        throw DataError("standardize: stats cover " + std::to_string(stats.mean.size()) +
                        " channels, series has " + std::to_string(s.channels));
    Series out = s;
    for (std::size_t t = 0; t < s.num_steps; ++t)
        for (std::size_t c = 0; c < s.channels; ++c)
            out.at(t, c) = (s.at(t, c) - stats.mean[c]) / stats.stddev[c];
    return out;
}

Series destandardize(const Series& s, const ChannelStats& stats) {
    if (stats.mean.size() != s.channels)
        throw DataError("destandardize: channel count mismatch");
    Series out = s;
    for (std::size_t t = 0; t < s.num_steps; ++t)
        for (std::size_t c = 0; c < s.channels; ++c)
            out.at(t, c) = s.at(t, c) * stats.stddev[c] + stats.mean[c];
    return out;
}

SplitBounds resolve_split(const SplitSpec& spec, std::size_t total) {
    SplitBounds b;
    if (spec.mode == SplitSpec::Mode::Counts) {
        std::size_t sum = spec.train_count + spec.val_count + spec.test_count;
        if (sum > total)
            throw DataError("split: counts sum to " + std::to_string(sum) + " but series has " +
                            std::to_string(total) + " rows");
        b.train_end = spec.train_count;
        b.val_end = b.train_end + spec.val_count;
        b.test_end = b.val_end + spec.test_count;
    } else {
        if (spec.train_frac <= 0.0 || spec.val_frac < 0.0 || spec.test_frac < 0.0 ||
            spec.train_frac + spec.val_frac + spec.test_frac > 1.0 + 1e-9)
            throw DataError("split: fractions must be nonnegative and sum to at most 1");
        b.train_end = static_cast<std::size_t>(spec.train_frac * static_cast<double>(total));
        b.val_end = b.train_end + static_cast<std::size_t>(spec.val_frac * static_cast<double>(total));
        b.test_end = total;
    }
    return b;
}

WindowDataset::WindowDataset(const Series* source, std::size_t lookback, std::size_t horizon,
                             std::size_t stride, std::size_t segment_lo, std::size_t segment_hi)
    : source_(source), lookback_(lookback), horizon_(horizon), stride_(stride),
      segment_lo_(segment_lo) {
    if (stride == 0) throw DataError("windows: stride must be positive");
    if (segment_hi > source->num_steps || segment_lo > segment_hi)
        throw DataError("windows: segment out of range");
    std::size_t len = segment_hi - segment_lo;
    std::size_t need = lookback + horizon;
    if (len < need)
        throw DataError("windows: segment length " + std::to_string(len) +
                        " below minimum " + std::to_string(need) + " (lookback " +
                        std::to_string(lookback) + " + horizon " + std::to_string(horizon) + ")");
    count_ = (len - need) / stride + 1;
}

std::size_t WindowDataset::window_start(std::size_t i) const {
    if (i >= count_) throw DataError("windows: index out of range");
    return segment_lo_ + i * stride_;
}

void WindowDataset::materialize(std::size_t i, std::vector<double>& input,
                                std::vector<double>& target) const {
    std::size_t w = window_start(i);
    std::size_t c = source_->channels;
    input.resize(lookback_ * c);
    target.resize(horizon_ * c);
    const double* base = source_->values.data() + w * c;
    std::copy(base, base + lookback_ * c, input.begin());
    const double* tbase = base + lookback_ * c;
    std::copy(tbase, tbase + horizon_ * c, target.begin());
}

WindowDataset make_windows(const Series& s, std::size_t lookback, std::size_t horizon,
                           std::size_t stride, std::size_t segment_lo, std::size_t segment_hi) {
    return WindowDataset(&s, lookback, horizon, stride, segment_lo, segment_hi);
}

SplitDatasets split_windows(const Series& s, const SplitBounds& b, std::size_t lookback,
                            std::size_t horizon, std::size_t stride) {
    SplitDatasets out;
    out.train = make_windows(s, lookback, horizon, stride, 0, b.train_end);
    // Val/test segments borrow `lookback` rows of context from the left so
    // that their first target starts exactly at the partition boundary.
    if (b.val_end > b.train_end) {
        std::size_t lo = b.train_end >= lookback ? b.train_end - lookback : 0;
        out.val = make_windows(s, lookback, horizon, stride, lo, b.val_end);
    }
    if (b.test_end > b.val_end) {
        std::size_t lo = b.val_end >= lookback ? b.val_end - lookback : 0;
        out.test = make_windows(s, lookback, horizon, stride, lo, b.test_end);
    }
    return out;
}

Series gen_synthetic(const std::string& kind, std::size_t length, std::size_t channels,
                     std::size_t period, double amplitude, double trend_slope, double noise_sigma,
                     std::uint64_t seed) {
    if (period < 2) throw DataError("synthetic: period must be at least 2");
    if (noise_sigma < 0.0) throw DataError("synthetic: noise sigma must be nonnegative");
    if (channels == 0 || length == 0) throw DataError("synthetic: empty series requested");

    enum class Kind { Sine, SineTrend, MultiScale };
    Kind k;
    if (kind == "sine") {
        k = Kind::Sine;
    } else if (kind == "sine-plus-trend") {
        k = Kind::SineTrend;
    } else if (kind == "multi-scale-mix") {
        k = Kind::MultiScale;
    } else {
        throw DataError("synthetic: unknown kind '" + kind + "'");
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double two_pi = 6.283185307179586476925286766559;
    double p = static_cast<double>(period);

    Series s;
    s.num_steps = length;
    s.channels = channels;
    s.values.resize(length * channels);
    for (std::size_t c = 0; c < channels; ++c)
        s.channel_names.push_back("ch" + std::to_string(c));

    for (std::size_t t = 0; t < length; ++t) {
        double ft = static_cast<double>(t);
        for (std::size_t c = 0; c < channels; ++c) {
            double base;
            switch (k) {
                case Kind::Sine:
                    base = amplitude * std::sin(two_pi * ft / p);
                    break;
                case Kind::SineTrend:
                    base = amplitude * std::sin(two_pi * ft / p) + trend_slope * ft;
                    break;
                case Kind::MultiScale: {
                    // Fine scale at `period`, coarse at 4x, with dominance
                    // drifting over an 8x cycle; channels are phase-shifted.
                    double phase = two_pi * static_cast<double>(c) /
                                   (3.0 * static_cast<double>(channels));
                    double w = 0.5 * (1.0 + std::sin(two_pi * ft / (8.0 * p)));
                    double fine = std::sin(two_pi * ft / p + phase);
                    double coarse = std::sin(two_pi * ft / (4.0 * p) + phase);
                    base = amplitude * (w * fine + (1.0 - w) * coarse) + trend_slope * ft;
                    break;
                }
            }
            double eps = noise_sigma > 0.0 ? noise_sigma * noise(rng) : 0.0;
            s.at(t, c) = base + eps;
        }
    }
    return s;
}

}  // namespace amd
