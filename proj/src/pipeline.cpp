#include "emtk/pipeline.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace emtk {

int PipelineConfig::bins_per_day() const {
  return (day_end_minutes - day_start_minutes) * 60 / delta_seconds;
}

void PipelineConfig::validate() const {
  if (delta_seconds <= 0) throw std::runtime_error("pipeline config: delta must be positive");
  if (day_start_minutes < 0 || day_end_minutes > 24 * 60 || day_end_minutes <= day_start_minutes)
    throw std::runtime_error("pipeline config: invalid day window");
  if ((day_end_minutes - day_start_minutes) * 60 % delta_seconds != 0)
    throw std::runtime_error("pipeline config: day window length must be divisible by delta");
  if (train_weeks <= 0 || test_weeks <= 0)
    throw std::runtime_error("pipeline config: train and test weeks must be positive");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::runtime_error("pipeline config: alpha must lie in (0, 1)");
  if (quiescence_threshold < 0)
    throw std::runtime_error("pipeline config: quiescence threshold must be nonnegative");
  if (jobs < 1) throw std::runtime_error("pipeline config: jobs must be positive");
  cv.validate();
}

namespace {

bool parse_int64(const std::string& text, std::int64_t& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if (a % b != 0 && (a < 0) != (b < 0)) --q;
  return q;
}

}  // namespace

EventLog ingest_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("ingest: empty file, expected header stream_id,timestamp,kind,utc_offset_min");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "stream_id,timestamp,kind,utc_offset_min")
    throw std::runtime_error("ingest: missing or wrong header, expected stream_id,timestamp,kind,utc_offset_min");

  EventLog log;
  std::map<std::string, int> stream_offset;
  std::size_t line_no = 1;
  std::size_t data_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++data_rows;

    const std::vector<std::string> fields = split_csv_line(line);
    auto reject = [&](const std::string& reason) { log.rejects.push_back({line_no, reason}); };
    if (fields.size() != 4) {
      reject("expected 4 fields, got " + std::to_string(fields.size()));
      continue;
    }
    EventRecord rec;
    rec.stream_id = fields[0];
    if (rec.stream_id.empty()) {
      reject("empty stream_id");
      continue;
    }
    std::int64_t ts = 0;
    if (!parse_int64(fields[1], ts) || ts < 0) {
      reject("timestamp must be a nonnegative integer");
      continue;
    }
    rec.timestamp = ts;
    rec.kind = fields[2];
    if (rec.kind != "post" && rec.kind != "mention") {
      reject("kind must be post or mention");
      continue;
    }
    std::int64_t offset = 0;
    if (!parse_int64(fields[3], offset) || offset < -24 * 60 || offset > 24 * 60) {
      reject("utc_offset_min must be an integer within a day");
      continue;
    }
    rec.utc_offset_min = static_cast<int>(offset);
    auto [it, inserted] = stream_offset.emplace(rec.stream_id, rec.utc_offset_min);
    if (!inserted && it->second != rec.utc_offset_min) {
      reject("utc_offset_min differs from earlier rows of the same stream");
      continue;
    }
    log.records.push_back(std::move(rec));
  }

  if (data_rows > 0 && log.rejects.size() * 100 > data_rows)
    throw std::runtime_error("ingest: more than 1% malformed rows (" +
                             std::to_string(log.rejects.size()) + " of " +
                             std::to_string(data_rows) + ")");

  std::stable_sort(log.records.begin(), log.records.end(),
                   [](const EventRecord& a, const EventRecord& b) {
                     return std::tie(a.stream_id, a.timestamp) < std::tie(b.stream_id, b.timestamp);
                   });
  return log;
}

EventLog ingest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("ingest: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ingest_text(buffer.str());
}

DaycastResult discretize_daycast(const EventLog& log, const PipelineConfig& cfg) {
  cfg.validate();
  const int bpd = cfg.bins_per_day();
  const std::int64_t window_start = static_cast<std::int64_t>(cfg.day_start_minutes) * 60;
  const std::int64_t window_end = static_cast<std::int64_t>(cfg.day_end_minutes) * 60;

  // day -> bin -> (mention bit, post bit); keyed per stream.
  struct StreamBins {
    std::map<std::int64_t, std::vector<std::array<std::uint8_t, 2>>> days;
    std::int64_t min_day = 0;
    std::int64_t max_day = 0;
    bool any = false;
  };
  std::map<std::string, StreamBins> per_stream;

  for (const EventRecord& rec : log.records) {
    StreamBins& sb = per_stream[rec.stream_id];
    const std::int64_t local = rec.timestamp + static_cast<std::int64_t>(rec.utc_offset_min) * 60;
    const std::int64_t day = floor_div(local, 86400);
    if (!sb.any) {
      sb.min_day = sb.max_day = day;
      sb.any = true;
    } else {
      sb.min_day = std::min(sb.min_day, day);
      sb.max_day = std::max(sb.max_day, day);
    }
    const std::int64_t sec = local - day * 86400;
    auto [it, inserted] = sb.days.try_emplace(day);
    if (inserted) it->second.assign(bpd, {0, 0});
    if (sec < window_start || sec >= window_end) continue;
    const int bin = static_cast<int>((sec - window_start) / cfg.delta_seconds);
    it->second[bin][rec.kind == "post" ? 1 : 0] = 1;
  }

  DaycastResult result;
  for (auto& [id, sb] : per_stream) {
    if (sb.max_day == sb.min_day) {
      result.dropped.emplace_back(id, "span shorter than one full day");
      continue;
    }
    JointSeries series;
    series.input.bin_width_seconds = cfg.delta_seconds;
    series.output.bin_width_seconds = cfg.delta_seconds;
    const std::int64_t train_cutoff = sb.min_day + static_cast<std::int64_t>(cfg.train_weeks) * 7;
    int active_train = 0;
    for (auto& [day, bins] : sb.days) {
      const std::size_t start = series.output.values.size();
      for (const auto& bin : bins) {
        series.input.values.push_back(bin[0]);
        series.output.values.push_back(bin[1]);
        if (bin[1] && day < train_cutoff) ++active_train;
      }
      series.input.segments.push_back({start, static_cast<std::size_t>(bpd), day});
      series.output.segments.push_back({start, static_cast<std::size_t>(bpd), day});
    }
    if (active_train < cfg.quiescence_threshold) {
      result.dropped.emplace_back(id, "quiescent: " + std::to_string(active_train) +
                                          " active training bins, need " +
                                          std::to_string(cfg.quiescence_threshold));
      continue;
    }
    series.validate();
    result.streams.emplace(id, std::move(series));
  }
  return result;
}

std::pair<JointSeries, JointSeries> split_train_test(const JointSeries& series,
                                                     const PipelineConfig& cfg) {
  series.validate();
  if (series.output.segments.empty()) throw std::runtime_error("split_train_test: empty series");
  const std::int64_t first = series.output.segments.front().day_index;
  const std::int64_t last = series.output.segments.back().day_index;
  const std::int64_t available_weeks = (last - first + 1) / 7;
  const std::int64_t needed = cfg.train_weeks + cfg.test_weeks;
  if (available_weeks < needed)
    throw std::runtime_error("insufficient span: " + std::to_string(available_weeks) + " < " +
                             std::to_string(needed));

  const std::int64_t train_end = first + static_cast<std::int64_t>(cfg.train_weeks) * 7;
  const std::int64_t test_end = train_end + static_cast<std::int64_t>(cfg.test_weeks) * 7;
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < series.output.segments.size(); ++i) {
    const std::int64_t day = series.output.segments[i].day_index;
    if (day < train_end)
      train_idx.push_back(i);
    else if (day < test_end)
      test_idx.push_back(i);
  }
  return {series.select_segments(train_idx), series.select_segments(test_idx)};
}

}  // namespace emtk
