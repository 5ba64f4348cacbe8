#include "emtk/series.hpp"

#include <stdexcept>

namespace emtk {

void BinarySeries::validate() const {
  if (bin_width_seconds <= 0) throw std::runtime_error("series: bin_width_seconds must be positive");
  std::size_t expect = 0;
  for (const auto& seg : segments) {
    if (seg.start != expect)
      throw std::runtime_error("series: segments must be ordered, disjoint, and cover the sequence");
    if (seg.length == 0) throw std::runtime_error("series: empty segment");
    expect = seg.start + seg.length;
  }
  if (expect != values.size())
    throw std::runtime_error("series: segments must cover the sequence exactly");
  for (std::uint8_t v : values)
    if (v > 1) throw std::runtime_error("series: values must be binary");
}

BinarySeries BinarySeries::single_segment(std::vector<std::uint8_t> values,
                                          int bin_width_seconds,
                                          std::int64_t day_index) {
  BinarySeries s;
  s.bin_width_seconds = bin_width_seconds;
  s.segments.push_back({0, values.size(), day_index});
  s.values = std::move(values);
  return s;
}

BinarySeries BinarySeries::select_segments(const std::vector<std::size_t>& segment_indices) const {
  BinarySeries out;
  out.bin_width_seconds = bin_width_seconds;
  std::size_t pos = 0;
  for (std::size_t i : segment_indices) {
    const DaySegment& seg = segments.at(i);
    out.values.insert(out.values.end(), values.begin() + seg.start,
                      values.begin() + seg.start + seg.length);
    out.segments.push_back({pos, seg.length, seg.day_index});
    pos += seg.length;
  }
  return out;
}

void JointSeries::validate() const {
  input.validate();
  output.validate();
  if (input.bin_width_seconds != output.bin_width_seconds)
    throw std::runtime_error("joint series: input/output bin widths differ");
  if (input.segments.size() != output.segments.size())
    throw std::runtime_error("joint series: input/output segmentations differ");
  for (std::size_t i = 0; i < input.segments.size(); ++i) {
    const auto& a = input.segments[i];
    const auto& b = output.segments[i];
    if (a.start != b.start || a.length != b.length || a.day_index != b.day_index)
      throw std::runtime_error("joint series: input/output segmentations differ");
  }
}

JointSeries JointSeries::select_segments(const std::vector<std::size_t>& segment_indices) const {
  return {input.select_segments(segment_indices), output.select_segments(segment_indices)};
}

}  // namespace emtk
