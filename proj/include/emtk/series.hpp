#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace emtk {

// A contiguous run of bins taken from one daycasted day.  `day_index` is
// the local calendar day as days-since-epoch, so day_index % 7 gives a
// stable day-of-week.
struct DaySegment {
  std::size_t start = 0;
  std::size_t length = 0;
  std::int64_t day_index = 0;
};

// Binary activity sequence with calendar alignment.  Segments are hard
// boundaries: nothing is counted or predicted across a daycast gap.
struct BinarySeries {
  std::vector<std::uint8_t> values;
  int bin_width_seconds = 600;
  std::vector<DaySegment> segments;

  std::size_t size() const { return values.size(); }

  // Throws if segments are not disjoint, ordered, and an exact cover.
  void validate() const;

  static BinarySeries single_segment(std::vector<std::uint8_t> values,
                                     int bin_width_seconds = 600,
                                     std::int64_t day_index = 0);

  // Sub-series made of the selected segments, in order.
  BinarySeries select_segments(const std::vector<std::size_t>& segment_indices) const;
};

// Paired input (mentions) and output (activity) sequences.  Both sides
// share bin width and segmentation.
struct JointSeries {
  BinarySeries input;
  BinarySeries output;

  std::size_t size() const { return output.size(); }
  void validate() const;
  JointSeries select_segments(const std::vector<std::size_t>& segment_indices) const;
};

}  // namespace emtk
