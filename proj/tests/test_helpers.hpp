#pragma once

#include <string>
#include <vector>

#include "emtk/machine.hpp"
#include "emtk/rng.hpp"
#include "emtk/series.hpp"

namespace emtk::testing {

// Random fully-connected unifilar epsilon-machine with every transition
// defined (emissions kept away from 0 and 1 so all edges are live).
inline Machine random_unifilar_machine(SplitMix64& rng, int max_states = 10) {
  Machine m;
  const int n = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_states)));
  m.states.resize(n);
  m.transitions.assign(n, std::vector<int>(2, -1));
  for (int s = 0; s < n; ++s) {
    const double p = 0.05 + 0.9 * rng.next_double();
    m.states[s].emission = {1.0 - p, p};
    m.transitions[s][0] = static_cast<int>(rng.next_below(n));
    m.transitions[s][1] = static_cast<int>(rng.next_below(n));
  }
  validate_machine(m);
  return m;
}

// Splits a single-segment value vector into consecutive day segments of
// the given length, discarding the remainder.
inline BinarySeries segmented(const std::vector<std::uint8_t>& values, std::size_t day_length,
                              int bin_width_seconds = 600) {
  BinarySeries out;
  out.bin_width_seconds = bin_width_seconds;
  const std::size_t n_days = values.size() / day_length;
  out.values.assign(values.begin(), values.begin() + n_days * day_length);
  for (std::size_t d = 0; d < n_days; ++d)
    out.segments.push_back({d * day_length, day_length, static_cast<std::int64_t>(d)});
  out.validate();
  return out;
}

}  // namespace emtk::testing
