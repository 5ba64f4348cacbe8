#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "emtk/machine.hpp"
#include "emtk/series.hpp"

namespace emtk {

// Discrete interevent family with an arbitrary head and a geometric tail:
// pmf(n) = head[n] for n <= n_tilde, head[n_tilde] * lambda^(n - n_tilde)
// beyond.  kind selects which run type the distribution governs: a renewal
// family distributes quiescence gaps (runs of 0s between 1s); a reverse
// family distributes activity gaps (runs of 1s between 0s).
struct RenewalFamily {
  enum class Kind { renewal, reverse_renewal };

  Kind kind = Kind::renewal;
  std::vector<double> head;  // p(0 .. n_tilde)

  int n_tilde() const { return static_cast<int>(head.size()) - 1; }
  double lambda_tail() const;
  void validate() const;
};

// Quiescence and activity run-length distributions, both free to deviate
// from geometric.  Head index m corresponds to a run of length m + 1
// (runs in an alternating process are at least one bin long).
struct AlternatingRenewalFamily {
  RenewalFamily quiescence;  // kind renewal
  RenewalFamily activity;    // kind reverse_renewal
  void validate() const;
};

double interevent_pmf(const RenewalFamily& fam, int n);

// Chain-form epsilon-machines: a renewal family yields an (n_tilde + 1)-state
// counting chain with a unique reset state entered on 1; the reverse family
// swaps the symbol roles; the alternating family yields two coupled chains.
// Transition probabilities are the hazard rates implied by the pmf.
Machine family_to_machine(const RenewalFamily& fam);
Machine family_to_machine(const AlternatingRenewalFamily& fam);

Machine bernoulli_machine(double p_one);

// Three-state memoryful transducer gating activity on recent mentions:
// quiet_rate while unmentioned and inactive, active_rate while unmentioned
// after recent activity, mentioned_rate after a recent mention.
Machine mention_gated_transducer(double quiet_rate, double active_rate, double mentioned_rate);

// Simulates `steps` symbols from a machine; the start state is drawn from
// the stationary distribution.  Transducer kinds require an input series at
// least `steps` long.  Deterministic given (machine, steps, seed, input).
BinarySeries simulate(const Machine& m, std::size_t steps, std::uint64_t seed,
                      const BinarySeries* input = nullptr);

// Independent Bernoulli draws with a periodic probability profile.
BinarySeries seasonal_sampler(std::span<const double> weekly_profile, int weeks,
                              std::uint64_t seed, int bins_per_day = 78,
                              int bin_width_seconds = 600);

BinarySeries iid_series(double p_one, std::size_t steps, std::uint64_t seed,
                        int bin_width_seconds = 600);

}  // namespace emtk
