#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "emtk/classify.hpp"
#include "emtk/evaluate.hpp"
#include "emtk/seasonal.hpp"
#include "emtk/series.hpp"

namespace emtk {

struct EventRecord {
  std::string stream_id;
  std::int64_t timestamp = 0;  // epoch seconds, UTC
  std::string kind;            // "post" or "mention"
  int utc_offset_min = 0;      // fixed offset per stream, no DST
};

struct IngestReject {
  std::size_t line = 0;  // 1-based line number in the source file
  std::string reason;
};

struct EventLog {
  std::vector<EventRecord> records;  // sorted by (stream_id, timestamp)
  std::vector<IngestReject> rejects;
};

struct PipelineConfig {
  int delta_seconds = 600;
  int day_start_minutes = 9 * 60;   // local clock, inclusive
  int day_end_minutes = 22 * 60;    // local clock, exclusive
  int train_weeks = 28;
  int test_weeks = 16;
  CVConfig cv;                      // folds, l_max range; seed derived per stream
  double alpha = 0.001;
  std::uint64_t min_count = 5;
  int quiescence_threshold = 50;    // minimum active training bins
  std::uint64_t seed = 0;
  int jobs = 1;

  int bins_per_day() const;
  void validate() const;
};

// CSV ingestion with header stream_id,timestamp,kind,utc_offset_min.
// Malformed rows land in rejects with their line numbers; a missing header
// or more than 1% malformed rows is a hard error.
EventLog ingest(const std::string& path);
EventLog ingest_text(const std::string& text);

struct DaycastResult {
  std::map<std::string, JointSeries> streams;
  std::vector<std::pair<std::string, std::string>> dropped;  // (stream, reason)
};

// Bins each stream's events into half-open delta-second bins, keeps only
// bins fully inside the local day window, and materializes one segment
// per calendar day of the stream's span.  Days with no events at all are
// treated as unobserved and omitted.  Streams spanning less than one full
// day or with fewer than quiescence_threshold active training bins are
// dropped with a reason.
DaycastResult discretize_daycast(const EventLog& log, const PipelineConfig& cfg);

// Chronological split at the week boundary: the first train_weeks weeks
// of the stream's span, then the next test_weeks weeks.
std::pair<JointSeries, JointSeries> split_train_test(const JointSeries& series,
                                                     const PipelineConfig& cfg);

struct StreamReport {
  std::string stream_id;
  std::vector<EvaluationRecord> records;  // seasonal first, then machine models
  std::vector<std::tuple<std::string, std::string, bool>> pairwise;
  std::map<std::string, ArchitectureReport> architectures;  // model -> report
  std::map<std::string, Machine> machines;
  SeasonalModel seasonal;
};

struct CorpusResult {
  std::vector<StreamReport> streams;  // sorted by stream_id
  // (stream_id, stage, message) for quarantined or dropped streams.
  std::vector<std::tuple<std::string, std::string, std::string>> errors;
  int exit_code = 0;  // 0 clean, 2 completed with quarantined streams
};

// Fits seasonal, epsilon-machine, and both transducer models per stream,
// cross-validates l_max, scores on the test split, and classifies the
// fitted machines.  Per-stream failures are quarantined.
CorpusResult run_corpus(const EventLog& log, const PipelineConfig& cfg);

StreamReport process_stream(const std::string& stream_id, const JointSeries& series,
                            const PipelineConfig& cfg);

// Writes scores.csv, pairwise.csv, architectures.csv,
// architecture_summary.csv, errors.csv, machines/*.json, profiles/*.csv,
// and manifest.json under out_dir.  Deterministic byte-for-byte given the
// same inputs and config.
void write_reports(const CorpusResult& result, const PipelineConfig& cfg,
                   const std::string& out_dir);

// Synthetic corpus emitter.  The JSON spec lists stream groups:
//   {"weeks": 44, "streams": [{"family": "...", "count": n, ...}]}
// Families: bernoulli (p), renewal/reverse_renewal (head), alternating
// (activity_head, quiescence_head), seasonal (base_rate, amplitude),
// mention_gated (quiet, active, mentioned).  Every stream also carries an
// i.i.d. mention channel (mention_rate, default 0.1) whose first and last
// bins are forced active so the discretizer recovers the full span.
// Events are placed at bin centers with UTC offset 0.
void generate_corpus(const std::string& spec_text, std::uint64_t seed,
                     const std::string& out_path, const PipelineConfig& cfg);

std::string generate_corpus_text(const std::string& spec_text, std::uint64_t seed,
                                 const PipelineConfig& cfg);

}  // namespace emtk
