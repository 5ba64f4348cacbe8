#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "emtk/parametric.hpp"
#include "emtk/pipeline.hpp"
#include "emtk/reconstruct.hpp"
#include "emtk/rng.hpp"

namespace emtk {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

// CSV field quoting for free-text fields (error messages).
std::string csv_quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& fold, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (std::find(fold.begin(), fold.end(), i) == fold.end()) out.push_back(i);
  return out;
}

}  // namespace

StreamReport process_stream(const std::string& stream_id, const JointSeries& series,
                            const PipelineConfig& cfg) {
  const auto [train, test] = split_train_test(series, cfg);
  const int bpd = cfg.bins_per_day();

  StreamReport report;
  report.stream_id = stream_id;

  CVConfig cv = cfg.cv;
  cv.seed = derive_seed(cfg.seed, stream_id + "/folds");
  ReconstructionConfig recon;
  recon.alpha = cfg.alpha;
  recon.min_count = cfg.min_count;

  // Seasonal baseline: same fold partition as the machine models so the
  // cross-validated ETVs are comparable.
  report.seasonal = fit_seasonal(train.output, bpd);
  EvaluationRecord seasonal_record;
  seasonal_record.stream_id = stream_id;
  seasonal_record.model = "seasonal";
  seasonal_record.unsync_policy = "";
  const auto folds = assign_folds(train.output.segments.size(), cv);
  for (const auto& fold : folds) {
    const BinarySeries rest =
        train.output.select_segments(complement(fold, train.output.segments.size()));
    const BinarySeries held = train.output.select_segments(fold);
    const SeasonalModel fold_model = fit_seasonal(rest, bpd);
    seasonal_record.fold_etv.push_back(etv(held, seasonal_predict_series(fold_model, held, bpd)));
  }
  seasonal_record.mean_etv = mean_of(seasonal_record.fold_etv);
  seasonal_record.test_etv =
      etv(test.output, seasonal_predict_series(report.seasonal, test.output, bpd));
  seasonal_record.score = 1.0;

  auto run_model = [&](const std::string& name, MachineKind mode) {
    ReconstructionConfig rc = recon;
    rc.mode = mode;
    EvaluationRecord record;
    record.stream_id = stream_id;
    record.model = name;
    if (mode == MachineKind::epsilon_machine) {
      CrossValidationResult res = cross_validate(train.output, cv, rc);
      record.chosen_l_max = res.chosen_l_max;
      record.fold_etv = res.fold_etv;
      record.mean_etv = res.mean_etv;
      record.test_etv = etv(test.output, filter_predict(res.final_machine, test.output));
      report.machines[name] = std::move(res.final_machine);
    } else {
      CrossValidationResult res = cross_validate(train, cv, rc);
      record.chosen_l_max = res.chosen_l_max;
      record.fold_etv = res.fold_etv;
      record.mean_etv = res.mean_etv;
      record.test_etv = etv(test.output, filter_predict(res.final_machine, test));
      report.machines[name] = std::move(res.final_machine);
    }
    return record;
  };

  std::vector<EvaluationRecord> models;
  models.push_back(run_model("machine", MachineKind::epsilon_machine));
  models.push_back(run_model("transducer_memoryless", MachineKind::transducer_memoryless));
  models.push_back(run_model("transducer_memoryful", MachineKind::transducer_memoryful));

  const ScoreTable table = score_models(seasonal_record, models);
  for (std::size_t i = 0; i < models.size(); ++i) models[i].score = table.scores[i + 1].second;
  report.pairwise = table.pairwise;

  report.records.push_back(std::move(seasonal_record));
  for (auto& record : models) report.records.push_back(std::move(record));

  for (const auto& [name, machine] : report.machines)
    report.architectures[name] = classify_any(machine);
  return report;
}

CorpusResult run_corpus(const EventLog& log, const PipelineConfig& cfg) {
  cfg.validate();
  CorpusResult result;

  const DaycastResult daycast = discretize_daycast(log, cfg);
  for (const auto& [id, reason] : daycast.dropped)
    result.errors.emplace_back(id, "discretize", reason);

  std::vector<std::pair<std::string, const JointSeries*>> work;
  for (const auto& [id, series] : daycast.streams) work.emplace_back(id, &series);

  std::vector<std::optional<StreamReport>> reports(work.size());
  std::vector<std::optional<std::string>> failures(work.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= work.size()) break;
      try {
        reports[i] = process_stream(work[i].first, *work[i].second, cfg);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(work.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < work.size(); ++i) {
    if (reports[i])
      result.streams.push_back(std::move(*reports[i]));
    else
      result.errors.emplace_back(work[i].first, "process", *failures[i]);
  }
  std::sort(result.errors.begin(), result.errors.end());
  result.exit_code = result.errors.empty() ? 0 : 2;
  return result;
}

namespace {

json config_to_json(const PipelineConfig& cfg) {
  json j;
  j["delta_seconds"] = cfg.delta_seconds;
  j["day_start_minutes"] = cfg.day_start_minutes;
  j["day_end_minutes"] = cfg.day_end_minutes;
  j["train_weeks"] = cfg.train_weeks;
  j["test_weeks"] = cfg.test_weeks;
  j["folds"] = cfg.cv.folds;
  j["l_max_min"] = cfg.cv.l_max_min;
  j["l_max_max"] = cfg.cv.l_max_max;
  j["alpha"] = cfg.alpha;
  j["min_count"] = cfg.min_count;
  j["quiescence_threshold"] = cfg.quiescence_threshold;
  j["seed"] = cfg.seed;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

void write_reports(const CorpusResult& result, const PipelineConfig& cfg,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "machines");
  fs::create_directories(fs::path(out_dir) / "profiles");

  std::string scores = "stream_id,model,chosen_l_max,mean_cv_etv,test_etv,score\n";
  std::string architectures =
      "stream_id,model,family,order,state_count,topological_complexity\n";
  for (const StreamReport& stream : result.streams) {
    for (const EvaluationRecord& r : stream.records) {
      scores += r.stream_id + "," + r.model + "," +
                (r.model == "seasonal" ? std::string() : std::to_string(r.chosen_l_max)) + "," +
                fmt(r.mean_etv) + "," + fmt(r.test_etv) + "," + fmt(r.score) + "\n";
    }
    for (const auto& [model, arch] : stream.architectures) {
      architectures += stream.stream_id + "," + model + "," + family_name(arch.family) + "," +
                       (arch.order ? std::to_string(*arch.order) : std::string()) + "," +
                       std::to_string(arch.state_count) + "," +
                       fmt(arch.topological_complexity) + "\n";
    }
  }
  write_file(fs::path(out_dir) / "scores.csv", scores);
  write_file(fs::path(out_dir) / "architectures.csv", architectures);

  // Pairwise win proportions aggregated across streams (seasonal scores 1).
  const std::vector<std::string> model_names = {"seasonal", "machine", "transducer_memoryless",
                                                "transducer_memoryful"};
  std::string pairwise = "model_a,model_b,wins,streams,proportion\n";
  for (const std::string& a : model_names) {
    for (const std::string& b : model_names) {
      if (a == b) continue;
      std::size_t wins = 0;
      for (const StreamReport& stream : result.streams) {
        double score_a = 0.0, score_b = 0.0;
        for (const EvaluationRecord& r : stream.records) {
          if (r.model == a) score_a = r.score;
          if (r.model == b) score_b = r.score;
        }
        if (score_a > score_b) ++wins;
      }
      const double prop = result.streams.empty()
                              ? 0.0
                              : static_cast<double>(wins) / static_cast<double>(result.streams.size());
      pairwise += a + "," + b + "," + std::to_string(wins) + "," +
                  std::to_string(result.streams.size()) + "," + fmt(prop) + "\n";
    }
  }
  write_file(fs::path(out_dir) / "pairwise.csv", pairwise);

  // Architecture counts per (model, family, order), Table-style summary.
  std::map<std::string, std::map<std::pair<std::string, std::string>, std::size_t>> summary;
  std::map<std::string, std::size_t> totals;
  for (const StreamReport& stream : result.streams) {
    for (const auto& [model, arch] : stream.architectures) {
      const std::string order = arch.order ? std::to_string(*arch.order) : std::string();
      ++summary[model][{family_name(arch.family), order}];
      ++totals[model];
    }
  }
  std::string arch_summary = "model,family,order,count,proportion\n";
  for (const auto& [model, rows] : summary) {
    for (const auto& [key, count] : rows) {
      arch_summary += model + "," + key.first + "," + key.second + "," + std::to_string(count) +
                      "," + fmt(static_cast<double>(count) / static_cast<double>(totals[model])) +
                      "\n";
    }
  }
  write_file(fs::path(out_dir) / "architecture_summary.csv", arch_summary);

  std::string errors = "stream_id,stage,message\n";
  for (const auto& [id, stage, message] : result.errors)
    errors += id + "," + stage + "," + csv_quote(message) + "\n";
  write_file(fs::path(out_dir) / "errors.csv", errors);

  for (const StreamReport& stream : result.streams) {
    for (const auto& [model, machine] : stream.machines)
      write_file(fs::path(out_dir) / "machines" / (stream.stream_id + "_" + model + ".json"),
                 machine_to_json(machine));
    std::string profile = "bin,probability\n";
    for (std::size_t b = 0; b < stream.seasonal.fitted_profile.size(); ++b)
      profile += std::to_string(b) + "," + fmt(stream.seasonal.fitted_profile[b]) + "\n";
    write_file(fs::path(out_dir) / "profiles" / (stream.stream_id + ".csv"), profile);
  }

  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["streams"] = result.streams.size();
  manifest["quarantined"] = result.errors.size();
  manifest["policies"]["missing_days"] =
      "calendar days without any event are treated as unobserved and omitted as segments";
  manifest["policies"]["synchronization"] = "longest-suffix";
  manifest["policies"]["unsynchronized_bins"] = "stationary-mixture";
  write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
}

namespace {

std::vector<double> head_from_json(const json& j, const char* key) {
  if (!j.contains(key)) throw std::runtime_error(std::string("generate: missing field ") + key);
  return j.at(key).get<std::vector<double>>();
}

std::vector<std::uint8_t> generate_output(const json& group, std::size_t nbins, int weeks,
                                          int bpd, std::uint64_t out_seed,
                                          const BinarySeries& input) {
  const std::string family = group.at("family").get<std::string>();
  if (family == "bernoulli")
    return simulate(bernoulli_machine(group.at("p").get<double>()), nbins, out_seed).values;
  if (family == "renewal" || family == "reverse_renewal") {
    RenewalFamily fam;
    fam.kind = family == "renewal" ? RenewalFamily::Kind::renewal
                                   : RenewalFamily::Kind::reverse_renewal;
    fam.head = head_from_json(group, "head");
    return simulate(family_to_machine(fam), nbins, out_seed).values;
  }
  if (family == "alternating") {
    AlternatingRenewalFamily fam;
    fam.quiescence.kind = RenewalFamily::Kind::renewal;
    fam.quiescence.head = head_from_json(group, "quiescence_head");
    fam.activity.kind = RenewalFamily::Kind::reverse_renewal;
    fam.activity.head = head_from_json(group, "activity_head");
    return simulate(family_to_machine(fam), nbins, out_seed).values;
  }
  if (family == "seasonal") {
    const double base = group.at("base_rate").get<double>();
    const double amplitude = group.value("amplitude", 0.5);
    std::vector<double> profile(static_cast<std::size_t>(7) * bpd);
    for (std::size_t b = 0; b < profile.size(); ++b) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(b) /
                           static_cast<double>(profile.size());
      profile[b] = std::clamp(base * (1.0 + amplitude * std::sin(phase)), 0.001, 0.999);
    }
    return seasonal_sampler(profile, weeks, out_seed, bpd).values;
  }
  if (family == "mention_gated") {
    const Machine m = mention_gated_transducer(group.at("quiet").get<double>(),
                                               group.at("active").get<double>(),
                                               group.at("mentioned").get<double>());
    return simulate(m, nbins, out_seed, &input).values;
  }
  throw std::runtime_error("generate: unknown family " + family);
}

}  // namespace

std::string generate_corpus_text(const std::string& spec_text, std::uint64_t seed,
                                 const PipelineConfig& cfg) {
  cfg.validate();
  const json spec = json::parse(spec_text);
  const int weeks = spec.value("weeks", 44);
  if (weeks <= 0) throw std::runtime_error("generate: weeks must be positive");
  const int bpd = cfg.bins_per_day();
  const std::size_t nbins = static_cast<std::size_t>(weeks) * 7 * bpd;

  std::string out = "stream_id,timestamp,kind,utc_offset_min\n";
  std::map<std::string, int> name_counter;
  for (const json& group : spec.at("streams")) {
    const std::string name = group.value("name", group.at("family").get<std::string>());
    const int count = group.value("count", 1);
    const double mention_rate = group.value("mention_rate", 0.1);
    for (int i = 0; i < count; ++i) {
      char suffix[8];
      std::snprintf(suffix, sizeof(suffix), "-%03d", name_counter[name]++);
      const std::string id = name + suffix;

      BinarySeries input =
          iid_series(mention_rate, nbins, derive_seed(seed, id + "/input"), cfg.delta_seconds);
      // Span anchors: the discretizer derives each stream's day range from
      // its events, so the first and last bins must contain one.
      input.values.front() = 1;
      input.values.back() = 1;
      const std::vector<std::uint8_t> output =
          generate_output(group, nbins, weeks, bpd, derive_seed(seed, id + "/output"), input);

      for (std::size_t t = 0; t < nbins; ++t) {
        if (!input.values[t] && !output[t]) continue;
        const std::int64_t day = static_cast<std::int64_t>(t) / bpd;
        const std::int64_t bin = static_cast<std::int64_t>(t) % bpd;
        const std::int64_t ts = day * 86400 + static_cast<std::int64_t>(cfg.day_start_minutes) * 60 +
                                bin * cfg.delta_seconds + cfg.delta_seconds / 2;
        if (input.values[t]) out += id + "," + std::to_string(ts) + ",mention,0\n";
        if (output[t]) out += id + "," + std::to_string(ts) + ",post,0\n";
      }
    }
  }
  return out;
}

void generate_corpus(const std::string& spec_text, std::uint64_t seed,
                     const std::string& out_path, const PipelineConfig& cfg) {
  write_file(out_path, generate_corpus_text(spec_text, seed, cfg));
}

}  // namespace emtk
