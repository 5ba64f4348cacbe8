#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "emtk/classify.hpp"
#include "emtk/evaluate.hpp"
#include "emtk/machine.hpp"
#include "emtk/pipeline.hpp"
#include "emtk/reconstruct.hpp"
#include "emtk/rng.hpp"

namespace {

using emtk::PipelineConfig;

void add_config_options(CLI::App* cmd, PipelineConfig& cfg) {
  cmd->add_option("--delta-seconds", cfg.delta_seconds, "Bin width in seconds")
      ->envname("EMTK_DELTA_SECONDS");
  cmd->add_option("--day-start-minutes", cfg.day_start_minutes,
                  "Local day window start, minutes after midnight")
      ->envname("EMTK_DAY_START_MINUTES");
  cmd->add_option("--day-end-minutes", cfg.day_end_minutes,
                  "Local day window end, minutes after midnight (exclusive)")
      ->envname("EMTK_DAY_END_MINUTES");
  cmd->add_option("--train-weeks", cfg.train_weeks, "Training span in weeks")
      ->envname("EMTK_TRAIN_WEEKS");
  cmd->add_option("--test-weeks", cfg.test_weeks, "Test span in weeks")
      ->envname("EMTK_TEST_WEEKS");
  cmd->add_option("--folds", cfg.cv.folds, "Cross-validation folds")->envname("EMTK_FOLDS");
  cmd->add_option("--l-max-min", cfg.cv.l_max_min, "Smallest history length tried")
      ->envname("EMTK_L_MAX_MIN");
  cmd->add_option("--l-max-max", cfg.cv.l_max_max, "Largest history length tried")
      ->envname("EMTK_L_MAX_MAX");
  cmd->add_option("--alpha", cfg.alpha, "Significance level of the reconstruction G-tests")
      ->envname("EMTK_ALPHA");
  cmd->add_option("--min-count", cfg.min_count,
                  "Histories rarer than this stay with their parent state untested")
      ->envname("EMTK_MIN_COUNT");
  cmd->add_option("--quiescence-threshold", cfg.quiescence_threshold,
                  "Minimum active training bins per retained stream")
      ->envname("EMTK_QUIESCENCE_THRESHOLD");
  cmd->add_option("--seed", cfg.seed, "Base random seed")->envname("EMTK_SEED");
  cmd->add_option("--jobs", cfg.jobs, "Worker threads for per-stream work")
      ->envname("EMTK_JOBS");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

nlohmann::json report_to_json(const emtk::ArchitectureReport& report) {
  nlohmann::json j;
  j["family"] = emtk::family_name(report.family);
  if (report.order)
    j["order"] = *report.order;
  else
    j["order"] = nullptr;
  j["state_count"] = report.state_count;
  j["topological_complexity"] = report.topological_complexity;
  j["chain_lengths"] = nlohmann::json::array();
  for (const auto& [prev, sym, length] : report.chain_lengths)
    j["chain_lengths"].push_back({{"previous", prev}, {"symbol", sym}, {"length", length}});
  j["notes"] = report.notes;
  return j;
}

emtk::MachineKind mode_from_name(const std::string& name) {
  if (name == "machine") return emtk::MachineKind::epsilon_machine;
  if (name == "transducer-memoryless") return emtk::MachineKind::transducer_memoryless;
  if (name == "transducer-memoryful") return emtk::MachineKind::transducer_memoryful;
  throw std::runtime_error("unknown model " + name +
                           " (expected machine, transducer-memoryless, transducer-memoryful)");
}

const emtk::JointSeries& stream_series(const emtk::DaycastResult& daycast,
                                       const std::string& stream_id) {
  auto it = daycast.streams.find(stream_id);
  if (it == daycast.streams.end())
    throw std::runtime_error("stream " + stream_id + " not found after daycasting");
  return it->second;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruction, scoring, and classification of finite-state models "
               "of binary behavioral event streams"};
  app.require_subcommand(1);
  PipelineConfig cfg;

  std::string spec_path, log_path, out_path, out_dir, stream_id, model_name, machine_path;

  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic event-log corpus");
  generate->add_option("--spec", spec_path, "Corpus spec JSON")->required();
  generate->add_option("--out", out_path, "Output CSV path")->required();
  add_config_options(generate, cfg);

  CLI::App* ingest_check = app.add_subcommand("ingest-check", "Validate an event log");
  ingest_check->add_option("--log", log_path, "Event log CSV")->required();

  CLI::App* fit = app.add_subcommand("fit", "Cross-validate and fit one model for one stream");
  fit->add_option("--log", log_path, "Event log CSV")->required();
  fit->add_option("--stream", stream_id, "Stream id")->required();
  fit->add_option("--model", model_name, "machine | transducer-memoryless | transducer-memoryful")
      ->required();
  fit->add_option("--out", out_path, "Machine JSON output path");
  add_config_options(fit, cfg);

  CLI::App* score = app.add_subcommand("score", "Fit and score all models for one stream");
  score->add_option("--log", log_path, "Event log CSV")->required();
  score->add_option("--stream", stream_id, "Stream id")->required();
  add_config_options(score, cfg);

  CLI::App* classify = app.add_subcommand("classify", "Classify a machine JSON file");
  classify->add_option("--machine", machine_path, "Machine JSON path")->required();

  CLI::App* run = app.add_subcommand("run", "End-to-end corpus run");
  run->add_option("--log", log_path, "Event log CSV")->required();
  run->add_option("--out-dir", out_dir, "Report bundle directory")->required();
  add_config_options(run, cfg);

  CLI::App* export_dot = app.add_subcommand("export-dot", "Render a machine JSON file as DOT");
  export_dot->add_option("--machine", machine_path, "Machine JSON path")->required();
  export_dot->add_option("--out", out_path, "DOT output path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      emtk::generate_corpus(read_file(spec_path), cfg.seed, out_path, cfg);
      return 0;
    }

    if (ingest_check->parsed()) {
      const emtk::EventLog log = emtk::ingest(log_path);
      std::cout << "records: " << log.records.size() << "\n";
      std::cout << "rejects: " << log.rejects.size() << "\n";
      for (const auto& reject : log.rejects)
        std::cout << "line " << reject.line << ": " << reject.reason << "\n";
      return 0;
    }

    if (fit->parsed()) {
      const emtk::EventLog log = emtk::ingest(log_path);
      const emtk::DaycastResult daycast = emtk::discretize_daycast(log, cfg);
      const emtk::JointSeries& series = stream_series(daycast, stream_id);
      const auto [train, test] = emtk::split_train_test(series, cfg);

      emtk::CVConfig cv = cfg.cv;
      cv.seed = emtk::derive_seed(cfg.seed, stream_id + "/folds");
      emtk::ReconstructionConfig recon;
      recon.alpha = cfg.alpha;
      recon.min_count = cfg.min_count;
      recon.mode = mode_from_name(model_name);

      const emtk::CrossValidationResult result =
          recon.mode == emtk::MachineKind::epsilon_machine
              ? emtk::cross_validate(train.output, cv, recon)
              : emtk::cross_validate(train, cv, recon);
      std::cout << "chosen_l_max: " << result.chosen_l_max << "\n";
      std::cout << "mean_cv_etv: " << result.mean_etv << "\n";
      std::cout << "states: " << result.final_machine.num_states() << "\n";
      if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        out << emtk::machine_to_json(result.final_machine);
      }
      return 0;
    }

    if (score->parsed()) {
      const emtk::EventLog log = emtk::ingest(log_path);
      const emtk::DaycastResult daycast = emtk::discretize_daycast(log, cfg);
      const emtk::StreamReport report =
          emtk::process_stream(stream_id, stream_series(daycast, stream_id), cfg);
      std::cout << "stream_id,model,chosen_l_max,mean_cv_etv,test_etv,score\n";
      for (const auto& r : report.records)
        std::cout << r.stream_id << "," << r.model << "," << r.chosen_l_max << "," << r.mean_etv
                  << "," << r.test_etv << "," << r.score << "\n";
      return 0;
    }

    if (classify->parsed()) {
      const emtk::Machine machine = emtk::machine_from_json(read_file(machine_path));
      std::cout << report_to_json(emtk::classify_any(machine)).dump(2) << "\n";
      return 0;
    }

    if (run->parsed()) {
      const emtk::EventLog log = emtk::ingest(log_path);
      const emtk::CorpusResult result = emtk::run_corpus(log, cfg);
      emtk::write_reports(result, cfg, out_dir);
      std::cout << "streams: " << result.streams.size() << "\n";
      std::cout << "quarantined: " << result.errors.size() << "\n";
      return result.exit_code;
    }

    if (export_dot->parsed()) {
      const emtk::Machine machine = emtk::machine_from_json(read_file(machine_path));
      const std::string dot = emtk::machine_to_dot(machine);
      if (out_path.empty()) {
        std::cout << dot;
      } else {
        std::ofstream out(out_path, std::ios::binary);
        out << dot;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
