// dsync: simulate logs, discover synchronization constraints, check replay.
//
// Exit codes: 0 success, 1 check failure, 2 I/O error, 3 validation error.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "dsync/config.hpp"
#include "dsync/model_io.hpp"
#include "dsync/report.hpp"

namespace fs = std::filesystem;
using namespace dsync;

namespace {

constexpr int kOk = 0, kCheckFailed = 1, kIo = 2, kInvalid = 3;

struct Common {
  std::string model;
  std::string config;
  std::vector<std::string> overrides;
  bool iso_time = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--model", c.model, "Model file (JSON)")->required();
  cmd->add_option("--config", c.config, "Run configuration file");
  cmd->add_option("--set", c.overrides, "Override a setting, e.g. --set extract.tau_s=20");
  cmd->add_flag("--iso-time", c.iso_time, "Read log timestamps as ISO-8601 date-times");
}

RunConfig effective_config(const Common& c) {
  RunConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config, cfg);
  for (const auto& o : c.overrides) {
    auto eq = o.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + o + "'");
    set_option(cfg, o.substr(0, eq), o.substr(eq + 1));
  }
  if (c.iso_time) cfg.csv.iso_time = true;
  return cfg;
}

void require(const RunConfig& cfg) {
  auto problems = validate(cfg);
  if (!problems.empty()) throw ValidationError("config: " + problems.front());
}

Net load_model(const std::string& path) {
  if (!fs::exists(path)) throw IoError("model file '" + path + "' does not exist");
  auto net = load_net(path);
  require_valid(net);
  return net;
}

std::string safe_file_name(const std::string& id) {
  std::string out;
  for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision synchronization pattern discovery on timed colored Petri nets"};
  app.require_subcommand(1);

  Common sim_common;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_cases;
  std::optional<double> horizon;
  std::string out_path;
  bool strip_guards = false;
  auto* sim = app.add_subcommand("simulate", "Simulate the model and write a CSV event log");
  add_common(sim, sim_common);
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--max-cases", max_cases, "Stop after this many completed cases");
  sim->add_option("--horizon", horizon, "Stop at this model time");
  sim->add_option("--out", out_path, "Output CSV path")->required();
  sim->add_flag("--strip-guards", strip_guards, "Simulate with every guard removed");

  Common disc_common;
  std::string log_path, report_path, ptlog_dir, annotated_path;
  auto* disc = app.add_subcommand("discover", "Discover synchronization constraints from a log");
  add_common(disc, disc_common);
  disc->add_option("--log", log_path, "Event log (CSV)")->required();
  disc->add_option("--report", report_path, "Write the JSON report here");
  disc->add_option("--dump-ptlogs", ptlog_dir, "Write one CSV per pattern candidate into this directory");
  disc->add_option("--annotated", annotated_path, "Write the model with discovered guards here");

  Common check_common;
  std::string check_log;
  auto* check = app.add_subcommand("check", "Replay a log over a guarded model");
  add_common(check, check_common);
  check->add_option("--log", check_log, "Event log (CSV)")->required();

  std::string in_report, md_out, ref_model;
  auto* rep = app.add_subcommand("report", "Render a discovery report as a markdown table");
  rep->add_option("--report", in_report, "Discovery report (JSON)")->required();
  rep->add_option("--model", ref_model, "Model holding the modeled guards");
  rep->add_option("--out", md_out, "Write markdown here instead of standard output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (sim->parsed()) {
      auto cfg = effective_config(sim_common);
      if (seed) cfg.sim.seed = *seed;
      if (max_cases) {
        if (*max_cases == 0) throw ValidationError("--max-cases must be >= 1");
        cfg.sim.max_cases = *max_cases;
      }
      if (horizon) cfg.sim.horizon = *horizon;
      require(cfg);
      auto net = load_model(sim_common.model);
      if (strip_guards) net = net.without_guards();
      auto log = simulate(net, cfg.sim);
      write_text_file(out_path, write_log(log));
      std::cout << "wrote " << log.events.size() << " events to " << out_path << "\n";
      return kOk;
    }
    if (disc->parsed()) {
      auto cfg = effective_config(disc_common);
      require(cfg);
      auto net = load_model(disc_common.model);
      auto log = load_log(log_path, cfg.csv);
      auto result = discover(log, net, cfg.tree, cfg.extract);
      std::cout << summary_text(result);
      if (!report_path.empty()) {
        auto report = discovery_report(result, cfg, disc_common.model, log_path);
        write_text_file(report_path, report.dump(2) + "\n");
      }
      if (!ptlog_dir.empty())
        for (const auto& pt : result.pt_logs)
          write_text_file(fs::path(ptlog_dir) / (safe_file_name(pt.candidate.id()) + ".csv"), pt_log_csv(pt));
      if (!annotated_path.empty()) save_net(annotate_net(net.without_guards(), result.constraints), annotated_path);
      return kOk;
    }
    if (check->parsed()) {
      auto cfg = effective_config(check_common);
      require(cfg);
      auto net = load_model(check_common.model);
      auto log = load_log(check_log, cfg.csv);
      auto r = replay(log, net, ReplayOptions{true}).report;
      double pct = r.match_rate() * 100;
      std::cout << "matched " << r.matched << "/" << r.total() << " log moves (" << format_number(pct) << "%)\n";
      for (const auto& u : r.unmatched)
        std::cout << "  unmatched: case " << u.event.case_id << " " << u.event.label << " at "
                  << format_number(u.event.start) << " (" << u.reason << ")\n";
      return r.unmatched.empty() ? kOk : kCheckFailed;
    }
    if (rep->parsed()) {
      auto doc = nlohmann::json::parse(read_text_file(in_report));
      std::optional<Net> reference;
      if (!ref_model.empty()) reference = load_model(ref_model);
      auto md = markdown_report(doc, reference ? &*reference : nullptr);
      if (md_out.empty()) std::cout << md;
      else write_text_file(md_out, md);
      return kOk;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kOk;
}
