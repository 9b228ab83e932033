#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <pthread.h>

#include "crowdlens/eval.hpp"
#include "crowdlens/pipeline.hpp"
#include "crowdlens/profiler.hpp"
#include "crowdlens/report.hpp"
#include "crowdlens/server.hpp"
#include "crowdlens/synth.hpp"

namespace fs = std::filesystem;
using namespace crowdlens;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

struct UsageError : Error {
  using Error::Error;
};

struct ParamFlags {
  int epsilon_n = 20;
  int epsilon_lt = 4;
  int epsilon_ci = 10;
  double epsilon_p = 0.2;
  double epsilon_si = 0.2;
  int min_locations = 2;
  int window_minutes = 30;
  bool no_holdout = false;

  void attach(CLI::App* app) {
    app->add_option("--epsilon-n", epsilon_n, "Minimum users per cluster")->envname("CROWDLENS_EPSILON_N")->capture_default_str();
    app->add_option("--epsilon-lt", epsilon_lt, "Minimum crowd lifetime")->envname("CROWDLENS_EPSILON_LT")->capture_default_str();
    app->add_option("--epsilon-ci", epsilon_ci, "Minimum committed users")->envname("CROWDLENS_EPSILON_CI")->capture_default_str();
    app->add_option("--epsilon-p", epsilon_p, "Minimum existence probability")->envname("CROWDLENS_EPSILON_P")->capture_default_str();
    app->add_option("--epsilon-si", epsilon_si, "Unusual iff mean similarity below this")->envname("CROWDLENS_EPSILON_SI")->capture_default_str();
    app->add_option("--min-locations", min_locations, "Distinct antennas a crowd must visit")->envname("CROWDLENS_MIN_LOCATIONS")->capture_default_str();
    app->add_option("--window-minutes", window_minutes, "Half-width of the assignment window")->envname("CROWDLENS_WINDOW_MINUTES")->capture_default_str();
    app->add_flag("--no-holdout", no_holdout, "Compare against the full profile, crowd span included")->envname("CROWDLENS_NO_HOLDOUT");
  }

  [[nodiscard]] Params params() const {
    Params p;
    p.scale = epsilon_n;
    p.lifetime = epsilon_lt;
    p.commitment = epsilon_ci;
    p.commitment_probability = epsilon_p;
    p.similarity = epsilon_si;
    p.min_locations = min_locations;
    p.half_window = static_cast<Seconds>(window_minutes) * 60;
    p.holdout_crowd_span = !no_holdout;
    if (const auto v = validate_params(p); !v.empty()) {
      std::string msg = "invalid parameters:";
      for (const auto& s : v) msg += "\n  " + s;
      throw UsageError(msg);
    }
    return p;
  }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out) {
  const auto s = generate_to_directory(cfg, out);
  std::cout << "rows " << s.rows << "\nusers " << s.users << "\nantennas " << s.antennas << "\nevents " << s.events
            << "\n";
  return kOk;
}

int cmd_detect(const std::string& calls, const std::string& antennas, const std::string& out,
               const ParamFlags& flags, const std::string& profiles_path) {
  const auto params = flags.params();
  const auto dataset = load_dataset(calls, antennas, params.half_window);
  std::optional<ProfileStore> profiles;
  if (!profiles_path.empty()) {
    auto in = open_input(profiles_path);
    auto users = dataset.calls.users;
    profiles = load_profiles(in, users, dataset.antennas);
    if (users.size() != dataset.calls.users.size())
      std::cerr << "warning: profile store names " << users.size() - dataset.calls.users.size()
                << " users absent from the calls\n";
  }
  const auto run = run_detection(dataset, params, profiles ? &*profiles : nullptr);

  fs::create_directories(out);
  const fs::path dir(out);
  write_file(dir / "events.json", events_to_json(run, dataset).dump(2) + "\n");
  {
    std::string lines;
    for (const auto& c : crowds_to_json(run, dataset)) lines += c.dump() + "\n";
    write_file(dir / "crowds.jsonl", lines);
  }
  const auto ts = timeseries(run);
  write_file(dir / "timeseries.csv", timeseries_to_csv(ts, run.grid));
  write_file(dir / "timeseries.json", timeseries_to_json(ts, run.grid).dump() + "\n");
  write_file(dir / "analyst.json", analyst_to_json(analyst_stats(run, dataset.antennas)).dump() + "\n");
  write_file(dir / "ingest.json", to_json(dataset.calls.report) + "\n");
  write_file(dir / "dataset.json", nlohmann::ordered_json{{"calls", fs::absolute(calls).string()},
                                                          {"antennas", fs::absolute(antennas).string()}}
                                           .dump(2) +
                                       "\n");
  const auto summary = summary_to_json(run);
  write_file(dir / "summary.json", summary.dump(2) + "\n");

  std::cout << "calls " << dataset.calls.report.admitted << "\nusers " << dataset.calls.users.size() << "\ntimestamps "
            << run.grid.n_steps << "\nclusters " << run.clusters.total() << "\ncrowds " << run.crowds.size()
            << "\nunusual_crowds " << run.unusual.size() << "\nunusual_events " << run.events.size() << "\n";
  return kOk;
}

int cmd_profile_build(const std::string& calls, const std::string& antennas, const std::string& out,
                      int window_minutes) {
  const auto dataset = load_dataset(calls, antennas, static_cast<Seconds>(window_minutes) * 60);
  const auto store = build_profiles(dataset.calls.calls, dataset.calls.index.grid(), dataset.calls.users.size());
  std::ofstream os(out, std::ios::binary);
  if (!os) throw Error("cannot write " + out);
  save_profiles(os, store, dataset.calls.users, dataset.antennas);
  std::cout << "users " << dataset.calls.users.size() << "\n";
  return kOk;
}

std::string fixed4(std::optional<double> v) {
  if (!v) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

int cmd_eval(const std::string& events_path, const std::string& truth_path, const std::string& counts_path,
             const std::string& out) {
  EvalResult r;
  if (!counts_path.empty()) {
    auto in = open_input(counts_path);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error("malformed counts file " + counts_path);
    const auto n = [&](const char* key) {
      if (!j.contains(key) || !j.at(key).is_number_unsigned()) throw Error(std::string("counts file lacks '") + key + "'");
      return j.at(key).get<std::size_t>();
    };
    r = eval_from_counts(n("matched"), n("matched_detections"), n("detected"), n("truth"));
  } else {
    if (events_path.empty() || truth_path.empty()) throw UsageError("eval needs --events and --truth, or --counts");
    auto truth_in = open_input(truth_path);
    const auto truth = parse_ground_truth(truth_in);
    auto events_in = open_input(events_path);
    const auto detected = parse_detected_events(events_in);
    r = score(detected, truth);
  }
  std::cout << "matched " << r.matched << "/" << r.truth << "\nmatched_detections " << r.matched_detections << "/"
            << r.detected << "\nprecision " << fixed4(r.precision) << "\nrecall " << fixed4(r.recall) << "\n";
  if (!out.empty()) write_file(out, to_json(r) + "\n");
  return kOk;
}

int cmd_serve(const std::string& data, const std::string& host, int port, const std::string& ui_assets,
              bool no_ui_assets) {
  // SIGINT/SIGTERM are consumed by a dedicated thread so the server can stop cleanly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ServedData served;
  if (!data.empty()) served = load_served_data(data);
  ServerConfig cfg;
  cfg.host = host;
  cfg.port = port;
  if (!no_ui_assets) cfg.ui_assets = ui_assets;
  Server server(served.dataset, std::move(served.pois), cfg);
  const int bound = server.bind();
  std::cout << "listening on http://" << host << ":" << bound << std::endl;

  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  if (waiter.joinable()) {
    // listen() returned without a signal; wake the waiter.
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdlens: unusual crowd event detection over call detail records"};
  app.require_subcommand(1);

  SynthConfig synth_cfg;
  std::string synth_out = "data";
  std::size_t synth_events = synth_cfg.n_random_events;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic city with planted events");
  synth->add_option("--seed", synth_cfg.seed)->envname("CROWDLENS_SEED")->capture_default_str();
  synth->add_option("--users", synth_cfg.n_users)->envname("CROWDLENS_USERS")->capture_default_str();
  synth->add_option("--antennas-count", synth_cfg.n_antennas)->envname("CROWDLENS_ANTENNAS_COUNT")->capture_default_str();
  synth->add_option("--days", synth_cfg.n_days)->envname("CROWDLENS_DAYS")->capture_default_str();
  synth->add_option("--events", synth_events, "Number of planted events")->envname("CROWDLENS_EVENTS")->capture_default_str();
  synth->add_option("--rows", synth_cfg.max_rows, "Keep only the earliest rows (0 = all)")->envname("CROWDLENS_ROWS")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->envname("CROWDLENS_OUT")->capture_default_str();

  std::string calls, antennas, detect_out = "run", profiles;
  ParamFlags detect_flags;
  auto* detect = app.add_subcommand("detect", "Run the detection pipeline");
  detect->add_option("--calls", calls, "calls.csv")->envname("CROWDLENS_CALLS")->required();
  detect->add_option("--antennas", antennas, "antennas.csv")->envname("CROWDLENS_ANTENNAS")->required();
  detect->add_option("--out", detect_out, "Output directory")->envname("CROWDLENS_OUT")->capture_default_str();
  detect->add_option("--profiles", profiles, "Profile store written by profile-build")->envname("CROWDLENS_PROFILES");
  detect_flags.attach(detect);

  std::string pb_calls, pb_antennas, pb_out = "profiles.json";
  int pb_window = 30;
  auto* pb = app.add_subcommand("profile-build", "Build and save the user profile store");
  pb->add_option("--calls", pb_calls)->envname("CROWDLENS_CALLS")->required();
  pb->add_option("--antennas", pb_antennas)->envname("CROWDLENS_ANTENNAS")->required();
  pb->add_option("--out", pb_out)->envname("CROWDLENS_OUT")->capture_default_str();
  pb->add_option("--window-minutes", pb_window)->envname("CROWDLENS_WINDOW_MINUTES")->capture_default_str();

  std::string ev_events, ev_truth, ev_counts, ev_out;
  auto* ev = app.add_subcommand("eval", "Score detected events against ground truth");
  ev->add_option("--events", ev_events, "events.json written by detect")->envname("CROWDLENS_EVENTS");
  ev->add_option("--truth", ev_truth, "ground_truth.json")->envname("CROWDLENS_TRUTH");
  ev->add_option("--counts", ev_counts, "JSON {matched, matched_detections, detected, truth}")->envname("CROWDLENS_COUNTS");
  ev->add_option("--out", ev_out, "Write the result as JSON")->envname("CROWDLENS_OUT");

  std::string data, host = "127.0.0.1", ui_assets = "ui";
  int port = 8080;
  bool no_ui = false;
  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  serve->add_option("--data", data, "Directory with calls.csv and antennas.csv, or a detect output")->envname("CROWDLENS_DATA");
  serve->add_option("--port", port)->envname("CROWDLENS_PORT")->capture_default_str();
  serve->add_option("--host", host)->envname("CROWDLENS_HOST")->capture_default_str();
  serve->add_option("--ui-assets", ui_assets, "Static UI directory, served under /ui when it exists")->envname("CROWDLENS_UI_ASSETS");
  serve->add_flag("--no-ui-assets", no_ui, "Serve the API only")->envname("CROWDLENS_NO_UI_ASSETS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) {
      synth_cfg.n_random_events = synth_events;
      return cmd_synth(synth_cfg, synth_out);
    }
    if (*detect) return cmd_detect(calls, antennas, detect_out, detect_flags, profiles);
    if (*pb) return cmd_profile_build(pb_calls, pb_antennas, pb_out, pb_window);
    if (*ev) return cmd_eval(ev_events, ev_truth, ev_counts, ev_out);
    if (*serve) {
      const bool has_ui = !no_ui && !ui_assets.empty() && fs::is_directory(ui_assets);
      return cmd_serve(data, host, port, has_ui ? ui_assets : "", !has_ui);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
