#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "crowdlens/report.hpp"

namespace crowdlens {

enum class RunStatus { queued, running, done, failed };
std::string to_string(RunStatus s);

/// Serialized artifacts of a finished run; never modified after publication.
struct RunSnapshot {
  std::string summary;
  std::string timeseries;
  std::string events;
  std::string crowds;
  std::string analyst;
};

struct RunInfo {
  std::string id;
  Params params;
  RunStatus status = RunStatus::queued;
  std::string error;
  std::shared_ptr<const RunSnapshot> snapshot;  // set once status == done
};

/// Owns the run table and the single background worker executing runs in
/// submission order.
class RunManager {
public:
  RunManager(std::shared_ptr<const Dataset> dataset, PoiTable pois = {});
  ~RunManager();
  RunManager(const RunManager&) = delete;
  RunManager& operator=(const RunManager&) = delete;

  [[nodiscard]] bool has_dataset() const { return dataset_ != nullptr; }
  [[nodiscard]] const Dataset* dataset() const { return dataset_.get(); }
  /// Throws Error when there is no dataset; params must already be valid.
  std::string submit(const Params& params);
  [[nodiscard]] std::optional<RunInfo> get(const std::string& id) const;
  [[nodiscard]] std::vector<RunInfo> list() const;
  /// Blocks until the queue is empty and nothing is running.
  void wait_idle();

  /// Computes the snapshot synchronously (used by the worker).
  static RunSnapshot execute(const Dataset& dataset, const Params& params, const PoiTable& pois);

private:
  void worker_loop();

  std::shared_ptr<const Dataset> dataset_;
  PoiTable pois_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::map<std::string, RunInfo> runs_;
  std::vector<std::string> order_;
  std::deque<std::string> queue_;
  std::size_t next_id_ = 1;
  bool busy_ = false;
  bool stop_ = false;
  std::thread worker_;
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Directory of static UI files; empty serves the API only.
  std::string ui_assets;
};

class Server {
public:
  Server(std::shared_ptr<const Dataset> dataset, PoiTable pois, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the configured port (0 = any free port); throws Error when the port is unavailable.
  int bind();
  /// Serves until stop(); call after bind().
  void listen();
  void stop();
  [[nodiscard]] bool is_running() const;
  RunManager& runs() { return runs_; }

private:
  struct Impl;
  RunManager runs_;
  ServerConfig config_;
  std::unique_ptr<Impl> impl_;
};

/// Loads calls.csv, antennas.csv and optional pois.csv from `dir`.
struct ServedData {
  std::shared_ptr<const Dataset> dataset;
  PoiTable pois;
};
ServedData load_served_data(const std::string& dir);

}  // namespace crowdlens
