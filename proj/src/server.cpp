#include "crowdlens/server.hpp"

#include <filesystem>
#include <fstream>

#include <httplib.h>

namespace crowdlens {

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::queued: return "queued";
    case RunStatus::running: return "running";
    case RunStatus::done: return "done";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

RunManager::RunManager(std::shared_ptr<const Dataset> dataset, PoiTable pois)
    : dataset_(std::move(dataset)), pois_(std::move(pois)), worker_([this] { worker_loop(); }) {}

RunManager::~RunManager() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

std::string RunManager::submit(const Params& params) {
  if (!dataset_) throw Error("no dataset loaded");
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = "run-" + std::to_string(next_id_++);
    runs_[id] = RunInfo{id, params, RunStatus::queued, {}, nullptr};
    order_.push_back(id);
    queue_.push_back(id);
  }
  cv_.notify_all();
  return id;
}

std::optional<RunInfo> RunManager::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = runs_.find(id);
  if (it == runs_.end()) return std::nullopt;
  return it->second;
}

std::vector<RunInfo> RunManager::list() const {
  std::lock_guard lock(mu_);
  std::vector<RunInfo> out;
  for (const auto& id : order_) out.push_back(runs_.at(id));
  return out;
}

void RunManager::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && !busy_; });
}

RunSnapshot RunManager::execute(const Dataset& dataset, const Params& params, const PoiTable& pois) {
  const auto run = run_detection(dataset, params);
  RunSnapshot s;
  s.summary = summary_to_json(run).dump();
  s.timeseries = timeseries_to_json(timeseries(run), run.grid).dump();
  s.events = events_to_json(run, dataset, &pois).dump();
  s.crowds = crowds_to_json(run, dataset).dump();
  s.analyst = analyst_to_json(analyst_stats(run, dataset.antennas)).dump();
  return s;
}

void RunManager::worker_loop() {
  for (;;) {
    std::string id;
    Params params;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
      if (stop_) return;
      id = queue_.front();
      queue_.pop_front();
      busy_ = true;
      auto& info = runs_.at(id);
      info.status = RunStatus::running;
      params = info.params;
    }
    std::shared_ptr<const RunSnapshot> snapshot;
    std::string error;
    try {
      snapshot = std::make_shared<const RunSnapshot>(execute(*dataset_, params, pois_));
    } catch (const std::exception& e) {
      error = e.what();
    }
    {
      std::lock_guard lock(mu_);
      auto& info = runs_.at(id);
      info.snapshot = snapshot;
      info.error = error;
      info.status = snapshot ? RunStatus::done : RunStatus::failed;
      busy_ = false;
    }
    idle_cv_.notify_all();
  }
}

namespace {

using ojson = nlohmann::ordered_json;
constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, const std::string& error, const ojson& detail) {
  res.status = status;
  res.set_content(ojson{{"error", error}, {"detail", detail}}.dump(), kJson);
}

ojson run_to_json(const RunInfo& r) {
  ojson j;
  j["run_id"] = r.id;
  j["status"] = to_string(r.status);
  j["params"] = params_to_json(r.params);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

}  // namespace

struct Server::Impl {
  httplib::Server http;
};

Server::Server(std::shared_ptr<const Dataset> dataset, PoiTable pois, ServerConfig config)
    : runs_(std::move(dataset), std::move(pois)), config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  // SO_REUSEADDR only: a port held by another listener must fail to bind.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  http.Get("/health", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

  http.Get("/antennas", [this](const httplib::Request&, httplib::Response& res) {
    ojson out = ojson::array();
    if (const auto* d = runs_.dataset())
      for (const auto& a : d->antennas.all())
        out.push_back({{"antenna_id", a.id}, {"lon", a.position.lon}, {"lat", a.position.lat}});
    res.set_content(out.dump(), kJson);
  });

  http.Get("/runs", [this](const httplib::Request&, httplib::Response& res) {
    ojson out = ojson::array();
    for (const auto& r : runs_.list()) out.push_back(run_to_json(r));
    res.set_content(out.dump(), kJson);
  });

  http.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
    if (!runs_.has_dataset()) return send_error(res, 409, "no dataset", "the server was started without a dataset");
    Params params;
    try {
      const auto body = req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
      params = apply_overrides(body, Params{});
    } catch (const nlohmann::json::exception& e) {
      return send_error(res, 400, "malformed body", e.what());
    } catch (const Error& e) {
      return send_error(res, 422, "invalid parameters", ojson::array({e.what()}));
    }
    if (const auto violations = validate_params(params); !violations.empty())
      return send_error(res, 422, "invalid parameters", violations);
    const auto id = runs_.submit(params);
    res.status = 201;
    res.set_content(ojson{{"run_id", id}, {"status", "queued"}}.dump(), kJson);
  });

  http.Get(R"(/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto run = runs_.get(req.matches[1]);
    if (!run) return send_error(res, 404, "unknown run", std::string(req.matches[1]));
    auto j = run_to_json(*run);
    if (run->snapshot) j["summary"] = ojson::parse(run->snapshot->summary);
    res.set_content(j.dump(), kJson);
  });

  const auto artifact = [this](std::string RunSnapshot::*field) {
    return [this, field](const httplib::Request& req, httplib::Response& res) {
      const auto run = runs_.get(req.matches[1]);
      if (!run) return send_error(res, 404, "unknown run", std::string(req.matches[1]));
      if (run->status == RunStatus::failed) return send_error(res, 500, "run failed", run->error);
      if (!run->snapshot) {
        res.status = 202;
        res.set_content(ojson{{"run_id", run->id}, {"status", to_string(run->status)}}.dump(), kJson);
        return;
      }
      res.set_content((*run->snapshot).*field, kJson);
    };
  };
  http.Get(R"(/runs/([^/]+)/timeseries)", artifact(&RunSnapshot::timeseries));
  http.Get(R"(/runs/([^/]+)/events)", artifact(&RunSnapshot::events));
  http.Get(R"(/runs/([^/]+)/crowds)", artifact(&RunSnapshot::crowds));
  http.Get(R"(/runs/([^/]+)/stats/analyst)", artifact(&RunSnapshot::analyst));

  if (!config_.ui_assets.empty()) {
    if (!impl_->http.set_mount_point("/ui", config_.ui_assets))
      throw Error("UI asset directory not found: " + config_.ui_assets);
  }
}

Server::~Server() { stop(); }

int Server::bind() {
  auto& http = impl_->http;
  if (config_.port == 0) {
    const int port = http.bind_to_any_port(config_.host);
    if (port < 0) throw Error("cannot bind " + config_.host);
    config_.port = port;
    return port;
  }
  if (!http.bind_to_port(config_.host, config_.port))
    throw Error("cannot bind " + config_.host + ":" + std::to_string(config_.port) + " (port in use?)");
  return config_.port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

bool Server::is_running() const { return impl_->http.is_running(); }

ServedData load_served_data(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  ServedData out;
  fs::path calls = root / "calls.csv", antennas = root / "antennas.csv";
  // A detect output directory points back at its inputs.
  if (!fs::exists(calls) && fs::exists(root / "dataset.json")) {
    std::ifstream in(root / "dataset.json");
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("calls") || !j.contains("antennas"))
      throw Error("malformed " + (root / "dataset.json").string());
    calls = j.at("calls").get<std::string>();
    antennas = j.at("antennas").get<std::string>();
  }
  if (!fs::exists(calls)) throw Error("no calls.csv or dataset.json in " + dir);
  auto dataset = std::make_shared<Dataset>(load_dataset(calls.string(), antennas.string()));
  if (const auto poi_path = root / "pois.csv"; fs::exists(poi_path)) {
    std::ifstream in(poi_path);
    out.pois = load_pois(in, dataset->antennas);
  }
  out.dataset = std::move(dataset);
  return out;
}

}  // namespace crowdlens
