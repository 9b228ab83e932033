#include <fstream>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crowdlens/crowd_miner.hpp"
#include "crowdlens/eval.hpp"
#include "crowdlens/pipeline.hpp"
#include "crowdlens/report.hpp"
#include "crowdlens/synth.hpp"

namespace py = pybind11;
using namespace crowdlens;

namespace {

py::object json_text(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

py::object to_python(const nlohmann::ordered_json& j) { return json_text(j.dump()); }

Dataset dataset_from_text(const std::string& calls_csv, const std::string& antennas_csv, Seconds half_window) {
  Dataset d;
  std::istringstream a(antennas_csv);
  d.antennas = load_antennas(a);
  std::istringstream c(calls_csv);
  d.calls = load_calls(c, d.antennas, 3600, half_window);
  return d;
}

void check(const Params& p) {
  if (const auto v = validate_params(p); !v.empty()) {
    std::string msg = "invalid parameters:";
    for (const auto& s : v) msg += "\n  " + s;
    throw Error(msg);
  }
}

py::dict run_to_python(const Dataset& dataset, const Params& params) {
  RunArtifacts run;
  {
    py::gil_scoped_release release;
    run = run_detection(dataset, params);
  }
  py::dict out;
  out["summary"] = to_python(summary_to_json(run));
  out["events"] = to_python(events_to_json(run, dataset));
  out["crowds"] = to_python(crowds_to_json(run, dataset));
  out["timeseries"] = to_python(timeseries_to_json(timeseries(run), run.grid));
  return out;
}

SynthConfig synth_config(std::uint64_t seed, std::size_t users, std::size_t antennas, std::size_t days,
                         std::size_t events, std::size_t rows) {
  SynthConfig c;
  c.seed = seed;
  c.n_users = users;
  c.n_antennas = antennas;
  c.n_days = days;
  c.n_random_events = events;
  c.max_rows = rows;
  return c;
}

}  // namespace

PYBIND11_MODULE(crowdlens, m) {
  m.doc() = "Unusual crowd event detection over call detail records";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<Params>(m, "Params")
      .def(py::init<>())
      .def(py::init([](int n, int lt, int ci, double p, double si, int min_locations, int window_minutes,
                       bool holdout) {
             Params out;
             out.scale = n;
             out.lifetime = lt;
             out.commitment = ci;
             out.commitment_probability = p;
             out.similarity = si;
             out.min_locations = min_locations;
             out.half_window = static_cast<Seconds>(window_minutes) * 60;
             out.holdout_crowd_span = holdout;
             return out;
           }),
           py::kw_only(), py::arg("epsilon_n") = 20, py::arg("epsilon_lt") = 4, py::arg("epsilon_ci") = 10,
           py::arg("epsilon_p") = 0.2, py::arg("epsilon_si") = 0.2, py::arg("min_locations") = 2,
           py::arg("window_minutes") = 30, py::arg("holdout_crowd_span") = true)
      .def_readwrite("epsilon_n", &Params::scale)
      .def_readwrite("epsilon_lt", &Params::lifetime)
      .def_readwrite("epsilon_ci", &Params::commitment)
      .def_readwrite("epsilon_p", &Params::commitment_probability)
      .def_readwrite("epsilon_si", &Params::similarity)
      .def_readwrite("min_locations", &Params::min_locations)
      .def_property(
          "window_minutes", [](const Params& p) { return p.half_window / 60; },
          [](Params& p, int minutes) { p.half_window = static_cast<Seconds>(minutes) * 60; })
      .def_readwrite("holdout_crowd_span", &Params::holdout_crowd_span)
      .def("to_dict", [](const Params& p) { return to_python(params_to_json(p)); })
      .def("__repr__", [](const Params& p) { return "Params(" + params_to_json(p).dump() + ")"; });

  m.def("validate_params", &validate_params, py::arg("params"), "Violated constraints; empty when valid");

  m.def("existence_step", &existence_step, py::arg("prev_prob"), py::arg("carried"), py::arg("prev_cluster_size"),
        py::arg("observed_now"));

  m.def(
      "synth",
      [](std::uint64_t seed, std::size_t users, std::size_t antennas, std::size_t days, std::size_t events,
         std::size_t rows) {
        SynthOutput s;
        {
          py::gil_scoped_release release;
          s = generate(synth_config(seed, users, antennas, days, events, rows));
        }
        py::dict out;
        out["calls_csv"] = s.calls_csv;
        out["antennas_csv"] = s.antennas_csv;
        out["ground_truth"] = json_text(s.ground_truth_json);
        out["rows"] = s.summary.rows;
        return out;
      },
      py::kw_only(), py::arg("seed") = 7, py::arg("users") = 5000, py::arg("antennas") = 50, py::arg("days") = 14,
      py::arg("events") = 3, py::arg("rows") = 0, "Generate a synthetic city in memory");

  m.def(
      "synth_to_directory",
      [](const std::string& out, std::uint64_t seed, std::size_t users, std::size_t antennas, std::size_t days,
         std::size_t events, std::size_t rows) {
        py::gil_scoped_release release;
        return generate_to_directory(synth_config(seed, users, antennas, days, events, rows), out).rows;
      },
      py::arg("out"), py::kw_only(), py::arg("seed") = 7, py::arg("users") = 5000, py::arg("antennas") = 50,
      py::arg("days") = 14, py::arg("events") = 3, py::arg("rows") = 0);

  m.def(
      "detect",
      [](const std::string& calls_csv, const std::string& antennas_csv, const Params& params) {
        check(params);
        const auto dataset = dataset_from_text(calls_csv, antennas_csv, params.half_window);
        return run_to_python(dataset, params);
      },
      py::arg("calls_csv"), py::arg("antennas_csv"), py::arg("params") = Params{},
      "Run detection over CSV text; returns summary, events, crowds and timeseries");

  m.def(
      "detect_files",
      [](const std::string& calls_path, const std::string& antennas_path, const Params& params) {
        check(params);
        const auto dataset = load_dataset(calls_path, antennas_path, params.half_window);
        return run_to_python(dataset, params);
      },
      py::arg("calls_path"), py::arg("antennas_path"), py::arg("params") = Params{});

  m.def(
      "eval_counts",
      [](std::size_t matched, std::size_t matched_detections, std::size_t detected, std::size_t truth) {
        return json_text(to_json(eval_from_counts(matched, matched_detections, detected, truth)));
      },
      py::arg("matched"), py::arg("matched_detections"), py::arg("detected"), py::arg("truth"));

  m.def(
      "score",
      [](const std::string& events_json, const std::string& truth_json) {
        std::istringstream e(events_json);
        std::istringstream t(truth_json);
        const auto detected = parse_detected_events(e);
        const auto truth = parse_ground_truth(t);
        return json_text(to_json(crowdlens::score(detected, truth)));
      },
      py::arg("events_json"), py::arg("truth_json"), "Score an events document against a ground-truth document");
}
