// Copyright 2026 The tnpqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings. JSON crosses the boundary as text; the package wrapper
// decodes it.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tnpqc/experiments.hpp"

namespace py = pybind11;

namespace {

using namespace tnpqc;

std::vector<std::pair<std::string, double>> terms_of(const PauliSum& s) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(s.size());
  for (const auto& e : s) out.emplace_back(e.term.to_string(), e.coefficient);
  return out;
}

TnLayout layout_for(const std::string& kind, int n, int rows, int cols, int layers) {
  switch (layout_kind_from_string(kind)) {
    case LayoutKind::kUmpo1d: return layout_umpo_1d(n, layers);
    case LayoutKind::kUttn1d: return layout_uttn_1d(n);
    case LayoutKind::kUmpo2d: return layout_umpo_2d(rows, cols, layers);
    case LayoutKind::kUttn2d: return layout_uttn_2d(rows, cols);
  }
  throw std::invalid_argument("unknown layout");
}

py::object table_to_python(const Table& t) {
  py::list rows;
  for (const auto& row : t.rows()) {
    py::list r;
    for (const auto& cell : row) std::visit([&](const auto& v) { r.append(v); }, cell);
    rows.append(r);
  }
  py::dict d;
  d["columns"] = t.schema().columns;
  d["rows"] = rows;
  std::ostringstream csv;
  write_csv(csv, t);
  d["csv"] = csv.str();
  return std::move(d);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "tnpqc native core";
  m.attr("__version__") = library_version();
  m.attr("SCHEMA_VERSION") = kSchemaVersion;

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::object err = py::reinterpret_borrow<py::object>(config_error.ptr())(py::str(e.what()));
      err.attr("path") = e.path();
      PyErr_SetObject(config_error.ptr(), err.ptr());
    }
  });

  py::class_<PauliSum>(m, "PauliSum")
      .def_property_readonly("num_qubits", &PauliSum::num_qubits)
      .def("__len__", &PauliSum::size)
      .def("terms", &terms_of, "(string, coefficient) pairs, site 0 leftmost")
      .def("coefficient", [](const PauliSum& s, const std::string& t) { return s.coefficient(PauliTerm::parse(t)); })
      .def("max_neighboring_width", &PauliSum::max_neighboring_width)
      .def("to_dense", [](const PauliSum& s) { return to_dense(s); })
      .def("__repr__", &PauliSum::to_string);

  m.def("pauli_sum", [](int n, const std::vector<std::pair<std::string, double>>& terms) {
    std::vector<PauliSum::Entry> entries;
    for (const auto& [t, c] : terms) entries.push_back({PauliTerm::parse(t), c});
    return PauliSum::from_entries(n, entries);
  }, py::arg("num_qubits"), py::arg("terms"));
  m.def("tfim_1d", &build_tfim_1d, py::arg("n"), py::arg("J"), py::arg("g"));
  m.def("tfim_2d", &build_tfim_2d, py::arg("rows"), py::arg("cols"), py::arg("J"), py::arg("g"));
  m.def("time_crystal", &build_time_crystal, py::arg("n"), py::arg("J"), py::arg("V"), py::arg("h"));
  m.def("tfim_mpo_dense", [](int n, double J, double g) { return mpo_to_dense(build_tfim_mpo(n, J, g)); },
        py::arg("n"), py::arg("J"), py::arg("g"));

  m.def("exact_ground_energy", [](const PauliSum& h) {
    py::gil_scoped_release release;
    return exact_ground_energy(h);
  }, py::arg("h"));

  m.def("layout_parameters", [](const std::string& kind, int n, int rows, int cols, int layers) {
    return layout_for(kind, n, rows, cols, layers).num_parameters();
  }, py::arg("kind"), py::arg("n") = 0, py::arg("rows") = 0, py::arg("cols") = 0, py::arg("layers") = 1);

  m.def("rotate_hamiltonian", [](const PauliSum& h, const std::string& kind, const std::vector<double>& theta,
                                 int layers, int rows, int cols, double prune) {
    const auto layout = layout_for(kind, h.num_qubits(), rows, cols, layers);
    py::gil_scoped_release release;
    return rotate_hamiltonian(h, layout, theta, prune).sum;
  }, py::arg("h"), py::arg("kind"), py::arg("theta"), py::arg("layers") = 1, py::arg("rows") = 0,
        py::arg("cols") = 0, py::arg("prune") = kDefaultPrune);

  m.def("experiment_kinds", [] {
    std::vector<std::string> out;
    for (auto k : all_experiment_kinds()) out.push_back(to_string(k));
    return out;
  });

  m.def("_normalize_config", [](const std::string& text) {
    return to_json(parse_config(nlohmann::json::parse(text))).dump();
  }, py::arg("config_json"));

  m.def("_run_experiment", [](const std::string& text, std::optional<int> threads) {
    const auto cfg = parse_config(nlohmann::json::parse(text));
    RunOptions options;
    options.threads = resolve_threads(threads);
    ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = run_experiment(cfg, options);
    }
    py::dict tables;
    for (const auto& t : r.tables) tables[py::str(t.schema().suffix)] = table_to_python(t);
    py::dict out;
    out["tables"] = tables;
    out["summary"] = r.summary.dump();
    out["failures"] = r.failures;
    return out;
  }, py::arg("config_json"), py::arg("threads") = py::none());
}
