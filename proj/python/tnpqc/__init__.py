# Copyright 2026 The tnpqc Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Tensor-network-assisted VQE experiments."""

import json

from . import _core
from ._core import (
    SCHEMA_VERSION,
    ConfigError,
    PauliSum,
    __version__,
    exact_ground_energy,
    experiment_kinds,
    layout_parameters,
    pauli_sum,
    rotate_hamiltonian,
    tfim_1d,
    tfim_2d,
    tfim_mpo_dense,
    time_crystal,
)


def validate_config(config):
    """Returns the fully resolved config dict; raises ConfigError (with .path)."""
    return json.loads(_core._normalize_config(json.dumps(config)))


def run_experiment(config, threads=None):
    """Runs a config dict. Tables map suffix -> {columns, rows, csv}."""
    out = _core._run_experiment(json.dumps(config), threads)
    out["summary"] = json.loads(out["summary"])
    return out


__all__ = [
    "SCHEMA_VERSION",
    "ConfigError",
    "PauliSum",
    "__version__",
    "exact_ground_energy",
    "experiment_kinds",
    "layout_parameters",
    "pauli_sum",
    "rotate_hamiltonian",
    "run_experiment",
    "tfim_1d",
    "tfim_2d",
    "tfim_mpo_dense",
    "time_crystal",
    "validate_config",
]
