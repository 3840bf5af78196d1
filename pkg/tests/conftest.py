from __future__ import annotations

import json
from pathlib import Path

import pytest

from faircurt.grid import PQ, SLACK, Branch, Bus, NetworkModel, PlantSpec

FEEDER = Path(__file__).resolve().parents[1] / "src" / "faircurt" / "data" / "feeder19.json"

# Nominal peak kW behind each load profile reference in the shipped feeder.
LOAD_PEAKS_KW = {"res_small": 8.0, "res_medium": 15.0, "res_large": 25.0, "commercial": 40.0}


@pytest.fixture(scope="session")
def feeder():
    from faircurt.grid import load_network

    return load_network(FEEDER)


def make_net(branch_params, pv=None, v_min=0.95, v_max=1.05):
    """Small in-code network: bus 0 slack, chain/tree per branch list."""
    pv = pv or {}
    nb = 1 + max(max(f, t) for f, t, *_ in branch_params)
    buses = []
    for i in range(nb):
        plant = PlantSpec(**pv[i]) if i in pv else None
        buses.append(Bus(i, SLACK if i == 0 else PQ, 0.4, plant, None))
    branches = tuple(
        Branch(f, t, r, x, b[0] if b else 0.0) for f, t, r, x, *b in branch_params
    )
    return NetworkModel(tuple(buses), branches, 0.4, v_min, v_max)


@pytest.fixture
def two_bus():
    def build(r, x):
        return make_net([(0, 1, r, x)])

    return build


def write_network(tmp_path: Path, doc: dict, name: str = "net.json") -> Path:
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def valid_3bus_doc() -> dict:
    return {
        "s_base_kva": 400.0,
        "v_base_v": 400.0,
        "v_min_pu": 0.95,
        "v_max_pu": 1.05,
        "buses": [
            {"id": 0, "kind": "slack"},
            {"id": 1, "kind": "pq", "load_profile_ref": "res_small"},
            {"id": 2, "kind": "pq", "pv": {"s_max_kva": 20.0, "pf_min": 0.95}},
        ],
        "branches": [
            {"from": 0, "to": 1, "r_ohm": 0.01, "x_ohm": 0.004, "b_uS": 0.0},
            {"from": 1, "to": 2, "r_ohm": 0.01, "x_ohm": 0.004, "b_uS": 0.0},
        ],
    }
