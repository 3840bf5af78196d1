"""Per-unit network model for a radial LV feeder and its admittance matrix.

Networks are loaded from a JSON file in physical units (ohms, kVA, volts)
and converted to per-unit on the declared base. Models are frozen after
construction and safe to share across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SLACK = "slack"
PQ = "pq"


class NetworkParseError(ValueError):
    """Malformed network file (syntax or missing/mistyped fields)."""


class NetworkValidationError(ValueError):
    """Structurally valid file that violates a model invariant."""


@dataclass(frozen=True)
class PlantSpec:
    s_max: float  # apparent-power capacity, pu
    pf_min: float  # minimum operating power factor, in (0, 1]

    @property
    def zeta(self) -> float:
        """Reactive/active ratio at minimum power factor."""
        return math.sqrt((1.0 - self.pf_min**2) / self.pf_min**2)


@dataclass(frozen=True)
class LoadSpec:
    profile_ref: str  # key into a demand-profile library


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str  # SLACK or PQ
    base_kv: float
    pv_plant: PlantSpec | None = None
    load: LoadSpec | None = None


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float  # pu
    x: float  # pu
    b_shunt: float  # pu, total line charging


@dataclass(frozen=True)
class NetworkModel:
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    s_base: float  # MVA
    v_min: float  # pu
    v_max: float  # pu

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def slack_id(self) -> int:
        return next(b.id for b in self.buses if b.kind == SLACK)

    @property
    def nonslack_ids(self) -> list[int]:
        return [b.id for b in self.buses if b.kind != SLACK]

    @property
    def pv_buses(self) -> list[Bus]:
        return [b for b in self.buses if b.pv_plant is not None]

    @property
    def load_buses(self) -> list[Bus]:
        return [b for b in self.buses if b.load is not None]


def _validate(net: NetworkModel) -> None:
    nb = net.n_bus
    ids = sorted(b.id for b in net.buses)
    if ids != list(range(nb)):
        raise NetworkValidationError("bus ids are not contiguous 0..N-1")
    slacks = [b for b in net.buses if b.kind == SLACK]
    if len(slacks) != 1:
        raise NetworkValidationError(
            f"network must have exactly one slack bus, found {len(slacks)}"
        )
    if slacks[0].pv_plant is not None or slacks[0].load is not None:
        raise NetworkValidationError("slack bus cannot carry a PV plant or load")
    for b in net.buses:
        if b.kind not in (SLACK, PQ):
            raise NetworkValidationError(f"bus {b.id}: unknown kind {b.kind!r}")
        if b.pv_plant is not None:
            if b.pv_plant.s_max <= 0:
                raise NetworkValidationError(f"bus {b.id}: plant s_max must be > 0")
            if not 0.0 < b.pv_plant.pf_min <= 1.0:
                raise NetworkValidationError(f"bus {b.id}: pf_min must lie in (0, 1]")
    for k, br in enumerate(net.branches):
        if not (0 <= br.from_bus < nb and 0 <= br.to_bus < nb):
            raise NetworkValidationError(f"branch {k}: endpoint not a bus id")
        if br.from_bus == br.to_bus:
            raise NetworkValidationError(f"branch {k}: self-loop")
        if br.r < 0 or br.x < 0 or (br.r <= 0 and br.x <= 0):
            raise NetworkValidationError(f"branch {k}: degenerate impedance")
    if not net.v_min < 1.0 < net.v_max:
        raise NetworkValidationError("voltage bounds must satisfy v_min < 1 < v_max")

    if len(net.branches) != nb - 1:
        raise NetworkValidationError("network not radial")
    adjacency: dict[int, list[int]] = {b.id: [] for b in net.buses}
    for br in net.branches:
        adjacency[br.from_bus].append(br.to_bus)
        adjacency[br.to_bus].append(br.from_bus)
    seen = {net.slack_id}
    stack = [net.slack_id]
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if len(seen) != nb:
        raise NetworkValidationError("network not radial")


def load_network(path: str | Path) -> NetworkModel:
    """Load and validate a network JSON file, converting to per-unit."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkParseError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc

    try:
        s_base_kva = float(doc["s_base_kva"])
        v_base_v = float(doc["v_base_v"])
        v_min = float(doc["v_min_pu"])
        v_max = float(doc["v_max_pu"])
        raw_buses = doc["buses"]
        raw_branches = doc["branches"]
    except KeyError as exc:
        raise NetworkParseError(f"{path}: missing top-level key {exc}") from exc

    if s_base_kva <= 0 or v_base_v <= 0:
        raise NetworkParseError(f"{path}: base quantities must be positive")
    z_base = v_base_v**2 / (s_base_kva * 1000.0)  # ohm
    base_kv = v_base_v / 1000.0

    buses = []
    try:
        for rb in raw_buses:
            pv = None
            if rb.get("pv") is not None:
                pv = PlantSpec(
                    s_max=float(rb["pv"]["s_max_kva"]) / s_base_kva,
                    pf_min=float(rb["pv"]["pf_min"]),
                )
            load = None
            if rb.get("load_profile_ref") is not None:
                load = LoadSpec(profile_ref=str(rb["load_profile_ref"]))
            buses.append(Bus(int(rb["id"]), str(rb["kind"]), base_kv, pv, load))
        branches = tuple(
            Branch(
                from_bus=int(rb["from"]),
                to_bus=int(rb["to"]),
                r=float(rb["r_ohm"]) / z_base,
                x=float(rb["x_ohm"]) / z_base,
                b_shunt=float(rb.get("b_uS", 0.0)) * 1e-6 * z_base,
            )
            for rb in raw_branches
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkParseError(f"{path}: malformed bus/branch entry: {exc}") from exc

    net = NetworkModel(
        buses=tuple(buses),
        branches=branches,
        s_base=s_base_kva / 1000.0,
        v_min=v_min,
        v_max=v_max,
    )
    _validate(net)
    return net


def build_ybus(net: NetworkModel) -> np.ndarray:
    """Nodal admittance matrix (complex, N x N) in per-unit."""
    nb = net.n_bus
    Y = np.zeros((nb, nb), dtype=complex)
    for br in net.branches:
        y = 1.0 / complex(br.r, br.x)
        i, k = br.from_bus, br.to_bus
        Y[i, k] -= y
        Y[k, i] -= y
        Y[i, i] += y + 1j * br.b_shunt / 2.0
        Y[k, k] += y + 1j * br.b_shunt / 2.0
    return Y
