"""World model for an energy-harvesting sensor field.

A :class:`Scenario` holds everything the planner needs to know about the
field: candidate sensing locations, source positions, the fusion centre,
harvesting base stations, the sensor-type and bandwidth catalogues, the
time-frequency grid, budgets and the source priors.  All values are kept in
SI units; dB quantities are converted once, at parse time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

BOLTZMANN = 1.3807e-23  # J/K
DEFAULT_TEMPERATURE = 290.0  # K

TOP_LEVEL_KEYS = (
    "field", "locations", "sources", "fc", "base_stations", "sensor_types",
    "bandwidths", "grid", "budgets", "noise", "static_prior", "dynamic_prior",
)


class ScenarioError(ValueError):
    """Raised for unparsable documents or violated scenario invariants.

    ``field`` names the offending entry using dotted paths such as
    ``dynamic_prior.a`` or ``sensor_types[2].cost``.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


@dataclass(frozen=True)
class SensorType:
    cost: float
    eh_efficiency: float
    battery_cap: float  # W


@dataclass(frozen=True)
class BaseStation:
    position: tuple[float, float]
    power: float  # W


@dataclass(frozen=True)
class Bandwidth:
    hz: float
    channels: int


@dataclass(frozen=True)
class ResourceGrid:
    T: float
    W: float
    N_T: int
    N_F: int
    modulation_factor: float = 1.0

    @property
    def N(self) -> int:
        return self.N_T * self.N_F

    @property
    def tau0(self) -> float:
        return self.T / self.N_T

    @property
    def w0(self) -> float:
        return self.W / self.N_F


@dataclass(frozen=True)
class Budgets:
    cost_cap: float
    bandwidth_cap: float
    channel_cap: int


@dataclass(frozen=True)
class DynamicPrior:
    a: float
    process_var: float
    initial_mean: float = 0.0

    @property
    def stationary_var(self) -> float:
        return self.process_var / (1.0 - self.a ** 2)


@dataclass(frozen=True)
class Scenario:
    field_size: tuple[float, float]
    locations: np.ndarray  # (L, 2)
    sources: np.ndarray  # (m, 2)
    fc: tuple[float, float]
    base_stations: tuple[BaseStation, ...]
    solar_floor: float  # W
    path_loss_exponent: float
    diffusion: tuple[float, float, float]
    sensor_types: tuple[SensorType, ...]
    bandwidths: tuple[Bandwidth, ...]
    grid: ResourceGrid
    budgets: Budgets
    measurement_var: float
    static_prior: np.ndarray  # (m, m)
    dynamic_prior: DynamicPrior
    temperature: float = DEFAULT_TEMPERATURE
    receiver_noise: float | None = None  # W per base channel; overrides k*T*w0
    name: str = ""

    def __post_init__(self):
        for arr in (self.locations, self.sources, self.static_prior):
            arr.setflags(write=False)

    @property
    def L(self) -> int:
        return self.locations.shape[0]

    @property
    def m(self) -> int:
        return self.sources.shape[0]

    @property
    def K(self) -> int:
        """Number of real sensor types (the auxiliary type excluded)."""
        return len(self.sensor_types) - 1

    @property
    def B(self) -> int:
        return len(self.bandwidths)

    @property
    def costs(self) -> np.ndarray:
        return np.array([t.cost for t in self.sensor_types], dtype=float)

    @property
    def widths(self) -> np.ndarray:
        return np.array([b.hz for b in self.bandwidths], dtype=float)

    @property
    def channel_counts(self) -> np.ndarray:
        return np.array([b.channels for b in self.bandwidths], dtype=int)

    @property
    def receiver_noise_var(self) -> float:
        if self.receiver_noise is not None:
            return self.receiver_noise
        return BOLTZMANN * self.temperature * self.grid.w0

    @property
    def effective_temperature(self) -> float:
        """Temperature that reproduces the receiver noise over one base channel."""
        return self.receiver_noise_var / (BOLTZMANN * self.grid.w0)

    def with_changes(self, **changes) -> "Scenario":
        from dataclasses import replace
        return replace(self, **changes)


# ---------------------------------------------------------------------------
# geometry-derived physical quantities

def _distance(p, q) -> float:
    return math.hypot(float(p[0]) - float(q[0]), float(p[1]) - float(q[1]))


def channel_gain(p_l, p_fc, alpha: float) -> float:
    """Path-loss gain ``d(p_l, p_fc) ** -alpha``."""
    d = _distance(p_l, p_fc)
    if d == 0.0:
        raise ValueError("sensor location coincides with the fusion centre")
    return d ** (-alpha)


def measurement_gain(p_l, source, beta1: float, beta2: float, beta3: float) -> float:
    """Diffusion gain from a source to a sensing location, cut off beyond ``beta3``."""
    d = _distance(p_l, source)
    if d > beta3:
        return 0.0
    return beta1 * math.exp(-d / beta2)


def harvested_power(p_l, base_stations: Sequence[BaseStation], solar_floor: float,
                    alpha: float) -> float:
    """Average harvestable power at ``p_l``: RF from every base station plus solar."""
    rho = solar_floor
    for bs in base_stations:
        d = _distance(p_l, bs.position)
        if d == 0.0:
            raise ValueError(f"location {tuple(p_l)} coincides with a base station")
        rho += bs.power * d ** (-alpha)
    return rho


def node_power(rho: float, sensor_type: SensorType) -> float:
    return min(rho * sensor_type.eh_efficiency, sensor_type.battery_cap)


def channel_gains(scenario: Scenario) -> np.ndarray:
    return np.array([channel_gain(p, scenario.fc, scenario.path_loss_exponent)
                     for p in scenario.locations])


def measurement_gains(scenario: Scenario) -> np.ndarray:
    """Regressor matrix, one row ``h_l`` per location, shape (L, m)."""
    b1, b2, b3 = scenario.diffusion
    return np.array([[measurement_gain(p, s, b1, b2, b3) for s in scenario.sources]
                     for p in scenario.locations]).reshape(scenario.L, scenario.m)


def harvested_powers(scenario: Scenario) -> np.ndarray:
    return np.array([harvested_power(p, scenario.base_stations, scenario.solar_floor,
                                     scenario.path_loss_exponent)
                     for p in scenario.locations])


def node_powers(scenario: Scenario) -> np.ndarray:
    """Transmit power P[l, k] for every location and sensor type, shape (L, K+1)."""
    rho = harvested_powers(scenario)
    return np.array([[node_power(r, t) for t in scenario.sensor_types] for r in rho])


def uniform_grid(field_size: tuple[float, float], nx: int, ny: int) -> np.ndarray:
    """Cell-centred ``nx`` by ``ny`` lattice covering the field."""
    xs = (np.arange(nx) + 0.5) * field_size[0] / nx
    ys = (np.arange(ny) + 0.5) * field_size[1] / ny
    return np.array([(x, y) for y in ys for x in xs], dtype=float)


# ---------------------------------------------------------------------------
# parsing

def parse_power(value: Any, where: str) -> float:
    """Convert ``{"w": x}``, ``{"dbm": x}`` or ``{"db": x}`` (dBW) to watts."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, dict) or len(value) != 1:
        raise ScenarioError("power must be one of {'w': x}, {'dbm': x}, {'db': x}", where)
    (unit, x), = value.items()
    if not isinstance(x, (int, float)) or isinstance(x, bool):
        raise ScenarioError("power value must be a number", where)
    unit = unit.lower()
    if unit == "w":
        return float(x)
    if unit == "dbm":
        return 10.0 ** ((x - 30.0) / 10.0)
    if unit == "db":
        return 10.0 ** (x / 10.0)
    raise ScenarioError(f"unknown power unit {unit!r}", where)


def _require(doc: dict, key: str, where: str = ""):
    if key not in doc:
        raise ScenarioError("missing required key", f"{where}{key}")
    return doc[key]


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioError("expected a number", where)
    if not math.isfinite(x):
        raise ScenarioError("must be finite", where)
    return float(x)


def _integer(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or int(x) != x:
        raise ScenarioError("expected an integer", where)
    return int(x)


def _point(x, where: str) -> tuple[float, float]:
    if not isinstance(x, (list, tuple)) or len(x) != 2:
        raise ScenarioError("expected a 2-D point [x, y]", where)
    return (_number(x[0], f"{where}[0]"), _number(x[1], f"{where}[1]"))


def _points(x, where: str, allow_empty: bool = False) -> np.ndarray:
    if isinstance(x, dict) and "grid" in x:
        g = x["grid"]
        return None, (_integer(g[0], f"{where}.grid[0]"), _integer(g[1], f"{where}.grid[1]"))
    if not isinstance(x, list) or (not x and not allow_empty):
        raise ScenarioError("expected a non-empty list of points", where)
    pts = [_point(p, f"{where}[{i}]") for i, p in enumerate(x)]
    return np.array(pts, dtype=float).reshape(len(pts), 2), None


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    for key in TOP_LEVEL_KEYS:
        _require(doc, key)

    fsize = _point(doc["field"], "field")
    if fsize[0] <= 0 or fsize[1] <= 0:
        raise ScenarioError("field dimensions must be positive", "field")

    locations, grid_spec = _points(doc["locations"], "locations")
    if grid_spec is not None:
        locations = uniform_grid(fsize, *grid_spec)
    sources, _ = _points(doc["sources"], "sources")
    fc = _point(doc["fc"], "fc")

    bs_doc = doc["base_stations"]
    if isinstance(bs_doc, list):
        bs_doc = {"stations": bs_doc}
    stations = []
    for i, s in enumerate(bs_doc.get("stations", [])):
        where = f"base_stations.stations[{i}]"
        stations.append(BaseStation(_point(_require(s, "position", where + "."), where + ".position"),
                                    parse_power(_require(s, "power", where + "."), where + ".power")))
    solar = parse_power(bs_doc.get("solar_floor", {"w": 0.0}), "base_stations.solar_floor")

    prop = doc.get("propagation", {})
    alpha = _number(prop.get("path_loss_exponent", 2.0), "propagation.path_loss_exponent")
    diff = prop.get("diffusion", {"beta1": 10.0, "beta2": 100.0, "beta3": 250.0})
    betas = tuple(_number(_require(diff, k, "propagation.diffusion."), f"propagation.diffusion.{k}")
                  for k in ("beta1", "beta2", "beta3"))

    types = []
    for i, t in enumerate(_require(doc, "sensor_types")):
        where = f"sensor_types[{i}]"
        types.append(SensorType(
            _number(_require(t, "cost", where + "."), where + ".cost"),
            _number(_require(t, "eh_efficiency", where + "."), where + ".eh_efficiency"),
            parse_power(_require(t, "battery_cap", where + "."), where + ".battery_cap"),
        ))

    bands = []
    for i, b in enumerate(doc["bandwidths"]):
        where = f"bandwidths[{i}]"
        bands.append(Bandwidth(_number(_require(b, "hz", where + "."), where + ".hz"),
                               _integer(_require(b, "channels", where + "."), where + ".channels")))

    g = doc["grid"]
    grid = ResourceGrid(
        T=_number(_require(g, "T", "grid."), "grid.T"),
        W=_number(_require(g, "W", "grid."), "grid.W"),
        N_T=_integer(_require(g, "N_T", "grid."), "grid.N_T"),
        N_F=_integer(_require(g, "N_F", "grid."), "grid.N_F"),
        modulation_factor=_number(g.get("modulation_factor", 1.0), "grid.modulation_factor"),
    )

    bd = doc["budgets"]
    budgets = Budgets(
        cost_cap=_number(_require(bd, "cost_cap", "budgets."), "budgets.cost_cap"),
        bandwidth_cap=_number(bd.get("bandwidth_cap", grid.W), "budgets.bandwidth_cap"),
        channel_cap=_integer(bd.get("channel_cap", grid.N_T * grid.N_F), "budgets.channel_cap"),
    )

    nz = doc["noise"]
    sigma_v2 = _number(_require(nz, "measurement_var", "noise."), "noise.measurement_var")
    temperature = _number(nz.get("temperature", DEFAULT_TEMPERATURE), "noise.temperature")
    receiver_noise = None
    if "receiver_noise" in nz:
        receiver_noise = parse_power(nz["receiver_noise"], "noise.receiver_noise")

    sp = doc["static_prior"]
    try:
        prior = np.array(sp, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError("expected a square numeric matrix", "static_prior") from None

    dp = doc["dynamic_prior"]
    dyn = DynamicPrior(
        a=_number(_require(dp, "a", "dynamic_prior."), "dynamic_prior.a"),
        process_var=_number(_require(dp, "process_var", "dynamic_prior."), "dynamic_prior.process_var"),
        initial_mean=_number(dp.get("initial_mean", 0.0), "dynamic_prior.initial_mean"),
    )

    scenario = Scenario(
        field_size=fsize, locations=locations, sources=sources, fc=fc,
        base_stations=tuple(stations), solar_floor=solar, path_loss_exponent=alpha,
        diffusion=betas, sensor_types=tuple(types), bandwidths=tuple(bands), grid=grid,
        budgets=budgets, measurement_var=sigma_v2, static_prior=prior, dynamic_prior=dyn,
        temperature=temperature, receiver_noise=receiver_noise, name=str(doc.get("name", "")),
    )
    validate(scenario)
    return scenario


def load_scenario(text: str) -> Scenario:
    """Parse and validate a JSON scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise ScenarioError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: "
                            f"{exc.msg}\n    {context}") from None
    return scenario_from_dict(doc)


def read_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def validate(s: Scenario) -> None:
    """Check every scenario invariant, raising :class:`ScenarioError` on the first breach."""
    if s.L < 1:
        raise ScenarioError("need at least one candidate location", "locations")
    if s.m < 1:
        raise ScenarioError("need at least one source", "sources")
    if not s.path_loss_exponent > 0:
        raise ScenarioError("must be positive", "propagation.path_loss_exponent")
    for name, beta in zip(("beta1", "beta2", "beta3"), s.diffusion):
        if not beta > 0:
            raise ScenarioError("must be positive", f"propagation.diffusion.{name}")
    if s.solar_floor < 0:
        raise ScenarioError("must be nonnegative", "base_stations.solar_floor")
    for i, bs in enumerate(s.base_stations):
        if bs.power < 0:
            raise ScenarioError("must be nonnegative", f"base_stations.stations[{i}].power")

    if len(s.sensor_types) < 1:
        raise ScenarioError("catalogue must contain the auxiliary type", "sensor_types")
    t0 = s.sensor_types[0]
    if (t0.cost, t0.eh_efficiency, t0.battery_cap) != (0.0, 0.0, 0.0):
        raise ScenarioError("auxiliary type must have zero cost, efficiency and capacity",
                            "sensor_types[0]")
    for i, t in enumerate(s.sensor_types):
        for attr in ("cost", "eh_efficiency", "battery_cap"):
            if getattr(t, attr) < 0:
                raise ScenarioError("must be nonnegative", f"sensor_types[{i}].{attr}")

    if s.B < 1:
        raise ScenarioError("need at least one bandwidth", "bandwidths")
    for i, b in enumerate(s.bandwidths):
        if not b.hz > 0:
            raise ScenarioError("must be positive", f"bandwidths[{i}].hz")
        if b.channels < 1:
            raise ScenarioError("must be a positive integer", f"bandwidths[{i}].channels")

    g = s.grid
    if not g.T > 0:
        raise ScenarioError("must be positive", "grid.T")
    if not g.W > 0:
        raise ScenarioError("must be positive", "grid.W")
    if g.N_T < 1 or g.N_F < 1:
        raise ScenarioError("channel counts must be positive", "grid.N_T" if g.N_T < 1 else "grid.N_F")
    if not g.modulation_factor > 0:
        raise ScenarioError("must be positive", "grid.modulation_factor")
    for i, b in enumerate(s.bandwidths):
        expected = g.W * b.channels / g.N
        if not math.isclose(b.hz, expected, rel_tol=1e-9):
            raise ScenarioError(f"w_b = {b.hz} Hz disagrees with W*N_b/N = {expected} Hz",
                                f"bandwidths[{i}]")

    bd = s.budgets
    if bd.cost_cap < 0:
        raise ScenarioError("must be nonnegative", "budgets.cost_cap")
    if not bd.bandwidth_cap > 0:
        raise ScenarioError("must be positive", "budgets.bandwidth_cap")
    if bd.channel_cap < 1:
        raise ScenarioError("must be at least 1", "budgets.channel_cap")

    if not s.measurement_var > 0:
        raise ScenarioError("must be positive", "noise.measurement_var")
    if not s.temperature > 0:
        raise ScenarioError("must be positive", "noise.temperature")
    if s.receiver_noise is not None and s.receiver_noise < 0:
        raise ScenarioError("must be nonnegative", "noise.receiver_noise")

    P = s.static_prior
    if P.shape != (s.m, s.m):
        raise ScenarioError(f"expected a {s.m}x{s.m} matrix, got shape {P.shape}", "static_prior")
    if not np.all(np.isfinite(P)) or not np.allclose(P, P.T, rtol=0, atol=1e-12 * max(1.0, np.abs(P).max())):
        raise ScenarioError("must be symmetric", "static_prior")
    try:
        np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        raise ScenarioError("must be positive definite", "static_prior") from None

    dp = s.dynamic_prior
    if not abs(dp.a) < 1:
        raise ScenarioError("|a| must be below 1 for a steady state", "dynamic_prior.a")
    if not dp.process_var > 0:
        raise ScenarioError("must be positive", "dynamic_prior.process_var")

    fc = s.fc
    for i, p in enumerate(s.locations):
        if _distance(p, fc) == 0.0:
            raise ScenarioError("coincides with the fusion centre", f"locations[{i}]")
        for j, bs in enumerate(s.base_stations):
            if _distance(p, bs.position) == 0.0:
                raise ScenarioError(f"coincides with base station {j}", f"locations[{i}]")


# ---------------------------------------------------------------------------
# serialisation

def scenario_to_dict(s: Scenario) -> dict:
    doc = {
        "name": s.name,
        "field": list(s.field_size),
        "locations": s.locations.tolist(),
        "sources": s.sources.tolist(),
        "fc": list(s.fc),
        "base_stations": {
            "solar_floor": {"w": s.solar_floor},
            "stations": [{"position": list(b.position), "power": {"w": b.power}}
                         for b in s.base_stations],
        },
        "propagation": {
            "path_loss_exponent": s.path_loss_exponent,
            "diffusion": dict(zip(("beta1", "beta2", "beta3"), s.diffusion)),
        },
        "sensor_types": [{"cost": t.cost, "eh_efficiency": t.eh_efficiency,
                          "battery_cap": {"w": t.battery_cap}} for t in s.sensor_types],
        "bandwidths": [{"hz": b.hz, "channels": b.channels} for b in s.bandwidths],
        "grid": {"T": s.grid.T, "W": s.grid.W, "N_T": s.grid.N_T, "N_F": s.grid.N_F,
                 "modulation_factor": s.grid.modulation_factor},
        "budgets": {"cost_cap": s.budgets.cost_cap, "bandwidth_cap": s.budgets.bandwidth_cap,
                    "channel_cap": s.budgets.channel_cap},
        "noise": {"measurement_var": s.measurement_var, "temperature": s.temperature},
        "static_prior": s.static_prior.tolist(),
        "dynamic_prior": {"a": s.dynamic_prior.a, "process_var": s.dynamic_prior.process_var,
                          "initial_mean": s.dynamic_prior.initial_mean},
    }
    if s.receiver_noise is not None:
        doc["noise"]["receiver_noise"] = {"w": s.receiver_noise}
    return doc


def serialize(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)


def reference_path(name: str):
    """Path of a bundled reference scenario (``reference_static``, ``reference_dynamic``, ...)."""
    from importlib import resources
    return resources.files("sensornet") / "data" / f"{name}.json"


def reference_scenario(name: str = "reference_static") -> Scenario:
    return load_scenario(reference_path(name).read_text(encoding="utf-8"))
