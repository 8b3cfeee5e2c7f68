"""Network realizations: configuration, cells, users and channel gains."""

import dataclasses
import enum
import io
import math
import typing
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from cellmatch import channel
from cellmatch.utility import DEVICE_CLASSES, DeviceClass

KMH = 1.0 / 3.6


@dataclass(frozen=True)
class Config:
    """All simulation parameters.

    Units follow the usual engineering conventions at this boundary (dBm,
    dB, km/h, ms); scenarios convert to SI and linear power on construction.
    """

    macro_radius: float = 1000.0
    num_picocells: int = 15
    num_users: int = 60
    pico_power: float = 30.0  # dBm
    macro_power: float = 46.0  # dBm
    bandwidth: float = 200e3  # Hz
    quota: int = 4
    noise_power: float = -121.0  # dBm
    min_sinr: float = 9.56  # dB, max-SINR admission floor
    tau_range: typing.Tuple[float, float] = (0.5, 5.0)  # ms
    speed_range: typing.Tuple[float, float] = (20.0, 40.0)  # km/h
    gamma: float = 1.0
    K: float = 1e6  # bps
    device_mix: typing.Tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)  # laptop, tablet, smartphone
    prep_time: float = 2.0  # s
    pathloss_exponent: float = 4.0
    ref_gain: float = 1e-3  # linear gain at 1 m
    monte_carlo_runs: int = 100
    rng_seed: int = 1
    pico_radius: float = 200.0  # m
    hf_ratio: float = 0.07  # r/R of every pico
    exit_ratio: float = 1.2  # r'/R for pico-to-pico handovers
    hf_threshold: float = 0.05
    laptop_shape: typing.Tuple[float, float, float] = (2.0, 2.0, 2.0)  # alpha, beta, lambda
    tablet_shape: typing.Tuple[float, float, float] = (1.0, 1.0, 1.0)
    smartphone_shape: typing.Tuple[float, float, float] = (0.5, 0.5, 0.5)
    fading: str = "rayleigh"
    nakagami_m: float = 2.0
    log_base: float = math.e
    load_sign: float = -1.0  # -1 rewards free capacity, +1 literal load cost
    coverage_gate: bool = True
    sinr_gate: bool = False  # picos only admit users at or above min_sinr
    user_ir: bool = True  # users only list picos they prefer to the macro
    baseline_quota: bool = True
    max_outer: int = 1000

    def __post_init__(self):
        for name in ("num_picocells", "num_users", "quota", "monte_carlo_runs", "max_outer"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.quota < 1:
            raise ValueError("quota must be >= 1")
        for name in ("macro_radius", "bandwidth", "K", "prep_time", "pico_radius", "ref_gain"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        lo, hi = self.speed_range
        if not 0 < lo <= hi:
            raise ValueError(f"speed_range must satisfy 0 < V_min <= V_max, got {self.speed_range}")
        lo, hi = self.tau_range
        if not 0 < lo <= hi:
            raise ValueError(f"tau_range must be a positive interval, got {self.tau_range}")
        if len(self.device_mix) != 3 or min(self.device_mix) < 0 or abs(sum(self.device_mix) - 1.0) > 1e-9:
            raise ValueError(f"device_mix must be 3 proportions summing to 1, got {self.device_mix}")
        if not 0 < self.hf_ratio < 1:
            raise ValueError("hf_ratio must lie in (0, 1)")
        if not self.exit_ratio > 1:
            raise ValueError("exit_ratio must be > 1")
        if not 0 <= self.hf_threshold <= 1:
            raise ValueError("hf_threshold must lie in [0, 1]")
        for name in ("laptop_shape", "tablet_shape", "smartphone_shape"):
            shape = getattr(self, name)
            if len(shape) != 3 or min(shape) <= 0:
                raise ValueError(f"{name} must be three positive numbers")
        if self.fading not in ("rayleigh", "nakagami"):
            raise ValueError(f"fading must be 'rayleigh' or 'nakagami', got {self.fading!r}")
        if self.load_sign not in (1.0, -1.0):
            raise ValueError("load_sign must be 1 or -1")
        if not (self.log_base > 0 and self.log_base != 1):
            raise ValueError("log_base must be positive and != 1")

    def shape(self, device_class):
        return getattr(self, f"{device_class.label}_shape")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def _parse_value(name, raw, typ):
    origin = typing.get_origin(typ)
    try:
        if origin is tuple:
            parts = [p for p in raw.replace("[", "").replace("]", "").split(",") if p.strip()]
            return tuple(float(eval_number(p)) for p in parts)
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(eval_number(raw))
        return raw
    except ValueError:
        raise ValueError(f"malformed value for {name}: {raw!r}") from None


def eval_number(text):
    text = text.strip()
    if text == "e":
        return math.e
    # allow simple fractions such as 1/3 in device_mix
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def load_config(source=""):
    """Parse flat ``key = value`` text into a :class:`Config`.

    Blank lines and ``#`` comments are ignored; tuple fields take
    comma-separated values. Absent keys keep their defaults.
    """
    fields = {f.name: f for f in dataclasses.fields(Config)}
    hints = typing.get_type_hints(Config)
    values = {}
    for lineno, line in enumerate(source.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, raw, hints[key])
    return Config(**values)


def dump_config(config):
    lines = []
    for f in dataclasses.fields(config):
        v = getattr(config, f.name)
        if isinstance(v, tuple):
            v = ",".join(repr(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


class Tier(enum.Enum):
    MACRO = "macro"
    PICO = "pico"


@dataclass(frozen=True)
class Cell:
    id: int
    tier: Tier
    position: typing.Tuple[float, float]
    power: float  # dBm
    coverage_radius: float
    hf_radius: float
    quota: int

    def __post_init__(self):
        if not 0 < self.hf_radius < self.coverage_radius:
            raise ValueError(f"cell {self.id}: need 0 < r < R")
        if self.quota < 1:
            raise ValueError(f"cell {self.id}: quota must be >= 1")


@dataclass(frozen=True)
class UserEquipment:
    id: int
    position: typing.Tuple[float, float]
    speed: float  # m/s
    device_class: DeviceClass
    tau: float  # ms
    directions: typing.Tuple[float, ...]  # entry angle per pico, radians
    shape: typing.Tuple[float, float, float]

    @property
    def screen(self):
        return self.device_class.screen

    @property
    def target_rate(self):
        return self.device_class.rate


MACRO = 0


@dataclass(frozen=True, eq=False)
class Scenario:
    """One network realization.

    ``cells[0]`` is the macro base station and ``cells[1:]`` the picos, so a
    cell id doubles as a column index into ``gains`` (users x cells).
    """

    config: Config
    cells: typing.Tuple[Cell, ...]
    users: typing.Tuple[UserEquipment, ...]
    gains: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.gains.shape != (len(self.users), len(self.cells)):
            raise ValueError("gain matrix must be users x cells")
        if self.gains.size and not (self.gains > 0).all():
            raise ValueError("all channel gains must be positive")

    @property
    def num_users(self):
        return len(self.users)

    @property
    def num_picos(self):
        return len(self.cells) - 1

    @property
    def picos(self):
        return self.cells[1:]

    @cached_property
    def cell_powers_mw(self):
        return channel.dbm_to_mw([c.power for c in self.cells])

    @cached_property
    def noise_mw(self):
        return float(channel.dbm_to_mw(self.config.noise_power))

    @cached_property
    def quotas(self):
        """Quota per cell id; the macro gets N so it never binds."""
        q = np.array([c.quota for c in self.cells], dtype=int)
        q[MACRO] = max(1, self.num_users)
        return q

    @cached_property
    def sinr(self):
        if not self.users:
            return np.zeros((0, len(self.cells)))
        return channel.sinr_from_gains(self.cell_powers_mw, self.gains, self.noise_mw)

    @cached_property
    def rates(self):
        return channel.shannon_rate(self.sinr, self.config.bandwidth)

    @cached_property
    def distances(self):
        u = np.array([x.position for x in self.users], dtype=float).reshape(-1, 2)
        c = np.array([x.position for x in self.cells], dtype=float).reshape(-1, 2)
        return np.hypot(u[:, None, 0] - c[None, :, 0], u[:, None, 1] - c[None, :, 1])

    def to_csv(self):
        """Deterministic text dump used for golden and determinism tests."""
        buf = io.StringIO()
        buf.write("# cells\nid,tier,x,y,power_dbm,R,r,quota\n")
        for c in self.cells:
            buf.write(f"{c.id},{c.tier.value},{c.position[0]!r},{c.position[1]!r},"
                      f"{c.power!r},{c.coverage_radius!r},{c.hf_radius!r},{c.quota}\n")
        buf.write("# users\nid,x,y,speed,device,tau,directions\n")
        for u in self.users:
            dirs = ";".join(repr(float(t)) for t in u.directions)
            buf.write(f"{u.id},{u.position[0]!r},{u.position[1]!r},{u.speed!r},"
                      f"{u.device_class.label},{u.tau!r},{dirs}\n")
        buf.write("# gains\n")
        for row in self.gains:
            buf.write(",".join(repr(float(g)) for g in row) + "\n")
        return buf.getvalue()


def _uniform_disk(rng, n, radius):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def generate_scenario(config, seed):
    """Draw one realization; identical for identical ``(config, seed)``."""
    rng = np.random.default_rng(seed)
    P, N = config.num_picocells, config.num_users

    cells = [Cell(MACRO, Tier.MACRO, (0.0, 0.0), config.macro_power,
                  config.macro_radius, config.hf_ratio * config.macro_radius, max(1, N))]
    for k, (x, y) in enumerate(_uniform_disk(rng, P, config.macro_radius), 1):
        cells.append(Cell(k, Tier.PICO, (float(x), float(y)), config.pico_power,
                          config.pico_radius, config.hf_ratio * config.pico_radius, config.quota))

    positions = _uniform_disk(rng, N, config.macro_radius)
    speeds = rng.uniform(*config.speed_range, N) * KMH
    taus = rng.uniform(*config.tau_range, N)
    kinds = rng.choice(len(DEVICE_CLASSES), size=N, p=np.asarray(config.device_mix) / sum(config.device_mix))
    half = math.pi / 2
    directions = rng.uniform(-half, half, (N, P))
    directions[directions <= -half] = np.nextafter(-half, 0.0)

    users = []
    for i in range(N):
        dc = DEVICE_CLASSES[kinds[i]]
        users.append(UserEquipment(
            id=i,
            position=(float(positions[i, 0]), float(positions[i, 1])),
            speed=float(speeds[i]),
            device_class=dc,
            tau=float(taus[i]),
            directions=tuple(float(t) for t in directions[i]),
            shape=tuple(config.shape(dc)),
        ))

    cpos = np.array([c.position for c in cells])
    d = np.hypot(positions[:, None, 0] - cpos[None, :, 0], positions[:, None, 1] - cpos[None, :, 1])
    fading = channel.sample_fading(rng, size=(N, P + 1), kind=config.fading, m=config.nakagami_m)
    gains = np.asarray(channel.path_gain(d, config.pathloss_exponent, config.ref_gain)).reshape(N, P + 1) * fading
    # exponential draws of exactly 0 are possible in principle
    gains = np.maximum(gains, np.finfo(float).tiny)
    return Scenario(config, tuple(cells), tuple(users), gains)
