"""Scenario files: flat ``key = value`` sections parsed with configparser.

Example::

    [grid]
    d = 1
    n = 128

    [physics]
    m = 1.0
    alpha_list = 0.5, 1.0
    t_list = 0.1, 1.0

    [potential]
    kind = random
    count = 3

    [states]
    kind = random_bump
    count = 5

    [suites]
    names = kato, diamagnetic

    [run]
    seed = 0
"""

import configparser
from dataclasses import asdict, dataclass, field
import hashlib
import json
import math

import numpy as np

from .lattice import LatticeGrid, VectorPotentialSpec
from .verify import STATE_KINDS, StateSpec

__all__ = ["ScenarioError", "Scenario", "SUITES", "parse_scenario", "load_scenario"]

SUITES = (
    "kato",
    "difference_quotient",
    "epsilon",
    "diamagnetic",
    "subordination",
    "commutator",
    "alpha_limit",
    "mass_limit",
    "potential_bound",
    "heat_bounds",
    "fractional_bound",
    "quantization",
    "kernels",
    "levy",
    "resolvent",
)

POTENTIAL_KINDS = ("zero", "random", "linear")
STATE_FAMILY = STATE_KINDS + ("random_bump",)

_KNOWN = {
    "grid": {"d", "n", "box_length"},
    "physics": {"m", "alpha_list", "t_list"},
    "potential": {"kind", "count", "seed", "cutoff", "amplitude", "matrix"},
    "states": {"kind", "count", "width", "momentum", "center", "cutoff"},
    "suites": {"names"},
    "tolerances": set(SUITES),
    "kernels": {"radii"},
    "run": {"seed"},
}


class ScenarioError(ValueError):
    """Malformed scenario; the message names the file, line and field."""


@dataclass
class Scenario:
    d: int = 1
    n: int = 128
    box_length: float = 2.0 * math.pi
    m: float = 1.0
    alpha_list: list = field(default_factory=lambda: [1.0])
    t_list: list = field(default_factory=lambda: [0.1, 1.0])
    potential_kind: str = "random"
    potential_count: int = 3
    potential_seed: int = 1
    potential_cutoff: int = 2
    potential_amplitude: float = 1.0
    potential_matrix: list = None
    state_kind: str = "random_bump"
    state_count: int = 5
    state_width: float = 0.4
    state_momentum: list = None
    state_center: list = None
    state_cutoff: int = 3
    suites: list = field(default_factory=lambda: list(SUITES))
    tolerances: dict = field(default_factory=dict)
    radii: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    seed: int = 0
    source: str = "<string>"

    def grid(self, n=None):
        return LatticeGrid(self.d, self.n if n is None else n, self.box_length)

    def potentials(self):
        """The scenario's vector potentials, seeded from the run seed."""
        if self.potential_kind == "zero":
            return [VectorPotentialSpec.zero(self.d)]
        if self.potential_kind == "linear":
            return [VectorPotentialSpec.linear(np.array(self.potential_matrix, dtype=float))]
        base = 1000 * self.seed + self.potential_seed
        return [
            VectorPotentialSpec.random(self.d, self.box_length, base + k,
                                       self.potential_cutoff, self.potential_amplitude)
            for k in range(self.potential_count)
        ]

    def states(self):
        base = 1000 * self.seed
        if self.state_kind == "random_bump":
            return [StateSpec.random_bump(self.d, base + i, self.box_length)
                    for i in range(self.state_count)]
        out = []
        for i in range(self.state_count):
            out.append(StateSpec(
                self.state_kind,
                tuple(self.state_center or ()),
                self.state_width,
                tuple(self.state_momentum or ()),
                seed=base + i,
                cutoff=self.state_cutoff,
            ))
        return out

    def to_dict(self):
        rec = asdict(self)
        rec.pop("source")
        return rec

    def digest(self):
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _line_of(text, section, key):
    current = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
        elif current == section and line.split("=", 1)[0].strip() == key:
            return i
    return 0


def _floats(value):
    return [float(v) for v in value.replace(";", ",").split(",") if v.strip()]


def _matrix(value):
    rows = [r for r in value.split(";") if r.strip()]
    return [[float(x) for x in r.replace(",", " ").split()] for r in rows]


def parse_scenario(text, source="<string>"):
    """Parse scenario text into a validated :class:`Scenario`."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"{source}: {exc}") from None

    def fail(section, key, msg):
        line = _line_of(text, section, key)
        where = f"{source}:{line}" if line else source
        raise ScenarioError(f"{where}: [{section}] {key}: {msg}")

    for section in cp.sections():
        if section not in _KNOWN:
            raise ScenarioError(f"{source}: unknown section [{section}]")
        for key in cp[section]:
            if key not in _KNOWN[section]:
                fail(section, key, "unknown field")

    sc = Scenario(source=source)
    conv = {
        ("grid", "d"): ("d", int),
        ("grid", "n"): ("n", int),
        ("grid", "box_length"): ("box_length", float),
        ("physics", "m"): ("m", float),
        ("physics", "alpha_list"): ("alpha_list", _floats),
        ("physics", "t_list"): ("t_list", _floats),
        ("potential", "kind"): ("potential_kind", str.strip),
        ("potential", "count"): ("potential_count", int),
        ("potential", "seed"): ("potential_seed", int),
        ("potential", "cutoff"): ("potential_cutoff", int),
        ("potential", "amplitude"): ("potential_amplitude", float),
        ("potential", "matrix"): ("potential_matrix", _matrix),
        ("states", "kind"): ("state_kind", str.strip),
        ("states", "count"): ("state_count", int),
        ("states", "width"): ("state_width", float),
        ("states", "momentum"): ("state_momentum", _floats),
        ("states", "center"): ("state_center", _floats),
        ("states", "cutoff"): ("state_cutoff", int),
        ("kernels", "radii"): ("radii", _floats),
        ("run", "seed"): ("seed", int),
    }
    for (section, key), (attr, fn) in conv.items():
        if cp.has_option(section, key):
            try:
                setattr(sc, attr, fn(cp[section][key]))
            except ValueError as exc:
                fail(section, key, f"cannot parse {cp[section][key]!r} ({exc})")
    if cp.has_option("suites", "names"):
        names = [s.strip() for s in cp["suites"]["names"].split(",") if s.strip()]
        for s in names:
            if s not in SUITES:
                fail("suites", "names", f"unknown suite {s!r}; known: {', '.join(SUITES)}")
        sc.suites = names
    if cp.has_section("tolerances"):
        for key, val in cp["tolerances"].items():
            try:
                sc.tolerances[key] = float(val)
            except ValueError:
                fail("tolerances", key, f"cannot parse {val!r}")

    if sc.d not in (1, 2, 3):
        fail("grid", "d", "must be 1, 2 or 3")
    if sc.n < 8:
        fail("grid", "n", "need at least 8 points per axis")
    if sc.m < 0:
        fail("physics", "m", "must be nonnegative")
    if not sc.alpha_list or any(not 0 < a <= 1 for a in sc.alpha_list):
        fail("physics", "alpha_list", "orders must lie in (0, 1]")
    if sc.m == 0 and any(a < 1 for a in sc.alpha_list):
        fail("physics", "alpha_list", "orders below 1 need m > 0")
    if not sc.t_list or any(t <= 0 for t in sc.t_list):
        fail("physics", "t_list", "times must be positive")
    if sc.potential_kind not in POTENTIAL_KINDS:
        fail("potential", "kind", f"expected one of {', '.join(POTENTIAL_KINDS)}")
    if sc.potential_kind == "linear":
        mat = sc.potential_matrix
        if mat is None or len(mat) != sc.d or any(len(r) != sc.d for r in mat):
            fail("potential", "matrix", f"linear potential needs a {sc.d}x{sc.d} matrix")
    if sc.state_kind not in STATE_FAMILY:
        fail("states", "kind", f"expected one of {', '.join(STATE_FAMILY)}")
    if sc.state_count < 1:
        fail("states", "count", "need at least one state")
    return sc


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    return parse_scenario(text, source=str(path))
