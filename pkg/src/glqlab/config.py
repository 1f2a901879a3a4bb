"""Plain-text run configuration: ``key = value`` lines.

Values are numbers, arithmetic expressions (``pi``, ``e``, ``sqrt``, ``exp``,
``sin``, ``cos`` are available), bracketed lists, nested bracketed lists for
matrices, bare words, or quoted strings (for paths). A value may continue over several lines while its
brackets are open. ``#`` starts a comment.

Example::

    source = matrices
    A = [[-1, 0],
         [0, -2]]
    B = [[1], [1]]
    C = [[1, 0]]
    z = [1, 0]
    x0 = [1, 1]
    horizons = [5, 10, 20]
    dt = 1e-3
"""

import ast
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .glq import GlqProblem
from .heat import HeatConfig, build_system, default_x0
from .randsys import random_glq

_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "sin": math.sin, "cos": math.cos}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}

MATRIX_KEYS = ("A", "B", "C", "K")
VECTOR_KEYS = ("z", "v")
SOURCES = ("matrices", "heat", "random")
X0_PRESETS = ("zero", "ones", "random", "heat")


class ConfigError(ValueError):
    """Malformed configuration; ``line`` is 1-based (0 when not tied to a line)."""

    def __init__(self, message, line=0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _eval(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Constant) and isinstance(node.value, str):
        return node.value
    if isinstance(node, ast.List):
        return [_eval(elt) for elt in node.elts]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval(node.operand))
    if isinstance(node, ast.Name):
        if node.id in _NAMES:
            return _NAMES[node.id]
        return node.id
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1:
        return _FUNCS[node.func.id](_eval(node.args[0]))
    raise ValueError(f"unsupported expression {ast.unparse(node)!r}")


def parse_value(text):
    """Evaluate one value with the restricted expression grammar."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text.strip()!r}") from exc
    return _eval(tree.body)


def parse_text(text):
    """Split config text into ``{key: (value, line)}``."""
    entries = {}
    pending = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if pending is not None:
            key, start, buf = pending
            buf.append(line)
            joined = " ".join(buf)
            if joined.count("[") <= joined.count("]"):
                pending = None
                entries[key] = (_parse_at(joined, start), start)
            continue
        if not line.strip():
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not key.replace("_", "").replace(".", "").isalnum():
            raise ConfigError(f"invalid key {key!r}", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        if value.count("[") > value.count("]"):
            pending = (key, lineno, [value])
            continue
        entries[key] = (_parse_at(value, lineno), lineno)
    if pending is not None:
        raise ConfigError(f"unterminated bracket in value of {pending[0]!r}", pending[1])
    return entries


def _parse_at(value, lineno):
    try:
        return parse_value(value)
    except (ValueError, TypeError, ZeroDivisionError, OverflowError) as exc:
        raise ConfigError(str(exc), lineno) from None


def _at(entries, key):
    """``(value, key, line)`` for the helper converters below."""
    value, line = entries[key]
    return value, key, line


def _matrix(value, key, line):
    if isinstance(value, float):
        value = [[value]]
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(f"{key} must be a bracketed list of rows", line)
    width = len(value[0])
    for i, row in enumerate(value):
        if len(row) != width:
            raise ConfigError(f"{key} row {i + 1} has {len(row)} entries, expected {width}", line)
        if not all(isinstance(x, float) for x in row):
            raise ConfigError(f"{key} row {i + 1} has a non-numeric entry", line)
    return np.array(value, dtype=float)


def _vector(value, key, line):
    if isinstance(value, float):
        value = [value]
    if not isinstance(value, list) or not all(isinstance(x, float) for x in value):
        raise ConfigError(f"{key} must be a bracketed list of numbers", line)
    return np.array(value, dtype=float)


def _number(value, key, line):
    if not isinstance(value, float):
        raise ConfigError(f"{key} must be a number", line)
    return value


def _word(value, key, line, allowed):
    if value not in allowed:
        raise ConfigError(f"{key} must be one of {', '.join(allowed)}; got {value!r}", line)
    return value


@dataclass
class RunConfig:
    """Parsed run configuration.

    ``problem`` is always populated; ``heat`` is set for heat sources so the
    demo commands can rebuild variants of the same configuration.
    """

    problem: GlqProblem
    horizons: list
    dt: float
    epsilon: float
    x0: np.ndarray
    seed: int = 0
    source: str = "matrices"
    heat: HeatConfig | None = None
    out: str | None = None
    x0_preset: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def T(self):
        return self.horizons[-1]


KNOWN_KEYS = {
    "source", "A", "B", "C", "K", "z", "v", "x0", "T", "horizons", "dt", "epsilon", "seed", "out",
    "c", "n_modes", "omega", "operator", "kappa", "z_coeffs", "v_coeffs", "n", "m", "p",
}


def build_config(entries, overrides=None):
    """Assemble a :class:`RunConfig` from parsed entries and CLI overrides."""
    overrides = overrides or {}
    for key, (_, line) in entries.items():
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", line)

    def get(key, default=None):
        return entries.get(key, (default, 0))

    source, line = get("source", "matrices")
    source = _word(source, "source", line, SOURCES)
    seed_val, line = get("seed", 0.0)
    seed = int(_number(seed_val, "seed", line))
    if overrides.get("seed") is not None:
        seed = int(overrides["seed"])

    heat = None
    if source == "matrices":
        missing = [k for k in ("A", "B", "C") if k not in entries]
        if missing:
            raise ConfigError(f"missing required key(s) {', '.join(missing)}")
        mats = {k: _matrix(*_at(entries, k)) for k in MATRIX_KEYS if k in entries}
        vecs = {k: _vector(*_at(entries, k)) for k in VECTOR_KEYS if k in entries}
        try:
            problem = GlqProblem.create(**mats, **vecs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    elif source == "heat":
        kw = {}
        if "c" in entries:
            kw["c"] = _number(*_at(entries, "c"))
        if "n_modes" in entries:
            kw["n_modes"] = int(_number(*_at(entries, "n_modes")))
        if "omega" in entries:
            om = _vector(*_at(entries, "omega"))
            if om.shape != (2,):
                raise ConfigError("omega must have two entries", entries["omega"][1])
            kw["omega"] = (float(om[0]), float(om[1]))
        if "operator" in entries:
            kw["operator_kind"] = _word(*_at(entries, "operator"), ("B1", "B2"))
        if "kappa" in entries:
            kw["kappa"] = _number(*_at(entries, "kappa"))
        if "z_coeffs" in entries:
            kw["z_coeffs"] = _vector(*_at(entries, "z_coeffs"))
        if "v_coeffs" in entries:
            kw["v_coeffs"] = _vector(*_at(entries, "v_coeffs"))
        try:
            heat = HeatConfig(**kw)
            problem = build_system(heat)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        dims = []
        for key in ("n", "m", "p"):
            val, line = get(key, 2.0)
            dims.append(int(_number(val, key, line)))
        if min(dims) < 1:
            raise ConfigError("n, m, p must be positive")
        problem = random_glq(np.random.default_rng(seed), *dims)

    if "horizons" in entries and "T" in entries:
        raise ConfigError("give either T or horizons, not both", entries["T"][1])
    if "horizons" in entries:
        horizons = [float(h) for h in _vector(*_at(entries, "horizons"))]
        line = entries["horizons"][1]
    else:
        val, line = get("T", 10.0)
        horizons = [_number(val, "T", line)]
    if not horizons or any(h <= 0 for h in horizons) or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ConfigError("horizons must be positive and increasing", line)

    val, line = get("dt", 1e-2)
    dt = _number(val, "dt", line)
    if overrides.get("dt") is not None:
        dt = float(overrides["dt"])
    if dt <= 0:
        raise ConfigError("dt must be positive", line)
    val, line = get("epsilon", 0.1)
    epsilon = _number(val, "epsilon", line)
    if overrides.get("epsilon") is not None:
        epsilon = float(overrides["epsilon"])
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive", line)

    preset = None
    val, line = get("x0", "ones" if source != "heat" else "heat")
    if isinstance(val, str):
        preset = _word(val, "x0", line, X0_PRESETS)
        x0 = _preset_x0(preset, problem.n, seed)
    else:
        x0 = _vector(val, "x0", line)
        if x0.shape != (problem.n,):
            raise ConfigError(f"x0 has {x0.size} entries, expected {problem.n}", line)

    out, _ = get("out", None)
    if overrides.get("out") is not None:
        out = overrides["out"]
    return RunConfig(problem, horizons, dt, epsilon, x0, seed, source, heat, out, preset)


def _preset_x0(name, n, seed):
    if name == "zero":
        return np.zeros(n)
    if name == "ones":
        return np.ones(n)
    if name == "heat":
        return default_x0(n)
    # offset the stream so x0 differs from the random problem draw
    return np.random.default_rng([seed, 1]).normal(size=n)


def load_config(path, overrides=None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return build_config(parse_text(text), overrides)


def loads_config(text, overrides=None):
    return build_config(parse_text(text), overrides)


def _fmt_number(x):
    return repr(float(x))


def _fmt_vector(vec):
    return "[" + ", ".join(_fmt_number(x) for x in np.ravel(vec)) + "]"


def _fmt_matrix(mat):
    rows = [_fmt_vector(row) for row in np.atleast_2d(mat)]
    return "[" + ",\n     ".join(rows) + "]"


def emit_config(problem, x0=None, horizons=None, dt=None, epsilon=None, seed=None):
    """Config text for an explicit-matrix problem; parses back to an equal problem.

    Numbers are written with ``repr``, the shortest string that round-trips
    a double exactly.
    """
    lines = ["source = matrices"]
    for key in MATRIX_KEYS:
        lines.append(f"{key} = {_fmt_matrix(getattr(problem, key))}")
    for key in VECTOR_KEYS:
        lines.append(f"{key} = {_fmt_vector(getattr(problem, key))}")
    if x0 is not None:
        lines.append(f"x0 = {_fmt_vector(x0)}")
    if horizons is not None:
        lines.append(f"horizons = {_fmt_vector(horizons)}")
    if dt is not None:
        lines.append(f"dt = {_fmt_number(dt)}")
    if epsilon is not None:
        lines.append(f"epsilon = {_fmt_number(epsilon)}")
    if seed is not None:
        lines.append(f"seed = {int(seed)}")
    return "\n".join(lines) + "\n"
