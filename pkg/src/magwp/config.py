"""Run configuration files: flat ``key = value`` text with dotted sections.

Example::

    schema = 1
    experiment.id = trig2d
    experiment.alpha = 0.5
    eps = 1e-3
    d = 2
    init.q0 = 1 1
    init.p0 = 1 0
    init.Q0_re = 1 0 0 1      # row-major d x d block
    init.Q0_im = 0 0 0 0
    init.P0_re = 0 0 0 0
    init.P0_im = 1 0 0 1
    init.S0 = 0
    time.t0 = 0
    time.T = 10
    time.tau = 0.01
    scheme.name = symplectic2
    quad.N = 7
    output.every = 10
    output.path = trig2d.csv

Complex matrices are given as separate real and imaginary row-major blocks.
Unknown keys, missing required keys, and inconsistent dimensions are
configuration errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import BadParams, ConfigError, UnknownBuiltin
from .fields import DEFAULT_QUAD_N, FieldSet, builtin_param_names, make_builtin
from .packets import GaussianPacket, vectorize

SCHEMA_VERSION = 1

SCHEMES = ("boris", "boris_splitting", "symplectic2", "symplectic4")

# key -> (kind, required); kind in {int, float, floats, str}
_SCHEMA = {
    "schema": ("int", True),
    "experiment.id": ("str", True),
    "eps": ("float", True),
    "d": ("int", True),
    "init.q0": ("floats", True),
    "init.p0": ("floats", True),
    "init.Q0_re": ("floats", True),
    "init.Q0_im": ("floats", True),
    "init.P0_re": ("floats", True),
    "init.P0_im": ("floats", True),
    "init.S0": ("float", False),
    "time.t0": ("float", False),
    "time.T": ("float", True),
    "time.tau": ("float", True),
    "scheme.name": ("str", True),
    "quad.N": ("int", False),
    "output.every": ("int", False),
    "output.path": ("str", True),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration with the constructed field and initial packet."""

    field: FieldSet
    eps: float
    d: int
    packet: GaussianPacket
    t0: float
    T: float
    tau: float
    scheme: str
    quad_N: int
    output_every: int
    out_path: str
    experiment_id: str
    experiment_params: dict

    @property
    def n_steps(self) -> int:
        return int(round((self.T - self.t0) / self.tau))

    def initial_state(self):
        return vectorize(self.packet, t=self.t0)


def parse_kv(text: str) -> dict[str, str]:
    """Parse flat key = value lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        key, val = key.strip(), val.strip()
        if not key or not val:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = val
    return out


def _convert(key: str, kind: str, raw: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "floats":
            return np.array([float(tok) for tok in raw.split()])
        return raw
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} as {kind}") from None


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a configuration file."""
    text = Path(path).read_text()
    return config_from_text(text)


def config_from_text(text: str) -> RunConfig:
    kv = parse_kv(text)

    exp_id = kv.get("experiment.id")
    if exp_id is None:
        raise ConfigError("missing required key 'experiment.id'")
    try:
        exp_param_names = builtin_param_names(exp_id)
    except UnknownBuiltin as exc:
        raise ConfigError(str(exc)) from None

    values: dict[str, object] = {}
    for key, raw in kv.items():
        if key.startswith("experiment.") and key != "experiment.id":
            pname = key[len("experiment.") :]
            if pname not in exp_param_names:
                raise ConfigError(
                    f"unknown parameter {pname!r} for experiment {exp_id!r}"
                )
            vals = _convert(key, "floats", raw)
            values[key] = float(vals[0]) if vals.shape == (1,) else vals
            continue
        if key not in _SCHEMA:
            raise ConfigError(f"unknown configuration key {key!r}")
        kind, _ = _SCHEMA[key]
        values[key] = _convert(key, kind, raw)

    for key, (kind, required) in _SCHEMA.items():
        if required and key not in values:
            raise ConfigError(f"missing required key {key!r}")
    if values["schema"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema version {values['schema']}; expected {SCHEMA_VERSION}"
        )

    d = int(values["d"])
    eps = float(values["eps"])
    if eps <= 0:
        raise ConfigError("eps must be positive")

    params = {
        key[len("experiment.") :]: val
        for key, val in values.items()
        if key.startswith("experiment.") and key != "experiment.id"
    }
    if exp_id == "harmonic":
        params.setdefault("d", d)
    if exp_id == "linear_A":
        for mkey in ("MA", "V2"):
            if mkey in params:
                flat = np.atleast_1d(np.asarray(params[mkey], dtype=float))
                if flat.shape != (d * d,):
                    raise ConfigError(
                        f"experiment.{mkey}: expected {d * d} row-major entries"
                    )
                params[mkey] = flat.reshape(d, d)
    try:
        field = make_builtin(exp_id, **params)
    except BadParams as exc:
        raise ConfigError(str(exc)) from None
    if field.d != d:
        raise ConfigError(f"experiment {exp_id!r} has dimension {field.d}, config says d={d}")

    def matrix(key):
        flat = values[key]
        if flat.shape != (d * d,):
            raise ConfigError(f"key {key!r}: expected {d * d} entries, got {flat.shape[0]}")
        return flat.reshape(d, d)  # row-major

    q0, p0 = values["init.q0"], values["init.p0"]
    if q0.shape != (d,) or p0.shape != (d,):
        raise ConfigError(f"init.q0/init.p0 must have {d} entries")
    Q0 = matrix("init.Q0_re") + 1j * matrix("init.Q0_im")
    P0 = matrix("init.P0_re") + 1j * matrix("init.P0_im")
    try:
        packet = GaussianPacket(
            eps=eps, q=q0, p=p0, Q=Q0, P=P0, S=float(values.get("init.S0", 0.0))
        )
    except Exception as exc:
        raise ConfigError(f"invalid initial packet: {exc}") from None

    t0 = float(values.get("time.t0", 0.0))
    T = float(values["time.T"])
    tau = float(values["time.tau"])
    if tau <= 0:
        raise ConfigError("time.tau must be positive")
    if not T >= t0:
        raise ConfigError("time.T must be >= time.t0")
    span = T - t0
    if span > 0:
        ratio = span / tau
        if abs(ratio - round(ratio)) > 1e-12 * max(ratio, 1.0):
            raise ConfigError("time.tau must divide T - t0")

    scheme = values["scheme.name"]
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}; choose one of {SCHEMES}")

    quad_N = int(values.get("quad.N", DEFAULT_QUAD_N[exp_id]))
    if quad_N < 1:
        raise ConfigError("quad.N must be >= 1")
    every = int(values.get("output.every", 1))
    if every < 1:
        raise ConfigError("output.every must be >= 1")

    return RunConfig(
        field=field,
        eps=eps,
        d=d,
        packet=packet,
        t0=t0,
        T=T,
        tau=tau,
        scheme=scheme,
        quad_N=quad_N,
        output_every=every,
        out_path=str(values["output.path"]),
        experiment_id=exp_id,
        experiment_params=params,
    )


def fixture_path(name: str) -> Path:
    """Path of a packaged example configuration (without the .cfg suffix)."""
    ref = resources.files("magwp") / "configs" / f"{name}.cfg"
    with resources.as_file(ref) as p:
        return Path(p)


def fixture_names() -> list[str]:
    base = resources.files("magwp") / "configs"
    return sorted(p.name[: -len(".cfg")] for p in base.iterdir() if p.name.endswith(".cfg"))
