"""Run configuration: JSON schema, defaults and consistency rules."""

from dataclasses import asdict, dataclass, field, fields
import json
import math
import warnings

import jsonschema

from .chain import LaserGeometry, lamb_dicke_parameter
from .errors import ConfigError
from .hamiltonians import ChainConfig, PulseSpec, Sideband, Tier
from .integrator import PropagationSettings

PROTOCOLS = ("fock_blue", "fock_red", "cycle_blue_carrier", "cycle_blue_red")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["N", "delta0T"],
    "anyOf": [{"required": ["g0T"]}, {"required": ["Omega0T"]}],
    "properties": {
        "N": {"type": "integer", "minimum": 1},
        "eta": {"type": "number", "minimum": 0},
        "g0T": {"type": "number", "minimum": 0},
        "Omega0T": {"type": "number", "minimum": 0},
        "delta0T": _NUM,
        "chirp": {"enum": [1, -1]},
        "window": _POS,
        "nuT": _POS,
        "m_max": {"type": "integer", "minimum": 0},
        "buffer": {"type": "integer", "minimum": 5},
        "tier": {"enum": [t.value for t in Tier]},
        "sideband": {"enum": [Sideband.BLUE.value, Sideband.RED.value]},
        "protocol": {"enum": list(PROTOCOLS)},
        "k": {"type": "integer", "minimum": 0},
        "rtol": _POS,
        "atol": _POS,
        "sample_spacing": _POS,
        "steps_per_period": {"type": "integer", "minimum": 1},
        "trajectory_csv": {"type": ["string", "null"]},
        "summary_json": {"type": ["string", "null"]},
        "si": {
            "type": "object",
            "additionalProperties": False,
            "required": ["nu_hz", "mass_kg", "wavelength_m", "theta_rad"],
            "properties": {
                "nu_hz": _POS,
                "mass_kg": _POS,
                "wavelength_m": _POS,
                "theta_rad": {"type": "number", "minimum": 0, "maximum": math.pi / 2},
                "pulse_width_s": _POS,
            },
        },
    },
}


@dataclass
class RunConfig:
    """Fully defaulted run description.

    Defaults: ``window = 5``, ``buffer = 10``, ``m_max = N + 20`` and
    ``nuT = 20 pi g0T``. When both ``g0T`` and ``Omega0T`` are given they
    must satisfy ``g0T = eta Omega0T / (2 sqrt N)``; when only one is given
    the other is derived.
    """

    N: int
    eta: float
    g0T: float
    delta0T: float
    Omega0T: float = None
    chirp: int = 1
    window: float = 5.0
    nuT: float = None
    m_max: int = None
    buffer: int = 10
    tier: str = Tier.LADDER.value
    sideband: str = Sideband.BLUE.value
    protocol: str = "fock_blue"
    k: int = 1
    rtol: float = 1e-10
    atol: float = 1e-12
    sample_spacing: float = 0.01
    steps_per_period: int = 40
    trajectory_csv: str = None
    summary_json: str = None
    si: dict = field(default=None)

    def chain(self) -> ChainConfig:
        return ChainConfig(self.N, self.eta, self.g0T, self.nuT, self.m_max, self.buffer, Tier(self.tier))

    def pulse(self) -> PulseSpec:
        return PulseSpec(self.delta0T, None, self.chirp, Sideband(self.sideband), self.window)

    def settings(self) -> PropagationSettings:
        return PropagationSettings(
            rtol=self.rtol, atol=self.atol, sample_spacing=self.sample_spacing,
            steps_per_period=self.steps_per_period,
        )

    def to_dict(self):
        d = asdict(self)
        if d["si"] is None:
            del d["si"]
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _schema_errors(doc):
    v = jsonschema.Draft202012Validator(SCHEMA)
    errs = sorted(v.iter_errors(doc), key=lambda e: list(e.absolute_path))
    return errs


def validate(doc):
    errs = _schema_errors(doc)
    if errs:
        first = errs[0]
        path = "/".join(str(p) for p in first.absolute_path) or "<root>"
        msgs = "; ".join(
            f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}" for e in errs
        )
        raise ConfigError(f"invalid configuration: {msgs}", path)


def _check_couplings(doc):
    N, eta, g, om = (doc.get(k) for k in ("N", "eta", "g0T", "Omega0T"))
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (N, eta, g, om)):
        return
    if N < 1:
        return
    implied = eta * om / (2 * math.sqrt(N))
    if not math.isclose(implied, g, rel_tol=1e-9, abs_tol=1e-12):
        raise ConfigError(
            f"inconsistent couplings: g0T = {g} but eta*Omega0T/(2 sqrt N) = {implied:.6g} "
            f"(Omega0T = {om})",
            "g0T",
        )


def from_dict(doc) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object", "<root>")
    # a coupling mismatch is reported ahead of missing keys
    _check_couplings(doc)
    validate(doc)
    doc = dict(doc)
    si = doc.get("si")
    N = doc["N"]
    if si is not None:
        geom = LaserGeometry.from_wavelength(si["wavelength_m"], si["theta_rad"], si["mass_kg"], si["nu_hz"])
        eta_si = lamb_dicke_parameter(geom)
        if "eta" in doc and not math.isclose(doc["eta"], eta_si, rel_tol=1e-9):
            warnings.warn(f"eta = {doc['eta']} overrides eta = {eta_si:.6g} derived from si", stacklevel=2)
        doc.setdefault("eta", eta_si)
        if "pulse_width_s" in si:
            nuT_si = 2 * math.pi * si["nu_hz"] * si["pulse_width_s"]
            if "nuT" in doc and not math.isclose(doc["nuT"], nuT_si, rel_tol=1e-9):
                warnings.warn(f"nuT = {doc['nuT']} overrides nuT = {nuT_si:.6g} derived from si", stacklevel=2)
            doc.setdefault("nuT", nuT_si)
    if "eta" not in doc:
        raise ConfigError("invalid configuration: eta is required unless an si block is given", "eta")
    eta = doc["eta"]
    scale = eta / (2 * math.sqrt(N))
    if "g0T" in doc and "Omega0T" in doc:
        _check_couplings(doc)
    elif "Omega0T" in doc:
        doc["g0T"] = scale * doc["Omega0T"]
    elif eta > 0:
        doc["Omega0T"] = doc["g0T"] / scale
    doc.setdefault("nuT", 20 * math.pi * doc["g0T"])
    doc.setdefault("m_max", N + 20)
    known = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(**{k: v for k, v in doc.items() if k in known})
    try:
        cfg.chain()
        cfg.pulse()
        cfg.settings()
    except (ConfigError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}", getattr(exc, "field", "<root>")) from None
    return cfg


def parse_config(text) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}", "<root>") from None
    return from_dict(doc)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
