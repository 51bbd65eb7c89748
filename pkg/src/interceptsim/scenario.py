"""Scenario configuration and its flat key = value file format.

The file format is deliberately simple: one "key = value" pair per line,
'#' comments, numbers, booleans, strings, and bracketed float lists.
Floats are written with 17 significant digits so configs round-trip
losslessly.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .dynamics import GRAVITY, VehicleParams
from .game import GameParams

LAWS = ("dgl1", "dglc", "tv-dglcc")


@dataclass
class ScenarioConfig:
    # vehicles
    v_p: float = 2500.0
    v_e: float = 2500.0
    tau_p: float = 0.2
    tau_e: float = 0.2
    a_p_max_g: float = 45.0
    a_e_max_g: float = 20.0
    f_meas: float = 100.0
    truth_substeps: int = 10          # truth RK4 substeps per measurement step

    # initial geometry: head-on, nominal 3 s engagement
    rho0: float = 15000.0
    lambda0: float = math.pi / 2.0
    gamma_e0: float = -math.pi / 2.0
    theta0: float = 3.0               # truth sojourn clock at t = 0
    x_p0: float = 0.0
    y_p0: float = 0.0

    # evader maneuver: single bang-bang switch
    t_sw: float = 1.5
    v_initial: float = -1.0           # pre-switch normalized command

    # measurement noise
    sigma_lambda: float = 5e-4

    # guidance
    law: str = "tv-dglcc"
    k_chatter: float = 0.7
    dglc_delta: float = 0.3
    c_delay: float = 0.75

    # filter
    particles_per_mode: int = 2000
    n_modes: int = 2
    tpm: tuple = (0.999, 0.001, 0.001, 0.999)
    # process jitter tuned for maneuver-detection speed near the bearing
    # noise floor; much larger values absorb the maneuver signature into
    # the path-angle random walk, much smaller ones starve the ensemble
    proc_noise_gamma_deg: float = 0.02
    proc_noise_a: float = 1.0
    proc_noise_lam_mrad: float = 0.0
    filter_substeps: int = 1

    # radar handoff
    x_r: float = 0.0
    y_r: float = 0.0
    p_r_std: tuple = (50.0, math.pi / 180.0, 3.0 * math.pi / 180.0, 10.0)
    theta_init_mode1: tuple = (2.9, 3.1)
    theta_init_mode2: tuple = (0.0, 0.2)

    # delay estimator
    w_thres: float = 0.9
    p_thres: float = 0.99
    k_xi: float = 2.0
    ema_alpha: float = 0.3
    max_stale: float = 1.0

    # smoother
    smoother_lag_steps: int = 100

    # run control
    seed: int = 0
    t_max: float = 6.0
    perfect_info: bool = False
    record_diagnostics: bool = False
    rho_close: float = 30.0           # switch to fly-through extraction below this range

    def __post_init__(self):
        if self.law not in LAWS:
            raise ValueError(f"law must be one of {LAWS}, got {self.law!r}")
        if self.n_modes < 2:
            raise ValueError("need at least two modes")
        if len(self.tpm) != self.n_modes ** 2:
            raise ValueError("tpm must have n_modes^2 entries")

    # --- derived builders ---

    @property
    def a_p_max(self) -> float:
        return self.a_p_max_g * GRAVITY

    @property
    def a_e_max(self) -> float:
        return self.a_e_max_g * GRAVITY

    @property
    def dt_meas(self) -> float:
        return 1.0 / self.f_meas

    def vehicle_params(self) -> VehicleParams:
        return VehicleParams(v_p=self.v_p, v_e=self.v_e, tau_p=self.tau_p,
                             tau_e=self.tau_e, a_p_max=self.a_p_max,
                             a_e_max=self.a_e_max, f_meas=self.f_meas)

    def game_params(self) -> GameParams:
        return GameParams.from_vehicle(self.vehicle_params(), k=self.k_chatter)

    def tpm_matrix(self):
        import numpy as np
        return np.asarray(self.tpm, dtype=float).reshape(self.n_modes,
                                                         self.n_modes)

    def theta_ranges(self):
        return (tuple(self.theta_init_mode1), tuple(self.theta_init_mode2))

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)


# --- file I/O -----------------------------------------------------------------

def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(format(float(x), ".17g") for x in v) + "]"
    raise TypeError(f"unsupported config value {v!r}")


def _parse_value(text: str, ftype):
    text = text.strip()
    if ftype is bool:
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"bad boolean {text!r}")
    if ftype is int:
        return int(text)
    if ftype is float:
        return float(text)
    if ftype is tuple:
        if not (text.startswith("[") and text.endswith("]")):
            raise ValueError(f"bad list {text!r}")
        inner = text[1:-1].strip()
        return tuple(float(p) for p in inner.split(",")) if inner else ()
    return text


def write_config(config: ScenarioConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write("# interceptsim scenario\n")
        for f in dataclasses.fields(config):
            fh.write(f"{f.name} = {_format_value(getattr(config, f.name))}\n")


def read_config(path) -> ScenarioConfig:
    types = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}
    pytypes = {"float": float, "int": int, "bool": bool, "str": str,
               "tuple": tuple}
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in types:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            ftype = types[key]
            if isinstance(ftype, str):
                ftype = pytypes[ftype]
            values[key] = _parse_value(raw, ftype)
    return ScenarioConfig(**values)
