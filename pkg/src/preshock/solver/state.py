"""Containers for flows, snapshots and whole runs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import spectral
from ..euler_core import Params, StateField

# values of a field and its angular derivative at flow positions, by row
ALONG = ("w", "z", "k", "a", "dw", "dz", "dk", "da")
ROW = {name: i for i, name in enumerate(ALONG)}

INTEGRALS = (
    "Ia_eta",   # int a o eta
    "J38_qz",   # int I^-1 eta_x (c k_theta q^z) o eta
    "J38_wa",   # int I^-1 (w o eta) d_x(a o eta)
    "J39_qw",   # int eta_x q^w o eta
    "J39_kc",   # int d_x(k o eta) (c o eta)
    "J39_z",    # int d_x(z o eta)
    "Jpsi",     # int (z_theta - 4a/3) o psi
    "G_psi",    # int (8a/3 + c k_theta/12) o psi
    "J310_qw",  # int e^G psi_x (c k_theta q^w) o psi
    "J310_az",  # int e^G psi_x (a_theta z) o psi
    "Ia_phi",   # int a o phi
    "Ifrak",    # exp(8/3 int a o phi), integrated as an ODE
    "D44",      # int Ifrak (c^2 o phi)
    "Lw_phi",   # int |w_theta o phi|
)


@dataclass
class FlowState:
    """Characteristic flows on a uniform label grid.

    Positions live on the universal cover (``label + periodic displacement``).
    ``along[f]`` holds the rows of :data:`ALONG` composed with flow ``f``.
    ``psi``/``phi`` are ``None`` for the scalar Burgers model.
    """

    labels: np.ndarray
    eta: np.ndarray
    eta_x: np.ndarray
    psi: np.ndarray | None = None
    phi: np.ndarray | None = None
    psi_x: np.ndarray | None = None
    phi_x: np.ndarray | None = None
    integrals: dict[str, np.ndarray] = field(default_factory=dict)
    along: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def I(self) -> np.ndarray:
        """``exp(k o eta / 8 - 8/3 int a o eta)``."""
        return np.exp(self.along["eta"][ROW["k"]] / 8.0 - (8.0 / 3.0) * self.integrals["Ia_eta"])

    @property
    def Ifrak(self) -> np.ndarray:
        return self.integrals["Ifrak"]

    def composed(self, flow: str, name: str) -> np.ndarray:
        return self.along[flow][ROW[name]]

    @classmethod
    def identity(cls, labels: np.ndarray, burgers: bool = False) -> "FlowState":
        x = np.asarray(labels, dtype=float)
        one = np.ones_like(x)
        if burgers:
            return cls(labels=x, eta=x.copy(), eta_x=one.copy())
        ints = {name: np.zeros_like(x) for name in INTEGRALS}
        ints["Ifrak"] = one.copy()
        return cls(labels=x, eta=x.copy(), eta_x=one.copy(), psi=x.copy(), phi=x.copy(),
                   psi_x=one.copy(), phi_x=one.copy(), integrals=ints)


@dataclass
class LabelState:
    """Fields composed with the fast characteristic, on a uniform label grid."""

    t: float
    x: np.ndarray
    d: np.ndarray          # eta - x
    eta_x: np.ndarray
    w: np.ndarray
    z: np.ndarray
    k: np.ndarray
    a: np.ndarray

    @property
    def eta(self) -> np.ndarray:
        return self.x + self.d

    @property
    def n(self) -> int:
        return self.x.size

    def field(self, name: str) -> np.ndarray:
        return {"w": self.w, "z": self.z, "k": self.k, "a": self.a,
                "eta": self.eta, "eta_x": self.eta_x, "d": self.d}[name]


@dataclass
class Snapshot:
    t: float
    flows: FlowState
    state: StateField | None = None
    labels: LabelState | None = None
    _eulerian_cache: dict = field(default_factory=dict, repr=False)

    def lagrangian(self) -> LabelState:
        """Label-side view: ``eta``, ``eta_x`` and ``f o eta`` on a uniform grid."""
        if self.labels is not None:
            return self.labels
        fl = self.flows
        along = fl.along["eta"]
        return LabelState(self.t, fl.labels, fl.eta - fl.labels, fl.eta_x,
                          along[0], along[1], along[2], along[3])

    def eulerian(self, n: int | None = None) -> StateField:
        """Fields on the angular grid (reconstructed by inverting ``eta`` if needed)."""
        if self.state is not None and (n is None or n == self.state.n):
            return self.state
        if self.labels is None:
            raise ValueError("no label data to reconstruct from")
        n = n or self.labels.n
        if n not in self._eulerian_cache:
            from .labels import reconstruct_eulerian
            self._eulerian_cache[n] = reconstruct_eulerian(self.labels, spectral.grid(n))
        return self._eulerian_cache[n]


@dataclass
class Trajectory:
    """Time-ordered snapshots plus per-step monitor series."""

    snapshots: list[Snapshot]
    monitors: dict[str, np.ndarray]
    params: Params | None
    mode: str = "full"
    scheme: str = "labels"
    stop_reason: str = ""
    dt_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    config: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def initial(self) -> Snapshot:
        return self.snapshots[0]

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    @property
    def t_stop(self) -> float:
        return self.snapshots[-1].t

    def __len__(self) -> int:
        return len(self.snapshots)

    def nearest(self, t: float) -> int:
        return int(np.argmin(np.abs(self.times - t)))
