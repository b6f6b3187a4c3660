"""Initial data at ``t = -eps``: a canonical family, constraint checks and perturbations.

The canonical ``w_0`` has a single steep well in its slope,

    w_0'(x) = -(1/eps) (G(x) - mean G) / (1 - mean G),
    G(x) = exp(-(1 - cos x) / l^2),   l = s * eps^(3/2),

so that ``w_0'(0) = -1/eps`` exactly, the minimum is unique, ``w_0''(0) = 0``
and ``w_0''' ~ eps^-4`` near the origin.  All four fields are finite
trigonometric series, so every derivative is available in closed form.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from . import spectral
from .euler_core import Params, StateField

# {{{ trigonometric series


@dataclass
class TrigSeries:
    """``f(x) = a_0 + sum_n (a_n cos(n x) + b_n sin(n x))``."""

    cos: np.ndarray
    sin: np.ndarray

    def __call__(self, x, order: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = np.arange(self.cos.size)
        out = np.zeros_like(x)
        # d^j/dx^j of cos/sin rotate by j quarter turns
        for m in np.flatnonzero((self.cos != 0) | (self.sin != 0)):
            ph = n[m] * x + 0.5 * np.pi * order
            scale = float(n[m]) ** order if order else 1.0
            if m == 0 and order:
                continue
            out += scale * (self.cos[m] * np.cos(ph) + self.sin[m] * np.sin(ph))
        return out

    @classmethod
    def zero(cls) -> "TrigSeries":
        return cls(np.zeros(1), np.zeros(1))

    @classmethod
    def mode(cls, mean: float, amp: float, wavenumber: int, phase: float) -> "TrigSeries":
        """``mean + amp sin(wavenumber x + phase)``."""
        size = max(wavenumber, 0) + 1
        c = np.zeros(size)
        s = np.zeros(size)
        c[0] = mean
        if amp and wavenumber > 0:
            c[wavenumber] += amp * np.sin(phase)
            s[wavenumber] += amp * np.cos(phase)
        return cls(c, s)


def _well_series(width: float, eps: float, tol: float = 1e-20) -> TrigSeries:
    """Closed form of the canonical ``w_0 - mean`` via modified Bessel coefficients."""
    kappa = 1.0 / width ** 2
    n_max = 8
    while special.ive(n_max, kappa) > tol * special.ive(0, kappa):
        n_max *= 2
    n = np.arange(n_max + 1)
    g = special.ive(n, kappa)
    gbar = g[0]
    scale = -(1.0 / eps) / (1.0 - gbar)
    # G - gbar = 2 sum_{n>=1} g_n cos(nx); its antiderivative is 2 g_n sin(nx)/n
    s = np.zeros(n_max + 1)
    s[1:] = scale * 2.0 * g[1:] / n[1:]
    keep = np.flatnonzero(np.abs(s) > tol * np.abs(s).max())
    top = int(keep.max()) + 1 if keep.size else 1
    return TrigSeries(np.zeros(top), s[:top])


# }}}

# {{{ data spec


@dataclass
class DataSpec:
    """Canonical-family knobs; amplitudes multiply the admissible powers of eps.

    ``z_0 = z_amp eps^mu sin(m x + z_phase)`` with ``m = round(z_wave/eps)``,
    ``k_0 = k_amp eps^(mu+1) sin(m_k x + k_phase)`` likewise, and
    ``a_0 = a_mean + a_amp sin(a_mode x + a_phase)``.
    """

    params: Params
    w_bar: float = 2.0
    well_width: float = 1.5
    z_amp: float = 0.5
    z_wave: float = 1.0
    z_phase: float = 0.25 * np.pi
    k_amp: float = 0.5
    k_wave: float = 1.0
    k_phase: float = 0.25 * np.pi
    a_mean: float = 0.5
    a_amp: float = 0.2
    a_mode: int = 1
    a_phase: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.5 <= self.w_bar <= 2.0:
            raise ValueError(f"w_bar must lie in [1/2, 2], got {self.w_bar}")
        for name in ("well_width", "z_amp", "z_wave", "k_amp", "k_wave", "a_amp"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.well_width == 0:
            raise ValueError("well_width must be positive")

    def wavenumber(self, scale: float) -> int:
        return max(1, int(round(scale / self.params.eps)))

    def series(self) -> dict[str, TrigSeries]:
        p = self.params
        eps, mu = p.eps, p.mu
        well = _well_series(self.well_width * eps ** 1.5, eps)
        well.cos[0] = self.w_bar
        z = TrigSeries.mode(0.0, self.z_amp * eps ** mu, self.wavenumber(self.z_wave), self.z_phase)
        k = TrigSeries.mode(0.0, self.k_amp * eps ** (mu + 1.0), self.wavenumber(self.k_wave), self.k_phase)
        a = TrigSeries.mode(self.a_mean, self.a_amp, self.a_mode, self.a_phase)
        return {"w": well, "z": z, "k": k, "a": a}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DataSpec":
        d = dict(d)
        d["params"] = Params.from_dict(d["params"])
        return cls(**d)


# }}}

# {{{ validation


@dataclass
class Constraint:
    name: str
    passed: bool
    margin: float
    location: float | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    constraints: list[Constraint] = field(default_factory=list)
    consequences: list[Constraint] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.constraints)

    def failed(self) -> list[str]:
        return [c.name for c in self.constraints if not c.passed]

    def __getitem__(self, name: str) -> Constraint:
        for c in self.constraints + self.consequences:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "constraints": [asdict(c) for c in self.constraints],
            "consequences": [asdict(c) for c in self.consequences],
        }

    def summary(self) -> str:
        lines = []
        for c in self.constraints + self.consequences:
            flag = "ok  " if c.passed else "FAIL"
            lines.append(f"{flag} {c.name}: margin {c.margin:.4g} {c.detail}".rstrip())
        return "\n".join(lines)


class InvalidDataError(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("initial data violate: " + ", ".join(report.failed()))


def _fine_derivatives(f: np.ndarray, orders, factor: int):
    """Spectral derivatives sampled on the ``factor``-times oversampled grid."""
    return [spectral.oversample(d, factor) for d in spectral.derivatives(f, tuple(orders))]


def validate(data: StateField, params: Params, const: float = 10.0, oversample: int = 4,
             min_tol: float = 1e-8) -> ValidationReport:
    """Check every constraint of the data class on a refined sample grid.

    ``const`` plays the role of the implicit constants: ``f ~ g`` means
    ``g/const <= f <= const g`` and ``f <~ g`` means ``|f| <= const g``.
    """
    eps, mu = params.eps, params.mu
    n = data.n
    m = n * oversample
    x = spectral.origin(n) + np.arange(m) * (spectral.TWO_PI / m)
    x = (x + np.pi) % spectral.TWO_PI - np.pi
    ax = np.abs(x)
    i0 = int(np.argmin(ax))
    w0, w1, w2, w3, w4, w5 = _fine_derivatives(data.w, range(6), oversample)
    rep = ValidationReport()
    add = rep.constraints.append

    lo, hi = float(w0.min()), float(w0.max())
    add(Constraint("w0 ~ 1", lo >= 1.0 / const and hi <= const and lo > 0,
                   min(lo * const, const / hi), detail=f"range [{lo:.4g}, {hi:.4g}]"))

    target = -1.0 / eps
    rel = abs(w1[i0] - target) / abs(target)
    away = np.ones(m, bool)
    away[i0] = False
    worst_other = float(np.max(np.abs(w1[away])))
    unique = int(np.argmin(w1)) == i0 and worst_other < 1.0 / eps
    add(Constraint("w0'(0) = -1/eps", rel <= min_tol, min_tol - rel, 0.0,
                   detail=f"relative error {rel:.3g}"))
    add(Constraint("unique minimum of w0'", unique, 1.0 - worst_other * eps,
                   float(x[int(np.argmin(w1))]), detail=f"max |w0'| off 0 = {worst_other:.6g}"))

    outer = ax >= eps ** 1.5
    gap = (w1[outer] + 1.0 / eps) / eps ** (mu / 2 - 1)
    j = int(np.argmin(gap))
    add(Constraint("w0' gap off |x| <= eps^1.5", bool(gap[j] > 0), float(gap[j]),
                   float(x[outer][j])))

    inner = ax <= eps ** 1.5
    r3 = w3[inner] * eps ** 4
    add(Constraint("w0''' ~ eps^-4 near 0", bool(r3.min() >= 1 / const and r3.max() <= const),
                   float(min(r3.min() * const, const / r3.max())),
                   detail=f"ratio range [{r3.min():.4g}, {r3.max():.4g}]"))

    core = ax <= eps ** 2
    r4 = float(np.max(np.abs(w4[core]))) / eps ** (mu - 5)
    add(Constraint("|w0''''| <~ eps^(mu-5) on |x| <= eps^2", r4 <= const, const - r4))
    r5 = float(np.max(np.abs(w5))) / eps ** -7
    add(Constraint("|w0'''''| <~ eps^-7", r5 <= const, const - r5))

    for name, arr, expo in (("z0", data.z, params.z_decay), ("k0", data.k, params.k_decay),
                            ("a0", data.a, params.a_decay)):
        ders = _fine_derivatives(arr, range(6), oversample)
        worst = max(float(np.max(np.abs(d))) / eps ** e for d, e in zip(ders, expo))
        add(Constraint(f"{name} derivative bounds", worst <= const, const - worst))

    zmax = float(spectral.oversample(data.z, oversample).max())
    add(Constraint("max z0 < min w0", zmax < lo, lo - zmax))

    cons = rep.consequences.append
    w2_0 = abs(float(w2[i0]))
    cons(Constraint("w0''(0) = 0", w2_0 <= 1e-6 * eps ** -2, 1e-6 * eps ** -2 - w2_0))
    r2 = float(np.max(np.abs(w2))) / eps ** -2.5
    cons(Constraint("|w0''| <~ eps^-2.5", r2 <= const, const - r2))
    return rep


# }}}

# {{{ construction and perturbation


def sample(series: dict[str, TrigSeries], n: int, t: float) -> StateField:
    x = spectral.grid(n)
    return StateField(t, series["w"](x), series["z"](x), series["k"](x), series["a"](x))


def build_canonical(spec: DataSpec, n: int | None = None, check: bool = True) -> StateField:
    """Sample the canonical family at ``t = -eps`` and validate it."""
    p = spec.params
    data = sample(spec.series(), n or p.n_grid, -p.eps)
    if check:
        rep = validate(data, p)
        if not rep.valid:
            raise InvalidDataError(rep)
    return data


def _random_band(rng: np.random.Generator, n: int, modes: int) -> np.ndarray:
    x = spectral.grid(n)
    f = rng.normal() * np.ones(n)
    for j in range(1, modes + 1):
        f += rng.normal() * np.cos(j * x) + rng.normal() * np.sin(j * x)
    return f


def perturb(data: StateField, amplitude: float, seed: int = 0, modes: int = 6) -> StateField:
    """Add a band-limited random perturbation of sup-norm ``amplitude`` to each field."""
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    if amplitude == 0:
        return data.copy()
    rng = np.random.default_rng(seed)
    out = []
    for f in (data.w, data.z, data.k, data.a):
        g = _random_band(rng, data.n, modes)
        g *= amplitude / np.max(np.abs(spectral.oversample(g, 8)))
        out.append(f + g)
    return StateField(data.t, *out)


def translate(f: np.ndarray, shift: float) -> np.ndarray:
    """Samples of ``f(x + shift)`` (exact for the trigonometric interpolant)."""
    n = f.size
    fh = np.fft.rfft(f)
    ph = np.exp(1j * spectral.wavenumbers(n) * shift)
    if n % 2 == 0:
        ph[-1] = np.cos(n // 2 * shift)
    return np.fft.irfft(fh * ph, n=n)


def slope_minimum(w: np.ndarray) -> tuple[float, float]:
    """Location and value of the global minimum of ``w'`` (Newton-polished)."""
    n = w.size
    fine = spectral.oversample(spectral.derivative(w), 8)
    j = int(np.argmin(fine))
    x = spectral.origin(n) + j * spectral.TWO_PI / (8 * n)
    for _ in range(30):
        g2 = float(spectral.evaluate(w, np.array([x]), order=2)[0])
        g3 = float(spectral.evaluate(w, np.array([x]), order=3)[0])
        if g3 <= 0:
            break
        step = g2 / g3
        x -= step
        if abs(step) < 1e-15:
            break
    x = (x + np.pi) % spectral.TWO_PI - np.pi
    return x, float(spectral.evaluate(w, np.array([x]), order=1)[0])


def renormalize(data: StateField, params: Params) -> tuple[StateField, dict]:
    """Translate so that ``w'`` is minimal at 0, then rescale so that minimum is ``-1/eps``.

    Scaling ``(w, z, a)`` by ``beta`` (``k`` fixed) maps solutions to solutions
    with time stretched by ``1/beta`` about the initial time.
    """
    x_min, slope = slope_minimum(data.w)
    beta = (-1.0 / params.eps) / slope
    fields = [translate(f, x_min) for f in (data.w, data.z, data.k, data.a)]
    w, z, k, a = fields
    out = StateField(data.t, beta * w, beta * z, k, beta * a)
    return out, {"shift": x_min, "scale": beta}


# }}}

# {{{ io


def save_data(path, data: StateField, params: Params, extra: dict | None = None) -> None:
    """CSV ``theta,w,z,k,a`` preceded by a one-line JSON header (``# {...}``)."""
    header = {"format": "preshock-data", "version": 1, "t": data.t, "n_grid": data.n,
              "params": params.to_dict()}
    if extra:
        header.update(extra)
    table = np.column_stack([data.theta, data.w, data.z, data.k, data.a])
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write("theta,w,z,k,a\n")
        np.savetxt(fh, table, delimiter=",", fmt="%.17g")


def load_data(path) -> tuple[StateField, Params, dict]:
    path = Path(path)
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}: missing JSON header line")
        header = json.loads(first[1:])
        names = fh.readline().strip().split(",")
        table = np.loadtxt(fh, delimiter=",", ndmin=2)
    if names != ["theta", "w", "z", "k", "a"]:
        raise ValueError(f"{path}: unexpected columns {names}")
    params = Params.from_dict(header["params"])
    if table.shape[0] != header["n_grid"]:
        raise ValueError(f"{path}: expected {header['n_grid']} rows, found {table.shape[0]}")
    theta = table[:, 0]
    if not np.allclose(theta, spectral.grid(theta.size), atol=1e-12):
        raise ValueError(f"{path}: theta column is not the uniform grid on (-pi, pi]")
    data = StateField(header["t"], table[:, 1], table[:, 2], table[:, 3], table[:, 4])
    return data, params, header


# }}}
