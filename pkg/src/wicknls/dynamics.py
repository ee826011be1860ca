"""Time evolution of the cubic Schrodinger equation and Wick-ordered variants.

Equations are written as ``i u_t - u_xx + sign * N(u) = 0`` with ``sign = +1``
defocusing and ``-1`` focusing; the free flow is the Fourier multiplier
``exp(+i n^2 t)``. (The more common convention ``i u_t + u_xx -+ |u|^2 u = 0``
is reached by complex conjugation; see the README for the mapping.)

Variants of the nonlinearity ``N(u)``:

=============================  ====================================================
``nls``                        ``|u|^2 u``
``wnls``                       ``(|u|^2 - 2 mu(u)) u`` with ``mu = avg |u|^2``
``truncated-nls``              ``P_N(|u|^2 u)`` on the band ``|n| <= N``
``truncated-wnls-hamiltonian`` ``P_N(|u|^2 u) - 2 a u`` (a = renormalization const)
``truncated-wnls-gauged``      ``P_N(|u|^2 u) - 2 mu(u) u``
=============================  ====================================================

The Strang integrator alternates the exact linear multiplier flow with the
exact pointwise phase flow of the nonlinear substep, evaluated on an odd
collocation grid that is in exact bijection with the retained mode range.
Untruncated runs keep the full grid band (every substep is then unitary /
unit-modulus, so mass is conserved to roundoff); truncated runs re-apply the
Dirichlet projection after each nonlinear substep because the projection is
part of the model. RK4 integrates the full Galerkin right-hand side in mode
space with the cubic term evaluated by exact zero-padded convolution.
"""

import math
from dataclasses import dataclass, field as dc_field, replace
from enum import Enum

import numpy as np

from . import field as fld
from ._kernels import cubic_convolution, fast_fft_size, nonlinear_phase
from .wick import renormalization_constant, wick_hamiltonian


class Variant(str, Enum):
    NLS = "nls"
    WNLS = "wnls"
    TRUNCATED_NLS = "truncated-nls"
    TRUNCATED_WNLS_HAMILTONIAN = "truncated-wnls-hamiltonian"
    TRUNCATED_WNLS_GAUGED = "truncated-wnls-gauged"


_TRUNCATED = {
    Variant.TRUNCATED_NLS,
    Variant.TRUNCATED_WNLS_HAMILTONIAN,
    Variant.TRUNCATED_WNLS_GAUGED,
}
# variants whose nonlinearity subtracts 2*mu(u)*u
_MEAN_SHIFTED = {Variant.WNLS, Variant.TRUNCATED_WNLS_GAUGED}


@dataclass(frozen=True)
class EquationSpec:
    variant: Variant
    sign: int = 1
    truncation: int | None = None
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 (defocusing) or -1 (focusing)")
        if self.truncated:
            if self.truncation is None or self.truncation < 0:
                raise ValueError(f"variant {self.variant.value} requires truncation >= 0")
        elif self.truncation is not None:
            raise ValueError(f"variant {self.variant.value} does not take a truncation")

    @property
    def truncated(self) -> bool:
        return self.variant in _TRUNCATED

    @property
    def mean_shifted(self) -> bool:
        return self.variant in _MEAN_SHIFTED

    @property
    def renorm_shifted(self) -> bool:
        return self.variant is Variant.TRUNCATED_WNLS_HAMILTONIAN

    def renorm_constant(self) -> float:
        return renormalization_constant(self.truncation, self.alpha)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value, "sign": self.sign,
            "truncation": self.truncation, "alpha": self.alpha,
        }


@dataclass(frozen=True)
class IntegratorSpec:
    scheme: str
    dt: float
    t_end: float
    snapshot_stride: int = 1

    def __post_init__(self):
        if self.scheme not in ("strang", "rk4"):
            raise ValueError("scheme must be 'strang' or 'rk4'")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")

    def step_count(self) -> int:
        n = round(abs(self.t_end) / self.dt)
        if abs(n * self.dt - abs(self.t_end)) > 1e-9 * max(1.0, abs(self.t_end)):
            raise ValueError("dt must divide t_end")
        if n and n % self.snapshot_stride:
            raise ValueError("snapshot_stride must divide the step count")
        return n

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "dt": self.dt, "t_end": self.t_end,
                "snapshot_stride": self.snapshot_stride}


@dataclass(frozen=True)
class Trajectory:
    """Snapshots plus a conserved-quantity ledger (one row per snapshot)."""

    times: np.ndarray
    snapshots: tuple
    ledger: dict
    eq: EquationSpec
    integrator: IntegratorSpec
    probe_times: np.ndarray | None = None
    probes: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if len(t) != len(self.snapshots):
            raise ValueError("one snapshot per time required")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        bands = {f.max_mode for f in self.snapshots}
        if len(bands) > 1:
            raise ValueError("snapshot band limits must all be equal")
        for key, col in self.ledger.items():
            if len(col) != len(t):
                raise ValueError(f"ledger column {key!r} has wrong length")
        object.__setattr__(self, "times", t)

    @property
    def final(self) -> fld.TorusField:
        return self.snapshots[-1]


class IntegrationDivergedError(RuntimeError):
    """Raised when the solution blows past the amplitude cap or turns NaN."""

    def __init__(self, message, last_valid_time, trajectory=None):
        super().__init__(message)
        self.last_valid_time = last_valid_time
        self.trajectory = trajectory


# ---------------------------------------------------------------------------
# right-hand side pieces
# ---------------------------------------------------------------------------

def _band_slice(conv: np.ndarray, out_band: int) -> np.ndarray:
    """Central slice of a band-3N convolution down to |n| <= out_band."""
    full = (len(conv) - 1) // 2
    return conv[full - out_band:full + out_band + 1]


def nonlinearity(u: fld.TorusField, eq: EquationSpec) -> fld.TorusField:
    """The cubic term N(u) of the chosen variant (without the sign).

    Untruncated variants return the exact band-3N result of the zero-padded
    convolution; truncated variants project onto the truncation band. The
    renormalization shift of ``truncated-wnls-hamiltonian`` is a linear term
    and lives in the propagator, not here.
    """
    if eq.truncated:
        u = fld.project(u, eq.truncation)
    conv = cubic_convolution(u.coeffs)
    if eq.truncated:
        out = fld.TorusField(_band_slice(conv, eq.truncation), eq.truncation)
    else:
        out = fld.TorusField(conv, 3 * u.max_mode)
    if eq.mean_shifted:
        out = out - (2.0 * fld.mean_intensity(u)) * u
    return out


def resonant_split(u: fld.TorusField) -> tuple[fld.TorusField, fld.TorusField]:
    """Split the Wick cubic term into (non-resonant, resonant-diagonal) parts.

    The non-resonant part keeps triples ``n = n1 - n2 + n3`` with
    ``n2 != n1`` and ``n2 != n3``; the resonant part is the diagonal
    ``-|c(n)|^2 c(n)``. Their sum is exactly ``(|u|^2 - 2 mu(u)) u``.
    """
    c = u.coeffs
    conv = cubic_convolution(c)
    mu = fld.mean_intensity(u)
    diag = (np.abs(c) ** 2) * c
    nonres = conv.copy()
    center = _band_slice(nonres, u.max_mode)
    center -= 2.0 * mu * c
    center += diag
    resonant = fld.TorusField(-diag, u.max_mode)
    return fld.TorusField(nonres, 3 * u.max_mode), resonant


def linear_propagator(u: fld.TorusField, t: float) -> fld.TorusField:
    """Free flow: multiply mode n by exp(+i n^2 t)."""
    return fld.TorusField(u.coeffs * np.exp(1j * u.modes.astype(np.float64) ** 2 * t),
                          u.max_mode)


def galilean_boost(u: fld.TorusField, beta: int) -> fld.TorusField:
    """Boost u0 -> e^{i beta x / 2} u0, i.e. shift every mode by beta/2.

    beta must be even so the boost is 2*pi-periodic. The band grows by
    |beta|/2 so no coefficient is lost.
    """
    if beta % 2:
        raise ValueError("beta must be even for a periodic boost")
    h = beta // 2
    if h == 0:
        return u
    n_out = u.max_mode + abs(h)
    c = np.zeros(2 * n_out + 1, dtype=np.complex128)
    lo = (n_out - u.max_mode) + h
    c[lo:lo + len(u.coeffs)] = u.coeffs
    return fld.TorusField(c, n_out)


def conserved(u: fld.TorusField, sign: int) -> tuple[float, float, float]:
    """(mass, momentum, hamiltonian) = (N, P, H) of the field."""
    a2 = np.abs(u.coeffs) ** 2
    n = u.modes.astype(np.float64)
    mass = fld.TWO_PI * float(np.sum(a2))
    momentum = fld.TWO_PI * float(np.sum(n * a2))
    hamiltonian = 0.5 * fld.TWO_PI * float(np.sum(n**2 * a2)) \
        + sign * 0.25 * fld.quartic_integral(u)
    return mass, momentum, hamiltonian


def plane_wave_frequency(mode: int, amplitude: complex, eq: EquationSpec) -> float:
    """Exact phase rate of the single-mode solution A e^{i(n x + w t)}."""
    a2 = abs(amplitude) ** 2
    w = float(mode**2)
    if eq.variant in (Variant.NLS, Variant.TRUNCATED_NLS):
        return w + eq.sign * a2
    if eq.variant in (Variant.WNLS, Variant.TRUNCATED_WNLS_GAUGED):
        return w - eq.sign * a2
    return w + eq.sign * a2 - 2.0 * eq.sign * eq.renorm_constant()


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------

def _ledger_row(u, eq):
    mass, momentum, ham = conserved(u, eq.sign)
    row = {"mass": mass, "momentum": momentum, "hamiltonian": ham,
           "mu": fld.mean_intensity(u)}
    if eq.renorm_shifted:
        row["wick_hamiltonian"] = wick_hamiltonian(u, eq.truncation, eq.alpha, eq.sign)
    return row


class _Recorder:
    def __init__(self, eq, integ, probes, band):
        self.eq, self.integ = eq, integ
        self.band = band
        self.times, self.snaps, self.rows = [], [], []
        self.ptimes = []
        self.pvals = {name: [] for name in probes}

    def snapshot(self, t, u):
        self.times.append(t)
        self.snaps.append(u)
        self.rows.append(_ledger_row(u, self.eq))

    def probe(self, t, values):
        self.ptimes.append(t)
        for name, v in values.items():
            self.pvals[name].append(v)

    def build(self, backward: bool) -> Trajectory:
        keys = self.rows[0].keys() if self.rows else ()
        ledger = {k: np.array([r[k] for r in self.rows]) for k in keys}
        times = np.asarray(self.times)
        snaps = tuple(self.snaps)
        ptimes = np.asarray(self.ptimes) if self.ptimes else None
        probes = {k: np.asarray(v) for k, v in self.pvals.items()}
        if backward:
            times = times[::-1].copy()
            snaps = snaps[::-1]
            ledger = {k: v[::-1].copy() for k, v in ledger.items()}
            if ptimes is not None:
                ptimes = ptimes[::-1].copy()
                probes = {k: v[::-1].copy() for k, v in probes.items()}
        return Trajectory(times=times, snapshots=snaps, ledger=ledger, eq=self.eq,
                          integrator=self.integ, probe_times=ptimes, probes=probes)


def evolve(u0: fld.TorusField, eq: EquationSpec, integ: IntegratorSpec, *,
           probes: dict | None = None, amplitude_cap: float = 1e6,
           pad_factor: int = 3) -> Trajectory:
    """Integrate the chosen equation from u0 up to integ.t_end.

    Negative ``t_end`` runs backward in time; the returned trajectory is
    normalized to strictly increasing times either way. ``probes`` maps names
    to test fields; the L2 pairing against each is recorded at every step
    (finer than the snapshot stride). Raises IntegrationDivergedError when
    the grid maximum of |u| exceeds ``amplitude_cap`` or turns NaN; the
    partial trajectory is attached to the exception.
    """
    probes = probes or {}
    n_steps = integ.step_count()
    dt = math.copysign(integ.dt, integ.t_end) if integ.t_end else integ.dt
    if eq.truncated:
        work_band = eq.truncation
        u0 = fld.project(u0, work_band)
    else:
        work_band = u0.max_mode

    if integ.scheme == "strang":
        return _evolve_strang(u0, eq, integ, n_steps, dt, work_band, probes,
                              amplitude_cap, pad_factor)
    return _evolve_rk4(u0, eq, integ, n_steps, dt, work_band, probes, amplitude_cap)


def _spectrum_layout(coeffs: np.ndarray, n_max: int, m: int) -> np.ndarray:
    spec = np.zeros(m, dtype=np.complex128)
    spec[np.mod(np.arange(-n_max, n_max + 1), m)] = coeffs
    return spec


def _unitary_multiply(spec: np.ndarray, mult: np.ndarray) -> None:
    """In-place multiply by a unit-modulus multiplier, restoring moduli.

    A precomputed multiplier has |m| = 1 only to a rounding, and reusing the
    same array every step turns that into a systematic mass drift linear in
    the step count. The true flow preserves each modulus exactly, so we
    restore it; the remaining error is a random walk at the roundoff floor.
    """
    before = np.abs(spec)
    spec *= mult
    after = np.abs(spec)
    np.divide(before, after, out=before, where=after > 0.0)
    before[after == 0.0] = 1.0
    spec *= before


def _layout_to_field(spec: np.ndarray, n_max: int) -> fld.TorusField:
    m = len(spec)
    return fld.TorusField(spec[np.mod(np.arange(-n_max, n_max + 1), m)], n_max)


def _evolve_strang(u0, eq, integ, n_steps, dt, work_band, probes, cap, pad_factor):
    m = fast_fft_size(pad_factor * (2 * work_band + 1), odd=True)
    grid_band = (m - 1) // 2
    snap_band = work_band if eq.truncated else grid_band
    freq = np.arange(m, dtype=np.float64)
    freq[freq > grid_band] -= m

    shift = 2.0 * eq.sign * eq.renorm_constant() if eq.renorm_shifted else 0.0
    half = np.exp(1j * (freq**2 - shift) * (dt / 2.0))
    keep = np.abs(freq) <= work_band  # projection mask for truncated variants

    spec = _spectrum_layout(u0.padded_to(snap_band).coeffs, snap_band, m)
    probe_specs = {name: _spectrum_layout(p.padded_to(snap_band).coeffs, snap_band, m)
                   for name, p in probes.items()}

    rec = _Recorder(eq, integ, probes, snap_band)

    def record_probes(t):
        if probe_specs:
            rec.probe(t, {name: fld.TWO_PI * complex(np.vdot(p, spec))
                          for name, p in probe_specs.items()})

    rec.snapshot(0.0, _layout_to_field(spec, snap_band))
    record_probes(0.0)
    cap2 = cap * cap
    scale2 = float(m) * float(m)  # ifft leaves grid values scaled by 1/m
    for k in range(n_steps):
        _unitary_multiply(spec, half)
        mass_before = float(np.sum(spec.real**2 + spec.imag**2))
        u = np.fft.ifft(spec)
        if eq.mean_shifted:
            a2 = u.real**2 + u.imag**2
            offset = -2.0 * float(np.sum(a2)) / m  # = -2 mu / scale2
        else:
            offset = 0.0
        max_a2 = nonlinear_phase(u, eq.sign * dt * scale2, offset)
        if not math.isfinite(max_a2) or max_a2 * scale2 > cap2:
            t_bad = (k + 1) * dt
            raise IntegrationDivergedError(
                f"|u| exceeded {cap:g} during step to t={t_bad:g}",
                last_valid_time=k * dt, trajectory=rec.build(dt < 0))
        spec = np.fft.fft(u)
        # the substeps conserve the l2 mass exactly; pin it so transform
        # roundoff cannot accumulate a systematic drift
        mass_after = float(np.sum(spec.real**2 + spec.imag**2))
        if mass_after > 0.0:
            spec *= math.sqrt(mass_before / mass_after)
        _unitary_multiply(spec, half)
        if eq.truncated:
            spec[~keep] = 0.0
        t = (k + 1) * dt
        record_probes(t)
        if (k + 1) % integ.snapshot_stride == 0:
            rec.snapshot(t, _layout_to_field(spec, snap_band))
    return rec.build(dt < 0)


def _evolve_rk4(u0, eq, integ, n_steps, dt, work_band, probes, cap):
    n = work_band
    modes2 = np.arange(-n, n + 1, dtype=np.float64) ** 2
    sign = float(eq.sign)
    shift = 2.0 * sign * eq.renorm_constant() if eq.renorm_shifted else 0.0
    mean_shifted = eq.mean_shifted

    def rhs(c):
        nl = _band_slice(cubic_convolution(c), n)
        if mean_shifted:
            nl = nl - (2.0 * np.sum(c.real**2 + c.imag**2)) * c
        return 1j * ((modes2 - shift) * c + sign * nl)

    c = u0.padded_to(n).coeffs.copy()
    probe_coeffs = {name: p.padded_to(n).coeffs for name, p in probes.items()}
    rec = _Recorder(eq, integ, probes, n)

    def record_probes(t):
        if probe_coeffs:
            rec.probe(t, {name: fld.TWO_PI * complex(np.vdot(p, c))
                          for name, p in probe_coeffs.items()})

    def guard(k):
        if np.all(np.isfinite(c.view(np.float64))):
            u_grid = fld.synthesize(fld.TorusField(c, n), fast_fft_size(2 * n + 1))
            worst = float(np.max(np.abs(u_grid)))
        else:
            worst = math.inf
        if not math.isfinite(worst) or worst > cap:
            raise IntegrationDivergedError(
                f"|u| exceeded {cap:g} during step to t={(k + 1) * dt:g}",
                last_valid_time=k * dt, trajectory=rec.build(dt < 0))

    rec.snapshot(0.0, fld.TorusField(c, n))
    record_probes(0.0)
    for k in range(n_steps):
        k1 = rhs(c)
        k2 = rhs(c + 0.5 * dt * k1)
        k3 = rhs(c + 0.5 * dt * k2)
        k4 = rhs(c + dt * k3)
        c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(c.view(np.float64))):
            guard(k)
        t = (k + 1) * dt
        record_probes(t)
        if (k + 1) % integ.snapshot_stride == 0:
            guard(k)
            rec.snapshot(t, fld.TorusField(c, n))
    return rec.build(dt < 0)


# ---------------------------------------------------------------------------
# gauge maps
# ---------------------------------------------------------------------------

def _phase_transformed(traj: Trajectory, rate: float, eq: EquationSpec) -> Trajectory:
    """Multiply snapshot k by exp(i * rate * t_k); ledger is phase-invariant."""
    snaps = tuple(fld.TorusField(u.coeffs * np.exp(1j * rate * t), u.max_mode)
                  for t, u in zip(traj.times, traj.snapshots))
    probes = traj.probes
    if traj.probe_times is not None:
        factor = np.exp(1j * rate * traj.probe_times)
        probes = {k: v * factor for k, v in probes.items()}
    return Trajectory(times=traj.times.copy(), snapshots=snaps,
                      ledger={k: v.copy() for k, v in traj.ledger.items()},
                      eq=eq, integrator=traj.integrator,
                      probe_times=traj.probe_times, probes=probes)


def gauge_transform(traj: Trajectory, mu0: float, sign: int) -> Trajectory:
    """Scalar gauge e^{-2 i sign mu0 t}: maps plain solutions onto Wick ones.

    With mu0 the mean intensity of the initial data, the transformed
    trajectory of an ``nls`` run solves ``wnls`` (and conversely with -mu0).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return _phase_transformed(traj, -2.0 * sign * mu0, traj.eq)


def truncation_gauge(traj: Trajectory, n_max: int, alpha: float,
                     debug: bool = False) -> Trajectory:
    """Remove the intensity fluctuation phase from a renormalized truncated run.

    Multiplies snapshot k by ``exp(-2 i sign c t_k)`` where
    ``c = mu(P_N u0) - a`` is constant along the flow (mass is conserved).
    The result solves the ``truncated-wnls-gauged`` system. ``debug``
    re-evaluates c on every snapshot and asserts constancy to 1e-10.
    """
    from .wick import intensity_fluctuation

    if traj.eq.variant is not Variant.TRUNCATED_WNLS_HAMILTONIAN:
        raise ValueError("truncation_gauge expects a truncated-wnls-hamiltonian run")
    c0 = intensity_fluctuation(traj.snapshots[0], n_max, alpha)
    if debug:
        for t, u in zip(traj.times, traj.snapshots):
            ck = intensity_fluctuation(u, n_max, alpha)
            if abs(ck - c0) > 1e-10:
                raise AssertionError(
                    f"intensity fluctuation drifted to {ck - c0:.3e} at t={t:g}")
    gauged_eq = replace(traj.eq, variant=Variant.TRUNCATED_WNLS_GAUGED)
    return _phase_transformed(traj, -2.0 * traj.eq.sign * c0, gauged_eq)
