"""Hermite polynomials, Wick ordering and hypercontractivity checks.

Hermite polynomials use the variance-parameter convention
``H_0 = 1, H_1 = x, H_{k+1} = x H_k - sigma k H_{k-1}``, equivalently the
generating function ``exp(t x - sigma t^2 / 2) = sum H_n(x; sigma) t^n / n!``.
Wick-ordered powers of a complex Gaussian keep the variance explicit:
``:|g|^2: = |g|^2 - Var`` and
``:|g|^4: = |g|^4 - 4 Var |g|^2 + 2 Var^2``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import field as fld
from ._kernels import hermite_batch

MAX_HERMITE_DEGREE = 50
_MC_BATCH = 1 << 16


def hermite(n: int, x, sigma: float = 1.0):
    """H_n(x; sigma) by the three-term recurrence; x may be scalar or array."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    if n > MAX_HERMITE_DEGREE:
        raise ValueError(f"degree > {MAX_HERMITE_DEGREE} rejected (recurrence accuracy)")
    if sigma <= 0:
        raise ValueError("variance parameter sigma must be positive")
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = hermite_batch(n, arr, float(sigma))
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out[0])
    return out


def wick_abs_square(g: complex, var: float):
    """:|g|^2: = |g|^2 - Var(g). Accepts scalars or arrays."""
    g = np.asarray(g)
    out = g.real**2 + g.imag**2 - var
    return out if g.ndim else float(out)


def wick_abs_fourth(g: complex, var: float):
    """:|g|^4: = |g|^4 - 4 Var |g|^2 + 2 Var^2. Accepts scalars or arrays."""
    g = np.asarray(g)
    a2 = g.real**2 + g.imag**2
    out = a2**2 - 4.0 * var * a2 + 2.0 * var**2
    return out if g.ndim else float(out)


def renormalization_constant(max_mode: int, alpha: float) -> float:
    """Expected mean intensity of the truncated Gaussian field.

    sum_{|n| <= max_mode} 1 / (1 + |n|^(2 alpha)); alpha = 0 is the
    white-noise weight, alpha = 1 the massive free-field weight.
    """
    if max_mode < 0:
        raise ValueError("max_mode must be >= 0")
    n = np.arange(-max_mode, max_mode + 1, dtype=np.float64)
    return float(np.sum(1.0 / (1.0 + np.abs(n) ** (2.0 * alpha))))


def intensity_fluctuation(field: fld.TorusField, max_mode: int, alpha: float) -> float:
    """Centered mean intensity of the projected field: mu(P_N u) - E[mu]."""
    return fld.mean_intensity(fld.project(field, max_mode)) - renormalization_constant(
        max_mode, alpha
    )


def wick_hamiltonian(field: fld.TorusField, max_mode: int, alpha: float,
                     sign: int) -> float:
    """Wick-ordered truncated Hamiltonian.

    (1/2) * integral |u_x|^2 + sign * (1/4) * integral of the Wick-ordered
    quartic |u|^4 - 4 a |u|^2 + 2 a^2, with u = P_N field and a the
    renormalization constant for (max_mode, alpha).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    u = fld.project(field, max_mode)
    kinetic = 0.5 * fld.TWO_PI * float(np.sum(u.modes**2 * np.abs(u.coeffs) ** 2))
    a = renormalization_constant(max_mode, alpha)
    mass_integral = fld.TWO_PI * fld.mean_intensity(u)
    quartic = fld.quartic_integral(u) - 4.0 * a * mass_integral + 2.0 * a**2 * fld.TWO_PI
    return kinetic + sign * 0.25 * quartic


# ---------------------------------------------------------------------------
# hypercontractivity: ||F||_q <= (q-1)^{n/2} ||F||_2 for order-n chaos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypercontractivityReport:
    order: int
    dim: int
    q: float
    samples: int
    seed: int
    lhs: float
    rhs: float
    stderr: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "n": self.order, "d": self.dim, "q": self.q, "samples": self.samples,
            "seed": self.seed, "lhs": self.lhs, "rhs": self.rhs,
            "stderr": self.stderr, "pass": self.passed,
        }


def _validate_terms(terms, order, dim):
    cleaned = []
    for coeff, degrees in terms:
        degrees = tuple(int(d) for d in degrees)
        if len(degrees) > dim:
            raise ValueError("chaos term uses more coordinates than dim")
        if any(d < 0 for d in degrees):
            raise ValueError("chaos degrees must be >= 0")
        if sum(degrees) != order:
            raise ValueError(f"chaos term degrees {degrees} do not sum to order {order}")
        cleaned.append((float(coeff), degrees))
    if not cleaned:
        raise ValueError("need at least one chaos term")
    return cleaned


def gaussian_batches(dim: int, samples: int, seed: int, batch: int = _MC_BATCH):
    """Deterministic i.i.d. N(0,1) batches, shape (b, dim), keyed Philox streams.

    Partitioning is by fixed batch index, so the stream is reproducible and
    safe to distribute over workers as long as results are reduced in batch
    order.
    """
    produced = 0
    index = 0
    while produced < samples:
        take = min(batch, samples - produced)
        gen = np.random.Generator(
            np.random.Philox(key=np.array([seed, index], dtype=np.uint64))
        )
        yield gen.standard_normal((take, dim))
        produced += take
        index += 1


def evaluate_chaos(x: np.ndarray, terms) -> np.ndarray:
    """Evaluate sum_k coeff_k * prod_j H_{deg_kj}(x_j) row-wise on x (b, dim)."""
    out = np.zeros(x.shape[0])
    for coeff, degrees in terms:
        term = np.full(x.shape[0], coeff)
        for j, deg in enumerate(degrees):
            if deg > 0:
                term *= hermite_batch(deg, np.ascontiguousarray(x[:, j]), 1.0)
        out += term
    return out


def hypercontractivity_check(order: int, dim: int, q: float, samples: int = 1_000_000,
                             seed: int = 0, terms=None) -> HypercontractivityReport:
    """Monte-Carlo check of the chaos moment bound ||F||_q <= (q-1)^{n/2} ||F||_2.

    F defaults to the single chaos H_order(x_1); pass ``terms`` as a sequence
    of (coefficient, degree-tuple) pairs for other linear combinations. The
    check is statistical: pass means lhs <= rhs * (1 + 3 * stderr margin).
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if order < 0 or dim < 1:
        raise ValueError("order must be >= 0 and dim >= 1")
    if samples < 10_000:
        raise ValueError("need at least 1e4 samples")
    terms = _validate_terms(terms if terms is not None else [(1.0, (order,))], order, dim)

    s2 = s4 = sq = s2q = 0.0
    half_q = q / 2.0
    for x in gaussian_batches(dim, samples, seed):
        f2 = evaluate_chaos(x, terms) ** 2
        fq = f2**half_q
        s2 += f2.sum()
        s4 += (f2 * f2).sum()
        sq += fq.sum()
        s2q += (fq * fq).sum()

    m2 = s2 / samples
    mq = sq / samples
    lhs = mq ** (1.0 / q)
    rhs = (q - 1.0) ** (order / 2.0) * math.sqrt(m2)
    rel_lhs = math.sqrt(max(s2q / samples - mq**2, 0.0) / samples) / (q * mq) if mq > 0 else 0.0
    rel_rhs = math.sqrt(max(s4 / samples - m2**2, 0.0) / samples) / (2 * m2) if m2 > 0 else 0.0
    margin = rel_lhs + rel_rhs
    return HypercontractivityReport(
        order=order, dim=dim, q=float(q), samples=int(samples), seed=int(seed),
        lhs=float(lhs), rhs=float(rhs),
        stderr=float(math.hypot(rel_lhs, rel_rhs)),
        passed=bool(lhs <= rhs * (1.0 + 3.0 * margin)),
    )
