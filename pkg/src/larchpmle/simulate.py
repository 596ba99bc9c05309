"""Sample-path generation for linear-ARCH volatility processes.

The process is x_t = eps_t * sigma_t with sigma_t = a + sum_j b_j x_{t-j}.
Generation starts from an empty past (sigma_1 = a) and discards a burn-in
segment; the lag sum is truncated at order J.  A chain-expansion evaluator
of the stationary-solution series is provided as an independent oracle for
the recursion.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import CoeffSpec, ParamSpace, Theta, coeff_weights, sum_sq
from .errors import BudgetError, DomainError, NumericError, ValidationError

__all__ = ["SimConfig", "Sample", "derive_seed", "simulate", "volterra_sigma"]


def derive_seed(base_seed: int, stream: int) -> int:
    """Deterministic 64-bit per-stream seed from (base seed, stream index).

    Mixing is delegated to numpy's SeedSequence keyed on the pair, so
    distinct streams are statistically independent and reproducible.
    """
    ss = np.random.SeedSequence((int(base_seed), int(stream)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SimConfig:
    """Simulation protocol: sample length, burn-in, truncation, seed, noise.

    ``noise`` is either ``"gaussian"`` or a 1-d array of values sampled
    uniformly with replacement (an i.i.d. draw from the empirical table;
    the table should be centered and standardized).
    """

    n: int
    burn_in: int = 10_000
    J: int | None = None
    seed: int = 0
    noise: object = "gaussian"

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("sample length n must be >= 1")
        if self.burn_in < 0:
            raise DomainError("burn_in must be >= 0")
        if self.J is not None and self.J < 1:
            raise DomainError("truncation order J must be >= 1")
        if isinstance(self.noise, str):
            if self.noise != "gaussian":
                raise DomainError(f"unknown noise model {self.noise!r}")
        else:
            table = np.asarray(self.noise, dtype=float)
            if table.ndim != 1 or table.size < 2:
                raise DomainError("noise table must be a 1-d array of values")
            if not np.all(np.isfinite(table)):
                raise DomainError("noise table must be finite")
            if abs(table.mean()) > 0.1 or abs(table.var() - 1.0) > 0.1:
                raise ValidationError(
                    "noise table should be centered with unit variance")


@dataclass(frozen=True)
class Sample:
    """A simulated path: burn-in plus analysis window.

    Arrays cover the full generated range (length burn_in + n);
    ``first_retained`` is the 0-based index of the first analysis-window
    observation.  By construction x[t] = eps[t] * sigma[t] for every t.
    """

    x: np.ndarray
    sigma: np.ndarray
    eps: np.ndarray
    config: SimConfig
    theta: Theta
    spec: CoeffSpec
    first_retained: int

    @property
    def n(self) -> int:
        return len(self.x) - self.first_retained

    @property
    def x_obs(self) -> np.ndarray:
        """The n retained observations (analysis window)."""
        return self.x[self.first_retained:]

    @property
    def sigma_obs(self) -> np.ndarray:
        return self.sigma[self.first_retained:]

    @property
    def eps_obs(self) -> np.ndarray:
        return self.eps[self.first_retained:]

    def to_csv(self, fileobj, comment: str | None = None) -> None:
        """Write retained observations as ``t,x,sigma,eps`` rows.

        Values use 17 significant digits so a read-back is lossless.
        """
        if comment:
            fileobj.write(f"# {comment}\n")
        fileobj.write("t,x,sigma,eps\n")
        off = self.first_retained
        for i in range(self.n):
            fileobj.write(f"{i + 1},{self.x[off + i]:.17g},"
                          f"{self.sigma[off + i]:.17g},{self.eps[off + i]:.17g}\n")


def _draw_innovations(cfg: SimConfig, total: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    if isinstance(cfg.noise, str):
        return rng.standard_normal(total)
    table = np.asarray(cfg.noise, dtype=float)
    return rng.choice(table, size=total, replace=True)


def simulate(spec: CoeffSpec, theta0: Theta, cfg: SimConfig,
             space: ParamSpace | None = None) -> Sample:
    """Generate a path of length burn_in + n by the truncated recursion.

    sigma_1 = a, then sigma_t = a + sum_{j=1}^{min(J, t-1)} b_j x_{t-j} and
    x_t = eps_t sigma_t.  Deterministic given cfg.seed.  theta0 must lie in
    the parameter space and satisfy sum b_j^2 < 1.
    """
    space = space or ParamSpace()
    space.validate(theta0, spec)
    if sum_sq(spec, theta0) >= 1.0:
        raise ValidationError("sum of squared weights must be < 1")
    J = cfg.J if cfg.J is not None else spec.J
    total = cfg.burn_in + cfg.n
    eps = _draw_innovations(cfg, total)
    b_rev = coeff_weights(spec, theta0, J)[::-1].copy()
    x = np.empty(total)
    sig = np.empty(total)
    a = theta0.a
    for t in range(total):
        k = min(J, t)
        s = a + (b_rev[J - k:] @ x[t - k:t]) if k else a
        sig[t] = s
        x[t] = eps[t] * s
    return Sample(x=x, sigma=sig, eps=eps, config=cfg, theta=theta0,
                  spec=spec, first_retained=cfg.burn_in)


def volterra_sigma(spec: CoeffSpec, theta0: Theta, eps_prefix,
                   t: int, K_max: int, max_ops: int = 10_000_000) -> float:
    """Evaluate sigma_t by the chain-expansion series of the stationary solution.

    The series is sigma_t = a * (1 + sum_{k>=1} M_t(k)) where M_t(k) sums,
    over all lag chains j_1, ..., j_k >= 1 that stay inside the available
    history, the products b_{j_1} ... b_{j_k} eps_{t-j_1} ...
    eps_{t-j_1-...-j_k}.  Depths are summed layer by layer: the depth-k
    layer is obtained from the depth-(k-1) layer by one weighted
    convolution, so no chain is ever enumerated explicitly.  With
    K_max >= t - 1 the value equals the recursion started from an empty
    past exactly.

    ``max_ops`` caps the elementary chain-extension operations performed
    (each multiply-accumulate extends a bundle of chains by one lag).
    """
    eps_prefix = np.asarray(eps_prefix, dtype=float)
    t = int(t)
    if t < 1 or t > len(eps_prefix) + 1:
        raise DomainError("index t must satisfy 1 <= t <= len(eps_prefix) + 1")
    if K_max < 1:
        raise DomainError("K_max must be >= 1")
    m = t - 1                      # usable history eps_1..eps_{t-1}
    if m == 0:
        return theta0.a
    depth = min(K_max, m)
    # one m^2 weighted convolution per depth layer
    if depth * m * m > max_ops:
        raise BudgetError(
            f"chain-expansion budget exceeded: t = {t}, K_max = {K_max}")
    b = coeff_weights(spec, theta0, m)
    eps = eps_prefix[:m]
    # prev[s-1] holds the depth-(k-1) chain sum rooted at time s (1-based).
    prev = np.ones(m)
    total = 0.0
    for _ in range(depth):
        g = eps * prev
        # cur[v-1] = sum_{s < v} b_{v-s} eps_s prev_s  for v = 2..t
        conv = np.convolve(b, g)
        total += conv[m - 1]       # v = t term
        if m == 1:
            break
        prev = np.concatenate(([0.0], conv[: m - 1]))
        if not prev.any():
            break
    result = theta0.a * (1.0 + total)
    if not math.isfinite(result):
        raise NumericError("chain expansion produced a non-finite value")
    return float(result)
