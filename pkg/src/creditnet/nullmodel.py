"""Maximum-entropy counterfactual models for bipartite credit networks.

Three interchangeable link models are provided:

* a fitness model where the connection probability between firm ``i`` and
  bank ``j`` is ``z s_i t_j / (1 + z s_i t_j)`` with ``z`` calibrated to
  the observed link count (network-driven or balance-driven, depending on
  which strength proxies the node size);
* a degree-constrained configuration model with per-node multipliers;
* a random baseline with constant probability equal to the density.

Sampled links receive conditional weights ``s_i t_j / (W p_ij)`` with
``W = sqrt(S T)``, so the unconditional expected weight is ``s_i t_j / W``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .core import BipartiteNetwork, derived_degrees, derived_strengths, Sample

__all__ = [
    "NullModelError",
    "TargetOutOfRange",
    "NonpositiveFitness",
    "NonGraphicalTargets",
    "NoConvergence",
    "Variant",
    "FitnessSpec",
    "BicmSpec",
    "ConstantSpec",
    "Ensemble",
    "link_probability",
    "calibrate_z",
    "dcgm_weight",
    "solve_bicm",
    "bicm_from_network",
    "fitness_spec_from_sample",
    "random_baseline",
    "expected_metrics",
    "sample_ensemble",
]


class NullModelError(ValueError):
    pass


class TargetOutOfRange(NullModelError):
    pass


class NonpositiveFitness(NullModelError):
    pass


class NonGraphicalTargets(NullModelError):
    pass


class NoConvergence(NullModelError):
    def __init__(self, max_iters, residual):
        self.max_iters, self.residual = max_iters, residual
        super().__init__(f"no convergence after {max_iters} iterations "
                         f"(residual {residual:.3e})")


class Variant(enum.Enum):
    NETWORK_DRIVEN = "network"
    BALANCE_DRIVEN = "balance"


def _as_fitness(values, name) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise NonpositiveFitness(f"{name} must be a non-empty 1-d sequence")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise NonpositiveFitness(f"{name} must be finite and non-negative")
    if not np.any(arr > 0):
        raise NonpositiveFitness(f"{name} must contain a positive entry")
    return arr


@dataclass(frozen=True)
class FitnessSpec:
    """Calibrated fitness link model with dcGM conditional weights."""

    s: np.ndarray
    t: np.ndarray
    z: float
    variant: Variant

    def __post_init__(self):
        object.__setattr__(self, "s", _as_fitness(self.s, "firm fitness"))
        object.__setattr__(self, "t", _as_fitness(self.t, "bank fitness"))
        if self.z <= 0 or not np.isfinite(self.z):
            raise NullModelError("z must be a positive real")

    @property
    def total_firm_size(self) -> float:
        return float(self.s.sum())

    @property
    def total_bank_size(self) -> float:
        return float(self.t.sum())

    @property
    def weight_norm(self) -> float:
        """Normalization W = sqrt(S T) of the conditional weight rule."""
        return float(np.sqrt(self.total_firm_size * self.total_bank_size))

    def probability_matrix(self) -> np.ndarray:
        st = self.z * np.outer(self.s, self.t)
        return st / (1.0 + st)

    def to_json(self) -> dict:
        return {
            "model": "fitness",
            "variant": self.variant.value,
            "z": self.z,
            "firm_fitness": self.s.tolist(),
            "bank_fitness": self.t.tolist(),
        }


@dataclass(frozen=True)
class BicmSpec:
    """Degree-constrained model: p_ij = x_i y_j / (1 + x_i y_j).

    ``s`` and ``t`` supply the node sizes for the conditional weight rule;
    they are not part of the degree constraints.
    """

    x: np.ndarray
    y: np.ndarray
    target_firm_degrees: np.ndarray
    target_bank_degrees: np.ndarray
    s: np.ndarray | None = None
    t: np.ndarray | None = None

    @property
    def weight_norm(self) -> float:
        if self.s is None or self.t is None:
            raise NullModelError("no node sizes attached for weight assignment")
        return float(np.sqrt(self.s.sum() * self.t.sum()))

    def probability_matrix(self) -> np.ndarray:
        xy = np.outer(self.x, self.y)
        return xy / (1.0 + xy)

    def with_sizes(self, s, t) -> "BicmSpec":
        return BicmSpec(self.x, self.y, self.target_firm_degrees,
                        self.target_bank_degrees,
                        _as_fitness(s, "firm size"), _as_fitness(t, "bank size"))

    def to_json(self) -> dict:
        return {
            "model": "bicm",
            "firm_multipliers": self.x.tolist(),
            "bank_multipliers": self.y.tolist(),
            "target_firm_degrees": self.target_firm_degrees.tolist(),
            "target_bank_degrees": self.target_bank_degrees.tolist(),
        }


@dataclass(frozen=True)
class ConstantSpec:
    """Random baseline: constant link probability equal to the density."""

    density: float
    n_firms: int
    n_banks: int
    s: np.ndarray
    t: np.ndarray
    variant: Variant

    @property
    def weight_norm(self) -> float:
        return float(np.sqrt(self.s.sum() * self.t.sum()))

    def probability_matrix(self) -> np.ndarray:
        return np.full((self.n_firms, self.n_banks), self.density)

    def to_json(self) -> dict:
        return {
            "model": "random",
            "variant": self.variant.value,
            "density": self.density,
        }


def link_probability(spec, i: int, j: int) -> float:
    """Connection probability for the pair (i, j) under the model."""
    return float(spec.probability_matrix()[i, j])


def _expected_links(z, s, t):
    st = z * np.outer(s, t)
    p = st / (1.0 + st)
    return float(p.sum()), p


def calibrate_z(s, t, l_target: float, rel_tol: float = 1e-10) -> float:
    """Solve sum_ij p_ij(z) = l_target for the unique positive root.

    The expected link count is strictly increasing in ``z``, so a doubling
    bracket plus bisection always converges; a Newton polish then drives
    the relative residual below ``rel_tol``.
    """
    s = _as_fitness(s, "firm fitness")
    t = _as_fitness(t, "bank fitness")
    max_links = int(np.count_nonzero(s > 0)) * int(np.count_nonzero(t > 0))
    if not 0 < l_target < max_links:
        raise TargetOutOfRange(
            f"target link count {l_target} outside (0, {max_links})")

    lo, hi = 1e-18, 1.0
    while _expected_links(hi, s, t)[0] <= l_target:
        hi *= 2.0
        if hi > 1e30:
            raise NoConvergence(0, float("inf"))
    while _expected_links(lo, s, t)[0] >= l_target:
        lo /= 2.0

    for _ in range(200):
        mid = np.sqrt(lo * hi)  # geometric bisection: z spans many decades
        if _expected_links(mid, s, t)[0] < l_target:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1 + 1e-12:
            break

    z = np.sqrt(lo * hi)
    for _ in range(50):
        total, p = _expected_links(z, s, t)
        resid = total - l_target
        if abs(resid) <= rel_tol * l_target:
            return float(z)
        slope = float((p * (1.0 - p)).sum()) / z
        step = resid / slope
        z_new = z - step
        if z_new <= 0:
            z_new = z / 2.0
        z = z_new
    raise NoConvergence(50, abs(resid) / l_target)


def fitness_spec_from_sample(sample: Sample, variant: Variant) -> FitnessSpec:
    """Calibrate a fitness model on a sample for the requested variant."""
    net = sample.network
    if variant is Variant.NETWORK_DRIVEN:
        s, t = derived_strengths(net)
    else:
        s = sample.firm_series("balance_strength")
        t = sample.bank_series("balance_strength")
    z = calibrate_z(s, t, net.n_links)
    return FitnessSpec(s=s, t=t, z=z, variant=variant)


def dcgm_weight(spec, i: int, j: int) -> float:
    """Conditional weight of link (i, j): s_i t_j / (W p_ij)."""
    p = link_probability(spec, i, j)
    if p == 0:
        return 0.0
    return float(spec.s[i] * spec.t[j] / (spec.weight_norm * p))


def _weight_matrix(spec, p: np.ndarray) -> np.ndarray:
    st = np.outer(spec.s, spec.t)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(p > 0, st / (spec.weight_norm * p), 0.0)
    return w


def solve_bicm(k, h, tol: float = 1e-8, max_iters: int = 10_000,
               damping: float = 0.5) -> BicmSpec:
    """Fit per-node multipliers so expected degrees match the targets.

    Damped multiplicative fixed-point iteration; nodes with target degree
    zero get a zero multiplier (their row or column has p identically 0).
    """
    k = np.asarray(k, dtype=float)
    h = np.asarray(h, dtype=float)
    nf, nb = k.size, h.size
    if np.any(k < 0) or np.any(h < 0):
        raise NonGraphicalTargets("degrees must be non-negative")
    if abs(k.sum() - h.sum()) > 1e-9 * max(1.0, k.sum()):
        raise NonGraphicalTargets(
            f"degree sums differ: {k.sum()} vs {h.sum()}")
    if np.any(k > nb) or np.any(h > nf):
        raise NonGraphicalTargets("a target degree exceeds the opposite side")
    if np.any(k == nb) or np.any(h == nf):
        # a saturated node needs an infinite multiplier
        raise NonGraphicalTargets("full-degree nodes are not supported")
    if k.sum() == 0:
        return BicmSpec(np.zeros(nf), np.zeros(nb), k, h)

    active_f = k > 0
    active_b = h > 0
    x = np.where(active_f, k / nb, 0.0)
    y = np.where(active_b, h / nf, 0.0)

    residual = np.inf
    for _ in range(max_iters):
        xy = np.outer(x, y)
        p = xy / (1.0 + xy)
        rk = p.sum(axis=1) - k
        rh = p.sum(axis=0) - h
        residual = max(np.abs(rk).max(), np.abs(rh).max())
        if residual < tol:
            return BicmSpec(x, y, k, h)
        with np.errstate(divide="ignore", invalid="ignore"):
            denom_x = (y[None, :] / (1.0 + xy)).sum(axis=1)
            x_prop = np.where(active_f, k / denom_x, 0.0)
            xy = np.outer(x_prop, y)
            denom_y = (x_prop[:, None] / (1.0 + xy)).sum(axis=0)
            y_prop = np.where(active_b, h / denom_y, 0.0)
        # geometric damping keeps the iterates positive
        x = np.where(active_f, x**(1 - damping) * x_prop**damping, 0.0)
        y = np.where(active_b, y**(1 - damping) * y_prop**damping, 0.0)
    raise NoConvergence(max_iters, residual)


def bicm_from_network(net: BipartiteNetwork, **kwargs) -> BicmSpec:
    """Degree-constrained model of a network, sized by network strengths."""
    k, h = derived_degrees(net)
    s, t = derived_strengths(net)
    return solve_bicm(k, h, **kwargs).with_sizes(s, t)


def random_baseline(net: BipartiteNetwork, sample: Sample | None = None,
                    variant: Variant = Variant.NETWORK_DRIVEN) -> ConstantSpec:
    """Constant-probability baseline at the empirical density."""
    if net.n_links == 0:
        raise NullModelError("random baseline needs at least one link")
    if variant is Variant.NETWORK_DRIVEN or sample is None:
        s, t = derived_strengths(net)
    else:
        s = sample.firm_series("balance_strength")
        t = sample.bank_series("balance_strength")
    return ConstantSpec(density=net.density, n_firms=net.n_firms,
                        n_banks=net.n_banks, s=_as_fitness(s, "firm size"),
                        t=_as_fitness(t, "bank size"), variant=variant)


@dataclass(frozen=True)
class ExpectedMetrics:
    """Closed-form ensemble expectations of degrees, strengths and weights."""

    firm_degrees: np.ndarray
    bank_degrees: np.ndarray
    firm_strengths: np.ndarray
    bank_strengths: np.ndarray
    weights: np.ndarray


def expected_metrics(spec) -> ExpectedMetrics:
    """Expected degrees/strengths/weights of a calibrated model."""
    p = spec.probability_matrix()
    w_cond = _weight_matrix(spec, p)
    w_mean = p * w_cond  # = s_i t_j / W wherever p > 0
    return ExpectedMetrics(
        firm_degrees=p.sum(axis=1),
        bank_degrees=p.sum(axis=0),
        firm_strengths=w_mean.sum(axis=1),
        bank_strengths=w_mean.sum(axis=0),
        weights=w_mean,
    )


@dataclass
class Ensemble:
    """Streaming statistics over seeded Monte Carlo configurations.

    Per-sample randomness comes from a counter-based generator keyed by
    (seed, sample_index), so the accumulated statistics depend only on the
    seed and the sample count, never on scheduling.
    """

    spec: object
    n_samples: int
    seed: int
    sum_firm_degrees: np.ndarray
    sumsq_firm_degrees: np.ndarray
    sum_bank_degrees: np.ndarray
    sumsq_bank_degrees: np.ndarray
    sum_firm_strengths: np.ndarray
    sumsq_firm_strengths: np.ndarray
    sum_bank_strengths: np.ndarray
    sumsq_bank_strengths: np.ndarray
    sum_weights: np.ndarray
    sum_links: float
    sumsq_links: float

    def _mean(self, total):
        return total / self.n_samples

    def _var(self, total, total_sq):
        m = total / self.n_samples
        return np.maximum(total_sq / self.n_samples - m**2, 0.0)

    @property
    def mean_firm_degrees(self):
        return self._mean(self.sum_firm_degrees)

    @property
    def mean_bank_degrees(self):
        return self._mean(self.sum_bank_degrees)

    @property
    def mean_firm_strengths(self):
        return self._mean(self.sum_firm_strengths)

    @property
    def mean_bank_strengths(self):
        return self._mean(self.sum_bank_strengths)

    @property
    def mean_weights(self):
        return self._mean(self.sum_weights)

    @property
    def mean_links(self):
        return self.sum_links / self.n_samples

    def stderr_firm_degrees(self):
        return np.sqrt(self._var(self.sum_firm_degrees,
                                 self.sumsq_firm_degrees) / self.n_samples)

    def stderr_bank_degrees(self):
        return np.sqrt(self._var(self.sum_bank_degrees,
                                 self.sumsq_bank_degrees) / self.n_samples)

    def stderr_firm_strengths(self):
        return np.sqrt(self._var(self.sum_firm_strengths,
                                 self.sumsq_firm_strengths) / self.n_samples)

    def stderr_bank_strengths(self):
        return np.sqrt(self._var(self.sum_bank_strengths,
                                 self.sumsq_bank_strengths) / self.n_samples)

    def to_json(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "seed": self.seed,
            "mean_links": self.mean_links,
            "mean_firm_degrees": self.mean_firm_degrees.tolist(),
            "mean_bank_degrees": self.mean_bank_degrees.tolist(),
            "mean_firm_strengths": self.mean_firm_strengths.tolist(),
            "mean_bank_strengths": self.mean_bank_strengths.tolist(),
        }


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF) << 64 | (int(index) & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


def sample_ensemble(spec, n_samples: int, seed: int,
                    keep_samples: bool = False) -> Ensemble | tuple:
    """Draw configurations and accumulate degree/strength statistics.

    With ``keep_samples`` the sampled weight matrices are returned as well
    (intended for small debugging runs only).
    """
    if n_samples < 1:
        raise NullModelError("n_samples must be >= 1")
    p = spec.probability_matrix()
    w_cond = _weight_matrix(spec, p)
    nf, nb = p.shape

    acc = Ensemble(
        spec=spec, n_samples=n_samples, seed=seed,
        sum_firm_degrees=np.zeros(nf), sumsq_firm_degrees=np.zeros(nf),
        sum_bank_degrees=np.zeros(nb), sumsq_bank_degrees=np.zeros(nb),
        sum_firm_strengths=np.zeros(nf), sumsq_firm_strengths=np.zeros(nf),
        sum_bank_strengths=np.zeros(nb), sumsq_bank_strengths=np.zeros(nb),
        sum_weights=np.zeros((nf, nb)), sum_links=0.0, sumsq_links=0.0,
    )
    kept = []
    for idx in range(n_samples):
        rng = _sample_rng(seed, idx)
        a = rng.random((nf, nb)) < p
        w = np.where(a, w_cond, 0.0)
        k = a.sum(axis=1)
        h = a.sum(axis=0)
        s = w.sum(axis=1)
        t = w.sum(axis=0)
        links = float(k.sum())
        acc.sum_firm_degrees += k
        acc.sumsq_firm_degrees += k.astype(float)**2
        acc.sum_bank_degrees += h
        acc.sumsq_bank_degrees += h.astype(float)**2
        acc.sum_firm_strengths += s
        acc.sumsq_firm_strengths += s**2
        acc.sum_bank_strengths += t
        acc.sumsq_bank_strengths += t**2
        acc.sum_weights += w
        acc.sum_links += links
        acc.sumsq_links += links**2
        if keep_samples:
            kept.append(w)
    if keep_samples:
        return acc, kept
    return acc
