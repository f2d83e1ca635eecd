"""Two-stage credit regressions: link formation (logit) and loan sizing (OLS).

Design matrices follow three nested specifications: a gravity model on
balance-sheet fundamentals, a network model on degrees and strengths, and
a full model combining both. Topological predictors receive rest-of-the-
world corrections so a pair's own link never enters its predictors.
Placebo designs replace empirical degrees with null-model expected degrees
under a cross-controlling convention.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Sample, derived_degrees, derived_strengths
from .nullmodel import expected_metrics

__all__ = [
    "EconError",
    "MissingNullModel",
    "AllRowsDropped",
    "Separation",
    "SingularInformation",
    "NoConvergence",
    "RankDeficient",
    "SingletonGroupsOnly",
    "AbsorbedColumns",
    "Stage",
    "Model",
    "DegreeVariant",
    "DegreeSource",
    "FixedEffects",
    "ModelSpec",
    "DesignMatrix",
    "CoefficientStat",
    "FitResult",
    "herman_correct",
    "build_design",
    "fit_logit",
    "fit_ols",
    "fit_ols_fixed_effects",
    "vif",
]

log = logging.getLogger(__name__)

STRENGTH_FLOOR = 1.0  # one currency unit, keeps log terms finite
EXPECTED_DEGREE_FLOOR = 1e-8


class EconError(ValueError):
    pass


class MissingNullModel(EconError):
    pass


class AllRowsDropped(EconError):
    pass


class Separation(EconError):
    pass


class SingularInformation(EconError):
    pass


class NoConvergence(EconError):
    pass


class RankDeficient(EconError):
    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__(f"rank-deficient design; dependent columns: {self.columns}")


class SingletonGroupsOnly(EconError):
    pass


class AbsorbedColumns(EconError):
    pass


class Stage(enum.Enum):
    LINK_FORMATION = "link_formation"
    LOAN_SIZING = "loan_sizing"


class Model(enum.Enum):
    M1_GRAVITY = "m1"
    M2_NETWORK = "m2"
    M3_FULL = "m3"


class DegreeVariant(enum.Enum):
    A_WITH_DEGREE = "a"
    B_WITHOUT_DEGREE = "b"


class DegreeSource(enum.Enum):
    EMPIRICAL = "empirical"
    NULL_NET = "null_net"
    NULL_BAL = "null_bal"


class FixedEffects(enum.Enum):
    NONE = "none"
    BANK_DUMMIES = "bank"


@dataclass(frozen=True)
class ModelSpec:
    """A regression design: stage, variable set, corrections, fixed effects."""

    stage: Stage
    model: Model
    variant: DegreeVariant = DegreeVariant.A_WITH_DEGREE
    degree_source: DegreeSource = DegreeSource.EMPIRICAL
    fixed_effects: FixedEffects = FixedEffects.NONE
    herman: bool = True
    drop_network_strength: bool = False  # the "no strength" placebo column

    def __post_init__(self):
        if self.degree_source is not DegreeSource.EMPIRICAL and \
                self.model is not Model.M3_FULL:
            raise EconError("placebo degree sources require the full model")
        if self.drop_network_strength and self.model is not Model.M3_FULL:
            raise EconError("drop_network_strength requires the full model")

    def name(self) -> str:
        parts = [self.stage.value, self.model.value]
        if self.model is not Model.M1_GRAVITY:
            parts.append(self.variant.value)
        if self.degree_source is not DegreeSource.EMPIRICAL:
            parts.append(self.degree_source.value)
        if self.drop_network_strength:
            parts.append("nostrength")
        if self.fixed_effects is not FixedEffects.NONE:
            parts.append("fe")
        return "_".join(parts)


FIRM_NETWORK_COLS = ("ln_s_net", "ln_k", "is_exclusive")
BANK_NETWORK_COLS = ("ln_t_net", "ln_h")
FIRM_FUNDAMENTAL_COLS = ("ln_s_bal", "ln_assets_firm", "lev_firm",
                         "roa_firm", "tang")
BANK_FUNDAMENTAL_COLS = ("ln_t_bal", "ln_assets_bank", "lev_bank", "roa_bank")
BANK_SIDE_COLS = frozenset(BANK_NETWORK_COLS + BANK_FUNDAMENTAL_COLS +
                           ("ln_h_null",))


@dataclass(frozen=True)
class DesignMatrix:
    """Assembled regression rows with provenance metadata."""

    spec: ModelSpec
    column_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    firm_index: np.ndarray
    bank_index: np.ndarray
    dummy_columns: frozenset[str]
    bank_columns: frozenset[str]
    n_floored: dict[str, int]
    n_dropped: int

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.column_names.index(name)]


@dataclass(frozen=True)
class HermanCorrected:
    firm_degree: float
    bank_degree: float
    firm_net_strength: float
    bank_net_strength: float
    firm_bal_strength: float
    bank_bal_strength: float


def herman_correct(net, i: int, j: int, stage: Stage,
                   s_bal: float = 0.0, t_bal: float = 0.0) -> HermanCorrected:
    """Rest-of-the-world predictors for the pair (i, j).

    Stage 1 subtracts the focal link (if present) from degrees and network
    strengths only; stage 2, which conditions on the link existing, also
    subtracts the loan amount from both balance-sheet strengths.
    """
    k, h = derived_degrees(net)
    s_net, t_net = derived_strengths(net)
    w = float(net.weights[i, j])
    a = 1.0 if w > 0 else 0.0
    if stage is Stage.LINK_FORMATION:
        return HermanCorrected(
            firm_degree=float(k[i]) - a,
            bank_degree=float(h[j]) - a,
            firm_net_strength=float(s_net[i]) - w,
            bank_net_strength=float(t_net[j]) - w,
            firm_bal_strength=float(s_bal),
            bank_bal_strength=float(t_bal),
        )
    if a != 1.0:
        raise EconError("loan-sizing correction applies to existing links only")
    sb = float(s_bal) - w
    tb = float(t_bal) - w
    if sb < 0 or tb < 0:
        log.warning("corrected balance strength negative for pair (%d, %d); "
                    "clamped to 0", i, j)
    return HermanCorrected(
        firm_degree=float(k[i]) - 1.0,
        bank_degree=float(h[j]) - 1.0,
        firm_net_strength=float(s_net[i]) - w,
        bank_net_strength=float(t_net[j]) - w,
        firm_bal_strength=max(sb, 0.0),
        bank_bal_strength=max(tb, 0.0),
    )


def _columns_for(spec: ModelSpec) -> list[str]:
    with_degree = spec.variant is DegreeVariant.A_WITH_DEGREE
    if spec.model is Model.M1_GRAVITY:
        return list(FIRM_FUNDAMENTAL_COLS + BANK_FUNDAMENTAL_COLS)
    if spec.model is Model.M2_NETWORK:
        firm = ["ln_s_net"] + (["ln_k", "is_exclusive"] if with_degree else [])
        bank = ["ln_t_net"] + (["ln_h"] if with_degree else [])
        return firm + bank
    # full model
    if spec.degree_source is DegreeSource.EMPIRICAL:
        firm = ["ln_s_net"] + (["ln_k", "is_exclusive"] if with_degree else [])
        firm += list(FIRM_FUNDAMENTAL_COLS)
        bank = ["ln_t_net"] + (["ln_h"] if with_degree else [])
        bank += list(BANK_FUNDAMENTAL_COLS)
        if spec.drop_network_strength:
            firm.remove("ln_s_net")
            bank.remove("ln_t_net")
        return firm + bank
    if spec.degree_source is DegreeSource.NULL_NET:
        # degrees from the volume-driven null, cross-controlled by s_bal/t_bal
        firm = ["ln_k_null"] + list(FIRM_FUNDAMENTAL_COLS)
        bank = ["ln_h_null"] + list(BANK_FUNDAMENTAL_COLS)
        return firm + bank
    # NULL_BAL: degrees from the accounting-size null, controlled by s_net/t_net
    firm = ["ln_k_null", "ln_s_net", "ln_assets_firm", "lev_firm",
            "roa_firm", "tang"]
    bank = ["ln_h_null", "ln_t_net", "ln_assets_bank", "lev_bank", "roa_bank"]
    return firm + bank


def _floored_log(values: np.ndarray, floor: float, counter: dict, name: str):
    floored = values < floor
    counter[name] = counter.get(name, 0) + int(floored.sum())
    return np.log(np.maximum(values, floor))


def build_design(sample: Sample, spec: ModelSpec,
                 null_models: dict | None = None) -> DesignMatrix:
    """Assemble the design matrix and response for a model specification."""
    net = sample.network
    nf, nb = net.n_firms, net.n_banks
    k, h = derived_degrees(net)
    s_net, t_net = derived_strengths(net)
    s_bal = sample.firm_series("balance_strength")
    t_bal = sample.bank_series("balance_strength")
    w = net.weights
    a = (w > 0).astype(float)

    columns = _columns_for(spec)
    if spec.fixed_effects is FixedEffects.BANK_DUMMIES:
        columns = [c for c in columns if c not in BANK_SIDE_COLS]

    needs_null = any(c in ("ln_k_null", "ln_h_null") for c in columns)
    null_spec = None
    if needs_null:
        if not null_models or spec.degree_source not in null_models:
            raise MissingNullModel(
                f"design requires a calibrated {spec.degree_source.value} model")
        null_spec = null_models[spec.degree_source]

    # pair scope and row filtering
    fi, bi = np.meshgrid(np.arange(nf), np.arange(nb), indexing="ij")
    fi, bi = fi.ravel(), bi.ravel()
    n_dropped = 0
    if spec.stage is Stage.LOAN_SIZING:
        keep = a[fi, bi] > 0
        fi, bi = fi[keep], bi[keep]
    elif spec.model is not Model.M1_GRAVITY:
        # banks isolated by the consistency filter carry no information for
        # network specifications; their rows are dropped with a logged count
        keep = h[bi] > 0
        n_dropped = int((~keep).sum())
        fi, bi = fi[keep], bi[keep]
    if fi.size == 0:
        raise AllRowsDropped("no rows left for this specification")

    a_row = a[fi, bi]
    w_row = w[fi, bi]

    # rest-of-the-world corrections
    if spec.herman:
        if spec.stage is Stage.LINK_FORMATION:
            k_c = k[fi] - a_row
            h_c = h[bi] - a_row
            s_net_c = s_net[fi] - w_row
            t_net_c = t_net[bi] - w_row
            s_bal_c = s_bal[fi]
            t_bal_c = t_bal[bi]
        else:
            k_c = k[fi] - 1.0
            h_c = h[bi] - 1.0
            s_net_c = s_net[fi] - w_row
            t_net_c = t_net[bi] - w_row
            s_bal_c = s_bal[fi] - w_row
            t_bal_c = t_bal[bi] - w_row
            n_neg = int((s_bal_c < 0).sum() + (t_bal_c < 0).sum())
            if n_neg:
                log.warning("%d corrected balance strengths were negative; "
                            "clamped to 0", n_neg)
            s_bal_c = np.maximum(s_bal_c, 0.0)
            t_bal_c = np.maximum(t_bal_c, 0.0)
    else:
        k_c, h_c = k[fi].astype(float), h[bi].astype(float)
        s_net_c, t_net_c = s_net[fi], t_net[bi]
        s_bal_c, t_bal_c = s_bal[fi], t_bal[bi]

    floored: dict[str, int] = {}
    values: dict[str, np.ndarray] = {}
    for name in columns:
        if name == "ln_s_net":
            values[name] = _floored_log(s_net_c, STRENGTH_FLOOR, floored, name)
        elif name == "ln_t_net":
            values[name] = _floored_log(t_net_c, STRENGTH_FLOOR, floored, name)
        elif name == "ln_s_bal":
            values[name] = _floored_log(s_bal_c, STRENGTH_FLOOR, floored, name)
        elif name == "ln_t_bal":
            values[name] = _floored_log(t_bal_c, STRENGTH_FLOOR, floored, name)
        elif name == "ln_k":
            values[name] = np.log(np.maximum(k_c, 1.0))
        elif name == "ln_h":
            values[name] = np.log(np.maximum(h_c, 1.0))
        elif name == "is_exclusive":
            # single-banked on the uncorrected network
            values[name] = (k[fi] == 1).astype(float)
        elif name == "ln_k_null":
            exp_k = expected_metrics(null_spec).firm_degrees
            values[name] = _floored_log(exp_k[fi], EXPECTED_DEGREE_FLOOR,
                                        floored, name)
        elif name == "ln_h_null":
            exp_h = expected_metrics(null_spec).bank_degrees
            values[name] = _floored_log(exp_h[bi], EXPECTED_DEGREE_FLOOR,
                                        floored, name)
        elif name == "ln_assets_firm":
            values[name] = np.log(sample.firm_series("total_assets"))[fi]
        elif name == "ln_assets_bank":
            values[name] = np.log(sample.bank_series("total_assets"))[bi]
        elif name == "lev_firm":
            values[name] = sample.firm_series("leverage")[fi]
        elif name == "roa_firm":
            values[name] = sample.firm_series("roa")[fi]
        elif name == "tang":
            values[name] = sample.firm_series("tangibility")[fi]
        elif name == "lev_bank":
            values[name] = sample.bank_series("leverage")[bi]
        elif name == "roa_bank":
            values[name] = sample.bank_series("roa")[bi]
        else:  # pragma: no cover
            raise EconError(f"unknown column {name}")

    X = np.column_stack([values[c] for c in columns])
    if not np.all(np.isfinite(X)):
        raise EconError("non-finite entries in the design matrix")
    if spec.stage is Stage.LINK_FORMATION:
        y = a_row.copy()
    else:
        y = np.log(w_row)

    return DesignMatrix(
        spec=spec,
        column_names=tuple(columns),
        X=X,
        y=y,
        firm_index=fi,
        bank_index=bi,
        dummy_columns=frozenset({"is_exclusive"} & set(columns)),
        bank_columns=frozenset(BANK_SIDE_COLS & set(columns)),
        n_floored=floored,
        n_dropped=n_dropped,
    )


# ---------------------------------------------------------------------------
# estimation


@dataclass(frozen=True)
class CoefficientStat:
    estimate: float
    std_error: float
    p_value: float
    stars: str


@dataclass(frozen=True)
class FitResult:
    """Estimates and fit diagnostics of a single regression."""

    method: str
    coefficients: dict[str, CoefficientStat]
    fit_stat: float
    fit_stat_name: str
    n_obs: int
    objective: float  # log-likelihood (logit) or RSS (OLS)
    converged: bool
    n_iter: int
    ame: dict[str, float] | None = None
    residuals: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "method": self.method,
            "n_obs": self.n_obs,
            self.fit_stat_name: self.fit_stat,
            "objective": self.objective,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "coefficients": {
                name: {
                    "estimate": c.estimate,
                    "std_error": c.std_error,
                    "p_value": c.p_value,
                    "stars": c.stars,
                }
                for name, c in self.coefficients.items()
            },
        }
        if self.ame is not None:
            out["ame"] = dict(self.ame)
        if self.extra:
            out["extra"] = {k: v for k, v in sorted(self.extra.items())}
        return out

    def format_table(self, title: str = "") -> str:
        lines = []
        if title:
            lines += [title, "=" * len(title)]
        width = max(len(n) for n in self.coefficients) + 2
        for name, c in self.coefficients.items():
            entry = f"{c.estimate:.4f}{c.stars} ({c.std_error:.4f})"
            if self.ame and name in self.ame:
                entry += f" [{self.ame[name]:.4f}]"
            lines.append(f"{name:<{width}}{entry}")
        lines.append(f"{'Observations':<{width}}{self.n_obs}")
        lines.append(f"{self.fit_stat_name:<{width}}{self.fit_stat:.4f}")
        for key, value in sorted(self.extra.items()):
            if isinstance(value, float):
                lines.append(f"{key:<{width}}{value:.4f}")
            else:
                lines.append(f"{key:<{width}}{value}")
        return "\n".join(lines) + "\n"


def _stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def _p_value(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


def _coef_stats(names, beta, se) -> dict[str, CoefficientStat]:
    out = {}
    for name, b, s in zip(names, beta, se):
        z = b / s if s > 0 else math.inf
        p = _p_value(z)
        out[name] = CoefficientStat(float(b), float(s), float(p), _stars(p))
    return out


def _dependent_columns(X: np.ndarray, names, tol: float = 1e-10):
    """Name columns that are linear combinations of the preceding ones."""
    basis = []
    bad = []
    for idx, name in enumerate(names):
        v = X[:, idx].astype(float).copy()
        norm0 = np.linalg.norm(v)
        if norm0 == 0:
            bad.append(name)
            continue
        for b in basis:
            v -= (b @ v) * b
        if np.linalg.norm(v) < tol * norm0:
            bad.append(name)
        else:
            basis.append(v / np.linalg.norm(v))
    return bad


def fit_logit(design: DesignMatrix, tol_score: float = 1e-8,
              tol_ll: float = 1e-12, max_iters: int = 200) -> FitResult:
    """Maximum-likelihood logit via iteratively reweighted least squares."""
    y = design.y
    if not np.all((y == 0) | (y == 1)):
        raise EconError("logit response must be binary")
    n = y.size
    names = ("intercept",) + design.column_names
    X = np.column_stack([np.ones(n), design.X])
    p_dim = X.shape[1]
    if n <= p_dim:
        raise EconError("need more observations than parameters")

    ybar = y.mean()
    if ybar in (0.0, 1.0):
        raise EconError("response has a single class")
    ll_null = n * (ybar * math.log(ybar) + (1 - ybar) * math.log(1 - ybar))

    beta = np.zeros(p_dim)
    ll_old = -np.inf
    converged = False
    for it in range(1, max_iters + 1):
        eta = X @ beta
        p = 1.0 / (1.0 + np.exp(-np.clip(eta, -700, 700)))
        ll = float(y @ eta - np.logaddexp(0.0, eta).sum())
        score = X.T @ (y - p)
        weights = p * (1.0 - p)
        if np.abs(score).max() < tol_score and \
                abs(ll - ll_old) <= tol_ll * max(1.0, abs(ll)):
            converged = True
            break
        info = (X * weights[:, None]).T @ X
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            raise SingularInformation("singular information matrix") from None
        beta = beta + step
        if np.abs(beta).max() > 1e4 or np.abs(eta).max() > 500:
            raise Separation("diverging coefficients indicate separation")
        ll_old = ll
    else:
        raise NoConvergence(f"IRLS did not converge in {max_iters} iterations")

    info = (X * weights[:, None]).T @ X
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise SingularInformation("singular information matrix") from None
    with np.errstate(invalid="ignore"):
        se = np.sqrt(np.diag(cov))  # NaN when the information is indefinite

    density = p * (1.0 - p)
    ame: dict[str, float] = {}
    for idx, name in enumerate(design.column_names):
        col = idx + 1  # skip intercept
        if name in design.dummy_columns:
            eta1 = eta + (1.0 - X[:, col]) * beta[col]
            eta0 = eta - X[:, col] * beta[col]
            p1 = 1.0 / (1.0 + np.exp(-np.clip(eta1, -700, 700)))
            p0 = 1.0 / (1.0 + np.exp(-np.clip(eta0, -700, 700)))
            ame[name] = float((p1 - p0).mean())
        else:
            ame[name] = float(beta[col] * density.mean())

    pseudo_r2 = 1.0 - ll / ll_null if ll_null != 0 else 0.0
    return FitResult(
        method="logit",
        coefficients=_coef_stats(names, beta, se),
        fit_stat=float(pseudo_r2),
        fit_stat_name="pseudo_r2",
        n_obs=n,
        objective=ll,
        converged=converged,
        n_iter=it,
        ame=ame,
        residuals=y - p,
    )


def _ols_core(X: np.ndarray, y: np.ndarray, names, dof: int):
    """SVD least squares with classical covariance; raises on rank loss."""
    n, p_dim = X.shape
    rank = np.linalg.matrix_rank(X)
    if rank < p_dim:
        raise RankDeficient(_dependent_columns(X, names))
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / dof if dof > 0 else float("nan")
    u, sing, vt = np.linalg.svd(X, full_matrices=False)
    xtx_inv = (vt.T / sing**2) @ vt
    se = np.sqrt(sigma2 * np.diag(xtx_inv))
    return beta, se, resid, rss


def fit_ols(design: DesignMatrix) -> FitResult:
    """Ordinary least squares with an intercept and classical errors."""
    y = design.y
    n = y.size
    names = ("intercept",) + design.column_names
    X = np.column_stack([np.ones(n), design.X])
    if n <= X.shape[1]:
        raise EconError("need more observations than parameters")
    beta, se, resid, rss = _ols_core(X, y, names, dof=n - X.shape[1])
    tss = float(((y - y.mean())**2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return FitResult(
        method="ols",
        coefficients=_coef_stats(names, beta, se),
        fit_stat=float(r2),
        fit_stat_name="r_squared",
        n_obs=n,
        objective=rss,
        converged=True,
        n_iter=1,
        residuals=resid,
    )


def fit_ols_fixed_effects(design: DesignMatrix) -> FitResult:
    """Within-transformation OLS absorbing bank-level heterogeneity."""
    if design.bank_columns:
        raise AbsorbedColumns(
            f"bank-level columns are absorbed under bank fixed effects: "
            f"{sorted(design.bank_columns)}")
    y = design.y
    groups = design.bank_index
    unique_groups = np.unique(groups)
    n_groups = unique_groups.size
    if n_groups < 2:
        raise EconError("need at least two banks for fixed effects")
    counts = np.bincount(np.searchsorted(unique_groups, groups))
    if np.all(counts <= 1):
        raise SingletonGroupsOnly("every bank has a single observation")

    gidx = np.searchsorted(unique_groups, groups)
    y_means = np.bincount(gidx, weights=y) / counts
    y_dm = y - y_means[gidx]
    X_dm = np.empty_like(design.X)
    for c in range(design.X.shape[1]):
        col = design.X[:, c]
        col_means = np.bincount(gidx, weights=col) / counts
        X_dm[:, c] = col - col_means[gidx]

    n = y.size
    p_dim = X_dm.shape[1]
    dof = n - n_groups - p_dim
    if dof <= 0:
        raise EconError("insufficient degrees of freedom after demeaning")
    beta, se, resid, rss = _ols_core(X_dm, y_dm, design.column_names, dof=dof)

    tss_within = float((y_dm**2).sum())
    r2_within = 1.0 - rss / tss_within if tss_within > 0 else 1.0
    fitted_overall = X_dm @ beta + y_means[gidx]
    tss = float(((y - y.mean())**2).sum())
    resid_overall = y - fitted_overall
    r2_overall = 1.0 - float(resid_overall @ resid_overall) / tss if tss > 0 else 1.0

    return FitResult(
        method="ols_fe",
        coefficients=_coef_stats(design.column_names, beta, se),
        fit_stat=float(r2_within),
        fit_stat_name="r_squared_within",
        n_obs=n,
        objective=rss,
        converged=True,
        n_iter=1,
        residuals=resid,
        extra={"n_groups": int(n_groups), "r_squared_overall": float(r2_overall),
               "bank_controls": "absorbed"},
    )


def vif(design: DesignMatrix) -> dict[str, float]:
    """Variance inflation factors from auxiliary regressions."""
    X = design.X
    names = design.column_names
    if X.shape[1] < 3:
        raise EconError("VIF needs at least three columns")
    n = X.shape[0]
    out: dict[str, float] = {}
    for idx, name in enumerate(names):
        target = X[:, idx]
        others = np.column_stack(
            [np.ones(n)] + [X[:, c] for c in range(X.shape[1]) if c != idx])
        rank = np.linalg.matrix_rank(others)
        if rank < others.shape[1]:
            out[name] = float("inf")
            continue
        beta, _, _, _ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ beta
        tss = float(((target - target.mean())**2).sum())
        rss = float(resid @ resid)
        if tss == 0 or rss <= 1e-12 * tss:
            out[name] = float("inf")
        else:
            out[name] = 1.0 / (rss / tss)
    return out
