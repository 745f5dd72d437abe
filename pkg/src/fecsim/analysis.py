"""Angle scans, dual-condensate optimization, and the elliptical trade-off.

The (theta1, theta2) scan maps preparation angles to signature pairs
(lambda_G, lambda_D); the noiseless frontier they trace is fitted with a
direct least-squares conic constrained to an ellipse, and noisy or
mitigated points are scored by their orthogonal distance to that ellipse.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .mitigation import SupportSet, default_support, project_density
from .noise import DeviceModel
from .prep import FecAngles, Representation, build_fec_target
from .rdm import Signatures, signatures
from .tomography import prepared_density, run_trials

ANCHOR_THETA1 = (np.pi / 5.0, 2.0 * np.pi / 5.0, 3.0 * np.pi / 5.0, 4.0 * np.pi / 5.0)


class FitError(ValueError):
    """Raised when conic fitting is impossible or degenerate."""


@dataclass(frozen=True)
class ScanGrid:
    theta1_values: tuple[float, ...]
    theta2_values: tuple[float, ...]

    def __post_init__(self):
        t1 = tuple(float(t) for t in self.theta1_values)
        t2 = tuple(float(t) for t in self.theta2_values)
        if not t1 or not t2:
            raise ValueError("grid must contain at least one angle per axis")
        if not all(np.isfinite(t1 + t2)):
            raise ValueError("grid angles must be finite")
        object.__setattr__(self, "theta1_values", t1)
        object.__setattr__(self, "theta2_values", t2)

    def points(self) -> list[FecAngles]:
        return [FecAngles(a, b) for a in self.theta1_values for b in self.theta2_values]


def frontier_grid(n_points: int = 64) -> ScanGrid:
    """theta1 sweep of the theta2 = pi branch, endpoints included."""
    return ScanGrid(tuple(np.linspace(0.0, np.pi, n_points)), (np.pi,))


def anchor_angles() -> list[FecAngles]:
    """The four named anchor preparations used for device-style reports."""
    return [FecAngles(t, np.pi) for t in ANCHOR_THETA1]


@dataclass(frozen=True)
class ScanConfig:
    """Execution options for scan and optimize_dual."""

    noise: DeviceModel | None = None
    shots: int | None = None
    trials: int = 1
    seed: int = 0
    mitigation: str = "default"  # off | default | strict6
    support: SupportSet | None = None

    def resolve_support(self, rep: Representation) -> SupportSet | None:
        if self.mitigation == "off":
            return None
        if self.support is not None:
            return self.support
        mode = "dicke" if self.mitigation == "strict6" else "union"
        return default_support(rep, mode)


@dataclass(frozen=True)
class ScanRecord:
    angles: FecAngles
    full: Signatures
    projected: Signatures | None
    shots: int | None = None
    noise_name: str | None = None
    trials: int = 1


def _evaluate_point(rep: Representation, angles: FecAngles, config: ScanConfig,
                    support: SupportSet | None) -> ScanRecord:
    noise_name = config.noise.name if config.noise is not None else None
    if config.shots is not None and config.trials >= 2:
        outcome = run_trials(
            rep, angles, config.shots, config.trials, config.noise, config.seed, support
        )
        return ScanRecord(
            angles,
            outcome.full.as_signatures(),
            outcome.projected.as_signatures() if outcome.projected else None,
            config.shots, noise_name, config.trials,
        )
    if config.noise is None:
        psi = build_fec_target(rep, angles).psi
        full = signatures(psi, rep)
        proj = signatures(project_density(psi.density(), support), rep) if support else None
        return ScanRecord(angles, full, proj, None, None, 1)
    rho = prepared_density(rep, angles, config.noise)
    full = signatures(rho, rep)
    proj = signatures(project_density(rho, support), rep) if support else None
    return ScanRecord(angles, full, proj, None, noise_name, 1)


def scan(rep: Representation, grid: ScanGrid, config: ScanConfig = ScanConfig()) -> list[ScanRecord]:
    """One ScanRecord per grid point, in deterministic grid order.

    Noiseless exact, noisy density-matrix, and sampled-tomography execution
    are selected by the config (shots + trials >= 2 turns on sampling).
    """
    support = config.resolve_support(rep)
    return [_evaluate_point(rep, angles, config, support) for angles in grid.points()]


def anchor_records(rep: Representation, config: ScanConfig = ScanConfig()) -> list[ScanRecord]:
    support = config.resolve_support(rep)
    return [_evaluate_point(rep, a, config, support) for a in anchor_angles()]


# ---------------------------------------------------------------------------
# ellipse fitting (direct least squares with the ellipse constraint)


@dataclass(frozen=True)
class EllipseFit:
    """Conic A x^2 + B xy + C y^2 + D x + E y + F = 0 with B^2 - 4AC < 0."""

    coefficients: tuple[float, float, float, float, float, float]
    center: tuple[float, float]
    axes: tuple[float, float]
    angle: float
    rms_residual: float

    def __post_init__(self):
        a, b, c, *_ = self.coefficients
        if b * b - 4.0 * a * c >= 0.0:
            raise FitError("conic is not an ellipse (discriminant >= 0)")
        if min(self.axes) <= 0.0:
            raise FitError("ellipse axes must be positive")


def _conic_geometry(coeffs: np.ndarray) -> tuple[tuple[float, float], tuple[float, float], float]:
    a, b, c, d, e, f = coeffs
    m = np.array([[a, b / 2.0], [b / 2.0, c]])
    center = np.linalg.solve(2.0 * m, [-d, -e])
    f_c = f + 0.5 * (d * center[0] + e * center[1])
    evals, evecs = np.linalg.eigh(m)
    radii_sq = -f_c / evals
    if np.any(radii_sq <= 0.0):
        raise FitError("conic is not a real ellipse")
    order = np.argsort(radii_sq)[::-1]
    radii = np.sqrt(radii_sq[order])
    major = evecs[:, order[0]]
    angle = float(np.arctan2(major[1], major[0])) % np.pi
    return (float(center[0]), float(center[1])), (float(radii[0]), float(radii[1])), angle


def fit_ellipse(points: Sequence[tuple[float, float]]) -> EllipseFit:
    """Constrained direct least-squares conic fit (generalized eigenproblem).

    Uses the numerically stable split into quadratic and linear design
    blocks; the 4AC - B^2 = 1 constraint guarantees an ellipse.  The rms
    residual is the root mean square *orthogonal* distance of the input
    points, i.e. it is reported in signature units.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise FitError("points must be pairs")
    if pts.shape[0] < 6:
        raise FitError(f"conic fit needs at least 6 points, got {pts.shape[0]}")
    x, y = pts[:, 0], pts[:, 1]
    d1 = np.column_stack([x * x, x * y, y * y])
    d2 = np.column_stack([x, y, np.ones_like(x)])
    s1 = d1.T @ d1
    s2 = d1.T @ d2
    s3 = d2.T @ d2
    rank = np.linalg.matrix_rank(np.column_stack([d1, d2]), tol=1e-10)
    if rank < 5:
        raise FitError(f"degenerate input: design matrix rank {rank} < 5 (collinear points?)")
    try:
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError:
        raise FitError("degenerate input: linear block is singular") from None
    m = s1 + s2 @ t
    c1_inv = np.array([[0.0, 0.0, 0.5], [0.0, -1.0, 0.0], [0.5, 0.0, 0.0]])
    reduced = c1_inv @ m
    evals, evecs = np.linalg.eig(reduced)
    cond = 4.0 * evecs[0] * evecs[2] - evecs[1] ** 2
    valid = np.where(np.isreal(evals) & (cond.real > 0.0))[0]
    if valid.size == 0:
        raise FitError("no ellipse solution found")
    a1 = np.real(evecs[:, valid[0]])
    coeffs = np.concatenate([a1, t @ a1])
    center, axes, angle = _conic_geometry(coeffs)
    fit = EllipseFit(tuple(float(v) for v in coeffs), center, axes, angle, rms_residual=0.0)
    rms = float(np.sqrt(np.mean([distance_to_ellipse(p, fit) ** 2 for p in pts])))
    return EllipseFit(fit.coefficients, center, axes, angle, rms)


def _golden_min(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def distance_to_ellipse(point: tuple[float, float], fit: EllipseFit) -> float:
    """Orthogonal distance from a point to the fitted ellipse.

    Coarse parameter scan followed by golden-section refinement of the
    squared distance on the bracketing arc; accurate to ~1e-8.
    """
    rot = np.array([[np.cos(fit.angle), -np.sin(fit.angle)], [np.sin(fit.angle), np.cos(fit.angle)]])
    q = rot.T @ (np.asarray(point, dtype=float) - np.asarray(fit.center))
    a, b = fit.axes

    def dist_sq(t: float) -> float:
        return (q[0] - a * np.cos(t)) ** 2 + (q[1] - b * np.sin(t)) ** 2

    ts = np.linspace(0.0, 2.0 * np.pi, 721)
    coarse = np.array([dist_sq(t) for t in ts])
    t0 = ts[int(np.argmin(coarse))]
    step = ts[1] - ts[0]
    t_best = _golden_min(dist_sq, t0 - step, t0 + step)
    return float(np.sqrt(dist_sq(t_best)))


# ---------------------------------------------------------------------------
# phase classification


@dataclass(frozen=True)
class PhaseLabel:
    label: str
    significance_k: float

    def __post_init__(self):
        if self.label not in ("FEC", "fermion_condensate", "exciton_condensate", "none"):
            raise ValueError(f"unknown phase label {self.label!r}")


def classify(sig: Signatures, k: float = 0.0) -> PhaseLabel:
    """Condensate phase from the signatures, minus k standard deviations.

    FEC requires both lambda_D - k sigma_D > 1 and lambda_G - k sigma_G > 1
    (strict); one-sided excesses give the single-condensate labels.
    """
    if k > 0.0 and (sig.std_lambda_d is None or sig.std_lambda_g is None):
        raise ValueError("significance k > 0 requires standard deviations")
    margin_d = sig.lambda_d - k * (sig.std_lambda_d or 0.0)
    margin_g = sig.lambda_g - k * (sig.std_lambda_g or 0.0)
    d_cond = margin_d > 1.0
    g_cond = margin_g > 1.0
    if d_cond and g_cond:
        return PhaseLabel("FEC", k)
    if d_cond:
        return PhaseLabel("fermion_condensate", k)
    if g_cond:
        return PhaseLabel("exciton_condensate", k)
    return PhaseLabel("none", k)


# ---------------------------------------------------------------------------
# dual-condensate optimization


def optimize_dual(
    rep: Representation,
    config: ScanConfig = ScanConfig(),
    theta1_values: Sequence[float] | None = None,
    theta2_values: Sequence[float] | None = None,
) -> tuple[FecAngles, Signatures]:
    """Maximize min(lambda_D, lambda_G) over the preparation angles.

    Coarse 32 x 8 grid over (theta1, theta2), then golden-section refinement
    of theta1 at the best theta2.  Deterministic: grid order breaks ties.
    Optional angle lists restrict the search.
    """
    support = config.resolve_support(rep)

    def objective(angles: FecAngles) -> float:
        record = _evaluate_point(rep, angles, config, support)
        return min(record.full.lambda_d, record.full.lambda_g)

    t1_grid = np.asarray(theta1_values) if theta1_values is not None else np.linspace(0.0, np.pi, 32)
    t2_grid = np.asarray(theta2_values) if theta2_values is not None else np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
    best_val, best_t1, best_t2 = -np.inf, 0.0, 0.0
    for t1 in t1_grid:
        for t2 in t2_grid:
            val = objective(FecAngles(t1, t2))
            if val > best_val + 1e-15:
                best_val, best_t1, best_t2 = val, t1, t2
    if len(t1_grid) > 1:
        step = float(np.max(np.diff(np.sort(t1_grid))))
        lo = max(float(t1_grid.min()), best_t1 - step)
        hi = min(float(t1_grid.max()), best_t1 + step)
        t1_star = _golden_min(lambda t: -objective(FecAngles(t, best_t2)), lo, hi, tol=1e-10)
        candidates = [FecAngles(best_t1, best_t2), FecAngles(t1_star, best_t2)]
        best = max(candidates, key=objective)
    else:
        best = FecAngles(best_t1, best_t2)
    record = _evaluate_point(rep, best, config, support)
    return best, record.full


# ---------------------------------------------------------------------------
# file outputs

SCAN_CSV_COLUMNS = (
    "theta1,theta2,lambda_G_full,lambda_D_full,std_G_full,std_D_full,"
    "lambda_G_proj,lambda_D_proj,std_G_proj,std_D_proj"
)


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def scan_records_csv(records: Sequence[ScanRecord]) -> str:
    """Scan export with the fixed column order."""
    lines = [SCAN_CSV_COLUMNS]
    for rec in records:
        f, p = rec.full, rec.projected
        row = [
            _fmt(rec.angles.theta1), _fmt(rec.angles.theta2),
            _fmt(f.lambda_g), _fmt(f.lambda_d),
            _fmt(f.std_lambda_g or 0.0), _fmt(f.std_lambda_d or 0.0),
            _fmt(p.lambda_g if p else None), _fmt(p.lambda_d if p else None),
            _fmt((p.std_lambda_g or 0.0) if p else None),
            _fmt((p.std_lambda_d or 0.0) if p else None),
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def load_scan_csv(path: str | Path) -> list[ScanRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != SCAN_CSV_COLUMNS:
        raise ValueError(f"{path}: not a scan CSV (bad header)")
    records = []
    for ln in lines[1:]:
        cells = ln.split(",")
        full = Signatures(float(cells[3]), float(cells[2]), float(cells[5]), float(cells[4]))
        projected = None
        if cells[6]:
            projected = Signatures(float(cells[7]), float(cells[6]), float(cells[9]), float(cells[8]))
        records.append(ScanRecord(FecAngles(float(cells[0]), float(cells[1])), full, projected))
    return records


def ellipse_json(fit: EllipseFit) -> str:
    a, b, c, d, e, f = fit.coefficients
    doc = {
        "A": a, "B": b, "C": c, "D": d, "E": e, "F": f,
        "center": list(fit.center),
        "axes": list(fit.axes),
        "angle": fit.angle,
        "rms": fit.rms_residual,
    }
    return json.dumps(doc, indent=2) + "\n"


def load_ellipse_json(path: str | Path) -> EllipseFit:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return EllipseFit(
        tuple(float(doc[k]) for k in "ABCDEF"),
        (float(doc["center"][0]), float(doc["center"][1])),
        (float(doc["axes"][0]), float(doc["axes"][1])),
        float(doc["angle"]),
        float(doc["rms"]),
    )


def frontier_ellipse(rep: Representation, n_points: int = 64) -> EllipseFit:
    """Fit the noiseless frontier; the reference for mitigation distances."""
    records = scan(rep, frontier_grid(n_points), ScanConfig(mitigation="off"))
    return fit_ellipse([(r.full.lambda_g, r.full.lambda_d) for r in records])
