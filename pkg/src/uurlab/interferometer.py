"""Virtual displaced-Sagnac interferometer for polarisation qubits.

A heralded photon in state rho sees U in one arm and V in the other.  The
output rate as a function of the inter-arm phase chi is

    <N>_chi = (1 + Re{e^{-i chi} <U^dagger V>}) / 2,

so the fringe visibility is |<U^dagger V>| and the fringe maximum sits at
arg <U^dagger V>.  Scans are simulated with optional Poisson noise and fitted
with A1 + A2 cos^2((theta - theta0) / 2).
"""

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .qlinalg import I2, as_density, as_unitary, check_dims, dagger, expectation
from .uur import INDETERMINATE_CUTOFF, RelationReport

UNCONSTRAINED_AMPLITUDE = 1e-3


class UnconstrainedPhaseError(ValueError):
    """The fringe amplitude is too small for its phase to mean anything."""


class ScanGridError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Jones calculus


def _rot(deg):
    t = np.deg2rad(deg)
    return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]], dtype=complex)


def retarder(fast_axis_deg, retardance):
    return _rot(fast_axis_deg) @ np.diag([1.0, np.exp(1j * retardance)]) @ _rot(-fast_axis_deg)


def hwp(angle_deg):
    """Half-wave plate, R(angle) diag(1, -1) R(-angle)."""
    return retarder(angle_deg, np.pi)


def qwp(angle_deg):
    """Quarter-wave plate, R(angle) diag(1, i) R(-angle)."""
    return retarder(angle_deg, np.pi / 2)


# Element sequences in the order the photon meets them.  Every entry gives the
# identity (up to phase) at alpha = 90, beta = 0.
CONVENTIONS = {
    "hwp_a-qwp45-hwp_b-qwp45": lambda a, b: (hwp(a), qwp(45), hwp(b), qwp(45)),
    "hwp_b-qwp45-hwp_a-qwp45": lambda a, b: (hwp(b), qwp(45), hwp(a), qwp(45)),
    "qwp45-hwp_a-qwp45-hwp_b": lambda a, b: (qwp(45), hwp(a), qwp(45), hwp(b)),
    "qwp45-hwp_b-qwp45-hwp_a": lambda a, b: (qwp(45), hwp(b), qwp(45), hwp(a)),
}
DEFAULT_CONVENTION = "hwp_a-qwp45-hwp_b-qwp45"


@dataclass(frozen=True)
class WaveplateStack:
    alpha: float
    beta: float
    convention_id: str = DEFAULT_CONVENTION

    def __post_init__(self):
        for name in ("alpha", "beta"):
            if not 0.0 <= getattr(self, name) < 180.0:
                raise ValueError(f"{name} must lie in [0, 180) degrees")
        if self.convention_id not in CONVENTIONS:
            raise ValueError(f"unknown waveplate convention {self.convention_id!r}")


def waveplate_stack_unitary(stack, offsets_deg=(0.0, 0.0)):
    """Jones matrix of the HWP/QWP/HWP/QWP group; ``offsets_deg`` perturbs (alpha, beta)."""
    elements = CONVENTIONS[stack.convention_id](stack.alpha + offsets_deg[0], stack.beta + offsets_deg[1])
    m = I2
    for el in elements:
        m = el @ m
    return m


IDENTITY_STACK = WaveplateStack(90.0, 0.0)


# ---------------------------------------------------------------------------
# Scans


@dataclass(frozen=True)
class InterferometerConfig:
    """Simulation knobs.  ``counts_scale`` is the expected count at unit output probability."""

    phase_grid: tuple = tuple(np.linspace(0.0, 2 * np.pi, 24, endpoint=False))
    counts_scale: float = 4000.0
    noise: bool = True
    input_purity: float = 1.0
    waveplate_error_deg: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.counts_scale <= 0:
            raise ValueError("counts_scale must be positive")
        if not 0.0 <= self.input_purity <= 1.0:
            raise ValueError("input_purity must lie in [0, 1]")
        if self.waveplate_error_deg < 0:
            raise ValueError("waveplate_error_deg must be non-negative")
        if len(self.phase_grid) < 2 or np.any(np.diff(self.phase_grid) <= 0):
            raise ValueError("phase_grid must be strictly increasing")


@dataclass(frozen=True)
class FringeScan:
    theta: np.ndarray
    counts: np.ndarray
    arm_setting: tuple = ("I", "I")
    counts_scale: float | None = None

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if theta.shape != counts.shape or theta.ndim != 1:
            raise ValueError("theta and counts must be 1-d arrays of equal length")
        if np.any(np.diff(theta) <= 0):
            raise ValueError("theta must be strictly increasing")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "counts", counts)

    @property
    def filename(self):
        return f"scan_{self.arm_setting[0]}_{self.arm_setting[1]}.csv"

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta_rad", "counts"])
            for t, c in zip(self.theta, self.counts):
                w.writerow([repr(float(t)), repr(float(c)) if c != int(c) else int(c)])

    @classmethod
    def from_csv(cls, path, arm_setting=None):
        path = Path(path)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh, skipinitialspace=True))
        if not rows or {"theta_rad", "counts"} - set(rows[0]):
            raise ValueError(f"{path}: expected columns 'theta_rad, counts'")
        if arm_setting is None:
            parts = path.stem.split("_")
            arm_setting = (parts[1], parts[2]) if len(parts) == 3 and parts[0] == "scan" else (path.stem, "")
        order = sorted(range(len(rows)), key=lambda i: float(rows[i]["theta_rad"]))
        return cls(
            np.array([float(rows[i]["theta_rad"]) for i in order]),
            np.array([float(rows[i]["counts"]) for i in order]),
            tuple(arm_setting),
        )


def mean_output(state, u, v, chi):
    """Average output photon number (1 + Re{e^{-i chi} <U^dagger V>}) / 2."""
    rho = as_density(state)
    u = as_unitary(u)
    v = as_unitary(v)
    check_dims(len(rho), u, v)
    g = expectation(rho, dagger(u) @ v)
    return 0.5 * (1 + np.real(np.exp(-1j * np.asarray(chi)) * g))


def _arm_operator(arm, offsets):
    if isinstance(arm, WaveplateStack):
        return waveplate_stack_unitary(arm, offsets)
    return as_unitary(arm)


def simulate_scan(config, state, u, v, arm_setting=("U", "V"), scan_index=0):
    """Counts against phase for U in the transmitted and V in the reflected arm.

    ``u`` and ``v`` are unitaries or :class:`WaveplateStack` objects; the
    waveplate angle error only applies to stacks.  Noise-free scans carry the
    exact expected counts (not rounded) so the fit recovers the model to
    roundoff.  Each scan draws from its own stream keyed on (seed, scan_index).
    """
    rng = np.random.default_rng([config.seed, scan_index])
    rho = as_density(state)
    if config.input_purity < 1.0:
        rho = config.input_purity * rho + (1 - config.input_purity) * np.eye(len(rho)) / len(rho)
    offsets = [(0.0, 0.0), (0.0, 0.0)]
    if config.waveplate_error_deg > 0:
        offsets = [tuple(rng.normal(0.0, config.waveplate_error_deg, 2)) for _ in range(2)]
    U = _arm_operator(u, offsets[0])
    V = _arm_operator(v, offsets[1])
    theta = np.asarray(config.phase_grid, dtype=float)
    mean = np.clip(config.counts_scale * mean_output(rho, U, V, theta), 0.0, None)
    counts = rng.poisson(mean).astype(float) if config.noise else mean
    return FringeScan(theta, counts, tuple(arm_setting), config.counts_scale)


# ---------------------------------------------------------------------------
# Fitting


@dataclass(frozen=True)
class FringeFit:
    A1: float
    A2: float
    theta0: float
    se_A1: float
    se_A2: float
    se_theta0: float
    chi2_dof: float
    constrained: bool = True
    arm_setting: tuple = ("I", "I")
    covariance: tuple = field(default=(), repr=False)

    @property
    def visibility(self):
        return self.A2 / (2 * self.A1 + self.A2)

    @property
    def visibility_se(self):
        denom = (2 * self.A1 + self.A2) ** 2
        grad = np.array([-2 * self.A2 / denom, 2 * self.A1 / denom, 0.0])
        cov = np.asarray(self.covariance)
        return float(np.sqrt(max(grad @ cov @ grad, 0.0)))

    def to_dict(self):
        return {
            "A1": self.A1, "A2": self.A2, "theta0": self.theta0,
            "se_A1": self.se_A1, "se_A2": self.se_A2, "se_theta0": self.se_theta0,
            "visibility": self.visibility, "visibility_se": self.visibility_se,
            "chi2_dof": self.chi2_dof, "constrained": self.constrained,
            "arm_setting": list(self.arm_setting),
        }

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def wrap_phase(x):
    """Principal value in (-pi, pi]."""
    y = np.mod(x + np.pi, 2 * np.pi) - np.pi
    return float(np.pi if y == -np.pi else y)


def fringe_model(theta, a1, a2, theta0):
    return a1 + a2 * np.cos(0.5 * (theta - theta0)) ** 2


def _check_grid(theta):
    if len(theta) < 8:
        raise ScanGridError("a fringe fit needs at least 8 phase points")
    span = theta[-1] - theta[0] + np.median(np.diff(theta))
    if span < 2 * np.pi - 1e-9:
        raise ScanGridError("the phase grid must cover a full 2 pi period")


def fit_fringe(scan, counts_scale=None, max_iter=200, rtol=1e-12):
    """Poisson-weighted least-squares fit of A1 + A2 cos^2((theta - theta0) / 2).

    Starting values come from the weighted linear fit of c + a cos(theta) +
    b sin(theta), which is the same model; damped Gauss-Newton then polishes
    (A1, A2, theta0) and supplies the Jacobian for the covariance
    (J^T W J)^{-1}, with weights 1 / max(count, 1).
    """
    theta = scan.theta
    y = scan.counts
    _check_grid(theta)
    w = 1.0 / np.maximum(y, 1.0)
    basis = np.stack([np.ones_like(theta), np.cos(theta), np.sin(theta)], axis=1)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(basis * sw[:, None], y * sw, rcond=None)
    half_amp = np.hypot(coef[1], coef[2])
    p = np.array([coef[0] - half_amp, 2 * half_amp, np.arctan2(coef[2], coef[1])])

    def residual(params):
        return y - fringe_model(theta, *params)

    def jacobian(params):
        x = theta - params[2]
        return np.stack([np.ones_like(theta), np.cos(0.5 * x) ** 2, 0.5 * params[1] * np.sin(x)], axis=1)

    chi2 = float(np.sum(w * residual(p) ** 2))
    for _ in range(max_iter):
        J = jacobian(p)
        r = residual(p)
        jtwj = J.T @ (J * w[:, None])
        try:
            step = np.linalg.solve(jtwj, J.T @ (w * r))
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-6:
            trial = p + lam * step
            new_chi2 = float(np.sum(w * residual(trial) ** 2))
            if new_chi2 <= chi2:
                break
            lam *= 0.5
        else:
            break
        change = np.max(np.abs(lam * step) / np.maximum(np.abs(p), 1e-300))
        p, chi2 = trial, new_chi2
        if change < rtol:
            break
    if p[1] < 0:
        p = np.array([p[0] + p[1], -p[1], p[2] + np.pi])
    J = jacobian(p)
    try:
        cov = np.linalg.inv(J.T @ (J * w[:, None]))
    except np.linalg.LinAlgError:
        cov = np.full((3, 3), np.inf)
    scale = counts_scale or scan.counts_scale or max(float(np.max(y)), 1.0)
    constrained = p[1] / scale >= UNCONSTRAINED_AMPLITUDE
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    dof = max(len(theta) - 3, 1)
    return FringeFit(
        A1=float(p[0]), A2=float(p[1]), theta0=wrap_phase(p[2]),
        se_A1=float(se[0]), se_A2=float(se[1]), se_theta0=float(se[2]) if constrained else float("inf"),
        chi2_dof=chi2 / dof, constrained=bool(constrained), arm_setting=tuple(scan.arm_setting),
        covariance=tuple(map(tuple, cov)),
    )


def _require_constrained(*fits):
    for f in fits:
        if not f.constrained:
            raise UnconstrainedPhaseError(f"fringe {f.arm_setting} has no measurable phase")


def phase_difference(fit_uv, fit_ref):
    """arg <U^dagger V> = chi(U, V) - chi(I, I), wrapped into (-pi, pi]."""
    _require_constrained(fit_uv, fit_ref)
    return wrap_phase(fit_uv.theta0 - fit_ref.theta0)


def bargmann_phase_from_fits(fit_uv, fit_ui, fit_iv, fit_ii):
    """Phi = chi(U,V) - chi(U,I) - chi(I,V) + chi(I,I) and its standard error."""
    _require_constrained(fit_uv, fit_ui, fit_iv, fit_ii)
    phi = wrap_phase(fit_uv.theta0 - fit_ui.theta0 - fit_iv.theta0 + fit_ii.theta0)
    se = float(np.sqrt(sum(f.se_theta0**2 for f in (fit_uv, fit_ui, fit_iv, fit_ii))))
    return phi, se


SCAN_KEYS = (("U", "V"), ("U", "I"), ("I", "V"), ("I", "I"))


def simulate_four_scans(config, state, u, v, base_index=0):
    """The (U,V), (U,I), (I,V), (I,I) scans on a common input state."""
    arms = {"U": u, "V": v, "I": IDENTITY_STACK if isinstance(u, WaveplateStack) else np.eye(len(u))}
    return {
        key: simulate_scan(config, state, arms[key[0]], arms[key[1]], key, base_index + k)
        for k, key in enumerate(SCAN_KEYS)
    }


def _quadrature(grad, ses):
    return float(np.sqrt(sum((g * s) ** 2 for g, s in zip(grad, ses))))


def relation_from_scans(kind, scans, assume_pure=False, tol=1e-9):
    """Reconstruct the Bargmann-phase UUR ("uur-eq5") or the three-state OUR ("our-eq6").

    ``scans`` maps arm settings ("U","V"), ("U","I"), ("I","V"), ("I","I") to
    :class:`FringeScan` or already fitted :class:`FringeFit` objects.
    """
    missing = [k for k in SCAN_KEYS if k not in scans]
    if missing:
        raise KeyError(f"missing scans for arm settings {missing}")
    fits = {k: s if isinstance(s, FringeFit) else fit_fringe(s) for k, s in scans.items()}
    f_uv, f_ui, f_iv, f_ii = (fits[k] for k in SCAN_KEYS)
    vu, vv, vuv = f_ui.visibility, f_iv.visibility, f_uv.visibility
    su, sv, suv = f_ui.visibility_se, f_iv.visibility_se, f_uv.visibility_se
    extra = {"V_UI": vu, "V_IV": vv, "V_UV": vuv, "V_UI_se": su, "V_IV_se": sv, "V_UV_se": suv}

    if kind == "uur-eq5":
        _require_constrained(f_uv, f_ui, f_iv, f_ii)
        phi, phi_se = bargmann_phase_from_fits(f_uv, f_ui, f_iv, f_ii)
        prod = vu * vv * vuv
        extra.update(phi=phi, phi_se=phi_se)
        if abs(prod) < INDETERMINATE_CUTOFF:
            return RelationReport("uur-eq5-scans", float("nan"), float("nan"), tol=tol,
                                  status="indeterminate", extra=extra)
        num = vu**2 + vv**2 + vuv**2 - 1
        rhs = num / (2 * prod)
        grad = [
            (2 * vu * 2 * prod - num * 2 * vv * vuv) / (2 * prod) ** 2,
            (2 * vv * 2 * prod - num * 2 * vu * vuv) / (2 * prod) ** 2,
            (2 * vuv * 2 * prod - num * 2 * vu * vv) / (2 * prod) ** 2,
        ]
        return RelationReport(
            "uur-eq5-scans", lhs=float(np.cos(phi)), rhs=float(rhs), tol=tol,
            lhs_se=float(abs(np.sin(phi)) * phi_se), rhs_se=_quadrature(grad, (su, sv, suv)), extra=extra,
        )
    if kind == "our-eq6":
        if not assume_pure:
            raise ValueError("transition probabilities from visibilities need a pure input state (assume_pure)")
        lhs = vu**2 + vv**2 + vuv**2 - 2 * vu * vv * vuv
        grad = [2 * vu - 2 * vv * vuv, 2 * vv - 2 * vu * vuv, 2 * vuv - 2 * vu * vv]
        extra.update(T12=vu**2, T13=vv**2, T23=vuv**2)
        return RelationReport(
            "our-eq6-scans", lhs=float(lhs), rhs=1.0, sense="<=", tol=tol,
            lhs_se=_quadrature(grad, (su, sv, suv)), rhs_se=0.0, extra=extra,
        )
    raise ValueError(f"unknown relation kind {kind!r}")


def with_phase_offset(scan, offset):
    """The same scan recorded against a shifted phase reference."""
    return replace(scan, theta=scan.theta + offset)

