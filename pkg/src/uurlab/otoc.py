"""Out-of-time-order correlator F = <W_t^dagger V^dagger W_t V> and its bounds.

Applying the two-unitary overlap bound |<U^dagger V>| <= cos(theta_U - theta_V)
with U = V W_t and V = W_t V gives an upper bound on |F|, and through
Re F <= |F| a lower bound on the squared commutator 2 (1 - Re F).
"""

from dataclasses import asdict, dataclass

import numpy as np

from .qlinalg import (
    as_density,
    as_hermitian,
    as_unitary,
    check_dims,
    dagger,
    expectation,
    expm_i_hermitian,
)
from .uur import RelationReport

BOUND_TOL = 1e-10


def _angle(modulus):
    return float(np.arccos(np.clip(modulus, 0.0, 1.0)))


def otoc_value(state, v, w):
    rho = as_density(state)
    v = as_unitary(v)
    w = as_unitary(w)
    check_dims(len(rho), v, w)
    return expectation(rho, dagger(w) @ dagger(v) @ w @ v)


def overlap_bound(state, u, v, tol=BOUND_TOL):
    """|<U^dagger V>| <= cos(theta_U - theta_V), theta_X = arccos |<X>|."""
    rho = as_density(state)
    u = as_unitary(u)
    v = as_unitary(v)
    check_dims(len(rho), u, v)
    lhs = abs(expectation(rho, dagger(u) @ v))
    tu = _angle(abs(expectation(rho, u)))
    tv = _angle(abs(expectation(rho, v)))
    return RelationReport(name="overlap-bound", lhs=float(lhs), rhs=float(np.cos(tu - tv)), sense="<=", tol=tol,
                          extra={"theta_u": tu, "theta_v": tv})


@dataclass(frozen=True)
class OtocReport:
    F: complex
    theta_VW: float
    theta_WV: float
    modulus_bound: float
    commutator_lhs: float
    commutator_rhs: float
    commutator_oracle: float
    tol: float = BOUND_TOL

    @property
    def modulus_slack(self):
        return self.modulus_bound - abs(self.F)

    @property
    def commutator_slack(self):
        return self.commutator_lhs - self.commutator_rhs

    @property
    def holds(self):
        return self.modulus_slack >= -self.tol and self.commutator_slack >= -self.tol

    def relations(self):
        return [
            RelationReport("otoc-modulus", abs(self.F), self.modulus_bound, sense="<=", tol=self.tol),
            RelationReport("otoc-commutator", self.commutator_lhs, self.commutator_rhs, tol=self.tol),
        ]

    def to_dict(self):
        d = asdict(self)
        d["F"] = {"re": self.F.real, "im": self.F.imag, "abs": abs(self.F)}
        d["holds"] = self.holds
        return d


def otoc_bounds(state, v, w_t, tol=BOUND_TOL):
    """Evaluate F and both bounds.

    ``commutator_oracle`` is tr(rho [V,W]^dagger [V,W]) computed from the
    commutator directly, as a check on the 2 (1 - Re F) identity.
    """
    rho = as_density(state)
    v = as_unitary(v)
    w_t = as_unitary(w_t)
    check_dims(len(rho), v, w_t)
    f = otoc_value(rho, v, w_t)
    t_vw = _angle(abs(expectation(rho, v @ w_t)))
    t_wv = _angle(abs(expectation(rho, w_t @ v)))
    comm = v @ w_t - w_t @ v
    return OtocReport(
        F=complex(f),
        theta_VW=t_vw,
        theta_WV=t_wv,
        modulus_bound=float(np.cos(t_vw - t_wv)),
        commutator_lhs=float(2 * (1 - f.real)),
        commutator_rhs=float(4 * np.sin((t_vw - t_wv) / 2) ** 2),
        commutator_oracle=float(expectation(rho, dagger(comm) @ comm).real),
        tol=tol,
    )


def heisenberg_evolve(w, h, t):
    """W_t = e^{iHt} W e^{-iHt}."""
    w = as_unitary(w)
    h = as_hermitian(h)
    check_dims(len(w), h)
    if t == 0:
        return w.copy()
    e = expm_i_hermitian(h, t)
    return e @ w @ dagger(e)


def otoc_series(state, v, w, h, times):
    """OTOC time series rows (t, Re F, Im F, |F|, bound_11, lhs_12, rhs_12)."""
    rows = []
    for t in times:
        rep = otoc_bounds(state, v, heisenberg_evolve(w, h, t))
        rows.append({
            "t": float(t), "re_F": rep.F.real, "im_F": rep.F.imag, "abs_F": abs(rep.F),
            "bound_11": rep.modulus_bound, "lhs_12": rep.commutator_lhs, "rhs_12": rep.commutator_rhs,
        })
    return rows
