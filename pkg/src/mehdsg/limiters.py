"""TVBM minmod slope limiter and the hyperbolicity limiter."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from . import kernels
from .euler import AIR, GasModel, InadmissibleStateError, is_admissible, limiter_theta
from .field import SGDGField
from .mesh import BCKind, BoundaryConditions

EPS_THETA = 1e-10
TROUBLE_TOL = 1e-12
SQRT3 = np.sqrt(3.0)


class InadmissibleMeanError(InadmissibleStateError):
    """A (cell, element) mean left the admissible set; the limiter cannot repair this."""


@dataclass(frozen=True)
class TvbmConfig:
    M_tvb: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.M_tvb) and self.M_tvb >= 0.0):
            raise ValueError("TVB constant must be finite and nonnegative")


@dataclass
class LimiterReport:
    """Outcome of one limiter pass over all (cell, element) blocks."""

    theta: np.ndarray  # (C, L)
    tvbm_fired: Optional[np.ndarray] = None  # (C, L) bool
    escalated: int = 0

    @property
    def fraction_limited(self) -> float:
        return float(np.mean(self.theta > 0.0)) if self.theta.size else 0.0

    @property
    def max_theta(self) -> float:
        return float(self.theta.max()) if self.theta.size else 0.0


@dataclass
class LimiterStats:
    """Running counters over (cell, element, stage) triples."""

    blocks: int = 0
    limited: int = 0
    tvbm: int = 0
    escalated: int = 0
    passes: int = 0
    max_theta: float = 0.0
    rows: list = dc_field(default_factory=list)

    def add(self, report: LimiterReport, step=None, stage=None):
        n = report.theta.size
        self.blocks += n
        self.limited += int(np.count_nonzero(report.theta > 0.0))
        if report.tvbm_fired is not None:
            self.tvbm += int(np.count_nonzero(report.tvbm_fired))
        self.escalated += report.escalated
        self.passes += 1
        self.max_theta = max(self.max_theta, report.max_theta)
        if step is not None:
            self.rows.append((step, stage, report.fraction_limited, report.max_theta))


def limiter_statistics(reports) -> dict:
    """Aggregate reports (or a LimiterStats) into percentages of limited blocks."""
    if isinstance(reports, LimiterStats):
        st = reports
    else:
        st = LimiterStats()
        for r in reports:
            st.add(r)
    pct = 100.0 * st.limited / st.blocks if st.blocks else 0.0
    tv = 100.0 * st.tvbm / st.blocks if st.blocks else 0.0
    return {"blocks": st.blocks, "limited": st.limited, "percent_limited": pct,
            "percent_tvbm": tv, "escalated": st.escalated, "max_theta": st.max_theta}


# ---- hyperbolicity limiter ----------------------------------------------

def _block_values(coeffs_blocks, B):
    """Monitored values (4, nb, P) for blocks (nb, M, NK, 4)."""
    nb = coeffs_blocks.shape[0]
    cf = np.ascontiguousarray(np.moveaxis(coeffs_blocks, -1, 0)).reshape(4 * nb, -1)
    return (cf @ B.T).reshape(4, nb, -1)


def check_means(field: SGDGField, gas: GasModel = AIR):
    means = field.means()
    ok = is_admissible(means, gas)
    if not np.all(ok):
        c, l = np.argwhere(~ok)[0]
        raise InadmissibleMeanError(
            f"mean of cell {c}, element {l} is inadmissible: {means[c, l]}",
            (int(c), int(l)), means[c, l].copy())


def hyperbolicity_limit(field: SGDGField, gas: GasModel = AIR, eps: float = EPS_THETA,
                        inplace: bool = False):
    """Blend every (cell, element) polynomial toward its mean so all monitored
    points are admissible. Returns (field, LimiterReport)."""
    out = field if inplace else field.copy()
    sp = field.space
    check_means(out, gas)
    C, L = out.coeffs.shape[:2]
    blocks = out.coeffs.reshape(C * L, sp.M, sp.NK, 4)
    B = sp.monitor.B
    U = _block_values(blocks, B)
    ok = kernels.admissible_mask(U.reshape(4, -1)).reshape(C * L, -1)
    bad = np.nonzero(~ok.all(axis=1))[0]
    theta = np.zeros(C * L)
    escalated = 0
    if bad.size:
        means = blocks[bad, 0, 0, :].copy()
        pts = np.moveaxis(U[:, bad], 0, -1)  # (nb, P, 4)
        th = limiter_theta(means[:, None, :], pts, gas).max(axis=1)
        th = np.where(th > 0.0, np.minimum(th + eps, 1.0), 0.0)
        # a failing block with theta 0 can only come from round-off in the roots
        th = np.where(th > 0.0, th, 1.0)
        sub = blocks[bad] * (1.0 - th)[:, None, None, None]
        sub[:, 0, 0, :] = means
        # safety re-check of the modified blocks
        U2 = _block_values(sub, B)
        ok2 = kernels.admissible_mask(U2.reshape(4, -1)).reshape(len(bad), -1).all(axis=1)
        if not np.all(ok2):
            fail = ~ok2
            escalated = int(np.count_nonzero(fail))
            th[fail] = 1.0
            sub[fail] = 0.0
            sub[fail, 0, 0, :] = means[fail]
        blocks[bad] = sub
        theta[bad] = th
    return out, LimiterReport(theta.reshape(C, L), escalated=escalated)


def monitored_values(field: SGDGField) -> np.ndarray:
    """All monitored point values, shape (4, C*L, P)."""
    sp = field.space
    C, L = field.coeffs.shape[:2]
    return _block_values(field.coeffs.reshape(C * L, sp.M, sp.NK, 4), sp.monitor.B)


def count_inadmissible_monitored(field: SGDGField) -> int:
    U = monitored_values(field)
    return int(np.count_nonzero(~kernels.admissible_mask(np.ascontiguousarray(U).reshape(4, -1))))


# ---- TVBM minmod ----------------------------------------------------------

def minmod(a, b, c):
    s = np.sign(a)
    same = (s == np.sign(b)) & (s == np.sign(c))
    return np.where(same, s * np.minimum(np.minimum(np.abs(a), np.abs(b)), np.abs(c)), 0.0)


def tvb_minmod(a, b, c, Mh2):
    return np.where(np.abs(a) <= Mh2, a, minmod(a, b, c))


def _neighbour_means(u0, axis, bc: Optional[BoundaryConditions]):
    """Means of the previous and next cell along ``axis`` (0: x, 1: y).

    Periodic sides wrap; reflective sides mirror the normal momentum;
    other sides extrapolate linearly.
    """
    if bc is None or bc.periodic(axis):
        return np.roll(u0, 1, axis=axis), np.roll(u0, -1, axis=axis)
    n = u0.shape[axis]
    lo_side, hi_side = ("left", "right") if axis == 0 else ("bottom", "top")

    def ghost(side, edge, inner):
        if bc[side].kind is BCKind.REFLECTIVE:
            g = edge.copy()
            g[..., 1 + axis] *= -1.0
            return g
        return 2.0 * edge - inner if n > 1 else edge.copy()

    first = np.take(u0, [0], axis=axis)
    last = np.take(u0, [n - 1], axis=axis)
    second = np.take(u0, [min(1, n - 1)], axis=axis)
    before_last = np.take(u0, [max(n - 2, 0)], axis=axis)
    g_lo = ghost(lo_side, first, second)
    g_hi = ghost(hi_side, last, before_last)
    prev = np.concatenate([g_lo, np.take(u0, np.arange(n - 1), axis=axis)], axis=axis)
    nxt = np.concatenate([np.take(u0, np.arange(1, n), axis=axis), g_hi], axis=axis)
    return prev, nxt


def tvbm_minmod(field: SGDGField, config: TvbmConfig = TvbmConfig(), bc: Optional[BoundaryConditions] = None,
                inplace: bool = False):
    """Cockburn-Shu TVB minmod limiter, applied per stochastic mode and component.

    Returns (field, fired) with ``fired`` a (C, L) boolean mask.
    """
    out = field if inplace else field.copy()
    sp = field.space
    m = sp.mesh
    C, L = out.coeffs.shape[:2]
    K = sp.K_D
    if not config.enabled or K == 0:
        return out, np.zeros((C, L), dtype=bool)
    Mx = K + 1
    My = Mx if sp.dim == 2 else 1
    c7 = out.coeffs.reshape(m.nx, m.ny, L, Mx, My, sp.NK, 4)
    u0 = c7[:, :, :, 0, 0].copy()  # (Nx, Ny, L, NK, 4)
    p1, p0 = sp.phi_at_1[1:], sp.phi_at_0[1:]
    troubled = np.zeros(u0.shape, dtype=bool)
    # changes below round-off of the component scale do not mark a cell
    tol = TROUBLE_TOL * np.maximum(np.abs(u0[..., 0, :]).max(axis=(0, 1, 2)), 1e-300)
    new_slopes = []
    for axis in range(sp.dim):
        h = m.dx if axis == 0 else m.dy
        Mh2 = config.M_tvb * h * h
        prev, nxt = _neighbour_means(u0, axis, bc)
        dp, dm = nxt - u0, u0 - prev
        if axis == 0:
            modes = c7[:, :, :, 1:, 0]  # (Nx, Ny, L, K, NK, 4)
        else:
            modes = c7[:, :, :, 0, 1:]
        dev_p = np.einsum("m,xylmkc->xylkc", p1, modes)
        dev_m = -np.einsum("m,xylmkc->xylkc", p0, modes)
        troubled |= ((np.abs(tvb_minmod(dev_p, dp, dm, Mh2) - dev_p) > tol)
                     | (np.abs(tvb_minmod(dev_m, dp, dm, Mh2) - dev_m) > tol))
        slope = modes[:, :, :, 0]
        new_slopes.append(tvb_minmod(SQRT3 * slope, dp, dm, Mh2) / SQRT3)
    if np.any(troubled):
        mean_mask = np.zeros((Mx, My), dtype=bool)
        mean_mask[0, 0] = True
        keep = np.where(mean_mask[None, None, None, :, :, None, None], c7, 0.0)
        limited = keep
        limited[:, :, :, 1, 0] = new_slopes[0]
        if sp.dim == 2:
            limited[:, :, :, 0, 1] = new_slopes[1]
        t7 = np.broadcast_to(troubled[:, :, :, None, None, :, :], c7.shape)
        c7[...] = np.where(t7, limited, c7)
    fired = troubled.any(axis=(-1, -2)).reshape(C, L)
    return out, fired
