"""SSP Runge-Kutta time stepping with the limiter pipeline.

Each stage is ``v_s = Lambda_theta(TVBM(sum_l alpha_sl v_l + beta_sl dt L(v_l)))``
so every stage is a convex combination of forward-Euler substeps applied to
limited fields.
"""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .euler import AIR, GasModel, is_admissible
from .field import SGDGField, save_snapshot
from .limiters import (
    InadmissibleMeanError,
    LimiterReport,
    LimiterStats,
    TvbmConfig,
    count_inadmissible_monitored,
    hyperbolicity_limit,
    tvbm_minmod,
)


@dataclass(frozen=True)
class SspRkScheme:
    """Shu-Osher tables: stage s uses alpha[s][l], beta[s][l] for l <= s."""

    name: str
    order: int
    alpha: tuple
    beta: tuple

    def __post_init__(self):
        if len(self.alpha) != len(self.beta) or not self.alpha:
            raise ValueError("alpha and beta need one row per stage")
        for s, (a, b) in enumerate(zip(self.alpha, self.beta)):
            if len(a) != s + 1 or len(b) != s + 1:
                raise ValueError(f"stage {s} needs {s + 1} coefficients")
            if any(x < 0.0 for x in a) or any(x < 0.0 for x in b):
                raise ValueError("SSP coefficients must be nonnegative")
            if abs(sum(a) - 1.0) > 1e-12:
                raise ValueError(f"alpha row {s} does not sum to one")
            if any(bb != 0.0 and aa == 0.0 for aa, bb in zip(a, b)):
                raise ValueError(f"stage {s}: beta != 0 requires alpha != 0")

    @property
    def stages(self) -> int:
        return len(self.alpha)

    def stage_times(self) -> np.ndarray:
        """Relative times c_l at which L(v_l) is evaluated (c_0 = 0), plus the final time."""
        c = [0.0]
        for a, b in zip(self.alpha, self.beta):
            c.append(sum(aa * c[l] + bb for l, (aa, bb) in enumerate(zip(a, b))))
        return np.array(c)

    def fe_ratios(self):
        return [[(b / a if b != 0.0 else 0.0) for a, b in zip(ar, br)] for ar, br in zip(self.alpha, self.beta)]


FORWARD_EULER = SspRkScheme("fe", 1, ((1.0,),), ((1.0,),))
SSPRK2 = SspRkScheme("ssprk2", 2, ((1.0,), (0.5, 0.5)), ((1.0,), (0.0, 0.5)))
SSPRK3 = SspRkScheme("ssprk3", 3, ((1.0,), (0.75, 0.25), (1.0 / 3.0, 0.0, 2.0 / 3.0)),
                     ((1.0,), (0.0, 0.25), (0.0, 0.0, 2.0 / 3.0)))
# Spiteri-Ruuth SSPRK(5,4)
SSPRK54 = SspRkScheme(
    "ssprk54", 4,
    ((1.0,),
     (0.444370493651235, 0.555629506348765),
     (0.620101851488403, 0.0, 0.379898148511597),
     (0.178079954393132, 0.0, 0.0, 0.821920045606868),
     (0.0, 0.0, 0.517231671970585, 0.096059710526147, 0.386708617503269)),
    ((0.391752226571890,),
     (0.0, 0.368410593050371),
     (0.0, 0.0, 0.251891774271694),
     (0.0, 0.0, 0.0, 0.544974750228521),
     (0.0, 0.0, 0.0, 0.063692468666290, 0.226007483236906)),
)
SCHEMES = {1: FORWARD_EULER, 2: SSPRK2, 3: SSPRK3, 4: SSPRK54}


@dataclass(frozen=True)
class CflConfig:
    C: float = 0.45

    def __post_init__(self):
        if not 0.0 < self.C <= 1.0:
            raise ValueError("CFL number must lie in (0, 1]")


def compute_dt(lambdas, mesh, cfl, lobatto_first_weight, t=0.0, t_end=np.inf):
    """Step size from lambda_x dt/dx + lambda_y dt/dy <= C w0, clipped to land on t_end."""
    C = cfl.C if isinstance(cfl, CflConfig) else float(cfl)
    lx, ly = lambdas
    rate = lx / mesh.dx + (ly / mesh.dy if mesh.dim == 2 else 0.0)
    if not np.isfinite(rate) or rate <= 0.0:
        raise ValueError(f"wave speed estimate must be finite and positive, got {lambdas}")
    dt = C * lobatto_first_weight / rate
    remaining = t_end - t
    if remaining < dt:
        dt = remaining
    return dt


@dataclass
class InvariantMonitor:
    """Counts violations of the stagewise admissibility invariants."""

    gas: GasModel = AIR
    full: bool = True
    substeps_checked: int = 0
    mean_violations: int = 0
    limiter_passes: int = 0
    point_violations: int = 0
    points_checked: int = 0
    mean_drift: float = 0.0

    def check_substeps(self, means_v, means_L, ratios, dt):
        for mv, mL, r in zip(means_v, means_L, ratios):
            if r == 0.0:
                continue
            w = mv + r * dt * mL
            self.substeps_checked += w.shape[0] * w.shape[1]
            self.mean_violations += int(np.count_nonzero(~is_admissible(w, self.gas)))

    def check_mean(self, before, after):
        scale = np.maximum(np.max(np.abs(before), axis=(0, 1)), 1e-300)
        rel = float(np.max(np.abs(after - before) / scale))
        self.mean_drift = max(self.mean_drift, rel)

    def check_points(self, field: SGDGField):
        self.limiter_passes += 1
        if self.full:
            self.point_violations += count_inadmissible_monitored(field)
            C, L = field.coeffs.shape[:2]
            self.points_checked += C * L * field.space.monitor.B.shape[0]

    @property
    def violations(self) -> int:
        return self.mean_violations + self.point_violations + int(self.mean_drift > 1e-12)

    def summary(self) -> dict:
        return {
            "substeps_checked": self.substeps_checked, "mean_violations": self.mean_violations,
            "limiter_passes": self.limiter_passes, "points_checked": self.points_checked,
            "point_violations": self.point_violations, "max_relative_mean_change": self.mean_drift,
        }


@dataclass
class RunResult:
    field: SGDGField
    t: float
    steps: int
    stats: LimiterStats
    monitor: Optional[InvariantMonitor] = None
    wall_time: float = 0.0
    dts: list = dc_field(default_factory=list)


class Solver:
    """Time integrator: RHS operator + SSP scheme + limiter pipeline."""

    def __init__(self, rhs, scheme: SspRkScheme = SSPRK54, cfl=CflConfig(), tvbm: TvbmConfig = TvbmConfig(),
                 hyperbolicity_limiter: bool = True, gas: GasModel = AIR, check: bool = False,
                 progress_every: int = 0, max_steps: int = 10**7, stream=None, dump_path=None):
        self.rhs = rhs
        self.space = rhs.space
        self.scheme = scheme
        self.cfl = cfl if isinstance(cfl, CflConfig) else CflConfig(float(cfl))
        self.tvbm = tvbm
        self.use_theta = hyperbolicity_limiter
        self.gas = gas
        self.monitor = InvariantMonitor(gas) if check else None
        self.stats = LimiterStats()
        self.progress_every = progress_every
        self.max_steps = max_steps
        self.stream = stream if stream is not None else sys.stderr
        self.dump_path = dump_path

    def limit(self, v: SGDGField, step=0, stage=0) -> SGDGField:
        mon = self.monitor
        before = v.means().copy() if mon else None
        v, fired = tvbm_minmod(v, self.tvbm, self.rhs.bc, inplace=True)
        if mon:
            mon.check_mean(before, v.means())
        if self.use_theta:
            v, rep = hyperbolicity_limit(v, self.gas, inplace=True)
            rep.tvbm_fired = fired
            if mon:
                mon.check_mean(before, v.means())
                mon.check_points(v)
        else:
            rep = LimiterReport(np.zeros(v.coeffs.shape[:2]), fired)
        self.stats.add(rep, step, stage)
        return v

    def step(self, u: SGDGField, t: float, t_end: float = np.inf, step_index: int = 0, dt=None):
        sch = self.scheme
        c = sch.stage_times()
        ratios = sch.fe_ratios()
        vs = [u]
        Ls = []
        L0, lam = self.rhs(u, t)
        if dt is None:
            dt = compute_dt(lam, self.space.mesh, self.cfl, self.space.w0, t, t_end)
        if not dt > 0.0:
            raise ValueError(f"time step must be positive, got {dt}")
        Ls.append(L0)
        for s in range(sch.stages):
            if s > 0:
                Ls.append(self.rhs(vs[s], t + c[s] * dt)[0])
            acc = np.zeros_like(u.coeffs)
            for l in range(s + 1):
                a, b = sch.alpha[s][l], sch.beta[s][l]
                if a != 0.0:
                    acc += a * vs[l].coeffs
                if b != 0.0:
                    acc += (b * dt) * Ls[l]
            if self.monitor:
                self.monitor.check_substeps([v.means() for v in vs], [Ll[:, :, 0, 0] for Ll in Ls],
                                            ratios[s], dt)
            v = self.limit(SGDGField(self.space, acc), step_index, s + 1)
            vs.append(v)
        return vs[-1], dt

    def run(self, u0: SGDGField, t_end: float, t0: float = 0.0) -> RunResult:
        start = time.perf_counter()
        u = self.limit(u0.copy(), 0, 0)
        t = t0
        steps = 0
        dts = []
        while t < t_end:
            if steps >= self.max_steps:
                raise RuntimeError(f"maximum step count {self.max_steps} reached at t = {t}")
            try:
                u, dt = self.step(u, t, t_end, steps + 1)
            except InadmissibleMeanError as exc:
                # an inadmissible mean falsifies the scheme: keep the last good state
                if self.dump_path is not None:
                    save_snapshot(u, self.dump_path, t, {"error": str(exc), "step": steps + 1})
                    exc.dump = str(self.dump_path)
                raise
            # land exactly on t_end when the step was clipped
            t = t_end if t + dt >= t_end else t + dt
            steps += 1
            dts.append(dt)
            if self.progress_every and steps % self.progress_every == 0:
                last = self.stats.rows[-1] if self.stats.rows else (0, 0, 0.0, 0.0)
                print(f"step {steps} t={t:.6g} dt={dt:.3e} limited={last[2]:.4f}", file=self.stream, flush=True)
        return RunResult(u, t, steps, self.stats, self.monitor, time.perf_counter() - start, dts)


def rk_step(field, t, dt, scheme, rhs_operator, limiters: bool = True, tvbm: TvbmConfig = TvbmConfig()):
    """One SSP step with the limiter pipeline (functional wrapper around :class:`Solver`)."""
    solver = Solver(rhs_operator, scheme, tvbm=tvbm if limiters else TvbmConfig(enabled=False),
                    hyperbolicity_limiter=limiters)
    return solver.step(field, t, dt=dt)[0]


def run(scenario, **overrides) -> RunResult:
    """Build a scenario and integrate it to its end time."""
    from .scenarios import build_problem

    prob = build_problem(scenario, **overrides)
    return prob.solve()
