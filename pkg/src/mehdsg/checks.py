"""Self-test oracles run by the ``check`` subcommand.

Each check returns a CheckResult; ``run_checks`` runs them all.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .euler import AIR, flux, is_admissible, limiter_theta, primitive_to_conserved, theta_bisection
from .field import DiscreteSpace, SGDGField
from .limiters import hyperbolicity_limit, tvbm_minmod
from .mesh import BoundaryConditions, Mesh
from .quadrature import gauss_legendre_rule, gauss_lobatto_rule
from .riemann import _pressure_function, star_state
from .scenarios import SodIC
from .stochastic import RandomSpace
from .timestepping import SCHEMES


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.value:.3e} (tol {self.tolerance:.0e}) {self.detail}".rstrip()


def random_state_pairs(n, rng, gas=AIR):
    """Admissible means and arbitrary (often inadmissible) points near them."""
    rho = rng.uniform(0.05, 3.0, n)
    v = rng.uniform(-3.0, 3.0, (n, 2))
    p = rng.uniform(0.01, 3.0, n)
    mean = primitive_to_conserved(rho, v[:, 0], v[:, 1], p, gas)
    scale = rng.uniform(0.1, 3.0, (n, 1)) * np.abs(mean).max(axis=1, keepdims=True)
    point = mean + scale * rng.normal(size=(n, 4))
    return mean, point


def check_theta_oracle(n=1000, seed=1, tol=1e-10, gas=AIR) -> CheckResult:
    rng = np.random.default_rng(seed)
    mean, point = random_state_pairs(n, rng, gas)
    th = limiter_theta(mean, point, gas)
    ref = np.array([theta_bisection(mean[i], point[i], gas) for i in range(n)])
    err = float(np.max(np.abs(th - ref)))
    bad = int(np.count_nonzero(~is_admissible(point, gas)))
    return CheckResult("theta* vs bisection", err <= tol, err, tol, f"({n} pairs, {bad} inadmissible points)")


def check_riemann_residual(tol=1e-12, gas=AIR) -> CheckResult:
    left, right = SodIC(gas=gas).primitives()
    st = star_state(left, right, gas)
    g = gas.gamma
    cl = np.sqrt(g * left[2] / left[0])
    cr = np.sqrt(g * right[2] / right[0])
    fl = _pressure_function(st.p, left[0], left[2], cl, g)[0]
    fr = _pressure_function(st.p, right[0], right[2], cr, g)[0]
    res = abs(fl + fr + right[1] - left[1])
    return CheckResult("Sod star pressure residual", res < tol, res, tol, f"(p* = {st.p:.16g})")


def check_quadrature_exactness(max_points=12, tol=1e-13) -> CheckResult:
    worst = 0.0
    for n in range(1, max_points + 1):
        g = gauss_legendre_rule(n)
        for k in range(2 * n):
            worst = max(worst, abs(g.weights @ g.nodes**k - 1.0 / (k + 1)))
        if n >= 2:
            lo = gauss_lobatto_rule(n)
            for k in range(2 * n - 2):
                worst = max(worst, abs(lo.weights @ lo.nodes**k - 1.0 / (k + 1)))
    return CheckResult("quadrature exactness (GL 2n-1, GLL 2n-3)", worst < tol, worst, tol)


def _random_field(rng, dim, K_D=2, K_G=2, n_el=2, nx=6, amp=0.6):
    mesh = Mesh(dim, nx, 0.0, 1.0, nx if dim == 2 else 1, 0.0, 1.0)
    sp = DiscreteSpace(mesh, RandomSpace(((0.0, 1.0),)), K_D, K_G, n_el)
    c = sp.zeros().coeffs
    base = primitive_to_conserved(rng.uniform(0.5, 2.0, c.shape[:2]), rng.uniform(-1, 1, c.shape[:2]),
                                  rng.uniform(-1, 1, c.shape[:2]) if dim == 2 else 0.0,
                                  rng.uniform(0.3, 2.0, c.shape[:2]))
    c[...] = amp * rng.normal(size=c.shape) * np.abs(base)[:, :, None, None, :]
    c[:, :, 0, 0, :] = base
    return SGDGField(sp, c), BoundaryConditions.all_periodic(mesh)


def check_limiter_idempotence(seed=2, tol=1e-12) -> list:
    rng = np.random.default_rng(seed)
    out = []
    worst_h = worst_t = worst_mean = 0.0
    limited = 0
    for dim in (1, 2):
        f, bc = _random_field(rng, dim)
        once, rep = hyperbolicity_limit(f, AIR)
        limited += int(np.count_nonzero(rep.theta > 0))
        twice, rep2 = hyperbolicity_limit(once, AIR)
        worst_h = max(worst_h, float(np.max(np.abs(twice.coeffs - once.coeffs))), rep2.max_theta)
        t1, _ = tvbm_minmod(f, bc=bc)
        t2, _ = tvbm_minmod(t1, bc=bc)
        worst_t = max(worst_t, float(np.max(np.abs(t2.coeffs - t1.coeffs))))
        scale = np.abs(f.means()).max()
        worst_mean = max(worst_mean, float(np.max(np.abs(once.means() - f.means()))) / scale,
                         float(np.max(np.abs(t1.means() - f.means()))) / scale)
    out.append(CheckResult("hyperbolicity limiter idempotence", worst_h <= tol and limited > 0, worst_h, tol,
                           f"({limited} blocks limited)"))
    out.append(CheckResult("TVBM idempotence", worst_t <= tol, worst_t, tol))
    out.append(CheckResult("limiters preserve means (relative)", worst_mean <= tol, worst_mean, tol))
    return out


def check_kernels(seed=3, tol=1e-12, gas=AIR) -> CheckResult:
    """numba flux kernel against the numpy flux."""
    rng = np.random.default_rng(seed)
    mean, _ = random_state_pairs(500, rng, gas)
    U = np.ascontiguousarray(mean.T)
    Fx = np.empty_like(U)
    Fy = np.empty_like(U)
    kernels.flux_and_speeds(U, Fx, Fy, True, gas.gamma)
    err = max(float(np.max(np.abs(Fx.T - flux(mean, gas, 0)))), float(np.max(np.abs(Fy.T - flux(mean, gas, 1)))))
    err /= float(np.abs(Fx).max())
    return CheckResult("compiled flux vs numpy flux (relative)", err <= tol, err, tol)


def check_ssp_tables(tol=1e-9) -> CheckResult:
    """Order conditions of the Shu-Osher tables via their Butcher form."""
    worst = 0.0
    for order, sch in SCHEMES.items():
        s = sch.stages
        # Butcher A (s x s) and b from the Shu-Osher rows
        A = np.zeros((s + 1, s))
        for i in range(s):
            for l in range(i + 1):
                if l > 0:
                    A[i + 1] += sch.alpha[i][l] * A[l]
                if sch.beta[i][l] != 0.0:
                    A[i + 1, l] += sch.beta[i][l]
        b = A[s]
        Am = A[:s]
        c = Am.sum(axis=1)
        conds = [b.sum() - 1.0]
        if order >= 2:
            conds.append(b @ c - 0.5)
        if order >= 3:
            conds += [b @ c**2 - 1 / 3, b @ Am @ c - 1 / 6]
        if order >= 4:
            conds += [b @ c**3 - 0.25, b @ (c * (Am @ c)) - 1 / 8, b @ Am @ c**2 - 1 / 12, b @ Am @ Am @ c - 1 / 24]
        worst = max(worst, max(abs(x) for x in conds))
    return CheckResult("SSP-RK order conditions", worst < tol, worst, tol, "(tables given to 15 digits)")


def run_checks() -> list:
    results = [check_theta_oracle(), check_riemann_residual(), check_quadrature_exactness()]
    results += check_limiter_idempotence()
    results += [check_kernels(), check_ssp_tables()]
    return results
