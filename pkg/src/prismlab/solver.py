"""Mixed boundary value solver for spacetime- and charged-harmonic functions.

Problem: on the cube, u = 1 on the top face, u = 0 on the bottom face, zero
conormal flux on the four side faces, with

* spacetime drift:  Delta u + K sqrt(delta^2 + |grad u|^2) - delta K = 0,
  K = tr_g k, continued in the regularization parameter delta down to
  delta_min (each stage warm-starts the next);
* charged drift:    Delta u - <E, grad u> = 0, which for an exact field
  E = dh is itself a pure divergence-form operator with weight e^{-h} and
  therefore needs a single symmetric linear solve.

Discretization: divergence (flux) form.  The stiffness operator is the exact
gradient of the discrete energy

    E(u) = 1/2 sum_nodes W rho sqrt(det g) g^{ab} (D_a u)(D_b u),

with face-centered fluxes for the diagonal part (compact 7-point stencil)
and adjoint-paired nodal differences for the metric's off-diagonal part, so
the operator is symmetric for *every* metric.  The zero-flux Neumann
condition enters by dropping the boundary half-face fluxes (equivalently,
mirror ghost values), the natural condition of the weak form.  Edge and
vertex nodes are ordinary boundary unknowns with doubly mirrored ghosts.

Each Picard step freezes the nonlinearity at the previous iterate and solves
the linear stage with matrix-free preconditioned conjugate gradients.  The
preconditioner is an exact fast solver for the flat-coefficient operator,
diagonalized by DST-I along the Dirichlet axis and DCT-I along the Neumann
axes, so the flat cube solves in a single iteration and curved models in a
few dozen regardless of grid size.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft

from . import fd, idata
from .idata import Face, Grid, InitialData, ScalarField

DRIFT_KINDS = ("spacetime", "charged", "none")


class SolverError(RuntimeError):
    """Nonconvergence or linear-solver stagnation, with diagnostics attached."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


@dataclass(frozen=True)
class MixedBVP:
    """Dirichlet data 1 on ``top``, 0 on ``bottom``, zero flux elsewhere."""

    top: Face
    bottom: Face
    drift: str = "spacetime"

    def __post_init__(self):
        if self.top == self.bottom:
            raise ValueError("top and bottom faces must differ")
        if self.bottom != self.top.opposite:
            raise ValueError("Dirichlet faces must be an opposite pair")
        if self.drift not in DRIFT_KINDS:
            raise ValueError(f"drift must be one of {DRIFT_KINDS}")

    @property
    def axis(self) -> int:
        return self.top.axis

    @property
    def neumann_faces(self) -> tuple:
        return tuple(f for f in Face if f.axis != self.axis)


@dataclass(frozen=True)
class SolverConfig:
    delta0: float = 0.1
    delta_min: float = 1e-4
    delta_reduction: float = 0.5
    picard_tol: float = 1e-10          # sup-norm of the Picard update, x scale
    max_picard: int = 200              # per delta stage
    damping: float = 1.0               # halved on residual increase
    damping_floor: float = 1.0 / 256.0
    linear_tol: float = 1e-12          # relative l2 residual of the inner solve
    max_linear: int = 2000
    residual_tol: float = 1e-6         # final-stage PDE residual, sup-norm
    curl_rtol: float = 0.1             # gate for treating E as an exact field

    def __post_init__(self):
        if not (0.0 < self.delta_min <= self.delta0):
            raise ValueError("need 0 < delta_min <= delta0")
        if not (0.0 < self.delta_reduction < 1.0):
            raise ValueError("delta reduction factor must lie in (0, 1)")
        if self.picard_tol <= 0 or self.linear_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")

    def delta_schedule(self) -> list:
        deltas = []
        d = self.delta0
        while d > self.delta_min:
            deltas.append(d)
            d *= self.delta_reduction
        deltas.append(self.delta_min)
        return deltas


@dataclass
class IterationRecord:
    delta: float
    iteration: int
    residual_sup: float
    update_sup: float


@dataclass
class StageRecord:
    delta: float
    iterations: int
    update_sup: float
    residual_sup: float
    min_grad: float
    damping: float


@dataclass
class SolutionBundle:
    """Converged solution with gradient magnitude and continuation diagnostics."""

    u: ScalarField
    grad_mag: ScalarField
    min_grad: float
    stages: list
    history: list
    converged: bool
    final_residual: float
    bvp: MixedBVP

    def stage_min_grads(self) -> list:
        return [s.min_grad for s in self.stages]


def _axis_slice(axis: int, s) -> tuple:
    idx = [slice(None)] * 3
    idx[axis] = s
    return tuple(idx)


class EllipticOperator:
    """Matrix-free symmetric stiffness for div(rho sqrt(g) g^{ab} d_b u)."""

    def __init__(self, data: InitialData, bvp: MixedBVP, rho: np.ndarray | None = None):
        self.data = data
        self.bvp = bvp
        self.grid = data.grid
        geo = data.geometry()
        self.geo = geo
        h = self.grid.spacing
        dims = self.grid.dims

        self.rho = np.ones(dims) if rho is None else rho
        coeff = self.rho * geo.sqrt_det

        # finite-volume weights: half cells on the Neumann boundaries
        wvec = []
        for a in range(3):
            w = np.full(dims[a], h[a])
            if a != bvp.axis:
                w[0] *= 0.5
                w[-1] *= 0.5
            wvec.append(w)
        self.w_fv = (
            wvec[0][:, None, None] * wvec[1][None, :, None] * wvec[2][None, None, :]
        )

        # per-axis half-face stiffness S_a = avg(coeff g^{aa}) * area / h
        self.stiff = []
        self.cbar = []
        for a in range(3):
            C = coeff * geo.ginv[..., a, a]
            self.cbar.append(float(C.mean()))
            lo = _axis_slice(a, slice(None, -1))
            hi = _axis_slice(a, slice(1, None))
            Ch = 0.5 * (C[lo] + C[hi])
            area = (self.w_fv / np.broadcast_to(
                wvec[a].reshape([-1 if i == a else 1 for i in range(3)]), dims
            ))[lo]
            self.stiff.append(Ch * area / h[a])

        # off-diagonal metric blocks via adjoint-paired nodal differences
        gscale = np.abs(geo.ginv[..., [0, 1, 2], [0, 1, 2]]).max()
        self.mixed = []
        for a in range(3):
            for b in range(a + 1, 3):
                offd = geo.ginv[..., a, b]
                if np.abs(offd).max() > 1e-14 * gscale:
                    self.mixed.append((a, b, self.w_fv * coeff * offd))

        # unknowns: everything except the two Dirichlet faces
        mask = np.ones(dims, dtype=bool)
        mask[_axis_slice(bvp.axis, self.bvp.top.node_index(self.grid))] = False
        mask[_axis_slice(bvp.axis, self.bvp.bottom.node_index(self.grid))] = False
        self.mask = mask
        self.w_coeff = self.w_fv * coeff

        self.dirichlet = np.zeros(dims)
        self.dirichlet[_axis_slice(bvp.axis, bvp.top.node_index(self.grid))] = 1.0

        self._setup_fast_solver()
        self._a_dirichlet = self.apply(self.dirichlet)
        self._a_dirichlet[~mask] = 0.0

    # -- stiffness application ------------------------------------------------

    def apply(self, u: np.ndarray) -> np.ndarray:
        out = np.zeros_like(u)
        for a in range(3):
            lo = _axis_slice(a, slice(None, -1))
            hi = _axis_slice(a, slice(1, None))
            flux = self.stiff[a] * (u[hi] - u[lo])
            out[lo] -= flux
            out[hi] += flux
        h = self.grid.spacing
        for a, b, M in self.mixed:
            out += fd.gradient_adjoint(M * fd.diff(u, h[b], b), h[a], a)
            out += fd.gradient_adjoint(M * fd.diff(u, h[a], a), h[b], b)
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.apply(x)
        y[~self.mask] = 0.0
        return y

    def rhs(self, f_pde: np.ndarray) -> np.ndarray:
        """Right-hand side of A v = b for Delta_rho u = f with Dirichlet lifting."""
        b = -self.w_coeff * f_pde - self._a_dirichlet
        b[~self.mask] = 0.0
        return b

    def pde_residual(self, u: np.ndarray) -> np.ndarray:
        """-A(u) / (W rho sqrt g): the discrete weighted Laplacian of u."""
        return -self.apply(u) / self.w_coeff

    # -- flat fast solver (the preconditioner) --------------------------------

    def _setup_fast_solver(self):
        h = self.grid.spacing
        dims = self.grid.dims
        self._sigma = []
        self._norm = []
        self._alt = []
        for a in range(3):
            n = dims[a]
            if a == self.bvp.axis:
                modes = np.arange(1, n - 1)
                norm = np.full(n - 2, h[a] * (n - 1) / 2.0)
            else:
                modes = np.arange(n)
                norm = np.full(n, h[a] * (n - 1) / 2.0)
                norm[0] *= 2.0
                norm[-1] *= 2.0
            sigma = (2.0 - 2.0 * np.cos(np.pi * modes / (n - 1))) / h[a] ** 2
            self._sigma.append(sigma)
            self._norm.append(norm)
            self._alt.append((-1.0) ** np.arange(n))
        shape = lambda a, v: v.reshape([-1 if i == a else 1 for i in range(3)])
        denom = sum(self.cbar[a] * shape(a, self._sigma[a]) for a in range(3))
        denom = denom * np.prod(
            np.broadcast_arrays(*[shape(a, self._norm[a]) for a in range(3)]),
            axis=0,
        )
        self._denom = denom

    def _cos_apply(self, x: np.ndarray, axis: int) -> np.ndarray:
        X = scipy.fft.dct(x, type=1, axis=axis)
        first = x[_axis_slice(axis, slice(0, 1))]
        last = x[_axis_slice(axis, slice(-1, None))]
        alt = self._alt[axis].reshape([-1 if i == axis else 1 for i in range(3)])
        return 0.5 * (X + first + alt * last)

    @staticmethod
    def _sin_apply(x: np.ndarray, axis: int) -> np.ndarray:
        return 0.5 * scipy.fft.dst(x, type=1, axis=axis)

    def precond(self, r: np.ndarray) -> np.ndarray:
        d = self.bvp.axis
        z = r[_axis_slice(d, slice(1, -1))]
        for a in range(3):
            z = self._sin_apply(z, a) if a == d else self._cos_apply(z, a)
        z = z / self._denom
        for a in range(3):
            z = self._sin_apply(z, a) if a == d else self._cos_apply(z, a)
        out = np.zeros_like(r)
        out[_axis_slice(d, slice(1, -1))] = z
        return out

    # -- preconditioned conjugate gradients ------------------------------------

    def cg(self, b: np.ndarray, x0: np.ndarray, tol: float, maxiter: int):
        x = x0.copy()
        r = b - self.matvec(x)
        bnorm = float(np.sqrt(np.sum(b * b)))
        if bnorm == 0.0:
            return np.zeros_like(b), 0, 0.0
        rnorm = float(np.sqrt(np.sum(r * r)))
        if rnorm <= tol * bnorm:
            return x, 0, rnorm / bnorm
        z = self.precond(r)
        p = z.copy()
        rz = float(np.sum(r * z))
        for it in range(1, maxiter + 1):
            Ap = self.matvec(p)
            pAp = float(np.sum(p * Ap))
            if pAp <= 0.0:
                raise SolverError("conjugate gradients lost positive definiteness")
            alpha = rz / pAp
            x += alpha * p
            r -= alpha * Ap
            rnorm = float(np.sqrt(np.sum(r * r)))
            if rnorm <= tol * bnorm:
                return x, it, rnorm / bnorm
            z = self.precond(r)
            rz_new = float(np.sum(r * z))
            p = z + (rz_new / rz) * p
            rz = rz_new
        raise SolverError(
            f"linear solver stagnated: relative residual {rnorm / bnorm:.3e} "
            f"after {maxiter} iterations"
        )


def _linear_profile(grid: Grid, bvp: MixedBVP) -> np.ndarray:
    x = grid.nodes()[..., bvp.axis]
    top = grid.box[bvp.axis][1] if bvp.top.is_max else grid.box[bvp.axis][0]
    bot = grid.box[bvp.axis][1] if bvp.bottom.is_max else grid.box[bvp.axis][0]
    return (x - bot) / (top - bot)


def _grad_mag(data: InitialData, u: np.ndarray) -> np.ndarray:
    return idata.gradient_magnitude(data, u)[2]


def _drive(op: EllipticOperator, cfg: SolverConfig, drift_fn, schedule,
           u0: np.ndarray | None) -> SolutionBundle:
    """Damped Picard iteration over a delta continuation schedule.

    ``drift_fn(s, delta)`` returns the frozen-coefficient drift f so that each
    linear stage solves Delta_rho u = -f; the PDE residual of iterate u is
    Delta_rho u + f(|grad u|).
    """
    data, bvp = op.data, op.bvp
    u = _linear_profile(data.grid, bvp) if u0 is None else np.array(u0, dtype=float)
    u[~op.mask] = op.dirichlet[~op.mask]
    v = np.where(op.mask, u - op.dirichlet, 0.0)

    history = []
    stages = []
    for delta in schedule:
        omega = cfg.damping
        prev_res = np.inf
        converged = False
        update = np.inf
        res = np.inf
        for it in range(1, cfg.max_picard + 1):
            s = _grad_mag(data, u)
            f = drift_fn(s, delta)
            b = op.rhs(f)
            v_new, _, _ = op.cg(b, v, cfg.linear_tol, cfg.max_linear)
            step = np.where(op.mask, op.dirichlet + v_new - u, 0.0)
            update = float(np.abs(step).max())
            u_trial = u + omega * step
            s_trial = _grad_mag(data, u_trial)
            res_field = op.pde_residual(u_trial) + drift_fn(s_trial, delta)
            res = float(np.abs(res_field[op.mask]).max())
            history.append(IterationRecord(delta, it, res, update))
            if res > prev_res * (1.0 + 1e-9) and update > cfg.picard_tol:
                omega *= 0.5
                if omega < cfg.damping_floor:
                    raise SolverError(
                        f"Picard iteration diverged at delta={delta:.3e} "
                        f"(residual {res:.3e} after damping floor)",
                        history,
                    )
                continue
            u = u_trial
            v = np.where(op.mask, u - op.dirichlet, 0.0)
            prev_res = res
            if update <= cfg.picard_tol:
                converged = True
                break
        if not converged:
            raise SolverError(
                f"Picard iteration did not converge at delta={delta:.3e} "
                f"(last update {update:.3e})",
                history,
            )
        s = _grad_mag(data, u)
        stages.append(
            StageRecord(delta, it, update, res, float(s.min()), omega)
        )

    s = _grad_mag(data, u)
    final_delta = schedule[-1]
    res_field = op.pde_residual(u) + drift_fn(s, final_delta)
    final_res = float(np.abs(res_field[op.mask]).max())
    if final_res > cfg.residual_tol:
        raise SolverError(
            f"converged iteration left PDE residual {final_res:.3e} above "
            f"tolerance {cfg.residual_tol:.3e}",
            history,
        )
    slack = 1e-11
    if u.min() < -slack or u.max() > 1.0 + slack:
        raise SolverError(
            f"maximum principle violated: u in [{u.min():.3e}, {u.max():.3e}]",
            history,
        )
    return SolutionBundle(
        u=ScalarField(data.grid, u),
        grad_mag=ScalarField(data.grid, s),
        min_grad=float(s.min()),
        stages=stages,
        history=history,
        converged=True,
        final_residual=final_res,
        bvp=bvp,
    )


def solve_spacetime_harmonic(
    data: InitialData,
    bvp: MixedBVP,
    cfg: SolverConfig = SolverConfig(),
    initial_guess: np.ndarray | None = None,
) -> SolutionBundle:
    """Solve Delta u + K sqrt(delta^2 + |grad u|^2) - delta K = 0 by
    delta-continuation down to cfg.delta_min."""
    if bvp.drift not in ("spacetime", "none"):
        raise ValueError("use solve_charged_harmonic for the charged drift")
    op = EllipticOperator(data, bvp)
    K = data.geometry().tr_k
    if bvp.drift == "none" or np.abs(K).max() == 0.0:
        schedule = [cfg.delta_min]
        drift_fn = lambda s, delta: np.zeros_like(s)
    else:
        schedule = cfg.delta_schedule()
        drift_fn = lambda s, delta: K * (np.sqrt(delta**2 + s**2) - delta)
    return _drive(op, cfg, drift_fn, schedule, initial_guess)


def electric_potential(data: InitialData, curl_rtol: float = 0.1):
    """Recover h with E = dh by line integration; None if E is not exact."""
    E = data.electric.values
    if data.electric.variance == "contravariant":
        E = data.geometry().lower_index(E)
    curl = idata.covector_curl_sup(data.grid, E)
    scale = float(np.abs(E).max()) + 1e-300
    if curl * data.grid.diameter / scale > curl_rtol:
        return None, curl
    return idata.potential_from_covector(data.grid, E), curl


def solve_charged_harmonic(
    data: InitialData,
    bvp: MixedBVP,
    cfg: SolverConfig = SolverConfig(),
    initial_guess: np.ndarray | None = None,
) -> SolutionBundle:
    """Solve Delta u - <E, grad u> = 0 (linear; no continuation needed).

    For an exact field E = dh the drift folds into the divergence form with
    weight e^{-h}, giving one symmetric solve; a field with measurable curl
    falls back to frozen-drift Picard sweeps.
    """
    if data.electric is None:
        raise ValueError("charged solve requires an electric field")
    h_pot, _ = electric_potential(data, cfg.curl_rtol)
    if h_pot is not None:
        rho = np.exp(-(h_pot - h_pot.mean()))
        op = EllipticOperator(data, replace(bvp, drift="charged"), rho=rho)
        drift_fn = lambda s, delta: np.zeros_like(s)
        return _drive(op, cfg, drift_fn, [0.0], initial_guess)
    # non-exact field: freeze <E, grad u> as a Picard right-hand side
    op = EllipticOperator(data, replace(bvp, drift="charged"))
    geo = data.geometry()
    E = data.electric.values
    if data.electric.variance == "contravariant":
        E = geo.lower_index(E)
    Evec = geo.raise_index(E)

    state = {}

    def drift_fn(s, delta):
        return -state["pairing"]

    def driver(u0):
        u = _linear_profile(data.grid, bvp) if u0 is None else np.array(u0)
        # one manual Picard loop: pairing depends on grad u, not just |grad u|
        history = []
        v = np.where(op.mask, u - op.dirichlet, 0.0)
        for it in range(1, cfg.max_picard + 1):
            du = idata.gradient_covector(data.grid, u)
            state["pairing"] = np.einsum("...i,...i->...", Evec, du)
            b = op.rhs(-state["pairing"])
            v, _, _ = op.cg(b, v, cfg.linear_tol, cfg.max_linear)
            u_new = np.where(op.mask, op.dirichlet + v, op.dirichlet)
            update = float(np.abs(u_new - u).max())
            u = u_new
            du = idata.gradient_covector(data.grid, u)
            res_field = op.pde_residual(u) - np.einsum("...i,...i->...", Evec, du)
            res = float(np.abs(res_field[op.mask]).max())
            history.append(IterationRecord(0.0, it, res, update))
            if update <= cfg.picard_tol:
                s = _grad_mag(data, u)
                return SolutionBundle(
                    u=ScalarField(data.grid, u),
                    grad_mag=ScalarField(data.grid, s),
                    min_grad=float(s.min()),
                    stages=[StageRecord(0.0, it, update, res, float(s.min()), 1.0)],
                    history=history,
                    converged=True,
                    final_residual=res,
                    bvp=bvp,
                )
        raise SolverError("charged Picard fallback did not converge", history)

    return driver(initial_guess)


def residual(
    data: InitialData,
    u: np.ndarray | ScalarField,
    drift: str = "spacetime",
    delta: float = 0.0,
    bvp: MixedBVP | None = None,
) -> ScalarField:
    """Pointwise discrete operator value on interior nodes (zero elsewhere).

    Uses the same flux-form operator as the solves, so the residual of a
    converged solution is below the configured tolerance by construction.
    """
    uv = u.values if isinstance(u, ScalarField) else np.asarray(u, dtype=float)
    if bvp is None:
        bvp = MixedBVP(Face.ZMAX, Face.ZMIN, drift="none")
    rho = None
    if drift == "charged":
        h_pot, _ = electric_potential(data)
        if h_pot is None:
            raise ValueError("charged residual requires an exact electric field")
        rho = np.exp(-(h_pot - h_pot.mean()))
    op = EllipticOperator(data, replace(bvp, drift="none"), rho=rho)
    lap = op.pde_residual(uv)
    if drift == "spacetime":
        K = data.geometry().tr_k
        s = _grad_mag(data, uv)
        G = lap + K * (np.sqrt(delta**2 + s**2) - delta)
    else:
        G = lap
    out = np.zeros_like(G)
    inner = (slice(1, -1),) * 3
    out[inner] = G[inner]
    return ScalarField(data.grid, out)


def spacetime_hessian(data: InitialData, u: np.ndarray | ScalarField):
    """nabla nabla u + |grad u| k, the second-derivative part of the level-set
    rigidity identities."""
    uv = u.values if isinstance(u, ScalarField) else np.asarray(u, dtype=float)
    hess = idata.hessian_covariant(data, uv)
    s = _grad_mag(data, uv)
    full = hess + s[..., None, None] * data.geometry().kmat
    return idata.SymTensorField.from_mat(data.grid, full)


def charged_hessian(data: InitialData, u: np.ndarray | ScalarField):
    """nabla nabla u + E (x) du + du (x) E - <E, grad u> g."""
    if data.electric is None:
        raise ValueError("charged Hessian requires an electric field")
    uv = u.values if isinstance(u, ScalarField) else np.asarray(u, dtype=float)
    geo = data.geometry()
    hess = idata.hessian_covariant(data, uv)
    du = idata.gradient_covector(data.grid, uv)
    E = data.electric.values
    if data.electric.variance == "contravariant":
        E = geo.lower_index(E)
    pairing = np.einsum("...ij,...i,...j->...", geo.ginv, E, du)
    full = (
        hess
        + np.einsum("...i,...j->...ij", E, du)
        + np.einsum("...i,...j->...ij", du, E)
        - pairing[..., None, None] * geo.gmat
    )
    return idata.SymTensorField.from_mat(data.grid, full)
