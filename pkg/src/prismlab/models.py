"""Closed-form model initial data sets.

Every model is an exact pointwise evaluator (metric, extrinsic curvature,
optional electric field at arbitrary coordinates) plus a sampler that
populates an :class:`~prismlab.idata.InitialData` on a grid.  Keeping the
evaluators closed form separates scheme error from model error: the grids
always carry exact nodal samples, never pre-differenced data.

Catalogue:

``euclidean``      g = delta, k = 0.
``hyperbolic``     g = (dx1)^2 + e^{2 x1}((dx2)^2 + (dx3)^2), k = g; the
                   u = 1 face is {x1 = 0} and the u = 0 face is {x1 = 1}
                   (horospherical "top" at x1 = 0).
``graph``          slice t = f(x3) of Minkowski space: g = delta - df (x) df,
                   k = Hess f / sqrt(1 - |df|^2) taken with respect to the
                   future-pointing timelike normal.  Flipping the sign of k
                   (past normal) swaps the roles of the two null expansions.
``schwarzschild``  time-symmetric slice in isotropic coordinates,
                   g = (1 + m/2r)^4 delta, k = 0.
``mp``             time slice of a one-center Majumdar-Papapetrou spacetime:
                   g = U^2 delta with U = 1 + q/|x - x0| flat-harmonic, and
                   covariant electric field E = d(log U).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .idata import (
    CoVectorField,
    Face,
    Grid,
    InitialData,
    ScalarField,
    SymTensorField,
    sym_from_mat,
)

_DELTA6 = np.array([1.0, 0.0, 0.0, 1.0, 0.0, 1.0])


@dataclass(frozen=True)
class ModelSpec:
    """Named model plus parameters; :func:`build_initial_data` consumes it."""

    name: str
    mass: float = 1.0
    charge: float = 1.0
    charge_center: tuple = (0.5, 0.5, -1.5)
    graph_eps: float = 0.2
    box: tuple = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))
    perturb_profile: str | None = None
    perturb_eps: float = 0.0
    perturb_seed: int = 0

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise ValueError(f"unknown model '{self.name}'; see MODEL_NAMES")
        if self.mass <= 0:
            raise ValueError("mass must be positive")


class EuclideanModel:
    asymptotically_flat = True
    has_electric = False

    def metric_at(self, x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.eye(3), x.shape[:-1] + (3, 3)).copy()

    def extrinsic_at(self, x: np.ndarray) -> np.ndarray:
        return np.zeros(x.shape[:-1] + (3, 3))

    def validity_radius(self) -> float:
        return np.inf


class HyperbolicModel:
    """Upper-half-space-type coordinates; sectional curvature -1, k = g."""

    asymptotically_flat = False
    has_electric = False

    def metric_at(self, x: np.ndarray) -> np.ndarray:
        g = np.zeros(x.shape[:-1] + (3, 3))
        e2 = np.exp(2.0 * x[..., 0])
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = e2
        g[..., 2, 2] = e2
        return g

    def extrinsic_at(self, x: np.ndarray) -> np.ndarray:
        return self.metric_at(x)


class GraphModel:
    """Graph slice t = f(x3) of Minkowski space, f and derivatives supplied."""

    asymptotically_flat = False
    has_electric = False

    def __init__(self, f, fp, fpp):
        self.f, self.fp, self.fpp = f, fp, fpp

    @classmethod
    def quadratic(cls, eps: float) -> "GraphModel":
        return cls(
            lambda z: eps * z**2,
            lambda z: 2.0 * eps * z,
            lambda z: 2.0 * eps * np.ones_like(z),
        )

    def metric_at(self, x: np.ndarray) -> np.ndarray:
        g = np.zeros(x.shape[:-1] + (3, 3))
        fp = self.fp(x[..., 2])
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = 1.0
        g[..., 2, 2] = 1.0 - fp**2
        return g

    def extrinsic_at(self, x: np.ndarray) -> np.ndarray:
        k = np.zeros(x.shape[:-1] + (3, 3))
        fp = self.fp(x[..., 2])
        k[..., 2, 2] = self.fpp(x[..., 2]) / np.sqrt(1.0 - fp**2)
        return k

    def check_slope(self, zvals: np.ndarray):
        if np.max(np.abs(self.fp(zvals))) >= 1.0:
            raise ValueError("graph slope must satisfy |f'| < 1 on the box")


class SchwarzschildModel:
    """Time-symmetric isotropic slice, conformal factor psi = 1 + m/(2r)."""

    asymptotically_flat = True
    has_electric = False

    def __init__(self, mass: float):
        if mass <= 0:
            raise ValueError("mass must be positive")
        self.mass = mass

    def metric_at(self, x: np.ndarray) -> np.ndarray:
        r = np.sqrt(np.sum(x**2, axis=-1))
        psi4 = (1.0 + self.mass / (2.0 * r)) ** 4
        return psi4[..., None, None] * np.eye(3)

    def extrinsic_at(self, x: np.ndarray) -> np.ndarray:
        return np.zeros(x.shape[:-1] + (3, 3))

    def validity_radius(self) -> float:
        return np.inf


class MPModel:
    """Majumdar-Papapetrou time slice: g = U^2 delta, E = d(log U)."""

    asymptotically_flat = True
    has_electric = True

    def __init__(self, charge: float, center):
        self.charge = float(charge)
        self.center = np.asarray(center, dtype=float)

    def _potential(self, x: np.ndarray):
        d = x - self.center
        r = np.sqrt(np.sum(d**2, axis=-1))
        return 1.0 + self.charge / r, d, r

    def metric_at(self, x: np.ndarray) -> np.ndarray:
        U, _, _ = self._potential(x)
        return (U**2)[..., None, None] * np.eye(3)

    def extrinsic_at(self, x: np.ndarray) -> np.ndarray:
        return np.zeros(x.shape[:-1] + (3, 3))

    def electric_at(self, x: np.ndarray) -> np.ndarray:
        # covariant components of d(log U)
        U, d, r = self._potential(x)
        dU = -self.charge * d / r[..., None] ** 3
        return dU / U[..., None]


def _sample(model, grid: Grid, electric: bool = False) -> InitialData:
    x = grid.nodes()
    g = SymTensorField(grid, sym_from_mat(model.metric_at(x)))
    k = SymTensorField(grid, sym_from_mat(model.extrinsic_at(x)))
    E = None
    if electric:
        E = CoVectorField(grid, model.electric_at(x), variance="covariant")
    return InitialData(grid, g, k, electric=E)


def euclidean_cube(grid: Grid) -> InitialData:
    """Flat data: g = delta, k = 0."""
    return _sample(EuclideanModel(), grid)


def hyperbolic_prism(grid: Grid) -> InitialData:
    """Hyperbolic data (g, k) = (g_H, g_H); requires the box inside [0,1]^3."""
    for a, b in grid.box:
        if a < -1e-12 or b > 1.0 + 1e-12:
            raise ValueError("hyperbolic model expects a box within [0,1]^3")
    return _sample(HyperbolicModel(), grid)


def minkowski_graph(grid: Grid, eps: float = 0.2, profile=None) -> InitialData:
    """Graph slice with height f(x3) = eps*x3^2 (or a custom (f, f', f'') triple)."""
    model = GraphModel(*profile) if profile is not None else GraphModel.quadratic(eps)
    model.check_slope(grid.axis_coords(2))
    return _sample(model, grid)


def schwarzschild_slice(grid: Grid, mass: float = 1.0) -> InitialData:
    """Isotropic Schwarzschild slice; the box must not contain the puncture r = 0."""
    inside = all(a <= 0.0 <= b for a, b in grid.box)
    if inside:
        raise ValueError("box must exclude the coordinate origin")
    return _sample(SchwarzschildModel(mass), grid)


def mp_slice(grid: Grid, charge: float = 1.0, center=(0.5, 0.5, -1.5),
             div_tol: float | None = None) -> InitialData:
    """Majumdar-Papapetrou slice with one charge center outside the box.

    The divergence-free property of the electric field is a definition of the
    charged data class, so it is *checked* on the sampled grid (tolerance
    defaults to a generous O(h^2) budget) rather than assumed.
    """
    center_arr = np.asarray(center, dtype=float)
    inside = all(
        a - 1e-12 <= c <= b + 1e-12 for (a, b), c in zip(grid.box, center_arr)
    )
    if inside:
        raise ValueError("charge center must lie strictly outside the box")
    model = MPModel(charge, center_arr)
    U = model._potential(grid.nodes())[0]
    if np.min(U) <= 0.0:
        raise ValueError("Majumdar-Papapetrou potential must stay positive on the box")
    data = _sample(model, grid, electric=True)
    div = data.electric_divergence().values
    hmax = max(grid.spacing)
    scale = float(np.abs(data.electric.values).max()) + 1.0 / grid.diameter
    tol = div_tol if div_tol is not None else 100.0 * hmax**2 * scale
    if np.abs(div).max() > tol:
        raise ValueError(
            f"electric field is not divergence free: sup |div E| = "
            f"{np.abs(div).max():.3e} exceeds {tol:.3e}"
        )
    return data


# ---------------------------------------------------------------------------
# perturbations
# ---------------------------------------------------------------------------

def concave_profile(grid: Grid, center=None) -> ScalarField:
    """phi = -|x - c|^2; conformal factors e^{2 eps phi} built on it have
    strictly positive scalar curvature for small eps (and H < 0 on all faces)."""
    x = grid.nodes()
    if center is None:
        center = [0.5 * (a + b) for a, b in grid.box]
    d = x - np.asarray(center)
    return ScalarField(grid, -np.sum(d**2, axis=-1))


def cosine_bump_profile(grid: Grid) -> ScalarField:
    """Smooth interior bump with vanishing normal derivative on all faces."""
    vals = np.ones(grid.dims)
    for a in range(3):
        lo, hi = grid.box[a]
        t = (grid.axis_coords(a) - lo) / (hi - lo)
        shape = [1, 1, 1]
        shape[a] = -1
        vals = vals * (0.5 - 0.5 * np.cos(2.0 * np.pi * t)).reshape(shape)
    return ScalarField(grid, vals)


def random_smooth_profile(grid: Grid, seed: int, kmax: int = 2) -> ScalarField:
    """Random low-order cosine series, normalized to sup |phi| = 1.

    Cosine modes have vanishing normal derivative on every face, which keeps
    randomly perturbed data compatible with the homogeneous Neumann problem.
    """
    rng = np.random.default_rng(seed)
    vals = np.zeros(grid.dims)
    coords = [
        (grid.axis_coords(a) - grid.box[a][0]) / (grid.box[a][1] - grid.box[a][0])
        for a in range(3)
    ]
    for k1 in range(kmax + 1):
        for k2 in range(kmax + 1):
            for k3 in range(kmax + 1):
                if k1 == k2 == k3 == 0:
                    continue
                c = rng.normal() / (1.0 + k1**2 + k2**2 + k3**2)
                vals += (
                    c
                    * np.cos(np.pi * k1 * coords[0])[:, None, None]
                    * np.cos(np.pi * k2 * coords[1])[None, :, None]
                    * np.cos(np.pi * k3 * coords[2])[None, None, :]
                )
    sup = np.abs(vals).max()
    if sup > 0:
        vals /= sup
    return ScalarField(grid, vals)


def random_symmetric_field(grid: Grid, seed: int) -> SymTensorField:
    """Random smooth symmetric tensor with components built like the profiles."""
    comps = [
        random_smooth_profile(grid, seed * 101 + c).values for c in range(6)
    ]
    return SymTensorField(grid, np.stack(comps, axis=-1))


def perturb(
    data: InitialData,
    phi: ScalarField | None = None,
    eps: float = 0.0,
    s: SymTensorField | None = None,
    k_eps: float = 0.0,
) -> InitialData:
    """Conformal metric perturbation g -> e^{2 eps phi} g and/or k -> k + k_eps s.

    Positive definiteness of the perturbed metric is revalidated; a
    perturbation that destroys it is rejected by InitialData itself.
    """
    g_vals = data.g.values
    if phi is not None and eps != 0.0:
        g_vals = np.exp(2.0 * eps * phi.values)[..., None] * g_vals
    k_vals = data.k.values
    if s is not None and k_eps != 0.0:
        k_vals = k_vals + k_eps * s.values
    return InitialData(
        data.grid,
        SymTensorField(data.grid, g_vals),
        SymTensorField(data.grid, k_vals),
        electric=data.electric,
    )


# ---------------------------------------------------------------------------
# catalogue plumbing for the CLI and the studies
# ---------------------------------------------------------------------------

MODEL_NAMES = {
    "euclidean": "flat cube: g = delta, k = 0",
    "hyperbolic": "hyperbolic prism: g = dx1^2 + e^{2x1}(dx2^2 + dx3^2), k = g",
    "graph": "Minkowski graph slice t = eps*z^2 (eps from --eps, default 0.2)",
    "schwarzschild": "isotropic Schwarzschild slice (mass from --mass)",
    "mp": "Majumdar-Papapetrou charged slice (charge/center from --charge/--center)",
    "perturbed-euclidean": "flat cube with a conformal bump (profile/eps options)",
}


def build_evaluator(spec: ModelSpec):
    """Pointwise evaluator object for ADM-type surface integrals (AF models)."""
    if spec.name == "euclidean":
        return EuclideanModel()
    if spec.name == "schwarzschild":
        return SchwarzschildModel(spec.mass)
    if spec.name == "mp":
        return MPModel(spec.charge, spec.charge_center)
    if spec.name == "hyperbolic":
        return HyperbolicModel()
    if spec.name == "graph":
        return GraphModel.quadratic(spec.graph_eps)
    raise ValueError(f"model '{spec.name}' has no pointwise evaluator")


def build_initial_data(spec: ModelSpec, grid: Grid) -> InitialData:
    if spec.name == "euclidean":
        return euclidean_cube(grid)
    if spec.name == "hyperbolic":
        return hyperbolic_prism(grid)
    if spec.name == "graph":
        return minkowski_graph(grid, eps=spec.graph_eps)
    if spec.name == "schwarzschild":
        return schwarzschild_slice(grid, mass=spec.mass)
    if spec.name == "mp":
        return mp_slice(grid, charge=spec.charge, center=spec.charge_center)
    if spec.name == "perturbed-euclidean":
        base = euclidean_cube(grid)
        if spec.perturb_profile == "concave":
            phi = concave_profile(grid)
        elif spec.perturb_profile == "random":
            phi = random_smooth_profile(grid, spec.perturb_seed)
        else:
            phi = cosine_bump_profile(grid)
        return perturb(base, phi=phi, eps=spec.perturb_eps)
    raise ValueError(f"unknown model '{spec.name}'")


def default_top_face(spec_name: str, axis: int) -> Face:
    """Model-preferred Dirichlet-1 face for a given solve axis.

    The hyperbolic prism takes its u = 1 boundary on the x1 = 0 face; every
    other model uses the max face of the axis.
    """
    if spec_name == "hyperbolic" and axis == 0:
        return Face.XMIN
    return Face((axis, True))


def exact_solution(spec_name: str, grid: Grid, axis: int, eps: float = 0.2):
    """Closed-form mixed-BVP solution where one exists (else None).

    euclidean: linear along the axis; hyperbolic (axis 0): (e - e^x)/(e - 1);
    graph (axis 2): (z - eps z^2)/(1 - eps); mp (axis 2, charged): linear.
    """
    x = grid.nodes()[..., axis]
    lo, hi = grid.box[axis]
    if spec_name in ("euclidean", "mp"):
        return (x - lo) / (hi - lo)
    if spec_name == "hyperbolic" and axis == 0:
        return (np.e - np.exp(x)) / (np.e - 1.0)
    if spec_name == "graph" and axis == 2:
        return (x - eps * x**2) / (1.0 - eps)
    return None
