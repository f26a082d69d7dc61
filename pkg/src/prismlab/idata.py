"""Structured-grid tensor calculus for initial data sets.

An initial data set lives on a node-centered grid over a rectangular box
(combinatorially always the cube: 6 faces, 12 edges, 8 vertices) and carries
the Riemannian metric g, the symmetric extrinsic-curvature tensor k, and
optionally a covariant electric field.  This module computes the intrinsic
and extrinsic geometry the integral formulae consume: Christoffel symbols,
Ricci/scalar curvature, the constraint fields (mass density, current
density, conjugate momentum), face geometry and dihedral angles, and null
expansions.

Sign conventions, fixed once:

* second fundamental form  Pi(X, Y) = g(grad_X nu, Y)  with nu the *outward*
  g-unit normal; mean curvature H = tr Pi (so the round sphere seen from
  inside Euclidean space has H > 0);
* dihedral angle = interior angle between adjacent faces, pi/2 for the flat
  cube;
* null expansions theta_+- = H +- tr_S k with H taken with respect to the
  supplied unit normal.

All derivatives are the 2nd-order stencils of :mod:`prismlab.fd`.  Field
containers are immutable after construction and every operation here is a
pure function, so concurrent use is safe; reductions use fixed numpy
summation order and are reproducible run to run.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import fd

# symmetric-tensor component order: xx, xy, xz, yy, yz, zz
VOIGT = np.array([[0, 1, 2], [1, 3, 4], [2, 4, 5]])
_SYM_PAIRS = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]


class Face(enum.Enum):
    """One of the six coordinate faces of the box."""

    XMIN = (0, False)
    XMAX = (0, True)
    YMIN = (1, False)
    YMAX = (1, True)
    ZMIN = (2, False)
    ZMAX = (2, True)

    @property
    def axis(self) -> int:
        return self.value[0]

    @property
    def is_max(self) -> bool:
        return self.value[1]

    @property
    def sign(self) -> int:
        """Outward direction along the face axis."""
        return 1 if self.is_max else -1

    @property
    def opposite(self) -> "Face":
        return Face((self.axis, not self.is_max))

    def node_index(self, grid: "Grid") -> int:
        return grid.dims[self.axis] - 1 if self.is_max else 0

    @property
    def label(self) -> str:
        return "xyz"[self.axis] + ("+" if self.is_max else "-")


@dataclass(frozen=True)
class Edge:
    """Intersection of two faces with distinct axes; runs along the third axis."""

    face_a: Face
    face_b: Face

    def __post_init__(self):
        if self.face_a.axis == self.face_b.axis:
            raise ValueError("edge faces must have distinct axes")

    @property
    def axis(self) -> int:
        return 3 - self.face_a.axis - self.face_b.axis

    @property
    def label(self) -> str:
        return f"{self.face_a.label}{self.face_b.label}"


ALL_EDGES = tuple(
    Edge(Face((a, sa)), Face((b, sb)))
    for a in range(3)
    for b in range(a + 1, 3)
    for sa in (False, True)
    for sb in (False, True)
)


def edges_along_axis(axis: int) -> tuple:
    return tuple(e for e in ALL_EDGES if e.axis == axis)


@dataclass(frozen=True)
class Grid:
    """Uniform node-centered grid over a rectangular box."""

    dims: tuple
    box: tuple = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(
            self, "box", tuple((float(a), float(b)) for a, b in self.box)
        )
        if len(self.dims) != 3 or len(self.box) != 3:
            raise ValueError("grid is three-dimensional")
        for n in self.dims:
            if n < 5:
                raise ValueError("need at least 5 nodes per axis")
        for a, b in self.box:
            if not b > a:
                raise ValueError("box extents must be increasing")

    @property
    def spacing(self) -> tuple:
        return tuple(
            (b - a) / (n - 1) for (a, b), n in zip(self.box, self.dims)
        )

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum((b - a) ** 2 for a, b in self.box)))

    def axis_coords(self, axis: int) -> np.ndarray:
        a, b = self.box[axis]
        return np.linspace(a, b, self.dims[axis])

    def nodes(self) -> np.ndarray:
        """Node coordinates, shape dims + (3,)."""
        mesh = np.meshgrid(*(self.axis_coords(a) for a in range(3)), indexing="ij")
        return np.stack(mesh, axis=-1)

    def quadrature_weights(self) -> np.ndarray:
        return fd.quadrature_weights(self.dims, self.spacing)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


def _check_finite(values: np.ndarray, what: str):
    if not np.isfinite(values).all():
        raise ValueError(f"{what} contains non-finite values")


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = _freeze(self.values)
        if self.values.shape != self.grid.dims:
            raise ValueError("scalar field shape does not match grid")
        _check_finite(self.values, "scalar field")


@dataclass
class CoVectorField:
    """Rank-1 field; ``variance`` records whether components are covariant."""

    grid: Grid
    values: np.ndarray
    variance: str = "covariant"

    def __post_init__(self):
        self.values = _freeze(self.values)
        if self.values.shape != self.grid.dims + (3,):
            raise ValueError("vector field needs 3 components per node")
        if self.variance not in ("covariant", "contravariant"):
            raise ValueError("variance must be covariant or contravariant")
        _check_finite(self.values, "vector field")


@dataclass
class SymTensorField:
    """Symmetric rank-2 field stored as 6 components (xx, xy, xz, yy, yz, zz)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = _freeze(self.values)
        if self.values.shape != self.grid.dims + (6,):
            raise ValueError("symmetric tensor field needs 6 components per node")
        _check_finite(self.values, "symmetric tensor field")

    def mat(self) -> np.ndarray:
        """Full (..., 3, 3) matrix view (copy)."""
        return self.values[..., VOIGT]

    @classmethod
    def from_mat(cls, grid: Grid, mat: np.ndarray) -> "SymTensorField":
        comps = np.stack([mat[..., i, j] for i, j in _SYM_PAIRS], axis=-1)
        return cls(grid, comps)


def sym_from_mat(mat: np.ndarray) -> np.ndarray:
    return np.stack([mat[..., i, j] for i, j in _SYM_PAIRS], axis=-1)


@dataclass
class InitialData:
    """Grid, metric g (SPD, checked), extrinsic curvature k, optional electric field."""

    grid: Grid
    g: SymTensorField
    k: SymTensorField
    electric: CoVectorField | None = None
    _geom: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        gm = self.g.mat()
        m1 = gm[..., 0, 0]
        m2 = gm[..., 0, 0] * gm[..., 1, 1] - gm[..., 0, 1] ** 2
        m3 = np.linalg.det(gm)
        bad = (m1 <= 0) | (m2 <= 0) | (m3 <= 0)
        if bad.any():
            raise ValueError(
                f"metric is not positive definite at {int(bad.sum())} node(s)"
            )

    def geometry(self) -> "Geometry":
        if self._geom is None:
            self._geom = Geometry(self)
        return self._geom

    def electric_divergence(self) -> ScalarField:
        """div_g of the electric field (a data-quality check, not an assumption)."""
        if self.electric is None:
            raise ValueError("no electric field present")
        geo = self.geometry()
        E = self.electric.values
        if self.electric.variance == "contravariant":
            E = np.einsum("...ij,...j->...i", geo.gmat, E)
        dE = np.stack(
            [fd.diff(E, self.grid.spacing[a], a) for a in range(3)], axis=-2
        )  # (..., a, j) = d_a E_j
        covd = dE - np.einsum("...cij,...c->...ij", geo.christoffel_low_first, E)
        div = np.einsum("...ij,...ij->...", geo.ginv, covd)
        return ScalarField(self.grid, div)


@dataclass
class ConstraintBundle:
    """Mass density, current density, conjugate momentum and the DEC margin."""

    mu: ScalarField
    J: CoVectorField
    pi: SymTensorField
    dec_margin: ScalarField


@dataclass
class FaceGeometry:
    """Extrinsic geometry of one coordinate face.

    ``nu`` holds the contravariant components of the outward g-unit normal at
    the face nodes; ``Pi`` is the tangentially projected second fundamental
    form (full 3x3 components, Pi(nu, .) = 0); ``boundary_margin`` is
    H - |pi(., nu)^T|, the face's dominant-energy margin.
    """

    face: Face
    nu: np.ndarray          # (m1, m2, 3), contravariant
    H: np.ndarray           # (m1, m2)
    Pi: np.ndarray          # (m1, m2, 3, 3)
    tr_face_k: np.ndarray   # (m1, m2)
    boundary_margin: np.ndarray  # (m1, m2)


@dataclass
class EdgeAngles:
    """Interior dihedral angle samples along one edge."""

    edge: Edge
    positions: np.ndarray   # coordinate along the edge axis
    alpha: np.ndarray       # radians
    reference: float = np.pi / 2

    def __post_init__(self):
        if not ((self.alpha > 0) & (self.alpha < np.pi)).all():
            raise ValueError("dihedral angles must lie in (0, pi)")


class Geometry:
    """Lazily computed geometric quantities for one InitialData instance."""

    def __init__(self, data: InitialData):
        self.data = data
        self.grid = data.grid
        self.h = data.grid.spacing

    @cached_property
    def gmat(self) -> np.ndarray:
        return self.data.g.mat()

    @cached_property
    def ginv(self) -> np.ndarray:
        return np.linalg.inv(self.gmat)

    @cached_property
    def det(self) -> np.ndarray:
        return np.linalg.det(self.gmat)

    @cached_property
    def sqrt_det(self) -> np.ndarray:
        return np.sqrt(self.det)

    @cached_property
    def dg(self) -> list:
        """dg[a][..., i, j] = d_a g_ij."""
        return [fd.diff(self.gmat, self.h[a], a) for a in range(3)]

    @cached_property
    def christoffel_low_first(self) -> np.ndarray:
        """Gamma^k_ij with the raised index first: (..., k, i, j)."""
        low = np.empty(self.grid.dims + (3, 3, 3))
        for l in range(3):
            for i in range(3):
                for j in range(3):
                    low[..., l, i, j] = 0.5 * (
                        self.dg[i][..., j, l]
                        + self.dg[j][..., i, l]
                        - self.dg[l][..., i, j]
                    )
        self._gamma_low = low
        return np.einsum("...kl,...lij->...kij", self.ginv, low)

    @cached_property
    def ricci(self) -> np.ndarray:
        """Ricci tensor from exact index algebra over direct derivative stencils.

        The divergence-of-Christoffel term is expanded through second
        derivatives of g rather than by re-differencing Gamma, which keeps the
        boundary error at O(h^2).
        """
        gam = self.christoffel_low_first
        low = self._gamma_low
        ginv = self.ginv
        d2g = fd.second_derivative_table(self.gmat, self.h)

        def d2(a, b):
            return d2g[(a, b)] if a <= b else d2g[(b, a)]

        # dginv[a][..., k, l] = d_a g^{kl} = -g^{km} g^{ln} d_a g_mn
        dginv = [
            -np.einsum("...km,...ln,...mn->...kl", ginv, ginv, self.dg[a])
            for a in range(3)
        ]
        logs = np.log(self.sqrt_det)
        d2logs = fd.second_derivative_table(logs, self.h)
        trace_gamma = np.einsum("...kkl->...l", gam)
        quad = np.einsum("...l,...lij->...ij", trace_gamma, gam)
        cross = np.einsum("...kil,...lkj->...ij", gam, gam)

        ric = np.empty(self.grid.dims + (3, 3))
        for i in range(3):
            for j in range(i, 3):
                div_term = np.zeros(self.grid.dims)
                for kk in range(3):
                    for l in range(3):
                        dlow = 0.5 * (
                            d2(kk, i)[..., j, l]
                            + d2(kk, j)[..., i, l]
                            - d2(kk, l)[..., i, j]
                        )
                        div_term += (
                            dginv[kk][..., kk, l] * low[..., l, i, j]
                            + ginv[..., kk, l] * dlow
                        )
                val = (
                    div_term
                    - d2logs[(min(i, j), max(i, j))]
                    + quad[..., i, j]
                    - cross[..., i, j]
                )
                ric[..., i, j] = val
                ric[..., j, i] = val
        return ric

    @cached_property
    def scalar_curvature(self) -> np.ndarray:
        return np.einsum("...ij,...ij->...", self.ginv, self.ricci)

    @cached_property
    def kmat(self) -> np.ndarray:
        return self.data.k.mat()

    @cached_property
    def tr_k(self) -> np.ndarray:
        return np.einsum("...ij,...ij->...", self.ginv, self.kmat)

    @cached_property
    def k_norm2(self) -> np.ndarray:
        kup = np.einsum("...ia,...jb,...ab->...ij", self.ginv, self.ginv, self.kmat)
        return np.einsum("...ij,...ij->...", kup, self.kmat)

    @cached_property
    def pi_mat(self) -> np.ndarray:
        return self.kmat - self.tr_k[..., None, None] * self.gmat

    def raise_index(self, cov: np.ndarray) -> np.ndarray:
        return np.einsum("...ij,...j->...i", self.ginv, cov)

    def lower_index(self, vec: np.ndarray) -> np.ndarray:
        return np.einsum("...ij,...j->...i", self.gmat, vec)

    def norm2_cov(self, cov: np.ndarray) -> np.ndarray:
        return np.einsum("...ij,...i,...j->...", self.ginv, cov, cov)

    def norm2_sym(self, t: np.ndarray) -> np.ndarray:
        """|T|_g^2 for a covariant symmetric 2-tensor given as (..., 3, 3)."""
        tup = np.einsum("...ia,...jb,...ab->...ij", self.ginv, self.ginv, t)
        return np.einsum("...ij,...ij->...", tup, t)


# ---------------------------------------------------------------------------
# derived-quantity operations
# ---------------------------------------------------------------------------

def christoffel(data: InitialData) -> np.ndarray:
    """Levi-Civita connection coefficients, shape dims + (3, 3, 3) as Gamma^k_ij."""
    return data.geometry().christoffel_low_first


def curvature(data: InitialData):
    """Scalar curvature field and Ricci tensor field."""
    geo = data.geometry()
    return (
        ScalarField(data.grid, geo.scalar_curvature),
        SymTensorField.from_mat(data.grid, geo.ricci),
    )


def constraints(data: InitialData) -> ConstraintBundle:
    """Mass density mu = (R + (tr k)^2 - |k|^2)/2, current density J = div_g pi,
    conjugate momentum pi = k - (tr k) g, and the margin mu - |J|_g."""
    geo = data.geometry()
    mu = 0.5 * (geo.scalar_curvature + geo.tr_k**2 - geo.k_norm2)
    pi = geo.pi_mat
    dpi = np.stack([fd.diff(pi, geo.h[a], a) for a in range(3)], axis=-3)
    gam = geo.christoffel_low_first
    # (div pi)_j = g^{ab} (d_a pi_bj - Gamma^c_ab pi_cj - Gamma^c_aj pi_bc)
    J = (
        np.einsum("...ab,...abj->...j", geo.ginv, dpi)
        - np.einsum("...ab,...cab,...cj->...j", geo.ginv, gam, pi)
        - np.einsum("...ab,...caj,...bc->...j", geo.ginv, gam, pi)
    )
    Jn = np.sqrt(np.maximum(geo.norm2_cov(J), 0.0))
    return ConstraintBundle(
        mu=ScalarField(data.grid, mu),
        J=CoVectorField(data.grid, J),
        pi=SymTensorField.from_mat(data.grid, pi),
        dec_margin=ScalarField(data.grid, mu - Jn),
    )


def face_normal_family(data: InitialData, face: Face):
    """Outward g-unit normal of the family of level surfaces x^axis = const.

    Returns (nu_cov, nu_vec) as full-grid fields so that derivatives of nu at
    the face come out one-sided automatically.
    """
    geo = data.geometry()
    a = face.axis
    s = float(face.sign)
    scale = 1.0 / np.sqrt(geo.ginv[..., a, a])
    nu_cov = np.zeros(data.grid.dims + (3,))
    nu_cov[..., a] = s * scale
    nu_vec = s * geo.ginv[..., :, a] * scale[..., None]
    return nu_cov, nu_vec


def _covariant_derivative_covector(data: InitialData, w_cov: np.ndarray) -> np.ndarray:
    """(..., i, j) = nabla_i w_j for a covariant field w."""
    geo = data.geometry()
    dw = np.stack([fd.diff(w_cov, geo.h[a], a) for a in range(3)], axis=-2)
    return dw - np.einsum("...cij,...c->...ij", geo.christoffel_low_first, w_cov)


def face_geometry(data: InitialData, face: Face) -> FaceGeometry:
    """Outward unit normal, second fundamental form Pi(X,Y) = g(grad_X nu, Y),
    mean curvature H = tr Pi, tangential trace of k, and the boundary
    dominant-energy margin H - |pi(., nu)^T| on one face."""
    geo = data.geometry()
    nu_cov, nu_vec = face_normal_family(data, face)
    grad_nu = _covariant_derivative_covector(data, nu_cov)

    idx = face.node_index(data.grid)
    sl = [slice(None)] * 3
    sl[face.axis] = idx
    sl = tuple(sl)

    gm = geo.gmat[sl]
    gi = geo.ginv[sl]
    nv = nu_vec[sl]
    nc = nu_cov[sl]
    dn = grad_nu[sl]
    km = geo.kmat[sl]
    pim = geo.pi_mat[sl]

    # tangential projector P_i^j = delta_i^j - nu_i nu^j
    proj = np.eye(3) - np.einsum("...i,...j->...ij", nc, nv)
    Pi_tan = np.einsum("...ai,...bj,...ab->...ij", proj, proj, dn)
    inv_tan = gi - np.einsum("...i,...j->...ij", nv, nv)
    H = np.einsum("...ij,...ij->...", inv_tan, dn)
    trk = np.einsum("...ij,...ij->...", inv_tan, km)

    pin = np.einsum("...ij,...j->...i", pim, nv)
    pin_tan = np.einsum("...ji,...j->...i", proj, pin)
    pin_norm = np.sqrt(
        np.maximum(np.einsum("...ij,...i,...j->...", gi, pin_tan, pin_tan), 0.0)
    )
    return FaceGeometry(
        face=face,
        nu=nv,
        H=H,
        Pi=Pi_tan,
        tr_face_k=trk,
        boundary_margin=H - pin_norm,
    )


def dihedral_angles(data: InitialData, edge: Edge) -> EdgeAngles:
    """Interior dihedral angle along an edge: pi - arccos g(nu_1, nu_2).

    The unit normals of coordinate faces are algebraic in the metric, so the
    angle needs no differencing; it is evaluated directly at the edge nodes
    and is exactly invariant under metric scaling.
    """
    geo = data.geometry()
    a, sa = edge.face_a.axis, edge.face_a.sign
    b, sb = edge.face_b.axis, edge.face_b.sign
    sl = [slice(None)] * 3
    sl[a] = edge.face_a.node_index(data.grid)
    sl[b] = edge.face_b.node_index(data.grid)
    gi = geo.ginv[tuple(sl)]
    cosn = sa * sb * gi[..., a, b] / np.sqrt(gi[..., a, a] * gi[..., b, b])
    alpha = np.pi - np.arccos(np.clip(cosn, -1.0, 1.0))
    return EdgeAngles(
        edge=edge,
        positions=data.grid.axis_coords(edge.axis),
        alpha=alpha,
    )


def null_expansions(data: InitialData, normal: np.ndarray):
    """Outer/inner null expansions theta_+- = H +- tr_S k for the surface family
    orthogonal to the supplied contravariant g-unit normal field."""
    geo = data.geometry()
    n_cov = geo.lower_index(normal)
    grad_n = _covariant_derivative_covector(data, n_cov)
    inv_tan = geo.ginv - np.einsum("...i,...j->...ij", normal, normal)
    H = np.einsum("...ij,...ij->...", inv_tan, grad_n)
    trk = np.einsum("...ij,...ij->...", inv_tan, geo.kmat)
    return (
        ScalarField(data.grid, H + trk),
        ScalarField(data.grid, H - trk),
    )


# ---------------------------------------------------------------------------
# solution-field helpers shared by solver / levelset / verify
# ---------------------------------------------------------------------------

def gradient_covector(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Nodal partial derivatives du_i, shape dims + (3,)."""
    return np.stack(
        [fd.diff(u, grid.spacing[a], a) for a in range(3)], axis=-1
    )


def gradient_magnitude(data: InitialData, u: np.ndarray):
    geo = data.geometry()
    du = gradient_covector(data.grid, u)
    grad_vec = geo.raise_index(du)
    mag = np.sqrt(np.maximum(np.einsum("...i,...i->...", du, grad_vec), 0.0))
    return du, grad_vec, mag


def hessian_covariant(data: InitialData, u: np.ndarray) -> np.ndarray:
    """nabla nabla u as (..., i, j), from direct second-derivative stencils."""
    geo = data.geometry()
    du = gradient_covector(data.grid, u)
    d2 = fd.second_derivative_table(u, data.grid.spacing)
    hess = np.empty(data.grid.dims + (3, 3))
    for i in range(3):
        for j in range(i, 3):
            hess[..., i, j] = d2[(i, j)]
            hess[..., j, i] = d2[(i, j)]
    hess -= np.einsum("...cij,...c->...ij", geo.christoffel_low_first, du)
    return hess


def laplacian(data: InitialData, u: np.ndarray) -> np.ndarray:
    geo = data.geometry()
    return np.einsum("...ij,...ij->...", geo.ginv, hessian_covariant(data, u))


def covector_curl_sup(grid: Grid, w: np.ndarray) -> float:
    """sup-norm of d_i w_j - d_j w_i (coordinate curl; Christoffels cancel)."""
    dw = np.stack([fd.diff(w, grid.spacing[a], a) for a in range(3)], axis=-2)
    curl = dw - np.swapaxes(dw, -1, -2)
    return float(np.abs(curl).max())


def potential_from_covector(grid: Grid, w: np.ndarray, order=(0, 1, 2)) -> np.ndarray:
    """Line-integrate an (exact) covariant field from the low corner.

    Integration proceeds axis by axis in the given order with trapezoid
    rule; the inverse of order (2,1,0) gives an independent path for
    path-independence checks.  The recovered potential is anchored to 0 at
    the low corner (i.e. determined up to the usual additive constant).
    """
    from scipy.integrate import cumulative_trapezoid

    pot = np.zeros(grid.dims)
    full = [False, False, False]  # axes already swept
    for a in order:
        src = [slice(None) if full[i] else slice(0, 1) for i in range(3)]
        src[a] = slice(None)
        src = tuple(src)
        integ = cumulative_trapezoid(
            w[..., a][src], dx=grid.spacing[a], axis=a, initial=0.0
        )
        base = pot[src].take([0], axis=a)
        pot[src] = base + integ
        full[a] = True
    return pot


# ---------------------------------------------------------------------------
# plain-text field export / import
# ---------------------------------------------------------------------------

def export_field(path, grid: Grid, values: np.ndarray, names):
    """Write a field as one node per line: i j k x y z v...

    ``values`` has shape dims + (ncomp,) or dims for a scalar; ``names``
    labels the value columns in the header.
    """
    vals = np.asarray(values)
    if vals.shape == grid.dims:
        vals = vals[..., None]
    ncomp = vals.shape[-1]
    if isinstance(names, str):
        names = [names]
    if len(names) != ncomp:
        raise ValueError("need one name per component")
    xyz = grid.nodes()
    n1, n2, n3 = grid.dims
    ii, jj, kk = np.meshgrid(
        np.arange(n1), np.arange(n2), np.arange(n3), indexing="ij"
    )
    cols = [ii.ravel(), jj.ravel(), kk.ravel()]
    cols += [xyz[..., a].ravel() for a in range(3)]
    cols += [vals[..., c].ravel() for c in range(ncomp)]
    header = "i j k x y z " + " ".join(names)
    table = np.column_stack(cols)
    fmt = ["%d", "%d", "%d"] + ["%.17e"] * (3 + ncomp)
    np.savetxt(path, table, fmt=fmt, header=header)


def load_field(path, grid: Grid) -> np.ndarray:
    """Read a field written by :func:`export_field`; returns dims + (ncomp,)."""
    raw = np.loadtxt(path)
    if raw.ndim == 1:
        raw = raw[None, :]
    ncomp = raw.shape[1] - 6
    if ncomp < 1 or raw.shape[0] != int(np.prod(grid.dims)):
        raise ValueError("field file does not match grid")
    out = np.empty(grid.dims + (ncomp,))
    idx = (
        raw[:, 0].astype(int),
        raw[:, 1].astype(int),
        raw[:, 2].astype(int),
    )
    for c in range(ncomp):
        out[..., c][idx] = raw[:, 6 + c]
    return out
