"""Parametrized hypersurfaces of the unit sphere with unit normal fields.

Charts are immutable bundles of two callables (embedding and unit normal, both
landing in R^(n+2)) over a closed coordinate box. The catalog covers the three
isoparametric families with at most three distinct principal curvatures:
geodesic spheres, products of spheres, and tubes around the Veronese surface,
plus parallel hypersurfaces of any chart and a perturbed (non-isoparametric)
sphere used to exercise the non-minimal code paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import (
    NumericsError,
    first_derivative,
    gram_schmidt,
    spd_solve,
    symmetric_eigen,
)

__all__ = [
    "ChartError",
    "FocalRadiusError",
    "Box",
    "HypersurfaceChart",
    "ShapeSpectrum",
    "sphere_chart",
    "sphere_chart_with_derivatives",
    "tangent_data",
    "shape_operator",
    "principal_curvatures",
    "round_sphere",
    "product_spheres",
    "cartan_tube",
    "parallel_hypersurface",
    "perturbed_sphere",
    "angle_from_curvature",
]


class ChartError(Exception):
    """Chart construction or evaluation failed."""


class FocalRadiusError(ChartError):
    """Tube radius hits the focal set; pick a different radius."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned closed box of chart coordinates."""

    lows: np.ndarray
    highs: np.ndarray

    @staticmethod
    def cube(n: int, half_width: float, center: float = 0.0) -> "Box":
        return Box(
            lows=np.full(n, center - half_width),
            highs=np.full(n, center + half_width),
        )

    @property
    def dim(self) -> int:
        return len(self.lows)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lows + self.highs)

    def contains(self, p, margin: float = 0.0) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(
            np.all(p >= self.lows + margin) and np.all(p <= self.highs - margin)
        )

    def sample(self, rng: np.random.Generator, margin: float = 0.0) -> np.ndarray:
        return rng.uniform(self.lows + margin, self.highs - margin)


@dataclass(frozen=True)
class HypersurfaceChart:
    """Immersion of a coordinate box into the unit sphere with a unit normal."""

    dim: int
    embed: Callable[[np.ndarray], np.ndarray]
    normal: Callable[[np.ndarray], np.ndarray]
    box: Box
    name: str = ""
    meta: dict = field(default_factory=dict)

    def validate_at(self, p, h: float = 1e-4) -> dict[str, float]:
        """Pointwise invariant residuals (norms, orthogonality, rank)."""
        p = np.asarray(p, dtype=float)
        a = self.embed(p)
        b = self.normal(p)
        e = np.array(
            [first_derivative(self.embed, p, _axis(self.dim, i), h) for i in range(self.dim)]
        )
        sv = np.sqrt(np.maximum(symmetric_eigen(e @ e.T)[0], 0.0))
        normal_tangency = float(np.abs(e @ b).max())
        return {
            "embed_norm": abs(float(a @ a) - 1.0),
            "normal_norm": abs(float(b @ b) - 1.0),
            "orthogonality": abs(float(a @ b)),
            "normal_tangency": normal_tangency,
            "min_singular_value": float(sv[0]),
        }

    def require_valid_at(self, p, h: float = 1e-4, tol: float = 1e-8) -> None:
        res = self.validate_at(p, h)
        worst = max(v for k, v in res.items() if k != "min_singular_value")
        if worst > tol or res["min_singular_value"] <= 1e-6:
            raise ChartError(f"chart '{self.name}' invalid at {p}: {res}")


def _axis(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


# ---------------------------------------------------------------------------
# spherical coordinate charts
# ---------------------------------------------------------------------------

def sphere_chart(m: int, q: np.ndarray) -> np.ndarray:
    """Recursive angular chart of the unit m-sphere in R^(m+1).

    sigma_1(t) = (cos t, sin t); sigma_m = (cos(q_m) sigma_{m-1}, sin(q_m)).
    Full rank as long as every latitude coordinate stays away from +-pi/2.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    out = np.array([np.cos(q[0]), np.sin(q[0])])
    for j in range(1, m):
        out = np.concatenate([np.cos(q[j]) * out, [np.sin(q[j])]])
    return out


def sphere_chart_with_derivatives(m: int, q: np.ndarray):
    """sigma_m together with its analytic first derivatives (m, m+1)."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    sigma = np.array([np.cos(q[0]), np.sin(q[0])])
    deriv = [np.array([-np.sin(q[0]), np.cos(q[0])])]
    for j in range(1, m):
        c, s = np.cos(q[j]), np.sin(q[j])
        deriv = [np.concatenate([c * d, [0.0]]) for d in deriv]
        deriv.append(np.concatenate([-s * sigma, [c]]))
        sigma = np.concatenate([c * sigma, [s]])
    return sigma, np.array(deriv)


def _sphere2_jet(q: np.ndarray):
    """sigma_2 with analytic first and second derivatives (for the Veronese map)."""
    q1, q2 = float(q[0]), float(q[1])
    c1, s1, c2, s2 = np.cos(q1), np.sin(q1), np.cos(q2), np.sin(q2)
    sigma = np.array([c1 * c2, s1 * c2, s2])
    d = np.array([[-s1 * c2, c1 * c2, 0.0], [-c1 * s2, -s1 * s2, c2]])
    dd = np.empty((2, 2, 3))
    dd[0, 0] = [-c1 * c2, -s1 * c2, 0.0]
    dd[0, 1] = [s1 * s2, -c1 * s2, 0.0]
    dd[1, 0] = dd[0, 1]
    dd[1, 1] = [-c1 * c2, -s1 * c2, -s2]
    return sigma, d, dd


# ---------------------------------------------------------------------------
# shape operator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShapeSpectrum:
    """Principal curvatures (descending) with their principal directions.

    directions_chart[k] is the coordinate velocity of the k-th unit principal
    direction; directions_ambient[k] its image in R^(n+2).
    """

    lambdas: np.ndarray
    directions_chart: np.ndarray
    directions_ambient: np.ndarray
    asymmetry: float


def tangent_data(chart: HypersurfaceChart, p, h: float):
    """Coordinate tangents, an orthonormal tangent frame and its velocities."""
    p = np.asarray(p, dtype=float)
    n = chart.dim
    e = np.array(
        [first_derivative(chart.embed, p, _axis(n, i), h) for i in range(n)]
    )
    gram = e @ e.T
    spectrum, _ = symmetric_eigen(gram)
    if spectrum[0] <= 1e-12:
        raise ChartError(
            f"chart '{chart.name}' has rank-deficient differential at {p} "
            f"(Gram spectrum {spectrum})"
        )
    t = gram_schmidt(e)
    # velocities: rows m with m @ e = t
    m = spd_solve(gram, e @ t.T).T
    return e, t, m


def shape_operator(chart: HypersurfaceChart, p, h: float = 1e-4) -> np.ndarray:
    """Matrix of the shape operator in an orthonormal tangent frame at p.

    Realized as S X = -(derivative of the normal along X), projected onto the
    tangent plane; the result is symmetrized, with the defect checked.
    """
    s, _ = _shape_data(chart, p, h)
    return s


def _shape_data(chart: HypersurfaceChart, p, h: float):
    p = np.asarray(p, dtype=float)
    n = chart.dim
    e, t, m = tangent_data(chart, p, h)
    db = np.array(
        [first_derivative(chart.normal, p, _axis(n, i), h) for i in range(n)]
    )
    # -<d_b(T_j), T_k> with d along the frame velocities
    raw = -(m @ db) @ t.T
    defect = float(np.abs(raw - raw.T).max())
    if defect > 1e-4:
        raise ChartError(
            f"shape operator asymmetry {defect:.2e} at {p} on chart "
            f"'{chart.name}' (bad step size or broken normal)"
        )
    s = 0.5 * (raw + raw.T)
    return s, {"asymmetry": defect, "frame": t, "velocities": m}


def principal_curvatures(
    chart: HypersurfaceChart, p, h: float = 1e-4
) -> ShapeSpectrum:
    """Eigendecomposition of the shape operator, curvatures descending."""
    s, info = _shape_data(chart, p, h)
    w, v = symmetric_eigen(s)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    t, m = info["frame"], info["velocities"]
    directions_chart = (v.T @ m)
    directions_ambient = v.T @ t
    return ShapeSpectrum(
        lambdas=w,
        directions_chart=directions_chart,
        directions_ambient=directions_ambient,
        asymmetry=info["asymmetry"],
    )


def angle_from_curvature(lam: float) -> float:
    """The angle in (0, pi] whose cotangent is lam."""
    return float(np.arctan2(1.0, lam))


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def round_sphere(n: int, r: float) -> HypersurfaceChart:
    """Geodesic n-sphere of Euclidean radius r inside the unit (n+1)-sphere.

    All principal curvatures equal sqrt(1 - r^2) / r for the inward normal;
    r = 1 is the totally geodesic equator.
    """
    if not 0.0 < r <= 1.0:
        raise ChartError(f"sphere radius must lie in (0, 1], got {r}")
    c = np.sqrt(max(0.0, 1.0 - r * r))

    def embed(q):
        return np.concatenate([r * sphere_chart(n, q), [c]])

    def normal(q):
        return np.concatenate([-c * sphere_chart(n, q), [r]])

    return HypersurfaceChart(
        dim=n,
        embed=embed,
        normal=normal,
        box=Box.cube(n, 0.45),
        name="sphere",
        meta={"r": r, "isoparametric": True, "distinct": 1},
    )


def product_spheres(k: int, n: int, r1: float, r2: float | None = None) -> HypersurfaceChart:
    """Product of a k-sphere and an (n-k)-sphere inside the unit (n+1)-sphere.

    Principal curvatures are r2/r1 (k times) and -r1/r2 (n-k times).
    """
    if not 1 <= k <= n - 1:
        raise ChartError(f"need 1 <= k <= n-1, got k={k}, n={n}")
    if r2 is None:
        if not 0.0 < r1 < 1.0:
            raise ChartError(f"first radius must lie in (0, 1), got {r1}")
        r2 = float(np.sqrt(1.0 - r1 * r1))
    if abs(r1 * r1 + r2 * r2 - 1.0) > 1e-12:
        raise ChartError(f"radii must satisfy r1^2 + r2^2 = 1, got {r1}, {r2}")

    def embed(q):
        return np.concatenate(
            [r1 * sphere_chart(k, q[:k]), r2 * sphere_chart(n - k, q[k:])]
        )

    def normal(q):
        return np.concatenate(
            [-r2 * sphere_chart(k, q[:k]), r1 * sphere_chart(n - k, q[k:])]
        )

    return HypersurfaceChart(
        dim=n,
        embed=embed,
        normal=normal,
        box=Box.cube(n, 0.45),
        name="product",
        meta={"k": k, "r1": r1, "r2": r2, "isoparametric": True, "distinct": 2},
    )


# quadratic forms of the degree-2 spherical-harmonic (Veronese) embedding,
# scaled so the image lies in the unit 4-sphere
_VERONESE_FORMS = np.sqrt(3.0) * np.array(
    [
        [[0.0, 0.5, 0.0], [0.5, 0.0, 0.0], [0.0, 0.0, 0.0]],
        [[0.0, 0.0, 0.5], [0.0, 0.0, 0.0], [0.5, 0.0, 0.0]],
        [[0.0, 0.0, 0.0], [0.0, 0.0, 0.5], [0.0, 0.5, 0.0]],
        [[0.5, 0.0, 0.0], [0.0, -0.5, 0.0], [0.0, 0.0, 0.0]],
    ]
)
_VERONESE_FORMS = np.concatenate(
    [
        _VERONESE_FORMS,
        [np.diag([0.5, 0.5, -1.0])],
    ]
)


def _veronese_frame(q: np.ndarray):
    """Veronese point with an orthonormal frame of its normal plane in S^4.

    The normal plane is spanned by second-derivative directions projected off
    the tangent plane; the projected vectors stay bounded away from zero on
    the chart boxes used here, so the frame varies smoothly with q.
    """
    sigma, d, dd = _sphere2_jet(q)
    forms = _VERONESE_FORMS
    v = np.einsum("i,aij,j->a", sigma, forms, sigma)
    dv = 2.0 * np.einsum("i,aij,bj->ba", sigma, forms, d)
    ddv = 2.0 * np.einsum("bi,aij,cj->bca", d, forms, d) + 2.0 * np.einsum(
        "i,aij,bcj->bca", sigma, forms, dd
    )
    t = gram_schmidt([dv[0], dv[1]])
    basis = np.vstack([v, t])

    def project(w):
        return w - basis.T @ (basis @ w)

    w1 = project(ddv[0, 0])
    n1 = np.linalg.norm(w1)
    if n1 < 1e-8:
        raise ChartError(f"degenerate normal frame for the Veronese surface at {q}")
    xi1 = w1 / n1
    w2 = project(ddv[0, 1])
    w2 = w2 - (w2 @ xi1) * xi1
    n2 = np.linalg.norm(w2)
    if n2 < 1e-8:
        w2 = project(ddv[1, 1])
        w2 = w2 - (w2 @ xi1) * xi1
        n2 = np.linalg.norm(w2)
        if n2 < 1e-8:
            raise ChartError(f"degenerate normal frame for the Veronese surface at {q}")
    xi2 = w2 / n2
    return v, xi1, xi2


def cartan_tube(t: float = 0.35) -> HypersurfaceChart:
    """Tube of radius t around the Veronese surface in the unit 4-sphere.

    This is the three-dimensional isoparametric family with three distinct
    principal curvatures; coordinates are (two Veronese chart angles, one
    normal-circle angle).
    """

    def embed(x):
        v, xi1, xi2 = _veronese_frame(x[:2])
        xi = np.cos(x[2]) * xi1 + np.sin(x[2]) * xi2
        return np.cos(t) * v + np.sin(t) * xi

    def normal(x):
        v, xi1, xi2 = _veronese_frame(x[:2])
        xi = np.cos(x[2]) * xi1 + np.sin(x[2]) * xi2
        return -np.sin(t) * v + np.cos(t) * xi

    chart = HypersurfaceChart(
        dim=3,
        embed=embed,
        normal=normal,
        box=Box(lows=np.array([-0.35, -0.35, -0.6]), highs=np.array([0.35, 0.35, 0.6])),
        name="cartan",
        meta={"t": t, "isoparametric": True, "distinct": 3},
    )
    try:
        spec = principal_curvatures(chart, chart.box.center, 1e-4)
    except (ChartError, NumericsError) as exc:
        raise FocalRadiusError(
            f"tube radius {t} is focal or nearly focal; choose a radius away "
            f"from multiples of pi/3 ({exc})"
        ) from exc
    if np.abs(spec.lambdas).max() > 1e5:
        raise FocalRadiusError(
            f"tube radius {t} is nearly focal (principal curvature "
            f"{spec.lambdas}); choose a radius away from multiples of pi/3"
        )
    return chart


def parallel_hypersurface(chart: HypersurfaceChart, t: float) -> HypersurfaceChart:
    """Parallel hypersurface at oriented distance t along the normal.

    Shares the Gauss map of the input chart; each principal curvature moves by
    lam -> cot(arccot(lam) + t).
    """

    def embed(q):
        return np.cos(t) * chart.embed(q) - np.sin(t) * chart.normal(q)

    def normal(q):
        return np.sin(t) * chart.embed(q) + np.cos(t) * chart.normal(q)

    out = HypersurfaceChart(
        dim=chart.dim,
        embed=embed,
        normal=normal,
        box=chart.box,
        name=f"{chart.name}-parallel",
        meta={**chart.meta, "parallel_offset": t},
    )
    e, _, _ = tangent_data(out, out.box.center, 1e-4)
    sv = np.sqrt(max(symmetric_eigen(e @ e.T)[0][0], 0.0))
    if sv <= 1e-6:
        raise ChartError(
            f"parallel offset {t} degenerates the immersion (singular value {sv:.2e})"
        )
    return out


def perturbed_sphere(n: int = 2, rho0: float = 0.9, eps: float = 0.08) -> HypersurfaceChart:
    """Radial graph over a geodesic sphere; non-isoparametric test surface.

    The height function rho(q) = rho0 + eps * sin(1.3 q1 + 0.4) cos(0.9 q2 - 0.2)
    yields genuinely varying principal curvatures and a non-minimal Gauss map.
    """
    if n != 2:
        raise ChartError("perturbed sphere is implemented for n = 2 only")

    def rho_jet(q):
        a = 1.3 * q[0] + 0.4
        b = 0.9 * q[1] - 0.2
        rho = rho0 + eps * np.sin(a) * np.cos(b)
        grad = np.array(
            [1.3 * eps * np.cos(a) * np.cos(b), -0.9 * eps * np.sin(a) * np.sin(b)]
        )
        return rho, grad

    def embed(q):
        rho, _ = rho_jet(q)
        return np.concatenate([np.sin(rho) * sphere_chart(n, q), [np.cos(rho)]])

    def normal(q):
        rho, grad = rho_jet(q)
        sigma, dsigma = sphere_chart_with_derivatives(n, q)
        sr, cr = np.sin(rho), np.cos(rho)
        tangents = np.array(
            [
                np.concatenate([cr * grad[i] * sigma + sr * dsigma[i], [-sr * grad[i]]])
                for i in range(n)
            ]
        )
        v = np.concatenate([cr * sigma, [-sr]])
        gram = tangents @ tangents.T
        coeff = spd_solve(gram, grad)
        b = v - coeff @ tangents
        return b / np.linalg.norm(b)

    return HypersurfaceChart(
        dim=n,
        embed=embed,
        normal=normal,
        box=Box.cube(n, 0.4),
        name="perturbed",
        meta={"rho0": rho0, "eps": eps, "isoparametric": False},
    )
