"""Convex-analysis kernel: Legendre transforms, convex hulls, Hopf-Lax steps.

These are the building blocks of the time-discrete sweep.  The potential on
each interval is propagated by an inf-convolution with the quadratic kernel
d_per(x,y)^2/(2 dt) (Hopf-Lax), and at each interior time the potential is
"kicked" and re-convexified through the lifted representation

    PHI(x) = tau * phi(x) + |x|^2/2,

which is extended off the fundamental domain by the equivariance
PHI(x + m) = PHI(x) + m.x + |m|^2/2 for integer shifts m.  Convexification is
the lower convex envelope of the sampled points, evaluated exactly at the
nodes (monotone-chain in 1-D, lower hull facets via Qhull in 2-D), which is
the double Legendre transform with an unrestricted dual variable.

The discrete Legendre transform itself, f*(y) = max over nodes x of
(x.y - f(x)), is exposed with an explicit dual grid for the dual-side checks.

Discrete argmin/argmax ties are broken toward the smallest node index so that
runs are bit-reproducible.
"""

from __future__ import annotations

import numpy as np

from .grid import GridError, ScalarField

__all__ = [
    "legendre_transform",
    "convex_hull",
    "lower_convex_envelope_1d",
    "hopf_lax_step",
    "fd_laplacian",
    "periodic_sq_dist_kernel",
    "unwrap_lift",
    "convexify_lifted_potential",
]


# ---------------------------------------------------------------------------
# Legendre transform and convex hulls
# ---------------------------------------------------------------------------

def legendre_transform(f: np.ndarray, xs, ys=None) -> np.ndarray:
    """Discrete Legendre transform f*(y) = max_x (x.y - f(x)) over node x.

    Parameters
    ----------
    f : array of shape (m1, ..., md)
        Samples of f on the tensor grid given by ``xs``.
    xs : sequence of d 1-D coordinate arrays (primal nodes per axis).
    ys : sequence of d 1-D coordinate arrays (dual nodes per axis);
        defaults to ``xs`` (transform sampled at the shared nodes).

    The transform is separable, so it is computed by d successive 1-D passes.
    """
    f = np.asarray(f, dtype=float)
    xs = [np.asarray(x, dtype=float) for x in xs]
    if ys is None:
        ys = xs
    else:
        ys = [np.asarray(y, dtype=float) for y in ys]
    if f.ndim != len(xs) or len(xs) != len(ys):
        raise GridError("legendre_transform: dimension mismatch")
    # g starts as -f; each pass computes max over one axis of (x*y + g).
    g = -f
    for ax in range(f.ndim):
        g = np.moveaxis(g, ax, 0)
        outer = ys[ax][:, None] * xs[ax][None, :]  # (my, mx)
        rest = g.reshape(g.shape[0], -1)
        g = np.max(outer[:, :, None] + rest[None, :, :], axis=1)
        g = g.reshape((len(ys[ax]),) + rest.shape[1:] if False else (len(ys[ax]),) + tuple(np.moveaxis(-f, ax, 0).shape[1:]))
        g = np.moveaxis(g, 0, ax)
        # after this pass, axis `ax` is indexed by ys[ax]
        xs = xs.copy()
        xs[ax] = ys[ax]
    return g


def lower_convex_envelope_1d(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Exact lower convex envelope of the points (x_j, f_j) at the nodes x_j.

    Equals the double Legendre transform f** evaluated at the nodes.  Uses the
    monotone-chain scan; x must be strictly increasing.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    m = len(x)
    hull = [0]
    for j in range(1, m):
        # pop while the last hull vertex lies above the chord (non-convex turn)
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # keep b only if it is strictly below the chord a--j
            if (f[b] - f[a]) * (x[j] - x[a]) <= (f[j] - f[a]) * (x[b] - x[a]):
                break
            hull.pop()
        hull.append(j)
    out = np.empty(m)
    hi = np.asarray(hull)
    fi = f[hi]
    xi = x[hi]
    seg = np.searchsorted(xi, x, side="right") - 1
    seg = np.clip(seg, 0, len(hi) - 2)
    x0, x1 = xi[seg], xi[seg + 1]
    f0, f1 = fi[seg], fi[seg + 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(x1 > x0, (x - x0) / (x1 - x0), 0.0)
    out = f0 + t * (f1 - f0)
    out[hi] = fi  # vertices exactly
    return np.minimum(out, f)


def _lower_envelope_2d(xs, f: np.ndarray) -> np.ndarray:
    """Lower convex envelope of graph points ((x1,x2), f) at the nodes (d=2)."""
    from scipy.spatial import ConvexHull, QhullError

    X, Y = np.meshgrid(xs[0], xs[1], indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel(), f.ravel()])
    # affine data has a flat hull; it is its own envelope
    A = np.column_stack([pts[:, 0], pts[:, 1], np.ones(len(pts))])
    coef, res, _, _ = np.linalg.lstsq(A, pts[:, 2], rcond=None)
    fit = A @ coef
    if np.max(np.abs(fit - pts[:, 2])) < 1e-13 * max(1.0, np.max(np.abs(f))):
        return f.copy()
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:  # degenerate cloud that is not affine
        raise GridError(f"convex hull failed on degenerate data: {exc}") from exc
    eqs = hull.equations  # a.x + b <= 0 on the hull
    lower = eqs[eqs[:, 2] < -1e-12]
    # envelope(x) = max over lower facets of the facet plane value
    out = np.full(f.size, -np.inf)
    xy = pts[:, :2]
    block = max(1, int(2**22 // max(1, f.size)))
    for start in range(0, len(lower), block):
        e = lower[start:start + block]
        # plane: z = -(a1 x + a2 y + b)/a3 with a3 < 0
        vals = -(xy @ e[:, :2].T + e[None, :, 3]) / e[None, :, 2]
        out = np.maximum(out, vals.max(axis=1))
    out = out.reshape(f.shape)
    return np.minimum(out, f)


def convex_hull(f: np.ndarray, xs) -> np.ndarray:
    """Lower convex envelope f** of sampled data, exact at the nodes.

    f** <= f pointwise, idempotent, and equal to f wherever f is already
    convex.  Supports d in {1, 2}.
    """
    f = np.asarray(f, dtype=float)
    xs = [np.asarray(x, dtype=float) for x in xs]
    if f.ndim == 1:
        return lower_convex_envelope_1d(xs[0], f)
    if f.ndim == 2:
        return _lower_envelope_2d(xs, f)
    raise GridError(f"convex_hull supports d in {{1,2}}, got d={f.ndim}")


# ---------------------------------------------------------------------------
# Lifted potentials
# ---------------------------------------------------------------------------

def unwrap_lift(phi: np.ndarray, tau: float, grid, periods: int = 1):
    """Extend PHI = tau*phi + |x|^2/2 over ``periods`` extra periods per side.

    Returns (values, coords) where coords are the per-axis unwrapped node
    coordinates.  Uses PHI(x + m) = PHI(x) + m.x + |m|^2/2 axis by axis.
    """
    n = grid.points_per_axis
    base = grid.axis_coords()
    ext = np.concatenate([base + m for m in range(-periods, periods + 1)])
    vals = np.asarray(phi, dtype=float) * tau
    for ax in range(grid.dim):
        vals = np.concatenate([vals] * (2 * periods + 1), axis=ax)
    # add the quadratic part on the unwrapped coordinates
    mesh = np.meshgrid(*([ext] * grid.dim), indexing="ij")
    q = sum(c * c for c in mesh) * 0.5
    return vals + q, [ext] * grid.dim


def convexify_lifted_potential(phi: np.ndarray, tau: float, grid,
                               periods: int = 1) -> np.ndarray:
    """Replace phi by (PHI** - |x|^2/2)/tau with PHI = tau*phi + |x|^2/2.

    The hull is taken on the unwrapped domain and read back on the central
    period.  Output <= input pointwise (hulls only lower values).
    """
    vals, coords = unwrap_lift(phi, tau, grid, periods)
    hull = convex_hull(vals, coords)
    n = grid.points_per_axis
    sl = tuple(slice(periods * n, (periods + 1) * n) for _ in range(grid.dim))
    mid = hull[sl]
    mesh = grid.coords()
    q = sum(c * c for c in mesh) * 0.5
    out = (mid - q) / tau
    return np.minimum(out, np.asarray(phi, dtype=float))


# ---------------------------------------------------------------------------
# Hopf-Lax (inf / sup convolution with the periodic quadratic kernel)
# ---------------------------------------------------------------------------

def periodic_sq_dist_kernel(n: int, dt: float) -> np.ndarray:
    """Kernel K[a,b] = d_per(a/n, b/n)^2 / (2 dt) on one axis."""
    x = np.arange(n) / n
    d = np.abs(x[:, None] - x[None, :])
    d = np.minimum(d, 1.0 - d)
    return d * d / (2.0 * dt)


def _axis_min_plus(values: np.ndarray, kernel: np.ndarray, axis: int,
                   want_arg: bool = False):
    """out[..., a, ...] = min_b kernel[a,b] + values[..., b, ...]."""
    v = np.moveaxis(values, axis, 0)
    shape = v.shape
    flat = v.reshape(shape[0], -1)
    stack = kernel[:, :, None] + flat[None, :, :]
    if want_arg:
        arg = np.argmin(stack, axis=1)
        out = np.take_along_axis(stack, arg[:, None, :], axis=1)[:, 0, :]
    else:
        arg = None
        out = np.min(stack, axis=1)
    out = np.moveaxis(out.reshape(shape), 0, axis)
    if want_arg:
        arg = np.moveaxis(arg.reshape(shape), 0, axis)
        return out, arg
    return out


def hopf_lax_step(phi: ScalarField, dt: float, direction: str = "forward") -> ScalarField:
    """One viscosity propagation step over a time increment dt.

    forward:  out(x) = min_y phi(y) + d_per(x,y)^2/(2 dt)   (inf-convolution)
    backward: out(x) = max_y phi(y) - d_per(x,y)^2/(2 dt)   (sup-convolution)

    The minimum runs over grid nodes, with the periodic distance taken to the
    nearest image per axis; the quadratic kernel makes the d-dimensional
    convolution exact as a sequence of per-axis passes.
    """
    if dt <= 0:
        raise GridError(f"hopf_lax_step needs dt > 0, got {dt}")
    if direction not in ("forward", "backward"):
        raise GridError(f"unknown direction {direction!r}")
    grid = phi.grid
    K = periodic_sq_dist_kernel(grid.points_per_axis, dt)
    v = phi.values if direction == "forward" else -phi.values
    for ax in range(grid.dim):
        v = _axis_min_plus(v, K, ax)
    if direction == "backward":
        v = -v
    return ScalarField(grid, v)


# ---------------------------------------------------------------------------
# Finite-difference Laplacians (sphere / ball averages)
# ---------------------------------------------------------------------------

def _offsets_within(grid, h_ball: float, variant: str) -> np.ndarray:
    h = grid.spacing
    r = int(np.floor(h_ball / h + 1e-12))
    axes = [np.arange(-r, r + 1)] * grid.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    offs = np.stack([m.ravel() for m in mesh], axis=1)
    dist = np.sqrt(np.sum((offs * h) ** 2, axis=1))
    if variant == "ball":
        keep = (dist <= h_ball + 1e-12) & (dist > 0)
    else:  # sphere: shell of thickness h around the radius
        keep = (dist > h_ball - 0.5 * h) & (dist <= h_ball + 0.5 * h + 1e-12)
    offs = offs[keep]
    if len(offs) == 0:
        raise GridError(f"no grid offsets in the {variant} of radius {h_ball}")
    return offs


def fd_laplacian(f: ScalarField, h_ball: float, variant: str = "ball") -> ScalarField:
    """Average-based discrete Laplacian over a sphere shell or a ball.

    out(x) = C * [ mean of f over grid nodes in the sphere/ball around x
                   - f(x) ]

    with C = 2 d / mean(|offset|^2), which makes the operator exact on
    quadratics (the grid offset sets are symmetric under per-axis sign flips
    and coordinate permutations, so mixed second-order terms cancel).
    """
    if variant not in ("sphere", "ball"):
        raise GridError(f"unknown fd_laplacian variant {variant!r}")
    grid = f.grid
    if h_ball < grid.spacing - 1e-15:
        raise GridError(
            f"h_ball = {h_ball} is below the grid spacing {grid.spacing}")
    offs = _offsets_within(grid, h_ball, variant)
    h = grid.spacing
    mean_sq = float(np.mean(np.sum((offs * h) ** 2, axis=1)))
    C = 2.0 * grid.dim / mean_sq
    acc = np.zeros(grid.shape)
    for o in offs:
        acc += np.roll(f.values, shift=tuple(-o), axis=tuple(range(grid.dim)))
    avg = acc / len(offs)
    return ScalarField(grid, C * (avg - f.values))
