"""Running mean of a subspace stream, updated one subspace at a time.

The online rule moves the current mean 1/(n+1) of the way along the geodesic
toward the n+1-th subspace, so each batch costs one decomposition and no
history is kept. The iterative Frechet-mean solver at the bottom is a
verification oracle for that rule, not part of the online path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NoConvergence
from .subspaces import (
    Array,
    Subspace,
    complement,
    evaluate,
    geodesic,
    principal_system,
)


@dataclass(frozen=True, eq=False)
class MeanSubspaceState:
    """Current mean subspace together with how many subspaces it averages."""

    mean: Subspace
    count: int

    def __post_init__(self) -> None:
        if int(self.count) < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        object.__setattr__(self, "count", int(self.count))


def init_mean(first: Subspace) -> MeanSubspaceState:
    """Mean of a single subspace: the subspace itself."""
    return MeanSubspaceState(mean=first, count=1)


def update_mean(state: MeanSubspaceState, new: Subspace) -> MeanSubspaceState:
    """Fold one more subspace into the running mean.

    The updated mean sits at parameter 1/(count+1) on the geodesic from the
    current mean to ``new``, i.e. it moves distance d/(count+1) when ``new``
    is at geodesic distance d. The rule is order-dependent from the third
    subspace on; see :func:`karcher_mean` for the order-free reference.
    """
    if (state.mean.ambient_dim, state.mean.sub_dim) != (new.ambient_dim, new.sub_dim):
        raise DimensionMismatch(
            f"new subspace is ({new.ambient_dim}, {new.sub_dim}), "
            f"mean is ({state.mean.ambient_dim}, {state.mean.sub_dim})"
        )
    new_count = state.count + 1
    flow = geodesic(state.mean, new)
    return MeanSubspaceState(mean=evaluate(flow, 1.0 / new_count), count=new_count)


def log_tangent(base: Subspace, base_complement: Subspace, target: Subspace) -> Array:
    """Tangent d x k matrix at ``base`` whose geodesic reaches ``target`` at t=1."""
    system = principal_system(base, target, base_complement)
    k = base.sub_dim
    direction = base_complement.basis @ system.complement_rot[:, :k]
    return -(direction * system.angles) @ system.a_rot.T


def exp_tangent(base: Subspace, tangent: Array) -> Subspace:
    """Endpoint of the geodesic leaving ``base`` with tangent ``tangent``.

    The tangent must satisfy base^T tangent = 0; its singular values are the
    principal angles travelled.
    """
    t = np.asarray(tangent, dtype=np.float64)
    if t.shape != (base.ambient_dim, base.sub_dim):
        raise DimensionMismatch(f"tangent must be {base.ambient_dim} x {base.sub_dim}, got {t.shape}")
    u, theta, vt = np.linalg.svd(t, full_matrices=False)
    m = base.basis @ ((vt.T * np.cos(theta)) @ vt) + (u * np.sin(theta)) @ vt
    dev = float(np.max(np.abs(m.T @ m - np.eye(base.sub_dim))))
    if dev >= 1e-12:
        q, r = np.linalg.qr(m)
        m = q * np.where(np.diag(r) < 0.0, -1.0, 1.0)
    return Subspace(m)


def karcher_mean(
    subspaces: Sequence[Subspace],
    tol: float = 1e-8,
    max_iter: int = 200,
) -> Subspace:
    """Order-free mean by tangent-space fixed point iteration.

    Repeatedly lifts all subspaces to the tangent space at the current
    estimate, steps to the exponential of the average tangent, and stops when
    the average tangent's Frobenius norm drops below ``tol``. Inputs are
    assumed to sit inside a geodesic ball of radius pi/4 so the mean is
    unique.

    Raises:
        NoConvergence: iteration cap reached before meeting ``tol``.
    """
    if len(subspaces) == 0:
        raise ValueError("need at least one subspace")
    shape = (subspaces[0].ambient_dim, subspaces[0].sub_dim)
    for s in subspaces[1:]:
        if (s.ambient_dim, s.sub_dim) != shape:
            raise DimensionMismatch("subspaces must share ambient and subspace dimensions")
    est = subspaces[0]
    for _ in range(max_iter):
        comp = complement(est)
        mean_tangent = sum(log_tangent(est, comp, s) for s in subspaces) / len(subspaces)
        if float(np.linalg.norm(mean_tangent)) < tol:
            return est
        est = exp_tangent(est, mean_tangent)
    raise NoConvergence(f"tangent mean norm still >= {tol:.0e} after {max_iter} iterations")
