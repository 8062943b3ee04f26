"""First-order eigenvalue corrections for two colliding delta shells.

For a simple eigenvalue ``lambda_0`` of the limit operator with eigenfunction
``psi_0`` the shift is ``lambda_eps = lambda_0 + lambda_0' eps + O(eps^2)``
with::

    lambda_0' = ( a+ Int d+(psi^2) + a- Int d-(psi^2)
                  - Int [a+^2 + a-^2 + (a+ - a-)(d-1) K1] psi^2 ) / Int_{R^d} psi^2

where ``d+`` / ``d-`` differentiate along ``+n`` / ``-n`` from the outer /
inner side of the surface.  For a semisimple eigenvalue the same bilinear
expression on a biorthonormal basis gives a k x k matrix whose eigenvalues
are the k slopes.

Trace convention
----------------
:class:`TraceBundle` stores ``dn_plus`` and ``dn_minus`` as one-sided limits
of the *same* outward derivative ``n . grad psi``, so the interface condition
reads ``dn_plus - dn_minus = (a+ + a-) psi``.  The inner one-sided derivative
along ``-n`` is therefore ``-dn_minus``; the product rule gives
``d+(psi^2) = 2 psi dn_plus`` and ``d-(psi^2) = -2 psi dn_minus``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coupling import Coupling
from .errors import NormalizationError
from .geometry import surface_integral
from .numerics import eigenvalues_small

__all__ = [
    "Coupling",
    "TraceBundle",
    "SlopeMatrix",
    "slope_simple",
    "slope_matrix",
    "pair_numerator",
    "combine_bundles",
]

SELF_PAIRING_FLOOR = 1e-10


@dataclass(frozen=True)
class TraceBundle:
    """Boundary data of one limit eigenfunction on the surface grid."""

    surface: object
    psi0: np.ndarray
    dn_plus: np.ndarray
    dn_minus: np.ndarray
    K1: np.ndarray
    dimension: int
    norm_sq: complex

    def __post_init__(self):
        arrays = {}
        for name in ("psi0", "dn_plus", "dn_minus"):
            arrays[name] = np.asarray(getattr(self, name), dtype=complex)
        K1 = np.asarray(self.K1, dtype=float)
        shapes = {a.shape for a in arrays.values()} | {K1.shape}
        if len(shapes) != 1:
            raise ValueError("trace arrays are not node-aligned")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "K1", K1)
        object.__setattr__(self, "norm_sq", complex(self.norm_sq))
        if self.norm_sq == 0:
            raise NormalizationError("eigenfunction has zero bilinear norm")

    def scaled(self, factor):
        return TraceBundle(self.surface, factor * self.psi0, factor * self.dn_plus,
                           factor * self.dn_minus, self.K1, self.dimension,
                           factor * factor * self.norm_sq)

    def jump_residual(self, coupling):
        """max |dn_plus - dn_minus - (a+ + a-) psi| relative to max |psi|."""
        gap = self.dn_plus - self.dn_minus - coupling.total * self.psi0
        return float(np.max(np.abs(gap)) / np.max(np.abs(self.psi0)))


def pair_numerator(bi, bj, coupling):
    """Bilinear numerator of the slope formula for the pair (psi_i, psi_j)."""
    ap, am = coupling.alpha_plus, coupling.alpha_minus
    d_plus = bi.psi0 * bj.dn_plus + bj.psi0 * bi.dn_plus
    d_minus = -(bi.psi0 * bj.dn_minus + bj.psi0 * bi.dn_minus)
    weight = ap**2 + am**2 + (ap - am) * (bi.dimension - 1) * bi.K1
    integrand = ap * d_plus + am * d_minus - weight * bi.psi0 * bj.psi0
    return surface_integral(bi.surface, integrand)


def slope_simple(bundle, coupling):
    """First-order coefficient lambda_0' for a simple eigenvalue."""
    return pair_numerator(bundle, bundle, coupling) / bundle.norm_sq


@dataclass(frozen=True)
class SlopeMatrix:
    S: np.ndarray
    slopes: np.ndarray
    transform: np.ndarray  # columns: biorthonormal combinations of the inputs


def _bilinear_gram_schmidt(G):
    k = G.shape[0]
    scale = float(np.max(np.abs(np.diag(G))))
    T = np.zeros((k, k), dtype=complex)
    for i in range(k):
        v = np.zeros(k, dtype=complex)
        v[i] = 1.0
        for j in range(i):
            v = v - (T[:, j] @ G @ v) * T[:, j]
        p = v @ G @ v
        if abs(p) <= SELF_PAIRING_FLOOR * scale:
            raise NormalizationError("self-orthogonal combination in the bilinear Gram matrix")
        T[:, i] = v / np.sqrt(p)
    return T


def slope_matrix(bundles, coupling, gram=None):
    """Slope matrix of a semisimple eigenvalue and its eigenvalues.

    Parameters
    ----------
    bundles : sequence of TraceBundle
        A basis of the limit eigenspace.
    gram : (k, k) array, optional
        Bilinear pairings ``Int psi_i psi_j`` over R^d.  Defaults to the
        diagonal of ``norm_sq`` (an already orthogonal basis).
    """
    k = len(bundles)
    if gram is None:
        G = np.diag([b.norm_sq for b in bundles]).astype(complex)
    else:
        G = np.asarray(gram, dtype=complex)
    if G.shape != (k, k):
        raise ValueError("gram matrix shape does not match the number of bundles")
    N = np.array([[pair_numerator(bi, bj, coupling) for bj in bundles] for bi in bundles])
    if np.allclose(G, np.eye(k), rtol=0, atol=1e-8):
        T = np.eye(k, dtype=complex)
        S = N
    elif np.count_nonzero(G - np.diag(np.diag(G))) == 0:
        g = np.diag(G)
        if np.any(np.abs(g) <= SELF_PAIRING_FLOOR * np.max(np.abs(g))):
            raise NormalizationError("zero self-pairing")
        T = np.diag(1.0 / np.sqrt(g))
        S = N * np.outer(np.diag(T), np.diag(T))
        S[np.diag_indices(k)] = np.diag(N) / g
    else:
        T = _bilinear_gram_schmidt(G)
        S = T.T @ N @ T
    return SlopeMatrix(S=S, slopes=eigenvalues_small(S), transform=T)


def combine_bundles(bundles, coeffs, gram=None):
    """Linear combination ``sum_j coeffs[j] psi_j`` of bundles on one surface.

    ``norm_sq`` of the result needs the full Gram matrix; without it the
    inputs are treated as mutually orthogonal.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    first = bundles[0]
    if gram is None:
        gram = np.diag([b.norm_sq for b in bundles])
    norm = complex(coeffs @ np.asarray(gram) @ coeffs)
    return TraceBundle(
        first.surface,
        sum(c * b.psi0 for c, b in zip(coeffs, bundles)),
        sum(c * b.dn_plus for c, b in zip(coeffs, bundles)),
        sum(c * b.dn_minus for c, b in zip(coeffs, bundles)),
        first.K1,
        first.dimension,
        norm,
    )
