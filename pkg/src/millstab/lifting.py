"""Period lifting of the discrete structure and force, and the closed loop.

Stacking all m samples of one tooth-passing angle turns the periodic
sampled-data loop into a shift-invariant system whose period map (monodromy
matrix) has the minimal dimension r*(2n + m): the structural state plus one
period of outputs, with the per-sample force states eliminated.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import dgecon

from .cutting_force import PeriodicCoefficients
from .errors import ConditioningError, DomainError
from .structural import DiscreteModel

RCOND_FLOOR = 1e-14


class LiftedModel:
    """One-period lift of a discrete structural model.

    ``A_L = A_d^m``; ``B_L`` collects the reachability terms
    ``[A_d^{m-1} B_d ... B_d]``; ``C_L`` stacks ``C_d A_d^k``; ``D_L`` is the
    block lower-triangular impulse-response (Markov) matrix of the m samples.
    """

    def __init__(self, A_L, B_L, C_L, D_L, steps: int):
        self.A_L = A_L
        self.B_L = B_L
        self.C_L = C_L
        self.D_L = D_L
        self.steps = steps

    @property
    def state_dim(self) -> int:
        return self.A_L.shape[0]

    @property
    def output_dim(self) -> int:
        return self.C_L.shape[0]


class LiftedForce:
    """One-period stack of the sampled cutting-force law."""

    def __init__(self, r_bar, S_blocks, s_bar, steps: int, axes: int):
        self.r_bar = r_bar  # (m*r,)
        self.S_blocks = S_blocks  # (m, r, r)
        self.s_bar = s_bar  # (m*r,)
        self.steps = steps
        self.axes = axes

    @property
    def S_bar(self) -> np.ndarray:
        """Dense block-diagonal directional matrix."""
        m, r = self.steps, self.axes
        out = np.zeros((m * r, m * r))
        for k in range(m):
            out[k * r : (k + 1) * r, k * r : (k + 1) * r] = self.S_blocks[k]
        return out


class ClosedLoopSystem:
    """Monodromy matrix and forcing of the lifted regenerative loop.

    The state stacks the structural state at the period boundary and the
    previous period's outputs: ``[p_K; dz_{K-1}]``.
    """

    def __init__(self, Phi, sigma, state_dim: int, output_dim: int):
        self.Phi = Phi
        self.sigma = sigma
        self.state_dim = state_dim  # 2nr structural states
        self.output_dim = output_dim  # rm stacked outputs

    @property
    def dim(self) -> int:
        return self.Phi.shape[0]


def lift_structure(d: DiscreteModel, steps: int) -> LiftedModel:
    """Lift a discrete model over ``steps`` samples into one period map."""
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    m = steps
    A_d, B_d, C_d, D_d = d.A_d, d.B_d, d.C_d, d.D_d
    dim = d.state_dim
    r_out, r_in = C_d.shape[0], B_d.shape[1]

    # reach[k] = A_d^k B_d and obs[k] = C_d A_d^k, built incrementally
    reach = np.empty((m, dim, r_in))
    obs = np.empty((m, r_out, dim))
    reach[0] = B_d
    obs[0] = C_d
    for k in range(1, m):
        reach[k] = A_d @ reach[k - 1]
        obs[k] = obs[k - 1] @ A_d
    A_L = np.linalg.matrix_power(A_d, m)
    B_L = np.concatenate(list(reach[::-1]), axis=1)
    C_L = np.concatenate(list(obs), axis=0)

    # Markov parameters G_l = C_d A_d^l B_d fill the strict lower triangle
    markov = obs[: m - 1] @ B_d if m >= 2 else np.empty((0, r_out, r_in))
    blocks = np.zeros((m, m, r_out, r_in))
    ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    lag = ii - jj - 1
    below = lag >= 0
    if m >= 2:
        blocks[below] = markov[lag[below]]
    blocks[np.arange(m), np.arange(m)] = D_d
    D_L = blocks.transpose(0, 2, 1, 3).reshape(m * r_out, m * r_in)
    return LiftedModel(A_L=A_L, B_L=B_L, C_L=C_L, D_L=D_L, steps=m)


def lift_force(coeffs: PeriodicCoefficients, feed: np.ndarray) -> LiftedForce:
    """Stack one period of force coefficients and the repeated feed vector."""
    feed = np.asarray(feed, dtype=float)
    r = coeffs.axes
    if feed.shape != (r,):
        raise DomainError(f"feed must have shape ({r},), got {feed.shape}")
    m = coeffs.steps
    return LiftedForce(
        r_bar=coeffs.edge_terms.reshape(m * r).copy(),
        S_blocks=coeffs.directional_terms.copy(),
        s_bar=np.tile(feed, m),
        steps=m,
        axes=r,
    )


def _scale_block_rows(S_blocks: np.ndarray, M: np.ndarray) -> np.ndarray:
    """S_bar @ M without materializing the block-diagonal S_bar."""
    m, r, _ = S_blocks.shape
    return np.einsum("kij,kjl->kil", S_blocks, M.reshape(m, r, -1)).reshape(M.shape)


def _scale_block_cols(M: np.ndarray, S_blocks: np.ndarray) -> np.ndarray:
    """M @ S_bar without materializing the block-diagonal S_bar."""
    m, r, _ = S_blocks.shape
    stacked = M.reshape(-1, m, r).transpose(1, 0, 2)  # (m, rows, r)
    out = np.einsum("kli,kij->klj", stacked, S_blocks)
    return out.transpose(1, 0, 2).reshape(M.shape)


def _apply_blocks(S_blocks: np.ndarray, v: np.ndarray) -> np.ndarray:
    m, r, _ = S_blocks.shape
    return np.einsum("kij,kj->ki", S_blocks, v.reshape(m, r)).reshape(m * r)


def assemble_closed_loop(lm: LiftedModel, lf: LiftedForce, axial_depth: float) -> ClosedLoopSystem:
    """Close the regenerative feedback between lifted structure and force.

    Both inverse factors are solves against small identity perturbations and
    are carried out through one LU factorization each, never by explicit
    inversion.
    """
    if lm.steps != lf.steps:
        raise DomainError(f"step mismatch: lifted model {lm.steps}, force {lf.steps}")
    if lm.B_L.shape[1] != lf.steps * lf.axes:
        raise DomainError("lifted model input width does not match the force stack")
    ap = float(axial_depth)
    dim = lm.state_dim
    width = lm.output_dim
    S = lf.S_blocks
    forcing = lf.r_bar - _apply_blocks(S, lf.s_bar)  # r_bar - S_bar s_bar

    if ap == 0.0:
        Phi = np.zeros((dim + width, dim + width))
        Phi[:dim, :dim] = lm.A_L
        Phi[dim:, :dim] = lm.C_L
        return ClosedLoopSystem(Phi=Phi, sigma=np.zeros(dim + width), state_dim=dim, output_dim=width)

    SD = _scale_block_rows(S, lm.D_L)
    T1 = np.eye(width) + ap * SD
    anorm = np.linalg.norm(T1, 1)
    try:
        with warnings.catch_warnings():
            # exact singularity is caught below through the condition estimate
            warnings.simplefilter("ignore", LinAlgWarning)
            lu1 = lu_factor(T1)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(
            f"feedback solve singular at axial_depth={ap}", ap, 0.0
        ) from exc
    rcond, _ = dgecon(lu1[0], anorm, norm="1")
    if rcond < RCOND_FLOOR:
        raise ConditioningError(
            f"feedback solve too ill-conditioned at axial_depth={ap} (rcond={rcond:.2e})",
            ap,
            float(rcond),
        )

    SC = _scale_block_rows(S, lm.C_L)
    X1 = lu_solve(lu1, SC)  # (I + ap S D)^-1 S C_L
    xv = lu_solve(lu1, forcing)  # (I + ap S D)^-1 (r - S s)
    # B_L (I + ap S D)^-1 S  ==  [S^T (I + ap S D)^-T B_L^T]^T, so 2nr solves
    W = lu_solve(lu1, lm.B_L.T, trans=1)
    top_right = ap * _scale_block_cols(W.T, S)

    DS = _scale_block_cols(lm.D_L, S)
    T2 = np.eye(width) + ap * DS
    lu2 = lu_factor(T2)
    Y1 = lu_solve(lu2, lm.C_L)
    Y2 = ap * lu_solve(lu2, DS)
    yv = ap * lu_solve(lu2, lm.D_L @ forcing)

    Phi = np.empty((dim + width, dim + width))
    Phi[:dim, :dim] = lm.A_L - ap * lm.B_L @ X1
    Phi[:dim, dim:] = top_right
    Phi[dim:, :dim] = Y1
    Phi[dim:, dim:] = Y2
    sigma = np.concatenate([ap * lm.B_L @ xv, yv])
    return ClosedLoopSystem(Phi=Phi, sigma=sigma, state_dim=dim, output_dim=width)
