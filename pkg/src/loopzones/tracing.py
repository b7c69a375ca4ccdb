"""Proportional-sharing flow tracing.

Every node is treated as a perfect mixer: the source mix of each outflow
equals the mix of all inflows (lines plus local generation), and likewise
downstream for destinations. With nonnegative, acyclic line flows this
yields, per line, the MW contributed by each generator (``G2T``), the MW
delivered to each load (``L2T``), and the generator-load exchange matrix
carried by the line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dcflow import Scenario
from .network import DEFAULT_EPSILON, IncidenceMatrices, Network, incidence, orient_by_flow

THROUGHFLOW_TOL = 1e-6
INVERSE_TOL = 1e-9


class TracingError(ValueError):
    """Inputs to the tracing stage are mutually inconsistent."""


@dataclass(frozen=True, eq=False)
class TraceResult:
    """Tracing artifacts for one scenario on a flow-oriented network.

    ``network`` and ``flows`` are the oriented versions (all flows >= 0);
    ``direction[k]`` is -1 where line k was reversed relative to the input.
    """

    network: Network
    flows: np.ndarray
    direction: np.ndarray
    scenario: Scenario
    F: np.ndarray
    p: np.ndarray
    C_u: np.ndarray
    C_d: np.ndarray
    A_u: np.ndarray
    A_d: np.ndarray
    A_u_inv: np.ndarray
    A_d_inv: np.ndarray
    GDF: np.ndarray
    LDF: np.ndarray
    G2T: np.ndarray
    L2T: np.ndarray
    epsilon: float = DEFAULT_EPSILON

    def exchange(self, k: int) -> np.ndarray:
        return exchange_matrix(k, self.G2T, self.L2T, self.flows, self.epsilon)


def flow_matrix(inc: IncidenceMatrices, flows: np.ndarray) -> np.ndarray:
    """Node-to-node flow matrix ``F = G_r^T diag(f) G_t``; parallel lines add up."""
    flows = np.asarray(flows, dtype=float)
    if (flows < 0).any():
        raise TracingError("flow_matrix needs nonnegative (flow-oriented) line flows")
    return inc.G_r.T @ (flows[:, None] * inc.G_t)


def throughflow(F: np.ndarray, scenario: Scenario, tol: float = THROUGHFLOW_TOL) -> np.ndarray:
    """Nodal throughflow from the inflow side, checked against the outflow side."""
    p = F.sum(axis=0) + scenario.gen
    p_out = F.sum(axis=1) + scenario.load
    gap = np.abs(p - p_out)
    if gap.max(initial=0.0) > tol:
        i = int(gap.argmax())
        raise TracingError(
            f"inflow and outflow throughflow disagree by {gap[i]:.3g} MW at node index {i}"
        )
    return p


def _inverse(A: np.ndarray, name: str) -> np.ndarray:
    try:
        inv = np.linalg.inv(A)
    except np.linalg.LinAlgError:
        raise TracingError(f"{name} is singular; the flow graph is probably cyclic") from None
    residual = np.abs(A @ inv - np.eye(len(A))).max(initial=0.0)
    if residual >= INVERSE_TOL:
        raise TracingError(f"{name} inverse residual {residual:.3g} exceeds {INVERSE_TOL}")
    return inv


def distribution_matrices(F: np.ndarray, p: np.ndarray):
    """Contribution and distribution matrices for both tracing directions.

    Returns ``(C_u, C_d, A_u, A_d, A_u_inv, A_d_inv)`` where
    ``C_u = diag(p)^-1 F``, ``A_u = I - C_u^T``, ``C_d = F diag(p)^-1`` and
    ``A_d = I - C_d``. Rows of ``C_u`` and columns of ``C_d`` belonging to
    nodes with zero throughflow are zero.
    """
    p = np.asarray(p, dtype=float)
    if (p < 0).any():
        raise TracingError("throughflow must be nonnegative")
    inv_p = np.zeros_like(p)
    np.divide(1.0, p, out=inv_p, where=p > 0)
    C_u = inv_p[:, None] * F
    C_d = F * inv_p[None, :]
    eye = np.eye(len(p))
    A_u = eye - C_u.T
    A_d = eye - C_d
    return C_u, C_d, A_u, A_d, _inverse(A_u, "A_u"), _inverse(A_d, "A_d")


def gdf_ldf(
    inc: IncidenceMatrices,
    flows: np.ndarray,
    p: np.ndarray,
    A_u_inv: np.ndarray,
    A_d_inv: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Topological generation and load distribution factors (``M x N``).

    ``GDF[k, j]`` is the share of generator j's output that flows over line k,
    read upstream from the line's sending node; ``LDF[k, i]`` is the share of
    load i's demand supplied over line k, read downstream from the receiving
    node. Both vanish when the relevant node has no throughflow.
    """
    src = inc.G_r.argmax(axis=1)
    dst = inc.G_t.argmax(axis=1)
    up = np.zeros(len(flows))
    down = np.zeros(len(flows))
    np.divide(flows, p[src], out=up, where=p[src] > 0)
    np.divide(flows, p[dst], out=down, where=p[dst] > 0)
    return up[:, None] * A_u_inv[src], down[:, None] * A_d_inv[dst]


def g2t_l2t(GDF: np.ndarray, LDF: np.ndarray, scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    return GDF * scenario.gen[None, :], LDF * scenario.load[None, :]


def exchange_matrix(
    k: int,
    G2T: np.ndarray,
    L2T: np.ndarray,
    flows: np.ndarray,
    epsilon: float = DEFAULT_EPSILON,
) -> np.ndarray:
    """``X[i, j]``: MW that load node i receives from generator node j over line k."""
    f = float(flows[k])
    if f <= epsilon:
        return np.zeros((G2T.shape[1], G2T.shape[1]))
    return np.outer(L2T[k], G2T[k]) / f


def trace(
    network: Network,
    flows: np.ndarray,
    scenario: Scenario,
    epsilon: float = DEFAULT_EPSILON,
) -> TraceResult:
    """Orient ``flows`` and run the full upstream/downstream trace."""
    oriented_net, oriented = orient_by_flow(network, flows, epsilon)
    direction = np.where(np.asarray(flows, dtype=float) < -epsilon, -1, 1)
    inc = incidence(oriented_net)
    F = flow_matrix(inc, oriented)
    p = throughflow(F, scenario)
    C_u, C_d, A_u, A_d, A_u_inv, A_d_inv = distribution_matrices(F, p)
    GDF, LDF = gdf_ldf(inc, oriented, p, A_u_inv, A_d_inv)
    G2T, L2T = g2t_l2t(GDF, LDF, scenario)
    return TraceResult(
        network=oriented_net,
        flows=oriented,
        direction=direction,
        scenario=scenario,
        F=F,
        p=p,
        C_u=C_u,
        C_d=C_d,
        A_u=A_u,
        A_d=A_d,
        A_u_inv=A_u_inv,
        A_d_inv=A_d_inv,
        GDF=GDF,
        LDF=LDF,
        G2T=G2T,
        L2T=L2T,
        epsilon=epsilon,
    )
