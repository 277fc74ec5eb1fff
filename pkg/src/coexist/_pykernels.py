"""Pure-Python versions of the numerical hot loops.

Each function here has a twin with the same signature in ``_ckernels.pyx``.
``coexist.kernels`` picks one of the two at import time.
"""

from __future__ import annotations

import math

import numpy as np

_LN2 = math.log(2.0)


def fbl_rate(sinr: float, blocklength: float, qinv: float, bandwidth: float) -> float:
    """Normal-approximation rate in bits/s, clamped at zero."""
    if sinr <= 0.0:
        return 0.0
    dispersion = 1.0 - 1.0 / ((1.0 + sinr) * (1.0 + sinr))
    per_use = math.log2(1.0 + sinr) - math.sqrt(dispersion / blocklength) * qinv / _LN2
    if per_use <= 0.0:
        return 0.0
    return bandwidth * per_use


def min_power(
    target: float,
    gain: float,
    noise: float,
    bandwidth: float,
    blocklength: float,
    qinv: float,
    pmax: float,
    rtol: float,
) -> float:
    """Smallest power whose finite-blocklength rate reaches ``target``.

    Returns -1.0 when even ``pmax`` falls short.
    """
    if target <= 0.0:
        return 0.0
    if fbl_rate(pmax * gain / noise, blocklength, qinv, bandwidth) < target:
        return -1.0
    lo, hi = 0.0, pmax
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if fbl_rate(mid * gain / noise, blocklength, qinv, bandwidth) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def _blocks(e: int, u: int, partner_e, partner_u, rank_e, rank_u) -> bool:
    pe = partner_e[e]
    pu = partner_u[u]
    if pe == u:
        return False
    re = rank_e[e][u]
    ru = rank_u[u][e]
    if re < 0 or ru < 0:
        return False
    e_wants = pe < 0 or re < rank_e[e][pe]
    u_wants = pu < 0 or ru < rank_u[u][pu]
    return e_wants and u_wants


def _is_stable(partner_e, partner_u, rank_e, rank_u) -> bool:
    n_e = len(partner_e)
    n_u = len(partner_u)
    for e in range(n_e):
        u = partner_e[e]
        if u >= 0 and (rank_e[e][u] < 0 or rank_u[u][e] < 0):
            return False
    for e in range(n_e):
        for u in range(n_u):
            if _blocks(e, u, partner_e, partner_u, rank_e, rank_u):
                return False
    return True


def stable_matchings(rank_e, rank_u):
    """Enumerate every one-to-one matching and keep the stable ones.

    ``rank_e[e][u]`` is the position of u in e's list (-1 when u is not
    acceptable to e), likewise ``rank_u``. Returns ``(stable, checked)`` where
    ``stable`` is a list of tuples ``partner_e`` (-1 for unmatched) and
    ``checked`` counts every candidate matching visited.
    """
    n_e = len(rank_e)
    n_u = len(rank_u)
    partner_e = [-1] * n_e
    partner_u = [-1] * n_u
    found = []
    checked = 0

    def walk(e: int) -> None:
        nonlocal checked
        if e == n_e:
            checked += 1
            if _is_stable(partner_e, partner_u, rank_e, rank_u):
                found.append(tuple(partner_e))
            return
        walk(e + 1)
        for u in range(n_u):
            if partner_u[u] < 0:
                partner_e[e] = u
                partner_u[u] = e
                walk(e + 1)
                partner_u[u] = -1
                partner_e[e] = -1

    walk(0)
    return found, checked


def best_assignment(loss, cell):
    """Minimise the summed loss over one option per row with distinct cells.

    ``loss`` is an (R, O) float array, ``inf`` marking infeasible options;
    ``cell`` is an (R, O) int array of the grid cell each option occupies.
    Returns ``(best_loss, choice, n_feasible)``; ``choice`` is None when no
    assignment is feasible. Ties resolve to the lexicographically first
    choice.
    """
    loss = np.asarray(loss, dtype=np.float64)
    cell = np.asarray(cell, dtype=np.int64)
    n_rows, n_opts = loss.shape
    if n_rows == 0:
        return 0.0, (), 1
    total = np.zeros((n_opts,) * n_rows)
    for r in range(n_rows):
        shape = [1] * n_rows
        shape[r] = n_opts
        total = total + loss[r].reshape(shape)
    for r in range(n_rows):
        for s in range(r + 1, n_rows):
            shape_r = [1] * n_rows
            shape_s = [1] * n_rows
            shape_r[r] = n_opts
            shape_s[s] = n_opts
            clash = cell[r].reshape(shape_r) == cell[s].reshape(shape_s)
            total = np.where(clash, np.inf, total)
    finite = np.isfinite(total)
    n_feasible = int(finite.sum())
    if n_feasible == 0:
        return math.inf, None, 0
    flat = int(np.argmin(total))
    choice = tuple(int(i) for i in np.unravel_index(flat, total.shape))
    return float(total.flat[flat]), choice, n_feasible
