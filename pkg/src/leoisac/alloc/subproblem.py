"""Primal-dual interior-point solver for the relaxed, penalised allocation problem.

For fixed weights ``w``, multipliers ``lam`` and penalties ``p`` the
subproblem is

    max  sum_c M_c log(1 + sum_s a_sc x_sc) - sum_c f_c(g_c + sig_c)
    s.t. 0 <= x_sc <= N_C,  sum_c x_sc <= N_C N_B,  -1 <= sig_c <= 0,

with ``a_sc = rho_sc (T - H_sc w_sc) / (T_F M_c)``, ``g_c = sum_s w_sc x_sc``
and ``f_c(u) = p_c u^2 / 2 + lam_c u``. The Hessian of each cell's block is
a diagonal plus a rank-two term; each Newton step keeps those terms as
auxiliary unknowns and factors the resulting sparse quasi-definite system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .problem import RateInput

__all__ = ["SubproblemError", "SubproblemResult", "effective_coeff", "penalised_objective", "solve_subproblem"]

_FTB = 0.995
_EPS = 64 * np.finfo(float).eps


class SubproblemError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


@dataclass
class SubproblemResult:
    x: np.ndarray  # (S, C) relaxed allocation in OFDMA frames
    sigma: np.ndarray  # (C,)
    objective: float
    iterations: int
    residuals: dict


def effective_coeff(inp: RateInput, w) -> np.ndarray:
    """Throughput per allocated frame once the handover term is linearised with ``w``."""
    return inp.rate_coeff() * (inp.ofdma_s - inp.handover_s * np.asarray(w, dtype=float))


def penalised_objective(x, sigma, inp: RateInput, w, lam, p) -> float:
    a = effective_coeff(inp, w)
    m = inp.users
    util = np.where(m > 0, m * np.log1p((a * x).sum(axis=0)), 0.0).sum()
    h = (np.asarray(w) * x).sum(axis=0) + sigma
    return float(util - np.sum(0.5 * p * h**2 + lam * h))


def _idle_sigma(lam, p):
    # minimiser of p u^2/2 + lam u over [-1, 0] for a cell with no allocation
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(p > 0, -lam / np.where(p > 0, p, 1.0), np.where(lam > 0, -1.0, 0.0))
    return np.clip(s, -1.0, 0.0)


def _max_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


def _assemble(dY, dS, q1, q2, q2s, si, ci, inv_db, n, nc, ns):
    """Sparse matrix of the condensed Newton system (unknowns dy, dsig, t1, t2, dnu)."""
    iy = np.arange(n)
    ic = np.arange(nc)
    o_s, o_t1, o_t2, o_nu = n, n + nc, n + 2 * nc, n + 3 * nc
    rows = [iy, o_s + ic, iy, o_t1 + ci, iy, o_t2 + ci, o_s + ic, o_t2 + ic, o_t1 + ic, o_t2 + ic,
            iy, o_nu + si, o_nu + np.arange(ns)]
    cols = [iy, o_s + ic, o_t1 + ci, iy, o_t2 + ci, iy, o_t2 + ic, o_s + ic, o_t1 + ic, o_t2 + ic,
            o_nu + si, iy, o_nu + np.arange(ns)]
    vals = [dY, dS, q1, q1, q2, q2, q2s, q2s, -np.ones(nc), -np.ones(nc),
            np.ones(n), np.ones(n), -inv_db]
    size = n + 3 * nc + ns
    return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size))


def solve_subproblem(
    inp: RateInput,
    w,
    lam,
    p,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> SubproblemResult:
    S, C = inp.shape
    w = np.broadcast_to(np.asarray(w, dtype=float), (S, C))
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (C,))
    p = np.broadcast_to(np.asarray(p, dtype=float), (C,))
    if np.any(w < 0) or np.any(lam < 0) or np.any(p < 0):
        raise ValueError("weights, multipliers and penalties must be non-negative")

    a_full = effective_coeff(inp, w)
    # pairs with no payoff stay at zero: the penalty never decreases in x
    active = inp.active_pairs & (a_full > 0)
    x_out = np.zeros((S, C))
    sigma_out = _idle_sigma(lam, p)
    si_g, ci_g = np.nonzero(active)
    n = len(si_g)
    if n == 0:
        return SubproblemResult(x_out, sigma_out, penalised_objective(x_out, sigma_out, inp, w, lam, p), 0,
                                {"dual": 0.0, "primal": 0.0, "mu": 0.0})

    cells, ci = np.unique(ci_g, return_inverse=True)
    sats, si = np.unique(si_g, return_inverse=True)
    nc, ns = len(cells), len(sats)
    NC, NB = float(inp.n_comm), float(inp.n_beams)

    m_tot = inp.users[cells].sum()
    mw = inp.users[cells] / m_tot
    a = a_full[si_g, ci_g] * NC
    wv = w[si_g, ci_g] * NC
    pp = p[cells] / m_tot
    ll = lam[cells] / m_tot
    sq_mw = np.sqrt(mw)[ci]
    sq_pp = np.sqrt(pp)
    cnt = np.bincount(si, minlength=ns)

    def seg(v):
        return np.bincount(ci, weights=v, minlength=nc)

    def sat_sum(v):
        return np.bincount(si, weights=v, minlength=ns)

    # interior starting point; every bound distance is carried as its own slack
    y = np.minimum(0.5, 0.5 * NB / cnt)[si]
    uy = 1.0 - y
    sg = np.full(nc, -0.5)
    ls, us = sg + 1.0, -sg
    sl = NB - sat_sum(y)
    zly, zuy = np.ones(n), np.ones(n)
    zls, zus = np.ones(nc), np.ones(nc)
    nu = np.ones(ns)
    m_comp = 2 * n + 2 * nc + ns

    res = {}
    for it in range(1, max_iter + 1):
        sc = 1.0 + seg(a * y)
        h = seg(wv * y) + sg
        phi = pp * h + ll
        gy = -mw[ci] * a / sc[ci] + phi[ci] * wv
        gs = phi
        rdy = gy - zly + zuy + nu[si]
        rds = gs - zls + zus
        rp = sat_sum(y) + sl - NB
        r_uy, r_ls, r_us = y + uy - 1.0, ls - sg - 1.0, us + sg

        comp = (y @ zly + uy @ zuy + ls @ zls + us @ zus + sl @ nu) / m_comp
        gscale = 1.0 + max(np.abs(gy).max(), np.abs(gs).max())
        # round-off in g + sigma is amplified by the penalty; residuals below
        # that floor carry no information
        noise = _EPS * pp * (1.0 + seg(wv * y) + np.abs(sg))
        dual_y = np.maximum(np.abs(rdy) - noise[ci] * wv, 0.0)
        dual_s = np.maximum(np.abs(rds) - noise, 0.0)
        res = {
            "dual": float(max(dual_y.max(), dual_s.max()) / gscale),
            "primal": float(max(np.abs(rp).max() / (1.0 + NB), np.abs(r_uy).max(), np.abs(r_ls).max(),
                                np.abs(r_us).max())),
            "mu": float(comp),
        }
        if res["dual"] <= tol and res["primal"] <= tol and comp <= 0.1 * tol:
            break

        # Newton system in augmented quasi-definite form; the per-cell rank-two
        # Hessian terms enter through auxiliary unknowns t = Q^T dz
        q1 = sq_mw * a / sc[ci]
        q2 = sq_pp[ci] * wv
        kkt = _assemble(zly / y + zuy / uy, zls / ls + zus / us, q1, q2, sq_pp, si, ci, sl / nu, n, nc, ns)
        lu = spla.splu(kkt, permc_spec="MMD_AT_PLUS_A")

        def newton(c_ly, c_uy, c_ls, c_us, c_sl):
            rhs = np.concatenate([
                -rdy + c_ly / y - (c_uy + zuy * r_uy) / uy,
                -rds + (c_ls + zls * r_ls) / ls - (c_us + zus * r_us) / us,
                np.zeros(2 * nc),
                -(c_sl / nu + rp),
            ])
            sol = lu.solve(rhs)
            sol += lu.solve(rhs - kkt @ sol)  # one step of iterative refinement
            dy, ds_, dnu = sol[:n], sol[n : n + nc], sol[n + 3 * nc :]
            duy, dls, dus = -r_uy - dy, -r_ls + ds_, -r_us - ds_
            dsl = -rp - sat_sum(dy)
            # dnu comes from the solve: recovering it as (c - nu dsl) / sl
            # amplifies cancellation in dsl once a capacity constraint is tight
            return (
                (dy, duy, dls, dus, dsl),
                ((c_ly - zly * dy) / y, (c_uy - zuy * duy) / uy, (c_ls - zls * dls) / ls,
                 (c_us - zus * dus) / us, dnu),
                ds_,
            )

        prim = (y, uy, ls, us, sl)
        dual = (zly, zuy, zls, zus, nu)

        def step_len(d):
            dp, dd, _ = d
            ap = min(_max_step(v, dv) for v, dv in zip(prim, dp))
            ad = min(_max_step(v, dv) for v, dv in zip(dual, dd))
            return min(ap, ad)

        aff = newton(*(-v * z for v, z in zip(prim, dual)))
        al = step_len(aff)
        mu_aff = sum((v + al * dv) @ (z + al * dz) for v, dv, z, dz in zip(prim, aff[0], dual, aff[1])) / m_comp
        target = (mu_aff / comp) ** 3 * comp
        d = newton(*(target - v * z - dv * dz for v, z, dv, dz in zip(prim, dual, aff[0], aff[1])))
        al = min(1.0, _FTB * step_len(d))
        if not np.isfinite(al) or al < 1e-12:
            raise SubproblemError("interior-point step collapsed", res)
        (dy, duy, dls, dus, dsl), (dzly, dzuy, dzls, dzus, dnu), ds_ = d
        y, uy, ls, us, sl = y + al * dy, uy + al * duy, ls + al * dls, us + al * dus, sl + al * dsl
        sg = sg + al * ds_
        zly, zuy, zls, zus, nu = zly + al * dzly, zuy + al * dzuy, zls + al * dzls, zus + al * dzus, nu + al * dnu
    else:
        raise SubproblemError(f"no convergence in {max_iter} interior-point iterations", res)

    x_out[si_g, ci_g] = np.clip(y, 0.0, 1.0) * NC
    sigma_out[cells] = np.clip(sg, -1.0, 0.0)
    obj = penalised_objective(x_out, sigma_out, inp, w, lam, p)
    return SubproblemResult(x_out, sigma_out, obj, it, res)
