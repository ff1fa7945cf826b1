"""Full 4D curvature, Lambda-vacuum residuals and on-shell relations.

Index order is (t1, t2, z1, z2); component fields depend on (t1, t2)
only, so z-derivatives vanish identically and the block structure of
the metric gives its inverse in closed form:

    g    = [[gt + P^T h P, P^T h], [h P, h]],        P_ki = F_i^k
    g^-1 = [[gt^-1, -gt^-1 P^T], [-P gt^-1, h^-1 + P gt^-1 P^T]]

Curvature convention: R(d_c, d_d) d_b = R^a_bcd d_a with
R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import SingularMetricError


def four_metric(pj):
    """4x4 symmetric matrix of component jets in (t1,t2,z1,z2) order."""
    gt11, gt12, gt22 = pj.gt
    h11, h12, h22 = pj.h
    F = pj.F  # (f_1^1, f_1^2, f_2^1, f_2^2)

    def f(i, k):
        return F[2 * i + k]

    g = [[None] * 4 for _ in range(4)]
    h = ((h11, h12), (h12, h22))
    gt = ((gt11, gt12), (gt12, gt22))
    for i in range(2):
        for j in range(i, 2):
            acc = gt[i][j]
            for k in range(2):
                for l in range(2):
                    acc = acc + f(i, k) * f(j, l) * h[k][l]
            g[i][j] = g[j][i] = acc
        for k in range(2):
            acc = f(i, 0) * h[0][k] + f(i, 1) * h[1][k]
            g[i][2 + k] = g[2 + k][i] = acc
    for k in range(2):
        for l in range(k, 2):
            g[2 + k][2 + l] = g[2 + l][2 + k] = h[k][l]
    return g


def four_metric_values(pj):
    return np.array([[e.value for e in row] for row in four_metric(pj)])


def inverse_four_metric(pj, order=None):
    """Jets of g^{ab} via the submersion block formula."""
    order = pj.order if order is None else order
    tr = lambda j: jets.truncate(j, order)
    gt11, gt12, gt22 = (tr(j) for j in pj.gt)
    h11, h12, h22 = (tr(j) for j in pj.h)
    det_gt = tr(pj.det_gt)
    det_h = tr(pj.det_h)
    F = [tr(j) for j in pj.F]

    gi = ((gt22 / det_gt, -gt12 / det_gt),
          (-gt12 / det_gt, gt11 / det_gt))
    hi = ((h22 / det_h, -h12 / det_h),
          (-h12 / det_h, h11 / det_h))

    def f(i, k):
        return F[2 * i + k]

    ginv = [[None] * 4 for _ in range(4)]
    for i in range(2):
        for j in range(i, 2):
            ginv[i][j] = ginv[j][i] = gi[i][j]
    for i in range(2):
        for k in range(2):
            acc = gi[i][0] * f(0, k) + gi[i][1] * f(1, k)
            ginv[i][2 + k] = ginv[2 + k][i] = -acc
    for k in range(2):
        for l in range(k, 2):
            acc = hi[k][l]
            for i in range(2):
                for j in range(2):
                    acc = acc + f(i, k) * gi[i][j] * f(j, l)
            ginv[2 + k][2 + l] = ginv[2 + l][2 + k] = acc
    return ginv


def christoffel4(pj):
    """Christoffel symbols as jets of order pj.order - 1."""
    if pj.order < 1:
        raise ValueError("christoffel4 needs jets of order >= 1")
    n = pj.order - 1
    g = four_metric(pj)
    ginv = inverse_four_metric(pj, n)
    zero = jets.constant(0.0, n)

    dg = [[[jets.t_derivative(g[a][b], s) for b in range(4)]
           for a in range(4)] for s in range(2)]

    def pd(c, a, b):
        return dg[c][a][b] if c < 2 else zero

    gamma = [[[None] * 4 for _ in range(4)] for _ in range(4)]
    for a in range(4):
        for b in range(4):
            for c in range(b, 4):
                acc = zero
                for d in range(4):
                    acc = acc + ginv[a][d] * (pd(b, d, c) + pd(c, d, b)
                                              - pd(d, b, c))
                val = 0.5 * acc
                gamma[a][b][c] = val
                gamma[a][c][b] = val
    return gamma


def riemann4(pj):
    """R^a_bcd values (needs order >= 2 jets)."""
    if pj.order < 2:
        raise ValueError("riemann4 needs jets of order >= 2")
    gamma = christoffel4(pj)
    Gv = np.array([[[gamma[a][b][c].value for c in range(4)]
                    for b in range(4)] for a in range(4)])
    dG = np.zeros((2, 4, 4, 4))
    for s in range(2):
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    dG[s][a][b][c] = jets.t_derivative(gamma[a][b][c], s).value

    def pdG(c, a, d, b):
        return dG[c][a][d][b] if c < 2 else 0.0

    R = np.zeros((4, 4, 4, 4))
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    R[a][b][c][d] = (pdG(c, a, d, b) - pdG(d, a, c, b)
                                     + Gv[a, c, :] @ Gv[:, d, b]
                                     - Gv[a, d, :] @ Gv[:, c, b])
    return R


def ricci4(pj):
    """Ricci tensor values R_bd = R^a_bad."""
    R = riemann4(pj)
    return np.einsum("abad->bd", R)


def sectional_curvature(pj, u, v, riemann=None, g4=None):
    """K of the plane spanned by 4-vectors u, v at the point."""
    R = riemann4(pj) if riemann is None else riemann
    g = four_metric_values(pj) if g4 is None else g4
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    # K = g(R(u, v) v, u) / (|u|^2 |v|^2 - g(u, v)^2), normalized so the
    # unit 2-sphere plane has K = +1
    w = np.einsum("abcd,b,c,d->a", R, v, u, v)
    num = float(w @ g @ u)
    den = float((u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2)
    if den == 0.0:
        raise SingularMetricError("degenerate plane for sectional curvature")
    return num / den


@dataclass
class Residual:
    matrix: np.ndarray        # R_ab - Lambda g_ab
    max_abs: float
    scale: float              # max |4-metric jet coefficient|
    normalized: float


def residual(m, lam, point, method="analytic"):
    """Lambda-vacuum residual R_ab - Lambda g_ab at a point."""
    from .metrics import point_jets
    pj = point_jets(m, point, order=2, method=method)
    return residual_from_jets(pj, lam)


def residual_from_jets(pj, lam):
    g = four_metric(pj)
    gv = np.array([[e.value for e in row] for row in g])
    ric = ricci4(pj)
    mat = ric - lam * gv
    scale = max(max(abs(c) for c in g[a][b].coeffs)
                for a in range(4) for b in range(4))
    max_abs = float(np.max(np.abs(mat)))
    return Residual(matrix=mat, max_abs=max_abs, scale=scale,
                    normalized=max_abs / scale)


def kundu_A(m, points, method="analytic"):
    """Samples of A = sqrt|det h| * (C . h) and their spread.

    On Lambda-vacuum solutions with C_rho != 0 this row vector is
    constant up to a global sign in any adapted coordinates.
    """
    from .invariants1 import first_invariant_jets
    from .metrics import point_jets
    samples = []
    for pt in points:
        pj = point_jets(m, pt, order=1, method=method)
        jv = first_invariant_jets(pj)
        c1, c2 = jv["C1"].value, jv["C2"].value
        h11, h12, h22 = (j.value for j in pj.h)
        root = abs(pj.det_h.value) ** 0.5
        samples.append(np.array([root * (c1 * h11 + c2 * h12),
                                 root * (c1 * h12 + c2 * h22)]))
    norms = [float(np.linalg.norm(a)) for a in samples]
    top = max(norms)
    if top == 0.0:
        return {"samples": samples, "max_deviation": 0.0,
                "vacuous": True,
                "notice": "C vanishes at every sample; constancy is vacuous"}
    ref = samples[int(np.argmax(norms))]
    dev = 0.0
    for a in samples:
        aligned = a if float(a @ ref) >= 0.0 else -a
        dev = max(dev, float(np.linalg.norm(aligned - ref)) / top)
    return {"samples": samples, "max_deviation": dev, "vacuous": False,
            "notice": None}


def _normalized(terms, scales=()):
    """Signed residual normalized by the largest monomial magnitude.

    scales carries magnitudes of sub-terms hidden inside composite
    coefficients, so a relation whose terms all cancel to roundoff is
    reported as satisfied rather than as 0/0 noise.
    """
    scale = max(max(abs(t) for t in terms), *scales, 0.0) \
        if scales else max(abs(t) for t in terms)
    return sum(terms) / scale if scale > 0.0 else 0.0


ONSHELL_IDS = ("ric_chi_ellC", "nu_ellC_rho", "Xperp_Crho_sq",
               "Xperp_ellC_sq", "X_Crho", "X_ellC_long")


def onshell_relations(m, lam, points, tol=1e-7, method="analytic"):
    """Residuals of the on-shell relation suite at each point.

    The report carries the Einstein residual alongside, so a violation
    of the relations on a non-vacuum metric is attributable.
    """
    from .invariants1 import first_invariant_jets
    from .invariants2 import second_invariants_from_jets
    from .metrics import point_jets

    rows = []
    for pt in points:
        pj = point_jets(m, pt, order=2, method=method)
        jv = first_invariant_jets(pj)
        sec = second_invariants_from_jets(pj)
        sg = 1.0 if pj.det_gt.value > 0 else -1.0
        sgh = sg * (1.0 if pj.det_h.value > 0 else -1.0)

        X = (jv["X1"].value, jv["X2"].value)
        Xp = (jv["Xp1"].value, jv["Xp2"].value)

        def apply(vec, jet):
            return vec[0] * jets.t_derivative(jet, 0).value \
                + vec[1] * jets.t_derivative(jet, 1).value

        C_rho = jv["C_rho"].value
        C_chi = jv["C_chi"].value
        Q_chi = jv["Q_chi"].value
        Q_gamma = jv["Q_gamma"].value
        ell_C = jv["ell_C"].value
        th1 = jv["Theta_I"].value
        root = jv["q_gamma_root"].value
        X_Crho = apply(X, jv["C_rho"])
        Xp_Crho = apply(Xp, jv["C_rho"])
        X_ellC = apply(X, jv["ell_C"])
        Xp_ellC = apply(Xp, jv["ell_C"])

        dq = Q_chi - Q_gamma
        big = max(abs(C_rho), abs(C_chi), 4.0 * abs(lam), abs(ell_C))
        residuals = {
            "ric_chi_ellC": _normalized(
                [sec.C_ric, 0.5 * C_chi, -sg * 1.5 * ell_C]),
            "nu_ellC_rho": _normalized(
                [sec.C_nu, -sg * ell_C, 4.0 * lam, 0.5 * C_rho]),
            "Xperp_Crho_sq": _normalized(
                [sg * Xp_Crho ** 2, 4.0 * Q_chi * C_rho ** 2,
                 -16.0 * dq * C_chi * C_rho, 64.0 * dq ** 2],
                scales=(16.0 * (abs(Q_chi) + abs(Q_gamma))
                        * abs(C_chi * C_rho),
                        64.0 * (Q_chi ** 2 + Q_gamma ** 2))),
            "Xperp_ellC_sq": _normalized(
                [sg * Xp_ellC ** 2,
                 sgh * 4.0 * (th1 - 2.0 * ell_C * root) * th1,
                 4.0 * ell_C ** 2 * Q_chi],
                scales=(4.0 * (abs(th1) + 2.0 * abs(ell_C * root))
                        * abs(th1),)),
            "X_Crho": _normalized(
                [X_Crho, (C_rho - C_chi + 4.0 * lam - sg * ell_C) * C_rho,
                 8.0 * dq],
                scales=(big * abs(C_rho),
                        8.0 * (abs(Q_chi) + abs(Q_gamma)))),
            "X_ellC_long": _normalized(
                [dq * X_ellC ** 2,
                 -sgh * C_rho * root * th1 * X_ellC,
                 (3.0 * Q_chi - 2.0 * Q_gamma) * C_rho * ell_C * X_ellC,
                 (C_chi * C_rho * Q_chi + 2.0 * C_rho ** 2 * Q_chi
                  - C_rho ** 2 * Q_gamma - 4.0 * Q_chi ** 2
                  + 4.0 * Q_chi * Q_gamma) * ell_C ** 2,
                 -sgh * (2.0 * C_chi * C_rho + C_rho ** 2
                         - 8.0 * Q_chi) * root * th1 * ell_C,
                 -8.0 * root ** 3 * th1 * ell_C,
                 sgh * (C_chi * C_rho - 0.25 * C_rho ** 2 - 4.0 * Q_chi
                        + 4.0 * Q_gamma) * th1 ** 2],
                scales=((abs(C_chi * C_rho * Q_chi)
                         + 2.0 * C_rho ** 2 * abs(Q_chi)
                         + C_rho ** 2 * abs(Q_gamma) + 4.0 * Q_chi ** 2
                         + 4.0 * abs(Q_chi * Q_gamma)) * ell_C ** 2,
                        (2.0 * abs(C_chi * C_rho) + C_rho ** 2
                         + 8.0 * abs(Q_chi)) * abs(root * th1 * ell_C),
                        (3.0 * abs(Q_chi) + 2.0 * abs(Q_gamma))
                        * abs(C_rho * ell_C * X_ellC))),
        }
        k_residual = _normalized([sec.K_Xiperp, -sec.K_Xi]) \
            if (sec.K_Xi or sec.K_Xiperp) else 0.0
        einstein_res = residual_from_jets(pj, lam)
        rows.append({
            "point": pt,
            "residuals": residuals,
            "gauss_curvature_equality": k_residual,
            "einstein_normalized": einstein_res.normalized,
            "max_residual": max(max(abs(v) for v in residuals.values()),
                                abs(k_residual)),
            "pass": max(max(abs(v) for v in residuals.values()),
                        abs(k_residual)) < tol,
        })
    return {"points": rows, "tol": tol,
            "max_residual": max(r["max_residual"] for r in rows),
            "pass": all(r["pass"] for r in rows)}
