"""Metric definitions, jet extraction, stratum flags and the catalog.

A metric with two commuting Killing fields d/dz1, d/dz2 is given by ten
component expressions of (t1, t2), either in the raw block form

    b_ij dt^i dt^j + 2 f_ik dt^i dz^k + h_kl dz^k dz^l          ("bfh")

or in the submersion form

    gt_ij dt^i dt^j + h_kl (dz^k + F_i^k dt^i)(dz^l + F_j^l dt^j)

with gt the orbit metric.  The submersion form is canonical internally;
bfh input is converted eagerly at jet level via

    gt_ij = b_ij - f_ik f_jl h^kl,    F_j^k = f_js h^sk.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import expr, jets
from .errors import MetricDefinitionError, SingularMetricError

BFH_KEYS = ("b11", "b12", "b22", "f11", "f12", "f21", "f22",
            "h11", "h12", "h22")
SUBMERSION_KEYS = ("gt11", "gt12", "gt22", "F11", "F12", "F21", "F22",
                   "h11", "h12", "h22")

CATALOG_NAMES = ("flat", "diag_t1", "vdb", "ppwave1", "ppwave2", "ppwave3",
                 "lambda_kundu", "lambda_kundu_c0", "random_analytic")

# sampling rectangles where each catalog family is smooth and nondegenerate
CATALOG_DOMAINS = {
    "flat": ((-1.0, 1.0), (-1.0, 1.0)),
    "diag_t1": ((0.5, 2.5), (-1.0, 1.0)),
    "vdb": ((0.3, 1.2), (0.7, 1.5)),
    "ppwave1": ((-0.5, 0.5), (-0.5, 0.5)),
    "ppwave2": ((-1.0, 1.0), (-1.0, 1.0)),
    "ppwave3": ((-1.0, 1.0), (-1.0, 1.0)),
    "lambda_kundu": ((0.6, 1.4), (-0.4, 0.4)),
    "lambda_kundu_c0": ((0.6, 1.4), (-0.4, 0.4)),
    "random_analytic": ((-0.9, 0.9), (-0.9, 0.9)),
}


@dataclass(frozen=True)
class G2Metric:
    name: str
    form: str  # "bfh" | "submersion"
    params: dict
    components: dict  # key -> expression string
    asts: dict = field(repr=False, default=None)
    domain: tuple = None  # ((t1min, t1max), (t2min, t2max)) or None

    def component_keys(self):
        return BFH_KEYS if self.form == "bfh" else SUBMERSION_KEYS

    def to_document(self):
        return {
            "name": self.name,
            "form": self.form,
            "params": dict(self.params),
            "components": dict(self.components),
        }


@dataclass(frozen=True)
class PointJets:
    """Jets of the canonical submersion components at one point.

    gt = (gt11, gt12, gt22), F = (F11, F12, F21, F22) with F_i^k ordered
    (f_1^1, f_1^2, f_2^1, f_2^2), h = (h11, h12, h22); det jets cached.
    """
    point: tuple
    order: int
    gt: tuple
    F: tuple
    h: tuple
    det_h: jets.Jet2
    det_gt: jets.Jet2

    def all_component_jets(self):
        return self.gt + self.F + self.h


@dataclass(frozen=True)
class StratumFlags:
    sign_det_h: int
    sign_det_gt: int
    c_rho_zero: bool
    ell_c_zero: bool
    orthogonally_transitive: bool
    generic: bool


def load_metric(document):
    """Build a validated G2Metric from a JSON document, dict, or path."""
    if isinstance(document, (str, bytes)):
        with open(document, "r", encoding="utf-8") as fh:
            try:
                document = json.load(fh)
            except json.JSONDecodeError as err:
                raise MetricDefinitionError(f"malformed JSON: {err}") from None
    if not isinstance(document, dict):
        raise MetricDefinitionError("metric document must be a JSON object")
    unknown = set(document) - {"name", "form", "params", "components"}
    if unknown:
        raise MetricDefinitionError(f"unknown keys: {sorted(unknown)}")
    try:
        name = document["name"]
        form = document["form"]
        components = document["components"]
    except KeyError as err:
        raise MetricDefinitionError(f"missing key {err}") from None
    params = document.get("params", {})
    if form not in ("bfh", "submersion"):
        raise MetricDefinitionError(f"form must be bfh|submersion, got {form!r}")
    if not all(isinstance(v, (int, float)) for v in params.values()):
        raise MetricDefinitionError("params must map names to numbers")
    keys = BFH_KEYS if form == "bfh" else SUBMERSION_KEYS
    missing = [k for k in keys if k not in components]
    if missing:
        raise MetricDefinitionError(f"missing component {missing[0]}")
    unknown = set(components) - set(keys)
    if unknown:
        raise MetricDefinitionError(
            f"unknown component keys: {sorted(unknown)}")
    asts = {}
    for key in keys:
        ast = expr.parse(str(components[key]))
        problems = expr.validate(ast, set(params))
        if problems:
            raise MetricDefinitionError(
                f"component {key}: " + "; ".join(problems))
        asts[key] = ast
    return G2Metric(name=str(name), form=form, params=dict(params),
                    components={k: str(components[k]) for k in keys},
                    asts=asts)


def _eval_components(m, point, order, method, h_fd):
    out = {}
    for key, ast in m.asts.items():
        if method == "analytic":
            out[key] = expr.eval_jet(ast, m.params, point, order)
        elif method == "fd":
            out[key] = jets.finite_difference_jet(
                lambda p, a=ast: expr.eval_scalar(a, m.params, p),
                point, order, h=h_fd)
        else:
            raise ValueError(f"unknown jet method {method!r}")
    return out


def point_jets(m, point, order=2, method="analytic", h_fd=1e-2):
    """Canonical submersion-form jets of the metric at a point.

    method="fd" replaces analytic jets with central finite differences
    (order <= 2), the independent cross-check path.
    """
    point = (float(point[0]), float(point[1]))
    comp = _eval_components(m, point, order, method, h_fd)
    h = (comp["h11"], comp["h12"], comp["h22"])
    det_h = h[0] * h[2] - h[1] * h[1]
    if det_h.value == 0.0 or not det_h.is_finite():
        raise SingularMetricError(
            f"singular h for metric {m.name!r} at {point}")
    if m.form == "submersion":
        gt = (comp["gt11"], comp["gt12"], comp["gt22"])
        F = (comp["F11"], comp["F12"], comp["F21"], comp["F22"])
    else:
        # h^{-1} via adjugate, then F_j^k = f_js h^sk and
        # gt_ij = b_ij - f_ik F_j^k, all in jet arithmetic
        hi11 = h[2] / det_h
        hi12 = -h[1] / det_h
        hi22 = h[0] / det_h
        f11, f12, f21, f22 = (comp["f11"], comp["f12"],
                              comp["f21"], comp["f22"])
        F = (f11 * hi11 + f12 * hi12,   # f_1^1
             f11 * hi12 + f12 * hi22,   # f_1^2
             f21 * hi11 + f22 * hi12,   # f_2^1
             f21 * hi12 + f22 * hi22)   # f_2^2
        gt = (comp["b11"] - (f11 * F[0] + f12 * F[1]),
              comp["b12"] - (f11 * F[2] + f12 * F[3]),
              comp["b22"] - (f21 * F[2] + f22 * F[3]))
    det_gt = gt[0] * gt[2] - gt[1] * gt[1]
    if det_gt.value == 0.0 or not det_gt.is_finite():
        raise SingularMetricError(
            f"singular orbit metric for {m.name!r} at {point}")
    pj = PointJets(point=point, order=order, gt=gt, F=F, h=h,
                   det_h=det_h, det_gt=det_gt)
    for j in pj.all_component_jets():
        if not j.is_finite():
            raise SingularMetricError(
                f"non-finite component jet for {m.name!r} at {point}")
    return pj


def submersion_to_bfh(pj):
    """Values (b, f) recovered from submersion jets, for round-trip checks."""
    h11, h12, h22 = (j.value for j in pj.h)
    F = [j.value for j in pj.F]
    hmat = np.array([[h11, h12], [h12, h22]])
    Fmat = np.array([[F[0], F[1]], [F[2], F[3]]])  # rows i, cols k
    f = Fmat @ hmat
    gt = np.array([[pj.gt[0].value, pj.gt[1].value],
                   [pj.gt[1].value, pj.gt[2].value]])
    b = gt + Fmat @ hmat @ Fmat.T
    return b, f


def component_scale(pj):
    """Largest raw coefficient magnitude over the ten component jets."""
    return max(max(abs(c) for c in j.coeffs)
               for j in pj.all_component_jets())


def classify(pj, tol=1e-10):
    """Stratum flags deciding which frames and relations apply."""
    from .invariants1 import fundamental  # deferred: avoids an import cycle
    scale = max(1.0, component_scale(pj))
    inv = fundamental(pj)
    curl1 = jets.t_derivative(pj.F[0], 1).value - jets.t_derivative(pj.F[2], 0).value
    curl2 = jets.t_derivative(pj.F[1], 1).value - jets.t_derivative(pj.F[3], 0).value
    transitive = abs(curl1) < tol * scale and abs(curl2) < tol * scale
    c_rho_zero = abs(inv.C_rho) < tol * scale
    ell_c_zero = abs(inv.ell_C) < tol * scale
    return StratumFlags(
        sign_det_h=1 if pj.det_h.value > 0 else -1,
        sign_det_gt=1 if pj.det_gt.value > 0 else -1,
        c_rho_zero=c_rho_zero,
        ell_c_zero=ell_c_zero,
        orthogonally_transitive=transitive,
        generic=not c_rho_zero and not ell_c_zero,
    )


# ----------------------------------------------------------------------
# catalog
# ----------------------------------------------------------------------

def _doc(name, form, params, components):
    return {"name": name, "form": form, "params": params,
            "components": components}


def _zeros(keys, given):
    out = {k: "0" for k in keys}
    out.update(given)
    return out


def _vdb_document():
    c6 = "cosh(sqrt(6)*t1)"
    return _doc("vdb", "bfh", {}, _zeros(BFH_KEYS, {
        "b11": f"{c6}*sinh(t2)^4 + 2*{c6}*sinh(t2)^2*cosh(t2)^2"
               f" + 3*cosh(t2)^4/{c6}",
        "b22": f"-{c6}*sinh(t2)^4",
        "f11": f"6*cosh(t2)^2/{c6}",
        "f12": f"2*{c6}*sinh(t2)^2*cosh(t2) + 6*cosh(t2)^3/{c6}",
        "h11": f"12/{c6}",
        "h12": f"12*cosh(t2)/{c6}",
        "h22": f"2*{c6}*sinh(t2)^2 + 12*cosh(t2)^2/{c6}",
    }))


_RANDOM_FORMS = (
    "{a:.6f}*sin({b:.6f}*t1 + {c:.6f}*t2 + {d:.6f})",
    "{a:.6f}*cos({b:.6f}*t1 + {c:.6f}*t2 + {d:.6f})",
    "{a:.6f}*tanh({b:.6f}*t1 + {c:.6f}*t2 + {d:.6f})",
    "{a:.6f}*sin({b:.6f}*t1 + {d:.6f})*cos({c:.6f}*t2)",
)


def _bounded_term(rng, amp):
    # |value| <= amp on the whole plane: every form is a product of
    # functions bounded by 1 scaled by a
    form = _RANDOM_FORMS[rng.integers(len(_RANDOM_FORMS))]
    return form.format(a=rng.uniform(0.3, 1.0) * amp,
                       b=rng.uniform(0.4, 1.6),
                       c=rng.uniform(0.4, 1.6),
                       d=rng.uniform(-3.0, 3.0))


def _random_analytic_document(seed):
    rng = np.random.default_rng(int(seed))
    sign_h = 1 if rng.integers(2) else -1
    sign_g = 1 if rng.integers(2) else -1

    def diag(sign):
        s = f"2 + {_bounded_term(rng, 0.7)}"
        return s if sign > 0 else f"-({s})"

    comps = {
        "gt11": f"2 + {_bounded_term(rng, 0.7)}",
        "gt12": _bounded_term(rng, 0.5),
        "gt22": diag(sign_g),
        "h11": f"2 + {_bounded_term(rng, 0.7)}",
        "h12": _bounded_term(rng, 0.5),
        "h22": diag(sign_h),
        "F11": _bounded_term(rng, 0.8),
        "F12": _bounded_term(rng, 0.8),
        "F21": _bounded_term(rng, 0.8),
        "F22": _bounded_term(rng, 0.8),
    }
    # sign_g only controls gt22; gt11 stays near +2, so det gt keeps the
    # sign of gt22 on the box (|off-diagonal| <= 0.5 < 1.3*1.3)
    return _doc(f"random_analytic_{seed}", "submersion", {}, comps)


def catalog(name, params=None):
    """Instantiate a built-in metric; params override family defaults."""
    params = dict(params or {})

    def take(key, default):
        return float(params.pop(key, default))

    if name == "flat":
        doc = _doc("flat", "bfh", {}, _zeros(BFH_KEYS, {
            "b11": "1", "b22": "1", "h11": "1", "h22": "1"}))
    elif name == "diag_t1":
        doc = _doc("diag_t1", "bfh", {}, _zeros(BFH_KEYS, {
            "b11": "1", "b22": "1", "h11": "t1", "h22": "t1"}))
    elif name == "vdb":
        doc = _vdb_document()
    elif name == "ppwave1":
        # dt1 dt2 + R^2 (dz1 + W dz2)^2 + S^2 (dz2)^2 with R = S = cos(t1),
        # W = 2 t1; vacuum requires (W')^2 = -(2 S^2/R^2)(R''/R + S''/S),
        # here 4 = -2(-1 - 1)
        doc = _doc("ppwave1", "bfh", {}, _zeros(BFH_KEYS, {
            "b12": "1/2",
            "h11": "cos(t1)^2",
            "h12": "2*t1*cos(t1)^2",
            "h22": "(4*t1^2 + 1)*cos(t1)^2",
        }))
    elif name == "ppwave2":
        c = take("c", 2.0)
        doc = _doc("ppwave2", "bfh", {"c": c}, _zeros(BFH_KEYS, {
            "b11": "1", "b22": "1",
            "f21": "c*t1",
            "h11": "c^2*t1^2/2",  # forced: psi_11 + psi_22 = c^2
            "h12": "1",
        }))
    elif name == "ppwave3":
        c = take("c", 1.0)
        doc = _doc("ppwave3", "bfh", {"c": c}, _zeros(BFH_KEYS, {
            "b11": "exp(t1)", "b22": "exp(t1)",
            "f21": "c*exp(t1)",
            "h11": "c^2*exp(t1)",  # forced: psi_11 + psi_22 = c^2 e^t1
            "h12": "1",
        }))
    elif name == "lambda_kundu":
        c = take("c", 1.0)
        lam = take("Lambda", 3.0)
        if c == 0.0 or lam == 0.0:
            raise MetricDefinitionError("lambda_kundu needs c != 0, Lambda != 0")
        # coordinates (r, y, u, v); psi = 0 solves the linear psi-equation
        # 2r(c+r^{3/2})^2 psi_rr + (c+r^{3/2})(2c+5r^{3/2}) psi_r
        # + 2r psi_yy = 0 trivially
        doc = _doc("lambda_kundu", "bfh", {"c": c, "Lambda": lam},
                   _zeros(BFH_KEYS, {
                       "b11": "-3/(4*Lambda*sqrt(t1)*(sqrt(t1)^3 + c))",
                       "b22": "-3*(sqrt(t1)^3 + c)/(4*Lambda*sqrt(t1))",
                       "f21": "-1/(sqrt(t1)*Lambda)",
                       "h11": "-4/(3*Lambda*c*sqrt(t1))",
                       "h12": "-t1",
                   }))
    elif name == "lambda_kundu_c0":
        lam = take("Lambda", 3.0)
        if lam == 0.0:
            raise MetricDefinitionError("lambda_kundu_c0 needs Lambda != 0")
        # coordinates (x, y, u, v); overall sign chosen so that the
        # residual R_ab - Lambda g_ab vanishes in the sphere-positive
        # Ricci convention; psi = x^3 solves the cylindrical equation
        # psi_xx - (2/x) psi_x + (3/Lambda) psi_yy = 0
        doc = _doc("lambda_kundu_c0", "bfh", {"Lambda": lam},
                   _zeros(BFH_KEYS, {
                       "b11": "-3/(Lambda*t1^2)",
                       "b22": "-1/t1^2",
                       "f21": "-t1",
                       "h11": "-(t1^6 + t1^3)/(2*t1^2)",  # psi = t1^3
                       "h12": "-1/t1^2",
                   }))
    elif name == "random_analytic":
        seed = int(take("seed", 0))
        doc = _random_analytic_document(seed)
    else:
        raise MetricDefinitionError(f"unknown catalog metric {name!r}")
    if params:
        raise MetricDefinitionError(
            f"unknown parameters for {name!r}: {sorted(params)}")
    m = load_metric(doc)
    base = name
    return G2Metric(name=m.name, form=m.form, params=m.params,
                    components=m.components, asts=m.asts,
                    domain=CATALOG_DOMAINS.get(base))


def default_domain(m):
    """Sampling rectangle for a metric, falling back to the name table."""
    if m.domain is not None:
        return m.domain
    if m.name.startswith("random_analytic"):
        return CATALOG_DOMAINS["random_analytic"]
    return CATALOG_DOMAINS.get(m.name)


def grid_points(domain, n1, n2=None, margin=0.0):
    """Regular n1 x n2 grid inside a ((a,b),(c,d)) rectangle."""
    n2 = n2 or n1
    (a, b), (c, d) = domain
    m1 = (b - a) * margin
    m2 = (d - c) * margin
    t1s = np.linspace(a + m1, b - m1, n1)
    t2s = np.linspace(c + m2, d - m2, n2)
    return [(float(x), float(y)) for x in t1s for y in t2s]
