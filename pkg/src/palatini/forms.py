"""Sparse differential forms and vector fields over named jet coordinates.

A ``Form`` holds numeric coefficients at one point; a ``FormSpec`` holds the
symbolic recipe (coefficient functions and differentials of composite functions)
and expands into a ``Form`` at a given point.  Contraction follows the iterated
interior product i(X_0)...i(X_3), i.e. i(X_3) acts first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .jets import Coords, Layout, Point
from .tensor import directional, jacobian, primal


def _sort_sign(factors):
    """Sorted factors and permutation sign; sign 0 for repeated factors."""
    f = list(factors)
    if len(set(f)) < len(f):
        return tuple(sorted(f)), 0
    sign = 1
    for i in range(len(f)):
        for j in range(len(f) - 1 - i):
            if f[j] > f[j + 1]:
                f[j], f[j + 1] = f[j + 1], f[j]
                sign = -sign
    return tuple(f), sign


class Form:
    """Numeric k-form: sum of coef * dz_{i1}^...^dz_{ik} with sorted indices."""

    def __init__(self, layout: Layout, degree: int, coefs=(), factors=None):
        self.layout = layout
        self.degree = degree
        self.coefs = np.asarray(coefs, dtype=float).reshape(-1)
        self.factors = (
            np.zeros((0, degree), dtype=int) if factors is None else np.asarray(factors, dtype=int).reshape(-1, degree)
        )

    @classmethod
    def from_terms(cls, layout: Layout, degree: int, terms):
        acc = {}
        for coef, facs in terms:
            if len(facs) != degree:
                raise ValueError(f"term {facs} is not of degree {degree}")
            idx = [layout.position[f] if isinstance(f, str) else int(f) for f in facs]
            key, sign = _sort_sign(idx)
            if sign and coef != 0.0:
                acc[key] = acc.get(key, 0.0) + sign * coef
        keys = [k for k, v in acc.items() if v != 0.0]
        return cls(layout, degree, [acc[k] for k in keys], keys if keys else None)

    def __len__(self):
        return len(self.coefs)

    def __add__(self, other):
        return Form.from_terms(self.layout, self.degree, list(self.terms()) + list(other.terms()))

    def __neg__(self):
        return Form(self.layout, self.degree, -self.coefs, self.factors)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c):
        return Form(self.layout, self.degree, c * self.coefs, self.factors)

    def terms(self):
        for c, f in zip(self.coefs, self.factors):
            yield float(c), tuple(int(i) for i in f)

    def dump(self):
        """List of (coefficient, factor ids) for golden comparisons."""
        return [(c, [self.layout.ids[i] for i in f]) for c, f in self.terms()]

    def evaluate(self, vectors) -> float:
        """omega(v_1, ..., v_k) for dense vectors."""
        if len(vectors) != self.degree:
            raise ValueError("need exactly degree-many vectors")
        if self.degree == 0:
            return float(self.coefs.sum())
        if len(self) == 0:
            return 0.0
        V = np.stack([np.asarray(v, dtype=float) for v in vectors], axis=1)
        A = V[self.factors]
        return float(self.coefs @ np.linalg.det(A))

    def interior(self, v) -> "Form":
        """i(v) omega."""
        if self.degree == 0:
            return Form(self.layout, 0)
        v = np.asarray(v, dtype=float)
        terms = []
        for c, f in self.terms():
            for a, i in enumerate(f):
                if v[i] != 0.0:
                    terms.append(((-1) ** a * c * v[i], f[:a] + f[a + 1:]))
        return Form.from_terms(self.layout, self.degree - 1, terms)

    def covector(self) -> np.ndarray:
        if self.degree != 1:
            raise ValueError("only 1-forms have a covector")
        out = np.zeros(self.layout.size)
        np.add.at(out, self.factors[:, 0], self.coefs)
        return out

    def pullback(self, layout: Layout, jac: np.ndarray) -> "Form":
        """Pullback along a map with Jacobian ``jac`` (target x source), for degree <= 1."""
        if self.degree == 0:
            return Form(layout, 0, self.coefs, np.zeros((len(self), 0), dtype=int))
        if self.degree == 1:
            cov = self.covector() @ jac
            nz = np.flatnonzero(cov)
            return Form(layout, 1, cov[nz], nz.reshape(-1, 1))
        raise NotImplementedError("pullback of higher forms is evaluated via pushed vectors")


def contract_form(X, omega: Form, p: Point | None = None):
    """Iterated interior product i(X_0)i(X_1)i(X_2)i(X_3) omega.

    ``X`` is a MultiVector4 (evaluated at ``p``) or a sequence of four dense
    vectors.  Degree 4 gives a float, degree 5 a dense covector, higher degrees
    a Form; degree below 4 gives zero.
    """
    vecs = X.at(p) if isinstance(X, MultiVector4) else [np.asarray(v, dtype=float) for v in X]
    k = omega.degree
    if k < 4:
        return 0.0
    if len(omega) == 0:
        return 0.0 if k == 4 else (np.zeros(omega.layout.size) if k == 5 else Form(omega.layout, k - 4))
    order = [vecs[3], vecs[2], vecs[1], vecs[0]]
    V = np.stack(order, axis=1)
    A = V[omega.factors]  # (T, k, 4)
    if k == 4:
        return float(omega.coefs @ np.linalg.det(A))
    if k == 5:
        out = np.zeros(omega.layout.size)
        for a in range(5):
            rows = [r for r in range(5) if r != a]
            minors = np.linalg.det(A[:, rows, :])
            np.add.at(out, omega.factors[:, a], omega.coefs * minors * (-1) ** (a + 4))
        return out
    form = omega
    for v in order:
        form = form.interior(v)
    return form


# ------------------------------------------------------------- lazy forms


@dataclass(frozen=True)
class Differential:
    """d of a (tensor-valued) jet function, optionally at one component."""

    name: str
    fn: object
    index: tuple = ()


@dataclass
class FormSpec:
    """Terms (coefficient, factors) with lazily expanded differentials.

    A coefficient is a float or ``(name, fn, index)`` naming a jet function
    component; a factor is a coordinate id or a ``Differential``.
    """

    layout: Layout
    degree: int
    terms: list = field(default_factory=list)

    def at(self, p: Point) -> Form:
        if p.layout is not self.layout:
            p = p.restrict(self.layout)
        values, grads = {}, {}
        out = []
        for coef, factors in self.terms:
            c = self._coef(coef, p, values)
            if c == 0.0:
                continue
            expanded = [((), 1.0)]
            for f in factors:
                if isinstance(f, Differential):
                    if f.name not in grads:
                        _, grads[f.name] = _grad(f.fn, p)
                    row = grads[f.name][f.index]
                    nz = np.flatnonzero(row)
                    expanded = [(fs + (int(i),), w * row[i]) for fs, w in expanded for i in nz]
                else:
                    idx = self.layout.position[f] if isinstance(f, str) else int(f)
                    expanded = [(fs + (idx,), w) for fs, w in expanded]
            out.extend((c * w, fs) for fs, w in expanded)
        return Form.from_terms(self.layout, self.degree, out)

    @staticmethod
    def _coef(coef, p, values):
        if isinstance(coef, (int, float)):
            return float(coef)
        name, fn, index = coef
        if name not in values:
            values[name] = np.asarray(primal(fn(p.z)))
        return float(values[name][index])

    def coefficient_functions(self):
        """All jet functions entering coefficients or differentials."""
        fns = {}
        for coef, factors in self.terms:
            if not isinstance(coef, (int, float)):
                fns[coef[0]] = coef[1]
            for f in factors:
                if isinstance(f, Differential):
                    fns[f.name] = f.fn
        return fns

    def factor_ids(self):
        ids = set()
        for _, factors in self.terms:
            ids.update(f for f in factors if isinstance(f, str))
        return ids


def _grad(fn, p: Point):
    val, der = jacobian(lambda v: fn(Coords(p.layout, v)), p.flat)
    return np.asarray(val), np.asarray(der)


def volume_ids():
    return ("x_0", "x_1", "x_2", "x_3")


def d3x_terms(mu: int):
    """i(d/dx^mu) d^4x as (sign, ids)."""
    rest = tuple(f"x_{i}" for i in range(4) if i != mu)
    return (-1) ** mu, rest


def d2x_terms(mu: int, nu: int):
    """i(d/dx^nu) i(d/dx^mu) d^4x as (sign, ids); zero when mu == nu."""
    if mu == nu:
        return 0, ()
    sign, rest = d3x_terms(mu)
    pos = rest.index(f"x_{nu}")
    return sign * (-1) ** pos, tuple(r for r in rest if r != f"x_{nu}")


# ------------------------------------------------------------ vector fields


class VectorField:
    """Vector field given by a jet function returning the dense component array."""

    def __init__(self, layout: Layout, fn, name: str = ""):
        self.layout = layout
        self.fn = fn
        self.name = name

    @classmethod
    def from_components(cls, layout: Layout, components: dict, name: str = ""):
        """Build from {coordinate id: constant or jet function}."""
        for cid in components:
            if cid not in layout.position:
                raise ValueError(f"{cid!r} is not a coordinate of {layout.name}")
        items = [(layout.position[c], f) for c, f in components.items()]

        def fn(z):
            from .tensor import stack

            vals = [np.zeros(())] * layout.size
            for i, f in items:
                vals[i] = f(z) if callable(f) else np.asarray(float(f))
            return stack(vals)

        return cls(layout, fn, name)

    def at(self, p: Point) -> np.ndarray:
        if p.layout is not self.layout:
            p = p.restrict(self.layout)
        return np.asarray(primal(self.fn(p.z)), dtype=float)

    def jacobian(self, p: Point):
        val, der = jacobian(lambda v: self.fn(Coords(self.layout, v)), p.flat)
        return np.asarray(primal(val)), np.asarray(der)


def lie_derivative_fn(X: VectorField, f, p: Point):
    """X(f) at p for a (tensor-valued) jet function f."""
    if p.layout is not X.layout:
        p = p.restrict(X.layout)
    v = X.at(p)
    _, der = directional(lambda w: f(Coords(p.layout, w)), p.flat, v)
    return np.asarray(der)


def bracket(X: VectorField, Y: VectorField, p: Point) -> np.ndarray:
    if X.layout is not Y.layout:
        raise ValueError("bracket of fields on different bundles")
    if p.layout is not X.layout:
        p = p.restrict(X.layout)
    xv, jx = X.jacobian(p)
    yv, jy = Y.jacobian(p)
    return jy @ xv - jx @ yv


def pushforward(map_fn, source: Layout, X, p: Point) -> np.ndarray:
    """Jacobian-vector product of a coordinate map (jet function -> flat target)."""
    if p.layout is not source:
        p = p.restrict(source)
    v = X.at(p) if isinstance(X, VectorField) else np.asarray(X, dtype=float)
    _, der = directional(lambda w: map_fn(Coords(source, w)), p.flat, v)
    return np.asarray(der)


def map_jacobian(map_fn, source: Layout, p: Point) -> np.ndarray:
    if p.layout is not source:
        p = p.restrict(source)
    _, der = jacobian(lambda w: map_fn(Coords(source, w)), p.flat)
    return np.asarray(der)


class MultiVector4:
    """Ordered transverse 4-tuple X_0 ^ X_1 ^ X_2 ^ X_3 with optional scale."""

    def __init__(self, fields, scale=None):
        fields = tuple(fields)
        if len(fields) != 4:
            raise ValueError("a 4-multivector needs four vector fields")
        lay = fields[0].layout
        if any(f.layout is not lay for f in fields):
            raise ValueError("all factors must live on one bundle")
        self.fields = fields
        self.layout = lay
        self.scale = scale

    def at(self, p: Point):
        vecs = [f.at(p) for f in self.fields]
        if self.scale is not None:
            vecs[0] = vecs[0] * float(primal(self.scale(p.z)))
        return vecs

    def transversality_defect(self, p: Point) -> float:
        xs = self.layout.slices["x"]
        vecs = [f.at(p)[xs] for f in self.fields]
        return float(np.abs(np.stack(vecs) - np.eye(4)).max())


def alternating_oracle(form: Form, vectors) -> float:
    """Brute-force omega(v_1..v_k) by summing over permutations with signs."""
    k = form.degree
    total = 0.0
    for c, f in form.terms():
        for perm in itertools.permutations(range(k)):
            sign = np.linalg.det(np.eye(k)[list(perm)])
            prod = c * sign
            for a in range(k):
                prod *= vectors[perm[a]][f[a]]
            total += prod
    return total
