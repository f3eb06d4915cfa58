"""Small dense tensors over four indices and nestable forward-mode differentiation.

Every numeric routine in the package is written against the generic operations
defined here (``einsum``, ``mul``, ``inv``, ``det`` ...), so the same code runs on
plain ``numpy`` arrays and on ``Dual`` arrays.  A ``Dual`` carries a value array and
a derivative array with one extra trailing axis (one slot per seeded direction).
Values and derivatives may themselves be ``Dual`` objects of an older tag, which is
how second and third derivatives are obtained.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field

import numpy as np

DIM = 4
ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
DELTA = np.eye(DIM)
SINGULAR_DET = 1e-12

# Ordered index pairs 0<=a<=b<=3 in the order 00,01,02,03,11,12,13,22,23,33.
PAIRS = [(a, b) for a in range(DIM) for b in range(a, DIM)]
PAIR_INDEX = np.zeros((DIM, DIM), dtype=int)
for _k, (_a, _b) in enumerate(PAIRS):
    PAIR_INDEX[_a, _b] = PAIR_INDEX[_b, _a] = _k
# n(ab): 1 on the diagonal, 2 off it.
PAIR_MULT = np.array([1.0 if a == b else 2.0 for a, b in PAIRS])
MULT = np.where(np.eye(DIM, dtype=bool), 1.0, 2.0)


class SingularMetricError(ValueError):
    pass


# ---------------------------------------------------------------- dual numbers

_TAG = itertools.count(1)


def new_tag() -> int:
    return next(_TAG)


class Dual:
    """Array of first-order truncated Taylor numbers.

    ``der.shape == val.shape + (n,)``.  ``tag`` identifies the differentiation
    level; a ``Dual`` with a smaller tag is a constant for this level.
    """

    __slots__ = ("val", "der", "tag")
    __array_ufunc__ = None

    def __init__(self, val, der, tag: int):
        self.val = val
        self.der = der
        self.tag = tag

    @property
    def shape(self):
        return shape(self.val)

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def n(self):
        return shape(self.der)[-1]

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            k = idx.index(Ellipsis)
            used = sum(1 for i in idx if i is not None and i is not Ellipsis)
            idx = idx[:k] + (slice(None),) * (self.ndim - used) + idx[k + 1 :]
        return Dual(self.val[idx], self.der[idx], self.tag)

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return mul(self, reciprocal(other))

    def __rtruediv__(self, other):
        return mul(other, reciprocal(self))

    def __neg__(self):
        return neg(self)

    def __repr__(self):
        return f"Dual(tag={self.tag}, shape={self.shape}, n={self.n})"


def tag_of(x) -> int:
    return x.tag if isinstance(x, Dual) else -1


def shape(x):
    return x.shape if isinstance(x, Dual) else np.shape(x)


def primal(x):
    """Underlying float array, stripped of every derivative level."""
    while isinstance(x, Dual):
        x = x.val
    return np.asarray(x)


def _split(x, t):
    if isinstance(x, Dual) and x.tag == t:
        return x.val, x.der
    return x, None


def _max_tag(*xs):
    return max(tag_of(x) for x in xs)


def _n_of(xs, t):
    for x in xs:
        if isinstance(x, Dual) and x.tag == t:
            return x.n
    raise AssertionError


def expand_at(x, pos):
    if isinstance(x, Dual):
        return Dual(expand_at(x.val, pos), expand_at(x.der, pos), x.tag)
    return np.expand_dims(x, pos)


def lift(x, nd):
    """Prepend unit axes until the leading rank is ``nd``."""
    while len(shape(x)) < nd:
        x = expand_at(x, 0)
    return x


def broadcast_to(x, shp):
    if isinstance(x, Dual):
        return Dual(broadcast_to(x.val, shp), broadcast_to(x.der, tuple(shp) + (x.n,)), x.tag)
    return np.broadcast_to(x, shp)


def reshape(x, shp):
    if isinstance(x, Dual):
        return Dual(reshape(x.val, shp), reshape(x.der, tuple(shp) + (x.n,)), x.tag)
    return np.reshape(x, shp)


def flatten(x):
    return reshape(x, (-1,)) if not isinstance(x, Dual) else reshape(x, (int(np.prod(x.shape)),))


def _bshape(a, b):
    return np.broadcast_shapes(tuple(shape(a)), tuple(shape(b)))


def add(a, b):
    t = _max_tag(a, b)
    if t < 0:
        return np.add(a, b)
    nd = max(len(shape(a)), len(shape(b)))
    a, b = lift(a, nd), lift(b, nd)
    av, ad = _split(a, t)
    bv, bd = _split(b, t)
    val = add(av, bv)
    out = tuple(shape(val))
    n = _n_of((a, b), t)
    der = None
    for d in (ad, bd):
        if d is not None:
            d = broadcast_to(d, out + (n,))
            der = d if der is None else add(der, d)
    return Dual(val, der, t)


def neg(a):
    if isinstance(a, Dual):
        return Dual(neg(a.val), neg(a.der), a.tag)
    return np.negative(a)


def mul(a, b):
    t = _max_tag(a, b)
    if t < 0:
        return np.multiply(a, b)
    nd = max(len(shape(a)), len(shape(b)))
    a, b = lift(a, nd), lift(b, nd)
    av, ad = _split(a, t)
    bv, bd = _split(b, t)
    val = mul(av, bv)
    out = tuple(shape(val))
    n = _n_of((a, b), t)
    der = None
    if ad is not None:
        der = broadcast_to(mul(ad, expand_at(bv, nd)), out + (n,))
    if bd is not None:
        term = broadcast_to(mul(expand_at(av, nd), bd), out + (n,))
        der = term if der is None else add(der, term)
    return Dual(val, der, t)


def reciprocal(a):
    if isinstance(a, Dual):
        v = reciprocal(a.val)
        return Dual(v, mul(neg(a.der), expand_at(mul(v, v), a.ndim)), a.tag)
    return 1.0 / np.asarray(a, dtype=float)


def sqrt(a):
    if isinstance(a, Dual):
        v = sqrt(a.val)
        return Dual(v, mul(a.der, expand_at(reciprocal(mul(2.0, v)), a.ndim)), a.tag)
    return np.sqrt(a)


_LETTERS = string.ascii_letters


def einsum(spec: str, *ops):
    """Generic Einstein summation; no ellipsis, explicit output required."""
    t = _max_tag(*ops)
    if t < 0:
        return np.einsum(spec, *ops, optimize=len(ops) > 2)
    ins, out = spec.replace(" ", "").split("->")
    ins = ins.split(",")
    if len(ins) != len(ops):
        raise ValueError(f"einsum spec {spec!r} expects {len(ins)} operands, got {len(ops)}")
    used = set(spec)
    z = next(c for c in _LETTERS if c not in used)
    vals, ders = zip(*(_split(o, t) for o in ops))
    val = einsum(spec, *vals)
    der = None
    for i, d in enumerate(ders):
        if d is None:
            continue
        sub = ",".join(s + z if j == i else s for j, s in enumerate(ins)) + "->" + out + z
        term = einsum(sub, *(d if j == i else v for j, v in enumerate(vals)))
        der = term if der is None else add(der, term)
    return Dual(val, der, t)


def stack(xs, axis=0):
    xs = list(xs)
    t = _max_tag(*xs)
    if t < 0:
        return np.stack(xs, axis=axis)
    n = _n_of(xs, t)
    vals, ders = [], []
    for x in xs:
        v, d = _split(x, t)
        vals.append(v)
        ders.append(d if d is not None else np.zeros(tuple(shape(x)) + (n,)))
    return Dual(stack(vals, axis), stack(ders, axis), t)


def concat(xs, axis=0):
    xs = list(xs)
    t = _max_tag(*xs)
    if t < 0:
        return np.concatenate(xs, axis=axis)
    n = _n_of(xs, t)
    vals, ders = [], []
    for x in xs:
        v, d = _split(x, t)
        vals.append(v)
        ders.append(d if d is not None else np.zeros(tuple(shape(x)) + (n,)))
    return Dual(concat(vals, axis), concat(ders, axis), t)


def inv(a):
    if isinstance(a, Dual):
        v = inv(a.val)
        return Dual(v, neg(einsum("ij,jkZ,kl->ilZ", v, a.der, v)), a.tag)
    return np.linalg.inv(a)


def det(a):
    if isinstance(a, Dual):
        v = det(a.val)
        trace = einsum("ji,ijZ->Z", inv(a.val), a.der)
        return Dual(v, mul(trace, expand_at(v, 0)), a.tag)
    return np.linalg.det(a)


def transpose(x, perm):
    letters = _LETTERS[: len(perm)]
    return einsum(letters + "->" + "".join(letters[p] for p in perm), x)


# ------------------------------------------------------------------- seeding


def jacobian(f, x, directions=None):
    """Value and derivative of ``f`` at the flat vector ``x``.

    ``directions`` is an (n, k) matrix of seed directions; default identity.
    Returns ``(value, der)`` with ``der.shape == value.shape + (k,)``.  Works
    when ``x`` (or ``directions``) is itself a ``Dual``, which nests levels.
    """
    n = shape(x)[0]
    if directions is None:
        seeds = np.eye(n)
    elif isinstance(directions, Dual):
        seeds = directions
    else:
        seeds = np.asarray(directions, dtype=float)
    k = shape(seeds)[1]
    t = new_tag()
    y = f(Dual(x, seeds, t))
    if isinstance(y, Dual) and y.tag == t:
        return y.val, y.der
    return y, np.zeros(tuple(shape(y)) + (k,))


def last_slot(der, k=0):
    """Select derivative slot ``k`` from a derivative array."""
    nd = len(shape(der)) - 1
    return der[(slice(None),) * nd + (k,)]


def directional(f, x, v):
    """Value and derivative of ``f`` at ``x`` along the direction ``v``."""
    v = reshape(v, (shape(v)[0], 1))
    val, der = jacobian(f, x, v)
    return val, last_slot(der)


# -------------------------------------------------------------- Tensor type


@dataclass(frozen=True)
class Tensor:
    """Dense tensor over {0,1,2,3}^rank with declared pair symmetries."""

    data: np.ndarray
    symmetries: tuple = field(default=())

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.shape != (DIM,) * data.ndim:
            raise ValueError(f"tensor data must have shape (4,)*rank, got {data.shape}")
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        for (i, j), kind in self.symmetries:
            if not (0 <= i < data.ndim and 0 <= j < data.ndim and i != j):
                raise ValueError(f"invalid symmetry axes {(i, j)}")
            swapped = np.swapaxes(data, i, j)
            ok = np.array_equal(swapped, data) if kind == "symmetric" else np.array_equal(swapped, -data)
            if not ok:
                raise ValueError(f"declared {kind} pair {(i, j)} does not hold")

    @property
    def rank(self):
        return self.data.ndim


def _as_array(t):
    return t.data if isinstance(t, Tensor) else t


def contract(spec: str, *operands):
    """Einstein summation over Tensors (or arrays); each repeated label twice."""
    ins, _, out = spec.replace(" ", "").partition("->")
    labels = ins.split(",")
    if len(labels) != len(operands):
        raise ValueError(f"spec {spec!r} names {len(labels)} operands, got {len(operands)}")
    for lab, op in zip(labels, operands):
        if len(lab) != len(shape(_as_array(op))):
            raise ValueError(f"operand of rank {len(shape(_as_array(op)))} given labels {lab!r}")
    counts = {c: ins.count(c) for c in set(ins.replace(",", ""))}
    for c, k in counts.items():
        if k > 2 or (k == 2 and c in out) or (k == 1 and c not in out):
            raise ValueError(f"label {c!r} must appear twice on the left or once and in the output")
    res = einsum(spec, *(_as_array(o) for o in operands))
    return Tensor(res) if all(isinstance(o, Tensor) for o in operands) and not isinstance(res, Dual) else res


def antisymmetrize_pair(t, axes):
    """X[..i..j..] - X[..j..i..] with no factor one half."""
    i, j = axes
    arr = _as_array(t)
    nd = len(shape(arr))
    if i == j or not (0 <= i < nd and 0 <= j < nd):
        raise ValueError(f"invalid axes {axes} for rank {nd}")
    perm = list(range(nd))
    perm[i], perm[j] = perm[j], perm[i]
    res = add(arr, neg(transpose(arr, perm)))
    return Tensor(res, ((axes, "antisymmetric"),)) if isinstance(t, Tensor) else res


def symmetrize_pair(t, axes):
    """X[..i..j..] + X[..j..i..] with no factor one half."""
    i, j = axes
    arr = _as_array(t)
    nd = len(shape(arr))
    if i == j or not (0 <= i < nd and 0 <= j < nd):
        raise ValueError(f"invalid axes {axes} for rank {nd}")
    perm = list(range(nd))
    perm[i], perm[j] = perm[j], perm[i]
    res = add(arr, transpose(arr, perm))
    return Tensor(res, ((axes, "symmetric"),)) if isinstance(t, Tensor) else res


def metric_aux(g):
    """Inverse metric and density rho = sqrt|det g|."""
    arr = _as_array(g)
    d = det(arr)
    dv = float(primal(d))
    if abs(dv) < SINGULAR_DET:
        raise SingularMetricError(f"|det g| = {abs(dv):.3e} below threshold")
    rho = sqrt(mul(d, np.sign(dv)))
    ginv = inv(arr)
    if isinstance(g, Tensor):
        return Tensor(ginv), float(rho)
    return ginv, rho


def levi_civita_symbol():
    eps = np.zeros((DIM,) * DIM)
    for perm in itertools.permutations(range(DIM)):
        eps[perm] = np.linalg.det(np.eye(DIM)[list(perm)])
    return eps
