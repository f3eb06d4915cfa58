"""Coordinate atlas of the jet and multimomentum bundles, points, total derivatives."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .tensor import DIM, PAIR_INDEX, PAIRS, concat, directional, flatten, jacobian, primal, shape

_R4 = range(DIM)


def _block(name, ids, index_map):
    return name, tuple(ids), np.asarray(index_map, dtype=int)


def _vector_block(name):
    return _block(name, [f"{name}_{m}" for m in _R4], np.arange(DIM))


def _pair_block(name):
    return _block(name, [f"{name}_{a}{b}" for a, b in PAIRS], PAIR_INDEX)


def _cube_block(name):
    ids = [f"{name}_{a}_{b}_{c}" for a in _R4 for b in _R4 for c in _R4]
    return _block(name, ids, np.arange(64).reshape(4, 4, 4))


def _pair_vector_block(name):
    ids = [f"{name}_{a}{b}_{m}" for a, b in PAIRS for m in _R4]
    imap = PAIR_INDEX[:, :, None] * 4 + np.arange(4)[None, None, :]
    return _block(name, ids, imap)


def _quartic_block(name):
    ids = [f"{name}_{a}_{b}_{c}_{m}" for a in _R4 for b in _R4 for c in _R4 for m in _R4]
    return _block(name, ids, np.arange(256).reshape(4, 4, 4, 4))


def _pair_pair_block(name):
    ids = [f"{name}_{a}{b}_{m}{n}" for a, b in PAIRS for m, n in PAIRS]
    imap = PAIR_INDEX[:, :, None, None] * 10 + PAIR_INDEX[None, None, :, :]
    return _block(name, ids, imap)


def _cube_pair_block(name):
    ids = [f"{name}_{a}_{b}_{c}_{m}{n}" for a in _R4 for b in _R4 for c in _R4 for m, n in PAIRS]
    imap = np.arange(64).reshape(4, 4, 4)[..., None, None] * 10 + PAIR_INDEX[None, None, None]
    return _block(name, ids, imap)


BLOCKS = {
    "x": _vector_block("x"),
    "g": _pair_block("g"),
    "Gamma": _cube_block("Gamma"),
    "dg": _pair_vector_block("dg"),
    "dGamma": _quartic_block("dGamma"),
    "ddg": _pair_pair_block("ddg"),
    "ddGamma": _cube_pair_block("ddGamma"),
    "p_metric": _pair_vector_block("pm"),
    "p_conn": _quartic_block("pc"),
    "p": _block("p", ["p"], np.array(0)),
    "p_sym": _pair_block("ps"),
}


class Layout:
    """Ordered list of coordinate blocks defining one chart of one bundle."""

    def __init__(self, name: str, blocks: tuple[str, ...]):
        self.name = name
        self.blocks = blocks
        ids, maps, slices, off = [], {}, {}, 0
        for b in blocks:
            _, bids, imap = BLOCKS[b]
            ids.extend(bids)
            maps[b] = imap + off
            slices[b] = slice(off, off + len(bids))
            off += len(bids)
        self.ids = tuple(ids)
        self.index_maps = maps
        self.slices = slices
        self.size = off
        self.position = {c: i for i, c in enumerate(ids)}

    def __repr__(self):
        return f"Layout({self.name}, {self.size})"

    def __contains__(self, block):
        return block in self.index_maps

    def pack(self, **tensors) -> np.ndarray:
        """Flatten full tensors (symmetric ones given in full) into this layout."""
        flat = np.zeros(self.size)
        for b in self.blocks:
            arr = np.asarray(tensors[b], dtype=float)
            imap = self.index_maps[b]
            if arr.shape != imap.shape:
                raise ValueError(f"block {b} expects shape {imap.shape}, got {arr.shape}")
            flat[imap] = arr
            if not np.array_equal(flat[imap], arr):
                raise ValueError(f"block {b} violates its index symmetry")
        return flat

    def block_mask(self, names) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        for b in names:
            if b in self.slices:
                mask[self.slices[b]] = True
        return mask


E = Layout("E", ("x", "g", "Gamma"))
J1 = Layout("J1", ("x", "g", "Gamma", "dg", "dGamma"))
J2 = Layout("J2", ("x", "g", "Gamma", "dg", "dGamma", "ddg", "ddGamma"))
M_EXT = Layout("M", ("x", "g", "Gamma", "p_metric", "p_conn", "p"))
J1_STAR = Layout("J1star", ("x", "g", "Gamma", "p_metric", "p_conn"))
P_NONMOMENTA = Layout("P", ("x", "g", "Gamma"))
P_PURE = Layout("P_pure", ("x", "Gamma", "p_sym"))
SIGMA_J1 = Layout("Sigma_J1", ("x", "g", "dg"))
J1_STAR_CONN = Layout("J1star_Gamma", ("x", "Gamma", "p_conn"))

VELOCITY_BLOCKS = ("dg", "dGamma")


class Coords:
    """Tensor-shaped views of a flat coordinate vector (array or Dual)."""

    def __init__(self, layout: Layout, flat):
        if shape(flat) != (layout.size,):
            raise ValueError(f"{layout.name} needs {layout.size} coordinates, got {shape(flat)}")
        self.layout = layout
        self.flat = flat
        self._cache = {}

    def __getattr__(self, name):
        if name.startswith("_") or name in ("layout", "flat"):
            raise AttributeError(name)
        cache = self.__dict__["_cache"]
        if name not in cache:
            maps = self.__dict__["layout"].index_maps
            if name not in maps:
                raise AttributeError(f"chart {self.__dict__['layout'].name} has no block {name!r}")
            cache[name] = self.__dict__["flat"][maps[name]]
        return cache[name]

    def has(self, block) -> bool:
        return block in self.layout


@dataclass(frozen=True, eq=False)
class Point:
    """A point of some bundle, stored as a flat coordinate vector."""

    layout: Layout
    flat: np.ndarray

    def __post_init__(self):
        flat = np.array(self.flat, dtype=float)
        if flat.shape != (self.layout.size,):
            raise ValueError(f"{self.layout.name} needs {self.layout.size} coordinates")
        flat.flags.writeable = False
        object.__setattr__(self, "flat", flat)

    @cached_property
    def z(self) -> Coords:
        return Coords(self.layout, self.flat)

    def __getattr__(self, name):
        lay = self.__dict__.get("layout")
        if lay is not None and name in BLOCKS and name in lay:
            return np.asarray(self.z.__getattr__(name))
        raise AttributeError(name)

    def restrict(self, layout: Layout) -> "Point":
        """Coordinates of ``layout`` taken from this point (every block must exist)."""
        parts = [self.flat[self.layout.slices[b]] for b in layout.blocks]
        return Point(layout, np.concatenate(parts))

    def replace(self, **tensors) -> "Point":
        flat = self.flat.copy()
        for b, arr in tensors.items():
            flat[self.layout.index_maps[b]] = np.asarray(arr, dtype=float)
        return Point(self.layout, flat)

    def to_json(self) -> dict:
        return {b: self.flat[self.layout.slices[b]].tolist() for b in self.layout.blocks}

    def __eq__(self, other):
        return (
            isinstance(other, Point)
            and other.layout.name == self.layout.name
            and np.array_equal(other.flat, self.flat)
        )


LAYOUTS = {lay.name: lay for lay in (E, J1, J2, M_EXT, J1_STAR, P_NONMOMENTA, P_PURE, SIGMA_J1)}


def point_from_json(obj: dict, layout: Layout | None = None) -> Point:
    if layout is None:
        keys = set(obj) - {"layout"}
        if "layout" in obj:
            layout = LAYOUTS[obj["layout"]]
        else:
            layout = next(
                lay for lay in (J2, J1, M_EXT, J1_STAR, P_PURE, SIGMA_J1, E) if set(lay.blocks) == keys
            )
    parts = []
    for b in layout.blocks:
        arr = np.asarray(obj[b], dtype=float).reshape(-1)
        if arr.size != len(BLOCKS[b][1]):
            raise ValueError(f"field {b!r} needs {len(BLOCKS[b][1])} values, got {arr.size}")
        parts.append(arr)
    return Point(layout, np.concatenate(parts))


def dump_points(points, path):
    with open(path, "w") as fh:
        json.dump([dict(layout=p.layout.name, **p.to_json()) for p in points], fh)


def load_point(path) -> Point:
    with open(path) as fh:
        obj = json.load(fh)
    if isinstance(obj, list):
        obj = obj[0]
    return point_from_json(obj)


def dims() -> dict:
    return {"E": E.size, "J1": J1.size, "M": M_EXT.size, "J1star": J1_STAR.size,
            "P": P_NONMOMENTA.size, "Sigma_J1": SIGMA_J1.size}


def make_point(layout: Layout, **tensors) -> Point:
    return Point(layout, layout.pack(**tensors))


# ------------------------------------------------------------- differentiation


def jet_gradient(f, p: Point, blocks=None):
    """Value and dense gradient of ``f`` (a function of Coords) at ``p``.

    ``blocks`` restricts the seeded coordinates; the returned gradient always
    spans the full layout with zeros outside the seeded blocks.
    """
    lay = p.layout
    if blocks is None:
        val, der = jacobian(lambda v: f(Coords(lay, v)), p.flat)
        return val, der
    mask = lay.block_mask(blocks)
    seeds = np.eye(lay.size)[:, mask]
    val, der = jacobian(lambda v: f(Coords(lay, v)), p.flat, seeds)
    full = np.zeros(np.shape(val) + (lay.size,))
    full[..., mask] = der
    return val, full


def sparse_gradient(f, p: Point) -> dict:
    """Gradient of a scalar jet function as {coordinate id: value}, zeros dropped."""
    _, der = jet_gradient(f, p)
    der = np.asarray(der)
    return {p.layout.ids[i]: float(der[i]) for i in np.flatnonzero(der)}


def total_direction(z: Coords, tau: int):
    """Components of D_tau on the first-order coordinates, built from z (J2)."""
    x = np.zeros(DIM)
    x[tau] = 1.0
    pairs = np.array(PAIRS).T
    g_tau = z.dg[pairs[0], pairs[1], tau]
    gam_tau = flatten(z.dGamma[:, :, :, tau])
    dg_tau = flatten(z.ddg[pairs[0], pairs[1], :, tau])
    dgam_tau = flatten(z.ddGamma[:, :, :, :, tau])
    return concat([x, g_tau, gam_tau, dg_tau, dgam_tau])


def total_derivative_fn(f, tau: int):
    """D_tau f as a jet function on J2 coordinates; f must be first order."""

    def d_tau(z: Coords):
        if z.layout is not J2:
            raise ValueError("total derivatives need a J2 chart")
        lo = z.flat[: J1.size]
        val, der = directional(lambda v: f(Coords(J1, v)), lo, total_direction(z, tau))
        return der

    return d_tau


def total_derivative(f, tau: int, p: Point):
    if p.layout is not J2:
        raise ValueError("total derivatives need a JetPoint2")
    try:
        return primal(total_derivative_fn(f, tau)(p.z))
    except AttributeError as exc:
        raise ValueError(f"total derivative of a second-order function: {exc}") from exc


def JetPoint2(**tensors) -> Point:
    return make_point(J2, **tensors)
