"""Built-in point maps for sampled-map system specs.

Each factory takes the grid and a parameter mapping and returns a point
map suitable for outer approximation.  Maps clamp into the grid box, so
the approximations stay total.
"""
from __future__ import annotations

from typing import Callable, Dict, Mapping, Sequence, Tuple

from .grid import GridSpace

PointMap = Callable[[Sequence[float]], Tuple[float, ...]]


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def double_map(space: GridSpace, params: Mapping) -> PointMap:
    """Expansion by a rate (default 2) on a 1-D box, clamped at the ends."""
    if space.dim != 1:
        raise ValueError("sampler 'double' needs a 1-D grid")
    rate = float(params.get("rate", 2.0))
    lo, hi = space.lower[0], space.upper[0]

    def point_map(p: Sequence[float]) -> Tuple[float, ...]:
        return (_clamp(rate * p[0], lo, hi),)

    return point_map


def saddle_map(space: GridSpace, params: Mapping) -> PointMap:
    """Expand the first axis (clamped), contract the second."""
    if space.dim != 2:
        raise ValueError("sampler 'saddle' needs a 2-D grid")
    expand = float(params.get("expand", 2.0))
    contract = float(params.get("contract", 0.5))
    lo, hi = space.lower[0], space.upper[0]

    def point_map(p: Sequence[float]) -> Tuple[float, ...]:
        return (_clamp(expand * p[0], lo, hi), contract * p[1])

    return point_map


def saddle_surjective_map(space: GridSpace, params: Mapping) -> PointMap:
    """Saddle variant that is onto: the contracting axis pins repelling
    fixed points at the box ends, so the full vertical range is covered.

    Piecewise in y: contraction by half on the middle two thirds, then a
    linear stretch out to the ends; continuous and monotone.
    """
    if space.dim != 2:
        raise ValueError("sampler 'saddle_surjective' needs a 2-D grid")
    expand = float(params.get("expand", 2.0))
    lo_x, hi_x = space.lower[0], space.upper[0]
    lo_y, hi_y = space.lower[1], space.upper[1]
    if abs(lo_y + hi_y) > 1e-12:
        raise ValueError("sampler 'saddle_surjective' needs a y-symmetric box")
    pivot = 2.0 * hi_y / 3.0

    def pin(y: float) -> float:
        if y > pivot:
            return 2.0 * y - hi_y
        if y < -pivot:
            return 2.0 * y + hi_y
        return 0.5 * y

    def point_map(p: Sequence[float]) -> Tuple[float, ...]:
        return (_clamp(expand * p[0], lo_x, hi_x), pin(p[1]))

    return point_map


SAMPLERS: Dict[str, Callable[[GridSpace, Mapping], PointMap]] = {
    "double": double_map,
    "saddle": saddle_map,
    "saddle_surjective": saddle_surjective_map,
}


def get_sampler(name: str, space: GridSpace, params: Mapping) -> PointMap:
    try:
        factory = SAMPLERS[name]
    except KeyError:
        known = ", ".join(sorted(SAMPLERS))
        raise ValueError(f"unknown sampler id '{name}' (known: {known})") from None
    return factory(space, params)
