"""Seeded random body corpora for tests and batch verification."""

from __future__ import annotations

from typing import List

import numpy as np

from .bodies import VPolytope, vpolytope
from .errors import DegenerateBody

__all__ = ["random_hull", "corpus"]


def random_hull(
    rng: np.random.Generator,
    n: int = 2,
    n_points: int = 12,
    min_vertices: int = 5,
    max_vertices: int = 12,
    shift_scale: float = 0.6,
) -> VPolytope:
    """Random full-dimensional hull with a vertex count in the given range.

    Points are anisotropically scaled Gaussians with a random shift, so the
    bodies are deliberately not centered at the origin.
    """
    for _ in range(1000):
        pts = rng.normal(size=(n_points, n)) * rng.uniform(0.5, 1.6, size=n)
        pts += rng.normal(scale=shift_scale, size=n)
        try:
            K = vpolytope(pts)
        except DegenerateBody:
            continue
        if min_vertices <= len(K.vertices) <= max_vertices:
            return K
    raise RuntimeError("could not generate a hull with the requested vertex count")


def corpus(seed: int, count: int = 25, n: int = 2, **kwargs) -> List[VPolytope]:
    rng = np.random.default_rng(seed)
    return [random_hull(rng, n=n, **kwargs) for _ in range(count)]
