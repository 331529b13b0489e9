"""Grid specifications for certification scans.

A grid is a product of per-axis node lists. Each axis is either an
explicit list of nodes or a uniform count over the domain box; the
``include`` lists inject exact coordinates (guard surfaces like ``+/-1``,
annulus radii) that uniform spacing would miss. Guard comparisons are
exact, so guard-surface nodes must be supplied verbatim here; they are
merged and deduplicated by exact float equality and therefore survive
into the final node lists unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .intervals import IntervalBox

__all__ = ["GridSpec"]


@dataclass(frozen=True)
class GridSpec:
    axes: tuple  # per axis: int count or tuple of explicit nodes
    include: tuple[tuple[float, ...], ...]
    time_nodes: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        if len(self.axes) != len(self.include):
            raise SchemaError("grid include lists must match axis count")
        for ax in self.axes:
            if isinstance(ax, int):
                if ax < 2:
                    raise SchemaError("uniform axis counts must be >= 2")
            elif not ax:
                raise SchemaError("explicit axis node lists must be nonempty")
        if not self.time_nodes:
            raise SchemaError("time node list must be nonempty")

    @property
    def dims(self) -> int:
        return len(self.axes)

    def axis_nodes(self, domain: IntervalBox,
                   extra: tuple[tuple[float, ...], ...] | None = None,
                   ) -> tuple[tuple[float, ...], ...]:
        """Sorted, deduplicated node list per axis.

        ``extra`` appends further exact coordinates per axis (used by the
        annulus grids to pin the radii).
        """
        if domain.dims != self.dims:
            raise SchemaError(
                f"grid has {self.dims} axes but domain has {domain.dims}")
        out = []
        for i, ax in enumerate(self.axes):
            if isinstance(ax, int):
                iv = domain.axes[i]
                base = [float(v) for v in np.linspace(iv.lo, iv.hi, ax)]
            else:
                base = [float(v) for v in ax]
            merged = set(base)
            merged.update(float(v) for v in self.include[i])
            if extra is not None:
                merged.update(float(v) for v in extra[i])
            out.append(tuple(sorted(merged)))
        return tuple(out)

    def nodes(self, domain: IntervalBox,
              extra: tuple[tuple[float, ...], ...] | None = None,
              ) -> list[tuple[float, ...]]:
        """All grid points in row-major (lexicographic) order."""
        return list(itertools.product(*self.axis_nodes(domain, extra)))

    def refined(self, factor: int) -> GridSpec:
        """A grid ``factor`` times finer that keeps every existing node."""
        if factor < 1:
            raise SchemaError("refinement factor must be >= 1")
        axes = []
        for ax in self.axes:
            if isinstance(ax, int):
                axes.append((ax - 1) * factor + 1)
            else:
                nodes = [float(ax[0])]
                for a, b in zip(ax, ax[1:]):
                    nodes.extend(a + k * (b - a) / factor
                                 for k in range(1, factor))
                    nodes.append(float(b))
                axes.append(tuple(nodes))
        return GridSpec(tuple(axes), self.include, self.time_nodes)

    def with_uniform_counts(self, count: int) -> GridSpec:
        """Replace every axis with a uniform count (includes are kept)."""
        return GridSpec((count,) * self.dims, self.include, self.time_nodes)

    def summary(self, domain: IntervalBox) -> dict:
        nodes = self.axis_nodes(domain)
        return {
            "axis_node_counts": [len(a) for a in nodes],
            "total_nodes": int(np.prod([len(a) for a in nodes])),
            "time_nodes": list(self.time_nodes),
        }
