"""BV data on the boundary of a convex domain.

A datum ``g`` is stored as smooth pieces (constant or uniformly sampled)
partitioning ``[0, L)`` in arc length, plus a jump list. Its tangential
derivative is a signed measure (piecewise-constant density + atoms) that
feeds the transportation problem after quantization into balanced atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroMeasureError, ZeroVariationError
from .geometry import BoundaryPoint, ConvexDomain

_PARTITION_TOL = 1e-9


@dataclass(frozen=True)
class Piece:
    """One smooth piece of the datum on the arc interval [s0, s1).

    ``values`` is None for a constant piece; otherwise it holds samples at
    the uniform sub-grid s0 + j*(s1-s0)/(len(values)-1), j = 0..k, so the
    piece is evaluated by linear interpolation between samples.
    """

    s0: float
    s1: float
    value: float | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if (self.value is None) == (self.values is None):
            raise ValueError("piece needs exactly one of value/values")
        if self.values is not None:
            v = np.asarray(self.values, dtype=float)
            if v.ndim != 1 or len(v) < 2:
                raise ValueError("sampled piece needs >= 2 node values")
            object.__setattr__(self, "values", v)
        if not self.s1 > self.s0:
            raise ValueError("piece interval must have positive length")

    def left_value(self) -> float:
        return self.value if self.values is None else float(self.values[0])

    def right_value(self) -> float:
        return self.value if self.values is None else float(self.values[-1])

    def eval(self, s: float) -> float:
        if self.values is None:
            return self.value
        t = (s - self.s0) / (self.s1 - self.s0) * (len(self.values) - 1)
        j = min(int(t), len(self.values) - 2)
        return float(self.values[j] + (t - j) * (self.values[j + 1] - self.values[j]))

    def variation(self) -> float:
        if self.values is None:
            return 0.0
        return float(np.abs(np.diff(self.values)).sum())

    def integral(self, a: float, b: float) -> float:
        """Integral of the piece over [a, b] within [s0, s1]."""
        if self.values is None:
            return self.value * (b - a)
        k = len(self.values) - 1
        h = (self.s1 - self.s0) / k
        nodes = self.s0 + h * np.arange(k + 1)
        lo = np.clip(np.maximum(nodes[:-1], a), None, b)
        hi = np.clip(np.minimum(nodes[1:], b), a, None)
        w = np.maximum(hi - lo, 0.0)
        # trapezoid on each sub-interval, clipped to [a, b]
        t0 = (lo - nodes[:-1]) / h
        t1 = (hi - nodes[:-1]) / h
        v0 = self.values[:-1] + t0 * np.diff(self.values)
        v1 = self.values[:-1] + t1 * np.diff(self.values)
        return float(np.sum(0.5 * (v0 + v1) * w))

    def scaled(self, c: float) -> "Piece":
        if self.values is None:
            return Piece(self.s0, self.s1, value=self.value * c)
        return Piece(self.s0, self.s1, values=self.values * c)


@dataclass(frozen=True)
class JumpSpec:
    s: float
    left: float
    right: float

    @property
    def height(self) -> float:
        return self.right - self.left


class BoundaryBV:
    """A BV function on the boundary with the midpoint good representative."""

    def __init__(self, domain: ConvexDomain, pieces, jumps=()):
        L = domain.boundary_length
        pieces = sorted(pieces, key=lambda p: p.s0)
        if not pieces:
            raise ValueError("at least one piece required")
        if abs(pieces[0].s0) > _PARTITION_TOL:
            raise ValueError("pieces must start at arc length 0")
        for a, b in zip(pieces, pieces[1:]):
            if abs(a.s1 - b.s0) > _PARTITION_TOL:
                raise ValueError("pieces must partition [0, L) without gaps")
        if abs(pieces[-1].s1 - L) > _PARTITION_TOL:
            raise ValueError("pieces must end at the perimeter")
        endpoints = [p.s0 for p in pieces]
        for j in jumps:
            if min(abs((j.s - e) % L) if abs((j.s - e) % L) < L / 2
                   else L - abs((j.s - e) % L) for e in endpoints) > _PARTITION_TOL:
                raise ValueError(f"jump at s={j.s} is not at a piece endpoint")
        self.domain = domain
        self.pieces = tuple(pieces)
        self.jumps = tuple(sorted(jumps, key=lambda j: j.s % L))

    # --- evaluation -----------------------------------------------------

    def _piece_at(self, s: float) -> Piece:
        L = self.domain.boundary_length
        s = s % L
        for p in self.pieces:
            if p.s0 - _PARTITION_TOL <= s < p.s1 - _PARTITION_TOL:
                return p
        return self.pieces[-1]

    def value(self, s: float) -> float:
        """Good representative: mean of one-sided limits at jumps."""
        L = self.domain.boundary_length
        s = s % L
        for j in self.jumps:
            if abs(s - j.s % L) <= _PARTITION_TOL:
                return 0.5 * (j.left + j.right)
        return self._piece_at(s).eval(s)

    def mean(self, a: float, b: float) -> float:
        """Average of g over the arc [a, b] (no wrap, 0 <= a < b <= L)."""
        if not b > a:
            raise ValueError("empty arc")
        total = 0.0
        for p in self.pieces:
            lo, hi = max(p.s0, a), min(p.s1, b)
            if hi > lo + 1e-15:
                total += p.integral(lo, hi)
        return total / (b - a)

    # --- BV structure ---------------------------------------------------

    def total_variation(self) -> float:
        """One-dimensional total variation: jumps plus piecewise sums."""
        return sum(abs(j.height) for j in self.jumps) + sum(
            p.variation() for p in self.pieces
        )

    def tangential_derivative(self) -> "BoundaryMeasure":
        atoms = [(j.s % self.domain.boundary_length, j.height) for j in self.jumps]
        segments = []
        for p in self.pieces:
            if p.values is None:
                continue
            k = len(p.values) - 1
            h = (p.s1 - p.s0) / k
            dv = np.diff(p.values)
            for j in range(k):
                if dv[j] != 0.0:
                    segments.append((p.s0 + j * h, p.s0 + (j + 1) * h, dv[j] / h))
        return BoundaryMeasure(self.domain, atoms, segments)

    def scaled(self, c: float) -> "BoundaryBV":
        return BoundaryBV(
            self.domain,
            [p.scaled(c) for p in self.pieces],
            [JumpSpec(j.s, j.left * c, j.right * c) for j in self.jumps],
        )

    def rescale_to_tv(self, target_tv: float) -> "BoundaryBV":
        """Scale the datum so its total variation equals ``target_tv``."""
        tv = self.total_variation()
        if tv <= 0.0:
            raise ZeroVariationError("datum has zero total variation")
        return self.scaled(target_tv / tv)

    def to_json(self) -> dict:
        pieces = []
        for p in self.pieces:
            if p.values is None:
                pieces.append(
                    {"from": p.s0, "to": p.s1, "kind": "const", "value": p.value}
                )
            else:
                pieces.append(
                    {
                        "from": p.s0,
                        "to": p.s1,
                        "kind": "samples",
                        "values": list(map(float, p.values)),
                    }
                )
        jumps = [{"s": j.s, "left": j.left, "right": j.right} for j in self.jumps]
        return {"pieces": pieces, "jumps": jumps}

    @classmethod
    def from_json(cls, domain: ConvexDomain, spec: dict) -> "BoundaryBV":
        pieces = []
        for p in spec["pieces"]:
            if p["kind"] == "const":
                pieces.append(Piece(p["from"], p["to"], value=float(p["value"])))
            elif p["kind"] == "samples":
                pieces.append(
                    Piece(p["from"], p["to"], values=np.asarray(p["values"], float))
                )
            else:
                raise ValueError(f"unknown piece kind {p['kind']!r}")
        jumps = [JumpSpec(j["s"], j["left"], j["right"]) for j in spec.get("jumps", [])]
        return cls(domain, pieces, jumps)

    @classmethod
    def from_function(cls, domain: ConvexDomain, fn, n_samples: int = 720):
        """Sample a continuous function of arc length on a single piece."""
        L = domain.boundary_length
        ss = np.linspace(0.0, L, n_samples + 1)
        vals = np.array([fn(s) for s in ss])
        return cls(domain, [Piece(0.0, L, values=vals)])

    @classmethod
    def piecewise_constant(cls, domain: ConvexDomain, breaks, values):
        """Step datum: value ``values[i]`` on [breaks[i], breaks[i+1])."""
        L = domain.boundary_length
        breaks = [b % L for b in breaks]
        order = np.argsort(breaks)
        breaks = [breaks[i] for i in order]
        values = [values[i] for i in order]
        pieces, jumps = [], []
        n = len(breaks)
        if breaks[0] > _PARTITION_TOL:
            # arc before the first break carries the last value (wraps)
            breaks = [0.0] + breaks
            values = [values[-1]] + values
            n += 1
        for i in range(n):
            s0 = breaks[i]
            s1 = breaks[i + 1] if i + 1 < n else L
            if s1 > s0 + _PARTITION_TOL:
                pieces.append(Piece(s0, s1, value=float(values[i])))
        for i in range(len(pieces)):
            prev = pieces[i - 1]
            cur = pieces[i]
            if prev.value != cur.value:
                jumps.append(JumpSpec(cur.s0, prev.value, cur.value))
        return cls(domain, pieces, jumps)


class BoundaryMeasure:
    """Signed measure on the boundary: atoms + piecewise-constant density."""

    def __init__(self, domain, atoms, density_segments):
        self.domain = domain
        self.atoms = list(atoms)  # (s, signed mass)
        self.density_segments = list(density_segments)  # (s_a, s_b, value)

    def total_mass(self) -> float:
        """Signed total; zero for a tangential derivative."""
        return sum(m for _, m in self.atoms) + sum(
            v * (b - a) for a, b, v in self.density_segments
        )

    def total_variation(self) -> float:
        return sum(abs(m) for _, m in self.atoms) + sum(
            abs(v) * (b - a) for a, b, v in self.density_segments
        )


@dataclass(frozen=True)
class MassAtom:
    point: BoundaryPoint
    mass: float
    tag: str  # "atomic" | "diffuse"


@dataclass(frozen=True)
class BoundaryMeasurePair:
    """Balanced positive/negative atomic surrogate measures on the boundary."""

    positive: tuple[MassAtom, ...]
    negative: tuple[MassAtom, ...]

    @property
    def total_mass(self) -> float:
        return sum(a.mass for a in self.positive)

    def balance_residual(self) -> float:
        return abs(
            sum(a.mass for a in self.positive) - sum(a.mass for a in self.negative)
        )


def _sign_runs(segments):
    """Group contiguous density segments into maximal sign-constant runs."""
    runs = []
    cur = []
    cur_sign = 0
    for a, b, v in segments:
        sign = 1 if v > 0 else -1
        contiguous = cur and abs(cur[-1][1] - a) <= 1e-12
        if cur and (sign != cur_sign or not contiguous):
            runs.append(cur)
            cur = []
        cur_sign = sign
        cur.append((a, b, v))
    if cur:
        runs.append(cur)
    return runs


def discretize(
    f: BoundaryMeasure, n_diffuse: int, drop_tol: float = 1e-14
) -> BoundaryMeasurePair:
    """Quantize a balanced boundary measure into a balanced atom pair.

    Exact atoms pass through verbatim (tag "atomic"). Each maximal
    sign-constant run of the density is split into ``n_diffuse`` equal
    arc-length cells; each cell is lumped to a single atom at its mass
    centroid (tag "diffuse"). A final balance correction no larger than
    1e-12 of the total is applied to the largest atom.
    """
    if n_diffuse < 1:
        raise ValueError("n_diffuse must be >= 1")
    total = f.total_variation()
    if total <= 0.0:
        raise ZeroMeasureError("measure is identically zero")
    domain = f.domain

    pos, neg = [], []

    def emit(s, mass, tag):
        atom = MassAtom(domain.boundary_param(s), abs(mass), tag)
        (pos if mass > 0 else neg).append(atom)

    for s, m in f.atoms:
        if abs(m) > 0.0:
            emit(s, m, "atomic")

    atom_locs = {round(s, 12) for s, m in f.atoms if abs(m) > 0.0}
    for run in _sign_runs(f.density_segments):
        a0, b0 = run[0][0], run[-1][1]
        edges = np.linspace(a0, b0, n_diffuse + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            mass = 0.0
            moment = 0.0
            for a, b, v in run:
                la, hb = max(a, lo), min(b, hi)
                if hb > la:
                    mass += v * (hb - la)
                    moment += v * 0.5 * (hb * hb - la * la)
            if abs(mass) < drop_tol * total:
                continue
            centroid = moment / mass
            if round(centroid, 12) in atom_locs:
                # keep diffuse and atomic supports disjoint
                centroid += (hi - lo) * 1e-9
            emit(centroid, mass, "diffuse")

    if not pos or not neg:
        raise ZeroMeasureError("measure quantized to a single-signed set")

    mp = sum(a.mass for a in pos)
    mn = sum(a.mass for a in neg)
    if abs(mp - mn) > 1e-12 * max(mp, mn):
        raise ValueError(
            f"measure does not balance: positive {mp} vs negative {mn}"
        )
    # exact balance correction on the largest positive atom
    if mp != mn:
        k = max(range(len(pos)), key=lambda i: pos[i].mass)
        pos[k] = MassAtom(pos[k].point, pos[k].mass + (mn - mp), pos[k].tag)

    return BoundaryMeasurePair(tuple(pos), tuple(neg))
