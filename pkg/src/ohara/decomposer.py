"""Cutting a box into translated pieces that reassemble another box.

For a cycle system with rational sides, clearing denominators gives an
integer system whose map is constant on every unit cell, so each cell moves
by ``ψ(t) − t``.  Cells with the same translation are then merged.  In two
dimensions Euclid's algorithm gives a direct cut into squares.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ohara.cycles import CycleSystem
from ohara.errors import DomainError, InvariantError
from ohara.kernels import grid_run
from ohara.partitions import Box, exact, fraction_str, rvec


@dataclass(frozen=True)
class Piece:
    anchor: tuple
    sides: tuple
    translation: tuple

    @property
    def box(self) -> Box:
        return Box(self.sides, self.anchor)

    def moved(self) -> Box:
        return Box(self.sides, tuple(exact(x + v) for x, v in zip(self.anchor, self.translation)))


@dataclass(frozen=True)
class Decomposition:
    functional: tuple
    source: Box
    target: Box
    pieces: tuple

    def __len__(self):
        return len(self.pieces)

    def to_json(self) -> dict:
        def enc(v):
            return [fraction_str(x) for x in v]

        return {
            "functional": enc(self.functional),
            "source": enc(self.source.sides),
            "target": enc(self.target.sides),
            "pieces": [
                {"anchor": enc(p.anchor), "sides": enc(p.sides), "translation": enc(p.translation)}
                for p in self.pieces
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Decomposition":
        try:
            return cls(
                rvec(obj["functional"]),
                Box(rvec(obj["source"])),
                Box(rvec(obj["target"])),
                tuple(
                    Piece(rvec(p["anchor"]), rvec(p["sides"]), rvec(p["translation"])) for p in obj["pieces"]
                ),
            )
        except (KeyError, TypeError) as exc:
            raise DomainError(f"bad decomposition JSON: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


# --------------------------------------------------------------------------
# construction


def decompose(sys: CycleSystem, *, merge: bool = True) -> Decomposition:
    """Unit-cell decomposition of ``R(a)`` onto ``R(b)``, merged unless ``merge=False``."""
    lam, scaled = sys.scaled()
    T, S, _ = grid_run(scaled)
    D = S - T
    side = tuple(exact(Fraction(1, lam)) for _ in range(sys.m))
    pieces = []
    for t, v in zip(T.tolist(), D.tolist()):
        pieces.append(
            Piece(
                tuple(exact(Fraction(int(x), lam)) for x in t),
                side,
                tuple(exact(Fraction(int(x), lam)) for x in v),
            )
        )
    d = Decomposition(sys.i, sys.source, sys.target, tuple(pieces))
    return merge_pieces(d) if merge else d


def euclid_decompose(a, b) -> Decomposition:
    """Squares of Euclid's algorithm taking ``R(a, b)`` onto ``R(b, a)``."""
    a, b = exact(a), exact(b)
    if a <= 0 or b <= 0:
        raise DomainError("Euclid sides must be positive")
    pieces = []
    # source rectangle at (X, Y) of width w, height h; its image slot at (x, y) is h wide, w high
    X = Y = x = y = 0
    w, h = a, b
    while w and h:
        if h >= w:
            q = int(h // w)
            for j in range(q):
                pieces.append(Piece((X, Y + j * w), (w, w), (x + j * w - X, y - Y - j * w)))
            Y, x, h = Y + q * w, x + q * w, h - q * w
        else:
            q = int(w // h)
            for j in range(q):
                pieces.append(Piece((X + j * h, Y), (h, h), (x - X - j * h, y + j * h - Y)))
            X, y, w = X + q * h, y + q * h, w - q * h
    pieces = [Piece(rvec(p.anchor), rvec(p.sides), rvec(p.translation)) for p in pieces]
    return Decomposition((1, 1), Box((a, b)), Box((b, a)), tuple(pieces))


def continued_fraction(x) -> list:
    """Quotients of the continued fraction of a positive rational."""
    q = Fraction(x)
    out = []
    while True:
        whole = q.numerator // q.denominator
        out.append(whole)
        frac = q - whole
        if frac == 0:
            return out
        q = 1 / frac


# --------------------------------------------------------------------------
# merging


def _merge_axis(pieces: list, axis: int) -> list:
    groups: dict = {}
    for p in pieces:
        key = (
            p.translation,
            p.anchor[:axis] + p.anchor[axis + 1 :],
            p.sides[:axis] + p.sides[axis + 1 :],
        )
        groups.setdefault(key, []).append(p)
    out = []
    for key in sorted(groups, key=lambda k: tuple(map(Fraction, k[1] + k[2] + k[0]))):
        run = sorted(groups[key], key=lambda p: p.anchor[axis])
        cur = run[0]
        for p in run[1:]:
            if cur.anchor[axis] + cur.sides[axis] == p.anchor[axis]:
                sides = list(cur.sides)
                sides[axis] = exact(sides[axis] + p.sides[axis])
                cur = Piece(cur.anchor, tuple(sides), cur.translation)
            else:
                out.append(cur)
                cur = p
        out.append(cur)
    return out


def merge_pieces(d: Decomposition) -> Decomposition:
    """Join adjacent pieces sharing a translation, axis by axis, until nothing changes."""
    pieces = list(d.pieces)
    if not pieces:
        return d
    m = len(pieces[0].anchor)
    while True:
        before = len(pieces)
        for axis in range(m):
            pieces = _merge_axis(pieces, axis)
        if len(pieces) == before:
            break
    pieces.sort(key=lambda p: tuple(map(Fraction, p.anchor)))
    return Decomposition(d.functional, d.source, d.target, tuple(pieces))


# --------------------------------------------------------------------------
# validation


def _overlap(b1: Box, b2: Box) -> bool:
    return all(l1 < u2 and l2 < u1 for l1, u1, l2, u2 in zip(b1.anchor, b1.upper, b2.anchor, b2.upper))


def _first_overlap(boxes: list):
    order = sorted(range(len(boxes)), key=lambda k: boxes[k].anchor[0])
    active: list = []
    for k in order:
        bx = boxes[k]
        lo = bx.anchor[0]
        active = [q for q in active if boxes[q].upper[0] > lo]
        for q in active:
            if _overlap(boxes[q], bx):
                return q, k
        active.append(k)
    return None


def _inside(inner: Box, outer: Box) -> bool:
    return all(lo >= 0 and hi <= s for lo, hi, s in zip(inner.anchor, inner.upper, outer.sides))


def check_decomposition(d: Decomposition) -> None:
    """Raise :class:`InvariantError` unless ``d`` tiles source and target exactly."""
    if not d.pieces:
        raise InvariantError("decomposition has no pieces")
    if d.source.volume != d.target.volume:
        raise InvariantError("source and target volumes differ")
    for side, boxes, whole in (
        ("source", [p.box for p in d.pieces], d.source),
        ("target", [p.moved() for p in d.pieces], d.target),
    ):
        total = sum(Fraction(bx.volume) for bx in boxes)
        if total != whole.volume:
            raise InvariantError(f"{side} pieces have volume {total}, expected {whole.volume}")
        for bx in boxes:
            if not _inside(bx, whole):
                raise InvariantError(f"{side} piece {bx} sticks out of the box")
        hit = _first_overlap(boxes)
        if hit is not None:
            raise InvariantError(f"{side} pieces {hit[0]} and {hit[1]} overlap")
    for p in d.pieces:
        if sum(Fraction(c) * v for c, v in zip(d.functional, p.translation)) != 0:
            raise InvariantError(f"translation {p.translation} is off the hyperplane")


def is_valid(d: Decomposition) -> bool:
    try:
        check_decomposition(d)
    except InvariantError:
        return False
    return True


def check_against_map(d: Decomposition, sys: CycleSystem) -> None:
    """Every integer point ``t`` of the source lies in a piece moving by ``ψ(t) − t``."""
    if not sys.is_integer:
        raise DomainError("integer-point comparison needs integer sides")
    T, S, _ = grid_run(sys)
    expected = {tuple(t): tuple(v) for t, v in zip(T.tolist(), (S - T).tolist())}
    seen = 0
    for p in d.pieces:
        for t in p.box.integer_points():
            seen += 1
            if expected.get(tuple(t)) != tuple(p.translation):
                raise InvariantError(f"point {t}: piece moves by {p.translation}, map moves by {expected.get(tuple(t))}")
    if seen != len(expected):
        raise InvariantError(f"pieces cover {seen} integer points, box has {len(expected)}")


# --------------------------------------------------------------------------
# SVG


def _colour(translation: Sequence) -> str:
    digest = hashlib.sha1(",".join(fraction_str(x) for x in translation).encode()).digest()
    return f"hsl({digest[0] * 360 // 256},{55 + digest[1] % 30}%,{55 + digest[2] % 25}%)"


def to_svg(d: Decomposition, *, size: int = 320, gap: int = 40) -> str:
    """Source pieces on the left, translated pieces on the right, same colour per translation."""
    if d.source.dim != 2:
        raise DomainError(f"SVG export draws 2-D decompositions only, got dimension {d.source.dim}")
    extent = max(float(x) for x in d.source.sides + d.target.sides)
    scale = size / extent
    width = 2 * size + 3 * gap
    height = size + 2 * gap

    def rect(bx: Box, dx: float, colour: str) -> str:
        x0, y0 = (float(v) for v in bx.anchor)
        w, h = (float(v) for v in bx.sides)
        # y grows upwards in the box, downwards in SVG
        top = gap + size - (y0 + h) * scale
        return (
            f'<rect x="{dx + x0 * scale:.3f}" y="{top:.3f}" width="{w * scale:.3f}" '
            f'height="{h * scale:.3f}" fill="{colour}" stroke="black" stroke-width="0.5"/>'
        )

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    right = 2 * gap + size
    for p in d.pieces:
        colour = _colour(p.translation)
        lines.append(rect(p.box, gap, colour))
        lines.append(rect(p.moved(), right, colour))
    for bx, dx in ((d.source, gap), (d.target, right)):
        lines.append(rect(bx, dx, "none").replace('stroke-width="0.5"', 'stroke-width="2"'))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
