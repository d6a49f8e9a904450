"""Free-group words and their evaluation in PSL(2,R) and its cover.

A word is a tuple of nonzero integers: letter i stands for the i-th generator
(1-based) and -i for its inverse.  Substitution tables convert between the
crosscap presentation <a_1 ... a_k | a_1^2 ... a_k^2> of a closed
non-orientable surface of genus 3 or 4 and the crosscap-plus-handle form
(<A, X, Y | A^2 [X,Y]> resp. <Ah, A, X, Y | Ah^2 A^2 [X,Y]>); both relators
agree up to an explicit conjugator, so all class computations transport.
"""
from __future__ import annotations

import math
from typing import Dict, Sequence, Tuple

from . import cover, sl2

Word = Tuple[int, ...]


def reduce_word(word: Sequence[int]) -> Word:
    """Free reduction: cancel adjacent inverse letters."""
    out: list[int] = []
    for x in word:
        if x == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse_word(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def concat(*parts: Sequence[int]) -> Word:
    out: list[int] = []
    for p in parts:
        out.extend(p)
    return reduce_word(out)


def conjugate_word(w: Sequence[int], word: Sequence[int]) -> Word:
    """w word w^{-1}, reduced."""
    return concat(w, word, inverse_word(w))


def substitute(word: Sequence[int], table: Dict[int, Word]) -> Word:
    """Rewrite each letter by its word in the table (inverses handled)."""
    out: list[int] = []
    for x in word:
        rep = table[abs(x)]
        out.extend(rep if x > 0 else inverse_word(rep))
    return reduce_word(out)


def evaluate_proj(word: Sequence[int], images) -> sl2.ProjectiveIsometry:
    """Evaluate a word on projective images (1-based, left to right)."""
    acc = sl2.PROJ_IDENTITY
    for x in word:
        g = images[abs(x) - 1]
        acc = sl2.proj_multiply(acc, g if x > 0 else sl2.proj_invert(g))
    return acc


def exact_entries(m) -> tuple:
    """Integer-mantissa form of a matrix: four ints with a shared scale.

    The scale itself is dropped: it only multiplies the matrix by a
    positive constant, which projectivization removes.
    """
    import math

    parts = []
    for v in (m.a, m.b, m.c, m.d):
        if v == 0.0:
            parts.append((0, 0))
            continue
        fm, fe = math.frexp(v)
        parts.append((int(fm * (1 << 53)), fe - 53))
    emin = min(e for _, e in parts)
    return tuple(n << (e - emin) for n, e in parts)


def exact_multiply(p: tuple, q: tuple) -> tuple:
    """Product of two integer-mantissa matrices, truncated to 192 bits.

    Integer products never lose the determinant to cancellation the way
    floating renormalization chains do, so long words on large group
    elements stay accurate.
    """
    a = (p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3],
         p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3])
    s = max(abs(v) for v in a).bit_length() - 192
    if s > 0:
        a = tuple(v >> s for v in a)
    return a


def exact_to_proj(p: tuple) -> sl2.ProjectiveIsometry:
    # Normalize with the exact integer determinant: the float determinant of
    # the rounded entries cancels catastrophically when the matrix is large
    # and nearly proportional to a projection.
    det = p[0] * p[3] - p[1] * p[2]
    if det <= 0:
        raise sl2.NonPositiveDeterminant(f"determinant {det} is not positive")
    s = max(abs(v) for v in p).bit_length() - 53
    if s > 0:
        d = det >> (2 * s)
        if d <= 0:
            raise sl2.NonPositiveDeterminant(
                "determinant vanishes at working precision")
        scale = float(d) ** -0.5
        entries = tuple(float(v >> s) * scale for v in p)
    else:
        scale = float(det) ** -0.5
        entries = tuple(float(v) * scale for v in p)
    return sl2.projectivize(sl2.UnitDetMatrix(*entries))


def evaluate_exact(word: Sequence[int], images) -> sl2.ProjectiveIsometry:
    """Evaluate a word on projective images in integer-mantissa arithmetic,
    rounding to floating point once at the end."""
    acc = (1, 0, 0, 1)
    for x in word:
        m = images[abs(x) - 1].rep
        e = exact_entries(m)
        if x < 0:
            e = (e[3], -e[1], -e[2], e[0])
        acc = exact_multiply(acc, e)
    return exact_to_proj(acc)


def evaluate_cover(word: Sequence[int], lifts) -> cover.CoverElement:
    """Evaluate a word on cover-element images (1-based, left to right)."""
    acc = cover.COVER_IDENTITY
    for x in word:
        g = lifts[abs(x) - 1]
        acc = cover.cover_mul(acc, g if x > 0 else cover.cover_inv(g))
    return acc


# --- genus 3: <a,b,c | a^2 b^2 c^2>  <->  <A,X,Y | A^2 [X,Y]> ---------------
# A = abc, X = ca, Y = ab; then A^2 [X,Y] = w (a^2 b^2 c^2) w^{-1} with the
# conjugator w = a b c a b^{-1} a^{-1} a^{-1}.

GENUS3_TO_MIXED: Dict[int, Word] = {
    1: (1, 2, 3),    # A
    2: (3, 1),       # X
    3: (1, 2),       # Y
}
GENUS3_FROM_MIXED: Dict[int, Word] = {
    1: (-1, 3, 2),       # a = A^{-1} Y X
    2: (-2, -3, 1, 3),   # b = X^{-1} Y^{-1} A Y
    3: (-3, 1),          # c = Y^{-1} A
}
GENUS3_CONJUGATOR: Word = (1, 2, 3, 1, -2, -1, -1)

# --- genus 4: <a1..a4 | a1^2..a4^2>  <->  <Ah,A,X,Y | Ah^2 A^2 [X,Y]> -------
# The genus-3 substitution applied to (a2, a3, a4) handles the last three
# crosscaps; the first is dragged along by the same conjugator:
# Ah = w a1 w^{-1} with w = a2 a3 a4 a2 a3^{-1} a2^{-1} a2^{-1}, and then
# Ah^2 A^2 [X,Y] = w (a1^2 a2^2 a3^2 a4^2) w^{-1} exactly.

_W4: Word = (2, 3, 4, 2, -3, -2, -2)
GENUS4_TO_MIXED: Dict[int, Word] = {
    1: conjugate_word(_W4, (1,)),   # Ah
    2: (2, 3, 4),                   # A
    3: (4, 2),                      # X
    4: (2, 3),                      # Y
}
# inverses of the genus-3 formulas on letters (A, X, Y) = (2, 3, 4)
_A2: Word = (-2, 4, 3)
_A3: Word = (-3, -4, 2, 4)
_A4: Word = (-4, 2)
_W4_MIXED: Word = concat(_A2, _A3, _A4, _A2, inverse_word(_A3),
                         inverse_word(_A2), inverse_word(_A2))
GENUS4_FROM_MIXED: Dict[int, Word] = {
    1: concat(inverse_word(_W4_MIXED), (1,), _W4_MIXED),  # a1 = w^{-1} Ah w
    2: _A2,
    3: _A3,
    4: _A4,
}
GENUS4_CONJUGATOR: Word = _W4


def relator_word(crosscaps: int, handles: int, boundary: int) -> Word:
    """a_1^2 ... a_c^2 [x_1,y_1] ... [x_h,y_h] c_1 ... c_m as a word."""
    out: list[int] = []
    g = 0
    for _ in range(crosscaps):
        g += 1
        out.extend((g, g))
    for _ in range(handles):
        x, y = g + 1, g + 2
        g += 2
        out.extend((x, y, -x, -y))
    for _ in range(boundary):
        g += 1
        out.append(g)
    return tuple(out)
