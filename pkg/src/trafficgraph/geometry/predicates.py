"""Sign-exact orientation and incircle tests.

Both predicates first evaluate a floating-point expression with a forward
error bound; only when the result is too close to zero to trust do they
fall back to exact rational arithmetic.  Every float converts to a
Fraction without rounding, so the fallback is infallible.

``incircle_ranked`` additionally breaks exact cocircular ties by a
symbolic perturbation: point ``i`` is lifted to ``x^2 + y^2 - eps^(rank_i+1)``
for an infinitesimal eps, so the lowest-ranked point with a nonzero
cofactor decides the sign.  Ranks must be distinct per point; callers key
them on a canonical ordering so the result does not depend on how the
input happened to be permuted.
"""
from __future__ import annotations

from fractions import Fraction

__all__ = ["orient2d", "incircle", "incircle_ranked"]

_EPS = 2.0**-53
_ORIENT_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_INCIRCLE_BOUND = (10.0 + 96.0 * _EPS) * _EPS


def _sign(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def orient2d(pa, pb, pc) -> int:
    """Sign of the signed area of triangle (pa, pb, pc).

    +1 when the triangle winds counter-clockwise, -1 clockwise, 0 when
    the three points are exactly collinear.
    """
    detleft = (pa[0] - pc[0]) * (pb[1] - pc[1])
    detright = (pa[1] - pc[1]) * (pb[0] - pc[0])
    det = detleft - detright
    detsum = abs(detleft) + abs(detright)
    if abs(det) > _ORIENT_BOUND * detsum:
        return 1 if det > 0.0 else -1
    return _orient2d_exact(pa, pb, pc)


def _orient2d_exact(pa, pb, pc) -> int:
    acx = Fraction(float(pa[0])) - Fraction(float(pc[0]))
    acy = Fraction(float(pa[1])) - Fraction(float(pc[1]))
    bcx = Fraction(float(pb[0])) - Fraction(float(pc[0]))
    bcy = Fraction(float(pb[1])) - Fraction(float(pc[1]))
    return _sign(acx * bcy - acy * bcx)


def incircle(pa, pb, pc, pd) -> int:
    """Sign of the incircle determinant for triangle (pa, pb, pc) and pd.

    With (pa, pb, pc) in counter-clockwise order: +1 when pd lies strictly
    inside their circumcircle, -1 strictly outside, 0 exactly on it.
    """
    adx = pa[0] - pd[0]
    ady = pa[1] - pd[1]
    bdx = pb[0] - pd[0]
    bdy = pb[1] - pd[1]
    cdx = pc[0] - pd[0]
    cdy = pc[1] - pd[1]

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady
    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = (
        alift * (bdxcdy - cdxbdy)
        + blift * (cdxady - adxcdy)
        + clift * (adxbdy - bdxady)
    )
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * alift
        + (abs(cdxady) + abs(adxcdy)) * blift
        + (abs(adxbdy) + abs(bdxady)) * clift
    )
    if abs(det) > _INCIRCLE_BOUND * permanent:
        return 1 if det > 0.0 else -1
    return _incircle_exact(pa, pb, pc, pd)


def _incircle_exact(pa, pb, pc, pd) -> int:
    dx = Fraction(float(pd[0]))
    dy = Fraction(float(pd[1]))
    rows = []
    for p in (pa, pb, pc):
        px = Fraction(float(p[0])) - dx
        py = Fraction(float(p[1])) - dy
        rows.append((px, py, px * px + py * py))
    (ax, ay, al), (bx, by, bl), (cx, cy, cl) = rows
    return _sign(
        al * (bx * cy - by * cx)
        - bl * (ax * cy - ay * cx)
        + cl * (ax * by - ay * bx)
    )


def incircle_ranked(pa, pb, pc, pd, ranks) -> int:
    """incircle with exact cocircular ties broken by symbolic perturbation.

    `ranks` assigns one distinct integer per argument point.  The return
    value is never 0 as long as (pa, pb, pc) are not collinear.
    """
    result = incircle(pa, pb, pc, pd)
    if result != 0:
        return result
    # Exactly cocircular.  Perturbing the lifted coordinate of point i by
    # -eps^(rank_i + 1) adds -eps_i * cofactor_i to the determinant; the
    # smallest rank carries the largest perturbation and wins.
    cofactors = (
        orient2d(pb, pc, pd),
        -orient2d(pa, pc, pd),
        orient2d(pa, pb, pd),
        -orient2d(pa, pb, pc),
    )
    for _, cof in sorted(zip(ranks, cofactors)):
        if cof != 0:
            return -cof
    return 0
