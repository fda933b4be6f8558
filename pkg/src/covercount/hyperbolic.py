"""Moebius-transformation geometry on the upper half plane H2 and half space H3.

Maps are unimodular 2x2 matrices over R (H2) or C (H3), identified
projectively with their negatives.  The base point is o = i in H2 and
o = j = (0, 1) in H3; all displacement values refer to it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import InitVar, dataclass
from enum import Enum

import numpy as np

from .errors import NotLoxodromic, PoleAtPoint

DET_TOL = 1e-12
CLASSIFY_TOL = 1e-10


class Model(str, Enum):
    H2 = "H2"  # upper half plane, real matrices
    H3 = "H3"  # upper half space, complex matrices


class ElementClass(str, Enum):
    IDENTITY = "Identity"
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    LOXODROMIC = "HyperbolicOrLoxodromic"


@dataclass(frozen=True)
class MoebiusMap:
    """Unimodular Moebius map; entries normalized to det = 1 on construction.

    Products of unimodular maps are unimodular by construction, and for large
    words recomputing ad - bc cancels catastrophically, so internal
    compositions pass normalize=False and keep the raw product entries.
    """

    a: complex
    b: complex
    c: complex
    d: complex
    model: Model = Model.H2
    normalize: InitVar[bool] = True

    def __post_init__(self, normalize: bool = True):
        a, b, c, d = (complex(self.a), complex(self.b),
                      complex(self.c), complex(self.d))
        if self.model == Model.H2:
            if max(abs(a.imag), abs(b.imag), abs(c.imag), abs(d.imag)) > DET_TOL:
                raise ValueError("H2 maps require real entries")
        if normalize:
            det = a * d - b * c
            if abs(det) < DET_TOL:
                raise ValueError("matrix is singular")
            if self.model == Model.H2 and det.real <= 0:
                raise ValueError("H2 maps require positive determinant")
            s = cmath.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @property
    def entries(self) -> tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    def trace(self) -> complex:
        return self.a + self.d

    def __call__(self, x: complex) -> complex:
        return apply_boundary(self, x)


def identity(model: Model = Model.H2) -> MoebiusMap:
    return MoebiusMap(1, 0, 0, 1, model)


def compose(g: MoebiusMap, h: MoebiusMap) -> MoebiusMap:
    """Matrix product g @ h, renormalized to det 1."""
    if g.model != h.model:
        raise ValueError("cannot compose maps of different models")
    a = g.a * h.a + g.b * h.c
    b = g.a * h.b + g.b * h.d
    c = g.c * h.a + g.d * h.c
    d = g.c * h.b + g.d * h.d
    return MoebiusMap(a, b, c, d, g.model, normalize=False)


def inverse(g: MoebiusMap) -> MoebiusMap:
    return MoebiusMap(g.d, -g.b, -g.c, g.a, g.model, normalize=False)


def power(g: MoebiusMap, k: int) -> MoebiusMap:
    if k < 0:
        return power(inverse(g), -k)
    out = identity(g.model)
    for _ in range(k):
        out = compose(out, g)
    return out


def projectively_equal(g: MoebiusMap, h: MoebiusMap, tol: float = 1e-9) -> bool:
    """g and -g represent the same map."""
    if g.model != h.model:
        return False
    dplus = max(abs(x - y) for x, y in zip(g.entries, h.entries))
    dminus = max(abs(x + y) for x, y in zip(g.entries, h.entries))
    return min(dplus, dminus) <= tol


def apply_boundary(g: MoebiusMap, x: complex) -> complex:
    """Action on the boundary (R for H2, C for H3).  Raises at the pole."""
    den = g.c * x + g.d
    if abs(den) < 1e-14 * (1.0 + abs(x)):
        raise PoleAtPoint(f"{x} is the pole of the map")
    return (g.a * x + g.b) / den


def apply_halfspace(g: MoebiusMap, z: complex, t: float) -> tuple[complex, float]:
    """Action on an interior point (z, t), t > 0; H2 points have real z."""
    cz_d = g.c * z + g.d
    den = abs(cz_d) ** 2 + abs(g.c) ** 2 * t * t
    znew = ((g.a * z + g.b) * cz_d.conjugate() + g.a * g.c.conjugate() * t * t) / den
    return znew, t / den


def basepoint(model: Model) -> tuple[complex, float]:
    return 0j, 1.0


def point_distance(z1: complex, t1: float, z2: complex, t2: float) -> float:
    ch = 1.0 + (abs(z1 - z2) ** 2 + (t1 - t2) ** 2) / (2.0 * t1 * t2)
    return math.acosh(max(ch, 1.0))


def displacement(g: MoebiusMap) -> float:
    """Hyperbolic distance d(o, g o).

    Equal to acosh(||g||_F^2 / 2); the Frobenius norm is invariant under the
    stabilizer of o on both sides, so this matches the moved-point formula.
    """
    frob2 = abs(g.a) ** 2 + abs(g.b) ** 2 + abs(g.c) ** 2 + abs(g.d) ** 2
    return math.acosh(max(frob2 / 2.0, 1.0))


def displacement_moved_point(g: MoebiusMap) -> float:
    """d(o, g o) via the explicit orbit point; cross-check for displacement()."""
    z, t = apply_halfspace(g, *basepoint(g.model))
    return point_distance(0j, 1.0, z, t)


def classify(g: MoebiusMap, tol: float = CLASSIFY_TOL) -> ElementClass:
    if max(abs(g.b), abs(g.c), abs(g.a - g.d)) <= tol:
        return ElementClass.IDENTITY
    tr2 = g.trace() ** 2
    if abs(tr2 - 4.0) <= tol:
        return ElementClass.PARABOLIC
    if abs(tr2.imag) <= tol and -tol < tr2.real < 4.0:
        return ElementClass.ELLIPTIC
    return ElementClass.LOXODROMIC


@dataclass(frozen=True)
class GeodesicInvariants:
    """Translation length and holonomy angle of a loxodromic element."""

    length: float
    holonomy_angle: float = 0.0


def _wrap_angle(theta: float) -> float:
    out = math.fmod(theta, 2.0 * math.pi)
    if out > math.pi:
        out -= 2.0 * math.pi
    elif out <= -math.pi:
        out += 2.0 * math.pi
    return out


def geodesic_invariants(g: MoebiusMap) -> GeodesicInvariants:
    """Solve trace = +-2 cosh((l + i theta)/2); theta = 0 in the H2 model."""
    if classify(g) != ElementClass.LOXODROMIC:
        raise NotLoxodromic(f"element classifies as {classify(g).value}")
    tr = g.trace()
    disc = cmath.sqrt(tr * tr - 4.0)
    lam = (tr + disc) / 2.0
    if abs(lam) < 1.0:
        lam = (tr - disc) / 2.0
    length = 2.0 * math.log(abs(lam))
    if g.model == Model.H2:
        return GeodesicInvariants(length, 0.0)
    return GeodesicInvariants(length, _wrap_angle(2.0 * cmath.phase(lam)))


def boundary_derivative(g: MoebiusMap, x: complex) -> float:
    """|g'(x)| = 1/|c x + d|^2 on the boundary."""
    den = g.c * x + g.d
    if abs(den) < 1e-14 * (1.0 + abs(x)):
        raise PoleAtPoint(f"{x} is the pole of the map")
    return 1.0 / abs(den) ** 2


def boundary_derivative_complex(g: MoebiusMap, x: complex) -> complex:
    """g'(x) = 1/(c x + d)^2 with phase; the phase drives the holonomy cocycle."""
    den = g.c * x + g.d
    if abs(den) < 1e-14 * (1.0 + abs(x)):
        raise PoleAtPoint(f"{x} is the pole of the map")
    return 1.0 / (den * den)


def fixed_points(g: MoebiusMap) -> tuple[complex, complex]:
    """(attracting, repelling) boundary fixed points of a loxodromic map."""
    if classify(g) != ElementClass.LOXODROMIC:
        raise NotLoxodromic("fixed points on the boundary require a loxodromic map")
    if abs(g.c) < 1e-14:
        # one fixed point at infinity; the finite one solves (d-a)z = b
        zfin = g.b / (g.a - g.d)
        if abs(g.a) > abs(g.d):
            return complex("inf"), zfin
        return zfin, complex("inf")
    # roots of c z^2 + (d - a) z - b, with the cancellation-free split
    beta = g.d - g.a
    disc = cmath.sqrt(beta * beta + 4.0 * g.b * g.c)
    if abs(beta - disc) > abs(beta + disc):
        q = -0.5 * (beta - disc)
    else:
        q = -0.5 * (beta + disc)
    z1 = q / g.c
    z2 = -g.b / q if abs(q) > 0 else (g.a - g.d - (z1 * g.c)) / g.c
    if abs(g.c * z1 + g.d) >= 1.0:
        return z1, z2
    return z2, z1


def translation(t: float, model: Model = Model.H2) -> MoebiusMap:
    """a_t = diag(e^{t/2}, e^{-t/2}), translation length t along the o-axis."""
    return MoebiusMap(math.exp(t / 2.0), 0, 0, math.exp(-t / 2.0), model)


def rotation(alpha: float) -> MoebiusMap:
    """Rotation by alpha about o = i in the H2 model."""
    ca, sa = math.cos(alpha / 2.0), math.sin(alpha / 2.0)
    return MoebiusMap(ca, sa, -sa, ca, Model.H2)


# Adjoint representation into SO(2,1): row vectors (A, B, C) are binary
# quadratic forms A x^2 + B xy + C y^2; precomposition with g acts on the
# right and preserves the discriminant, a signature (2,1) form.


def adjoint_so21(g: MoebiusMap) -> np.ndarray:
    if g.model != Model.H2:
        raise ValueError("adjoint_so21 is defined for the H2 model only")
    a, b, c, d = (g.a.real, g.b.real, g.c.real, g.d.real)
    return np.array(
        [
            [a * a, 2 * a * b, b * b],
            [a * c, a * d + b * c, b * d],
            [c * c, 2 * c * d, d * d],
        ]
    )


def so21_form(v) -> float:
    """Q(v) = v1^2 - 4 v0 v2, the discriminant preserved by v -> v @ adjoint."""
    return float(v[1] * v[1] - 4.0 * v[0] * v[2])


def to_json(g: MoebiusMap) -> dict:
    return {
        "model": g.model.value,
        "entries": [[x.real, x.imag] for x in g.entries],
    }


def from_json(data: dict) -> MoebiusMap:
    model = Model(data["model"])
    a, b, c, d = (complex(re, im) for re, im in data["entries"])
    return MoebiusMap(a, b, c, d, model)
