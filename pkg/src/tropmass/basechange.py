"""Exact arithmetic of finite base change on skeleta and their measures.

Pulling a degeneration back along ``t = s^m`` multiplies multiplicities and
twist weights in a controlled way: a face with multiplicity ``b_sigma``
splits into ``g`` faces upstairs, each mapping with degree ``f`` onto the
source (``f * g = gcd(m, b_sigma)``), the upstairs multiplicity drops to
``b_sigma / gcd(m, b_sigma)``, lattice volumes scale by ``m^dim``, residual
masses by ``gcd(m, b_sigma)^{-2}``, and slopes by ``kappa' = m * kappa``.
Everything here is exact integer/rational arithmetic; the splitting degree
``e = m / gcd(m, b_sigma)`` is additionally cross-checked by an independent
lattice-index computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .lattice import sublattice_index
from .measure import SkeletalMeasure
from .model import Face, WeightedSncModel, build_dual_complex, weight_data


@dataclass(frozen=True)
class FaceBaseChange:
    """Base-change data of one face under ``t = s^m``."""

    b: tuple[int, ...]
    m: int
    e: int
    fg: int
    g: int
    f: int
    b_prime: int
    volume_scale: int
    residual_scale: Fraction
    e_lattice_check: int

    @property
    def consistent(self) -> bool:
        return self.e * self.f * self.g == self.m and self.e == self.e_lattice_check


def _splitting_index(b: Sequence[int], m: int) -> int:
    """Index of ``Z^n + Z*(b/m)`` over ``Z^n``, by integer normal form.

    Scaling by ``m`` identifies the quotient with ``Z^n / (m Z^n + Z b)``, so
    the index equals ``m^n`` divided by the index of ``m Z^n + Z b``.
    """
    n = len(b)
    gens = [[m if i == j else 0 for j in range(n)] for i in range(n)]
    gens.append(list(b))
    return m**n // sublattice_index(gens, n)


def face_base_change(b: Sequence[int], m: int, g: int | None = None) -> FaceBaseChange:
    """Base-change report for a face with multiplicities ``b`` under ``t = s^m``.

    ``g`` is the number of faces upstairs; it must divide ``gcd(m, b_sigma)``
    and defaults to that gcd (mapping degree ``f = 1``, the simply-connected
    local case).  The splitting degree ``e = m / gcd(m, b_sigma)`` is verified
    against the lattice index of ``Z^{p+1} + Z*(b/m)`` over ``Z^{p+1}``.
    """
    b = tuple(int(x) for x in b)
    if not b or any(x < 1 for x in b):
        raise ValueError("multiplicities must be positive integers")
    if m < 1 or m != int(m):
        raise ValueError("base-change order m must be a positive integer")
    m = int(m)
    b_sigma = math.gcd(*b)
    fg = math.gcd(m, b_sigma)
    if g is None:
        g = fg
    else:
        g = int(g)
        if g < 1 or fg % g != 0:
            raise ValueError(f"gluing count g={g} must divide gcd(m, b_sigma)={fg}")
    f = fg // g
    e = m // fg
    check = _splitting_index(b, m)
    report = FaceBaseChange(
        b=b,
        m=m,
        e=e,
        fg=fg,
        g=g,
        f=f,
        b_prime=b_sigma // fg,
        volume_scale=m ** (len(b) - 1),
        residual_scale=Fraction(1, fg**2),
        e_lattice_check=check,
    )
    if e != check:
        raise AssertionError(
            f"splitting-degree cross-check failed for b={b}, m={m}: "
            f"gcd formula gives {e}, lattice index gives {check}"
        )
    return report


@dataclass(frozen=True)
class BaseChangeReport:
    """Per-face base-change table for a whole model."""

    model: WeightedSncModel
    m: int
    entries: tuple[tuple[Face, FaceBaseChange], ...]

    def rows(self) -> list[dict[str, str]]:
        rows = []
        for face, r in self.entries:
            rows.append(
                {
                    "face": face.id_string(),
                    "e": str(r.e),
                    "fg": str(r.fg),
                    "g": str(r.g),
                    "f": str(r.f),
                    "b_prime": str(r.b_prime),
                    "vol_scale": str(r.volume_scale),
                    "residual_scale": str(r.residual_scale),
                }
            )
        return rows


def model_base_change(
    m_model: WeightedSncModel, m: int, g_choices: Mapping | None = None
) -> BaseChangeReport:
    """Base-change table over all faces of the dual complex.

    ``g_choices`` optionally maps face id strings to gluing counts; faces not
    listed use the default ``g = gcd(m, b_sigma)``.
    """
    dual = build_dual_complex(m_model)
    g_map = dict(g_choices or {})
    entries = []
    for face in dual.faces:
        g = g_map.pop(face.id_string(), None)
        entries.append((face, face_base_change(face.simplex.b, m, g)))
    if g_map:
        raise ValueError(f"g choices reference unknown faces: {sorted(g_map)}")
    return BaseChangeReport(m_model, m, tuple(entries))


@dataclass(frozen=True)
class PushforwardCheck:
    """Result of the exact pushforward identity test."""

    m: int
    d: int
    passed: bool
    per_face: tuple[dict, ...]


def pushforward_identity_check(
    measure: SkeletalMeasure, m: int, g_choices: Mapping | None = None
) -> PushforwardCheck:
    """Verify that pushing the base-changed measure forward rescales by ``m^d``.

    For each top face the ``g`` upstairs faces each carry residual mass
    ``gcd(m,b)^{-2} R`` and volume ``m^d Vol``, map with degree ``f``, and
    have multiplicity ``b' = b / gcd(m,b)``; summing
    ``g * f * gcd^{-2} * (b')^{-1} * m^d Vol`` must equal
    ``m^d * b^{-1} * Vol`` exactly (the real factor ``R`` cancels, so the
    comparison is in exact rationals).
    """
    g_map = dict(g_choices or {})
    per_face = []
    ok = True
    d = measure.d
    for entry in measure.entries:
        face = entry.face
        r = face_base_change(face.simplex.b, m, g_map.get(face.id_string()))
        vol = entry.volume
        lhs = (
            Fraction(r.g)
            * r.f
            * r.residual_scale
            * Fraction(1, r.b_prime)
            * Fraction(m) ** d
            * vol
        )
        rhs = Fraction(m) ** d * Fraction(1, face.multiplicity) * vol
        disc = lhs - rhs
        ok = ok and disc == 0
        per_face.append(
            {
                "face": face.id_string(),
                "lhs": lhs,
                "rhs": rhs,
                "discrepancy": disc,
            }
        )
    return PushforwardCheck(m=m, d=d, passed=ok, per_face=tuple(per_face))


def kappa_scaling_check(m_model: WeightedSncModel, m: int) -> bool:
    """Verify the slope transform under base change: ``kappa' = m * kappa``.

    Applies the component transform ``b_i' = b_i / gcd(m, b_i)``,
    ``a_i' = m * a_i / gcd(m, b_i)`` and asserts the transformed slopes are
    ``m`` times the originals, the minimum scales accordingly, and the set of
    active vertices is unchanged.
    """
    if m < 1:
        raise ValueError("base-change order m must be a positive integer")
    wd = weight_data(m_model)
    kappa_new = {}
    for c in m_model.components:
        gc = math.gcd(m, c.b)
        b_new = c.b // gc
        a_new = Fraction(m) * c.a / gc
        kappa_new[c.name] = a_new / b_new
    if any(kappa_new[n] != m * wd.kappa[n] for n in kappa_new):
        return False
    if min(kappa_new.values()) != m * wd.kappa_min:
        return False
    old_active = {n for n, k in wd.kappa.items() if k == wd.kappa_min}
    new_active = {n for n, k in kappa_new.items() if k == min(kappa_new.values())}
    return old_active == new_active
