"""Finite discrete approximations to self-similar and Julia-set measures.

Two constructions are provided:

* `ifs_refine` pushes a point mass through all length-m words of a
  contractive affine iterated function system, converging weakly to the
  invariant measure (the Cantor-Lebesgue measure for the standard maps
  x/3 and (x+2)/3 with equal weights).
* `julia_inverse_orbit` solves F_m(z) = anchor branch by branch through
  the quadratic formula, never expanding the composition; the equal-weight
  preimage measure approximates the balanced (equilibrium) measure of the
  corresponding real Julia set.

Both come with float64 companions (`*_f64`) used by the large-N pipelines
where tens of thousands of coefficients are needed and full working
precision is not.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .bigfloat import DEFAULT_PRECISION, mpf, require_precision, tolerance, workprec
from .errors import DomainError, LengthError, ResourceCapError

DEFAULT_ATOM_CAP = 1 << 22

QUADRATIC_JULIA = "quadratic-julia"
GAMMA_JULIA = "gamma-julia"


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely many weighted atoms on the real line, sorted by position.

    Weights are positive and sum to 1 within 2**(-p+4) at the stated
    precision p.  Equal positions are permitted by the type (they arise
    from coincident preimages); operations that need distinct atoms check
    for themselves.
    """

    positions: tuple[mpfr, ...]
    weights: tuple[mpfr, ...]
    precision_bits: int

    def __post_init__(self):
        require_precision(self.precision_bits)
        if len(self.positions) != len(self.weights):
            raise LengthError("positions and weights must have equal length")
        if not self.positions:
            raise DomainError("a DiscreteMeasure needs at least one atom")
        for i in range(1, len(self.positions)):
            if self.positions[i] < self.positions[i - 1]:
                raise DomainError("atom positions must be nondecreasing")
        with workprec(self.precision_bits + 32):
            total = mpfr(0)
            for w in self.weights:
                if not w > 0:
                    raise DomainError("atom weights must be positive")
                total += w
            if abs(total - 1) > tolerance(self.precision_bits, 4):
                raise DomainError(f"total weight {total} deviates from 1")

    def __len__(self) -> int:
        return len(self.positions)

    def total_weight(self) -> mpfr:
        with workprec(self.precision_bits + 32):
            return mpf(sum(self.weights, start=mpfr(0)), self.precision_bits)

    def moment(self, k: int) -> mpfr:
        """k-th raw moment of the atomic measure."""
        with workprec(self.precision_bits):
            acc = mpfr(0)
            for x, w in zip(self.positions, self.weights):
                acc += w * x**k
            return acc

    def affine_image(self, alpha, beta) -> "DiscreteMeasure":
        """Pushforward under x -> alpha*x + beta (alpha != 0)."""
        with workprec(self.precision_bits):
            alpha = mpfr(alpha)
            beta = mpfr(beta)
            if alpha == 0:
                raise DomainError("affine map must be invertible (alpha != 0)")
            pos = [alpha * x + beta for x in self.positions]
            wts = list(self.weights)
            if alpha < 0:
                pos.reverse()
                wts.reverse()
        return DiscreteMeasure(tuple(pos), tuple(wts), self.precision_bits)

    def as_float_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        pos = np.array([float(x) for x in self.positions])
        wts = np.array([float(w) for w in self.weights])
        return pos, wts


def _sorted_atoms(positions, weights):
    order = sorted(range(len(positions)), key=positions.__getitem__)
    return tuple(positions[i] for i in order), tuple(weights[i] for i in order)


@dataclass(frozen=True)
class AffineIFS:
    """Contractive affine maps w_j(x) = ratio*x + offset with probabilities."""

    maps: tuple[tuple[mpfr, mpfr], ...]
    weights: tuple[mpfr, ...]
    precision_bits: int

    def __post_init__(self):
        require_precision(self.precision_bits)
        if len(self.maps) != len(self.weights) or not self.maps:
            raise LengthError("need one weight per map, at least one map")
        with workprec(self.precision_bits + 32):
            for ratio, _ in self.maps:
                if not abs(ratio) < 1:
                    raise DomainError(f"map ratio {ratio} is not contractive")
            total = mpfr(0)
            for w in self.weights:
                if not w > 0:
                    raise DomainError("map weights must be positive")
                total += w
            if abs(total - 1) > tolerance(self.precision_bits, 4):
                raise DomainError(f"map weights sum to {total}, not 1")

    @classmethod
    def cantor(cls, precision_bits: int = DEFAULT_PRECISION) -> "AffineIFS":
        """The standard ternary-Cantor system: x/3 and (x+2)/3, weights 1/2."""
        with workprec(precision_bits):
            third = mpfr(1) / 3
            half = mpfr(1) / 2
            maps = ((third, mpfr(0)), (third, 2 * third))
            weights = (half, half)
        return cls(maps, weights, precision_bits)

    def fixed_point(self, j: int = 0) -> mpfr:
        ratio, offset = self.maps[j]
        with workprec(self.precision_bits):
            return offset / (1 - ratio)

    def conjugated(self, alpha, beta) -> "AffineIFS":
        """System whose invariant measure is the alpha*x+beta image of this one."""
        with workprec(self.precision_bits):
            alpha = mpfr(alpha)
            beta = mpfr(beta)
            if alpha == 0:
                raise DomainError("conjugation must be invertible (alpha != 0)")
            maps = tuple(
                (ratio, alpha * offset + beta * (1 - ratio))
                for ratio, offset in self.maps
            )
        return AffineIFS(maps, self.weights, self.precision_bits)


def ifs_refine(
    ifs: AffineIFS, level: int, atom_cap: int = DEFAULT_ATOM_CAP
) -> DiscreteMeasure:
    """m-fold pushforward of a point mass at the first map's fixed point.

    The result has K**m atoms (K maps, m = level) whose positions are the
    images of the base point under all length-m map words, with the matching
    weight products.
    """
    if level < 1:
        raise DomainError("refinement level must be >= 1")
    k = len(ifs.maps)
    if k**level > atom_cap:
        raise ResourceCapError(f"{k}**{level} atoms exceed the cap {atom_cap}")
    with workprec(ifs.precision_bits):
        positions = [ifs.fixed_point(0)]
        weights = [mpfr(1)]
        for _ in range(level):
            positions = [
                ratio * x + offset for ratio, offset in ifs.maps for x in positions
            ]
            weights = [p * w for p in ifs.weights for w in weights]
        positions, weights = _sorted_atoms(positions, weights)
    return DiscreteMeasure(positions, weights, ifs.precision_bits)


def ifs_refine_f64(
    ifs: AffineIFS, level: int, atom_cap: int = DEFAULT_ATOM_CAP
) -> tuple[np.ndarray, np.ndarray]:
    """float64 companion of `ifs_refine` for large-N pipelines."""
    if level < 1:
        raise DomainError("refinement level must be >= 1")
    k = len(ifs.maps)
    if k**level > atom_cap:
        raise ResourceCapError(f"{k}**{level} atoms exceed the cap {atom_cap}")
    ratios = [float(r) for r, _ in ifs.maps]
    offsets = [float(o) for _, o in ifs.maps]
    probs = [float(w) for w in ifs.weights]
    pos = np.array([float(ifs.fixed_point(0))])
    wts = np.array([1.0])
    for _ in range(level):
        pos = np.concatenate([r * pos + o for r, o in zip(ratios, offsets)])
        wts = np.concatenate([p * wts for p in probs])
    order = np.argsort(pos, kind="stable")
    return pos[order], wts[order]


def ifs_moments(
    ifs: AffineIFS, order: int, precision_bits: int | None = None
) -> "MomentVector":
    """Raw moments of the IFS invariant measure by forward substitution.

    The invariance equation turns into a triangular linear system because
    sum_j p_j r_j**k != 1 for k >= 1 whenever every |r_j| < 1.
    """
    if order < 0:
        raise DomainError("moment order must be >= 0")
    p = precision_bits if precision_bits is not None else ifs.precision_bits
    with workprec(p):
        ratios = [mpf(r) for r, _ in ifs.maps]
        offsets = [mpf(o) for _, o in ifs.maps]
        probs = [mpf(w) for w in ifs.weights]
        moments = [mpfr(1)]
        # running powers of ratios and offsets, updated once per k
        r_pow = [mpfr(1) for _ in ratios]
        o_pows = [[mpfr(1)] for _ in offsets]
        for k in range(1, order + 1):
            for j, (r, o) in enumerate(zip(ratios, offsets)):
                r_pow[j] *= r
                o_pows[j].append(o_pows[j][-1] * o)
            denom = mpfr(1) - sum(
                pj * rp for pj, rp in zip(probs, r_pow)
            )
            num = mpfr(0)
            for j, (r, o) in enumerate(zip(ratios, offsets)):
                inner = mpfr(0)
                r_i = mpfr(1)
                for i in range(k):
                    inner += gmpy2.bincoef(k, i) * r_i * o_pows[j][k - i] * moments[i]
                    r_i *= r
                num += probs[j] * inner
            moments.append(num / denom)
    return MomentVector(tuple(moments), p)


@dataclass(frozen=True)
class MomentVector:
    """Raw moments m_k = integral of t**k, k = 0..N, with m_0 = 1."""

    moments: tuple[mpfr, ...]
    precision_bits: int

    def __post_init__(self):
        require_precision(self.precision_bits)
        if not self.moments:
            raise LengthError("a MomentVector needs at least m_0")
        if abs(self.moments[0] - 1) > tolerance(self.precision_bits, 4):
            raise DomainError(f"m_0 must be 1, got {self.moments[0]}")

    @property
    def order(self) -> int:
        return len(self.moments) - 1

    def hankel_positive_order(self) -> int:
        """Largest order n such that the Hankel matrix (m_{i+j}), i,j <= n,
        is positive definite at working precision (Cholesky pivots > 0)."""
        n_max = self.order // 2
        with workprec(self.precision_bits):
            h = [[self.moments[i + j] for j in range(n_max + 1)] for i in range(n_max + 1)]
            chol = [[mpfr(0)] * (n_max + 1) for _ in range(n_max + 1)]
            for i in range(n_max + 1):
                for j in range(i + 1):
                    s = h[i][j]
                    for t in range(j):
                        s -= chol[i][t] * chol[j][t]
                    if i == j:
                        if not s > 0:
                            return i - 1
                        chol[i][i] = gmpy2.sqrt(s)
                    else:
                        chol[i][j] = s / chol[j][j]
        return n_max


@dataclass(frozen=True)
class PolySequenceSpec:
    """A real polynomial sequence whose composition defines a Julia set.

    kind "quadratic-julia": f_n(z) = z**2 - c for all n, with c > 2.
    kind "gamma-julia": f_1(z) = 2 z (z - 1) / gamma_1 + 1 and
    f_n(z) = z**2 / (2 gamma_n) + 1 - 1/(2 gamma_n) for n > 1, where the
    stored gamma prefix satisfies 0 < gamma_s < 1/4 for every entry.

    Degrees are always 2; leading coefficients derive from the maps.  The
    three regular-sequence witnesses are exposed as `witness_a1/a2/a3`.
    """

    kind: str
    c: mpfr | None = None
    gamma: tuple[mpfr, ...] = field(default_factory=tuple)
    precision_bits: int = DEFAULT_PRECISION

    def __post_init__(self):
        require_precision(self.precision_bits)
        if self.kind == QUADRATIC_JULIA:
            if self.c is None or not self.c > 2:
                raise DomainError(f"quadratic family needs c > 2, got {self.c}")
        elif self.kind == GAMMA_JULIA:
            if not self.gamma:
                raise DomainError("gamma family needs a nonempty gamma prefix")
            with workprec(self.precision_bits):
                quarter = mpfr(1) / 4
                for g in self.gamma:
                    if not (0 < g < quarter):
                        raise DomainError(f"gamma entries must lie in (0, 1/4): {g}")
        else:
            raise DomainError(f"unknown polynomial-sequence kind {self.kind!r}")

    @classmethod
    def quadratic(cls, c, precision_bits: int = DEFAULT_PRECISION) -> "PolySequenceSpec":
        return cls(QUADRATIC_JULIA, c=mpf(c, precision_bits), precision_bits=precision_bits)

    @classmethod
    def gamma_seq(cls, gamma, precision_bits: int = DEFAULT_PRECISION) -> "PolySequenceSpec":
        g = tuple(mpf(x, precision_bits) for x in gamma)
        return cls(GAMMA_JULIA, gamma=g, precision_bits=precision_bits)

    @classmethod
    def gamma_constant(
        cls, value, count: int, precision_bits: int = DEFAULT_PRECISION
    ) -> "PolySequenceSpec":
        return cls.gamma_seq([value] * count, precision_bits)

    @property
    def levels_available(self) -> int:
        if self.kind == QUADRATIC_JULIA:
            return 1 << 31
        return len(self.gamma)

    def degree(self, n: int) -> int:
        return 2

    def leading_coeff(self, n: int) -> mpfr:
        """Leading coefficient of f_n."""
        self._check_level(n)
        with workprec(self.precision_bits):
            if self.kind == QUADRATIC_JULIA:
                return mpfr(1)
            if n == 1:
                return 2 / self.gamma[0]
            return 1 / (2 * self.gamma[n - 1])

    def gamma_lower(self) -> mpfr:
        """Lower bound witness for the stored gamma prefix."""
        if self.kind != GAMMA_JULIA:
            raise DomainError("gamma_lower only applies to the gamma family")
        return min(self.gamma)

    def witness_a1(self) -> mpfr:
        """A1: uniform lower bound on |leading coefficient|."""
        with workprec(self.precision_bits):
            if self.kind == QUADRATIC_JULIA:
                return mpfr(1)
            return min(self.leading_coeff(n) for n in range(1, len(self.gamma) + 1))

    def witness_a2(self) -> mpfr:
        """A2: uniform bound on lower-order/leading coefficient ratios."""
        with workprec(self.precision_bits):
            if self.kind == QUADRATIC_JULIA:
                return mpfr(self.c)
            # f_1 coefficients (2/g, -2/g, 1); f_n coefficients (1/(2g), 0, 1-1/(2g))
            best = mpfr(1)
            for n in range(2, len(self.gamma) + 1):
                g = self.gamma[n - 1]
                best = max(best, abs(1 - 1 / (2 * g)) * (2 * g))
            return best

    def witness_a3(self) -> mpfr:
        """A3: log|leading coefficient| <= A3 * degree."""
        with workprec(self.precision_bits):
            if self.kind == QUADRATIC_JULIA:
                return mpfr(0)
            top = max(self.leading_coeff(n) for n in range(1, len(self.gamma) + 1))
            return gmpy2.log(top) / 2

    def default_anchor(self) -> mpfr:
        """Pinned inverse-iteration anchor: 0 for z**2-c, 1 for the K(gamma) maps."""
        return mpf(0 if self.kind == QUADRATIC_JULIA else 1, self.precision_bits)

    def _check_level(self, n: int):
        if n < 1:
            raise DomainError("map index must be >= 1")
        if self.kind == GAMMA_JULIA and n > len(self.gamma):
            raise LengthError(
                f"map index {n} exceeds stored gamma prefix of length {len(self.gamma)}"
            )

    def apply_map(self, n: int, z):
        """Evaluate f_n at z (real or complex)."""
        self._check_level(n)
        if self.kind == QUADRATIC_JULIA:
            return z * z - self.c
        g = self.gamma[n - 1]
        if n == 1:
            return 2 * z * (z - 1) / g + 1
        return z * z / (2 * g) + 1 - 1 / (2 * g)

    def compose_forward(self, z, levels: int):
        """F_levels(z) = (f_levels o ... o f_1)(z) by forward iteration."""
        self._check_level(max(levels, 1))
        w = z
        for n in range(1, levels + 1):
            w = self.apply_map(n, w)
        return w

    def invert_map(self, n: int, y) -> tuple[mpfr, mpfr]:
        """The two real solutions of f_n(z) = y, largest first.

        Raises DomainError when the quadratic discriminant is negative
        (the anchor left the admissible region).
        """
        self._check_level(n)
        if self.kind == QUADRATIC_JULIA:
            disc = y + self.c
            if disc < 0:
                raise DomainError(
                    f"negative discriminant inverting map {n}: y + c = {disc}"
                )
            r = gmpy2.sqrt(disc)
            return r, -r
        g = self.gamma[n - 1]
        disc = 1 + 2 * g * (y - 1)
        if disc < 0:
            raise DomainError(
                f"negative discriminant inverting map {n}: 1 + 2*gamma*(y-1) = {disc}"
            )
        r = gmpy2.sqrt(disc)
        if n == 1:
            return (1 + r) / 2, (1 - r) / 2
        return r, -r


def julia_inverse_orbit(
    spec: PolySequenceSpec,
    level: int,
    anchor=None,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> DiscreteMeasure:
    """All 2**level solutions of F_level(z) = anchor, weight 2**(-level) each.

    Solved by branchwise quadratic back-substitution, peeling the outermost
    map first; the composition is never expanded.
    """
    if level < 1:
        raise DomainError("orbit level must be >= 1")
    if spec.kind == GAMMA_JULIA and level > len(spec.gamma):
        raise LengthError(
            f"level {level} exceeds stored gamma prefix of length {len(spec.gamma)}"
        )
    if 1 << level > atom_cap:
        raise ResourceCapError(f"2**{level} atoms exceed the cap {atom_cap}")
    with workprec(spec.precision_bits):
        if anchor is None:
            anchor = spec.default_anchor()
        values = [mpf(anchor)]
        for n in range(level, 0, -1):
            nxt = []
            for y in values:
                plus, minus = spec.invert_map(n, y)
                nxt.append(plus)
                nxt.append(minus)
            values = nxt
        values.sort()
        weight = gmpy2.exp2(mpfr(-level))
        weights = tuple(weight for _ in values)
    return DiscreteMeasure(tuple(values), weights, spec.precision_bits)


def julia_inverse_orbit_f64(
    spec: PolySequenceSpec,
    level: int,
    anchor: float | None = None,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> tuple[np.ndarray, np.ndarray]:
    """float64 companion of `julia_inverse_orbit` for large-N pipelines."""
    if level < 1:
        raise DomainError("orbit level must be >= 1")
    if spec.kind == GAMMA_JULIA and level > len(spec.gamma):
        raise LengthError(
            f"level {level} exceeds stored gamma prefix of length {len(spec.gamma)}"
        )
    if 1 << level > atom_cap:
        raise ResourceCapError(f"2**{level} atoms exceed the cap {atom_cap}")
    if anchor is None:
        anchor = float(spec.default_anchor())
    vals = np.array([anchor])
    if spec.kind == QUADRATIC_JULIA:
        c = float(spec.c)
        for n in range(level, 0, -1):
            disc = vals + c
            if disc.min() < 0:
                raise DomainError(f"negative discriminant inverting map {n}")
            r = np.sqrt(disc)
            vals = np.concatenate([r, -r])
    else:
        gammas = [float(g) for g in spec.gamma]
        for n in range(level, 0, -1):
            g = gammas[n - 1]
            disc = 1.0 + 2.0 * g * (vals - 1.0)
            if disc.min() < 0:
                raise DomainError(f"negative discriminant inverting map {n}")
            r = np.sqrt(disc)
            if n == 1:
                vals = np.concatenate([(1.0 + r) / 2.0, (1.0 - r) / 2.0])
            else:
                vals = np.concatenate([r, -r])
    vals.sort(kind="stable")
    weights = np.full(vals.size, 2.0 ** -level)
    return vals, weights
