"""Two-dimensional probe wavefunctions on a uniform grid.

Grid conventions
----------------
Positions are sampled at cell centres,

    x_k = -extent/2 + (k + 1/2) * dx,   k = 0 .. n-1,   dx = extent / n,

so the grid is symmetric about the origin and never samples it.  Arrays are
indexed ``amp[ix, iy]``.

The momentum representation is stored on the wavenumber grid

    k_j = j * dk,   j = -n/2 .. n/2 - 1,   dk = 2 pi / extent,

with momentum p = hbar * k.  Both representations carry continuum densities:
``sum |amp|^2 * cell_area == 1`` with ``cell_area`` equal to dx^2 or dk^2.
The forward transform per axis is

    phi~(k_j) = dx / sqrt(2 pi) * sum_k phi(x_k) exp(-i k_j x_k),

i.e. a unitary DFT with an fftshift index mapping and a half-cell phase
twiddle exp(-i pi j / n) for the cell-centred positions.
"""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import GridMismatch, GridTooSmall, ValidationError

MAX_ABS_L = 6
# lg_mode requires extent >= CONTAINMENT * sigma * sqrt(|l| + 1)
CONTAINMENT = 8.0
DEFAULT_N = 256


class Rep(enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"


@dataclass(frozen=True)
class GridSpec:
    n: int = DEFAULT_N
    extent: float = 16.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise ValidationError(f"grid n must be an even integer >= 16, got {self.n}")
        if not self.extent > 0:
            raise ValidationError(f"grid extent must be positive, got {self.extent}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def spacing(self) -> float:
        return self.extent / self.n

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.extent

    def positions(self) -> np.ndarray:
        return -self.extent / 2 + (np.arange(self.n) + 0.5) * self.spacing

    def wavenumbers(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dk

    def cell_area(self, rep: Rep) -> float:
        return self.spacing**2 if rep is Rep.POSITION else self.dk**2

    @classmethod
    def for_mode(cls, l: int, sigma: float = 1.0, n: int = DEFAULT_N) -> "GridSpec":
        """Default grid: ``extent = 16 sigma sqrt(|l| + 1)``."""
        return cls(n=n, extent=16.0 * sigma * np.sqrt(abs(l) + 1))


@dataclass(frozen=True, eq=False)
class ProbeField:
    grid: GridSpec
    rep: Rep
    amplitudes: np.ndarray
    l: int = 0
    sigma: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (self.grid.n, self.grid.n):
            raise ValidationError(f"amplitudes shape {a.shape} does not match grid n={self.grid.n}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def norm(self) -> float:
        return float(quad(np.abs(self.amplitudes) ** 2, self.grid.cell_area(self.rep)).real)

    def normalize(self) -> "ProbeField":
        return replace(self, amplitudes=self.amplitudes / np.sqrt(self.norm()))

    def in_rep(self, rep: Rep) -> "ProbeField":
        return self if rep is self.rep else transform(self, rep)


@dataclass(frozen=True)
class OperatorWord:
    """Product of probe operators, applied right to left, times a coefficient.

    Factors are drawn from ``"X"``, ``"Y"``, ``"Px"``, ``"Py"``.
    """

    factors: tuple[str, ...]
    coeff: complex = 1.0

    def __post_init__(self):
        factors = tuple(self.factors)
        bad = [f for f in factors if f not in _FACTORS]
        if bad:
            raise ValidationError(f"unknown operator factor(s) {bad}")
        if len(factors) > 4:
            raise ValidationError("operator words are limited to 4 factors")
        object.__setattr__(self, "factors", factors)

    def __mul__(self, other: "OperatorWord") -> "OperatorWord":
        return OperatorWord(self.factors + other.factors, self.coeff * other.coeff)

    def scaled(self, c: complex) -> "OperatorWord":
        return OperatorWord(self.factors, self.coeff * c)


_FACTORS = {"X": (Rep.POSITION, 0), "Y": (Rep.POSITION, 1), "Px": (Rep.MOMENTUM, 0), "Py": (Rep.MOMENTUM, 1)}


@dataclass(frozen=True)
class DisplacementSet:
    """First- and second-order pointer shifts <M>_f - <M>_i.

    ``dx2y2h`` is the shift of (X^2 - Y^2)/2, i.e. half of <X^2 - Y^2>.
    """

    dx: float
    dy: float
    dxy: float
    dx2y2h: float

    def __post_init__(self):
        for name in ("dx", "dy", "dxy", "dx2y2h"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValidationError(f"displacement {name} is not finite")
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.dx, self.dy, self.dxy, self.dx2y2h)


def quad(values: np.ndarray, cell: float) -> complex:
    """Grid quadrature with a fixed pairwise summation order."""
    # np.add.reduce on a contiguous 1-D buffer uses numpy's pairwise scheme,
    # which depends only on the array length.
    return complex(np.add.reduce(np.ascontiguousarray(values).ravel())) * cell


def _twiddle(n: int) -> np.ndarray:
    j = np.arange(n) - n // 2
    return np.exp(-1j * np.pi * j / n)


def to_momentum(amp: np.ndarray, grid: GridSpec) -> np.ndarray:
    t = _twiddle(grid.n)
    out = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(amp), norm="ortho"))
    return out * np.outer(t, t) * (grid.spacing / grid.dk)


def to_position(amp: np.ndarray, grid: GridSpec) -> np.ndarray:
    t = _twiddle(grid.n).conj()
    out = np.fft.ifftshift(amp * np.outer(t, t))
    return np.fft.fftshift(np.fft.ifft2(out, norm="ortho")) * (grid.dk / grid.spacing)


def transform(field: ProbeField, target: Rep) -> ProbeField:
    """Switch ``field`` to the ``target`` representation (unitary)."""
    if target is field.rep:
        return field
    fn = to_momentum if target is Rep.MOMENTUM else to_position
    return replace(field, rep=target, amplitudes=fn(field.amplitudes, field.grid))


def _lg_amplitude(l: int, sigma: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    envelope = np.exp(-(x**2 + y**2) / (4.0 * sigma**2)).astype(complex)
    if l == 0:
        return envelope
    # repeated multiplication keeps lg(-l) an exact conjugate of lg(+l)
    z = x + 1j * np.sign(l) * y
    out = envelope
    for _ in range(abs(l)):
        out = out * z
    return out


def lg_mode(l: int, sigma: float, grid: GridSpec, hbar: float = 1.0) -> ProbeField:
    """Normalized p = 0 Laguerre-Gauss probe in the position representation.

    The amplitude is ``(x + i sgn(l) y)^|l| exp(-(x^2 + y^2) / (4 sigma^2))``
    sampled at cell centres; normalization is numerical.

    Raises
    ------
    GridTooSmall
        If ``grid.extent < 8 sigma sqrt(|l| + 1)``.
    """
    l = int(l)
    if abs(l) > MAX_ABS_L:
        raise ValueError(f"|l| must be <= {MAX_ABS_L}, got {l}")
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    needed = CONTAINMENT * sigma * np.sqrt(abs(l) + 1)
    if grid.extent < needed * (1 - 1e-12):
        raise GridTooSmall(f"extent {grid.extent:g} < {needed:g} required for l={l}, sigma={sigma:g}")
    x = grid.positions()
    amp = _lg_amplitude(l, sigma, x[:, None], x[None, :])
    return ProbeField(grid, Rep.POSITION, amp, l=l, sigma=float(sigma), hbar=float(hbar)).normalize()


def _apply(amp: np.ndarray, rep: Rep, factor: str, field: ProbeField) -> tuple[np.ndarray, Rep]:
    need, axis = _FACTORS[factor]
    grid = field.grid
    if rep is not need:
        amp = to_momentum(amp, grid) if need is Rep.MOMENTUM else to_position(amp, grid)
    if need is Rep.POSITION:
        c = grid.positions()
    else:
        c = field.hbar * grid.wavenumbers()
    amp = amp * (c[:, None] if axis == 0 else c[None, :])
    return amp, need


def apply_word(field: ProbeField, word: OperatorWord) -> ProbeField:
    """Return ``word |field>`` (in whichever representation the last factor used)."""
    amp, rep = field.amplitudes, field.rep
    for factor in reversed(word.factors):
        amp, rep = _apply(amp, rep, factor, field)
    return replace(field, rep=rep, amplitudes=amp * word.coeff)


def expectation(field: ProbeField, word: OperatorWord) -> complex:
    """Return <field| word |field> by grid quadrature."""
    out = apply_word(field, word)
    bra = field.in_rep(out.rep).amplitudes
    return quad(bra.conj() * out.amplitudes, field.grid.cell_area(out.rep))


def expectations(field: ProbeField, words: Sequence[OperatorWord]) -> complex:
    """Sum of expectations of several words."""
    return sum((expectation(field, w) for w in words), 0j)


XY_WORDS = (OperatorWord(("X", "Y"), 0.5), OperatorWord(("Y", "X"), 0.5))
X2Y2_HALF_WORDS = (OperatorWord(("X", "X"), 0.5), OperatorWord(("Y", "Y"), -0.5))


def position_moments(field: ProbeField) -> tuple[float, float, float, float]:
    """Return <X>, <Y>, <XY>, <(X^2 - Y^2)/2> of a normalized field.

    Position-diagonal words reduce to weighted sums of |amp|^2, which is how
    they are evaluated here.
    """
    f = field.in_rep(Rep.POSITION)
    rho = np.abs(f.amplitudes) ** 2
    x = f.grid.positions()
    xx, yy = x[:, None], x[None, :]
    cell = f.grid.cell_area(Rep.POSITION)
    norm = quad(rho, cell).real
    return tuple(
        quad(rho * w, cell).real / norm
        for w in (np.broadcast_to(xx, rho.shape), np.broadcast_to(yy, rho.shape), xx * yy, (xx**2 - yy**2) / 2)
    )


def displacement_set(field_i: ProbeField, field_f: ProbeField) -> DisplacementSet:
    """Return the shifts of X, Y, XY and (X^2 - Y^2)/2 from ``field_i`` to ``field_f``."""
    if field_i.grid != field_f.grid:
        raise GridMismatch(f"{field_i.grid} vs {field_f.grid}")
    mi = position_moments(field_i)
    mf = position_moments(field_f)
    return DisplacementSet(*(b - a for a, b in zip(mi, mf)))


def translate(field: ProbeField, dx: float, dy: float) -> ProbeField:
    """Shift ``field`` by (dx, dy) with a momentum-space phase ramp."""
    k = field.grid.wavenumbers()
    ramp = np.exp(-1j * k * dx)[:, None] * np.exp(-1j * k * dy)[None, :]
    p = field.in_rep(Rep.MOMENTUM)
    return transform(replace(p, amplitudes=p.amplitudes * ramp), field.rep)


def reflect_diagonal(field: ProbeField) -> ProbeField:
    """Mirror across the line y = x (index transpose)."""
    return replace(field, amplitudes=field.amplitudes.T.copy())


# text I/O


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dumps_field(field: ProbeField) -> str:
    """Serialize as ``n extent rep l sigma [hbar]`` then n*n lines of ``re im``."""
    head = [str(field.grid.n), _fmt(field.grid.extent), field.rep.value, str(field.l), _fmt(field.sigma)]
    if field.hbar != 1.0:
        head.append(_fmt(field.hbar))
    buf = io.StringIO()
    buf.write(" ".join(head) + "\n")
    for v in field.amplitudes.ravel():
        buf.write(f"{_fmt(v.real)} {_fmt(v.imag)}\n")
    return buf.getvalue()


def loads_field(text: str) -> ProbeField:
    lines = text.strip().splitlines()
    if not lines:
        raise ValidationError("empty field document")
    head = lines[0].split()
    if len(head) not in (5, 6):
        raise ValidationError(f"bad field header {lines[0]!r}")
    n = int(head[0])
    grid = GridSpec(n, float(head[1]))
    rep = Rep(head[2])
    hbar = float(head[5]) if len(head) == 6 else 1.0
    body = np.loadtxt(io.StringIO("\n".join(lines[1:])), ndmin=2)
    if body.shape != (n * n, 2):
        raise ValidationError(f"expected {n * n} rows of 're im', got shape {body.shape}")
    amp = (body[:, 0] + 1j * body[:, 1]).reshape(n, n)
    return ProbeField(grid, rep, amp, l=int(head[3]), sigma=float(head[4]), hbar=hbar)


def intensity_csv(field: ProbeField) -> str:
    """``x,y,intensity`` rows of |amp|^2 in the position representation."""
    f = field.in_rep(Rep.POSITION)
    x = f.grid.positions()
    rho = np.abs(f.amplitudes) ** 2
    buf = io.StringIO()
    buf.write("x,y,intensity\n")
    for i, xi in enumerate(x):
        for j, yj in enumerate(x):
            buf.write(f"{_fmt(xi)},{_fmt(yj)},{_fmt(rho[i, j])}\n")
    return buf.getvalue()
