"""Spectral fields on the 2-torus.

Coefficients live on the square mode set max(|k1|, |k2|) <= n with the
convention u(x) = sum_k uhat(k) exp(i k.x).  Every field represents a real
function, so uhat(-k) = conj(uhat(k)) is an invariant of the type: it is
validated on construction and exact afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as _fft

__all__ = [
    "ModeSet",
    "SpectralField",
    "NormVector",
    "project",
    "wiener_norm",
    "norm_vector",
    "convolve",
    "mode_multiplier",
    "laplacian",
    "biharmonic",
    "derivative",
    "to_real_samples",
    "from_real_samples",
    "scale_modes",
    "with_cutoff",
    "inner",
    "hermitian_asymmetry",
    "write_snapshot",
    "read_snapshot",
    "SNAPSHOT_MAGIC",
]

SNAPSHOT_MAGIC = "torusflow-spectral v1"
SNAPSHOT_HERMITIAN_TOL = 1e-10

# Constructor rejection threshold, relative to the largest coefficient.
_HERMITIAN_RTOL = 1e-10


@lru_cache(maxsize=None)
def _grids(n: int):
    """Integer wavenumber grids (k1, k2, |k|^2) for cutoff n, read-only."""
    k = np.arange(-n, n + 1)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    abs2 = (k1 * k1 + k2 * k2).astype(np.float64)
    for a in (k1, k2, abs2):
        a.setflags(write=False)
    return k1, k2, abs2


@dataclass(frozen=True)
class ModeSet:
    """Square set of retained modes: k in Z^2 with max(|k1|, |k2|) <= n."""

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise ValueError(f"mode cutoff must be an integer >= 1, got {self.n!r}")
        if self.n < 1:
            raise ValueError(f"mode cutoff must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def size(self) -> int:
        return 2 * self.n + 1

    @property
    def k1(self) -> np.ndarray:
        return _grids(self.n)[0]

    @property
    def k2(self) -> np.ndarray:
        return _grids(self.n)[1]

    @property
    def abs2(self) -> np.ndarray:
        """|k|^2 over the mode grid, float valued."""
        return _grids(self.n)[2]


def _hermitian_flip(c: np.ndarray) -> np.ndarray:
    """conj(uhat(-k)) laid out on the same centered grid."""
    return np.conj(c[::-1, ::-1])


def hermitian_asymmetry(field_or_coeff) -> float:
    """max_k |uhat(-k) - conj(uhat(k))|."""
    c = field_or_coeff.coeff if isinstance(field_or_coeff, SpectralField) else np.asarray(field_or_coeff)
    return float(np.max(np.abs(c - _hermitian_flip(c))))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex Fourier coefficients uhat(k) of a real function on T^2.

    uhat(k) = (2 pi)^-2 int u(x) exp(-i k.x) dx, stored densely as a
    (2n+1, 2n+1) array with coeff[i, j] = uhat(i - n, j - n).  Construction
    rejects non-finite values and Hermitian violations, then symmetrizes
    exactly, so downstream code may rely on coeff == conj(flip(coeff)).
    """

    modes: ModeSet
    coeff: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeff, dtype=np.complex128)
        size = self.modes.size
        if c.shape != (size, size):
            raise ValueError(f"coefficient array must be {(size, size)}, got {c.shape}")
        if not np.isfinite(c).all():
            raise ValueError("non-finite Fourier coefficient")
        asym = float(np.max(np.abs(c - _hermitian_flip(c))))
        scale = max(1.0, float(np.max(np.abs(c))))
        if asym > _HERMITIAN_RTOL * scale:
            raise ValueError(
                f"coefficients are not Hermitian-symmetric (max deviation {asym:.3e}); "
                "the field must represent a real function"
            )
        c = 0.5 * (c + _hermitian_flip(c))
        c.setflags(write=False)
        object.__setattr__(self, "coeff", c)

    @property
    def n(self) -> int:
        return self.modes.n

    @property
    def mean(self) -> float:
        """Mean value of the represented function, i.e. uhat(0)."""
        return float(self.coeff[self.n, self.n].real)

    @classmethod
    def zeros(cls, n: int) -> "SpectralField":
        m = ModeSet(n)
        return cls(m, np.zeros((m.size, m.size), dtype=np.complex128))

    @classmethod
    def from_modes(cls, n: int, entries) -> "SpectralField":
        """Build from ((k1, k2), value) pairs; repeated modes accumulate."""
        m = ModeSet(n)
        c = np.zeros((m.size, m.size), dtype=np.complex128)
        for (k1, k2), val in entries:
            if max(abs(int(k1)), abs(int(k2))) > n:
                raise ValueError(f"mode ({k1}, {k2}) outside cutoff {n}")
            c[int(k1) + n, int(k2) + n] += complex(val)
        return cls(m, c)


@dataclass(frozen=True)
class NormVector:
    """Wiener norms (s = 0, 2, 4, 6) of one field."""

    a0: float
    a2: float
    a4: float
    a6: float


def project(f: SpectralField, n: int) -> SpectralField:
    """Galerkin truncation: zero every coefficient with max(|k1|, |k2|) > n."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"projection cutoff must be an integer >= 1, got {n!r}")
    if n >= f.n:
        return SpectralField(f.modes, f.coeff)
    c = np.zeros_like(f.coeff)
    lo, hi = f.n - n, f.n + n + 1
    c[lo:hi, lo:hi] = f.coeff[lo:hi, lo:hi]
    return SpectralField(f.modes, c)


def wiener_norm(f: SpectralField, s: float) -> float:
    """sum_k |k|^s |uhat(k)|, with the convention 0^0 = 1.

    A^0 therefore includes the modulus of the mean, while every s > 0
    seminorm ignores it.  Summation uses math.fsum, so the result is the
    correctly rounded sum independent of storage layout.
    """
    if s < 0:
        raise ValueError(f"Wiener exponent must be >= 0, got {s}")
    a = np.abs(f.coeff)
    if s != 0:
        a = f.modes.abs2 ** (s / 2.0) * a
    return math.fsum(a.ravel().tolist())


def norm_vector(f: SpectralField) -> NormVector:
    """A^0, A^2, A^4, A^6 norms computed from a single |coeff| pass."""
    a = np.abs(f.coeff).ravel()
    w2 = f.modes.abs2.ravel()
    return NormVector(
        a0=math.fsum(a.tolist()),
        a2=math.fsum((w2 * a).tolist()),
        a4=math.fsum((w2 * w2 * a).tolist()),
        a6=math.fsum((w2 * w2 * w2 * a).tolist()),
    )


@lru_cache(maxsize=None)
def _pad_size(n: int) -> int:
    # N >= 3n+1 keeps every retained mode |k| <= n of a quadratic product
    # alias-free (product modes reach 2n; the nearest alias is at N - n > 2n).
    return _fft.next_fast_len(3 * n + 1)


@lru_cache(maxsize=None)
def _wrap_indices(n: int, N: int) -> np.ndarray:
    idx = np.arange(-n, n + 1) % N
    idx.setflags(write=False)
    return idx


def _embed(coeff: np.ndarray, n: int, N: int) -> np.ndarray:
    """Scatter a centered coefficient block into standard FFT layout of size N."""
    out = np.zeros((N, N), dtype=np.complex128)
    idx = _wrap_indices(n, N)
    out[np.ix_(idx, idx)] = coeff
    return out


def _extract(arr: np.ndarray, n: int, N: int) -> np.ndarray:
    """Gather the centered block |k| <= n back out of FFT layout."""
    idx = _wrap_indices(n, N)
    return arr[np.ix_(idx, idx)]


def _symmetrize(c: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian subspace (removes ~1e-16 FFT roundoff)."""
    return 0.5 * (c + _hermitian_flip(c))


def _convolve_fft_raw(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    N = _pad_size(n)
    fa = _fft.ifft2(_embed(a, n, N))
    fb = _fft.ifft2(_embed(b, n, N))
    w = _fft.fft2(fa * fb) * (N * N)
    return _extract(w, n, N)


def _convolve_direct_raw(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """O(n^4) double sum over all retained pairs (m, k - m)."""
    size = 2 * n + 1
    # For output index t, the m index runs over span s and k - m over t - s + n.
    spans = []
    for t in range(size):
        s = np.arange(max(0, t - n), min(size - 1, t + n) + 1)
        spans.append((s, t - s + n))
    out = np.empty((size, size), dtype=np.complex128)
    for ia in range(size):
        i, gi = spans[ia]
        arow = a[i]
        brow = b[gi]
        for ib in range(size):
            j, gj = spans[ib]
            out[ia, ib] = np.sum(arow[:, j] * brow[:, gj])
    return out


def convolve(f: SpectralField, g: SpectralField, method: str = "fft") -> SpectralField:
    """Coefficients of the product f*g, truncated back to the mode set.

    (f g)^(k) = sum_m fhat(m) ghat(k - m) over pairs with both m and k - m
    retained.  "fft" zero-pads to at least 3n+1 per axis and multiplies on
    the grid; "direct" performs the explicit double sum.  Both compute the
    same Galerkin truncation.
    """
    if f.modes != g.modes:
        raise ValueError(f"mode-set mismatch: n={f.n} vs n={g.n}")
    if method == "fft":
        raw = _convolve_fft_raw(f.coeff, g.coeff, f.n)
    elif method == "direct":
        raw = _convolve_direct_raw(f.coeff, g.coeff, f.n)
    else:
        raise ValueError(f"unknown convolution method {method!r}")
    return SpectralField(f.modes, _symmetrize(raw))


def mode_multiplier(f: SpectralField, symbol) -> SpectralField:
    """Apply a Fourier multiplier: uhat(k) -> symbol(k) uhat(k).

    symbol is an array over the mode grid or a callable (k1, k2) -> array.
    The output must still be a real function, i.e. the symbol needs
    symbol(-k) = conj(symbol(k)); violations surface as construction errors.
    """
    if callable(symbol):
        s = np.asarray(symbol(f.modes.k1, f.modes.k2), dtype=np.complex128)
    else:
        s = np.asarray(symbol, dtype=np.complex128)
    if s.shape != f.coeff.shape:
        raise ValueError(f"symbol shape {s.shape} does not match mode grid {f.coeff.shape}")
    if not np.isfinite(s).all():
        raise ValueError("symbol produced non-finite values")
    return SpectralField(f.modes, s * f.coeff)


def laplacian(f: SpectralField) -> SpectralField:
    """Multiplier -|k|^2."""
    return mode_multiplier(f, -f.modes.abs2)


def biharmonic(f: SpectralField) -> SpectralField:
    """Multiplier |k|^4."""
    return mode_multiplier(f, f.modes.abs2 ** 2)


def derivative(f: SpectralField, axis: int) -> SpectralField:
    """Multiplier i*k_axis (axis 0 or 1)."""
    if axis not in (0, 1):
        raise ValueError(f"axis must be 0 or 1, got {axis}")
    k = f.modes.k1 if axis == 0 else f.modes.k2
    return mode_multiplier(f, 1j * k)


def to_real_samples(f: SpectralField, grid_n: int) -> np.ndarray:
    """Evaluate u on the uniform grid: samples[a, b] = u(2 pi a / N, 2 pi b / N).

    Requires N >= 2n+2 so the round trip with from_real_samples is exact up
    to roundoff; smaller grids are refused rather than silently aliased.
    """
    N = int(grid_n)
    if N < 2 * f.n + 2:
        raise ValueError(f"grid size {N} too small for cutoff {f.n}; need N >= {2 * f.n + 2}")
    u = _fft.ifft2(_embed(f.coeff, f.n, N)) * (N * N)
    return np.ascontiguousarray(u.real)


def from_real_samples(samples: np.ndarray, n: int) -> SpectralField:
    """Inverse of to_real_samples: coefficients of a sampled real field."""
    s = np.asarray(samples, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"samples must be a square 2-D array, got shape {s.shape}")
    N = s.shape[0]
    if N < 2 * n + 2:
        raise ValueError(f"grid size {N} too small for cutoff {n}; need N >= {2 * n + 2}")
    u = _fft.fft2(s) / (N * N)
    return SpectralField(ModeSet(n), _extract(u, n, N))


def scale_modes(f: SpectralField, lam: int, n_out: int | None = None) -> SpectralField:
    """Spectral image of x -> u(lam x): vhat(lam k) = uhat(k), zero elsewhere.

    By default the output cutoff is lam * n so nothing is lost; with an
    explicit n_out, any nonzero coefficient landing outside it is an error.
    """
    if isinstance(lam, bool) or not isinstance(lam, (int, np.integer)) or lam < 1:
        raise ValueError(f"scaling factor must be an integer >= 1, got {lam!r}")
    lam = int(lam)
    n_out = lam * f.n if n_out is None else int(n_out)
    mo = ModeSet(n_out)
    src = np.arange(-f.n, f.n + 1)
    keep = np.abs(lam * src) <= n_out
    if np.any(f.coeff[~keep, :] != 0) or np.any(f.coeff[:, ~keep] != 0):
        raise ValueError(
            f"mode set overflow: nonzero coefficients map beyond cutoff {n_out} under lam={lam}"
        )
    c = np.zeros((mo.size, mo.size), dtype=np.complex128)
    dest = lam * src[keep] + n_out
    c[np.ix_(dest, dest)] = f.coeff[np.ix_(keep, keep)]
    return SpectralField(mo, c)


def with_cutoff(f: SpectralField, n: int) -> SpectralField:
    """Same field on another cutoff: embed when growing, truncate when shrinking."""
    if n == f.n:
        return f
    mo = ModeSet(n)
    c = np.zeros((mo.size, mo.size), dtype=np.complex128)
    m = min(n, f.n)
    c[n - m : n + m + 1, n - m : n + m + 1] = f.coeff[f.n - m : f.n + m + 1, f.n - m : f.n + m + 1]
    return SpectralField(mo, c)


def inner(f: SpectralField, g: SpectralField) -> float:
    """L2 inner product int_{T^2} f g dx = 4 pi^2 sum_k fhat(k) conj(ghat(k))."""
    if f.modes != g.modes:
        raise ValueError(f"mode-set mismatch: n={f.n} vs n={g.n}")
    return 4.0 * math.pi**2 * float(np.real(np.vdot(g.coeff, f.coeff)))


def write_snapshot(f: SpectralField, path) -> None:
    """Text snapshot: magic header, then 'k1 k2 re im' per retained mode."""
    n = f.n
    lines = [f"{SNAPSHOT_MAGIC} n={n}"]
    for k1 in range(-n, n + 1):
        for k2 in range(-n, n + 1):
            v = f.coeff[k1 + n, k2 + n]
            lines.append(f"{k1} {k2} {v.real:.17g} {v.imag:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path) -> SpectralField:
    """Parse a snapshot file, rejecting malformed or non-Hermitian data."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty snapshot file")
    header = lines[0]
    prefix = SNAPSHOT_MAGIC + " n="
    if not header.startswith(prefix):
        raise ValueError(f"{path}: bad snapshot header {header!r}")
    try:
        n = int(header[len(prefix):])
    except ValueError:
        raise ValueError(f"{path}: bad cutoff in header {header!r}") from None
    if n < 1:
        raise ValueError(f"{path}: cutoff must be >= 1, got {n}")
    size = 2 * n + 1
    if len(lines) - 1 != size * size:
        raise ValueError(f"{path}: expected {size * size} mode lines, found {len(lines) - 1}")
    c = np.zeros((size, size), dtype=np.complex128)
    seen = np.zeros((size, size), dtype=bool)
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 4:
            raise ValueError(f"{path}: malformed mode line {ln!r}")
        try:
            k1, k2 = int(parts[0]), int(parts[1])
            re, im = float(parts[2]), float(parts[3])
        except ValueError:
            raise ValueError(f"{path}: malformed mode line {ln!r}") from None
        if max(abs(k1), abs(k2)) > n:
            raise ValueError(f"{path}: mode ({k1}, {k2}) outside cutoff {n}")
        if seen[k1 + n, k2 + n]:
            raise ValueError(f"{path}: duplicate mode ({k1}, {k2})")
        seen[k1 + n, k2 + n] = True
        c[k1 + n, k2 + n] = complex(re, im)
    if not seen.all():
        raise ValueError(f"{path}: missing mode lines")
    if not np.isfinite(c).all():
        raise ValueError(f"{path}: non-finite coefficient")
    asym = float(np.max(np.abs(c - _hermitian_flip(c))))
    if asym > SNAPSHOT_HERMITIAN_TOL:
        raise ValueError(
            f"{path}: snapshot violates Hermitian symmetry (max deviation {asym:.3e} > {SNAPSHOT_HERMITIAN_TOL})"
        )
    return SpectralField(ModeSet(n), c)
