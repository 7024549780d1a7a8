"""Spectral right-hand sides of the two evolution equations.

Epitaxial growth:  du/dt = K0 lap u + 2 K1 det D^2 u - K2 lap^2 u
                           - (K3/2) lap (lap u)^2
Thin film (zero-mean variable v = u - 1):
                   dv/dt = -lap^2 v - grad v . grad lap v - v lap^2 v
                           - chi lap (1 + v)^p

Each quadratic term is assembled from truncated convolutions of derivative
fields; the *_pointwise twins evaluate the same quantities by sampling on an
alias-free grid (independent transform path, numpy.fft) and exist as oracles
for cross-checking.  Derivative multipliers carry the analytic signs:
d_j <-> i k_j, lap <-> -|k|^2, lap^2 <-> |k|^4.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as _sfft

from .spectral import (
    ModeSet,
    SpectralField,
    _convolve_fft_raw,
    _embed,
    _extract,
    _grids,
    _symmetrize,
)

__all__ = [
    "EpitaxialParams",
    "ThinFilmParams",
    "MeanGauge",
    "EpitaxialRhs",
    "ThinFilmRhs",
    "hessian_det2",
    "delta_of_delta_sq",
    "epitaxial_rhs",
    "power_term",
    "grad_dot_grad_lap",
    "times_bilap",
    "thinfilm_rhs",
    "hessian_det2_pointwise",
    "delta_of_delta_sq_pointwise",
    "grad_dot_grad_lap_pointwise",
    "times_bilap_pointwise",
    "epitaxial_rhs_pointwise",
    "thinfilm_rhs_pointwise",
]

ZERO_MEAN_TOL = 1e-12


@dataclass(frozen=True)
class EpitaxialParams:
    """Diffusion/coupling coefficients; K0, K1, K3 >= 0 and K2 > 0."""

    K0: float = 0.0
    K1: float = 0.0
    K2: float = 1.0
    K3: float = 0.0

    def __post_init__(self):
        for name in ("K0", "K1", "K3"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} >= 0 required, got {v!r}")
        if not (np.isfinite(self.K2) and self.K2 > 0):
            raise ValueError(f"K2 > 0 required, got {self.K2!r}")


@dataclass(frozen=True)
class ThinFilmParams:
    """Porous-medium coupling chi in (0, 1), integer exponent p >= 2, and the
    estimate constant c (not fixed by the theory; every report echoes it)."""

    chi: float
    p: int
    c_estimate: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.chi) and 0.0 < self.chi < 1.0):
            raise ValueError(f"0 < chi < 1 required, got {self.chi!r}")
        if isinstance(self.p, bool) or not isinstance(self.p, (int, np.integer)) or self.p < 2:
            raise ValueError(f"p must be an integer >= 2, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        if not (np.isfinite(self.c_estimate) and self.c_estimate > 0):
            raise ValueError(f"c_estimate > 0 required, got {self.c_estimate!r}")


@dataclass(frozen=True)
class MeanGauge:
    """Conserved mean of u; thin-film runs are normalized to mean_u0 = 1."""

    mean_u0: float = 1.0


def _require_zero_mean(v: SpectralField, what: str) -> None:
    m = abs(v.coeff[v.n, v.n])
    if m > ZERO_MEAN_TOL:
        raise ValueError(f"{what} must have zero mean, |vhat(0)| = {m:.3e}")


def _check_power_exponent(p) -> int:
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or p < 2:
        raise ValueError(f"power exponent must be an integer >= 2, got {p!r}")
    return int(p)


class _Quadratics:
    """Per-cutoff derivative multipliers and the quadratic assemblies built
    from them.  One instance per n, cached: steppers call these in the hot
    loop."""

    def __init__(self, n: int):
        self.n = int(n)
        k1, k2, abs2 = _grids(self.n)
        self.abs2 = abs2
        self._m11 = -(k1 * k1).astype(np.float64)
        self._m22 = -(k2 * k2).astype(np.float64)
        self._m12 = -(k1 * k2).astype(np.float64)
        self._lap = -abs2
        self._bih = abs2**2
        self._d1 = 1j * k1.astype(np.float64)
        self._d2 = 1j * k2.astype(np.float64)
        self._d1lap = -1j * k1 * abs2
        self._d2lap = -1j * k2 * abs2

    def hessian(self, c: np.ndarray) -> np.ndarray:
        """2 det D^2 u: weight |m|^2 |k-m|^2 - (m.(k-m))^2 on uhat(m) uhat(k-m),
        via conv(lap u, lap u) - conv(u,11, u,11) - 2 conv(u,12, u,12)
        - conv(u,22, u,22)."""
        n = self.n
        out = _convolve_fft_raw(self._lap * c, self._lap * c, n)
        out -= _convolve_fft_raw(self._m11 * c, self._m11 * c, n)
        out -= 2.0 * _convolve_fft_raw(self._m12 * c, self._m12 * c, n)
        out -= _convolve_fft_raw(self._m22 * c, self._m22 * c, n)
        return out

    def ddsq(self, c: np.ndarray) -> np.ndarray:
        """lap (lap u)^2 = 2 (lap^2 u . lap u + grad lap u . grad lap u);
        weights -2 (|m|^4 |k-m|^2 + (m.(k-m)) |m|^2 |k-m|^2)."""
        n = self.n
        out = _convolve_fft_raw(self._bih * c, self._lap * c, n)
        out += _convolve_fft_raw(self._d1lap * c, self._d1lap * c, n)
        out += _convolve_fft_raw(self._d2lap * c, self._d2lap * c, n)
        return 2.0 * out

    def gradlap(self, c: np.ndarray) -> np.ndarray:
        """grad v . grad lap v = v,i v,jji; weight m.(k-m) |k-m|^2."""
        n = self.n
        out = _convolve_fft_raw(self._d1 * c, self._d1lap * c, n)
        out += _convolve_fft_raw(self._d2 * c, self._d2lap * c, n)
        return out

    def timesbilap(self, c: np.ndarray) -> np.ndarray:
        """v lap^2 v; weight |k-m|^4."""
        return _convolve_fft_raw(c, self._bih * c, self.n)

    def power_hat(self, c: np.ndarray, p: int) -> np.ndarray:
        """Galerkin coefficients of (1 + v)^p: sampled on an alias-free grid
        (N >= (p+1) n + 1), raised pointwise, truncated once."""
        N = _sfft.next_fast_len((p + 1) * self.n + 1)
        s = (_sfft.ifft2(_embed(c, self.n, N)) * (N * N)).real
        return _extract(_sfft.fft2((1.0 + s) ** p) / (N * N), self.n, N)


@lru_cache(maxsize=None)
def _kernel(n: int) -> _Quadratics:
    return _Quadratics(n)


class EpitaxialRhs:
    """Stepper-facing evaluator: diagonal linear symbol plus the explicit
    nonlinearity, with the k = 0 output pinned to zero (both nonlinearities
    integrate to zero over the torus, and the mean is frozen structurally)."""

    def __init__(self, n: int, params: EpitaxialParams):
        self.n = int(n)
        self.params = params
        self.q = _kernel(self.n)
        self.linear = -params.K0 * self.q.abs2 - params.K2 * self.q.abs2**2
        self.linear.setflags(write=False)

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        p = self.params
        out = np.zeros_like(c)
        if p.K1 != 0.0:
            out += p.K1 * self.q.hessian(c)
        if p.K3 != 0.0:
            out -= 0.5 * p.K3 * self.q.ddsq(c)
        out = _symmetrize(out)
        out[self.n, self.n] = 0.0
        return out

    def full(self, c: np.ndarray) -> np.ndarray:
        return self.linear * c + self.nonlinear(c)


class ThinFilmRhs:
    """Stepper-facing evaluator for the zero-mean thin-film system: linear
    symbol -|k|^4, the two quadratic convolutions and -chi lap (1+v)^p
    explicit.  k = 0 output vanishes by the divergence structure and is
    pinned exactly."""

    def __init__(self, n: int, params: ThinFilmParams):
        self.n = int(n)
        self.params = params
        self.q = _kernel(self.n)
        self.linear = -(self.q.abs2**2)
        self.linear.setflags(write=False)

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        out = -self.q.gradlap(c)
        out -= self.q.timesbilap(c)
        # -chi lap (1+v)^p has coefficient +chi |k|^2 power_hat(k)
        out += self.params.chi * self.q.abs2 * self.q.power_hat(c, self.params.p)
        out = _symmetrize(out)
        out[self.n, self.n] = 0.0
        return out

    def full(self, c: np.ndarray) -> np.ndarray:
        return self.linear * c + self.nonlinear(c)


def hessian_det2(u: SpectralField) -> SpectralField:
    """Spectral 2 det D^2 u = u,11 u,22 - (u,12)^2, doubled.

    The k = 0 coefficient vanishes to roundoff: det D^2 u is a null
    Lagrangian, so its torus integral is zero.
    """
    return SpectralField(u.modes, _symmetrize(_kernel(u.n).hessian(u.coeff)))


def delta_of_delta_sq(u: SpectralField) -> SpectralField:
    """Spectral lap (lap u)^2, assembled from the two stated convolutions;
    identical (to roundoff) to the -|k|^2 multiplier applied to
    conv(lap u, lap u)."""
    return SpectralField(u.modes, _symmetrize(_kernel(u.n).ddsq(u.coeff)))


def _check_finite_term(arr: np.ndarray, term: str) -> None:
    if not np.isfinite(arr).all():
        raise FloatingPointError(f"non-finite values in term {term}")


def epitaxial_rhs(u: SpectralField, params: EpitaxialParams) -> SpectralField:
    """Full epitaxial right-hand side in spectral form; conserves the mean."""
    q = _kernel(u.n)
    out = (-params.K0 * q.abs2 - params.K2 * q.abs2**2) * u.coeff
    _check_finite_term(out, "K0*lap(u) - K2*lap^2(u)")
    if params.K1 != 0.0:
        t = params.K1 * q.hessian(u.coeff)
        _check_finite_term(t, "K1 * 2 det D^2 u")
        out = out + t
    if params.K3 != 0.0:
        t = -0.5 * params.K3 * q.ddsq(u.coeff)
        _check_finite_term(t, "-(K3/2) lap (lap u)^2")
        out = out + t
    # k = 0 stays zero to roundoff on its own: every term is an exact
    # derivative except det D^2 u, which is a null Lagrangian.
    return SpectralField(u.modes, _symmetrize(out))


def power_term(v: SpectralField, p) -> SpectralField:
    """Galerkin coefficients of (1 + v)^p for integer p >= 2."""
    p = _check_power_exponent(p)
    return SpectralField(v.modes, _symmetrize(_kernel(v.n).power_hat(v.coeff, p)))


def grad_dot_grad_lap(v: SpectralField) -> SpectralField:
    """Spectral grad v . grad lap v = v,i v,jji; weight m.(k-m) |k-m|^2."""
    return SpectralField(v.modes, _symmetrize(_kernel(v.n).gradlap(v.coeff)))


def times_bilap(v: SpectralField) -> SpectralField:
    """Spectral v lap^2 v; weight |k-m|^4."""
    return SpectralField(v.modes, _symmetrize(_kernel(v.n).timesbilap(v.coeff)))


def thinfilm_rhs(v: SpectralField, params: ThinFilmParams) -> SpectralField:
    """Full thin-film right-hand side in the zero-mean variable v."""
    _require_zero_mean(v, "thin-film state")
    q = _kernel(v.n)
    out = -(q.abs2**2) * v.coeff
    _check_finite_term(out, "-lap^2 v")
    t = -q.gradlap(v.coeff)
    _check_finite_term(t, "-grad v . grad lap v")
    out = out + t
    t = -q.timesbilap(v.coeff)
    _check_finite_term(t, "-v lap^2 v")
    out = out + t
    t = params.chi * q.abs2 * q.power_hat(v.coeff, params.p)
    _check_finite_term(t, "-chi lap (1+v)^p")
    out = out + t
    # k = 0 cancels to roundoff: the whole right side is in divergence form.
    return SpectralField(v.modes, _symmetrize(out))


# ---------------------------------------------------------------------------
# Pointwise oracles: sample derivative fields on a padded grid (numpy.fft),
# multiply in real space, transform back once.  Kept deliberately separate
# from the convolution assembly above.
# ---------------------------------------------------------------------------


def _big_wavenumbers(N: int) -> np.ndarray:
    k = np.fft.fftfreq(N, d=1.0 / N)
    return k[:, None] ** 2 + k[None, :] ** 2


def _sample(coeff: np.ndarray, n: int, N: int, mult: np.ndarray | None = None) -> np.ndarray:
    c = coeff if mult is None else mult * coeff
    big = np.zeros((N, N), dtype=np.complex128)
    idx = np.arange(-n, n + 1) % N
    big[np.ix_(idx, idx)] = c
    return (np.fft.ifft2(big) * (N * N)).real


def _gather(big_hat: np.ndarray, n: int, N: int) -> np.ndarray:
    idx = np.arange(-n, n + 1) % N
    return big_hat[np.ix_(idx, idx)]


def _oracle_field(modes: ModeSet, raw: np.ndarray) -> SpectralField:
    return SpectralField(modes, _symmetrize(raw))


def hessian_det2_pointwise(u: SpectralField, pad: int | None = None) -> SpectralField:
    n = u.n
    N = pad or (4 * n + 3)
    k1, k2, _ = _grids(n)
    u11 = _sample(u.coeff, n, N, -(k1 * k1).astype(float))
    u22 = _sample(u.coeff, n, N, -(k2 * k2).astype(float))
    u12 = _sample(u.coeff, n, N, -(k1 * k2).astype(float))
    w = 2.0 * (u11 * u22 - u12 * u12)
    return _oracle_field(u.modes, _gather(np.fft.fft2(w) / (N * N), n, N))


def delta_of_delta_sq_pointwise(u: SpectralField, pad: int | None = None) -> SpectralField:
    n = u.n
    N = pad or (4 * n + 3)
    _, _, abs2 = _grids(n)
    lap = _sample(u.coeff, n, N, -abs2)
    w_hat = np.fft.fft2(lap * lap) / (N * N)
    out = -_big_wavenumbers(N) * w_hat
    return _oracle_field(u.modes, _gather(out, n, N))


def grad_dot_grad_lap_pointwise(v: SpectralField, pad: int | None = None) -> SpectralField:
    n = v.n
    N = pad or (4 * n + 3)
    k1, k2, abs2 = _grids(n)
    d1 = _sample(v.coeff, n, N, 1j * k1.astype(float))
    d2 = _sample(v.coeff, n, N, 1j * k2.astype(float))
    d1l = _sample(v.coeff, n, N, -1j * k1 * abs2)
    d2l = _sample(v.coeff, n, N, -1j * k2 * abs2)
    w = d1 * d1l + d2 * d2l
    return _oracle_field(v.modes, _gather(np.fft.fft2(w) / (N * N), n, N))


def times_bilap_pointwise(v: SpectralField, pad: int | None = None) -> SpectralField:
    n = v.n
    N = pad or (4 * n + 3)
    _, _, abs2 = _grids(n)
    vs = _sample(v.coeff, n, N)
    bih = _sample(v.coeff, n, N, abs2**2)
    return _oracle_field(v.modes, _gather(np.fft.fft2(vs * bih) / (N * N), n, N))


def epitaxial_rhs_pointwise(u: SpectralField, params: EpitaxialParams,
                            pad: int | None = None) -> SpectralField:
    n = u.n
    N = pad or (4 * n + 3)
    k1, k2, abs2 = _grids(n)
    lap = _sample(u.coeff, n, N, -abs2)
    bih = _sample(u.coeff, n, N, abs2**2)
    u11 = _sample(u.coeff, n, N, -(k1 * k1).astype(float))
    u22 = _sample(u.coeff, n, N, -(k2 * k2).astype(float))
    u12 = _sample(u.coeff, n, N, -(k1 * k2).astype(float))
    point = (params.K0 * lap
             + 2.0 * params.K1 * (u11 * u22 - u12 * u12)
             - params.K2 * bih)
    out = np.fft.fft2(point) / (N * N)
    if params.K3 != 0.0:
        w_hat = np.fft.fft2(lap * lap) / (N * N)
        out += 0.5 * params.K3 * _big_wavenumbers(N) * w_hat
    return _oracle_field(u.modes, _gather(out, n, N))


def thinfilm_rhs_pointwise(v: SpectralField, params: ThinFilmParams,
                           pad: int | None = None) -> SpectralField:
    _require_zero_mean(v, "thin-film state")
    n = v.n
    N = pad or max(4 * n + 3, (params.p + 1) * n + 2)
    k1, k2, abs2 = _grids(n)
    vs = _sample(v.coeff, n, N)
    bih = _sample(v.coeff, n, N, abs2**2)
    d1 = _sample(v.coeff, n, N, 1j * k1.astype(float))
    d2 = _sample(v.coeff, n, N, 1j * k2.astype(float))
    d1l = _sample(v.coeff, n, N, -1j * k1 * abs2)
    d2l = _sample(v.coeff, n, N, -1j * k2 * abs2)
    point = -bih - (d1 * d1l + d2 * d2l) - vs * bih
    out = np.fft.fft2(point) / (N * N)
    w_hat = np.fft.fft2((1.0 + vs) ** params.p) / (N * N)
    out += params.chi * _big_wavenumbers(N) * w_hat
    return _oracle_field(v.modes, _gather(out, n, N))
