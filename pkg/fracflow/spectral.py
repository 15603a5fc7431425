# Licensed under the GPLv3 - see LICENSE
"""Pseudo-spectral operators on the periodic grid.

All operators act as Fourier multipliers on every time sample of a
`~fracflow.grid.SampledField`.  Conventions:

- the fractional Laplacian is Δ^{α/2} := -(-Δ)^{α/2}, multiplier -|k|^α;
- multipliers singular at k=0 annihilate the zero mode;
- multipliers odd in k (derivatives, Riesz and Biot-Savart velocities)
  annihilate the Nyquist modes, which have no real odd counterpart.
"""
import numpy as np

from .grid import SampledField, SpectralField


__all__ = ['to_modes', 'from_modes', 'frac_laplacian', 'fractional_power',
           'semigroup_apply', 'riesz_velocity', 'biot_savart_velocity',
           'k2_eval', 'kernel_k2_field', 'gradient', 'divergence', 'curl',
           'laplacian', 'bessel_potential', 'dealias_mask',
           'dealiased_product', 'apply_multiplier']


def check_alpha(alpha, upper=2.):
    """Check that alpha lies in (0, upper]."""
    alpha = float(alpha)
    if not 0. < alpha <= upper:
        raise ValueError("alpha should be in (0, {}], got {}."
                         .format(upper, alpha))
    return alpha


def to_modes(f):
    """Normalized Fourier coefficients of a single-time field.

    Parameters
    ----------
    f : `~fracflow.grid.SampledField`
        Field at a single time.

    Returns
    -------
    modes : `~fracflow.grid.SpectralField`
        Coefficients c_k with f(x) = sum_k c_k exp(i k.x).
    """
    grid = f.grid
    values = f.snapshot
    phase = grid.phase if not f.is_vector else grid.phase[..., np.newaxis]
    modes = grid.forward(values, start=0) * (phase / grid.n ** grid.d)
    return SpectralField(grid, modes)


def from_modes(modes, time=0.):
    """Real field at a single time from normalized Fourier coefficients.

    Parameters
    ----------
    modes : `~fracflow.grid.SpectralField`
        Coefficients.
    time : float, optional
        Time stamp of the resulting field.

    Returns
    -------
    f : `~fracflow.grid.SampledField`
        Real part of sum_k c_k exp(i k.x) on the lattice.
    """
    if not isinstance(modes, SpectralField):
        raise TypeError("can only transform a SpectralField.")
    grid = modes.grid
    phase = (grid.phase if modes.modes.ndim == grid.d
             else grid.phase[..., np.newaxis])
    values = grid.backward(modes.modes * (phase * grid.n ** grid.d), start=0)
    return SampledField(grid, values[np.newaxis], [time])


def apply_multiplier(f, multiplier, vector_out=False):
    """Apply a Fourier multiplier to every time sample of a field.

    Parameters
    ----------
    f : `~fracflow.grid.SampledField`
        Input field, scalar or vector.
    multiplier : array_like
        Broadcastable to ``grid.shape``, or ``grid.shape + (d,)`` if
        ``vector_out`` is set and the input is scalar.
    vector_out : bool
        Whether the multiplier maps a scalar to a vector field.

    Returns
    -------
    out : `~fracflow.grid.SampledField`
        Real field with the same times as the input.
    """
    grid = f.grid
    F = grid.forward(f.values)
    if vector_out:
        if f.is_vector:
            raise ValueError("vector-valued multiplier needs a scalar field.")
        F = F[..., np.newaxis] * multiplier
    elif f.is_vector:
        F = F * np.asarray(multiplier)[..., np.newaxis]
    else:
        F = F * multiplier
    return f.with_values(grid.backward(F))


def _odd(grid, multiplier):
    # Nyquist modes have no real counterpart for odd multipliers.
    mask = grid.nyquist
    if np.ndim(multiplier) > grid.d:
        mask = mask[..., np.newaxis]
    return np.where(mask, 0., multiplier)


def _inverse_power(grid, power):
    kabs = grid.kabs
    with np.errstate(divide='ignore'):
        inverse = np.where(kabs > 0, kabs, 1.) ** -power
    return np.where(kabs > 0, inverse, 0.)


def frac_laplacian(f, alpha):
    """Fractional Laplacian Δ^{α/2} f, multiplier -|k|^α.

    Parameters
    ----------
    f : `~fracflow.grid.SampledField`
        Scalar or vector field.
    alpha : float
        Order, in (0, 2].  For 2, this is the spectral Laplacian.
    """
    alpha = check_alpha(alpha)
    return apply_multiplier(f, -f.grid.kabs ** alpha)


def fractional_power(f, s):
    """Apply (-Δ)^{s/2}, multiplier |k|^s.

    For negative ``s``, the zero mode is annihilated.
    """
    s = float(s)
    if s >= 0:
        multiplier = f.grid.kabs ** s
    else:
        multiplier = _inverse_power(f.grid, -s)
    return apply_multiplier(f, multiplier)


def semigroup_apply(f, t, alpha):
    """Fractional heat semigroup P_t f, multiplier exp(-t |k|^α)."""
    alpha = check_alpha(alpha)
    t = float(t)
    if t < 0:
        raise ValueError("time should be non-negative, got {}.".format(t))
    return apply_multiplier(f, np.exp(-t * f.grid.kabs ** alpha))


def laplacian(f):
    """Spectral Laplacian, multiplier -|k|^2."""
    return apply_multiplier(f, -f.grid.kabs ** 2)


def bessel_potential(f, s):
    """Apply (I - Δ)^{s/2}, multiplier (1 + |k|^2)^{s/2}."""
    return apply_multiplier(f, (1. + f.grid.kabs ** 2) ** (float(s) / 2))


def _check_2d_scalar(f, name):
    if f.grid.d != 2:
        raise ValueError("{} requires a 2-dimensional grid.".format(name))
    if f.is_vector:
        raise ValueError("{} requires a scalar field.".format(name))


def riesz_velocity(theta):
    """SQG velocity Rθ = (-∂₂Δ^{-1/2}θ, ∂₁Δ^{-1/2}θ).

    Per-mode multiplier (-i k₂/|k|, i k₁/|k|), zero mode annihilated.
    The result is exactly divergence free.
    """
    _check_2d_scalar(theta, 'riesz_velocity')
    grid = theta.grid
    k1, k2 = np.broadcast_arrays(*grid.wavenumbers)
    inverse = _inverse_power(grid, 1)
    multiplier = np.stack([-1j * k2 * inverse, 1j * k1 * inverse], axis=-1)
    multiplier = _odd(grid, multiplier)
    return apply_multiplier(theta, multiplier, vector_out=True)


def biot_savart_velocity(rho):
    """Velocity u = K₂ * ρ recovered from a vorticity on the torus.

    Per-mode multiplier -i k^⊥/|k|^2 with k^⊥ = (-k₂, k₁); the zero mode
    (the mean of ρ) does not contribute.  The result is divergence free
    and its curl is ρ minus its mean.
    """
    _check_2d_scalar(rho, 'biot_savart_velocity')
    grid = rho.grid
    k1, k2 = np.broadcast_arrays(*grid.wavenumbers)
    inverse = _inverse_power(grid, 2)
    multiplier = np.stack([1j * k2 * inverse, -1j * k1 * inverse], axis=-1)
    multiplier = _odd(grid, multiplier)
    return apply_multiplier(rho, multiplier, vector_out=True)


def k2_eval(x):
    """Biot-Savart kernel K₂(x) = (-x₂, x₁) / (2π |x|²).

    Parameters
    ----------
    x : array_like
        Points in the plane, shape ``(..., 2)``.

    Raises
    ------
    ValueError
        If any point is the origin.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (2,):
        raise ValueError("points should have 2 components.")
    r2 = np.sum(x**2, axis=-1)
    if np.any(r2 == 0):
        raise ValueError("K2 is singular at the origin.")
    return np.stack([-x[..., 1], x[..., 0]], axis=-1) / (
        2. * np.pi * r2[..., np.newaxis])


def kernel_k2_field(grid):
    """K₂ on minimum-image lattice displacements, zero at the origin.

    Returned with shape ``grid.shape + (2,)``, in periodic-convolution
    layout (see `~fracflow.grid.PeriodicGrid.index_displacements`).
    """
    if grid.d != 2:
        raise ValueError("K2 is defined in 2 dimensions only.")
    z = grid.index_displacements()
    r2 = np.sum(z**2, axis=-1)
    safe = np.where(r2 > 0, r2, 1.)[..., np.newaxis]
    out = np.stack([-z[..., 1], z[..., 0]], axis=-1) / (2. * np.pi * safe)
    out[r2 == 0] = 0.
    return out


def gradient(f):
    """Spectral gradient of a scalar field, multipliers i k_j."""
    if f.is_vector:
        raise ValueError("gradient requires a scalar field.")
    grid = f.grid
    multiplier = np.stack(np.broadcast_arrays(*[1j * k for k in
                                                grid.wavenumbers]), axis=-1)
    multiplier = _odd(grid, multiplier)
    return apply_multiplier(f, multiplier, vector_out=True)


def divergence(v):
    """Spectral divergence of a vector field, sum_j i k_j v_j."""
    if not v.is_vector:
        raise ValueError("divergence requires a vector field.")
    grid = v.grid
    F = grid.forward(v.values)
    div = sum(_odd(grid, 1j * k) * F[..., j]
              for j, k in enumerate(grid.wavenumbers))
    return SampledField(grid, grid.backward(div), v.times)


def curl(v):
    """Scalar curl ∂₁v₂ - ∂₂v₁ of a planar vector field."""
    if not v.is_vector or v.grid.d != 2:
        raise ValueError("curl requires a 2-dimensional vector field.")
    grid = v.grid
    k1, k2 = grid.wavenumbers
    F = grid.forward(v.values)
    out = (_odd(grid, 1j * k1) * F[..., 1] - _odd(grid, 1j * k2) * F[..., 0])
    return SampledField(grid, grid.backward(out), v.times)


def dealias_mask(grid):
    """Boolean mask of the modes retained by the 2/3 rule.

    A mode is kept if |m_i| < n/3 along every axis, with m_i the integer
    wavenumber index.
    """
    mask = np.ones(grid.shape, bool)
    for k in grid.wavenumbers:
        m = np.abs(k) * grid.period / (2. * np.pi)
        mask = mask & (m < grid.n / 3.)
    return mask


def dealiased_product(f, g):
    """Pointwise product with 2/3-rule truncation of factors and result.

    ``g`` may be a vector field, in which case each component is
    multiplied by the scalar ``f``.
    """
    f.check_compatible(g)
    grid = f.grid
    mask = dealias_mask(grid)

    def truncate(values, vector):
        F = grid.forward(values)
        return grid.backward(F * (mask[..., np.newaxis] if vector else mask))

    a = truncate(f.values, f.is_vector)
    b = truncate(g.values, g.is_vector)
    if g.is_vector and not f.is_vector:
        a = a[..., np.newaxis]
    product = a * b
    return f.with_values(truncate(product, product.ndim > grid.d + 1))
