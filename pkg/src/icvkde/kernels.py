"""The two-parameter family of selection kernels used for cross-validation.

A selection kernel is a tall standard Gaussian minus a scaled wide (or
narrow) one::

    L(u; alpha, sigma) = (1 + alpha) phi(u) - (alpha / sigma) phi(u / sigma)

It integrates to one but is generally not a density.  Cross-validating with
``L`` and rescaling the resulting bandwidth by a kernel-only constant gives
a bandwidth for the Gaussian estimation kernel; that is the indirect
cross-validation pipeline implemented in :mod:`icvkde.crossval`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateKernelError
from .mixtures import DEGENERATE_MU2_TOL, SQRT_PI, GaussianCombination

__all__ = ["SelectionKernel", "KernelMoments", "KernelFamily", "GAUSSIAN_ROUGHNESS"]

#: R(phi) = 1 / (2 sqrt(pi)), the roughness of the Gaussian kernel
GAUSSIAN_ROUGHNESS = 1.0 / (2.0 * SQRT_PI)


class KernelFamily(enum.Enum):
    """Qualitative shape classes of the selection-kernel family."""

    CUT_OUT_MIDDLE = "cut-out-middle"
    DENSITY = "density"
    NEGATIVE_TAILED = "negative-tailed"


@dataclass(frozen=True)
class KernelMoments:
    """Moment and roughness functionals of a selection kernel.

    ``r_rho`` is the roughness of the cross-validation noise kernel
    ``rho = L*L - 2L`` that drives the variance of LSCV-type criteria.
    """

    mu2: float
    mu4: float
    r_l: float
    r_rho: float


@dataclass(frozen=True)
class SelectionKernel:
    """Selection kernel ``L(.; alpha, sigma)`` with cached derived constants.

    ``alpha = 0`` (or ``sigma = 1``) recovers the Gaussian kernel.  Instances
    are immutable; derived quantities are computed once and cached.
    """

    alpha: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        alpha = float(self.alpha)
        sigma = float(self.sigma)
        if not (np.isfinite(alpha) and alpha >= 0.0):
            raise ValueError(f"alpha must be >= 0, got {self.alpha!r}")
        if not (np.isfinite(sigma) and sigma > 0.0):
            raise ValueError(f"sigma must be > 0, got {self.sigma!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "sigma", sigma)

    # -- representations -------------------------------------------------

    def as_combination(self) -> GaussianCombination:
        """``L`` as a signed combination of two centred Gaussians."""
        a, s = self.alpha, self.sigma
        return GaussianCombination([1.0 + a, -a], [0.0, 0.0], [1.0, s])

    def self_convolution(self) -> GaussianCombination:
        """``L * L`` in closed form: three centred Gaussians with total mass 1."""
        a, s = self.alpha, self.sigma
        return GaussianCombination(
            [(1.0 + a) ** 2, -2.0 * a * (1.0 + a), a * a],
            [0.0, 0.0, 0.0],
            [math.sqrt(2.0), math.sqrt(1.0 + s * s), s * math.sqrt(2.0)],
        )

    # -- pointwise and integral quantities --------------------------------

    def evaluate(self, u):
        """Kernel value(s) at ``u``."""
        return self.as_combination().evaluate(u)

    @property
    def mu2(self) -> float:
        """Second moment ``1 + alpha - alpha sigma^2`` (may be negative)."""
        a, s = self.alpha, self.sigma
        return 1.0 + a - a * s * s

    @property
    def mu4(self) -> float:
        """Fourth moment ``3 (1 + alpha - alpha sigma^4)``."""
        a, s = self.alpha, self.sigma
        return 3.0 * (1.0 + a - a * s ** 4)

    @cached_property
    def roughness(self) -> float:
        """R(L), the integrated squared kernel."""
        return self.as_combination().roughness()

    def cv_noise_kernel(self) -> GaussianCombination:
        """The combination ``nu = L*L - 2L`` whose scale derivative drives the
        stochastic error of cross-validated bandwidths."""
        conv = self.self_convolution()
        lc = self.as_combination()
        return GaussianCombination(
            np.concatenate([conv.coefs, -2.0 * lc.coefs]),
            np.concatenate([conv.means, lc.means]),
            np.concatenate([conv.sds, lc.sds]),
        )

    @cached_property
    def cv_noise_roughness(self) -> float:
        """Roughness of the cross-validation noise kernel.

        The bandwidth enters the criterion only through ``(1/h) nu(u/h)``
        with ``nu = L*L - 2L``, so differentiating in ``h`` produces the
        kernel ``d/du [u nu(u)]``; its roughness is what the asymptotic MSE
        consumes.  For centred Gaussian components ``c_k phi_{s_k}`` that
        derivative is ``-c_k s_k^2 phi_{s_k}''``, giving the closed form::

            sum_jk c_j c_k s_j^2 s_k^2 phi^{(4)}_{sqrt(s_j^2+s_k^2)}(0)
        """
        nu = self.cv_noise_kernel()
        scaled = GaussianCombination(-nu.coefs * nu.sds ** 2, nu.means, nu.sds)
        return scaled.roughness(deriv=2)

    def moments(self) -> KernelMoments:
        return KernelMoments(
            mu2=self.mu2,
            mu4=self.mu4,
            r_l=self.roughness,
            r_rho=self.cv_noise_roughness,
        )

    @cached_property
    def rescale_constant(self) -> float:
        """Constant converting an L-kernel bandwidth to a Gaussian-kernel one.

        The ratio of the two kernels' large-sample optimal bandwidths,
        ``C = (mu2^2 / (2 sqrt(pi) R(L)))^(1/5)``; exactly 1 for the Gaussian
        member.  Undefined (degenerate) when the second moment vanishes.
        """
        mu2 = self.mu2
        if abs(mu2) < DEGENERATE_MU2_TOL:
            raise DegenerateKernelError(
                f"selection kernel (alpha={self.alpha}, sigma={self.sigma}) is "
                "higher order (second moment ~ 0); no bandwidth rescaling exists"
            )
        return (mu2 * mu2 / (2.0 * SQRT_PI * self.roughness)) ** 0.2

    def classify(self) -> KernelFamily:
        """Shape family: negative dip in the middle, a density, or negative tails.

        Boundary cases (``sigma`` exactly ``alpha / (1 + alpha)`` or exactly 1)
        classify as densities, as does every kernel with ``alpha = 0``.
        """
        a, s = self.alpha, self.sigma
        if a == 0.0:
            return KernelFamily.DENSITY
        if s < a / (1.0 + a):
            return KernelFamily.CUT_OUT_MIDDLE
        if s <= 1.0:
            return KernelFamily.DENSITY
        return KernelFamily.NEGATIVE_TAILED
