"""Least-squares fit of multi-Lorentzian ODMR spectra.

The model is ``1 - sum_i c_i (a_i/2)^2 / ((a_i/2)^2 + (nu - nu_i)^2)``.
Widths and contrasts are fitted as squares, ``a = s^2`` and ``c = t^2``, so
the solver stays unconstrained while keeping both non-negative.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal, stats

from .zeeman import Spectrum, SpectrumModel, lorentzian_dips

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 500
RELATIVE_SSR_TOL = 1e-10


class FitError(RuntimeError):
    pass


class FitNotConverged(FitError):
    pass


class PeakDetectionFailed(FitError):
    pass


@dataclass
class FitResult:
    model: SpectrumModel
    covariance: np.ndarray  # (3n, 3n) over [nu_1, a_1, c_1, nu_2, ...]
    ci95: np.ndarray  # (n, 3) half-widths for (center, fwhm, contrast)
    residual_rms: float
    nfev: int
    t_quantile: float

    def splitting_ci95(self, lower: int, upper: int) -> float:
        """95 % half-width of ``nu_upper - nu_lower`` from the joint covariance."""
        i, j = 3 * lower, 3 * upper
        var = self.covariance[i, i] + self.covariance[j, j] - 2.0 * self.covariance[i, j]
        return float(self.t_quantile * np.sqrt(max(var, 0.0)))


def robust_noise(y: np.ndarray) -> float:
    """Noise standard deviation from the MAD of second differences."""
    d2 = y[2:] - 2.0 * y[1:-1] + y[:-2]
    return float(1.4826 * np.median(np.abs(d2 - np.median(d2))) / np.sqrt(6.0))


def detect_dips(spectrum: Spectrum, n_peaks: int = 8) -> SpectrumModel:
    """Initial guess from the ``n_peaks`` deepest local minima of the smoothed trace.

    Minima must stand out from the noise by a prominence of four noise
    standard deviations. Width guesses are ten grid spacings; contrast
    guesses are the smoothed dip depths.
    """
    nu, y = spectrum.frequencies, spectrum.normalized_pl
    window = min(11, len(y) - (1 - len(y) % 2))
    smooth = signal.savgol_filter(y, window, 2) if window >= 5 else y
    sigma = robust_noise(y)
    idx, props = signal.find_peaks(-smooth, prominence=max(4.0 * sigma, 1e-5))
    if len(idx) < n_peaks:
        raise PeakDetectionFailed(f"found {len(idx)} dips, need {n_peaks}")
    depth = 1.0 - smooth[idx]
    keep = np.sort(idx[np.argsort(-depth, kind="stable")[:n_peaks]])
    width = 10.0 * float(np.median(np.diff(nu)))
    params = np.column_stack(
        [nu[keep], np.full(n_peaks, width), np.clip(1.0 - smooth[keep], 1e-4, 0.99)]
    ).ravel()
    return SpectrumModel.from_params(params)


def _model_and_jac(q, x):
    """Model and Jacobian in fit coordinates ``q = [x_i, s_i, t_i]``."""
    q = q.reshape(-1, 3)
    x0, s, t = q[:, 0], q[:, 1], q[:, 2]
    h = s * s / 2.0  # half width
    c = t * t
    dx = x[:, None] - x0
    den = h * h + dx * dx
    lor = h * h / den
    f = 1.0 - lor @ c
    jac = np.empty((len(x), q.size))
    # d lor / d x0 = 2 h^2 dx / den^2 ; d lor / d h = 2 h dx^2 / den^2
    jac[:, 0::3] = -c * (2.0 * h * h * dx / (den * den))
    jac[:, 1::3] = -c * (2.0 * h * dx * dx / (den * den)) * s
    jac[:, 2::3] = -lor * 2.0 * t
    return f, jac


def jacobian_physical(frequencies, centers, fwhms, contrasts) -> np.ndarray:
    """Jacobian of the model with respect to ``[nu_1, a_1, c_1, nu_2, ...]``."""
    nu = np.asarray(frequencies, dtype=float)[:, None]
    h = np.asarray(fwhms, dtype=float) / 2.0
    c = np.asarray(contrasts, dtype=float)
    dx = nu - np.asarray(centers, dtype=float)
    den = h * h + dx * dx
    lor = h * h / den
    jac = np.empty((len(nu), 3 * len(c)))
    jac[:, 0::3] = -c * (2.0 * h * h * dx / (den * den))
    jac[:, 1::3] = -c * (h * dx * dx / (den * den))
    jac[:, 2::3] = -lor
    return jac


def fit_spectrum(spectrum: Spectrum, n_peaks: int = 8, initial_guess: SpectrumModel | None = None,
                 max_iterations: int = MAX_ITERATIONS) -> FitResult:
    """Fit ``n_peaks`` Lorentzian dips by Levenberg-Marquardt.

    Without ``initial_guess`` the starting point comes from
    :func:`detect_dips`. Convergence is declared when the relative decrease
    of the residual sum of squares drops below 1e-10; exceeding
    ``max_iterations`` raises :class:`FitNotConverged`.
    """
    nu, y = spectrum.frequencies, spectrum.normalized_pl
    n_par = 3 * n_peaks
    if len(nu) < 5 * n_peaks:
        raise FitError(f"need at least {n_peaks * 5} samples, got {len(nu)}")
    guess = initial_guess if initial_guess is not None else detect_dips(spectrum, n_peaks)
    if len(guess.peaks) != n_peaks:
        raise FitError(f"initial guess has {len(guess.peaks)} peaks, expected {n_peaks}")

    # work in scaled frequency units so all parameters are O(1)
    origin = float(np.mean(nu))
    scale = 10.0 * float(np.median(np.diff(nu)))
    x = (nu - origin) / scale
    q0 = np.column_stack(
        [
            (guess.centers - origin) / scale,
            np.sqrt(guess.fwhms / scale),
            np.sqrt(np.maximum(guess.contrasts, 1e-8)),
        ]
    ).ravel()

    def residual(q):
        return _model_and_jac(q, x)[0] - y

    def jac(q):
        return _model_and_jac(q, x)[1]

    sol = optimize.least_squares(
        residual, q0, jac=jac, method="lm", ftol=RELATIVE_SSR_TOL, xtol=1e-12, gtol=1e-14,
        max_nfev=max_iterations,
    )
    if sol.status <= 0 or not np.all(np.isfinite(sol.x)):
        raise FitNotConverged(f"least squares stopped without convergence: {sol.message}")

    q = sol.x.reshape(-1, 3)
    centers = origin + scale * q[:, 0]
    fwhms = scale * q[:, 1] ** 2
    contrasts = q[:, 2] ** 2
    if np.any(fwhms <= 0) or np.any(contrasts >= 1):
        raise FitNotConverged("fit left the physical parameter domain")
    order = np.argsort(centers, kind="stable")
    centers, fwhms, contrasts = centers[order], fwhms[order], contrasts[order]

    resid = lorentzian_residual(nu, y, centers, fwhms, contrasts)
    dof = max(len(nu) - n_par, 1)
    s2 = float(resid @ resid) / dof
    J = jacobian_physical(nu, centers, fwhms, contrasts)
    # equilibrate columns: Hz-valued and dimensionless parameters differ by ~1e8
    norms = np.linalg.norm(J, axis=0)
    norms[norms == 0] = 1.0
    Js = J / norms
    cov = s2 * np.linalg.pinv(Js.T @ Js) / np.outer(norms, norms)
    tq = float(stats.t.ppf(0.975, dof))
    ci95 = (tq * np.sqrt(np.clip(np.diag(cov), 0.0, None))).reshape(-1, 3)
    model = SpectrumModel.from_params(np.column_stack([centers, fwhms, contrasts]).ravel())
    logger.debug("fit converged after %d evaluations: %s", sol.nfev, sol.message)
    return FitResult(
        model=model,
        covariance=cov,
        ci95=ci95,
        residual_rms=float(np.sqrt(np.mean(resid * resid))),
        nfev=int(sol.nfev),
        t_quantile=tq,
    )


def lorentzian_residual(nu, y, centers, fwhms, contrasts) -> np.ndarray:
    return lorentzian_dips(nu, centers, fwhms, contrasts) - y


def normalize_spectrum(spectrum: Spectrum) -> Spectrum:
    """Divide by the median of the top-decile samples."""
    y = spectrum.normalized_pl
    top = np.sort(y)[int(np.floor(0.9 * len(y))):]
    ref = float(np.median(top))
    if not ref > 0:
        raise ValueError("cannot normalize a spectrum with non-positive baseline")
    return Spectrum(spectrum.frequencies, y / ref)
