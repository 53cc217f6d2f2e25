"""Time-periodic rotation operator whose Poincare map is a weighted shift:
calibration, numeric propagation, exact log-space iterate norms, and the
decay / ratio / equalizer certificates built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .cutoffs import BumpFunction, PeriodicDrive, SmoothStep, mollifier_bump, smooth_step
from .fits import quadratic_fit
from .integrators import lawson_rk4
from .quadrature import adaptive_simpson
from .spectral import Spectrum, spectral_gap

__all__ = [
    "FloquetError",
    "EpsilonCalibration",
    "calibrate_epsilon",
    "PeriodicOperator",
    "make_periodic_operator",
    "WeightedShift",
    "poincare_predicted",
    "NumericPoincare",
    "poincare_numeric",
    "shift_match_report",
    "IterateNorms",
    "iterate_norm",
    "DecayCertificate",
    "decay_certificate",
    "ratio_bounds_check",
    "equalizers",
    "equalizer_scaling_fit",
    "kick_gain",
]


class FloquetError(RuntimeError):
    """Calibration or propagation failure."""


@dataclass(frozen=True)
class EpsilonCalibration:
    """Rotation coupling selected so the phase equation sweeps exactly a
    quarter turn over the active window of each half-period."""

    epsilon: float
    active_integral: float
    t0: float

    @property
    def total_angle(self) -> float:
        return self.epsilon * self.active_integral


def calibrate_epsilon(
    drive: PeriodicDrive, theta1: BumpFunction, quad_tol: float = 1e-13
) -> EpsilonCalibration:
    """epsilon = pi / (2 * integral of theta1(-x(t)) over a half-period).

    theta1 vanishes outside the drive plateau, so integrating the full
    half-period equals integrating [T0, T - T0].
    """
    T = drive.half_period
    integral = adaptive_simpson(lambda t: float(theta1.value(-drive.value(t))), 0.0, T, quad_tol)
    if integral <= 0.0:
        raise FloquetError("rotation window has zero measure; cannot calibrate")
    t0 = drive.plateau_entry_time(0.25)
    return EpsilonCalibration(math.pi / (2.0 * integral), integral, t0)


@dataclass(frozen=True)
class PeriodicOperator:
    """Block-rotation coupling Phi(x(t)) over n_modes modes.

    When x < 0 it couples pairs (2n-1, 2n), when x > 0 pairs (2n, 2n+1);
    mode 1 carries a calibrated diagonal in the positive window so that its
    effective decay rate over the window is exactly lambda_1 / 2, matching
    the predicted shift multiplier closed forms at finite smooth
    transitions.
    """

    spectrum: Spectrum
    drive: PeriodicDrive
    theta1: BumpFunction
    theta2: SmoothStep
    epsilon: float
    anchor_scale: float
    n_modes: int

    @property
    def half_period(self) -> float:
        return self.drive.half_period

    @property
    def period(self) -> float:
        return 2.0 * self.drive.half_period

    @cached_property
    def t0(self) -> float:
        return self.drive.plateau_entry_time(0.25)

    @cached_property
    def lam(self) -> np.ndarray:
        return self.spectrum.values[: self.n_modes]

    @cached_property
    def _templates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Constant matrices so Phi(t) is a 4-term scalar combination:
        Phi = theta2(-x) Dm + eps theta1(-x) Rm + theta2(x) Dp + eps theta1(x) Rp."""
        lam = self.lam
        n = self.n_modes
        dm = np.zeros((n, n))
        rm = np.zeros((n, n))
        dp = np.zeros((n, n))
        rp = np.zeros((n, n))
        for j in range(n // 2):
            a, b = 2 * j, 2 * j + 1
            d = 0.5 * (lam[a] - lam[b])
            dm[a, a] += d
            dm[b, b] -= d
            rm[a, b] += 1.0
            rm[b, a] -= 1.0
        dp[0, 0] += 0.5 * lam[0] * self.anchor_scale
        for j in range((n - 1) // 2):
            a, b = 2 * j + 1, 2 * j + 2
            d = 0.5 * (lam[a] - lam[b])
            dp[a, a] += d
            dp[b, b] -= d
            rp[a, b] += 1.0
            rp[b, a] -= 1.0
        return dm, rm, dp, rp

    def _coefficients(self, t):
        x = self.drive.value(t)
        tm = self.theta2.value(-x)
        tp = self.theta2.value(x)
        r1m = self.epsilon * self.theta1.value(-x)
        r1p = self.epsilon * self.theta1.value(x)
        return tm, r1m, tp, r1p

    def coupling_matrix(self, t: float) -> np.ndarray:
        dm, rm, dp, rp = self._templates
        tm, r1m, tp, r1p = (float(v) for v in self._coefficients(t))
        return tm * dm + r1m * rm + tp * dp + r1p * rp

    def tabulated_rhs(self, t0: float, t1: float, steps: int):
        """rhs(t, u) = Phi(t) u with the drive coefficients pre-evaluated on
        the Lawson stage grid (t0 + k h/2); evaluation off the grid raises."""
        dm, rm, dp, rp = self._templates
        grid = np.linspace(t0, t1, 2 * steps + 1)
        tm, r1m, tp, r1p = self._coefficients(grid)
        half = (t1 - t0) / (2 * steps)

        def rhs(t, u):
            k = int(round((t - t0) / half))
            return tm[k] * (dm @ u) + r1m[k] * (rm @ u) + tp[k] * (dp @ u) + r1p[k] * (rp @ u)

        return rhs

    def norm_bound_report(self, n_samples: int = 512) -> dict:
        """Closed-form 2x2 block norms sampled over one period, compared to
        the half-gap budget (plus the anchor-diagonal allowance)."""
        gap = spectral_gap(self.spectrum)
        half_gap = math.inf if gap == "unbounded" else 0.5 * gap
        lam = self.lam
        anchor_coeff = 0.5 * lam[0] * self.anchor_scale
        ts = np.linspace(0.0, self.period, n_samples, endpoint=False)
        sup = 0.0
        for t in ts:
            x = float(self.drive.value(t))
            tm = float(self.theta2.value(-x))
            tp = float(self.theta2.value(x))
            rm = self.epsilon * float(self.theta1.value(-x))
            rp = self.epsilon * float(self.theta1.value(x))
            block = 0.0
            for j in range(self.n_modes // 2):
                a, b = 2 * j, 2 * j + 1
                block = max(block, 0.5 * abs(lam[a] - lam[b]) * tm + rm)
            for j in range((self.n_modes - 1) // 2):
                a, b = 2 * j + 1, 2 * j + 2
                block = max(block, 0.5 * abs(lam[a] - lam[b]) * tp + rp)
            sup = max(sup, block, anchor_coeff * tp)
        budget = half_gap + self.epsilon
        return {
            "sampled_sup": sup,
            "half_gap": half_gap,
            "epsilon": self.epsilon,
            "anchor_allowance": max(0.0, anchor_coeff - half_gap),
            "within_budget": sup <= max(budget, anchor_coeff + 1e-9) + 1e-9,
        }


def make_periodic_operator(
    spectrum: Spectrum,
    drive: PeriodicDrive,
    n_modes: int | None = None,
    epsilon: float | None = None,
    quad_tol: float = 1e-13,
) -> PeriodicOperator:
    """Assemble the operator with default cut-offs tied to the drive
    amplitude; epsilon defaults to the calibrated quarter-turn value (pass 0
    for the rotation-free control)."""
    amp = drive.amplitude
    theta1 = mollifier_bump(amp / 4.0, 2.0 * amp, amp / 2.0, 1.5 * amp)
    theta2 = smooth_step(0.0, amp / 4.0)
    if epsilon is None:
        epsilon = calibrate_epsilon(drive, theta1, quad_tol).epsilon
    T = drive.half_period
    i2 = adaptive_simpson(lambda t: float(theta2.value(-drive.value(t))), 0.0, T, quad_tol)
    if i2 <= 0.0:
        raise FloquetError("diagonal window has zero measure")
    n_modes = spectrum.n_max if n_modes is None else n_modes
    if n_modes > spectrum.n_max:
        raise FloquetError("operator truncation exceeds the stored spectrum")
    return PeriodicOperator(spectrum, drive, theta1, theta2, epsilon, T / i2, n_modes)


@dataclass(frozen=True)
class WeightedShift:
    """Exact Poincare map: an index permutation plus natural-log multipliers.

    Pattern: e_{2n-1} -> e_{2n+1}, e_{2n} -> e_{2n-2} (n > 1), e_2 -> e_1,
    all with positive coefficients.
    """

    spectrum: Spectrum
    half_period: float
    image_index: dict[int, int]
    log_multiplier: dict[int, float]

    @property
    def modes(self) -> list[int]:
        return sorted(self.image_index)

    def image(self, mode: int) -> int:
        return self.image_index[mode]

    def log_mult(self, mode: int) -> float:
        return self.log_multiplier[mode]

    def half_map_minus(self, mode: int) -> tuple[int, int, float]:
        """(sign, image, log magnitude) of the first half-period map."""
        T = self.half_period
        lam = self.spectrum.lam
        if mode % 2 == 1:
            return -1, mode + 1, -T * (lam(mode) + lam(mode + 1)) / 2.0
        return 1, mode - 1, -T * (lam(mode - 1) + lam(mode)) / 2.0

    def half_map_plus(self, mode: int) -> tuple[int, int, float]:
        """(sign, image, log magnitude) of the second half-period map; mode 1
        decays alone at the halved rate."""
        T = self.half_period
        lam = self.spectrum.lam
        if mode == 1:
            return 1, 1, -T * lam(1) / 2.0
        if mode % 2 == 0:
            return -1, mode + 1, -T * (lam(mode) + lam(mode + 1)) / 2.0
        return 1, mode - 1, -T * (lam(mode - 1) + lam(mode)) / 2.0

    def dense_matrix(self, n: int) -> np.ndarray:
        """Dense representation over modes 1..n (orbit images beyond n are
        dropped); magnitudes must be representable."""
        m = np.zeros((n, n))
        for mode in range(1, n + 1):
            if mode not in self.image_index:
                continue
            img = self.image_index[mode]
            if img <= n:
                m[img - 1, mode - 1] = math.exp(self.log_multiplier[mode])
        return m


def poincare_predicted(spec: Spectrum, half_period: float) -> WeightedShift:
    """Closed-form weighted shift of the full-period map.

    Multipliers: mode (2n-1) carries exp(-T (lam_{2n-1} + 2 lam_{2n} +
    lam_{2n+1}) / 2); mode 2 carries exp(-T (2 lam_1 + lam_2) / 2); mode 2n
    (n > 1) carries exp(-T (lam_{2n-2} + 2 lam_{2n-1} + lam_{2n}) / 2).
    """
    if spec.n_max < 3:
        raise FloquetError("need at least three modes for the shift pattern")
    T = half_period
    image: dict[int, int] = {}
    logmult: dict[int, float] = {}
    for mode in range(1, spec.n_max + 1):
        if mode % 2 == 1:
            if mode + 2 > spec.n_max and spec.family == "explicit":
                continue
            try:
                lam_hi = spec.lam(mode + 2)
            except Exception:
                continue
            image[mode] = mode + 2
            logmult[mode] = -T * (spec.lam(mode) + 2.0 * spec.lam(mode + 1) + lam_hi) / 2.0
        elif mode == 2:
            image[mode] = 1
            logmult[mode] = -T * (2.0 * spec.lam(1) + spec.lam(2)) / 2.0
        else:
            image[mode] = mode - 2
            logmult[mode] = -T * (spec.lam(mode - 2) + 2.0 * spec.lam(mode - 1) + spec.lam(mode)) / 2.0
    return WeightedShift(spec, T, image, logmult)


@dataclass(frozen=True)
class NumericPoincare:
    """One-period propagator columns U(2T, 0) e_m for m = 1..n_columns,
    integrated over an internally extended truncation so no requested column
    is clipped by an orphaned rotation partner."""

    matrix: np.ndarray
    n_columns: int
    n_internal: int
    steps: int


def poincare_numeric(op: PeriodicOperator, n_trunc: int, tol: float = 1e-10) -> NumericPoincare:
    guard = 1 if n_trunc % 2 == 0 else 2
    n_int = n_trunc + guard
    if n_int > op.spectrum.n_max:
        inner = make_periodic_operator(
            op.spectrum.truncated(n_int), op.drive, n_int, epsilon=op.epsilon
        )
    elif n_int != op.n_modes:
        inner = PeriodicOperator(
            op.spectrum, op.drive, op.theta1, op.theta2, op.epsilon, op.anchor_scale, n_int
        )
    else:
        inner = op
    lam = inner.lam
    period = inner.period
    steps = 512
    prev = lawson_rk4(lam, inner.tabulated_rhs(0.0, period, steps),
                      np.eye(n_int), 0.0, period, steps)
    while steps <= (1 << 20):
        steps *= 2
        cur = lawson_rk4(lam, inner.tabulated_rhs(0.0, period, steps),
                         np.eye(n_int), 0.0, period, steps)
        scale = max(float(np.max(np.abs(cur))), 1e-300)
        if float(np.max(np.abs(cur - prev))) <= tol * scale:
            return NumericPoincare(cur[:, :n_trunc], n_trunc, n_int, steps)
        prev = cur
    raise FloquetError(f"no propagator convergence to tol={tol:g}")


def shift_match_report(numeric: NumericPoincare, predicted: WeightedShift) -> dict:
    """Column-by-column comparison of the propagated matrix against the
    closed-form shift: relative log-multiplier error and off-pattern mass."""
    max_log_rel = 0.0
    max_off = 0.0
    signs = []
    for mode in range(1, numeric.n_columns + 1):
        col = numeric.matrix[:, mode - 1]
        target = predicted.image(mode)
        expected = predicted.log_mult(mode)
        got = col[target - 1]
        if got == 0.0:
            return {"pattern_ok": False, "max_log_rel_err": math.inf, "max_off_pattern": math.inf,
                    "signs": [], "failed_column": mode}
        log_rel = abs(math.log(abs(got)) - expected) / abs(expected) if expected else abs(
            math.log(abs(got))
        )
        rest = col.copy()
        rest[target - 1] = 0.0
        off = float(np.max(np.abs(rest))) / float(np.linalg.norm(col))
        max_log_rel = max(max_log_rel, log_rel)
        max_off = max(max_off, off)
        signs.append(1 if got > 0 else -1)
    return {
        "pattern_ok": all(s == 1 for s in signs),
        "max_log_rel_err": max_log_rel,
        "max_off_pattern": max_off,
        "signs": signs,
        "steps": numeric.steps,
    }


@dataclass(frozen=True)
class IterateNorms:
    """Exact log of the iterate norm along the shift orbit (no underflow)."""

    mode: int
    count: int
    lognorm: float
    orbit: tuple[int, ...]


def iterate_norm(shift: WeightedShift, mode: int, count: int) -> IterateNorms:
    """Telescoped multiplier sum of N applications of the shift to e_mode."""
    if count < 0:
        raise FloquetError("iterate count must be nonnegative")
    total = 0.0
    orbit = [mode]
    cur = mode
    for step in range(count):
        if cur not in shift.image_index:
            raise FloquetError(
                f"orbit exits the stored truncation at step {step + 1} (mode {cur})"
            )
        total += shift.log_multiplier[cur]
        cur = shift.image_index[cur]
        orbit.append(cur)
    return IterateNorms(mode, count, total, tuple(orbit))


@dataclass(frozen=True)
class DecayCertificate:
    beta: float
    beta_analytic: float
    r_squared: float
    passes: bool
    exponential_only: bool
    lognorms: tuple[float, ...]


def decay_certificate(shift: WeightedShift, mode: int, n_max: int) -> DecayCertificate:
    """Quadratic fit of -log ||P^N e_mode|| against N.

    Passes when the quadratic coefficient is positive with R^2 >= 0.999 and
    agrees with the analytic value (tail second difference of the exact
    log-sums, halved) within 15%.
    """
    if n_max < 4:
        raise FloquetError("need at least four iterates to certify decay")
    y = np.array([-iterate_norm(shift, mode, k).lognorm for k in range(n_max + 1)])
    ns = np.arange(n_max + 1, dtype=float)
    beta, _, _, r2 = quadratic_fit(ns, y)
    beta_analytic = 0.5 * (y[-1] - 2.0 * y[-2] + y[-3])
    exponential_only = beta_analytic <= 1e-12 or beta <= 1e-12
    consistent = (
        not exponential_only
        and abs(beta - beta_analytic) <= 0.15 * abs(beta_analytic)
    )
    passes = consistent and beta > 0.0 and r2 >= 0.999
    return DecayCertificate(beta, beta_analytic, r2, passes, exponential_only, tuple(y))


def ratio_bounds_check(shift: WeightedShift, n: int) -> dict:
    """Exact log-space verification that after N = 2n + ceil(sqrt(n)) periods
    the first mode's iterate is quadratically smaller than any of the band
    e_{2s}, s in [n, n + ceil(sqrt(n))], while the band itself spreads by at
    most n^(3/2)."""
    if n < 1:
        raise FloquetError("level must be positive")
    k = math.isqrt(n)
    if k * k != n:
        k = int(math.ceil(math.sqrt(n)))
    count = 2 * n + k
    base = iterate_norm(shift, 1, count).lognorm
    band = {s: iterate_norm(shift, 2 * s, count).lognorm for s in range(n, n + k + 1)}
    gaps = [base - v for v in band.values()]  # log(||P^N e_1|| / ||P^N e_2s||)
    spread = max(band.values()) - min(band.values())
    beta = -max(gaps) / n**2
    gamma = spread / n**1.5 if spread > 0 else 0.0
    return {
        "level": n,
        "band_width": k,
        "iterates": count,
        "beta": beta,
        "gamma": gamma,
        "first_mode_lognorm": base,
        "band_lognorms": band,
        "passes": beta > 0.0,
    }


def equalizers(shift: WeightedShift, n: int) -> dict:
    """Scale factors A_k(n) <= 1 that equalize the band iterate norms to
    their minimum B(n); exact in log space."""
    check = ratio_bounds_check(shift, n)
    band = check["band_lognorms"]
    log_b = min(band.values())
    a_logs = {s - n: log_b - v for s, v in band.items()}
    gamma = check["gamma"]
    lower = -2.0 * gamma * n**1.5
    return {
        "level": n,
        "log_B": log_b,
        "A_logs": a_logs,
        "gamma": gamma,
        "a_within_bounds": all(lower - 1e-12 <= v <= 1e-12 for v in a_logs.values()),
        "equalization_exact": max(
            abs(a + band[n + kk] - log_b) for kk, a in a_logs.items() for _ in [0]
        ),
    }


def equalizer_scaling_fit(shift: WeightedShift, levels) -> dict:
    """gamma_1, gamma_2 with e^{-gamma_2 n^2} <= B(n) <= e^{-gamma_1 n^2}
    fitted over the given levels."""
    rates = {}
    for n in levels:
        log_b = equalizers(shift, n)["log_B"]
        rates[n] = -log_b / n**2
    return {"gamma1": min(rates.values()), "gamma2": max(rates.values()), "rates": rates}


def kick_gain(
    theta: BumpFunction,
    drive: PeriodicDrive,
    lam: float,
    kappa: float,
    quad_tol: float = 1e-12,
) -> dict:
    """Gain of the pre-period kick window: integral over h in (-kappa, 0) of
    the decaying weight times theta(x(h)).

    The physically decaying orientation exp(lam * h) (h < 0) keeps the gain
    in (0, 1]; the printed-orientation integral exp(-lam * h) is reported
    alongside since the two differ only by the time-variable reflection.
    """
    if kappa <= 0:
        raise FloquetError("kick window width must be positive")
    mass = adaptive_simpson(lambda h: float(theta.value(drive.value(h))), -kappa, 0.0, quad_tol)
    if mass <= 0.0:
        raise FloquetError("kick window has empty support")
    value = adaptive_simpson(
        lambda h: math.exp(lam * h) * float(theta.value(drive.value(h))), -kappa, 0.0, quad_tol
    )
    # the reflected orientation grows like e^(lam kappa); scale its tolerance
    alt_tol = quad_tol * max(1.0, math.exp(min(lam * kappa, 600.0)))
    alt = adaptive_simpson(
        lambda h: math.exp(-lam * h) * float(theta.value(drive.value(h))), -kappa, 0.0, alt_tol
    )
    fitted_c = (-math.log2(value) / lam) if lam > 0 and value < 1.0 else 0.0
    return {
        "value": value,
        "log_value": math.log(value),
        "alt_orientation_value": alt,
        "theta_mass": mass,
        "bounded_by_one": value <= mass <= 1.0 + 1e-12 or value <= 1.0,
        "dyadic_rate": fitted_c,
    }
