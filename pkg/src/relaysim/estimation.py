"""LMMSE channel estimation through low-resolution ADCs, per hop.

Both hops share the same structure: orthogonal pilots are transmitted, the
receiver quantizes (AQNM), despreads with the conjugate pilot matrix, and
applies the LMMSE filter built from the observation covariance. The
resulting estimate and its error are each distributed as a separable
correlated Rayleigh channel ("equivalent form"), with receive-side matrices
splitting the true receive correlation and transmit-side matrices scaled so
the per-user energy budget is conserved exactly. Rate analysis and Monte
Carlo trials both consume that equivalent form, via EstimateModel.
"""

from dataclasses import dataclass

import numpy as np

from .channel import complex_normal, draw_first_hop, draw_second_hop
from .correlation import psd_sqrt
from .errors import DegenerateEstimateError, IllConditionedError
from .quantizer import aqnm_quantize

# refuse to build LMMSE filters from observation covariances with a worse
# spectral condition number than this
MAX_CONDITION = 1e14


@dataclass(frozen=True)
class PilotConfig:
    """Pilot lengths, powers, and the orthonormal pilot matrices."""

    tau1: int
    tau2: int
    power1: float
    power2: float
    phi: np.ndarray       # tau1 x K, phi^H phi = I
    theta: np.ndarray     # tau2 x K, theta^H theta = I

    @classmethod
    def build(cls, tau1, tau2, power1, power2, n_users):
        return cls(tau1=int(tau1), tau2=int(tau2),
                   power1=float(power1), power2=float(power2),
                   phi=orthonormal_pilots(tau1, n_users),
                   theta=orthonormal_pilots(tau2, n_users))

    def __post_init__(self):
        for name, mat, tau in (("phi", self.phi, self.tau1),
                               ("theta", self.theta, self.tau2)):
            if mat.shape[0] != tau:
                raise ValueError(f"{name} must have {tau} rows, got {mat.shape[0]}")
            gram = mat.conj().T @ mat
            if not np.allclose(gram, np.eye(mat.shape[1]), atol=1e-12):
                raise ValueError(f"{name} columns are not orthonormal")
        if self.power1 <= 0.0 or self.power2 <= 0.0:
            raise ValueError("pilot powers must be positive")


def orthonormal_pilots(tau, n_users):
    """First n_users columns of the unitary tau-point DFT matrix."""
    tau = int(tau)
    n_users = int(n_users)
    if n_users < 0 or tau < max(n_users, 1):
        raise ValueError(f"pilot length {tau} cannot carry {n_users} orthogonal pilots")
    t = np.arange(tau)[:, None]
    k = np.arange(n_users)[None, :]
    return np.exp(-2j * np.pi * t * k / tau) / np.sqrt(tau)


@dataclass(frozen=True)
class EstimateModel:
    """Equivalent-form description of an LMMSE channel estimate.

    The estimate is receive_hat^(1/2) @ H1 @ sqrt(transmit_hat) and the
    error receive_err^(1/2) @ H2 @ sqrt(transmit_err) with H1, H2 iid
    CN(0, 1) and independent; relay_gain multiplies the second hop only
    (1.0 for the first hop). transmit_hat / transmit_err are K x K
    (diagonal for the first hop, where they hold the per-user gains).
    """

    receive_hat: np.ndarray
    receive_err: np.ndarray
    transmit_hat: np.ndarray
    transmit_err: np.ndarray
    relay_gain: float = 1.0

    @property
    def gains_hat(self):
        return np.diag(self.transmit_hat).real.copy()

    @property
    def gains_err(self):
        return np.diag(self.transmit_err).real.copy()

    def validate(self, receive_corr, transmit_truth, rtol=1e-8):
        """Check the construction identities against the true statistics.

        receive_hat + receive_err must reassemble the true receive
        correlation, all four matrices must be PSD (within tolerance), and
        the per-user energy split must be exact:
        hat_gain * tr(receive_hat) + err_gain * tr(receive_err) equals
        n * true_gain entrywise (times relay_gain on the second hop).
        """
        n = self.receive_hat.shape[0]
        total = self.receive_hat + self.receive_err
        if not np.allclose(total, receive_corr, atol=1e-10 * max(1.0, abs(np.trace(receive_corr)))):
            raise AssertionError("receive-side split does not sum to the true correlation")
        for mat in (self.receive_hat, self.receive_err, self.transmit_hat, self.transmit_err):
            w = np.linalg.eigvalsh(mat)
            if w.size and w[0] < -1e-10 * max(float(w[-1]), 1.0):
                raise AssertionError("estimate-model matrix is not PSD")
        lhs = (np.trace(self.receive_hat).real * self.transmit_hat
               + np.trace(self.receive_err).real * self.transmit_err) * self.relay_gain
        rhs = n * self.relay_gain * transmit_truth
        scale = max(float(np.abs(rhs).max()), 1e-300)
        if not np.allclose(lhs, rhs, atol=rtol * scale):
            raise AssertionError("per-user energy split is not conserved")


def observation_covariance_first_hop(recv_corr, gains, adc, tau, power, noise_var):
    """Covariance of one despread pilot-observation column at the relay."""
    gains = np.asarray(gains, dtype=np.float64)
    total_gain = float(gains.sum())
    n = recv_corr.shape[0]
    k = gains.size
    a = adc.alpha ** 2 * tau * power * total_gain
    c = k * adc.alpha * ((1.0 - adc.alpha) * power * total_gain + noise_var)
    return a * recv_corr + c * np.eye(n)


def observation_covariance_second_hop(recv_corr, relay_gain, adc, tau, power, noise_var, n_users):
    """Covariance of one despread pilot-observation column at the destination."""
    m = recv_corr.shape[0]
    a = adc.alpha ** 2 * tau * power * relay_gain
    c = n_users * adc.alpha * ((1.0 - adc.alpha) * power * relay_gain + noise_var)
    return a * recv_corr + c * np.eye(m)


def _filter_from_eigs(w, u, scale, a, c):
    """scale * recv_corr @ inv(a * recv_corr + c * I) in the eigenbasis."""
    denom = a * w + c
    cond = float(denom.max() / denom.min()) if denom.size else 1.0
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(
            f"observation covariance condition number {cond:.3e} exceeds {MAX_CONDITION:.0e}")
    return (u * (scale * w / denom)) @ u.conj().T


def lmmse_filter_first_hop(recv_corr, gains, adc, tau, power, noise_var):
    """LMMSE filter mapping despread observations to the channel estimate."""
    gains = np.asarray(gains, dtype=np.float64)
    total_gain = float(gains.sum())
    k = gains.size
    w, u = np.linalg.eigh(recv_corr)
    a = adc.alpha ** 2 * tau * power * total_gain
    c = k * adc.alpha * ((1.0 - adc.alpha) * power * total_gain + noise_var)
    scale = adc.alpha * np.sqrt(tau * power) * total_gain
    return _filter_from_eigs(w, u, scale, a, c)


def lmmse_filter_second_hop(recv_corr, relay_gain, adc, tau, power, noise_var, n_users):
    w, u = np.linalg.eigh(recv_corr)
    a = adc.alpha ** 2 * tau * power * relay_gain
    c = n_users * adc.alpha * ((1.0 - adc.alpha) * power * relay_gain + noise_var)
    scale = adc.alpha * np.sqrt(tau * power * n_users) * relay_gain
    return _filter_from_eigs(w, u, scale, a, c)


def mse_first_hop_closed_form(recv_corr, gains, adc, tau, power, noise_var):
    """Total MSE E{||estimate - channel||_F^2} for the first hop."""
    gains = np.asarray(gains, dtype=np.float64)
    total_gain = float(gains.sum())
    n = recv_corr.shape[0]
    k = gains.size
    lam = np.linalg.eigvalsh(recv_corr)
    a = adc.alpha ** 2 * tau * power * total_gain
    c = k * adc.alpha * ((1.0 - adc.alpha) * power * total_gain + noise_var)
    captured = np.sum(a * lam ** 2 / (a * lam + c))
    return float(total_gain * (n - captured))


def mse_second_hop_closed_form(recv_corr, relay_gain, adc, tau, power, noise_var, n_users):
    """Total MSE for the second hop (independent of the transmit-side correlation)."""
    m = recv_corr.shape[0]
    lam = np.linalg.eigvalsh(recv_corr)
    a = adc.alpha ** 2 * tau * power * relay_gain
    c = n_users * adc.alpha * ((1.0 - adc.alpha) * power * relay_gain + noise_var)
    captured = np.sum(a * lam ** 2 / (a * lam + c))
    return float(n_users * relay_gain * (m - captured))


def simulate_pilot_first_hop(recv_corr, gains, adc, tau, power, noise_var, rng,
                             pilots=None, recv_sqrt=None, lmmse=None):
    """Draw a channel, run the quantized pilot phase, return (channel, estimate).

    The per-antenna variance fed to the quantizer is the realized
    time-averaged pilot power power * diag(F F^H) + noise_var, constant over
    the pilot block because the pilot columns are orthonormal.
    """
    gains = np.asarray(gains, dtype=np.float64)
    k = gains.size
    if pilots is None:
        pilots = orthonormal_pilots(tau, k)
    if recv_sqrt is None:
        recv_sqrt = psd_sqrt(recv_corr)
    if lmmse is None:
        lmmse = lmmse_filter_first_hop(recv_corr, gains, adc, tau, power, noise_var)
    chan = draw_first_hop(recv_corr, gains, rng, recv_sqrt=recv_sqrt)
    received = (np.sqrt(tau * power) * chan @ pilots.T
                + complex_normal(rng, (recv_sqrt.shape[0], tau), noise_var))
    row_power = power * np.sum(np.abs(chan) ** 2, axis=1) + noise_var
    quantized = aqnm_quantize(received, adc, row_power[:, None], rng)
    despread = quantized @ np.conj(pilots)
    return chan, lmmse @ despread


def simulate_pilot_second_hop(recv_corr, tx_corr, relay_gain, adc, tau, power,
                              noise_var, rng, pilots=None, recv_sqrt=None,
                              tx_sqrt=None, lmmse=None):
    """Second-hop counterpart; pilots are sent from the K selected relay
    antennas at per-antenna power power / K."""
    k = tx_corr.shape[0]
    if pilots is None:
        pilots = orthonormal_pilots(tau, k)
    if recv_sqrt is None:
        recv_sqrt = psd_sqrt(recv_corr)
    if tx_sqrt is None:
        tx_sqrt = psd_sqrt(tx_corr)
    if lmmse is None:
        lmmse = lmmse_filter_second_hop(recv_corr, relay_gain, adc, tau, power,
                                        noise_var, k)
    chan = draw_second_hop(relay_gain, recv_corr, tx_corr, rng,
                           recv_sqrt=recv_sqrt, tx_sqrt=tx_sqrt)
    received = (np.sqrt(tau * power / k) * chan @ pilots.T
                + complex_normal(rng, (recv_sqrt.shape[0], tau), noise_var))
    row_power = (power / k) * np.sum(np.abs(chan) ** 2, axis=1) + noise_var
    quantized = aqnm_quantize(received, adc, row_power[:, None], rng)
    despread = quantized @ np.conj(pilots)
    return chan, lmmse @ despread


def _hermitize(mat):
    return 0.5 * (mat + mat.conj().T)


def equivalent_form_first_hop(recv_corr, gains, adc, tau, power, noise_var):
    """Separable equivalent form of the first-hop estimate and its error.

    The receive correlation splits spectrally: with recv_corr = U L U^H and
    s = alpha^2 tau power sum(gains), the estimate part keeps
    s L^2 / (s L + c) and the error part the remainder. Per-user gains are
    rescaled so that estimate and error energies add up to the true
    per-user energy exactly.
    """
    gains = np.asarray(gains, dtype=np.float64)
    total_gain = float(gains.sum())
    n = recv_corr.shape[0]
    k = gains.size
    if k == 0:
        raise ValueError("need at least one user")
    if total_gain <= 0.0:
        raise DegenerateEstimateError("total large-scale gain is zero")
    lam, u = np.linalg.eigh(recv_corr)
    lam = np.clip(lam, 0.0, None)
    ap = adc.alpha ** 2 * tau * power
    a = ap * total_gain
    c = k * adc.alpha * ((1.0 - adc.alpha) * power * total_gain + noise_var)
    denom = a * lam + c
    cond = float(denom.max() / denom.min()) if denom.size else 1.0
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(
            f"observation covariance condition number {cond:.3e} exceeds {MAX_CONDITION:.0e}")
    f = a * lam ** 2 / denom
    g = lam * c / denom
    recv_hat = _hermitize((u * f) @ u.conj().T)
    recv_err = _hermitize((u * g) @ u.conj().T)
    # unnormalized estimate energies: E{||f_hat_i||^2}
    s1 = float(np.sum(lam ** 3 / denom ** 2))
    s2 = float(np.sum(lam ** 2 / denom ** 2))
    noise_part = adc.alpha * ((1.0 - adc.alpha) * power * total_gain + noise_var)
    bar = ap * total_gain ** 2 * (ap * s1 * gains + noise_part * s2)
    bar_sum = float(bar.sum())
    if bar_sum <= 0.0:
        raise DegenerateEstimateError("estimate energy collapsed to zero")
    gains_hat = (total_gain / bar_sum) * bar
    check = n * gains - bar
    check_sum = float(check.sum())
    if check_sum <= 0.0:
        raise DegenerateEstimateError("error energy collapsed to zero")
    gains_err = (total_gain / check_sum) * check
    return EstimateModel(receive_hat=recv_hat, receive_err=recv_err,
                         transmit_hat=np.diag(gains_hat),
                         transmit_err=np.diag(gains_err),
                         relay_gain=1.0)


def equivalent_form_second_hop(recv_corr, tx_corr, relay_gain, adc, tau, power,
                               noise_var):
    """Separable equivalent form of the second-hop estimate and its error."""
    m = recv_corr.shape[0]
    k = tx_corr.shape[0]
    if relay_gain <= 0.0:
        raise DegenerateEstimateError("relay large-scale gain is zero")
    lam, u = np.linalg.eigh(recv_corr)
    lam = np.clip(lam, 0.0, None)
    a = adc.alpha ** 2 * tau * power * relay_gain
    c = k * adc.alpha * ((1.0 - adc.alpha) * power * relay_gain + noise_var)
    denom = a * lam + c
    cond = float(denom.max() / denom.min()) if denom.size else 1.0
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(
            f"observation covariance condition number {cond:.3e} exceeds {MAX_CONDITION:.0e}")
    f = a * lam ** 2 / denom
    g = lam * c / denom
    recv_hat = _hermitize((u * f) @ u.conj().T)
    recv_err = _hermitize((u * g) @ u.conj().T)
    s1 = float(np.sum(lam ** 3 / denom ** 2))
    s2 = float(np.sum(lam ** 2 / denom ** 2))
    pref = adc.alpha ** 3 * tau * power * relay_gain ** 2
    bar = pref * (adc.alpha * tau * power * relay_gain * s1 * tx_corr
                  + k * ((1.0 - adc.alpha) * power * relay_gain + noise_var)
                  * s2 * np.eye(k))
    bar_tr = float(np.trace(bar).real)
    if bar_tr <= 0.0:
        raise DegenerateEstimateError("estimate energy collapsed to zero")
    tx_hat = (k / bar_tr) * bar
    check = m * relay_gain * tx_corr - bar
    check_tr = float(np.trace(check).real)
    if check_tr <= 0.0:
        raise DegenerateEstimateError("error energy collapsed to zero")
    w = np.linalg.eigvalsh(check)
    if w[0] < -1e-10 * max(float(w[-1]), 1e-300):
        raise DegenerateEstimateError(
            "error-side transmit matrix is indefinite (min eigenvalue "
            f"{w[0]:.3e}); the separable error model needs weaker transmit "
            "correlation or more receive antennas per user")
    tx_err = (k / check_tr) * check
    return EstimateModel(receive_hat=recv_hat, receive_err=recv_err,
                         transmit_hat=_hermitize(tx_hat),
                         transmit_err=_hermitize(tx_err),
                         relay_gain=float(relay_gain))


def perfect_model_first_hop(recv_corr, gains):
    """EstimateModel for genie CSI: estimate equals truth, error is zero."""
    gains = np.asarray(gains, dtype=np.float64)
    n = recv_corr.shape[0]
    k = gains.size
    return EstimateModel(receive_hat=np.array(recv_corr, dtype=np.complex128),
                         receive_err=np.zeros((n, n), dtype=np.complex128),
                         transmit_hat=np.diag(gains).astype(np.complex128),
                         transmit_err=np.zeros((k, k), dtype=np.complex128),
                         relay_gain=1.0)


def perfect_model_second_hop(recv_corr, tx_corr, relay_gain):
    m = recv_corr.shape[0]
    k = tx_corr.shape[0]
    return EstimateModel(receive_hat=np.array(recv_corr, dtype=np.complex128),
                         receive_err=np.zeros((m, m), dtype=np.complex128),
                         transmit_hat=np.array(tx_corr, dtype=np.complex128),
                         transmit_err=np.zeros((k, k), dtype=np.complex128),
                         relay_gain=float(relay_gain))


def pilot_mse_first_hop(recv_corr, gains, adc, tau, power, noise_var, trials, rng):
    """Simulated per-element MSE of the first-hop estimator, with stderr."""
    gains = np.asarray(gains, dtype=np.float64)
    n = recv_corr.shape[0]
    k = gains.size
    pilots = orthonormal_pilots(tau, k)
    recv_sqrt = psd_sqrt(recv_corr)
    lmmse = lmmse_filter_first_hop(recv_corr, gains, adc, tau, power, noise_var)
    errs = np.empty(trials)
    for t in range(trials):
        chan, est = simulate_pilot_first_hop(
            recv_corr, gains, adc, tau, power, noise_var, rng,
            pilots=pilots, recv_sqrt=recv_sqrt, lmmse=lmmse)
        errs[t] = np.sum(np.abs(est - chan) ** 2) / (n * k)
    return float(errs.mean()), float(errs.std(ddof=1) / np.sqrt(trials))


def pilot_mse_second_hop(recv_corr, tx_corr, relay_gain, adc, tau, power,
                         noise_var, trials, rng):
    """Simulated per-element MSE of the second-hop estimator, with stderr."""
    m = recv_corr.shape[0]
    k = tx_corr.shape[0]
    pilots = orthonormal_pilots(tau, k)
    recv_sqrt = psd_sqrt(recv_corr)
    tx_sqrt = psd_sqrt(tx_corr)
    lmmse = lmmse_filter_second_hop(recv_corr, relay_gain, adc, tau, power,
                                    noise_var, k)
    errs = np.empty(trials)
    for t in range(trials):
        chan, est = simulate_pilot_second_hop(
            recv_corr, tx_corr, relay_gain, adc, tau, power, noise_var, rng,
            pilots=pilots, recv_sqrt=recv_sqrt, tx_sqrt=tx_sqrt, lmmse=lmmse)
        errs[t] = np.sum(np.abs(est - chan) ** 2) / (m * k)
    return float(errs.mean()), float(errs.std(ddof=1) / np.sqrt(trials))
