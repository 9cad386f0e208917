"""
Split-R-hat and effective sample size for a set of chains.

Both take a 2D array of shape (n_chains, chain_length) for one parameter.
"""
import numpy as np


def split_chains(chains: np.ndarray) -> np.ndarray:
    """Split every chain into its first and second halves (dropping a middle draw for odd lengths)."""
    chains = np.atleast_2d(np.asarray(chains, dtype=float))
    half = chains.shape[1] // 2
    return np.concatenate([chains[:, :half], chains[:, chains.shape[1] - half:]], axis=0)


def split_rhat(chains: np.ndarray) -> float:
    """
    Potential scale reduction factor on split chains. Values near 1 indicate
    the chains agree; NaN when the draws have no variance at all.
    """
    split = split_chains(chains)
    m, n = split.shape
    if n < 2:
        return float("nan")
    means = split.mean(axis=1)
    within = split.var(axis=1, ddof=1).mean()
    between = n * means.var(ddof=1)
    if within <= 0.0:
        return float("nan")
    var_plus = (n - 1.0) / n * within + between / n
    return float(np.sqrt(var_plus / within))


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Autocovariance of a single chain at all lags, via FFT."""
    n = x.size
    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, size)
    acov = np.fft.irfft(spectrum * np.conjugate(spectrum), size)[:n]
    return acov / n


def effective_sample_size(chains: np.ndarray) -> float:
    """
    Multi-chain ESS with Geyer's initial monotone sequence on split chains.
    Capped at the total number of draws; NaN for constant draws.
    """
    split = split_chains(chains)
    m, n = split.shape
    if n < 4:
        return float("nan")
    acov = np.array([_autocovariance(chain) for chain in split])
    chain_var = acov[:, 0] * n / (n - 1.0)
    within = chain_var.mean()
    if within <= 0.0:
        return float("nan")
    var_plus = within * (n - 1.0) / n
    if m > 1:
        var_plus += split.mean(axis=1).var(ddof=1)

    rho_hat = 1.0 - (within - acov.mean(axis=0)) / var_plus
    rho_hat[0] = 1.0

    # Geyer: sum consecutive pairs while positive, forcing them monotone.
    pair_sums = []
    t = 0
    while t + 1 < n:
        pair = rho_hat[t] + rho_hat[t + 1]
        if pair <= 0.0:
            break
        if pair_sums and pair > pair_sums[-1]:
            pair = pair_sums[-1]
        pair_sums.append(pair)
        t += 2
    tau = -1.0 + 2.0 * float(np.sum(pair_sums)) if pair_sums else 1.0
    tau = max(tau, 1.0 / np.log10(m * n + 10.0))
    return float(min(m * n / tau, m * n))
