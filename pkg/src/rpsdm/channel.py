"""Frequency-selective Rayleigh channel, cyclic-prefix framing, and the
transformed effective channels with structural checks.

A circulant channel becomes diagonal under the complex-exponential pair and
stair block diagonal under the integer periodic transform pair: one block
per divisor of N, sized phi(q_i). Two decomposition routes ship:

* ``basis="normalized"`` — production pair (e_r, weighted e_t), the one the
  simulation chain uses;
* ``basis="integer"`` — raw pair (e_t^T, e_t), the route whose blocks are
  Toeplitz for every N and skew-circulant for N a power of two.

For power-of-two N the routes differ only by a block-constant scale, so the
zero/nonzero structure is identical. For other N the normalized inverse-path
blocks stay block diagonal but are not Toeplitz in general.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .number_theory import DivisorSet, is_power_of_two
from .ramanujan import PeriodicTransform
from .transforms import Scheme

#: default relative tolerance for structure classification
STRUCTURE_RTOL = 1e-9


@dataclass(frozen=True)
class ChannelRealization:
    """L complex multipath gains for a length-N block (L <= N)."""

    taps: np.ndarray
    n: int

    @property
    def l(self) -> int:
        return self.taps.shape[0]


def draw_channel(rng, l: int, n: int) -> ChannelRealization:
    """Draw L iid CN(0,1) taps (real/imag parts each variance 1/2).

    ``rng`` is a numpy Generator or an integer seed; fixed seed gives
    identical taps on repeated calls.
    """
    if not 1 <= l <= n:
        raise ValueError(f"need 1 <= l <= n, got l={l}, n={n}")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    taps = (rng.standard_normal(l) + 1j * rng.standard_normal(l)) / np.sqrt(2.0)
    return ChannelRealization(taps=taps, n=n)


def add_cp(x: np.ndarray, l: int) -> np.ndarray:
    """Prepend the block's last l-1 samples; frame length becomes N + l - 1."""
    x = np.asarray(x)
    if l > x.shape[0]:
        raise ValueError(f"path count l={l} exceeds block length {x.shape[0]}")
    if l < 1:
        raise ValueError(f"path count must be >= 1, got {l}")
    if l == 1:
        return x.copy()
    return np.concatenate([x[-(l - 1):], x])


def remove_cp(frame: np.ndarray, l: int) -> np.ndarray:
    """Drop the first l-1 received samples of the frame."""
    if l < 1:
        raise ValueError(f"path count must be >= 1, got {l}")
    return np.asarray(frame)[l - 1:]


def transmit(x_cp: np.ndarray, ch: ChannelRealization, sigma2: float,
             rng=None) -> np.ndarray:
    """Tapped-delay-line output y[n] = sum_l h_l x_cp[n-l] + w[n].

    The linear convolution is truncated to the frame length; AWGN with total
    variance sigma2 per complex sample is added across the whole frame.
    After CP removal the noise-free output equals the circulant product.
    """
    x_cp = np.asarray(x_cp)
    k = x_cp.shape[0]
    if k != ch.n + ch.l - 1:
        raise ValueError(f"frame length {k} != n + l - 1 = {ch.n + ch.l - 1}")
    y = np.convolve(x_cp, ch.taps)[:k]
    if sigma2 < 0:
        raise ValueError(f"noise variance must be >= 0, got {sigma2}")
    if sigma2 > 0:
        if rng is None:
            raise ValueError("an rng is required when sigma2 > 0")
        rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        w = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) * np.sqrt(sigma2 / 2.0)
        y = y + w
    return y


def circulant_matrix(ch: ChannelRealization) -> np.ndarray:
    """N x N circulant with first column the zero-padded taps."""
    col = np.zeros(ch.n, dtype=np.complex128)
    col[:ch.l] = ch.taps
    return circulant_from_column(col)


def circulant_from_column(col: np.ndarray) -> np.ndarray:
    """Circulant matrix from an arbitrary first column (each column a
    circular down-shift of the previous)."""
    col = np.asarray(col)
    n = col.shape[0]
    out = np.empty((n, n), dtype=col.dtype)
    for j in range(n):
        out[:, j] = np.roll(col, j)
    return out


@dataclass(frozen=True)
class EffectiveChannel:
    """Channel matrix seen between modulation symbols and demodulated output."""

    scheme: Scheme
    matrix: np.ndarray
    layout: DivisorSet | None  # divisor block layout; None for the diagonal scheme

    def block(self, i: int) -> np.ndarray:
        """i-th diagonal sub-matrix (phi(q_i) x phi(q_i))."""
        if self.layout is None:
            raise ValueError("block views only exist for the subspace scheme")
        s = self.layout.block_slice(i)
        return self.matrix[s, s]

    def blocks(self) -> list[np.ndarray]:
        if self.layout is None:
            raise ValueError("block views only exist for the subspace scheme")
        return [self.block(i) for i in range(len(self.layout))]


def effective_channel(scheme: Scheme, ch: ChannelRealization,
                      transform: PeriodicTransform | None = None,
                      basis: str = "normalized") -> EffectiveChannel:
    """Transform the circulant channel into its per-scheme effective form.

    OFDM: diagonal matrix of the N-point DFT of the zero-padded taps.
    RPSDM: e_r @ H_cir @ forward (``basis="normalized"``) or
    e_t.T @ H_cir @ e_t (``basis="integer"``, the worked-fixture route).
    """
    if scheme is Scheme.OFDM:
        taps = np.zeros(ch.n, dtype=np.complex128)
        taps[:ch.l] = ch.taps
        return EffectiveChannel(scheme=scheme, matrix=np.diag(np.fft.fft(taps)),
                                layout=None)
    if transform is None or transform.n != ch.n:
        raise ValueError("a transform matching the channel block length is required")
    h_cir = circulant_matrix(ch)
    if basis == "normalized":
        matrix = transform.e_r @ h_cir @ transform.forward
    elif basis == "integer":
        matrix = transform.e_t.T @ h_cir @ transform.e_t
    else:
        raise ValueError(f"basis must be 'normalized' or 'integer', got {basis!r}")
    return EffectiveChannel(scheme=scheme, matrix=matrix, layout=transform.layout)


def _scale_of(matrix: np.ndarray, scale: float | None) -> float:
    s = float(np.abs(matrix).max()) if scale is None else float(scale)
    return s if s > 0 else 1.0


def is_stair_block_diagonal(matrix: np.ndarray, layout: DivisorSet,
                            rtol: float = STRUCTURE_RTOL,
                            scale: float | None = None) -> tuple[bool, float]:
    """Check that all mass sits in the divisor-layout diagonal blocks.

    Returns (ok, residual) where residual is the largest off-block magnitude
    relative to the largest entry of the matrix.
    """
    matrix = np.asarray(matrix)
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError("structure checks need a square matrix")
    mask = np.ones(matrix.shape, dtype=bool)
    for i in range(len(layout)):
        s = layout.block_slice(i)
        mask[s, s] = False
    off = np.abs(matrix[mask]).max() if mask.any() else 0.0
    residual = float(off / _scale_of(matrix, scale))
    return residual < rtol, residual


def is_toeplitz(matrix: np.ndarray, rtol: float = STRUCTURE_RTOL,
                scale: float | None = None) -> tuple[bool, float]:
    """Constant-diagonal check: every entry equals the one up-left of it."""
    matrix = np.asarray(matrix)
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError("structure checks need a square matrix")
    if matrix.shape[0] < 2:
        return True, 0.0
    dev = np.abs(matrix[1:, 1:] - matrix[:-1, :-1]).max()
    residual = float(dev / _scale_of(matrix, scale))
    return residual < rtol, residual


def is_skew_circulant(matrix: np.ndarray, rtol: float = STRUCTURE_RTOL,
                      scale: float | None = None) -> tuple[bool, float]:
    """Each row is the previous row rotated right with the wrapped entry
    negated: A[i, j] = a[j-i] for j >= i, -a[n+j-i] otherwise."""
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    if n != matrix.shape[1]:
        raise ValueError("structure checks need a square matrix")
    first = matrix[0]
    dev = 0.0
    for i in range(1, n):
        expected = np.concatenate([-first[n - i:], first[:n - i]])
        dev = max(dev, float(np.abs(matrix[i] - expected).max()))
    residual = dev / _scale_of(matrix, scale)
    return residual < rtol, residual


def structure_report(eff: EffectiveChannel, rtol: float = STRUCTURE_RTOL) -> dict:
    """Classification summary used by the decomposition CLI."""
    matrix = eff.matrix
    if eff.layout is None:
        off = matrix - np.diag(np.diag(matrix))
        scale = _scale_of(matrix, None)
        residual = float(np.abs(off).max() / scale)
        return {"structure": "diagonal", "off_diagonal_residual": residual,
                "diagonal_ok": residual < rtol}
    ok, residual = is_stair_block_diagonal(matrix, eff.layout, rtol=rtol)
    scale = _scale_of(matrix, None)
    power_of_two = is_power_of_two(eff.layout.n)
    blocks = []
    for i, (q, phi, offset) in enumerate(eff.layout.blocks()):
        block = eff.block(i)
        toep_ok, toep_res = is_toeplitz(block, rtol=rtol, scale=scale)
        entry = {"q": q, "size": phi, "offset": offset,
                 "toeplitz_ok": toep_ok, "toeplitz_residual": float(toep_res)}
        if power_of_two:
            skew_ok, skew_res = is_skew_circulant(block, rtol=rtol, scale=scale)
            entry["skew_circulant_ok"] = skew_ok
            entry["skew_circulant_residual"] = float(skew_res)
        blocks.append(entry)
    return {"structure": "stair_block_diagonal", "off_block_residual": float(residual),
            "stair_block_ok": ok, "blocks": blocks}
