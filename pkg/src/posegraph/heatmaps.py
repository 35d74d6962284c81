"""Gaussian heatmap rendering, the attenuated-interference training loss, and
multi-peak extraction.

A training target for one joint channel is the superposition of a full-strength
Gaussian at each target joint and an attenuated Gaussian (factor ``mu``) at
each interference joint, i.e. joints of other people that fall inside the same
person crop. The loss averages per-channel MSE against that composite grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter

DEFAULT_SIGMA = 2.0
DEFAULT_PEAK_THRESHOLD = 0.1
DEFAULT_PEAK_WINDOW = 3

# Heatmaps run at 1/4 of the 320x256 input resolution.
DEFAULT_WIDTH = 64
DEFAULT_HEIGHT = 80


@dataclass(eq=False)
class Heatmap:
    """Dense single-channel response grid.

    ``values`` is indexed ``[y, x]`` (row-major); locations elsewhere in the
    package are ``(x, y)`` tuples. ``sigma`` records the Gaussian deviation the
    grid was rendered with.
    """

    width: int
    height: int
    values: np.ndarray
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("heatmap dimensions must be positive")
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.height, self.width):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"(height, width) = ({self.height}, {self.width})"
            )
        if np.any(self.values < 0):
            raise ValueError("heatmap values must be non-negative")


@dataclass(eq=False)
class CompositeTarget:
    """Training target for one joint channel: full-strength target grid plus
    interference grid attenuated by ``mu``."""

    target: Heatmap
    interference: Heatmap
    mu: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if (self.target.width, self.target.height) != (
            self.interference.width,
            self.interference.height,
        ):
            raise ValueError("target and interference grids must share dimensions")

    def composite_values(self) -> np.ndarray:
        """The effective supervision grid T + mu * C."""
        return self.target.values + self.mu * self.interference.values


def render_gaussian(
    centers: list[tuple[float, float]],
    sigma: float = DEFAULT_SIGMA,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
) -> Heatmap:
    """Render an unnormalized Gaussian mixture heatmap.

    Each center contributes exp(-||q - p||^2 / (2 sigma^2)) at pixel q, so an
    isolated center produces peak value 1.0 at its own pixel. Contributions
    sum; nothing is clamped. Centers outside the grid contribute whatever tail
    falls inside.

    Args:
        centers: (x, y) locations, possibly empty, possibly off-grid.
        sigma: Gaussian standard deviation in pixels, > 0.
        width: grid width in pixels.
        height: grid height in pixels.

    Returns:
        Heatmap of shape (height, width).
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if width <= 0 or height <= 0:
        raise ValueError("grid dimensions must be positive")
    values = np.zeros((height, width), dtype=np.float64)
    if centers:
        xs = np.arange(width, dtype=np.float64)
        ys = np.arange(height, dtype=np.float64)
        inv = 1.0 / (2.0 * sigma * sigma)
        for cx, cy in centers:
            dx2 = (xs - cx) ** 2
            dy2 = (ys - cy) ** 2
            values += np.exp(-(dy2[:, None] + dx2[None, :]) * inv)
    return Heatmap(width=width, height=height, values=values, sigma=sigma)


def compose_training_target(
    target_joints: list[tuple[float, float]],
    interference_joints: list[tuple[float, float]],
    mu: float,
    sigma: float = DEFAULT_SIGMA,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
) -> CompositeTarget:
    """Build the supervision pair (T, C) for one joint channel.

    With mu = 0 the composite grid degenerates to the conventional
    single-person target.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    target = render_gaussian(target_joints, sigma, width, height)
    interference = render_gaussian(interference_joints, sigma, width, height)
    return CompositeTarget(target=target, interference=interference, mu=mu)


def jc_loss(predicted: list[Heatmap], composites: list[CompositeTarget]) -> float:
    """Mean over channels of MSE(prediction, T + mu * C).

    Args:
        predicted: one heatmap per joint channel.
        composites: matching list of composite targets.

    Returns:
        Non-negative loss; exactly 0.0 iff every channel matches its
        composite grid.
    """
    if len(predicted) != len(composites):
        raise ValueError(
            f"channel count mismatch: {len(predicted)} predictions vs "
            f"{len(composites)} targets"
        )
    if not predicted:
        raise ValueError("at least one channel is required")
    total = 0.0
    for pred, comp in zip(predicted, composites):
        grid = comp.composite_values()
        if pred.values.shape != grid.shape:
            raise ValueError(
                f"grid shape mismatch: {pred.values.shape} vs {grid.shape}"
            )
        diff = pred.values - grid
        total += float(np.mean(diff * diff))
    return total / len(predicted)


def extract_peaks(
    heatmap: Heatmap,
    score_threshold: float = DEFAULT_PEAK_THRESHOLD,
    window: int = DEFAULT_PEAK_WINDOW,
) -> list[tuple[tuple[int, int], float]]:
    """Find local maxima above a response threshold.

    A pixel is a peak when it strictly dominates every other pixel in its
    window x window neighborhood; an exact tie is awarded to the pixel with
    the lower row-major index, so equal-valued plateaus yield one peak.

    Args:
        heatmap: input grid.
        score_threshold: minimum response, exclusive.
        window: odd neighborhood side length >= 3.

    Returns:
        ((x, y), response) pairs sorted by descending response, row-major
        index breaking exact response ties.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    if score_threshold < 0:
        raise ValueError(f"score_threshold must be non-negative, got {score_threshold}")
    values = heatmap.values
    dominated = maximum_filter(values, size=window, mode="constant", cval=-np.inf)
    candidate_mask = (values >= dominated) & (values > score_threshold)
    half = window // 2
    width = heatmap.width
    peaks = []
    for y, x in np.argwhere(candidate_mask):
        v = values[y, x]
        y0, y1 = max(y - half, 0), min(y + half + 1, heatmap.height)
        x0, x1 = max(x - half, 0), min(x + half + 1, width)
        ty, tx = np.nonzero(values[y0:y1, x0:x1] == v)
        # Lowest row-major index among equal-valued window pixels wins the tie.
        first = np.min((ty + y0) * width + (tx + x0))
        if first == y * width + x:
            peaks.append(((int(x), int(y)), float(v)))
    peaks.sort(key=lambda p: (-p[1], p[0][1] * width + p[0][0]))
    return peaks
