"""
Sliding-window metric series across runs
"""
import logging
from typing import Sequence

import numpy as np
import pandas as pd

from config.config import Config
from harness.outputs import read_steps

logger = logging.getLogger(__name__)

WINDOW_COLUMNS = ['window', 'step', 'realism_mean', 'realism_std', 'novelty_mean', 'novelty_std', 'runs']


class ReportError(ValueError):
    """Run directories cannot be combined into one series"""


def windowed_ratio(numerator: pd.Series, denominator: pd.Series, window: int) -> np.ndarray:
    """
    Ratio of window sums for every complete window

    Windows without any generated mutant count as 0.

    Returns:
        np.ndarray: len(numerator) - window + 1 values
    """
    num = numerator.rolling(window).sum().to_numpy()[window - 1:]
    den = denominator.rolling(window).sum().to_numpy()[window - 1:]
    return np.divide(num, den, out=np.zeros_like(num, dtype=float), where=den > 0)


def run_series(steps: pd.DataFrame, window: int) -> pd.DataFrame:
    """Windowed realism and novelty of a single run"""
    if not 1 <= window <= len(steps):
        raise ReportError(f"window must lie in 1..{len(steps)}, got {window}")
    return pd.DataFrame({
        'realism': windowed_ratio(steps['passed_sw'], steps['generated'], window),
        'novelty': windowed_ratio(steps['novel'], steps['generated'], window),
    })


def window_series(frames: Sequence[pd.DataFrame], window: int = None) -> pd.DataFrame:
    """
    Combine per-run step tables into one windowed series

    Args:
        frames: steps.csv tables, one per run
        window: Window length in steps (Config.WINDOW by default)

    Returns:
        pd.DataFrame: WINDOW_COLUMNS; ``step`` is the last step of each window, std is the sample
        standard deviation across runs (0 for a single run)

    Raises:
        ReportError: No runs, mismatched step counts or a window longer than the runs
    """
    window = Config.WINDOW if window is None else window
    if not frames:
        raise ReportError('at least one run is required')
    lengths = {len(frame) for frame in frames}
    if len(lengths) != 1:
        raise ReportError(f"runs have mismatched step counts: {sorted(lengths)}")

    series = [run_series(frame, window) for frame in frames]
    realism = np.vstack([s['realism'].to_numpy() for s in series])
    novelty = np.vstack([s['novelty'].to_numpy() for s in series])
    runs = len(series)

    def spread(values):
        return values.std(axis=0, ddof=1) if runs > 1 else np.zeros(values.shape[1])

    points = realism.shape[1]
    return pd.DataFrame({
        'window': np.arange(points),
        'step': frames[0]['step'].to_numpy()[window - 1:],
        'realism_mean': realism.mean(axis=0),
        'realism_std': spread(realism),
        'novelty_mean': novelty.mean(axis=0),
        'novelty_std': spread(novelty),
        'runs': runs,
    }, columns=WINDOW_COLUMNS)


def report_runs(run_dirs, window: int = None) -> pd.DataFrame:
    """Load steps.csv from every run directory and build the windowed series"""
    frames = [read_steps(run_dir) for run_dir in run_dirs]
    logger.info(f"Building windowed report over {len(frames)} run(s)")
    return window_series(frames, window)
