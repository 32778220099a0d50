"""Price ingestion, return computation, and in/out-of-sample splitting.

CSV layout: UTF-8, header ``date,<ticker1>,...,<tickern>``, ISO-8601 dates,
decimal prices. Rows with a missing or non-positive price are dropped
(complete-case policy) and counted on the resulting series.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import CsvParseError, InsufficientDataError

MISSING_TOKENS = {"", "na", "nan", "null", "none"}

# ~2 trading years; default in-sample window for parameter estimation
DEFAULT_IN_SAMPLE_LEN = 504


@dataclass(frozen=True)
class PriceSeries:
    """Adjusted closing prices, one row per date, one column per ticker."""

    dates: tuple[dt.date, ...]
    tickers: tuple[str, ...]
    prices: np.ndarray  # (T, n), all entries positive
    dropped: int = 0  # rows removed by the complete-case cleaning

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        if prices.ndim != 2 or prices.shape != (len(self.dates), len(self.tickers)):
            raise ValueError(
                f"price matrix shape {prices.shape} does not match "
                f"{len(self.dates)} dates x {len(self.tickers)} tickers"
            )
        if not np.all(prices > 0.0):
            raise ValueError("prices must be strictly positive")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")


@dataclass(frozen=True)
class ReturnsMatrix:
    """Per-period simple returns; row t is the return from date t to t+1."""

    dates: tuple[dt.date, ...]  # observation dates (end of each period)
    tickers: tuple[str, ...]
    returns: np.ndarray  # (N, n), each entry > -1

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        object.__setattr__(self, "returns", returns)
        if returns.ndim != 2 or returns.shape != (len(self.dates), len(self.tickers)):
            raise ValueError(
                f"returns matrix shape {returns.shape} does not match "
                f"{len(self.dates)} dates x {len(self.tickers)} tickers"
            )
        if not np.all(returns > -1.0):
            raise ValueError("simple returns must exceed -1 (prices positive)")

    @property
    def n_obs(self) -> int:
        return self.returns.shape[0]

    @property
    def n_assets(self) -> int:
        return self.returns.shape[1]


def as_return_array(r) -> np.ndarray:
    """Accept a ReturnsMatrix or a plain (N, n) array."""
    arr = r.returns if isinstance(r, ReturnsMatrix) else np.asarray(r, dtype=float)
    arr = np.asarray(arr, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected an (N, n) return matrix, got shape {arr.shape}")
    return arr


def _parse_price(token: str, line_number: int, column: str):
    stripped = token.strip()
    if stripped.lower() in MISSING_TOKENS:
        return None
    try:
        return float(stripped)
    except ValueError as exc:
        raise CsvParseError(
            f"unparseable price {token!r} in column {column!r}", line_number
        ) from exc


def load_prices(path) -> PriceSeries:
    """Parse a price CSV, dropping incomplete or non-positive rows.

    Raises CsvParseError (with the offending line number) for structural
    problems and InsufficientDataError when fewer than 3 usable rows remain.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CsvParseError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InsufficientDataError(f"{path}: empty file") from None
        if len(header) < 2 or header[0].strip().lower() != "date":
            raise CsvParseError(
                f"header must be 'date,<ticker1>,...', got {header!r}", 1
            )
        tickers = tuple(t.strip() for t in header[1:])

        dates: list[dt.date] = []
        rows: list[list[float]] = []
        dropped = 0
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(tickers) + 1:
                raise CsvParseError(
                    f"expected {len(tickers) + 1} fields, got {len(row)}", line_number
                )
            try:
                date = dt.date.fromisoformat(row[0].strip())
            except ValueError as exc:
                raise CsvParseError(
                    f"unparseable date {row[0]!r}", line_number
                ) from exc
            values = [
                _parse_price(tok, line_number, tickers[j])
                for j, tok in enumerate(row[1:])
            ]
            if any(v is None or v <= 0.0 for v in values):
                dropped += 1
                continue
            dates.append(date)
            rows.append(values)

    if len(rows) < 3:
        raise InsufficientDataError(
            f"{path}: only {len(rows)} usable rows after cleaning (need >= 3)"
        )
    order = np.argsort([d.toordinal() for d in dates], kind="stable")
    if any(dates[order[i]] == dates[order[i + 1]] for i in range(len(order) - 1)):
        raise CsvParseError("duplicate dates in file")
    return PriceSeries(
        dates=tuple(dates[i] for i in order),
        tickers=tickers,
        prices=np.asarray(rows, dtype=float)[order],
        dropped=dropped,
    )


def compute_returns(p: PriceSeries) -> ReturnsMatrix:
    """Simple returns p[t+1]/p[t] - 1, stamped with the end-of-period dates."""
    if p.prices.shape[0] < 2:
        raise InsufficientDataError("need at least 2 price rows to form returns")
    rets = p.prices[1:] / p.prices[:-1] - 1.0
    return ReturnsMatrix(dates=p.dates[1:], tickers=p.tickers, returns=rets)


def split(r: ReturnsMatrix, in_sample_len: int) -> tuple[ReturnsMatrix, ReturnsMatrix]:
    """Partition rows into (first in_sample_len, remainder)."""
    n = r.n_obs
    if not 0 < in_sample_len < n:
        raise ValueError(
            f"in_sample_len must be in (0, {n}) exclusive, got {in_sample_len}"
        )
    head = ReturnsMatrix(
        dates=r.dates[:in_sample_len],
        tickers=r.tickers,
        returns=r.returns[:in_sample_len],
    )
    tail = ReturnsMatrix(
        dates=r.dates[in_sample_len:],
        tickers=r.tickers,
        returns=r.returns[in_sample_len:],
    )
    return head, tail


def write_table_csv(path, dates, tickers, values: np.ndarray, config_hash=None):
    """Write a date-by-ticker table in the same shape as the price CSV input."""
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if config_hash is not None:
            fh.write(f"# config_hash: {config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(["date", *tickers])
        for date, row in zip(dates, values):
            writer.writerow([date.isoformat(), *[repr(float(v)) for v in row]])
