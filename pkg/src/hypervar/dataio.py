"""File formats: headerless matrix/vector CSVs, instruments and prices
tables, and the JSON report.

Parse failures always carry the file path and line number. Matrix and
vector files are plain comma-separated numbers with no header; the
instruments and prices tables have fixed headers documented next to
their readers.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InputError
from .portfolio import DAY_COUNT_DEFAULT, Instrument, vol_from_sigma

INSTRUMENTS_HEADER = (
    "name",
    "kind",
    "strike",
    "rate",
    "maturity_years",
    "spot",
    "vol",
    "quantity",
    "hedge_shares",
)


def _numeric_rows(path: str | Path) -> list[tuple[int, list[float]]]:
    rows: list[tuple[int, list[float]]] = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            rows.append((lineno, [float(c) for c in cells]))
        except ValueError:
            bad = next(c for c in cells if not _is_float(c))
            raise InputError(f"{path}:{lineno}: not a number: {bad!r}") from None
    if not rows:
        raise InputError(f"{path}: file contains no data")
    return rows


def _is_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_matrix_csv(path: str | Path) -> np.ndarray:
    """Headerless numeric CSV into a 2-d array; all rows must have the
    same width."""
    rows = _numeric_rows(path)
    width = len(rows[0][1])
    for lineno, row in rows:
        if len(row) != width:
            raise InputError(
                f"{path}:{lineno}: row has {len(row)} values, expected {width}"
            )
    return np.array([row for _, row in rows])


def read_vector_csv(path: str | Path) -> np.ndarray:
    """Headerless numeric CSV flattened to a 1-d vector (accepts one row,
    one column, or any rectangular layout)."""
    rows = _numeric_rows(path)
    return np.array([value for _, row in rows for value in row])


def write_matrix_csv(path: str | Path, a: np.ndarray) -> None:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    lines = [",".join(format(v, ".17g") for v in row) for row in a]
    Path(path).write_text("\n".join(lines) + "\n")


def read_prices_csv(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    """Close-price table: first line is the ticker header, then one row
    per day, oldest first."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    if len(lines) < 2:
        raise InputError(f"{path}: need a header row and at least one price row")
    tickers = tuple(c.strip() for c in lines[0][1].split(","))
    if any(not t for t in tickers):
        raise InputError(f"{path}:1: empty ticker name in header")
    if all(_is_float(t) for t in tickers):
        raise InputError(
            f"{path}:1: first line must be a ticker header, found only numbers"
        )
    rows = []
    for lineno, line in lines[1:]:
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(tickers):
            raise InputError(
                f"{path}:{lineno}: row has {len(cells)} values, expected "
                f"{len(tickers)} (one per ticker)"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            bad = next(c for c in cells if not _is_float(c))
            raise InputError(f"{path}:{lineno}: not a number: {bad!r}") from None
    return tickers, np.array(rows)


def read_instruments_csv(
    path: str | Path,
    sigma: Optional[np.ndarray] = None,
    day_count: int = DAY_COUNT_DEFAULT,
) -> list[Instrument]:
    """Instruments table with header
    name,kind,strike,rate,maturity_years,spot,vol,quantity,hedge_shares.

    An empty vol cell is filled from sigma as sqrt(day_count * var) of
    the underlying's daily variance; underlyings are numbered by first
    appearance of their name, matching the covariance row order.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise InputError(f"{path}: file contains no data")
    header = tuple(c.strip() for c in lines[0][1].split(","))
    if header != INSTRUMENTS_HEADER:
        raise InputError(
            f"{path}:1: header must be {','.join(INSTRUMENTS_HEADER)}, "
            f"got {','.join(header)}"
        )
    name_index: dict[str, int] = {}
    instruments: list[Instrument] = []
    for lineno, line in lines[1:]:
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(INSTRUMENTS_HEADER):
            raise InputError(
                f"{path}:{lineno}: row has {len(cells)} fields, expected "
                f"{len(INSTRUMENTS_HEADER)}"
            )
        name, kind = cells[0], cells[1]

        def parse(column: str, cell: str) -> float:
            if not _is_float(cell):
                raise InputError(
                    f"{path}:{lineno}: column {column}: not a number: {cell!r}"
                )
            return float(cell)

        strike = parse("strike", cells[2])
        rate = parse("rate", cells[3])
        maturity = parse("maturity_years", cells[4])
        spot = parse("spot", cells[5])
        quantity = parse("quantity", cells[7])
        hedge = parse("hedge_shares", cells[8])
        key = name if name else f"#{len(instruments)}"
        if key not in name_index:
            name_index[key] = len(name_index)
        if cells[6]:
            vol = parse("vol", cells[6])
        else:
            if sigma is None:
                raise InputError(
                    f"{path}:{lineno}: vol is empty and no covariance was "
                    f"provided to derive it from"
                )
            vol = vol_from_sigma(sigma, name_index[key], day_count)
        try:
            instruments.append(
                Instrument(
                    kind=kind,
                    strike=strike,
                    rate=rate,
                    maturity=maturity,
                    spot=spot,
                    vol=vol,
                    quantity=quantity,
                    hedge_shares=hedge,
                    name=name,
                )
            )
        except InputError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
    if not instruments:
        raise InputError(f"{path}: no instrument rows")
    return instruments


def report_to_json(report: dict) -> str:
    """Serialize a report dict with stable key order and a trailing
    newline, so identical runs emit byte-identical documents."""
    return json.dumps(report, indent=2) + "\n"


def write_gfun_csv(path: str | Path, points: list[dict]) -> None:
    lines = ["R,G,standardError"]
    for p in points:
        lines.append(
            f"{format(p['R'], '.17g')},{format(p['G'], '.17g')},"
            f"{format(p['standardError'], '.17g')}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
