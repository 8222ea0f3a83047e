"""CSV and dense-text writers. Floats are written with 17 significant digits."""
import csv
import logging
import os
import sys
from contextlib import contextmanager
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

logger = logging.getLogger(__name__)

PathOrStream = str | os.PathLike | IO[str] | None


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


@contextmanager
def open_output(target: PathOrStream) -> Iterator[IO[str]]:
    """Yield a text stream: stdout for None, the stream itself, or a new file."""
    if target is None:
        yield sys.stdout
    elif hasattr(target, "write"):
        yield target
    else:
        path = os.fspath(target)
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh
        logger.info("Wrote %s", path)


def write_csv(target: PathOrStream, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write header plus rows; returns the number of data rows."""
    count = 0
    with open_output(target) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    return count


def write_residual_history(target: PathOrStream, history) -> int:
    return write_csv(target, ("iteration", "relative_residual"),
                     ((i, float(r)) for i, r in enumerate(np.asarray(history))))


def write_symbol_curve(target: PathOrStream, theta, values) -> int:
    """(theta, Re g, Im g, |g|) samples of one symbol."""
    values = np.asarray(values, dtype=np.complex128)
    rows = zip(np.asarray(theta, dtype=np.float64), values.real, values.imag, np.abs(values))
    return write_csv(target, ("theta", "re", "im", "abs"), rows)


def write_spectrum(target: PathOrStream, values, reference=None) -> int:
    """Sorted values (real and imaginary parts) next to the reference samples, if any."""
    values = np.asarray(values)
    ref = np.full(values.size, np.nan) if reference is None else np.asarray(reference, dtype=np.float64)
    rows = ((i, float(np.real(v)), float(np.imag(v)), float(r))
            for i, (v, r) in enumerate(zip(values, ref)))
    return write_csv(target, ("index", "re", "im", "reference"), rows)


def export_dense(matrix, target: PathOrStream) -> None:
    """One row per line, whitespace separated, 17 significant digits."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    with open_output(target) as fh:
        for row in matrix:
            fh.write(" ".join(format(float(v), ".17g") for v in row))
            fh.write("\n")
