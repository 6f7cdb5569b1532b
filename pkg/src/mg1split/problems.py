"""Synthetic test chains and the plain-text model file format.

File format (UTF-8)::

    # comment lines start with '#'; blank lines are ignored
    n q
    <n lines of n numbers>   # A_{-1}
    <n lines of n numbers>   # A_0
    ...                      # up to A_q

A single matrix (for example a computed ``G``) is stored with ``q = -1``,
i.e. exactly one block.
"""

import numpy as np

from .exceptions import ParseError, ValidationError
from .model import MG1Model, validate

#: Base matrix of the five-state example; every row sums to 0.75.
EXAMPLE_1B_BASE = np.array(
    [
        [0.05, 0.1, 0.2, 0.3, 0.1],
        [0.2, 0.05, 0.1, 0.1, 0.3],
        [0.1, 0.2, 0.3, 0.05, 0.1],
        [0.1, 0.05, 0.2, 0.1, 0.3],
        [0.3, 0.1, 0.1, 0.2, 0.05],
    ]
)


def gen_example_1a(n, delta):
    """Block tridiagonal chain with drift exactly ``-delta``.

    ``A_0 = A_1 = W`` and ``A_{-1} = W + delta I`` where ``W`` has zero
    diagonal and constant off-diagonal ``(1 - delta) / (3 (n - 1))``.
    """
    n = int(n)
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    alpha = (1.0 - delta) / (3.0 * (n - 1))
    W = alpha * (np.ones((n, n)) - np.eye(n))
    return MG1Model((W + delta * np.eye(n), W.copy(), W.copy()))


def gen_example_1b(p, q_trunc=50, stochastic_tol=1e-8):
    """Five-state chain with geometrically decaying blocks ``A_i = p^{i+1} A_{-1}``.

    Positive recurrent for ``p < 0.5``, null recurrent at ``p = 0.5``,
    transient above. Blocks beyond ``q_trunc`` are dropped.
    """
    if not 0 < p <= 0.6:
        raise ValueError("p must lie in (0, 0.6]")
    if q_trunc < 1:
        raise ValueError("q_trunc must be >= 1")
    A_minus1 = (4.0 * (1.0 - p) / 3.0) * EXAMPLE_1B_BASE
    blocks = [A_minus1] + [p ** (i + 1) * A_minus1 for i in range(q_trunc + 1)]
    return MG1Model(tuple(blocks), stochastic_tol=stochastic_tol)


def _format_block(B):
    return "\n".join(" ".join(f"{x:.17g}" for x in row) for row in B)


def dumps_blocks(blocks, comment=None):
    blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    n = blocks[0].shape[0]
    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.append(f"{n} {len(blocks) - 2}")
    lines.extend(_format_block(b) for b in blocks)
    return "\n".join(lines) + "\n"


def loads_blocks(text):
    """Parse the block format into a list of arrays (no validation)."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            rows.append((lineno, line.split()))
    if not rows:
        raise ParseError("empty file")
    lineno, header = rows[0]
    if len(header) != 2:
        raise ParseError("header must be 'n q'", lineno)
    try:
        n, q = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError("header must contain two integers", lineno) from None
    if n < 1 or q < -1:
        raise ParseError("need n >= 1 and q >= -1", lineno)
    body = rows[1:]
    expected = (q + 2) * n
    if len(body) != expected:
        where = body[-1][0] if body else lineno
        raise ParseError(
            f"expected {q + 2} blocks ({expected} rows), found {len(body)} rows", where
        )
    data = np.empty((expected, n))
    for r, (lineno, tokens) in enumerate(body):
        if len(tokens) != n:
            raise ParseError(f"expected {n} entries, found {len(tokens)}", lineno)
        try:
            data[r] = [float(t) for t in tokens]
        except ValueError:
            raise ParseError("non-numeric entry", lineno) from None
        if not np.all(np.isfinite(data[r])):
            raise ParseError("non-finite entry", lineno)
    return [data[i * n:(i + 1) * n].copy() for i in range(q + 2)]


def save_model(model, path, comment=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_blocks(model.blocks, comment))


def load_model(path, stochastic_tol=1e-8, check=True):
    """Read a model file; with ``check`` set, fatal validation issues raise."""
    with open(path, encoding="utf-8") as fh:
        blocks = loads_blocks(fh.read())
    if len(blocks) < 2:
        raise ParseError("a model needs at least the blocks A_{-1} and A_0")
    model = MG1Model(tuple(blocks), stochastic_tol=stochastic_tol)
    if check:
        fatal = [issue for issue in validate(model) if issue.fatal]
        if fatal:
            raise ValidationError(fatal)
    return model


def save_matrix(X, path, comment=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_blocks([X], comment))


def load_matrix(path):
    with open(path, encoding="utf-8") as fh:
        blocks = loads_blocks(fh.read())
    if len(blocks) != 1:
        raise ParseError(f"expected a single matrix, found {len(blocks)} blocks")
    return blocks[0]
