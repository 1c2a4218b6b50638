"""
Text format for trained networks:

    mipnet-net 1
    activation binary
    eps 0.01
    layers 2
    weights 5 3
    <5 lines of 3 values>
    bias 3
    <1 line of 3 values>
    ...

Values are written with 17 significant digits, so load(save(net)) is exact.
"""

from pathlib import Path
from typing import List, Union

import numpy as np

from network.errors import NetFormatError
from network.net import TrainedNet

_MAGIC = "mipnet-net 1"


def _fmt(values) -> str:
    return " ".join(format(float(v), ".17g") for v in values)


def dumps_net(net: TrainedNet) -> str:
    lines = [_MAGIC, f"activation {net.activation}", f"eps {net.eps!r}", f"layers {len(net.weights)}"]
    for w, b in zip(net.weights, net.biases):
        lines.append(f"weights {w.shape[0]} {w.shape[1]}")
        lines.extend(_fmt(row) for row in w)
        lines.append(f"bias {b.shape[0]}")
        lines.append(_fmt(b))
    return "\n".join(lines) + "\n"


class _Reader:
    def __init__(self, text: str):
        self.lines = [(i, line.strip()) for i, line in enumerate(text.splitlines(), start=1) if line.strip()]
        self.pos = 0

    def next(self) -> tuple:
        if self.pos >= len(self.lines):
            last = self.lines[-1][0] if self.lines else 0
            raise NetFormatError("unexpected end of file", last)
        item = self.lines[self.pos]
        self.pos += 1
        return item

    def keyword(self, name: str, count: int) -> List[str]:
        line_number, line = self.next()
        tokens = line.split()
        if tokens[0] != name or len(tokens) != count + 1:
            raise NetFormatError(f"expected '{name}' with {count} value(s), got {line!r}", line_number)
        return tokens[1:]

    def numbers(self, count: int) -> np.ndarray:
        line_number, line = self.next()
        tokens = line.split()
        if len(tokens) != count:
            raise NetFormatError(f"expected {count} values, got {len(tokens)}", line_number)
        try:
            return np.array([float(t) for t in tokens])
        except ValueError:
            raise NetFormatError(f"invalid number in {line!r}", line_number) from None

    def integer(self, token: str) -> int:
        try:
            value = int(token)
        except ValueError:
            raise NetFormatError(f"expected an integer, got {token!r}", self.lines[self.pos - 1][0]) from None
        if value < 1:
            raise NetFormatError(f"sizes must be positive, got {value}", self.lines[self.pos - 1][0])
        return value


def loads_net(text: str) -> TrainedNet:
    """
    Parse a serialized network.

    Raises:
        NetFormatError: On any structural or numeric problem
    """
    reader = _Reader(text)
    line_number, header = reader.next()
    if header != _MAGIC:
        raise NetFormatError(f"not a network file (header {header!r})", line_number)
    activation = reader.keyword("activation", 1)[0]
    if activation not in ("binary", "relu"):
        raise NetFormatError(f"unknown activation {activation!r}", reader.lines[reader.pos - 1][0])
    try:
        eps = float(reader.keyword("eps", 1)[0])
    except ValueError:
        raise NetFormatError("invalid eps", reader.lines[reader.pos - 1][0]) from None
    n_layers = reader.integer(reader.keyword("layers", 1)[0])

    weights, biases = [], []
    for _ in range(n_layers):
        rows_tok, cols_tok = reader.keyword("weights", 2)
        rows, cols = reader.integer(rows_tok), reader.integer(cols_tok)
        weights.append(np.vstack([reader.numbers(cols) for _ in range(rows)]))
        size = reader.integer(reader.keyword("bias", 1)[0])
        biases.append(reader.numbers(size))
    if reader.pos != len(reader.lines):
        raise NetFormatError("trailing content after the last layer", reader.lines[reader.pos][0])
    try:
        return TrainedNet(activation=activation, weights=weights, biases=biases, eps=eps)
    except ValueError as e:
        raise NetFormatError(f"inconsistent layer shapes: {e}") from None


def save_net(net: TrainedNet, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_net(net))


def load_net(path: Union[str, Path]) -> TrainedNet:
    return loads_net(Path(path).read_text())
