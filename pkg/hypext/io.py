"""
Structured-text instance and sample files, CSV tables.

An instance file is a sequence of whitespace-separated records; blank lines
and '#' comments are ignored:

    dimension 2
    curvature -1
    declared_C 0.5
    sources 3
    1.5430806348152437 1.1752011936438014 0
    ...
    targets 3
    ...
    queries 1        (optional)
    ...

A sample file carries `dimension` and `points k` followed by k rows. All
floats are written with 17 significant digits.
"""

import csv
import typing as t
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GeometryError, HypextError, InstanceFormatError
from .models.maps import PartialMap
from .models.net import Net
from .models.point import HPoint

PathLike = t.Union[str, Path]


@dataclass
class Instance:
    map: PartialMap
    queries: t.List[HPoint] = field(default_factory=list)


def _fmt(value: float) -> str:
    return format(float(value), '.17g')


def _fmt_row(row: t.Iterable[float]) -> str:
    return ' '.join(_fmt(v) for v in row)


def _lines(path: PathLike) -> t.List[t.List[str]]:
    try:
        text = Path(path).read_text()
    except OSError as error:
        raise InstanceFormatError(f'Cannot read {path}: {error}') from error
    out = []
    for line in text.splitlines():
        line = line.split('#', 1)[0].strip()
        if line:
            out.append(line.split())
    return out


class _Reader:
    def __init__(self, path: PathLike) -> None:
        self.path = path
        self.lines = _lines(path)
        self.pos = 0

    def fail(self, message: str) -> InstanceFormatError:
        return InstanceFormatError(f'{self.path}, record {self.pos + 1}: {message}')

    def done(self) -> bool:
        return self.pos >= len(self.lines)

    def peek_key(self) -> t.Optional[str]:
        return None if self.done() else self.lines[self.pos][0]

    def field(self, key: str) -> str:
        if self.done() or self.lines[self.pos][0] != key or len(self.lines[self.pos]) != 2:
            raise self.fail(f'expected "{key} <value>"')
        value = self.lines[self.pos][1]
        self.pos += 1
        return value

    def block(self, key: str, width: int) -> np.ndarray:
        count = self.field(key)
        try:
            k = int(count)
        except ValueError:
            raise self.fail(f'bad count {count!r} for {key}') from None
        rows = []
        for _ in range(k):
            if self.done():
                raise self.fail(f'{key} block ends early')
            tokens = self.lines[self.pos]
            if len(tokens) != width:
                raise self.fail(f'expected {width} coordinates, got {len(tokens)}')
            try:
                rows.append([float(tok) for tok in tokens])
            except ValueError:
                raise self.fail(f'non-numeric coordinate in {tokens}') from None
            self.pos += 1
        return np.array(rows, dtype=float).reshape(k, width)


def _points(rows: np.ndarray, reader: _Reader) -> t.List[HPoint]:
    try:
        return [HPoint(row) for row in rows]
    except GeometryError as error:
        raise reader.fail(str(error)) from error


def _dimension(reader: _Reader) -> int:
    try:
        m = int(reader.field('dimension'))
    except ValueError:
        raise reader.fail('dimension must be an integer') from None
    if m < 1:
        raise reader.fail('dimension must be positive')
    return m


def read_instance(path: PathLike) -> Instance:
    reader = _Reader(path)
    m = _dimension(reader)
    if reader.peek_key() == 'curvature' and reader.field('curvature') not in ('-1', '-1.0'):
        raise reader.fail('only curvature -1 is supported')
    try:
        declared_C = float(reader.field('declared_C'))
    except ValueError:
        raise reader.fail('declared_C must be a number') from None
    sources = _points(reader.block('sources', m + 1), reader)
    targets = _points(reader.block('targets', m + 1), reader)
    queries = _points(reader.block('queries', m + 1), reader) if reader.peek_key() == 'queries' else []
    if not reader.done():
        raise reader.fail(f'unexpected record {reader.lines[reader.pos][0]!r}')
    try:
        pmap = PartialMap(sources, targets, declared_C)
    except HypextError as error:
        raise InstanceFormatError(f'{path}: {error}') from error
    return Instance(pmap, queries)


def write_instance(path: PathLike, pmap: PartialMap, queries: t.Sequence[HPoint] = ()) -> None:
    lines = [f'dimension {pmap.dimension}', 'curvature -1', f'declared_C {_fmt(pmap.declared_C)}',
             f'sources {pmap.n}']
    lines += [_fmt_row(row) for row in pmap.sources]
    lines.append(f'targets {pmap.n}')
    lines += [_fmt_row(row) for row in pmap.targets]
    if queries:
        lines.append(f'queries {len(queries)}')
        lines += [_fmt_row(q.coords) for q in queries]
    Path(path).write_text('\n'.join(lines) + '\n')


def read_sample(path: PathLike) -> t.List[HPoint]:
    reader = _Reader(path)
    m = _dimension(reader)
    points = _points(reader.block('points', m + 1), reader)
    if not reader.done():
        raise reader.fail(f'unexpected record {reader.lines[reader.pos][0]!r}')
    return points


def write_sample(path: PathLike, points: t.Sequence[HPoint]) -> None:
    if not points:
        raise InstanceFormatError('Refusing to write an empty sample')
    lines = [f'dimension {points[0].dimension}', f'points {len(points)}']
    lines += [_fmt_row(p.coords) for p in points]
    Path(path).write_text('\n'.join(lines) + '\n')


def write_net(path: PathLike, net: Net) -> None:
    """Net centers with their bin index in the first column."""
    lines = [f'dimension {net.centers.shape[1] - 1}', f'epsilon {_fmt(net.epsilon)}', f'R {_fmt(net.R)}',
             f'num_bins {net.num_bins}', f'theoretical_N {net.theoretical_N}', f'centers {len(net.centers)}']
    lines += [f'{b} {_fmt_row(row)}' for b, row in zip(net.bin_of, net.centers)]
    Path(path).write_text('\n'.join(lines) + '\n')


def write_csv(path: PathLike, rows: t.Sequence[dict], columns: t.Optional[t.Sequence[str]] = None) -> None:
    columns = list(columns or (rows[0].keys() if rows else []))
    with open(path, 'w', newline='') as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return _fmt(value)
    return str(value)
