"""Line-oriented bench-program language.

A program is a ``dim`` line followed by ``params``, ``state`` and a list
of element steps; ``#`` starts a comment. Every argument is ``key=value``.
Frequencies are written as f = omega/2pi with Hz/kHz/MHz suffixes, times
with ns/us/ms, loss rates with /s, /ms or /us, and angles either as plain
radians or as multiples of pi (``pi/2``, ``0.5pi``). Quantities keep the
unit they were written with so that printing a parsed program and parsing
it again gives the same program; conversion to rad/us happens when a
program is compiled.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

from ..errors import DuplicateLabel, ParseError, UnknownUnit

FREQ_UNITS = {"Hz": 1e-6, "kHz": 1e-3, "MHz": 1.0}  # to MHz
TIME_UNITS = {"ns": 1e-3, "us": 1.0, "ms": 1e3}  # to us
RATE_UNITS = {"/s": 1e-6, "/ms": 1e-3, "/us": 1.0}  # to 1/us
UNIT_TABLES = {"freq": FREQ_UNITS, "time": TIME_UNITS, "rate": RATE_UNITS}

_NUM = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_NUM_RE = re.compile(rf"^({_NUM})(.*)$")
_PI_RE = re.compile(rf"^([+-]?|{_NUM})\*?pi(?:/({_NUM}))?$")
_INT_RE = re.compile(r"^[+-]?\d+$")
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")
_TOKEN_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class Quantity:
    """A number with the unit it was written in ('' when dimensionless, 'pi' for multiples of pi)."""

    value: float
    unit: str = ""

    def to(self, kind: str) -> float:
        """Magnitude in internal units: MHz, us or 1/us, and radians for angles."""
        if kind in UNIT_TABLES:
            return self.value * UNIT_TABLES[kind][self.unit]
        if self.unit == "pi":
            return self.value * math.pi
        return self.value

    def __str__(self):
        return f"{self.value!r}{self.unit}"


# (name, type, required); types: int, float, angle, freq, time, rate, ident, path
GRAMMAR: dict = {
    "params": [("k4", "freq", True), ("k6", "freq", True), ("chi", "freq", True), ("ke", "freq", True),
               ("kappa", "rate", False)],
    "state coherent": [("alpha", "float", True), ("phase", "angle", False)],
    "state gaussian": [("center", "float", True), ("sigma", "float", True)],
    "state dg": [("n1", "int", True), ("n2", "int", True), ("r1", "float", True), ("r2", "float", True),
                 ("theta", "angle", True), ("sigma", "float", True)],
    "state fock": [("n", "int", True)],
    "state slingshot": [("n1", "int", True), ("n2", "int", True), ("r1", "float", True), ("r2", "float", True),
                        ("theta", "angle", True), ("sigma", "float", True), ("beta", "float", False),
                        ("cutoff", "int", False)],
    "prism": [("phase", "angle", True)],
    "wait": [("t", "time", True), ("delta", "freq", True)],
    "pump": [("eps", "freq", True), ("phase", "angle", True), ("delta", "freq", True), ("t", "time", True)],
    "displace": [("re", "float", True), ("im", "float", True)],
    "lens": [("center", "float", True), ("tphi", "time", True)],
    "image": [("tu", "time", True), ("tf", "time", True), ("center", "float", True), ("eps", "freq", False),
              ("tphi", "time", False), ("phase", "angle", False)],
    "measure pn": [("label", "ident", True)],
    "measure moments": [("label", "ident", True)],
    "output": [("label", "ident", True), ("path", "path", True)],
}
VARIANTS = {"state": ("coherent", "gaussian", "dg", "fock", "slingshot"), "measure": ("pn", "moments")}
STEP_HEADS = ("prism", "wait", "pump", "displace", "lens", "image", "measure")


@dataclass(frozen=True)
class Stmt:
    """One directive: ``head`` is e.g. 'pump' or 'state dg'; args keep grammar order."""

    head: str
    args: tuple  # ((name, value), ...)

    def get(self, name, default=None):
        for k, v in self.args:
            if k == name:
                return v
        return default

    def with_arg(self, name, value) -> "Stmt":
        spec = GRAMMAR[self.head]
        if name not in {n for n, _, _ in spec}:
            raise KeyError(f"{self.head} has no argument {name!r}")
        d = dict(self.args)
        d[name] = value
        return Stmt(self.head, tuple((n, d[n]) for n, _, _ in spec if n in d))


@dataclass(frozen=True)
class BenchProgram:
    dim: int
    params: Stmt
    initial: Stmt
    steps: tuple
    outputs: tuple  # ((label, path), ...)

    def labels(self):
        return [s.get("label") for s in self.steps if s.head.startswith("measure")]

    def replace(self, **kw) -> "BenchProgram":
        return replace(self, **kw)


# -- value parsing -----------------------------------------------------------------


def _parse_value(kind: str, text: str, line: int, col: int):
    if kind == "int":
        if not _INT_RE.match(text):
            raise ParseError(f"expected an integer, found {text!r}", line, col)
        return int(text)
    if kind == "ident":
        if not _IDENT_RE.match(text):
            raise ParseError(f"expected an identifier, found {text!r}", line, col)
        return text
    if kind == "path":
        return text
    if kind == "angle":
        m = _PI_RE.match(text)
        if m:
            coef = m.group(1)
            c = -1.0 if coef == "-" else (1.0 if coef in ("", "+") else float(coef))
            if m.group(2) is not None:
                den = float(m.group(2))
                if den == 0:
                    raise ParseError("division by zero in angle", line, col)
                c /= den
            return Quantity(c, "pi")
    m = _NUM_RE.match(text)
    if not m:
        raise ParseError(f"expected a number, found {text!r}", line, col)
    value = float(m.group(1))
    if not math.isfinite(value):
        raise ParseError(f"number out of range: {text!r}", line, col)
    unit = m.group(2)
    if kind in UNIT_TABLES:
        table = UNIT_TABLES[kind]
        if unit == "":
            raise ParseError(f"expected a {kind} unit ({', '.join(table)}) after {text!r}", line, col)
        if unit not in table:
            raise UnknownUnit(f"unknown {kind} unit {unit!r}; expected one of {', '.join(table)}", line,
                              col + len(m.group(1)))
        return Quantity(value, unit)
    if unit:
        raise UnknownUnit(f"unexpected unit {unit!r} on a dimensionless value", line, col + len(m.group(1)))
    return Quantity(value, "")


def parse_values(kind: str, text: str) -> list:
    """Sweep value list: comma separated, or ``start:stop:step`` sharing one unit."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParseError(f"range must be start:stop:step, found {text!r}")
        units = set()
        nums = []
        for p in parts:
            m = _NUM_RE.match(p)
            if not m:
                raise ParseError(f"expected a number in range, found {p!r}")
            nums.append(float(m.group(1)))
            if m.group(2):
                units.add(m.group(2))
        if len(units) > 1:
            raise ParseError(f"range mixes units {sorted(units)}")
        unit = units.pop() if units else ""
        start, stop, step = nums
        if step == 0 or (stop - start) / step < 0:
            raise ParseError(f"empty or unbounded range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        vals = [start + i * step for i in range(count)]
        if kind == "int":
            return [_parse_value(kind, str(int(round(v))), 0, 0) for v in vals]
        return [_parse_value(kind, f"{v!r}{unit}", 0, 0) for v in vals]
    return [_parse_value(kind, p.strip(), 0, 0) for p in text.split(",") if p.strip()]


# -- parser ---------------------------------------------------------------------------


def _tokens(line: str):
    body = line.split("#", 1)[0]
    return [(m.group(0), m.start() + 1) for m in _TOKEN_RE.finditer(body)]


def _parse_args(head: str, toks, lineno: int, end_col: int) -> Stmt:
    spec = GRAMMAR[head]
    kinds = {n: (k, req) for n, k, req in spec}
    seen = {}
    for text, col in toks:
        if "=" not in text:
            raise ParseError(f"expected key=value for '{head}', found {text!r}", lineno, col)
        key, val = text.split("=", 1)
        if key not in kinds:
            raise ParseError(f"unexpected key {key!r} for '{head}'; expected one of {', '.join(kinds)}", lineno, col)
        if key in seen:
            raise ParseError(f"duplicate key {key!r}", lineno, col)
        if val == "":
            raise ParseError(f"expected a value after '{key}='", lineno, col + len(key) + 1)
        seen[key] = _parse_value(kinds[key][0], val, lineno, col + len(key) + 1)
    for n, _, req in spec:
        if req and n not in seen:
            raise ParseError(f"expected {n}= in '{head}'", lineno, end_col)
    return Stmt(head, tuple((n, seen[n]) for n, _, _ in spec if n in seen))


def parse_bench(text: str) -> BenchProgram:
    """Parse program text; every failure is a :class:`ParseError` (or subclass)."""
    if not isinstance(text, str):
        raise ParseError("program text must be a string")
    dim = None
    params = initial = None
    steps, outputs = [], []
    labels, out_labels = set(), set()
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(raw)
        if not toks:
            continue
        last_line = lineno
        word, col = toks[0]
        end_col = len(raw.split("#", 1)[0].rstrip()) + 1
        if dim is None:
            if word != "dim":
                raise ParseError(f"expected dim, found {word!r}", lineno, col)
            if len(toks) != 2:
                raise ParseError("expected dim <int>", lineno, end_col if len(toks) < 2 else toks[2][1])
            n = _parse_value("int", toks[1][0], lineno, toks[1][1])
            if n < 1:
                raise ParseError("dim must be a positive integer", lineno, toks[1][1])
            dim = n
            continue
        rest = toks[1:]
        if word in VARIANTS:
            if not rest:
                raise ParseError(f"expected one of {', '.join(VARIANTS[word])} after '{word}'", lineno, end_col)
            var, vcol = rest[0]
            if var not in VARIANTS[word]:
                raise ParseError(f"expected one of {', '.join(VARIANTS[word])} after '{word}', found {var!r}",
                                 lineno, vcol)
            head, rest = f"{word} {var}", rest[1:]
        elif word in GRAMMAR:
            head = word
        else:
            expected = "params, state, output or a step (" + ", ".join(STEP_HEADS) + ")"
            raise ParseError(f"expected {expected}, found {word!r}", lineno, col)
        stmt = _parse_args(head, rest, lineno, end_col)
        if head == "params":
            if params is not None:
                raise ParseError("params given twice", lineno, col)
            params = stmt
        elif head.startswith("state"):
            if initial is not None:
                raise ParseError("state given twice", lineno, col)
            initial = stmt
        elif head == "output":
            lab = stmt.get("label")
            if lab in out_labels:
                raise DuplicateLabel(f"output label {lab!r} used twice", lineno, col)
            if lab not in labels:
                raise ParseError(f"output refers to unknown measurement label {lab!r}", lineno, col)
            out_labels.add(lab)
            outputs.append((lab, stmt.get("path")))
        else:
            if head.startswith("measure"):
                lab = stmt.get("label")
                if lab in labels:
                    raise DuplicateLabel(f"measurement label {lab!r} used twice", lineno, col)
                labels.add(lab)
            steps.append(stmt)
    if dim is None:
        raise ParseError("expected dim", 1, 1)
    if params is None:
        raise ParseError("expected params", last_line + 1, 1)
    if initial is None:
        raise ParseError("expected state", last_line + 1, 1)
    return BenchProgram(dim, params, initial, tuple(steps), tuple(outputs))


def _stmt_line(stmt: Stmt) -> str:
    return " ".join([stmt.head] + [f"{k}={v}" for k, v in stmt.args])


def serialize_bench(prog: BenchProgram) -> str:
    """Canonical text form; ``parse_bench(serialize_bench(p)) == p``."""
    lines = [f"dim {prog.dim}", _stmt_line(prog.params), _stmt_line(prog.initial)]
    lines += [_stmt_line(s) for s in prog.steps]
    lines += [f"output label={lab} path={path}" for lab, path in prog.outputs]
    return "\n".join(lines) + "\n"


def find_statement(prog: BenchProgram, key: str):
    """Resolve a sweep key such as ``pump.t``, ``pump[1].t``, ``state.alpha`` or ``params.k4``.

    Returns (where, index, head, arg) where ``where`` is 'steps', 'params' or
    'initial'. Without an index the first matching step is used.
    """
    m = re.match(r"^([a-z]+)(?:\[(\d+)\])?\.([a-z0-9]+)$", key)
    if not m:
        raise ParseError(f"sweep key must look like kind.field or kind[i].field, found {key!r}")
    kind, idx, arg = m.group(1), m.group(2), m.group(3)
    if kind == "params":
        return "params", None, prog.params.head, arg
    if kind == "state":
        return "initial", None, prog.initial.head, arg
    matches = [i for i, s in enumerate(prog.steps) if s.head.split()[0] == kind]
    k = int(idx) if idx is not None else 0
    if k >= len(matches):
        raise ParseError(f"program has no {kind} step number {k}")
    i = matches[k]
    return "steps", i, prog.steps[i].head, arg


def arg_kind(head: str, arg: str) -> str:
    for n, k, _ in GRAMMAR[head]:
        if n == arg:
            return k
    raise ParseError(f"'{head}' has no argument {arg!r}")


def substitute(prog: BenchProgram, key: str, value) -> BenchProgram:
    where, i, head, arg = find_statement(prog, key)
    arg_kind(head, arg)
    if where == "params":
        return prog.replace(params=prog.params.with_arg(arg, value))
    if where == "initial":
        return prog.replace(initial=prog.initial.with_arg(arg, value))
    steps = list(prog.steps)
    steps[i] = steps[i].with_arg(arg, value)
    return prog.replace(steps=tuple(steps))


def load_bench(path) -> BenchProgram:
    with open(path, encoding="utf-8") as fh:
        return parse_bench(fh.read())

