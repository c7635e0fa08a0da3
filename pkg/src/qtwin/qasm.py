"""OpenQASM 2.0 subset reader and canonical writer.

Accepted: the header, ``include "qelib1.inc"``, one ``qreg``, at most one
``creg``, ``barrier``, ``measure`` and the gate kinds of
:data:`qtwin.circuit.GATE_SPECS` (``cx``/``CX``/``cnot`` spell the same gate;
``rx`` and ``ry`` become ``prx`` with phi = 0 and pi/2).  Anything else is an
error; nothing is silently dropped.
"""

from __future__ import annotations

import ast
import bisect
import math
import operator
import re
from pathlib import Path

from .circuit import GATE_SPECS, Circuit, Gate
from .errors import ParseError, ValidationError

_ALIASES = {"CX": "cx", "cnot": "cx", "U": "u3", "prx": "prx", "r": "prx"}
_UNSUPPORTED = {"gate", "opaque", "if", "reset", "OPENQASM3", "def", "for", "while"}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
          "ln": math.log, "sqrt": math.sqrt}

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_ARG = re.compile(rf"\s*({_IDENT})\s*(?:\[\s*(\d+)\s*\])?\s*$")
_REG = re.compile(rf"(qreg|creg)\s+({_IDENT})\s*\[\s*(\d+)\s*\]\s*$")
_MEASURE = re.compile(r"measure\s+(.+?)\s*->\s*(.+)$", re.S)
_GATE = re.compile(rf"({_IDENT})\s*(?:\((.*)\))?\s*(.*)$", re.S)


def _eval_angle(expr: str) -> float:
    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"bad angle expression {expr!r}") from exc

    def ev(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported angle expression {expr!r}")

    value = ev(tree)
    if not math.isfinite(value):
        raise ValueError(f"non-finite angle {expr!r}")
    return value


def _split_params(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p for p in parts if p.strip()] if any(p.strip() for p in parts) else []


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
        self.qreg: tuple[str, int] | None = None
        self.creg: tuple[str, int] | None = None
        self.gates: list[Gate] = []
        self.measured: dict[int, int] = {}

    def where(self, offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(self.line_starts, offset)
        return line, offset - self.line_starts[line - 1] + 1

    def fail(self, message: str, offset: int) -> ParseError:
        return ParseError(message, *self.where(offset))

    def statements(self):
        """Yield (statement text, absolute offset of its first character)."""
        text = self.text
        i, n = 0, len(text)
        start, buf = None, []
        while i < n:
            ch = text[i]
            if text.startswith("//", i):
                j = text.find("\n", i)
                i = n if j < 0 else j
                continue
            if ch == ";":
                if start is None:
                    raise self.fail("empty statement", i)
                yield "".join(buf).strip(), start
                start, buf = None, []
            elif ch in "{}":
                raise self.fail("gate definitions and blocks are not supported", i)
            else:
                if start is None and not ch.isspace():
                    start = i
                if start is not None:
                    buf.append(ch)
            i += 1
        if start is not None:
            raise self.fail("missing ';' at end of statement", start)

    def parse(self) -> Circuit:
        first = True
        for stmt, off in self.statements():
            if first:
                if not re.fullmatch(r"OPENQASM\s+2(\.0)?", stmt):
                    raise self.fail("expected 'OPENQASM 2.0;' header", off)
                first = False
                continue
            self.statement(stmt, off)
        if first:
            raise ParseError("empty document: expected 'OPENQASM 2.0;' header", 1, 1)
        if self.qreg is None:
            raise ParseError("no qreg declared")
        nclbits = self.creg[1] if self.creg else 0
        try:
            return Circuit(self.qreg[1], self.gates, nclbits)
        except ValidationError as exc:
            raise ParseError(str(exc)) from exc

    def statement(self, stmt: str, off: int) -> None:
        keyword = re.match(rf"{_IDENT}|\S", stmt).group(0)
        if keyword == "include":
            if not re.fullmatch(r'include\s+"qelib1\.inc"', stmt):
                raise self.fail("only 'include \"qelib1.inc\"' is supported", off)
            return
        if keyword in ("qreg", "creg"):
            m = _REG.match(stmt)
            if not m:
                raise self.fail(f"malformed {keyword} declaration", off)
            kind, name, size = m.group(1), m.group(2), int(m.group(3))
            if size < 1:
                raise self.fail(f"{kind} {name} must have positive size", off)
            slot = "qreg" if kind == "qreg" else "creg"
            if getattr(self, slot) is not None:
                raise self.fail(f"only one {kind} is supported", off)
            if self.gates:
                raise self.fail(f"{kind} must be declared before any operation", off)
            setattr(self, slot, (name, size))
            return
        if keyword in _UNSUPPORTED:
            raise self.fail(f"unsupported construct '{keyword}'", off)
        if self.qreg is None:
            raise self.fail("operation before qreg declaration", off)
        if keyword == "measure":
            self.measure(stmt, off)
        elif keyword == "barrier":
            qubits = self.args(stmt[len("barrier"):], off + len("barrier"), broadcast=True)
            self.add(Gate("barrier", tuple(dict.fromkeys(qubits))), off)
        else:
            self.gate(stmt, off)

    def args(self, text: str, off: int, broadcast: bool = False) -> list[int]:
        qname, qsize = self.qreg
        out: list[int] = []
        pos = 0
        for piece in text.split(","):
            m = _ARG.match(piece)
            if not m:
                raise self.fail(f"malformed qubit argument {piece.strip()!r}", off + pos)
            name, index = m.group(1), m.group(2)
            if name != qname:
                raise self.fail(f"unknown quantum register {name!r}", off + pos)
            if index is None:
                if not broadcast:
                    raise self.fail("whole-register arguments are only allowed here for "
                                    "single-qubit gates", off + pos)
                out.extend(range(qsize))
            else:
                q = int(index)
                if q >= qsize:
                    raise self.fail(f"qubit index {q} out of range for {qname}[{qsize}]",
                                    off + pos)
                out.append(q)
            pos += len(piece) + 1
        return out

    def measure(self, stmt: str, off: int) -> None:
        m = _MEASURE.match(stmt)
        if not m:
            raise self.fail("malformed measure statement; expected 'measure q[i] -> c[j]'", off)
        if self.creg is None:
            raise self.fail("measure without a classical register", off)
        cname, csize = self.creg
        qtext, ctext = m.group(1), m.group(2)
        cm = _ARG.match(ctext)
        if not cm or cm.group(1) != cname:
            raise self.fail(f"unknown classical register in {ctext.strip()!r}", off + m.start(2))
        qm = _ARG.match(qtext)
        if not qm or qm.group(1) != self.qreg[0]:
            raise self.fail(f"unknown quantum register in {qtext.strip()!r}", off + m.start(1))
        if qm.group(2) is None and cm.group(2) is None:
            if self.qreg[1] != csize:
                raise self.fail(
                    f"register-size mismatch: {self.qreg[0]}[{self.qreg[1]}] -> {cname}[{csize}]",
                    off)
            for q in range(csize):
                self.add(Gate("measure", (q,), clbit=q), off)
            return
        if qm.group(2) is None or cm.group(2) is None:
            raise self.fail("register-size mismatch: mixed register and bit operands", off)
        q, c = int(qm.group(2)), int(cm.group(2))
        if q >= self.qreg[1]:
            raise self.fail(f"qubit index {q} out of range", off + m.start(1))
        if c >= csize:
            raise self.fail(f"classical bit {c} out of range for {cname}[{csize}]",
                            off + m.start(2))
        self.add(Gate("measure", (q,), clbit=c), off)

    def gate(self, stmt: str, off: int) -> None:
        m = _GATE.match(stmt)
        if not m:
            raise self.fail("syntax error", off)
        raw, ptext, argtext = m.group(1), m.group(2), m.group(3)
        name = _ALIASES.get(raw, raw)
        params: list[float] = []
        if ptext is not None:
            try:
                params = [_eval_angle(p) for p in _split_params(ptext)]
            except ValueError as exc:
                raise self.fail(str(exc), off + m.start(2)) from exc
        if name in ("rx", "ry"):
            if len(params) != 1:
                raise self.fail(f"{name} takes 1 parameter", off)
            params = [params[0], 0.0 if name == "rx" else math.pi / 2]
            name = "prx"
        if name not in GATE_SPECS or name in ("measure", "barrier"):
            raise self.fail(f"unsupported gate '{raw}'", off)
        arity, nparams = GATE_SPECS[name]
        if len(params) != nparams:
            raise self.fail(f"{raw} takes {nparams} parameter(s), got {len(params)}", off)
        if not argtext.strip():
            raise self.fail(f"{raw} needs qubit arguments", off)
        qubits = self.args(argtext, off + m.start(3), broadcast=arity == 1)
        if arity == 1:
            for q in qubits:
                self.add(Gate(name, (q,), tuple(params)), off)
        else:
            if len(qubits) != arity:
                raise self.fail(f"{raw} acts on {arity} qubits, got {len(qubits)}", off)
            if len(set(qubits)) != len(qubits):
                raise self.fail(f"duplicate qubit operand in {raw}", off)
            self.add(Gate(name, tuple(qubits), tuple(params)), off)

    def add(self, gate: Gate, off: int) -> None:
        # surface ordering problems (gate after measure) at the offending line
        if gate.name == "measure":
            q = gate.qubits[0]
            if q in self.measured:
                raise self.fail(f"qubit {q} measured twice", off)
            if gate.clbit in self.measured.values():
                raise self.fail(f"classical bit {gate.clbit} written twice", off)
            self.measured[q] = gate.clbit
        elif gate.name != "barrier":
            hit = set(self.measured).intersection(gate.qubits)
            if hit:
                raise self.fail(f"gate {gate} follows the measurement of qubit {min(hit)}", off)
        self.gates.append(gate)


def parse_qasm(text: str) -> Circuit:
    return _Reader(text).parse()


def load_qasm(path: str | Path) -> Circuit:
    path = Path(path)
    c = parse_qasm(path.read_text(encoding="utf-8"))
    return Circuit(c.num_qubits, c.gates, c.num_clbits, name=path.stem)


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_qasm(c: Circuit, header: str | None = None) -> str:
    """Canonical form: one statement per line, angles written with ``repr``."""
    lines = []
    if header:
        lines.extend("// " + h for h in header.splitlines())
    lines += ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{c.num_qubits}];"]
    if c.num_clbits:
        lines.append(f"creg c[{c.num_clbits}];")
    for g in c.gates:
        if g.name == "measure":
            lines.append(f"measure q[{g.qubits[0]}] -> c[{g.clbit}];")
            continue
        params = "(" + ",".join(_fmt(p) for p in g.params) + ")" if g.params else ""
        args = ",".join(f"q[{q}]" for q in g.qubits)
        lines.append(f"{g.name}{params} {args};")
    return "\n".join(lines) + "\n"
