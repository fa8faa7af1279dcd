"""A small regex dialect with two matching engines and exact step accounting.

Supported syntax: literals, ``.``, classes ``[a-z]`` / ``[^...]``, grouping
``(...)`` (non-capturing), alternation ``|``, the quantifiers ``* + ?`` and the
anchors ``^ $``. A backslash escapes any metacharacter. Matching uses search
semantics: a pattern matches if it matches anywhere in the input.

Both engines run the same compiled program:

* :func:`match_backtracking` explores alternatives depth first, one thread at a
  time. It is exponential on ambiguous patterns such as ``(a|a)*b`` and is kept
  that way on purpose.
* :func:`match_budgeted` advances the set of live program counters in lock
  step over the input (a Pike-style state-set simulation), so its work is
  bounded by ``len(program) * (len(input) + 1)`` insertions.

Step units: one executed instruction for the backtracking engine (jumps
excluded), one state-set insertion for the budgeted engine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

META = set("\\.[]()|*+?^$")


class PatternSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class BudgetExceeded(RuntimeError):
    """The budgeted engine needed more steps than it was allowed."""

    def __init__(self, steps: int, budget: int):
        super().__init__(f"step budget {budget} exhausted")
        self.steps = steps
        self.budget = budget


class StepLimitReached(RuntimeError):
    """A caller-imposed cap stopped the backtracking engine."""

    def __init__(self, steps: int):
        super().__init__(f"backtracking stopped after {steps} steps")
        self.steps = steps


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Char:
    char: str


@dataclass(frozen=True)
class AnyChar:
    pass


@dataclass(frozen=True)
class CharClass:
    ranges: tuple[tuple[str, str], ...]
    negated: bool = False

    def contains(self, c: str) -> bool:
        hit = any(lo <= c <= hi for lo, hi in self.ranges)
        return hit != self.negated


@dataclass(frozen=True)
class Start:
    pass


@dataclass(frozen=True)
class End:
    pass


@dataclass(frozen=True)
class Concat:
    parts: tuple[Node, ...]


@dataclass(frozen=True)
class Alt:
    options: tuple[Node, ...]


@dataclass(frozen=True)
class Repeat:
    node: Node
    op: str  # one of "*", "+", "?"


Node = Union[Empty, Char, AnyChar, CharClass, Start, End, Concat, Alt, Repeat]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str | None:
        return self.text[self.pos] if self.pos < len(self.text) else None

    def parse(self) -> Node:
        node = self.alternation()
        if self.pos != len(self.text):
            raise PatternSyntaxError(f"unexpected {self.text[self.pos]!r}", self.pos)
        return node

    def alternation(self) -> Node:
        options = [self.concatenation()]
        while self.peek() == "|":
            self.pos += 1
            options.append(self.concatenation())
        return options[0] if len(options) == 1 else Alt(tuple(options))

    def concatenation(self) -> Node:
        parts = []
        while self.peek() is not None and self.peek() not in "|)":
            parts.append(self.repetition())
        if not parts:
            return Empty()
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def repetition(self) -> Node:
        grouped = self.peek() == "("
        node = self.atom()
        if self.peek() is not None and self.peek() in "*+?":
            if not grouped and isinstance(node, (Start, End)):
                raise PatternSyntaxError("nothing to repeat", self.pos)
            node = Repeat(node, self.text[self.pos])
            self.pos += 1
            if self.peek() is not None and self.peek() in "*+?":
                raise PatternSyntaxError("multiple repeat", self.pos)
        return node

    def atom(self) -> Node:
        c = self.peek()
        if c in ("*", "+", "?"):
            raise PatternSyntaxError("nothing to repeat", self.pos)
        if c == "(":
            self.pos += 1
            node = self.alternation()
            if self.peek() != ")":
                raise PatternSyntaxError("expected ')'", self.pos)
            self.pos += 1
            return node
        if c == "[":
            return self.char_class()
        if c == "]":
            raise PatternSyntaxError("unbalanced ']'", self.pos)
        self.pos += 1
        if c == ".":
            return AnyChar()
        if c == "^":
            return Start()
        if c == "$":
            return End()
        if c == "\\":
            return Char(self.escaped())
        return Char(c)

    def escaped(self) -> str:
        c = self.peek()
        if c is None or c not in META | {"-"}:
            raise PatternSyntaxError("bad escape", self.pos)
        self.pos += 1
        return c

    def class_char(self) -> str:
        c = self.peek()
        if c is None:
            raise PatternSyntaxError("unterminated character class", self.pos)
        self.pos += 1
        if c == "\\":
            return self.escaped()
        return c

    def char_class(self) -> Node:
        self.pos += 1
        negated = self.peek() == "^"
        if negated:
            self.pos += 1
        ranges = []
        if self.peek() == "]":
            raise PatternSyntaxError("empty character class", self.pos)
        while self.peek() != "]":
            lo = self.class_char()
            hi = lo
            if self.peek() == "-" and self.pos + 1 < len(self.text) and self.text[self.pos + 1] != "]":
                self.pos += 1
                at = self.pos
                hi = self.class_char()
                if hi < lo:
                    raise PatternSyntaxError("bad character range", at)
            ranges.append((lo, hi))
        self.pos += 1
        return CharClass(tuple(ranges), negated)


def _escape(c: str, in_class: bool = False) -> str:
    if c in META or (in_class and c == "-"):
        return "\\" + c
    return c


def to_source(node: Node, context: str = "top") -> str:
    """Serialize an AST back to pattern text; ``compile`` of the result is ``node``."""
    if isinstance(node, Empty):
        return "" if context in ("top", "alt") else "()"
    if isinstance(node, Char):
        return _escape(node.char)
    if isinstance(node, AnyChar):
        return "."
    if isinstance(node, (Start, End)):
        text = "^" if isinstance(node, Start) else "$"
        return f"({text})" if context == "repeat" else text
    if isinstance(node, CharClass):
        body = "".join(
            _escape(lo, True) if lo == hi else f"{_escape(lo, True)}-{_escape(hi, True)}"
            for lo, hi in node.ranges
        )
        return f"[{'^' if node.negated else ''}{body}]"
    if isinstance(node, Alt):
        text = "|".join(to_source(o, "alt") for o in node.options)
        return text if context == "top" else f"({text})"
    if isinstance(node, Concat):
        text = "".join(to_source(p, "concat") for p in node.parts)
        return text if context in ("top", "alt") else f"({text})"
    if isinstance(node, Repeat):
        text = to_source(node.node, "repeat") + node.op
        return f"({text})" if context == "repeat" else text
    raise TypeError(f"not a pattern node: {node!r}")


def nullable(node: Node) -> bool:
    if isinstance(node, (Empty, Start, End)):
        return True
    if isinstance(node, (Char, AnyChar, CharClass)):
        return False
    if isinstance(node, Concat):
        return all(nullable(p) for p in node.parts)
    if isinstance(node, Alt):
        return any(nullable(o) for o in node.options)
    return node.op != "+" or nullable(node.node)


# ---------------------------------------------------------------------------
# Program


class Op(enum.IntEnum):
    CHAR = 0
    ANY = 1
    CLASS = 2
    SPLIT = 3
    JMP = 4
    BOL = 5
    EOL = 6
    MATCH = 7
    MARK = 8  # remember the position a nullable loop body started at
    CHECK = 9  # fail the iteration if the body consumed nothing


def _emit(node: Node, prog: list, loops: list) -> None:
    if isinstance(node, Empty):
        return
    if isinstance(node, Char):
        prog.append((Op.CHAR, node.char, None))
    elif isinstance(node, AnyChar):
        prog.append((Op.ANY, None, None))
    elif isinstance(node, CharClass):
        prog.append((Op.CLASS, node, None))
    elif isinstance(node, Start):
        prog.append((Op.BOL, None, None))
    elif isinstance(node, End):
        prog.append((Op.EOL, None, None))
    elif isinstance(node, Concat):
        for part in node.parts:
            _emit(part, prog, loops)
    elif isinstance(node, Alt):
        jumps = []
        for option in node.options[:-1]:
            split = len(prog)
            prog.append(None)
            _emit(option, prog, loops)
            jumps.append(len(prog))
            prog.append(None)
            prog[split] = (Op.SPLIT, split + 1, len(prog))
        _emit(node.options[-1], prog, loops)
        for j in jumps:
            prog[j] = (Op.JMP, len(prog), None)
    elif isinstance(node, Repeat):
        if node.op == "?":
            split = len(prog)
            prog.append(None)
            _emit(node.node, prog, loops)
            prog[split] = (Op.SPLIT, split + 1, len(prog))
        elif node.op == "+":
            # x+ == x x*, so the empty-iteration guard only covers optional iterations
            _emit(node.node, prog, loops)
            _emit(Repeat(node.node, "*"), prog, loops)
        else:
            guard = nullable(node.node)
            slot = len(loops)
            if guard:
                loops.append(slot)
            split = len(prog)
            prog.append(None)
            if guard:
                prog.append((Op.MARK, slot, None))
            _emit(node.node, prog, loops)
            if guard:
                prog.append((Op.CHECK, slot, None))
            prog.append((Op.JMP, split, None))
            prog[split] = (Op.SPLIT, split + 1, len(prog))
    else:
        raise TypeError(f"not a pattern node: {node!r}")


@dataclass(frozen=True)
class Pattern:
    source: str
    ast: Node
    program: tuple
    n_slots: int

    @property
    def n_states(self) -> int:
        return len(self.program)


def compile(text: str) -> Pattern:  # noqa: A001 - mirrors re.compile
    ast = _Parser(text).parse()
    prog: list = []
    loops: list = []
    _emit(ast, prog, loops)
    prog.append((Op.MATCH, None, None))
    program = tuple((int(op), a, b) for op, a, b in prog)
    return Pattern(text, ast, program, len(loops))


class Engine(enum.Enum):
    BACKTRACKING = "backtracking"
    BUDGETED = "budgeted"


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    steps: int
    engine: Engine
    exhausted: bool = False


def _as_text(data: str | bytes) -> str:
    return data.decode("latin-1") if isinstance(data, (bytes, bytearray)) else data


def match_backtracking(pattern: Pattern, data: str | bytes, max_steps: int | None = None) -> MatchResult:
    """Depth-first search over the program, trying every start offset.

    ``max_steps`` is a caller-side safety cap; reaching it raises
    :class:`StepLimitReached`. Without it the run is unbounded.
    """
    text = _as_text(data)
    prog = pattern.program
    n = len(text)
    limit = max_steps if max_steps is not None else -1
    steps = 0
    no_regs = (None,) * pattern.n_slots
    # plain ints in the hot loop; IntEnum comparisons are several times slower
    CHAR, ANY, CLASS, SPLIT, JMP, BOL, EOL, MATCH, MARK = 0, 1, 2, 3, 4, 5, 6, 7, 8
    for start in range(n + 1):
        stack = [(0, start, no_regs)]
        pop = stack.pop
        push = stack.append
        while stack:
            pc, sp, regs = pop()
            while True:
                op, a, b = prog[pc]
                if op == JMP:
                    pc = a
                    continue
                steps += 1
                if steps == limit:
                    raise StepLimitReached(steps)
                if op == CHAR:
                    if sp < n and text[sp] == a:
                        pc += 1
                        sp += 1
                        continue
                    break
                if op == SPLIT:
                    push((b, sp, regs))
                    pc = a
                    continue
                if op == ANY:
                    if sp < n:
                        pc += 1
                        sp += 1
                        continue
                    break
                if op == CLASS:
                    if sp < n and a.contains(text[sp]):
                        pc += 1
                        sp += 1
                        continue
                    break
                if op == MATCH:
                    return MatchResult(True, steps, Engine.BACKTRACKING)
                if op == BOL:
                    if sp == 0:
                        pc += 1
                        continue
                    break
                if op == EOL:
                    if sp == n:
                        pc += 1
                        continue
                    break
                if op == MARK:
                    regs = regs[:a] + (sp,) + regs[a + 1:]
                    pc += 1
                    continue
                # CHECK
                if regs[a] == sp:
                    break
                pc += 1
    return MatchResult(False, steps, Engine.BACKTRACKING)


def match_budgeted(pattern: Pattern, data: str | bytes, budget: int) -> MatchResult:
    """Lock-step state-set simulation; raises :class:`BudgetExceeded` past ``budget``."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    text = _as_text(data)
    prog = pattern.program
    n = len(text)
    seen = [-1] * len(prog)
    steps = 0

    def add(pc: int, pos: int, out: list) -> bool:
        nonlocal steps
        stack = [pc]
        while stack:
            pc = stack.pop()
            if seen[pc] == pos:
                continue
            seen[pc] = pos
            steps += 1
            if steps > budget:
                raise BudgetExceeded(steps - 1, budget)
            op, a, b = prog[pc]
            if op == Op.SPLIT:
                stack.append(b)
                stack.append(a)
            elif op == Op.JMP:
                stack.append(a)
            elif op == Op.MARK or op == Op.CHECK:
                stack.append(pc + 1)
            elif op == Op.BOL:
                if pos == 0:
                    stack.append(pc + 1)
            elif op == Op.EOL:
                if pos == n:
                    stack.append(pc + 1)
            elif op == Op.MATCH:
                return True
            else:
                out.append(pc)
        return False

    current: list[int] = []
    for pos in range(n + 1):
        if add(0, pos, current):
            return MatchResult(True, steps, Engine.BUDGETED)
        if pos == n:
            break
        c = text[pos]
        following: list[int] = []
        for pc in current:
            op, a, _ = prog[pc]
            if op == Op.CHAR:
                ok = c == a
            elif op == Op.ANY:
                ok = True
            else:
                ok = a.contains(c)
            if ok and add(pc + 1, pos + 1, following):
                return MatchResult(True, steps, Engine.BUDGETED)
        current = following
    return MatchResult(False, steps, Engine.BUDGETED)


class Matcher:
    """A pattern bound to an engine and a step allowance; ``run`` never raises.

    For the budgeted engine ``max_steps`` is the hard budget and exhaustion is
    reported through ``MatchResult.exhausted``. For the backtracking engine it
    only keeps the simulation finite: the steps spent are reported and the
    input is treated as not matching, which is what a gateway does when its
    watchdog gives up on a runaway check.
    """

    def __init__(self, pattern: Pattern | str, engine: Engine | str = Engine.BUDGETED,
                 max_steps: int = 100_000):
        self.pattern = compile(pattern) if isinstance(pattern, str) else pattern
        self.engine = Engine(engine)
        self.max_steps = max_steps

    def run(self, data: str | bytes) -> MatchResult:
        if self.engine is Engine.BUDGETED:
            try:
                return match_budgeted(self.pattern, data, self.max_steps)
            except BudgetExceeded as exc:
                return MatchResult(False, exc.steps, Engine.BUDGETED, exhausted=True)
        try:
            return match_backtracking(self.pattern, data, self.max_steps)
        except StepLimitReached as exc:
            return MatchResult(False, exc.steps, Engine.BACKTRACKING, exhausted=True)

    def linear_bound(self, data: str | bytes) -> int:
        return self.pattern.n_states * (len(data) + 1)
