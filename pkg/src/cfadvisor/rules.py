"""Boolean rule language over dataset columns.

Grammar (lowest precedence first):

    expr    := and_e ('or' and_e)*
    and_e   := not_e ('and' not_e)*
    not_e   := 'not' not_e | '(' expr ')' | comparison
    compare := arith ('<' | '<=' | '>' | '>=' | '==' | '!=') arith
    arith   := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '(' arith ')' | '-' factor | NUMBER | IDENT

A parenthesis after 'not' or at the start of a clause is ambiguous (boolean
group vs arithmetic group); the parser tries the boolean reading first and
backtracks. Division by zero makes the enclosing comparison false rather
than raising, so a malformed ratio rule rejects rows instead of crashing
the run.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field

import numpy as np


class RuleSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class RuleEvalError(ValueError):
    pass


class RuleProviderError(RuntimeError):
    """A remote rule provider was unreachable or returned garbage."""


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Arith:
    op: str  # + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Cmp:
    op: str  # < <= > >= == !=
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Bool:
    op: str  # and or
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Not:
    operand: "Node"


Node = Num | Var | Neg | Arith | Cmp | Bool | Not


# ---------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><=|>=|==|!=|<|>|\+|-|\*|/|\(|\)))"
)

KEYWORDS = ("and", "or", "not")


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise RuleSyntaxError(
                f"unexpected character {stripped[0]!r}",
                len(text) - len(stripped))
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            word = m.group("ident")
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append((kind, word, m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


# ---------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: str):
        kind, value, offset = self.peek()
        got = "end of input" if kind == "end" else repr(value)
        raise RuleSyntaxError(f"expected {expected}, got {got}", offset)

    def expect_op(self, op: str):
        kind, value, _ = self.peek()
        if kind == "op" and value == op:
            return self.advance()
        self.fail(f"'{op}'")

    def parse(self) -> Node:
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail("end of input")
        return node

    def expr(self) -> Node:
        node = self.and_expr()
        while self.peek()[:2] == ("kw", "or"):
            self.advance()
            node = Bool("or", node, self.and_expr())
        return node

    def and_expr(self) -> Node:
        node = self.not_expr()
        while self.peek()[:2] == ("kw", "and"):
            self.advance()
            node = Bool("and", node, self.not_expr())
        return node

    def not_expr(self) -> Node:
        if self.peek()[:2] == ("kw", "not"):
            self.advance()
            return Not(self.not_expr())
        if self.peek()[:2] == ("op", "("):
            # boolean group first; backtrack to an arithmetic reading like
            # "(a + 1) > 2" if the group does not parse as a full expression
            mark = self.pos
            try:
                self.advance()
                node = self.expr()
                self.expect_op(")")
                return node
            except RuleSyntaxError:
                self.pos = mark
        return self.comparison()

    def comparison(self) -> Node:
        left = self.arith()
        kind, value, _ = self.peek()
        if kind == "op" and value in ("<", "<=", ">", ">=", "==", "!="):
            self.advance()
            return Cmp(value, left, self.arith())
        self.fail("a comparison operator")

    def arith(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.advance()[1]
            node = Arith(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.advance()[1]
            node = Arith(op, node, self.factor())
        return node

    def factor(self) -> Node:
        kind, value, offset = self.peek()
        if kind == "op" and value == "(":
            self.advance()
            node = self.arith()
            self.expect_op(")")
            return node
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.factor())
        if kind == "num":
            self.advance()
            return Num(float(value))
        if kind == "ident":
            self.advance()
            return Var(value)
        self.fail("a number, column name, or '('")


def parse_expression(text: str) -> Node:
    if not text or not text.strip():
        raise RuleSyntaxError("empty expression", 0)
    return _Parser(text).parse()


# ---------------------------------------------------------------- eval

def variables(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Not)):
        return variables(node.operand)
    return variables(node.left) | variables(node.right)


def _arith_value(node: Node, bindings) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return float(bindings[node.name])
        except KeyError:
            raise RuleEvalError(f"unbound column {node.name!r}") from None
    if isinstance(node, Neg):
        return -_arith_value(node.operand, bindings)
    if isinstance(node, Arith):
        a = _arith_value(node.left, bindings)
        b = _arith_value(node.right, bindings)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0.0:
            raise ZeroDivisionError
        return a / b
    raise RuleEvalError(f"not an arithmetic node: {node!r}")


_CMP = {
    "<": np.less, "<=": np.less_equal, ">": np.greater,
    ">=": np.greater_equal, "==": np.equal, "!=": np.not_equal,
}


def eval_expression(node: Node, bindings) -> bool:
    """Evaluate a boolean expression against a column -> value mapping."""
    if isinstance(node, Bool):
        left = eval_expression(node.left, bindings)
        if node.op == "and":
            return left and eval_expression(node.right, bindings)
        return left or eval_expression(node.right, bindings)
    if isinstance(node, Not):
        return not eval_expression(node.operand, bindings)
    if isinstance(node, Cmp):
        try:
            a = _arith_value(node.left, bindings)
            b = _arith_value(node.right, bindings)
        except ZeroDivisionError:
            return False
        return bool(_CMP[node.op](a, b))
    raise RuleEvalError(f"not a boolean node: {node!r}")


# ---------------------------------------------------------------- printer

_LEVEL = {"or": 1, "and": 2, "not": 3, "cmp": 4, "+": 5, "-": 5, "*": 6, "/": 6,
          "neg": 7, "atom": 8}


def _num_text(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _render(node: Node) -> tuple[str, int]:
    if isinstance(node, Num):
        return _num_text(node.value), _LEVEL["atom"]
    if isinstance(node, Var):
        return node.name, _LEVEL["atom"]
    if isinstance(node, Neg):
        text, level = _render(node.operand)
        if level < _LEVEL["neg"]:
            text = f"({text})"
        return f"-{text}", _LEVEL["neg"]
    if isinstance(node, Not):
        text, level = _render(node.operand)
        if level < _LEVEL["not"]:
            text = f"({text})"
        return f"not {text}", _LEVEL["not"]
    if isinstance(node, Arith):
        mine = _LEVEL[node.op]
        lt, ll = _render(node.left)
        rt, rl = _render(node.right)
        if ll < mine:
            lt = f"({lt})"
        if rl <= mine:  # parenthesize to preserve right-nesting
            rt = f"({rt})"
        return f"{lt} {node.op} {rt}", mine
    if isinstance(node, Cmp):
        lt, _ = _render(node.left)
        rt, _ = _render(node.right)
        return f"{lt} {node.op} {rt}", _LEVEL["cmp"]
    if isinstance(node, Bool):
        mine = _LEVEL[node.op]
        lt, ll = _render(node.left)
        rt, rl = _render(node.right)
        if ll < mine:
            lt = f"({lt})"
        if rl <= mine:  # keep right-nesting explicit
            rt = f"({rt})"
        return f"{lt} {node.op} {rt}", mine
    raise RuleEvalError(f"cannot render {node!r}")


def to_string(node: Node) -> str:
    return _render(node)[0]


# ---------------------------------------------------------------- rules

@dataclass
class Rule:
    name: str
    expression: str
    coverage: float = 0.0
    explanation: str = ""
    source: str = "user"  # user | statistical | llm
    ast: Node | None = field(default=None, compare=False, repr=False)

    def parsed(self) -> Node:
        if self.ast is None:
            object.__setattr__(self, "ast", parse_expression(self.expression))
        return self.ast

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "expression": self.expression,
            "coverage": self.coverage,
            "explanation": self.explanation,
            "source": self.source,
        }


@dataclass
class ComplianceResult:
    score: float
    satisfied: list[str]
    violated: list[str]


def rule_coverage(rule: Rule, rows: list[dict]) -> float:
    if not rows:
        return 0.0
    ast = rule.parsed()
    hits = sum(1 for row in rows if eval_expression(ast, row))
    return hits / len(rows)


def validate_rules(rules: list[Rule], rows: list[dict],
                   min_coverage: float = 0.5) -> tuple[list[Rule], list[dict]]:
    """Drop rules that do not parse, reference unknown columns, or hold on
    less than min_coverage of the given rows. Coverage is recomputed here;
    whatever the provider claimed is ignored.
    """
    known = set(rows[0].keys()) if rows else set()
    kept, rejected = [], []
    for rule in rules:
        try:
            ast = rule.parsed()
        except RuleSyntaxError as exc:
            rejected.append({"name": rule.name, "reason": f"syntax error: {exc}"})
            continue
        unbound = variables(ast) - known
        if unbound:
            rejected.append({
                "name": rule.name,
                "reason": f"unknown column(s): {sorted(unbound)}",
            })
            continue
        cov = rule_coverage(rule, rows)
        if cov < min_coverage:
            rejected.append({
                "name": rule.name,
                "reason": f"coverage {cov:.3f} below {min_coverage}",
            })
            continue
        rule.coverage = cov
        kept.append(rule)
    return kept, rejected


def score_compliance(rules: list[Rule], bindings) -> ComplianceResult:
    """Fraction of rules a row satisfies; an empty ruleset scores 1.0."""
    if not rules:
        return ComplianceResult(1.0, [], [])
    satisfied, violated = [], []
    for rule in rules:
        (satisfied if eval_expression(rule.parsed(), bindings) else violated).append(rule.name)
    return ComplianceResult(len(satisfied) / len(rules), satisfied, violated)


# ------------------------------------------------- statistical provider

def extract_rules_statistical(raw: np.ndarray, names: list[str],
                              order_threshold: float = 0.95) -> list[Rule]:
    """Mine rules from observed rows: a central 95% band per column, plus
    an ordering rule for each column pair whose relation a <= b holds on at
    least order_threshold of rows.
    """
    raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
    n = raw.shape[0]
    if n == 0:
        return []
    out = []
    for j, name in enumerate(names):
        lo, hi = np.percentile(raw[:, j], [2.5, 97.5])
        expr = f"{name} >= {_num_text(float(lo))} and {name} <= {_num_text(float(hi))}"
        inside = float(np.mean((raw[:, j] >= lo) & (raw[:, j] <= hi)))
        out.append(Rule(
            name=f"range_{name}", expression=expr, coverage=inside,
            explanation=f"{name} stays within its observed central 95% band",
            source="statistical"))
    for i in range(len(names)):
        for j in range(len(names)):
            if i == j:
                continue
            frac = float(np.mean(raw[:, i] <= raw[:, j]))
            if frac >= order_threshold:
                a, b = names[i], names[j]
                out.append(Rule(
                    name=f"order_{a}_{b}", expression=f"{a} <= {b}", coverage=frac,
                    explanation=f"{a} does not exceed {b} in observed runs",
                    source="statistical"))
    return out


# ---------------------------------------------------- remote provider

_PROVIDER_LOCK = threading.Lock()

_PROMPT = """You are given summary statistics of a tabular dataset of system
performance runs. Propose at most 8 plausibility rules as boolean
expressions over the column names, using only comparison operators
(< <= > >= == !=), arithmetic (+ - * /), and the keywords and/or/not.

Columns:
{columns}

Reply with a JSON array only. Each item: {{"name": str, "expression": str,
"explanation": str}}."""


def extract_rules_llm(url: str, raw: np.ndarray, names: list[str],
                      api_key: str = "", model: str = "default",
                      timeout: float = 30.0, client=None) -> list[Rule]:
    """Ask a chat-completion style endpoint for candidate rules.

    Holds a process-wide lock so only one request is in flight. Raises
    RuleProviderError on any transport or format problem; callers fall back
    to the statistical extractor. A preconfigured httpx client can be
    passed in (used by tests to stub the transport).
    """
    import httpx

    raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
    lines = []
    for j, name in enumerate(names):
        col = raw[:, j]
        lines.append(f"- {name}: min={col.min():.4g} median={np.median(col):.4g} "
                     f"max={col.max():.4g}")
    payload = {
        "model": model,
        "messages": [{"role": "user",
                      "content": _PROMPT.format(columns="\n".join(lines))}],
    }
    headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
    with _PROVIDER_LOCK:
        try:
            own = client is None
            http = client or httpx.Client(timeout=timeout)
            try:
                resp = http.post(url, json=payload, headers=headers)
                resp.raise_for_status()
                body = resp.json()
            finally:
                if own:
                    http.close()
        except RuleProviderError:
            raise
        except Exception as exc:
            raise RuleProviderError(f"rule provider unreachable: {exc}") from exc
    try:
        content = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise RuleProviderError("rule provider reply missing choices[0].message.content") from None
    m = re.search(r"\[.*\]", content, re.DOTALL)
    if m is None:
        raise RuleProviderError("no JSON array in rule provider reply")
    try:
        items = json.loads(m.group(0))
    except json.JSONDecodeError as exc:
        raise RuleProviderError(f"malformed JSON from rule provider: {exc}") from exc
    if not isinstance(items, list):
        raise RuleProviderError("rule provider reply is not a list")
    out = []
    for k, item in enumerate(items):
        if not isinstance(item, dict) or "expression" not in item:
            continue
        out.append(Rule(
            name=str(item.get("name") or f"llm_rule_{k}"),
            expression=str(item["expression"]),
            explanation=str(item.get("explanation", "")),
            source="llm"))
    return out
