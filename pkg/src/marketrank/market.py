"""Market specification files.

A market file is UTF-8 text with one statement per line; ``#`` starts a
comment.  Statements::

    m = 2                     driver dimension (required, before any W[k])
    T = 3                     number of steps (required)
    dt = 0.5                  step length (default 1)
    probs = 0.5, 0.25, 0.25   branch probabilities used at every node
    const a = 0.5             named constant, may use earlier constants
    set F = t == 0            named predictable set (0/1 indicator)
    asset X = [ind(F), 0]     one or more integrand rows: [..], [..]

Expressions use Python syntax restricted to numbers, ``+ - * / **``,
comparisons and ``and``/``or``/``not`` (all yielding 0/1), parentheses, the
functions ``ind abs min max sqrt exp``, and the identifiers ``t``, ``W[k]``
(driver component k = 1..m at the current node), ``m``, ``T``, ``dt`` and
anything defined on an earlier line.  Only the current node is visible, so
every integrand is predictable by construction.
"""
from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, SpecError, SpecSyntaxError, UnknownIdentifier
from .process import IntegrandField
from .tree import FilteredTree, PredictableSet, build_tree

FUNCTIONS = {
    "ind": lambda x: (np.asarray(x) != 0).astype(np.float64),
    "abs": np.abs,
    "min": np.minimum,
    "max": np.maximum,
    "sqrt": np.sqrt,
    "exp": np.exp,
}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}
_CMPOPS = {
    ast.Eq: np.equal,
    ast.NotEq: np.not_equal,
    ast.Lt: np.less,
    ast.LtE: np.less_equal,
    ast.Gt: np.greater,
    ast.GtE: np.greater_equal,
}
_HEADER = ("m", "T", "dt")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_STATEMENT = re.compile(r"\s*(?:(const|set|asset)\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*=")


@dataclass(frozen=True)
class Expr:
    """A validated expression; equality is on the normalised source text."""

    text: str
    node: ast.AST = field(compare=False, repr=False)

    def evaluate(self, env) -> np.ndarray:
        return _eval(self.node, env)


@dataclass(frozen=True)
class Asset:
    name: str
    rows: tuple


@dataclass(frozen=True)
class MarketSpec:
    m: int
    T: int
    dt: float = 1.0
    probs: tuple | None = None
    constants: tuple = ()
    sets: tuple = ()
    assets: tuple = ()

    @property
    def asset_names(self) -> list[str]:
        names = []
        for asset in self.assets:
            if len(asset.rows) == 1:
                names.append(asset.name)
            else:
                names.extend(f"{asset.name}[{i + 1}]" for i in range(len(asset.rows)))
        return names


class _Scope:
    def __init__(self):
        self.m = None
        self.scalars = {}
        self.sets = set()

    def known(self, name):
        return name == "t" or name in self.scalars or name in self.sets


def _check_node(node, scope: _Scope, line, col0, state_ok=True):
    """Reject anything outside the expression whitelist."""

    def fail(cls, msg, at):
        raise cls(msg, line, col0 + getattr(at, "col_offset", 0) + 1)

    def visit(n):
        if isinstance(n, ast.Expression):
            return visit(n.body)
        if isinstance(n, ast.Constant):
            if isinstance(n.value, bool) or not isinstance(n.value, (int, float)):
                fail(SpecSyntaxError, f"unsupported literal {n.value!r}", n)
            return
        if isinstance(n, ast.BinOp):
            if type(n.op) not in _BINOPS:
                fail(SpecSyntaxError, f"unsupported operator {type(n.op).__name__}", n)
            visit(n.left)
            visit(n.right)
            return
        if isinstance(n, ast.UnaryOp):
            if not isinstance(n.op, (ast.USub, ast.UAdd, ast.Not)):
                fail(SpecSyntaxError, f"unsupported operator {type(n.op).__name__}", n)
            visit(n.operand)
            return
        if isinstance(n, ast.BoolOp):
            for v in n.values:
                visit(v)
            return
        if isinstance(n, ast.Compare):
            for op in n.ops:
                if type(op) not in _CMPOPS:
                    fail(SpecSyntaxError, f"unsupported comparison {type(op).__name__}", n)
            visit(n.left)
            for c in n.comparators:
                visit(c)
            return
        if isinstance(n, ast.Call):
            if not isinstance(n.func, ast.Name) or n.func.id not in FUNCTIONS or n.keywords:
                fail(UnknownIdentifier, f"unknown function {ast.unparse(n.func)!r}", n)
            expected = {"min": 2, "max": 2}.get(n.func.id, 1)
            if len(n.args) != expected:
                fail(SpecSyntaxError, f"{n.func.id}() takes {expected} argument(s)", n)
            for a in n.args:
                visit(a)
            return
        if isinstance(n, ast.Subscript):
            if not (isinstance(n.value, ast.Name) and n.value.id == "W"):
                fail(SpecSyntaxError, "only W[k] may be indexed", n)
            idx = n.slice
            if not (isinstance(idx, ast.Constant) and isinstance(idx.value, int) and not isinstance(idx.value, bool)):
                fail(SpecSyntaxError, "driver index must be an integer literal", n)
            if not state_ok:
                fail(UnknownIdentifier, "constants cannot depend on W", n)
            if scope.m is None:
                fail(SpecSyntaxError, "declare m before using W[k]", n)
            if not 1 <= idx.value <= scope.m:
                fail(UnknownIdentifier, f"W[{idx.value}] is outside W[1]..W[{scope.m}]", n)
            return
        if isinstance(n, ast.Name):
            if n.id == "t" and not state_ok:
                fail(UnknownIdentifier, "constants cannot depend on t", n)
            if n.id in scope.sets and not state_ok:
                fail(UnknownIdentifier, f"constants cannot depend on set {n.id!r}", n)
            if not scope.known(n.id):
                fail(UnknownIdentifier, f"unknown identifier {n.id!r}", n)
            return
        fail(SpecSyntaxError, f"unsupported syntax {type(n).__name__}", n)

    visit(node)


def _parse_ast(text, line, col0):
    try:
        return ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise SpecSyntaxError(f"invalid expression: {exc.msg}", line, col0 + (exc.offset or 1)) from None


def _expr(node, scope, line, col0, state_ok=True) -> Expr:
    _check_node(node, scope, line, col0, state_ok)
    body = node.body if isinstance(node, ast.Expression) else node
    return Expr(ast.unparse(body), ast.Expression(body))


def _eval(node, env):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant):
        return np.float64(node.value)
    if isinstance(node, ast.BinOp):
        with np.errstate(divide="ignore", invalid="ignore"):
            return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, env)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.Not):
            return (np.asarray(v) == 0).astype(np.float64)
        return v
    if isinstance(node, ast.BoolOp):
        vals = [np.asarray(_eval(v, env)) != 0 for v in node.values]
        reduce = np.logical_and if isinstance(node.op, ast.And) else np.logical_or
        out = vals[0]
        for v in vals[1:]:
            out = reduce(out, v)
        return out.astype(np.float64)
    if isinstance(node, ast.Compare):
        out = True
        left = _eval(node.left, env)
        for op, comp in zip(node.ops, node.comparators):
            right = _eval(comp, env)
            out = np.logical_and(out, _CMPOPS[type(op)](left, right))
            left = right
        return np.asarray(out, dtype=np.float64)
    if isinstance(node, ast.Call):
        return FUNCTIONS[node.func.id](*[_eval(a, env) for a in node.args])
    if isinstance(node, ast.Subscript):
        return env["W"][:, node.slice.value - 1]
    if isinstance(node, ast.Name):
        return env[node.id]
    raise SpecSyntaxError(f"cannot evaluate {type(node).__name__}")


def _number(text, line, col):
    try:
        return float(text)
    except ValueError:
        raise SpecSyntaxError(f"expected a number, got {text.strip()!r}", line, col) from None


def parse_market(text: str) -> MarketSpec:
    """Parse and validate a market file."""
    scope = _Scope()
    header = {}
    probs = None
    constants, sets, assets = [], [], []
    names_used = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        match = _STATEMENT.match(body)
        if not match:
            col = len(body) - len(body.lstrip()) + 1
            raise SpecSyntaxError("expected 'name = value' or a const/set/asset statement", lineno, col)
        kind, name = match.group(1), match.group(2)
        value = body[match.end():]
        vcol = match.end() + (len(value) - len(value.lstrip()))
        name_col = match.start(2) + 1

        if kind is None:
            if name in _HEADER:
                if name in header:
                    raise SpecSyntaxError(f"{name} declared twice", lineno, name_col)
                if name == "dt":
                    header[name] = _number(value, lineno, vcol + 1)
                    if not header[name] > 0:
                        raise ShapeError("dt must be positive", lineno, vcol + 1)
                else:
                    v = _number(value, lineno, vcol + 1)
                    if v != int(v) or v < 1:
                        raise ShapeError(f"{name} must be a positive integer", lineno, vcol + 1)
                    header[name] = int(v)
                    if name == "m":
                        scope.m = int(v)
                scope.scalars[name] = float(header[name])
                continue
            if name == "probs":
                probs = tuple(_number(p, lineno, vcol + 1) for p in value.split(","))
                continue
            raise SpecSyntaxError(f"unknown setting {name!r}", lineno, name_col)

        if name in names_used or name in _HEADER or name in ("t", "W", "probs") or name in FUNCTIONS:
            raise SpecSyntaxError(f"name {name!r} is reserved or already defined", lineno, name_col)
        node = _parse_ast(value, lineno, vcol)

        if kind == "const":
            expr = _expr(node, scope, lineno, vcol, state_ok=False)
            val = float(expr.evaluate(dict(scope.scalars)))
            scope.scalars[name] = val
            constants.append((name, expr))
        elif kind == "set":
            expr = _expr(node, scope, lineno, vcol)
            scope.sets.add(name)
            sets.append((name, expr))
        else:
            if scope.m is None:
                raise SpecSyntaxError("declare m before any asset", lineno, name_col)
            rows_node = node.body
            row_nodes = rows_node.elts if isinstance(rows_node, ast.Tuple) else [rows_node]
            rows = []
            for r in row_nodes:
                if not isinstance(r, ast.List):
                    raise ShapeError("asset rows must be bracketed lists like [a, b]", lineno, vcol + r.col_offset + 1)
                if len(r.elts) != scope.m:
                    raise ShapeError(
                        f"row has {len(r.elts)} entries but m = {scope.m}", lineno, vcol + r.col_offset + 1
                    )
                rows.append(tuple(_expr(e, scope, lineno, vcol) for e in r.elts))
            assets.append(Asset(name, tuple(rows)))
        names_used.add(name)

    for key in ("m", "T"):
        if key not in header:
            raise SpecSyntaxError(f"missing required setting {key}")
    if not assets:
        raise ShapeError("market defines no assets")
    if probs is not None and len(probs) != header["m"] + 1:
        raise ShapeError(f"probs needs {header['m'] + 1} entries, got {len(probs)}")
    return MarketSpec(
        header["m"], header["T"], header.get("dt", 1.0), probs, tuple(constants), tuple(sets), tuple(assets)
    )


def print_market(spec: MarketSpec) -> str:
    """Render a spec back to the file format."""
    out = [f"m = {spec.m}", f"T = {spec.T}", f"dt = {spec.dt!r}"]
    if spec.probs is not None:
        out.append("probs = " + ", ".join(repr(p) for p in spec.probs))
    out += [f"const {name} = {expr.text}" for name, expr in spec.constants]
    out += [f"set {name} = {expr.text}" for name, expr in spec.sets]
    for asset in spec.assets:
        rows = ", ".join("[" + ", ".join(e.text for e in row) + "]" for row in asset.rows)
        out.append(f"asset {asset.name} = {rows}")
    return "\n".join(out) + "\n"


def parse_expression(text: str, spec: MarketSpec) -> Expr:
    """Validate a free-standing expression (e.g. a claim) against a spec."""
    scope = _Scope()
    scope.m = spec.m
    scope.scalars.update(_base_scalars(spec))
    scope.sets.update(name for name, _ in spec.sets)
    return _expr(_parse_ast(text, None, 0), scope, None, 0)


def _base_scalars(spec):
    env = {"m": float(spec.m), "T": float(spec.T), "dt": float(spec.dt)}
    for name, expr in spec.constants:
        env[name] = float(expr.evaluate(env))
    return env


def _environment(spec, times, W):
    env = _base_scalars(spec)
    env["t"] = np.asarray(times, dtype=np.float64)
    env["W"] = W
    for name, expr in spec.sets:
        env[name] = np.broadcast_to(np.asarray(expr.evaluate(env), dtype=np.float64), env["t"].shape)
        env[name] = (env[name] != 0).astype(np.float64)
    return env


@dataclass(frozen=True, eq=False)
class Market:
    spec: MarketSpec
    tree: FilteredTree
    theta: IntegrandField
    sets: dict

    @property
    def asset_names(self):
        return self.spec.asset_names


def build_market(spec: MarketSpec, tree: FilteredTree | None = None) -> Market:
    """Evaluate a spec on its tree."""
    if tree is None:
        try:
            tree = build_tree(spec.m, spec.T, spec.dt, spec.probs)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
    C = tree.n_cells
    env = _environment(spec, tree.cell_times, tree.W[:C])
    rows = []
    for asset in spec.assets:
        for row in asset.rows:
            rows.append([np.broadcast_to(e.evaluate(env), (C,)) for e in row])
    theta = np.array(rows, dtype=np.float64).transpose(2, 0, 1)
    if not np.all(np.isfinite(theta)):
        raise SpecError("integrand evaluates to a non-finite value")
    sets = {name: PredictableSet(tree, env[name] != 0) for name, _ in spec.sets}
    return Market(spec, tree, IntegrandField(tree, theta), sets)


def evaluate_claim(expr: Expr, spec: MarketSpec, tree: FilteredTree) -> np.ndarray:
    """Claim values at the terminal nodes (t = T)."""
    term = tree.terminal
    W = tree.W[term]
    env = _environment(spec, np.full(W.shape[0], float(tree.T)), W)
    values = np.broadcast_to(np.asarray(expr.evaluate(env), dtype=np.float64), (W.shape[0],))
    if not np.all(np.isfinite(values)):
        raise SpecError("claim evaluates to a non-finite value")
    return np.array(values)


def load_market(path) -> Market:
    with open(path, encoding="utf-8") as fh:
        return build_market(parse_market(fh.read()))
