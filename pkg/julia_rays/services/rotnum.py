"""Continued-fraction arithmetic for rotation numbers.

theta = [0; a_1, a_2, ...] with convergents p_n/q_n seeded by
p_0 = 0, p_{-1} = 1, q_0 = 1, q_{-1} = 0. Quotients past the explicit prefix
come from a TailRule; a coefficient list without a rule is a prefix of an
unknown expansion, and ``TailRule.end()`` marks an exact rational.
"""

import logging
import math
import re
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

import mpmath

from errors import InvalidInputError, PrecisionUnreachableError
from models.rotation import ClassificationReport, TriState

logger = logging.getLogger(__name__)

# Witness numbers stop once q_n grows past this many bits; keeps every
# reported integer under the interpreter's int-to-str digit limit.
MAX_WITNESS_BITS = 10_000


# ── Tail rules ──────────────────────────────────────────────────────────


class TailKind(str, Enum):
    end = "end"
    const = "const"
    periodic = "periodic"
    poly = "poly"
    q_power = "q_power"  # a[n+1] = q[n]^K
    q_power_n = "q_power_n"  # a[n+1] = q[n]^n
    exp_q = "exp_q"  # a[n+1] = K^q[n]
    exp_n = "exp_n"  # a[n+1] = K^n


_RULE_RE = re.compile(r"^a\[n\+1\]=(?P<expr>.+)$")


@dataclass(frozen=True)
class TailRule:
    kind: TailKind
    params: tuple[int, ...] = ()

    @classmethod
    def end(cls) -> "TailRule":
        return cls(TailKind.end)

    @classmethod
    def constant(cls, value: int) -> "TailRule":
        return cls(TailKind.const, (value,))

    def __post_init__(self):
        if self.kind == TailKind.poly:
            # a_n = 2 + 0n is the constant 2
            params = tuple(self.params)
            while len(params) > 1 and params[-1] == 0:
                params = params[:-1]
            object.__setattr__(self, "params", params)
        k, p = self.kind, self.params
        if k == TailKind.end and p:
            raise InvalidInputError("tail=end takes no parameters")
        if k in (TailKind.const, TailKind.q_power, TailKind.exp_q, TailKind.exp_n) and len(p) != 1:
            raise InvalidInputError(f"tail rule {k.value} takes one parameter")
        if k == TailKind.const and p[0] < 1:
            raise InvalidInputError("constant tail must be >= 1")
        if k == TailKind.periodic and (not p or min(p) < 1):
            raise InvalidInputError("periodic tail needs positive quotients")
        if k == TailKind.poly and (not p or any(c < 0 for c in p) or sum(p) < 1):
            raise InvalidInputError("poly tail needs nonnegative coefficients with a_n >= 1")
        if k == TailKind.q_power and p[0] < 1:
            raise InvalidInputError("q[n]^K needs K >= 1")
        if k in (TailKind.exp_q, TailKind.exp_n) and p[0] < 2:
            raise InvalidInputError("K^q[n] and K^n need K >= 2")

    @property
    def is_finite(self) -> bool:
        return self.kind == TailKind.end

    def quotient(self, n: int, prefix_len: int, q_prev: int) -> int:
        """a_n for n > prefix_len; ``q_prev`` is q_{n-1}."""
        k, p = self.kind, self.params
        if k == TailKind.const:
            return p[0]
        if k == TailKind.periodic:
            return p[(n - prefix_len - 1) % len(p)]
        if k == TailKind.poly:
            return sum(c * n**i for i, c in enumerate(p))
        if k == TailKind.q_power:
            return q_prev ** p[0]
        if k == TailKind.q_power_n:
            return q_prev ** (n - 1)
        if k == TailKind.exp_q:
            return p[0] ** q_prev
        if k == TailKind.exp_n:
            return p[0] ** (n - 1)
        raise PrecisionUnreachableError("terminating expansion has no further quotients")

    @classmethod
    def parse(cls, text: str) -> "TailRule":
        text = text.strip().replace(" ", "")
        try:
            if text == "end":
                return cls.end()
            head, _, body = text.partition(":")
            if head == "const":
                return cls(TailKind.const, (int(body),))
            if head == "periodic":
                return cls(TailKind.periodic, tuple(int(x) for x in body.split(",")))
            if head == "poly":
                return cls(TailKind.poly, tuple(int(x) for x in body.split(",")))
            if head == "rule":
                return cls._parse_rule(body)
        except ValueError as e:
            if isinstance(e, InvalidInputError):
                raise
            raise InvalidInputError(f"Malformed tail rule {text!r}: {e}") from e
        raise InvalidInputError(f"Unknown tail rule {text!r}")

    @classmethod
    def _parse_rule(cls, body: str) -> "TailRule":
        m = _RULE_RE.match(body)
        if not m:
            raise InvalidInputError(f"Rule must read a[n+1]=<expr>, got {body!r}")
        expr = m.group("expr")
        if expr == "q[n]":
            return cls(TailKind.q_power, (1,))
        if expr == "q[n]^n":
            return cls(TailKind.q_power_n)
        if expr.startswith("q[n]^"):
            return cls(TailKind.q_power, (int(expr[len("q[n]^"):]),))
        if expr.endswith("^q[n]"):
            return cls(TailKind.exp_q, (int(expr[: -len("^q[n]")]),))
        if expr.endswith("^n"):
            return cls(TailKind.exp_n, (int(expr[: -len("^n")]),))
        raise InvalidInputError(f"Unsupported recurrence {expr!r}")

    def __str__(self) -> str:
        k, p = self.kind, self.params
        if k == TailKind.end:
            return "end"
        if k in (TailKind.const, TailKind.periodic, TailKind.poly):
            return f"{k.value}:{','.join(str(x) for x in p)}"
        if k == TailKind.q_power:
            return "rule:a[n+1]=q[n]" if p[0] == 1 else f"rule:a[n+1]=q[n]^{p[0]}"
        if k == TailKind.q_power_n:
            return "rule:a[n+1]=q[n]^n"
        if k == TailKind.exp_q:
            return f"rule:a[n+1]={p[0]}^q[n]"
        return f"rule:a[n+1]={p[0]}^n"


# ── Continued fractions ─────────────────────────────────────────────────


@dataclass
class AngleApproximation:
    """A real number known to lie in [value - error_bound, value + error_bound] (mod 1)."""

    value: Fraction
    error_bound: Fraction

    def __post_init__(self):
        if self.error_bound < 0:
            raise InvalidInputError("error_bound must be >= 0")


class ContinuedFraction:
    """theta = [0; a_1, a_2, ...] with a lazily extended convergent cache.

    Readers may call ``convergent`` concurrently; extension of the cache is
    serialized by a lock and only ever appends.
    """

    def __init__(self, coefficients: list[int], tail_rule: Optional[TailRule] = None):
        if not coefficients:
            raise InvalidInputError("need at least one partial quotient")
        for a in coefficients:
            if not isinstance(a, int) or isinstance(a, bool) or a < 1:
                raise InvalidInputError(f"partial quotients must be integers >= 1, got {a!r}")
        self.coefficients: tuple[int, ...] = tuple(coefficients)
        self.tail_rule = tail_rule
        # index n holds (a_n, p_n, q_n); index 0 is the seed (0, 0, 1)
        self._table: list[tuple[int, int, int]] = [(0, 0, 1)]
        self._lock = threading.Lock()

    @property
    def is_rational(self) -> bool:
        return self.tail_rule is not None and self.tail_rule.is_finite

    @property
    def is_unbounded(self) -> bool:
        return self.tail_rule is not None and not self.tail_rule.is_finite

    @property
    def max_depth(self) -> Optional[int]:
        """Deepest available convergent index, None when unbounded."""
        return None if self.is_unbounded else len(self.coefficients)

    def _extend_to(self, n: int) -> None:
        limit = self.max_depth
        if limit is not None and n > limit:
            raise PrecisionUnreachableError(
                f"convergent {n} requested but only {limit} quotients are known"
            )
        with self._lock:
            table = self._table
            while len(table) <= n:
                k = len(table)
                _, p1, q1 = table[k - 1]
                if k >= 2:
                    _, p2, q2 = table[k - 2]
                else:
                    p2, q2 = 1, 0
                if k <= len(self.coefficients):
                    a = self.coefficients[k - 1]
                else:
                    a = self.tail_rule.quotient(k, len(self.coefficients), q1)
                table.append((a, a * p1 + p2, a * q1 + q2))

    def quotient(self, n: int) -> int:
        if n < 1:
            raise InvalidInputError("quotients are indexed from 1")
        self._extend_to(n)
        return self._table[n][0]

    def convergent(self, n: int) -> tuple[int, int]:
        """(p_n, q_n); n = 0 gives the seed (0, 1)."""
        if n < 0:
            raise InvalidInputError("convergents are indexed from 0")
        self._extend_to(n)
        _, p, q = self._table[n]
        return p, q

    def convergents(self, n: int) -> list[tuple[int, int]]:
        return [self.convergent(k) for k in range(1, n + 1)]

    def bracket(self, n: int) -> tuple[Fraction, Fraction]:
        """Closed interval containing theta from the convergents n and n+1."""
        if self.is_rational and n >= len(self.coefficients):
            exact = Fraction(*self.convergent(len(self.coefficients)))
            return exact, exact
        p1, q1 = self.convergent(n)
        p2, q2 = self.convergent(n + 1)
        a, b = Fraction(p1, q1), Fraction(p2, q2)
        return (a, b) if a <= b else (b, a)

    def theta_float(self) -> float:
        """Float value of theta from the first convergent with q_n^2 >= 2^60."""
        n, limit = 1, self.max_depth
        while True:
            p, q = self.convergent(n)
            if q * q >= 2**60 or n == limit:
                return p / q
            n += 1

    def quotient_bits(self, n: int) -> int:
        """Bit length of a_n, estimated from the tail rule without building it."""
        if n < len(self._table):
            return self._table[n][0].bit_length()
        if n <= len(self.coefficients):
            return self.coefficients[n - 1].bit_length()
        rule = self.tail_rule
        if rule is None or rule.is_finite:
            return 0
        q_prev = self.convergent(n - 1)[1]
        if rule.kind == TailKind.q_power:
            return rule.params[0] * q_prev.bit_length()
        if rule.kind == TailKind.q_power_n:
            return (n - 1) * q_prev.bit_length()
        if rule.kind == TailKind.exp_q:
            return q_prev * rule.params[0].bit_length()
        if rule.kind == TailKind.exp_n:
            return (n - 1) * rule.params[0].bit_length()
        return self.quotient(n).bit_length()

    def spec(self) -> str:
        head = ",".join(str(a) for a in self.coefficients)
        return head if self.tail_rule is None else f"{head};tail={self.tail_rule}"

    def __repr__(self) -> str:
        return f"ContinuedFraction({self.spec()!r})"


def cf_from_coeffs(coeffs: list[int], tail_rule: Optional[TailRule] = None) -> ContinuedFraction:
    return ContinuedFraction(list(coeffs), tail_rule)


def parse_cf(text: str) -> ContinuedFraction:
    """Parse ``1,1,1;tail=const:1`` style specs."""
    head, _, tail = text.strip().partition(";")
    try:
        coeffs = [int(x) for x in head.split(",") if x.strip()]
    except ValueError as e:
        raise InvalidInputError(f"Malformed quotients in {text!r}") from e
    rule = None
    if tail:
        key, _, value = tail.partition("=")
        if key.strip() != "tail":
            raise InvalidInputError(f"Expected ';tail=...' in {text!r}")
        rule = TailRule.parse(value)
    return cf_from_coeffs(coeffs, rule)


def golden_mean() -> ContinuedFraction:
    return cf_from_coeffs([1], TailRule.constant(1))


# ── Values and sums ─────────────────────────────────────────────────────


def cf_value(cf: ContinuedFraction, eps: Fraction) -> AngleApproximation:
    """The first convergent p_n/q_n whose bound 1/(q_n q_{n+1}) is <= eps."""
    eps = Fraction(eps)
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    if cf.is_rational:
        n = len(cf.coefficients)
        return AngleApproximation(Fraction(*cf.convergent(n)), Fraction(0))
    n = 1
    while True:
        limit = cf.max_depth
        if limit is not None and n + 1 > limit:
            raise PrecisionUnreachableError(
                f"prefix of {limit} quotients cannot certify eps={eps}"
            )
        p, q = cf.convergent(n)
        _, q_next = cf.convergent(n + 1)
        bound = Fraction(1, q * q_next)
        if bound <= eps:
            return AngleApproximation(Fraction(p, q), bound)
        n += 1


def _log_ratio_term(q_next: int, q: int) -> float:
    # mpmath keeps log(q)/q finite for q far beyond float range
    return float(mpmath.log(q_next) / mpmath.mpf(q))


def brjuno_partial_sum(cf: ContinuedFraction, N: int) -> float:
    """Sum_{n=1}^{N} log(q_{n+1}) / q_n."""
    if N < 0:
        raise InvalidInputError("N must be >= 0")
    total = 0.0
    for n in range(1, N + 1):
        _, q = cf.convergent(n)
        _, q_next = cf.convergent(n + 1)
        total += _log_ratio_term(q_next, q)
    return total


# ── Classification ──────────────────────────────────────────────────────


@dataclass
class _Witness:
    depth: int = 0
    sup_a: int = 0
    sup_log_ratio: float = 0.0
    partial_sum: float = 0.0
    last_term: float = 0.0
    notes: list[str] = field(default_factory=list)


def _measure(cf: ContinuedFraction, depth: int) -> _Witness:
    """Numbers computed from the first convergents, stopping at huge q_n."""
    w = _Witness()
    for n in range(1, depth + 1):
        try:
            if cf.quotient_bits(n + 1) > MAX_WITNESS_BITS:
                w.notes.append(f"stopped at n={n}: a_{n + 1} exceeds {MAX_WITNESS_BITS} bits")
                break
            _, q = cf.convergent(n)
            _, q_next = cf.convergent(n + 1)
        except PrecisionUnreachableError:
            break
        if q_next.bit_length() > MAX_WITNESS_BITS:
            w.notes.append(f"stopped at n={n}: q_{n + 1} exceeds {MAX_WITNESS_BITS} bits")
            break
        w.depth = n
        w.sup_a = max(w.sup_a, cf.quotient(n))
        if q > 1:
            w.sup_log_ratio = max(w.sup_log_ratio, math.log(q_next) / math.log(q))
        w.last_term = _log_ratio_term(q_next, q)
        w.partial_sum += w.last_term
    return w


def _int_text(n: int) -> str:
    return str(n) if n.bit_length() <= 64 else f"<{n.bit_length()}-bit integer>"


def classify(cf: ContinuedFraction, depth: int) -> ClassificationReport:
    """Decide constant type, Diophantine and Brjuno from the form of the tail rule."""
    if depth < 2:
        raise InvalidInputError("depth must be >= 2")
    w = _measure(cf, depth)
    numbers = (
        f"sup a_n={_int_text(w.sup_a)}, sup log q_(n+1)/log q_n={w.sup_log_ratio:.6g}, "
        f"partial sum={w.partial_sum:.12g} (n <= {w.depth})"
    )
    T, F, U = TriState.true, TriState.false, TriState.unknown
    rule = cf.tail_rule

    if rule is None:
        ct = d = b = U
        reason = "finite prefix without tail rule: class membership is a tail property"
    elif rule.kind == TailKind.end:
        ct = d = b = F
        reason = "terminating expansion: theta is rational"
    elif rule.kind in (TailKind.const, TailKind.periodic):
        bound = max(max(cf.coefficients), max(rule.params))
        ct = d = b = T
        reason = f"bounded quotients, sup a_n = {bound}"
    elif rule.kind == TailKind.poly and len(rule.params) == 1:
        ct = d = b = T
        reason = f"bounded quotients, sup a_n = {max(max(cf.coefficients), rule.params[0])}"
    elif rule.kind in (TailKind.poly, TailKind.exp_n):
        ct, d, b = F, T, T
        reason = (
            "a_n unbounded but log a_n = o(log q_n), so log q_(n+1)/log q_n -> 1; "
            "q_n grows at least geometrically so the Brjuno series converges"
        )
    elif rule.kind == TailKind.q_power:
        k = rule.params[0]
        ct, d, b = F, T, T
        reason = (
            f"q_(n+1) ~ q_n^{k + 1}: log q_(n+1)/log q_n -> {k + 1} (bounded); "
            f"terms ~ {k + 1} log q_n / q_n with q_n superexponential, series converges"
        )
    elif rule.kind == TailKind.q_power_n:
        ct, d, b = F, F, T
        reason = (
            "q_(n+1) ~ q_n^(n+1): log q_(n+1)/log q_n ~ n+1 unbounded; "
            "terms ~ (n+1) log q_n / q_n with q_n superexponential, series converges"
        )
    else:  # exp_q
        k = rule.params[0]
        ct, d, b = F, F, F
        reason = (
            f"log q_(n+1) >= q_n log {k}: every term is >= log {k} > 0, series diverges"
        )

    witness = f"{reason}; {numbers}"
    if w.notes:
        witness += "; " + "; ".join(w.notes)
    return ClassificationReport(
        constant_type=ct,
        diophantine=d,
        brjuno=b,
        witness=witness,
        depth_used=w.depth,
        sup_quotient=w.sup_a,
        sup_log_ratio=w.sup_log_ratio,
        partial_sum=w.partial_sum,
    )


# ── Critical angle ──────────────────────────────────────────────────────


def series_tail_bound(Q: int) -> Fraction:
    """Sum_{q>Q} q 2^-(q+1) = (Q+2) 2^-(Q+1)."""
    return Fraction(Q + 2, 2 ** (Q + 1))


def _floor_q_theta(cf: ContinuedFraction, q: int, state: dict) -> int:
    """floor(q*theta) from a convergent bracket, deepened until it is unambiguous."""
    while True:
        lo, hi = state["bracket"]
        k = math.floor(q * lo)
        if lo == hi or k + 1 >= q * hi:
            return k
        state["n"] += 1
        state["bracket"] = cf.bracket(state["n"])


def critical_angle_partial(cf: ContinuedFraction, Q: int) -> Fraction:
    """Sum over pairs (p, q), 1 <= q <= Q, 1 <= p < q*theta, of 2^-(q+1)."""
    state = {"n": 1, "bracket": cf.bracket(1)}
    total = Fraction(0)
    for q in range(1, Q + 1):
        total += Fraction(_floor_q_theta(cf, q, state), 2 ** (q + 1))
    return total


def critical_angle(cf: ContinuedFraction, err: Fraction) -> AngleApproximation:
    """The angle t of the candidate ray pair landing at the critical point.

    Counts every pair (p, q), reduced or not, so each q contributes
    floor(q*theta) 2^-(q+1). The value is an exact dyadic rational.
    """
    err = Fraction(err)
    if err <= 0:
        raise InvalidInputError("err must be positive")
    if cf.tail_rule is None:
        raise InvalidInputError("critical_angle needs a tail rule; a bare prefix does not fix theta")
    if cf.is_rational:
        raise InvalidInputError("critical_angle needs an irrational rotation number")
    Q = 1
    while series_tail_bound(Q) > err:
        Q += 1
    value = critical_angle_partial(cf, Q)
    logger.debug(f"critical angle truncated at Q={Q} for {cf.spec()}")
    return AngleApproximation(value, series_tail_bound(Q))
