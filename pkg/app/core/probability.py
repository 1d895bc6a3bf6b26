import re
from decimal import Decimal, ROUND_HALF_UP
from fractions import Fraction

from app.core.errors import InvalidProbabilityError

_DECIMAL_RE = re.compile(r"^(0|1|0?\.\d+|[01]\.\d+)$")


def parse_probability(text: str) -> Fraction:
    """Converte uma string decimal (ex: "0.625") em fração exata com denominador 10^k"""
    value = text.strip()
    if not _DECIMAL_RE.match(value):
        raise InvalidProbabilityError(f"probability must be a plain decimal in [0, 1], got {text!r}")
    fraction = Fraction(Decimal(value))
    if fraction > 1:
        raise InvalidProbabilityError(f"probability {text!r} exceeds 1")
    return fraction


def format_probability(p: Fraction, places: int = 8) -> str:
    """Decimal string for p; exact when the denominator divides 10^places"""
    quantum = Decimal(1).scaleb(-places)
    decimal = (Decimal(p.numerator) / Decimal(p.denominator)).quantize(quantum, rounding=ROUND_HALF_UP)
    return format(decimal.normalize(), "f")


def round_probability(value: float, places: int) -> str:
    quantum = Decimal(1).scaleb(-places)
    decimal = Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP)
    if decimal > 1:
        decimal = Decimal(1).quantize(quantum)
    return format(decimal, "f")


class ScaledThresholds:
    """Integer forms of the peeling thresholds for p = a/b and host degree d.

    A degree x is compared against f·pd by comparing 5·b·x with 5·f·a·d, so no
    threshold ever goes through floating point.
    """

    def __init__(self, p: Fraction, d: int):
        self.p = p
        self.d = d
        self.scale = 5 * p.denominator
        self.pd5 = p.numerator * d

    def scaled(self, x):
        return self.scale * x

    def below_window(self, x):
        # deg < 4pd/5
        return self.scaled(x) < 4 * self.pd5

    def above_window(self, x):
        # deg > 6pd/5
        return self.scaled(x) > 6 * self.pd5

    def below_core(self, x):
        # deg < 3pd/5
        return self.scaled(x) < 3 * self.pd5

    def at_least_fifth(self, x):
        # x >= pd/5
        return self.scaled(x) >= self.pd5

    @property
    def pd(self) -> Fraction:
        return self.p * self.d

    def _ceil(self, factor: int) -> int:
        return -(-factor * self.pd5 // self.scale)

    @property
    def min_window_degree(self) -> int:
        """Smallest degree inside [4pd/5, 6pd/5]"""
        return self._ceil(4)

    @property
    def max_window_degree(self) -> int:
        return 6 * self.pd5 // self.scale

    @property
    def min_core_degree(self) -> int:
        """Smallest degree that is not below 3pd/5"""
        return self._ceil(3)

    @property
    def min_edges_into_removed(self) -> int:
        return self._ceil(1)
