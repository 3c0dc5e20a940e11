"""Named coefficient triples used in examples and tests."""

import math

from .apfun import CoefficientTriple, FrequencyBase, TrigPolynomial

SQRT2 = math.sqrt(2.0)


def free(lam_weight: float = 1.0) -> CoefficientTriple:
    """``p = 1, q = 0, w = lam_weight`` on the base ``{1}``."""
    b = FrequencyBase((1.0,), ("1",))
    return CoefficientTriple.certified(TrigPolynomial.const(b, 1.0), TrigPolynomial.const(b, 0.0),
                                       TrigPolynomial.const(b, lam_weight))


def periodic_example() -> CoefficientTriple:
    """``p = 1/(sin x + 2)``, ``q = 2 cos x``, ``w = 2 - cos x``; all 2pi-periodic."""
    b = FrequencyBase((1.0,), ("1",))
    return CoefficientTriple.certified(
        TrigPolynomial(b, 2.0, (((1,), 0.0, 1.0),)),
        TrigPolynomial(b, 0.0, (((1,), 2.0, 0.0),)),
        TrigPolynomial(b, 2.0, (((1,), -1.0, 0.0),)),
    )


def quasiperiodic_example() -> CoefficientTriple:
    """As :func:`periodic_example` but with ``q = 2 cos(sqrt(2) x)``."""
    b = FrequencyBase((1.0, SQRT2), ("1", "sqrt2"))
    return CoefficientTriple.certified(
        TrigPolynomial(b, 2.0, (((1, 0), 0.0, 1.0),)),
        TrigPolynomial(b, 0.0, (((0, 1), 2.0, 0.0),)),
        TrigPolynomial(b, 2.0, (((1, 0), -1.0, 0.0),)),
    )
