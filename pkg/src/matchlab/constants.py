"""Reference constants at 50+ significant digits, checked against float evaluations."""

import math

import mpmath

ONE_MINUS_INV_E = "0.6321205588285576784044762298385391325541888689682322"
ONE_MINUS_TWO_INV_E = "0.2642411176571153568089524596770782651083777379364643"
INV_E = "0.3678794411714423215955237701614608674458111310317678"
HALF_MINUS_HALF_INV_E = "0.3160602794142788392022381149192695662770944344841161"

_FLOAT_FORMS = {
    ONE_MINUS_INV_E: lambda: 1 - math.exp(-1),
    ONE_MINUS_TWO_INV_E: lambda: 1 - 2 * math.exp(-1),
    INV_E: lambda: math.exp(-1),
    HALF_MINUS_HALF_INV_E: lambda: 0.5 - 0.5 * math.exp(-1),
}


def mp(value: str) -> mpmath.mpf:
    return mpmath.mpf(value)


def self_test() -> list[str]:
    """Mismatches between the embedded digits, a fresh 60-digit evaluation and binary64."""
    problems = []
    with mpmath.workdps(60):
        e = mpmath.e
        fresh = {
            ONE_MINUS_INV_E: 1 - 1 / e,
            ONE_MINUS_TWO_INV_E: 1 - 2 / e,
            INV_E: 1 / e,
            HALF_MINUS_HALF_INV_E: mpmath.mpf(1) / 2 - 1 / (2 * e),
        }
        for text, value in fresh.items():
            if abs(mpmath.mpf(text) - value) > mpmath.mpf(10) ** -50:
                problems.append(f"{text[:12]}... disagrees with recomputation")
            if abs(float(text) - _FLOAT_FORMS[text]()) > 4e-16:
                problems.append(f"{text[:12]}... disagrees with float evaluation")
    return problems
