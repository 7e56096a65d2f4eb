"""
Model coefficients kept as `rational * (2 pi)^p * eps^q * strength(beta, lam, n3^2)`
so every printed value can be traced back to its exact structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np

Strength = Callable[[float, float, float], float]


@dataclass(frozen=True)
class Coefficient:
    rational: Fraction
    two_pi_power: Fraction
    eps_power: int
    strength: Strength
    strength_label: str

    def value(
        self, beta: float, lam: float, n3_squared: float, eps: Optional[float] = None
    ) -> float:
        if self.eps_power != 0 and eps is None:
            raise ValueError(f"Coefficient of {self.strength_label} needs eps.")
        scale = float(self.rational) * (2.0 * np.pi) ** float(self.two_pi_power)
        if self.eps_power != 0:
            scale *= eps**self.eps_power
        return scale * self.strength(beta, lam, n3_squared)


def _coefficient(
    rational: str, two_pi_power: str, eps_power: int, strength: Strength, label: str
) -> Coefficient:
    return Coefficient(
        rational=Fraction(rational),
        two_pi_power=Fraction(two_pi_power),
        eps_power=eps_power,
        strength=strength,
        strength_label=label,
    )


# keyed by ModelKind value; "local" multiplies |psi|^2, "nonlocal" the kernel term
COEFFICIENTS: Dict[str, Dict[str, Coefficient]] = {
    "Gpps3D": {
        "local": _coefficient(
            "1", "0", 0, lambda beta, lam, n3: beta - lam, "beta - lam"
        ),
        "nonlocal": _coefficient("3", "0", 0, lambda beta, lam, n3: lam, "lam"),
    },
    "Quasi2DI": {
        "local": _coefficient(
            "1",
            "-1/2",
            -1,
            lambda beta, lam, n3: beta - lam + 3.0 * lam * n3,
            "beta - lam + 3 lam n3^2",
        ),
        "nonlocal": _coefficient("-3/2", "0", 0, lambda beta, lam, n3: lam, "lam"),
    },
    "Quasi2DII": {
        "local": _coefficient(
            "1",
            "-1/2",
            -1,
            lambda beta, lam, n3: beta - lam + 3.0 * lam * n3,
            "beta - lam + 3 lam n3^2",
        ),
        "nonlocal": _coefficient("-3/2", "0", 0, lambda beta, lam, n3: lam, "lam"),
    },
    "Quasi1D": {
        "local": _coefficient(
            "1",
            "-1",
            -2,
            lambda beta, lam, n3: beta + 0.5 * lam * (1.0 - 3.0 * n3),
            "beta + lam (1 - 3 n3^2) / 2",
        ),
        "nonlocal": _coefficient(
            "-3/8",
            "-1/2",
            -1,
            lambda beta, lam, n3: lam * (3.0 * n3 - 1.0),
            "lam (3 n3^2 - 1)",
        ),
    },
    "Limit2D": {
        "local": _coefficient(
            "1",
            "-1/2",
            0,
            lambda beta, lam, n3: beta - (1.0 - 3.0 * n3) * lam,
            "beta - (1 - 3 n3^2) lam",
        ),
    },
    "Limit1D": {
        "local": _coefficient(
            "1",
            "-1",
            0,
            lambda beta, lam, n3: beta + 0.5 * lam * (1.0 - 3.0 * n3),
            "beta + lam (1 - 3 n3^2) / 2",
        ),
    },
}


def coefficient_audit_table(
    kind: str, beta: float, lam: float, n3_squared: float, eps: Optional[float] = None
) -> List[Dict[str, Any]]:
    """
    Structured listing of the coefficients of one model with their values.

    Args:
        kind (str): `ModelKind` value, e.g. `"Quasi2DI"`.
        beta (float): Contact strength.
        lam (float): Dipolar strength.
        n3_squared (float): Squared third component of the dipole axis.
        eps (Optional[float]): Confinement parameter, required by the
            quasi-2D and quasi-1D kinds.

    Returns:
        List[Dict[str, Any]]: One row per term with keys
            `kind, term, rational, two_pi_power, eps_power, strength, value`.

    Example:
        ```python
        from gpps.models.coefficients import coefficient_audit_table

        for row in coefficient_audit_table("Limit2D", 1.0, 0.0, 1.0):
            print(row)
        # {'kind': 'Limit2D', 'term': 'local', 'rational': '1',
        #  'two_pi_power': '-1/2', 'eps_power': 0, ..., 'value': 0.3989...}
        ```
    """
    if kind not in COEFFICIENTS:
        raise ValueError(
            f"Unknown model kind {kind!r}, expected one of {list(COEFFICIENTS)}."
        )
    rows = []
    for term, coefficient in COEFFICIENTS[kind].items():
        rows.append(
            {
                "kind": kind,
                "term": term,
                "rational": str(coefficient.rational),
                "two_pi_power": str(coefficient.two_pi_power),
                "eps_power": coefficient.eps_power,
                "strength": coefficient.strength_label,
                "value": coefficient.value(beta, lam, n3_squared, eps),
            }
        )
    return rows
