from gpps.models.coefficients import COEFFICIENTS, Coefficient, coefficient_audit_table
from gpps.models.core import (
    EnergyBreakdown,
    ModelKind,
    ModelParams,
    chemical_potential,
    effective_potential,
    energy,
    energy_summary,
    hamiltonian_apply,
    interaction_energy,
    nonlocal_multiplier,
    nonlocal_potential,
)
from gpps.models.potentials import PotentialForm, PotentialSpec
