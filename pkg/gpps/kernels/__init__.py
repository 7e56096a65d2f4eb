from gpps.kernels.core import (
    KernelKind,
    KernelSymbol,
    apply_dipolar_3d,
    apply_nonlocal_1d,
    apply_nonlocal_2dI,
    apply_nonlocal_2dII,
    dipolar_3d_multiplier,
    dipolar_projection_multiplier,
    kernel_check_table,
    nonlocal_1d_multiplier,
    nonlocal_2dI_multiplier,
    nonlocal_2dII_multiplier,
    rescaled_projection_table,
    riesz_alpha,
    spectral_pairing,
    t_eps_alpha,
)
from gpps.kernels.symbols import (
    DipoleAxis,
    kernel_u1d_real_space,
    kernel_u2d_real_space,
    scaled_exp1,
    symbol_aniso2d,
    symbol_dip3d,
    symbol_u1d,
    symbol_u1d_virial,
    symbol_u2d,
    symbol_virial_weight,
    u1d_quadrature,
    u2d_quadrature,
    virial_weight_gauss_legendre,
)
