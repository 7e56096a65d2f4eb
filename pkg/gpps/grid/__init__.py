from gpps.grid.core import Grid, Wavefunction, make_grid
from gpps.grid.spectral import (
    SpectralField,
    forward_transform,
    gradient_spectral,
    integrate,
    inverse_transform,
    laplacian,
)
