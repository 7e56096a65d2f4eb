NUM_THREADS_ENV = "GPPS_NUM_THREADS"

MIN_GRID_POINTS = 8
UNIT_AXIS_TOLERANCE = 1e-12
AXIS_RENORMALIZE_TOLERANCE = 1e-6

GRADIENT_FLOW_TOLERANCE = 1e-8
GRADIENT_FLOW_MAX_ITERATIONS = 20000
GRADIENT_FLOW_MAX_HALVINGS = 5
GRADIENT_FLOW_WARMUP_STEPS = 10
NONEXISTENCE_ENERGY_FLOOR = -1e6
GRADIENT_FLOW_MAX_TAU = 1.0
GRADIENT_FLOW_GROWTH_INTERVAL = 10
GRADIENT_FLOW_ENERGY_SLACK = 1e-12
COLLAPSE_TAIL_FRACTION = 1e-3

CB_DEFAULT_EXTENT = 16.0
CB_DEFAULT_POINTS = 256
CB_TOLERANCE = 1e-3
CB_MAX_ITERATIONS = 5000
CB_SHOOTING_RADIUS = 16.0

SCALING_LEAKAGE_TOLERANCE = 1e-8

PEAK_GROWTH_BLOWUP_FACTOR = 1e4
SPECTRAL_TAIL_TOLERANCE = 1e-8
SPECTRAL_TAIL_FRACTION = 2.0 / 3.0

TRANSVERSE_DT_FACTOR = 1.0 / 20.0
TRANSVERSE_POINTS = 32
TRANSVERSE_EXTENT = 6.0

I_QUADRATURE_NODES = 64
I_QUADRATURE_CUTOFF = 8.0

SNAPSHOT_MAGIC = b"GPPSSNAP"
SNAPSHOT_VERSION = 1

OBSERVABLES_HEADER = [
    "t",
    "mass",
    "E_total",
    "E_kin",
    "E_pot",
    "E_contact",
    "E_dip",
    "sigmaV",
    "dsigmaV",
    "virial_residual",
    "peak_density",
]
ITERATIONS_HEADER = ["iteration", "tau", "E_total", "change"]
KERNEL_CHECK_HEADER = ["kind", "abs_xi", "eps", "closed_form", "quadrature", "rel_err"]
REDUCTION_HEADER = [
    "t",
    "total",
    "transverse",
    "transverse_gradient",
    "projected",
    "gradient_norm",
]

MANIFEST_FILE_NAME = "manifest.json"

DEFAULT_RECORD_EVERY = 10
INITIAL_MASS_TOLERANCE = 1e-8
CADENCE_TOLERANCE = 1e-2
ENERGY_ZERO_TOLERANCE = 1e-10

DEFAULT_GRID_EXTENT = 8.0
DEFAULT_GRID_POINTS = 128
DEFAULT_FINAL_TIME = 1.0
DEFAULT_TIME_STEP = 1e-3
DEFAULT_EPS_LADDER = [0.25, 0.125, 0.0625]
DEFAULT_OUTPUT_DIRECTORY = "runs"
KERNEL_CHECK_RANGE = (1e-2, 1e2)
KERNEL_CHECK_POINTS = 20

FIELD_FILE_NAME = "field.snap"
ENERGY_FILE_NAME = "energy.json"
ITERATIONS_FILE_NAME = "iterations.csv"
OBSERVABLES_FILE_NAME = "observables.csv"
SUMMARY_FILE_NAME = "summary.json"
REGIME_FILE_NAME = "regime.json"
RATE_FIT_FILE_NAME = "ratefit.json"
KERNEL_CHECK_FILE_NAME = "kernel_check.csv"
