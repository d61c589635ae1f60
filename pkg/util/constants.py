# Defaults for scenario configs and library parameters.

# control (2D grid studies)
DT = 0.05
R = 3.0
GAMMA_INI = 0.03
DELTA = 0.08
LAMBDA = 1.5
HORIZON = 7

U_MAX = 5.0  # not given for the 2D grid studies
KP = 1.0
GOAL_TOL = 0.5
MAX_STEPS = 400
GRID_BOUNDS = ((0.0, 0.0), (50.0, 50.0))

SOLVER_TOL = 1e-6
MAX_ITERS = 200
TERMINAL_WEIGHT = 0.0

REFERENCE_MODES = ("constant", "nominal")
REFERENCE_MODE = "constant"

TRUST_DECIMATION = 1

# trust estimation (road-simulator study)
RHO = (0.4, 0.5, 0.1)
NU1, NU01 = 0.6, 1.0
NU2, NU02 = 0.10, 1.0
NU3, NU03 = 0.8, 0.5
ALPHA, BETA, BETA0 = 1.0, 0.08, 0.55
FLUCTUATION_SENSITIVITY = 0.25

N_TRAITS = 3
N_KEYPOINTS = 17

WEIGHT_SUM_TOL = 1e-9

SOLVER_STATUSES = ("optimal", "feasible_suboptimal", "infeasible_fallback")

LOG_FILE = "/tmp/trustnav.log"
