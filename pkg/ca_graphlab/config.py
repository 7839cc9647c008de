VERSION = "0.1.0"
RECOMPUTE_PERIOD = 4096
CSV_FLOAT_FORMAT = "%.12g"
DEFAULT_S_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))
DEFAULT_ESTIMATORS = ("hill", "moment", "uh", "mixed_moment")
ENUMERATION_LIMIT = 1500
WEIGHT_RTOL = 1e-9
THREADS_ENV = "CA_GRAPHLAB_THREADS"
# slack for float rounding when an increment sits exactly on an envelope edge
BOUND_ATOL = 1e-12
