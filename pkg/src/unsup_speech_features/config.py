"""Config file for the project."""

from pathlib import Path


# Defining paths
ROOT_DIR = Path(__file__).resolve().parent.parent.parent

DATA_DIR = ROOT_DIR / "data"

SYNTH_DIR = DATA_DIR / "synthetic"

RUNS_DIR = DATA_DIR / "runs"

# Environment variable holding the default worker count
THREADS_ENV = "ZR_THREADS"

# Acoustic front end
FRAME_RATE_HZ = 100.0
MIN_SAMPLE_RATE_HZ = 8000
WINDOW_SECONDS = 0.025
HOP_SECONDS = 0.010
PRE_EMPHASIS = 0.97
N_MEL_FILTERS = 26
N_CEPSTRA = 13
LOG_FLOOR = 1e-10
DELTA_WINDOW = 2
CMVN_VARIANCE_FLOOR = 1e-8
FEATURE_DIM = 3 * N_CEPSTRA

# Alignment
ZERO_NORM_EPS = 1e-12
METRICS = ("cosine", "euclidean")

# Architectures
HIDDEN_UNITS = 100
HIDDEN_LAYERS = 6
BOTTLENECK_DIM = 39
SPEAKER_EMBEDDING_DIM = 100
TRIAMESE_WIDE_HIDDEN = (1000, 1000, 1000, 1000)
TRIAMESE_WIDE_EMBEDDING = 100

# Optimisation
ADADELTA_LR = 0.001
ADADELTA_RHO = 0.95
ADADELTA_EPS = 1e-6
SGD_LR = 0.01
SGD_DECAY = 1e-6
MARGIN = 0.15
BATCH_SIZE = 256
PATIENCE = 5

# Gradient checking
GRADCHECK_EPSILON = 1e-4
GRADCHECK_TOLERANCE = 1e-4

# Binary formats
ARCHIVE_MAGIC = b"ZRFA1\x00"
CHECKPOINT_MAGIC = b"ZRCK1\x00"
DATASET_MAGIC = b"ZRDS1\x00"
