"""
Configuration settings for the masked-diffusion sampler toolkit
"""

import os

from dotenv import load_dotenv

load_dotenv()

# Numerical tolerances
PROB_SUM_TOL = 1e-9  # Categorical must sum to 1 within this
JOINT_SUM_TOL = 1e-12  # JointTable / SubsetWeight normalization
CONFIDENCE_JITTER = 1e-12  # Gumbel jitter temperature for confidence ties

# Capacity guards for the exact oracles
ROUND_PMF_CAPACITY = 10**6  # entries of a RoundPmf / token assignments
JOINT_CAPACITY = 10**6  # |S|^D of a dense JointTable
PATH_CAPACITY = 10**7  # |S|^D * D! CTS paths

# Harness defaults
DEFAULT_SEED = int(os.getenv("MDSAMPLER_SEED", "0"))
DEFAULT_WORKERS = int(os.getenv("MDSAMPLER_WORKERS", "1"))
TORCH_THREADS = 1  # keeps forward passes independent of the harness layout
DEFAULT_DRAWS = 10**6
DEFAULT_GENERATIONS = 1024
TRACE_LIMIT = 16  # traces dumped per experiment row

# Unmasking schedules
SCHEDULE_KINDS = ["cosine", "uniform"]
DEFAULT_SCHEDULE = "uniform"
FINAL_SELECTION_NOISE = False  # final round ranks without Gumbel noise

# Ordering policies and drivers
POLICIES = ["random", "confidence", "moment", "halton", "hybrid"]
DRIVERS = ["cts", "maskgit-chain", "cts-cached"]
HALTON_BASES = (2, 3)

# Nanoformer defaults
TRANSFORMER_DEFAULTS = {
    "layers": 2,
    "d_model": 32,
    "d_k": 16,
    "d_ff": 64,
    "heads": 1,
    "alphabet_size": 16,
    "seq_len": 32,
    "positional": True,
    "dtype": "float64",
    "init_scale": 1.0,
    "token_prior": 1.0,
}

# Verification suites
VERIFY_SUITES = [
    "dist",
    "gumbel",
    "rounds",
    "schedules",
    "policies",
    "oracle",
    "cts",
    "nanoformer",
    "metrics",
]

# Output
CSV_COMMENT_PREFIX = "# mdsampler config="
FLOAT_FORMAT = "%.12g"

# Logging
ENABLE_LOGGING = os.getenv("MDSAMPLER_LOG_FILE") is not None
LOG_FILE = os.getenv("MDSAMPLER_LOG_FILE", "mdsampler.log")
LOG_LEVEL = os.getenv("MDSAMPLER_LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
