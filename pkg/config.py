#!/usr/bin/env python3
"""
Runtime configuration for witnesslab.

All settings come from the environment (optionally a .env file) so that
capacity limits and search parameters can be tuned without code changes.
"""

import os

from dotenv import load_dotenv

# ─────────────────────────────── CONFIG ──────────────────────────────── #

ENV_PATH = os.getenv("WITNESSLAB_ENV_FILE", ".env")
load_dotenv(ENV_PATH)

# Dense representation limits (qubits)
DENSE_VECTOR_CAP     = int(os.getenv("DENSE_VECTOR_CAP", "16"))
DENSE_DENSITY_CAP    = int(os.getenv("DENSE_DENSITY_CAP", "12"))
PSD_CHECK_MAX_QUBITS = int(os.getenv("PSD_CHECK_MAX_QUBITS", "10"))

# Exhaustive stabilizer-basis scans
DIAGONAL_SCAN_CAP    = int(os.getenv("DIAGONAL_SCAN_CAP", "30"))
SCAN_CHUNK           = int(os.getenv("SCAN_CHUNK", str(1 << 20)))

# Detection margins
DETECTION_MARGIN     = float(os.getenv("DETECTION_MARGIN", "0"))
SAMPLED_MARGIN_K     = float(os.getenv("SAMPLED_MARGIN_K", "3"))

# Alternating product-state search
SEARCH_RESTARTS      = int(os.getenv("SEARCH_RESTARTS", "10"))
SEARCH_TOL           = float(os.getenv("SEARCH_TOL", "1e-10"))
SEARCH_MAX_ITER      = int(os.getenv("SEARCH_MAX_ITER", "10000"))
ORACLE_WORKERS       = int(os.getenv("ORACLE_WORKERS", "1"))

# Sampling
DEFAULT_SEED         = int(os.getenv("DEFAULT_SEED", "42"))
RNG_ALGORITHM        = "numpy.PCG64"

# Reports
REPORT_SCHEMA        = "witnesslab/1"

# HTTP front end
API_HOST             = os.getenv("API_HOST", "0.0.0.0")
API_PORT             = int(os.getenv("PORT", os.getenv("API_PORT", "8000")))

LOG_LEVEL            = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_FORMAT           = "%(asctime)s %(levelname)-8s %(name)s: %(message)s"
LOG_DATEFMT          = "%Y-%m-%d %H:%M:%S"
