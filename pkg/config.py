import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Application settings
APP_NAME = "anisodrop"
APP_VERSION = "0.4.0"
DEBUG = os.getenv("DEBUG", "False").lower() == "true"
LOG_LEVEL = os.getenv("LOG_LEVEL", "DEBUG" if DEBUG else "INFO").upper()

# Worker cap for parallel maps (boundary samples, restarts, sweep points)
ANISODROP_THREADS = max(1, int(os.getenv("ANISODROP_THREADS", str(os.cpu_count() or 1))))

# Output settings
DEFAULT_OUTPUT_DIR = os.getenv("ANISODROP_OUTPUT_DIR", "out")

# Numerical defaults (overridden by experiment configs and CLI flags)
DEFAULT_TOL = float(os.getenv("ANISODROP_TOL", "1e-8"))
DEFAULT_SEED = int(os.getenv("ANISODROP_SEED", "12345"))
DEFAULT_MC_SAMPLES = int(os.getenv("ANISODROP_MC_SAMPLES", "10000000"))
DEFAULT_WULFF_SAMPLES = 256

# Shape file settings
SUPPORTED_SHAPE_FORMATS = ["json", "png"]
