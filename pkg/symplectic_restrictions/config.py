"""Configuration for computation bounds, the report store and the HTTP surface."""

import logging
import os

# Load environment variables from .env file
from dotenv import load_dotenv
load_dotenv()


class EngineConfig:
    """Engine bounds and reproducibility settings."""

    # Check if we're in a test environment
    IS_TESTING = os.getenv("TESTING", "false").lower() == "true"

    # Truncation quasi-degree for restriction spaces
    DEGREE_BOUND = int(os.getenv("DEGREE_BOUND", "40"))

    # Search ceiling for Lagrangian tangency orders
    LT_CEILING = int(os.getenv("LT_CEILING", "24"))

    # Largest t-degree accepted in user branch maps
    JET_CUTOFF = int(os.getenv("JET_CUTOFF", "64"))

    # Seed for moduli instantiation
    SEED = int(os.getenv("SEED", "20240611"))

    # Thread pool width for verify
    VERIFY_WORKERS = int(os.getenv("VERIFY_WORKERS", "4"))

    # Moduli samples per class in verify
    MODULI_SAMPLES = int(os.getenv("MODULI_SAMPLES", "5"))

    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

    @classmethod
    def snapshot(cls, **overrides) -> dict:
        """Effective bounds, echoed in every report."""
        values = {
            "degree_bound": cls.DEGREE_BOUND,
            "lt_ceiling": cls.LT_CEILING,
            "jet_cutoff": cls.JET_CUTOFF,
            "seed": cls.SEED,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return values


class RateLimitConfig:
    """Rate limiting configuration settings for the HTTP surface."""

    IS_TESTING = EngineConfig.IS_TESTING

    # Cheap lookups (health, germ listing, stored reports)
    API_LIMIT = os.getenv("API_LIMIT", "1000/minute" if IS_TESTING else "100/minute")

    # Anything that builds a restriction space or runs a tangency search
    COMPUTE_LIMIT = os.getenv("COMPUTE_LIMIT", "100/minute" if IS_TESTING else "10/minute")


def configure_logging(level: str = None) -> None:
    """Install a single stream handler on the root logger."""
    logging.basicConfig(
        level=(level or EngineConfig.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
