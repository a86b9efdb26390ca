"""
Django settings for the purification project.

Only the pieces the numerical apps and their management commands need are
configured: there is no database, no HTTP surface and no static content.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get("PURIFICATION_SECRET_KEY", "django-insecure-purification-local-only")

DEBUG = os.environ.get("PURIFICATION_DEBUG", "0") == "1"

ALLOWED_HOSTS: list[str] = []


# Application definition

INSTALLED_APPS = [
    "blochstate",
    "trajectories",
    "protocols",
    "bayes",
    "fokkerplanck",
    "passage",
    "harness",
]

DATABASES: dict[str, dict] = {}

CACHES = {
    "default": {
        "BACKEND": "django.core.cache.backends.locmem.LocMemCache",
        "LOCATION": "purification-cache",
    }
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "root": {
        "handlers": ["console"],
        "level": os.environ.get("PURIFICATION_LOG_LEVEL", "WARNING"),
    },
}

TIME_ZONE = "UTC"

USE_TZ = True


# Numerical defaults. All times are in units of 1/Gamma_0.

PURIFICATION_DEFAULT_DT = 1e-3
PURIFICATION_MAX_DT = 1e-2
PURIFICATION_RADIAL_SLACK = 1e-9
PURIFICATION_RADIAL_MIN = 1e-6
PURIFICATION_NOISE_CHUNK = 256

PURIFICATION_FPE_CELLS = 400
PURIFICATION_FPE_EPSILON_FLOOR = 1e-8

PURIFICATION_MTFP_RTOL = 1e-6

PURIFICATION_OUTPUT_DIR = BASE_DIR / "runs"
