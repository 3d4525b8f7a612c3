"""
Django settings for the attitude-lab project.

Every tunable is read through python-decouple, so values can come from the
environment or a local .env file. See ENV_VARIABLES.md for the full list.
"""

from pathlib import Path
import os
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-attitude-lab-local-development-key-only')

DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',

    # Third-party apps
    'rest_framework',

    # Local apps
    'attmath',
    'plant',
    'errstate',
    'regressor',
    'drem',
    'controller',
    'sim',
    'diagnostics',
    'cli',
]


# Database (run registry)

DB_ENGINE = config('DB_ENGINE', default='django.db.backends.sqlite3')

if DB_ENGINE == 'django.db.backends.sqlite3':
    DATABASES = {
        'default': {
            'ENGINE': DB_ENGINE,
            'NAME': BASE_DIR / config('DB_NAME', default='db.sqlite3'),
        }
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': DB_ENGINE,
            'NAME': config('DB_NAME'),
            'USER': config('DB_USER'),
            'PASSWORD': config('DB_PASSWORD'),
            'HOST': config('DB_HOST', default='localhost'),
            'PORT': config('DB_PORT', default='5432'),
        }
    }

TIME_ZONE = config('TIME_ZONE', default='UTC')

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

TOOL_NAME = 'attitude-lab'
TOOL_VERSION = '1.0.0'

# ============================================================================
# SIMULATION CONFIGURATION
# ============================================================================

# Fixed RK4 step used when a scenario file omits `step`
SIM_DEFAULT_STEP = config('SIM_DEFAULT_STEP', default=0.01, cast=float)

# Threshold on Delta_N used to detect the onset of persistent excitation
SIM_PE_THRESHOLD = config('SIM_PE_THRESHOLD', default=1e-2, cast=float)

# Abort a run when |q_e4| drops below this value
SIM_UNWINDING_GUARD = config('SIM_UNWINDING_GUARD', default=1e-6, cast=float)

# Worker processes for compare/sweep
SIM_WORKERS = config('SIM_WORKERS', default=2, cast=int)

SIM_OUTPUT_DIR = Path(config('SIM_OUTPUT_DIR', default=str(BASE_DIR / 'output')))
SIM_SCENARIO_DIR = Path(config('SIM_SCENARIO_DIR', default=str(BASE_DIR / 'cli' / 'scenarios')))

# Significant digits for every float written to CSV
SIM_CSV_DIGITS = config('SIM_CSV_DIGITS', default=17, cast=int)

# Metrics window start for compare (clipped to the run duration)
SIM_METRICS_WINDOW_START = config('SIM_METRICS_WINDOW_START', default=40.0, cast=float)

# Analysis-only constants of the Lyapunov diagnostics
SIM_RHO = config('SIM_RHO', default=1.0, cast=float)
SIM_SCALING_R0 = config('SIM_SCALING_R0', default=0.1, cast=float)

# ============================================================================
# LOGGING CONFIGURATION
# ============================================================================

LOG_LEVEL = config('LOG_LEVEL', default='DEBUG' if DEBUG else 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {asctime} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': LOG_LEVEL,
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'level': 'INFO',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': os.path.join(BASE_DIR, 'logs', 'attitude_lab.log'),
            'maxBytes': 1024 * 1024 * 10,  # 10 MB
            'backupCount': 5,
            'formatter': 'verbose',
        },
        'error_file': {
            'level': 'ERROR',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': os.path.join(BASE_DIR, 'logs', 'errors.log'),
            'maxBytes': 1024 * 1024 * 10,  # 10 MB
            'backupCount': 5,
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'INFO',
            'propagate': False,
        },
        'django.db.backends': {
            'handlers': ['console'],
            'level': 'WARNING' if DEBUG else 'ERROR',
            'propagate': False,
        },
        'sim': {
            'handlers': ['console', 'file', 'error_file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'cli': {
            'handlers': ['console', 'file', 'error_file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'drem': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'diagnostics': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'plant': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'errstate': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'controller': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'regressor': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
    'root': {
        'handlers': ['console', 'file'],
        'level': 'INFO',
    },
}

# Create logs directory if it doesn't exist
LOGS_DIR = os.path.join(BASE_DIR, 'logs')
if not os.path.exists(LOGS_DIR):
    os.makedirs(LOGS_DIR)
