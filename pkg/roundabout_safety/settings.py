from pathlib import Path
from decouple import config

# Build paths
BASE_DIR = Path(__file__).resolve().parent.parent

# Security
SECRET_KEY = config('SECRET_KEY', default='django-insecure-headless-simulator')
DEBUG = config('DEBUG', default=False, cast=bool)
ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'trajectory.apps.TrajectoryConfig',
    'ssm.apps.SsmConfig',
    'gaze.apps.GazeConfig',
    'scenario.apps.ScenarioAppConfig',
    'warning.apps.WarningConfig',
    'intent.apps.IntentConfig',
    'stats.apps.StatsConfig',
]

# Database (unused by the apps, Django still wants one configured)
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': config('DB_NAME', default=BASE_DIR / 'db.sqlite3'),
    }
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Tool version echoed into run manifests
ROUNDABOUT_VERSION = '1.0.0'
SCENARIO_SCHEMA_VERSION = 1

# Simulation
SIM_DT = config('SIM_DT', default=0.1, cast=float)
SIM_TIMEOUT_S = config('SIM_TIMEOUT_S', default=60.0, cast=float)
JITTER_FRACTION = config('JITTER_FRACTION', default=0.10, cast=float)

# Kalman smoothing
KALMAN_PROCESS_NOISE_STD = config('KALMAN_PROCESS_NOISE_STD', default=1.0, cast=float)
KALMAN_POS_NOISE_STD = config('KALMAN_POS_NOISE_STD', default=0.5, cast=float)
KALMAN_VEL_NOISE_STD = config('KALMAN_VEL_NOISE_STD', default=0.3, cast=float)
KALMAN_INITIAL_COV_SCALE = config('KALMAN_INITIAL_COV_SCALE', default=10.0, cast=float)

# Vehicle braking capability (truncated normal MADR, m/s^2)
MADR_MEAN = config('MADR_MEAN', default=8.45, cast=float)
MADR_STD = config('MADR_STD', default=1.40, cast=float)
MADR_LOWER = config('MADR_LOWER', default=4.23, cast=float)
MADR_UPPER = config('MADR_UPPER', default=12.68, cast=float)
VEHICLE_RADIUS_M = config('VEHICLE_RADIUS_M', default=2.0, cast=float)

# Infrastructure warning
WARNING_HORIZON_S = config('WARNING_HORIZON_S', default=10.0, cast=float)
WARNING_LATENCY_S = config('WARNING_LATENCY_S', default=0.0, cast=float)

# Intent prediction
INTENT_TEST_SIZE = config('INTENT_TEST_SIZE', default=0.2, cast=float)

# Logging Configuration
LOGS_DIR = Path(config('LOG_DIR', default=str(BASE_DIR / 'logs')))
LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': LOGS_DIR / 'roundabout.log',
            'formatter': 'verbose',
        },
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console', 'file'],
        'level': LOG_LEVEL,
    },
    'loggers': {
        app: {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        }
        for app in ('trajectory', 'ssm', 'gaze', 'scenario', 'warning', 'intent', 'stats')
    },
}

# Create logs directory
LOGS_DIR.mkdir(parents=True, exist_ok=True)
