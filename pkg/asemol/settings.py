"""
Django settings for the asemol project.

The project carries no web surface: Django provides configuration,
logging and the management-command CLI (``python manage.py <command>``).

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='asemol-insecure-local-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'autodiff',
    'chem',
    'fragments',
    'encoder',
    'motifs',
    'experts',
    'training',
    'moldata',
]

# No app declares models; the database is never opened by any command.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

USE_TZ = True
TIME_ZONE = 'UTC'

# REST Framework settings (serializers validate configs and render reports)
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'UNAUTHENTICATED_USER': None,
    'COMPACT_JSON': True,
    'STRICT_JSON': True,
}

# Logging: verbosity is driven by ASEMOL_LOG_LEVEL
ASEMOL_LOG_LEVEL = config('ASEMOL_LOG_LEVEL', default='INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': ASEMOL_LOG_LEVEL,
    },
}

# Default hyper-parameters; a --config file and command-line flags override these
ASEMOL_DEFAULTS = {
    'seed': config('ASEMOL_SEED', default=0, cast=int),
    'batch_size': 128,
    'learning_rate': 0.001,
    'weight_decay': 0.0,
    'optimizer': 'sgd',
    'encoder': 'gin',
    'num_layers': 5,
    'hidden_dim': 300,
    'readout': 'mean',
    'experts': 3,
    'alpha': 0.1,
    'beta': 0.1,
    'psi': 0.2,
    'margin': 0.5,
    'patience': 3,
    'epochs_rec': 100,
    'epochs_total': 200,
    'gamma': 0.1,
    'tau': 0.1,
    'split': 'scaffold',
    'split_ratios': [0.8, 0.1, 0.1],
    'ablation': 'none',
}
